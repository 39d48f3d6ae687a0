"""Measurement-to-path-loss processing.

Spectra are per-impulse, centred-order DFT bins. Powers stay linear through
averaging and the reference-angle ratio; they are converted to dB only when
the calibrated path loss is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import constants as const
from .errors import (
    BandwidthError,
    DivisionError,
    DomainError,
    EmptyInputError,
    ImpulseIndexError,
    InvalidArgumentError,
    MissingReferenceError,
    ShapeError,
)
from .model import LinkGeometry, default_geometry, delta_pl


@dataclass(frozen=True)
class ImpulseSpectra:
    """M impulses by N complex frequency bins captured at one reception angle.

    Bin ``k`` sits at baseband frequency ``(k - N//2) * fs / N`` (the
    ``fftshift`` ordering; for odd N this is ``(k - (N-1)/2) * fs / N``).
    """

    angle_deg: float
    bins: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        bins = np.asarray(self.bins)
        if bins.ndim == 1:
            bins = bins[np.newaxis, :]
        if bins.ndim != 2:
            raise ShapeError(f"spectra must be M x N, got shape {bins.shape}")
        m, n = bins.shape
        if m < 1 or n < 2:
            raise ShapeError(f"need M >= 1 and N >= 2, got M={m}, N={n}")
        bins = bins.astype(np.complex128, copy=False)
        if not np.all(np.isfinite(bins)):
            raise InvalidArgumentError("spectra contain non-finite amplitudes")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise InvalidArgumentError(f"sample rate must be positive, got {self.sample_rate_hz}")
        bins.flags.writeable = False
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "angle_deg", float(self.angle_deg))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @property
    def n_impulses(self) -> int:
        return self.bins.shape[0]

    @property
    def n_bins(self) -> int:
        return self.bins.shape[1]

    def bin_offsets(self) -> np.ndarray:
        """Signed bin index relative to DC, e.g. -N/2 .. N/2-1 for even N."""
        n = self.n_bins
        return np.arange(n) - n // 2

    def freqs_hz(self) -> np.ndarray:
        return self.bin_offsets() * (self.sample_rate_hz / self.n_bins)


@dataclass(frozen=True)
class CalibrationConstants:
    attenuator_db: float = const.ATTENUATOR_DB
    tx_antenna_gain_dbi: float = const.OWGA_GAIN_DBI
    rx_antenna_gain_dbi: float = const.OWGA_GAIN_DBI

    def __post_init__(self):
        for name in ("attenuator_db", "tx_antenna_gain_dbi", "rx_antenna_gain_dbi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @property
    def offset_db(self) -> float:
        return self.attenuator_db + self.tx_antenna_gain_dbi + self.rx_antenna_gain_dbi


@dataclass(frozen=True)
class AngleResult:
    angle_deg: float
    bandwidth_hz: float
    mean_power: float
    correction: float
    pl_db: float
    near: bool = False

    @property
    def mean_power_db(self) -> float:
        return 10.0 * math.log10(self.mean_power)

    @property
    def correction_db(self) -> float:
        return 10.0 * math.log10(self.correction)


def _check_index(spectra: ImpulseSpectra, m: int) -> int:
    # impulse indices are 1-based
    if not 1 <= m <= spectra.n_impulses:
        raise ImpulseIndexError(f"impulse index {m} outside 1..{spectra.n_impulses}")
    return m - 1


def _stable_mean(values: np.ndarray) -> float:
    # shifted compensated sum: identical inputs return that value bit-for-bit
    if values.size == 0:
        raise EmptyInputError("no impulses to average")
    base = float(values[0])
    return base + math.fsum(values - base) / values.size


def impulse_powers(spectra: ImpulseSpectra) -> np.ndarray:
    """Sum of |X(n)|^2 over all bins, one value per impulse."""
    b = spectra.bins
    return np.sum(b.real * b.real + b.imag * b.imag, axis=1)


def impulse_power(spectra: ImpulseSpectra, m: int) -> float:
    return float(impulse_powers(spectra)[_check_index(spectra, m)])


def mean_power(spectra: ImpulseSpectra) -> float:
    return _stable_mean(impulse_powers(spectra))


def band_mask(spectra: ImpulseSpectra, bandwidth_hz: float) -> np.ndarray:
    """Boolean mask of bins with ``|f| <= bandwidth/2`` (edges inclusive)."""
    fs = spectra.sample_rate_hz
    if not (bandwidth_hz > 0 and math.isfinite(bandwidth_hz)) or bandwidth_hz > fs * (1 + 1e-12):
        raise BandwidthError(
            f"analysis bandwidth {bandwidth_hz / 1e6:g} MHz must be in (0, {fs / 1e6:g}] MHz"
        )
    # |k| * fs / N <= B / 2, compared without dividing
    lhs = np.abs(spectra.bin_offsets()) * fs
    rhs = 0.5 * bandwidth_hz * spectra.n_bins
    return lhs <= rhs * (1 + 1e-12)


def band_powers(spectra: ImpulseSpectra, bandwidth_hz: float) -> np.ndarray:
    b = spectra.bins[:, band_mask(spectra, bandwidth_hz)]
    return np.sum(b.real * b.real + b.imag * b.imag, axis=1)


def band_power(spectra: ImpulseSpectra, bandwidth_hz: float, m: int) -> float:
    """Power of impulse ``m`` (1-based) inside the centred band ``bandwidth_hz``."""
    idx = _check_index(spectra, m)
    return float(band_powers(spectra, bandwidth_hz)[idx])


def mean_band_power(spectra: ImpulseSpectra, bandwidth_hz: float) -> float:
    return _stable_mean(band_powers(spectra, bandwidth_hz))


def correction_coeff(mean_power_alpha: float, mean_power_reference: float) -> float:
    """Linear ratio of mean power at an angle to mean power at the reference angle."""
    if not mean_power_reference > 0:
        raise DivisionError(f"reference power must be positive, got {mean_power_reference}")
    if not mean_power_alpha > 0:
        raise DivisionError(f"angle power must be positive, got {mean_power_alpha}")
    return mean_power_alpha / mean_power_reference


def pl_direct(mean_power_reference: float, cal: CalibrationConstants | None = None) -> float:
    """Path loss at the reference angle.

    The calibration offset (attenuator plus both antenna gains) is added to
    ``10*log10(P)`` with a plus sign, as the calibrated testbed defines it.
    """
    cal = CalibrationConstants() if cal is None else cal
    if not mean_power_reference > 0:
        raise DomainError(f"mean power must be positive, got {mean_power_reference}")
    return (
        cal.attenuator_db
        + cal.tx_antenna_gain_dbi
        + cal.rx_antenna_gain_dbi
        + 10.0 * math.log10(mean_power_reference)
    )


def pl_at_angle(pl_direct_db: float, corr: float) -> float:
    if not corr > 0:
        raise DomainError(f"correction coefficient must be positive, got {corr}")
    return pl_direct_db - 10.0 * math.log10(corr)


def pl_at_near_angle(
    pl_direct_db: float,
    corr: float,
    geometry: LinkGeometry,
    angle_deg: float = const.NEAR_ANGLE_DEG,
) -> float:
    """Path loss for a receiver closer to the tree than the reference one."""
    d_ref = geometry.distance(geometry.reference_angle_deg)
    d_near = geometry.distance(angle_deg)
    return pl_at_angle(pl_direct_db, corr) + delta_pl(d_ref, d_near)


def process_dataset(
    dataset: Iterable[ImpulseSpectra],
    cal: CalibrationConstants | None = None,
    geometry: LinkGeometry | None = None,
    bandwidth_hz: float = const.MAX_ANALYSIS_BANDWIDTH_HZ,
) -> list[AngleResult]:
    """Run the full chain on a set of per-angle batches.

    Returns one :class:`AngleResult` per batch, sorted by angle. Batches at
    angles the geometry marks as near get the distance correction.
    """
    cal = CalibrationConstants() if cal is None else cal
    geometry = default_geometry() if geometry is None else geometry
    batches = list(dataset)
    if not batches:
        raise EmptyInputError("dataset is empty")
    shape = (batches[0].n_impulses, batches[0].n_bins, batches[0].sample_rate_hz)
    seen = set()
    for b in batches:
        if (b.n_impulses, b.n_bins, b.sample_rate_hz) != shape:
            raise ShapeError(
                f"batch at {b.angle_deg:g} deg has M={b.n_impulses}, N={b.n_bins}, "
                f"fs={b.sample_rate_hz:g}; expected M={shape[0]}, N={shape[1]}, fs={shape[2]:g}"
            )
        key = round(b.angle_deg, 9)
        if key in seen:
            raise ShapeError(f"duplicate batch for angle {b.angle_deg:g} deg")
        seen.add(key)

    ref_angle = geometry.reference_angle_deg
    means = {b.angle_deg: mean_band_power(b, bandwidth_hz) for b in batches}
    ref = [a for a in means if math.isclose(a, ref_angle, abs_tol=1e-9)]
    if not ref:
        raise MissingReferenceError(f"dataset has no batch at the {ref_angle:g} deg reference angle")
    p_ref = means[ref[0]]
    pl_ref = pl_direct(p_ref, cal)

    results = []
    for angle in sorted(means):
        corr = correction_coeff(means[angle], p_ref)
        near = geometry.is_near(angle)
        if angle == ref[0]:
            pl = pl_ref
        elif near:
            pl = pl_at_near_angle(pl_ref, corr, geometry, angle)
        else:
            pl = pl_at_angle(pl_ref, corr)
        results.append(AngleResult(angle, bandwidth_hz, means[angle], corr, pl, near))
    return results


def relative_powers_db(spectra: ImpulseSpectra, bandwidth_hz: float | None = None) -> np.ndarray:
    """Per-impulse received power in dB (in-band when ``bandwidth_hz`` is given)."""
    p = impulse_powers(spectra) if bandwidth_hz is None else band_powers(spectra, bandwidth_hz)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(p)


@dataclass(frozen=True)
class Ecdf:
    """Empirical CDF: sorted samples with probabilities ``i/M``, ties kept."""

    values: np.ndarray
    probabilities: np.ndarray

    def __call__(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        return idx / self.values.size

    def __len__(self):
        return self.values.size


def ecdf(samples: Sequence[float]) -> Ecdf:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise EmptyInputError("ECDF needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("ECDF samples must be finite")
    x = np.sort(x, kind="stable")
    p = np.arange(1, x.size + 1) / x.size
    return Ecdf(x, p)
