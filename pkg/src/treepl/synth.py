"""Synthetic measurement generator with injected ground-truth path loss.

Each impulse is a flat in-band spectrum (constant magnitude, uniformly random
phase per bin) plus circularly symmetric complex Gaussian noise on every bin.
The in-band level is chosen so that the processing chain, run with the same
calibration and geometry, returns the ground-truth path loss in expectation.

Random streams come from numpy's PCG64 seeded through ``SeedSequence`` with
the angle (in micro-degrees) as spawn key, so an angle's data does not depend
on which other angles are generated alongside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import constants as const
from .errors import ConfigError, InvalidArgumentError
from .model import LinkGeometry, ModelTable, default_geometry, predict
from .pipeline import CalibrationConstants, ImpulseSpectra, band_mask

RNG_ALGORITHM = "numpy.random.PCG64/SeedSequence(seed, spawn_key=(round(angle_deg*1e6),))"


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``ground_truth`` is either a :class:`ModelTable` (evaluated at
    ``bandwidth_hz``) or an explicit ``{angle_deg: pl_db}`` mapping. The
    ground truth holds when the data are processed at ``bandwidth_hz``.
    ``snr_db=None`` (or ``inf``) disables noise.
    """

    angles_deg: Sequence[float]
    ground_truth: ModelTable | Mapping[float, float]
    bandwidth_hz: float = const.MAX_ANALYSIS_BANDWIDTH_HZ
    n_impulses: int = const.DEFAULT_IMPULSES
    n_bins: int = 4096
    sample_rate_hz: float = const.SWEEP_BANDWIDTH_HZ
    signal_band_hz: float = const.MAX_ANALYSIS_BANDWIDTH_HZ
    snr_db: float | None = 40.0
    seed: int = 0
    cal: CalibrationConstants = field(default_factory=CalibrationConstants)
    geometry: LinkGeometry = field(default_factory=default_geometry)

    def __post_init__(self):
        if self.n_impulses < 1 or self.n_bins < 2:
            raise ConfigError(f"need M >= 1 and N >= 2, got M={self.n_impulses}, N={self.n_bins}")
        if not self.sample_rate_hz > 0:
            raise ConfigError("sample rate must be positive")
        if not 0 < self.signal_band_hz <= self.sample_rate_hz:
            raise ConfigError(
                f"signal band {self.signal_band_hz / 1e6:g} MHz must lie in "
                f"(0, {self.sample_rate_hz / 1e6:g}] MHz"
            )
        if not 0 < self.bandwidth_hz <= self.sample_rate_hz:
            raise ConfigError("analysis bandwidth must lie in (0, sample rate]")
        if self.snr_db is not None and math.isnan(self.snr_db):
            raise ConfigError("snr_db must not be NaN")
        angles = sorted({float(a) for a in self.angles_deg} | {self.geometry.reference_angle_deg})
        object.__setattr__(self, "angles_deg", tuple(angles))

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None or math.isinf(self.snr_db) and self.snr_db > 0

    def ground_truth_pl(self) -> dict[float, float]:
        gt = self.ground_truth
        out = {}
        for angle in self.angles_deg:
            if isinstance(gt, ModelTable):
                try:
                    out[angle] = predict(angle, self.bandwidth_hz, gt, mode="interpolate")
                except ValueError as exc:
                    raise ConfigError(f"ground truth undefined at {angle:g} deg: {exc}") from exc
            else:
                match = [v for a, v in gt.items() if math.isclose(float(a), angle, abs_tol=1e-9)]
                if not match:
                    raise ConfigError(f"ground truth has no path loss for angle {angle:g} deg")
                out[angle] = float(match[0])
        return out


def target_powers(config: SynthConfig) -> dict[float, float]:
    """Mean in-band power per angle that reproduces the ground truth.

    Inverts the calibrated reference loss, the reference-ratio step and the
    near-receiver distance correction.
    """
    pl = config.ground_truth_pl()
    ref = config.geometry.reference_angle_deg
    p_ref = 10.0 ** ((pl[ref] - config.cal.offset_db) / 10.0)
    out = {}
    for angle, pl_a in pl.items():
        excess = pl_a - pl[ref] - config.geometry.correction_db(angle)
        out[angle] = p_ref if angle == ref else p_ref * 10.0 ** (-excess / 10.0)
    return out


def _rng(seed: int, angle_deg: float) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(int(round(angle_deg * 1e6)) & 0xFFFFFFFFFFFF,))
    return np.random.Generator(np.random.PCG64(ss))


def generate_angle(config: SynthConfig, angle_deg: float, power: float) -> ImpulseSpectra:
    m, n, fs = config.n_impulses, config.n_bins, config.sample_rate_hz
    template = ImpulseSpectra(angle_deg, np.zeros((1, n)), fs)
    signal = band_mask(template, config.signal_band_hz)
    analysed = signal & band_mask(template, config.bandwidth_hz)
    k = int(analysed.sum())
    if k == 0:
        raise ConfigError("no signal bins fall inside the analysis bandwidth")
    inv_snr = 0.0 if config.noiseless else 10.0 ** (-config.snr_db / 10.0)
    # expected in-band power per impulse: k*s (signal) + k*s*inv_snr (noise)
    per_bin = power / (k * (1.0 + inv_snr))
    rng = _rng(config.seed, angle_deg)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(m, int(signal.sum())))
    bins = np.zeros((m, n), dtype=np.complex128)
    bins[:, signal] = math.sqrt(per_bin) * np.exp(1j * phase)
    if inv_snr > 0.0:
        sigma = math.sqrt(per_bin * inv_snr / 2.0)
        bins += sigma * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
    return ImpulseSpectra(angle_deg, bins, fs)


def generate(config: SynthConfig) -> list[ImpulseSpectra]:
    """One :class:`ImpulseSpectra` batch per angle, reference angle included."""
    return [generate_angle(config, a, p) for a, p in sorted(target_powers(config).items())]


def perturb(spectra: ImpulseSpectra, scale_db: float) -> ImpulseSpectra:
    """Scale every amplitude by ``10**(scale_db/20)``."""
    if not math.isfinite(scale_db):
        raise InvalidArgumentError(f"scale must be finite, got {scale_db!r}")
    if scale_db == 0:
        return spectra
    return replace(spectra, bins=spectra.bins * 10.0 ** (scale_db / 20.0))


def ground_truth_record(config: SynthConfig) -> dict:
    """Sidecar describing what was injected, for oracle comparison."""
    return {
        "bandwidth_mhz": config.bandwidth_hz / 1e6,
        "snr_db": None if config.noiseless else config.snr_db,
        "seed": config.seed,
        "n_impulses": config.n_impulses,
        "n_bins": config.n_bins,
        "sample_rate_hz": config.sample_rate_hz,
        "signal_band_hz": config.signal_band_hz,
        "rng": RNG_ALGORITHM,
        "pl_db": {format(a, ".12g"): v for a, v in sorted(config.ground_truth_pl().items())},
    }
