"""Closed-form path-loss model for a single deciduous tree.

Path loss is a cubic in the reception angle (radians), with one coefficient
set per signal bandwidth. The bundled default table holds the 81.6 GHz
willow coefficients for 200 to 1960 MHz.
"""

from __future__ import annotations

import bisect
import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, NamedTuple

from . import constants as const
from .errors import (
    BandwidthError,
    DegenerateError,
    DomainError,
    ExtrapolationWarning,
    GeometryError,
    InvalidArgumentError,
    ParseError,
)

_BW_RTOL = 1e-9


def _angle_key(angle_deg: float) -> float:
    return round(float(angle_deg), 9)


@dataclass(frozen=True)
class CubicCoeffs:
    """Coefficients of ``c*a**3 + d*a**2 + e*a + f`` with ``a`` in radians."""

    c: float
    d: float
    e: float
    f: float

    def __post_init__(self):
        for name in ("c", "d", "e", "f"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"coefficient {name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c, self.d, self.e, self.f)


@dataclass(frozen=True)
class ModelTable:
    """Carrier frequency plus coefficient sets ordered by bandwidth."""

    carrier_hz: float
    entries: tuple[tuple[float, CubicCoeffs], ...]
    valid_angle_range: tuple[float, float] = const.VALID_ANGLE_RANGE_DEG

    def __post_init__(self):
        entries = tuple((float(bw), co) for bw, co in self.entries)
        if not entries:
            raise InvalidArgumentError("model table needs at least one entry")
        bws = [bw for bw, _ in entries]
        if any(b <= 0 or not math.isfinite(b) for b in bws):
            raise InvalidArgumentError("bandwidths must be positive and finite")
        if any(b1 <= b0 for b0, b1 in zip(bws, bws[1:])):
            raise InvalidArgumentError("entries must be strictly ascending by bandwidth")
        lo, hi = (float(x) for x in self.valid_angle_range)
        if not lo < hi:
            raise InvalidArgumentError(f"invalid angle range [{lo}, {hi}]")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "valid_angle_range", (lo, hi))
        object.__setattr__(self, "carrier_hz", float(self.carrier_hz))

    @property
    def bandwidths_hz(self) -> list[float]:
        return [bw for bw, _ in self.entries]

    def tabulated(self, bandwidth_hz: float) -> CubicCoeffs | None:
        for bw, coeffs in self.entries:
            if math.isclose(bw, bandwidth_hz, rel_tol=_BW_RTOL):
                return coeffs
        return None

    def coeffs_for(self, bandwidth_hz: float, mode: str = "exact") -> CubicCoeffs:
        """Coefficient set at ``bandwidth_hz``.

        ``mode="interpolate"`` interpolates each coefficient linearly between
        the two bracketing rows; knots return the tabulated row unchanged.
        """
        if mode not in ("exact", "interpolate"):
            raise InvalidArgumentError(f"unknown mode {mode!r}")
        if not math.isfinite(bandwidth_hz):
            raise BandwidthError(f"bandwidth must be finite, got {bandwidth_hz!r}")
        hit = self.tabulated(bandwidth_hz)
        if hit is not None:
            return hit
        if mode == "exact":
            listed = ", ".join(f"{bw / 1e6:g}" for bw in self.bandwidths_hz)
            raise BandwidthError(
                f"bandwidth {bandwidth_hz / 1e6:g} MHz is not tabulated (have {listed} MHz)"
            )
        bws = self.bandwidths_hz
        if not bws[0] <= bandwidth_hz <= bws[-1]:
            raise BandwidthError(
                f"bandwidth {bandwidth_hz / 1e6:g} MHz outside tabulated span "
                f"[{bws[0] / 1e6:g}, {bws[-1] / 1e6:g}] MHz"
            )
        i = bisect.bisect_left(bws, bandwidth_hz)
        (b0, c0), (b1, c1) = self.entries[i - 1], self.entries[i]
        t = (bandwidth_hz - b0) / (b1 - b0)
        return CubicCoeffs(*(x0 + t * (x1 - x0) for x0, x1 in zip(c0.as_tuple(), c1.as_tuple())))

    @classmethod
    def from_dict(cls, data: Mapping) -> ModelTable:
        try:
            entries = sorted(
                (
                    float(row["bandwidth_mhz"]) * 1e6,
                    CubicCoeffs(row["c"], row["d"], row["e"], row["f"]),
                )
                for row in data["entries"]
            )
            rng = tuple(data.get("valid_angle_deg", const.VALID_ANGLE_RANGE_DEG))
            return cls(float(data["carrier_ghz"]) * 1e9, tuple(entries), rng)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidArgumentError):
                raise
            raise ParseError(f"malformed model table: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "carrier_ghz": self.carrier_hz / 1e9,
            "valid_angle_deg": list(self.valid_angle_range),
            "entries": [
                {"bandwidth_mhz": bw / 1e6, "c": co.c, "d": co.d, "e": co.e, "f": co.f}
                for bw, co in self.entries
            ],
        }


@dataclass(frozen=True)
class LinkGeometry:
    """TX-RX distance per reception angle.

    Angles whose distance differs from the reference-angle distance are
    "near" receivers and get a free-space correction on top of the
    correction-coefficient path.
    """

    distances_m: Mapping[float, float]
    carrier_hz: float = const.CARRIER_HZ
    reference_angle_deg: float = const.REFERENCE_ANGLE_DEG
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lookup = {}
        for angle, dist in dict(self.distances_m).items():
            dist = float(dist)
            if not dist > 0 or not math.isfinite(dist):
                raise InvalidArgumentError(f"distance at {angle} deg must be positive, got {dist}")
            lookup[_angle_key(angle)] = dist
        object.__setattr__(self, "_lookup", lookup)

    def distance(self, angle_deg: float) -> float:
        try:
            return self._lookup[_angle_key(angle_deg)]
        except KeyError:
            raise GeometryError(f"no distance for reception angle {angle_deg:g} deg") from None

    def has(self, angle_deg: float) -> bool:
        return _angle_key(angle_deg) in self._lookup

    def is_near(self, angle_deg: float) -> bool:
        if not self.has(angle_deg) or not self.has(self.reference_angle_deg):
            return False
        return self.distance(angle_deg) != self.distance(self.reference_angle_deg)

    def correction_db(self, angle_deg: float) -> float:
        """Extra loss added for ``angle_deg``; zero unless the angle is near."""
        if not self.is_near(angle_deg):
            return 0.0
        return delta_pl(self.distance(self.reference_angle_deg), self.distance(angle_deg))

    def to_dict(self) -> dict:
        return {
            "carrier_ghz": self.carrier_hz / 1e9,
            "reference_angle_deg": self.reference_angle_deg,
            "distances_m": {format(a, ".12g"): d for a, d in sorted(self._lookup.items())},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> LinkGeometry:
        try:
            dists = {float(k): float(v) for k, v in data["distances_m"].items()}
            return cls(
                dists,
                float(data.get("carrier_ghz", const.CARRIER_HZ / 1e9)) * 1e9,
                float(data.get("reference_angle_deg", const.REFERENCE_ANGLE_DEG)),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed geometry: {exc}") from exc
        except ValueError as exc:
            if isinstance(exc, InvalidArgumentError):
                raise
            raise ParseError(f"malformed geometry: {exc}") from exc


def default_geometry() -> LinkGeometry:
    dists = {a: const.DISTANCE_FAR_M for a in const.MEASURED_ANGLES_DEG}
    dists[const.NEAR_ANGLE_DEG] = const.DISTANCE_NEAR_M
    return LinkGeometry(dists)


_DEFAULT_TABLE: ModelTable | None = None


def default_table() -> ModelTable:
    """The bundled 81.6 GHz coefficient table (200-1960 MHz)."""
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        text = resources.files("treepl").joinpath("data/table_i.json").read_text()
        _DEFAULT_TABLE = ModelTable.from_dict(json.loads(text))
    return _DEFAULT_TABLE


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
    return value


def eval_poly(alpha_rad: float, coeffs: CubicCoeffs) -> float:
    """Evaluate the cubic at ``alpha_rad`` radians; no range restriction."""
    a = _finite("alpha_rad", alpha_rad)
    return ((coeffs.c * a + coeffs.d) * a + coeffs.e) * a + coeffs.f


def predict(
    alpha_deg: float,
    bandwidth_hz: float,
    table: ModelTable | None = None,
    mode: str = "exact",
    allow_out_of_range: bool = False,
) -> float:
    """Path loss in dB at reception angle ``alpha_deg`` for ``bandwidth_hz``.

    Outside the table's valid angle range this raises :class:`DomainError`
    unless ``allow_out_of_range`` is set, in which case the value is returned
    and an :class:`ExtrapolationWarning` is issued.
    """
    table = default_table() if table is None else table
    alpha_deg = _finite("alpha_deg", alpha_deg)
    lo, hi = table.valid_angle_range
    if not lo <= alpha_deg <= hi:
        if not allow_out_of_range:
            raise DomainError(f"angle {alpha_deg:g} deg outside model range [{lo:g}, {hi:g}] deg")
        warnings.warn(
            f"angle {alpha_deg:g} deg outside [{lo:g}, {hi:g}] deg; extrapolating",
            ExtrapolationWarning,
            stacklevel=2,
        )
    coeffs = table.coeffs_for(bandwidth_hz, mode)
    return eval_poly(math.radians(alpha_deg), coeffs)


class StationaryPoints(NamedTuple):
    local_max_deg: float | None
    local_min_deg: float | None
    unclassified_deg: tuple[float, ...] = ()


def stationary_points(coeffs: CubicCoeffs) -> StationaryPoints | None:
    """Roots of the derivative, in degrees, classified by the second derivative.

    Returns None when the derivative has no real root.
    """
    a, b, c = 3.0 * coeffs.c, 2.0 * coeffs.d, coeffs.e
    if a == 0.0 and b == 0.0:
        raise DegenerateError("cubic and quadratic terms are both zero")
    if a == 0.0:
        roots = [-c / b]
    else:
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return None
        if disc == 0.0:
            roots = [-b / (2.0 * a)]
        else:
            # cancellation-free pair
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            roots = sorted([q / a, c / q] if q != 0.0 else [0.0, -b / a])
    lmax = lmin = None
    flat = []
    for r in roots:
        curvature = 6.0 * coeffs.c * r + 2.0 * coeffs.d
        deg = math.degrees(r)
        if curvature < 0.0:
            lmax = deg
        elif curvature > 0.0:
            lmin = deg
        else:
            flat.append(deg)
    return StationaryPoints(lmax, lmin, tuple(flat))


def fspl(distance_m: float, freq_hz: float) -> float:
    """Free-space path loss in dB."""
    d = _finite("distance_m", distance_m)
    f = _finite("freq_hz", freq_hz)
    if d <= 0 or f <= 0:
        raise InvalidArgumentError("distance and frequency must be positive")
    return 20.0 * math.log10(d) + 20.0 * math.log10(f) + const.FOUR_PI_OVER_C_DB


def delta_pl(d_reference_m: float, d_near_m: float) -> float:
    """FSPL difference between the reference and a nearer receiver distance."""
    d_ref = _finite("d_reference_m", d_reference_m)
    d_near = _finite("d_near_m", d_near_m)
    if d_ref <= 0 or d_near <= 0:
        raise InvalidArgumentError("distances must be positive")
    return 20.0 * math.log10(d_ref) - 20.0 * math.log10(d_near)


def specific_attenuation(
    depth_m: float,
    gamma_db_per_m: float = const.REFERENCE_SPECIFIC_ATTENUATION_DB_PER_M,
) -> float:
    depth = _finite("depth_m", depth_m)
    if depth < 0:
        raise InvalidArgumentError(f"vegetation depth must be non-negative, got {depth}")
    return _finite("gamma_db_per_m", gamma_db_per_m) * depth

