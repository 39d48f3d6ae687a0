"""Least-squares cubic fits of path loss against reception angle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from . import constants as const
from .errors import (
    ConditioningError,
    FitError,
    InvalidArgumentError,
    TreePLError,
    UnderdeterminedError,
)
from .model import CubicCoeffs, ModelTable

# reciprocal condition estimate of R below which the solve is refused
_RCOND_MIN = 1e-12


@dataclass(frozen=True)
class AnglePlPoint:
    alpha_deg: float
    pl_db: float

    def __post_init__(self):
        for name in ("alpha_deg", "pl_db"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class FitResult:
    coeffs: CubicCoeffs
    rms_residual_db: float
    max_abs_residual_db: float
    n_points: int
    residuals_db: np.ndarray


def design_matrix(alpha_rad: np.ndarray) -> np.ndarray:
    """Columns 1, a, a^2, a^3."""
    return np.vander(np.asarray(alpha_rad, dtype=float), 4, increasing=True)


def _as_arrays(points) -> tuple[np.ndarray, np.ndarray]:
    pts = [p if isinstance(p, AnglePlPoint) else AnglePlPoint(*p) for p in points]
    alpha = np.radians([p.alpha_deg for p in pts])
    pl = np.array([p.pl_db for p in pts], dtype=float)
    return alpha, pl


def fit_cubic(points: Iterable[AnglePlPoint | tuple[float, float]]) -> FitResult:
    """Fit ``c*a**3 + d*a**2 + e*a + f`` (a in radians) by least squares.

    Uses a QR factorisation of the design matrix. With exactly four distinct
    angles the result interpolates the points.
    """
    alpha, pl = _as_arrays(points)
    n_distinct = np.unique(np.round(alpha, 12)).size
    if n_distinct < 4:
        raise UnderdeterminedError(
            f"cubic fit needs at least 4 distinct angles, got {n_distinct} ({alpha.size} points)"
        )
    A = design_matrix(alpha)
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() <= _RCOND_MIN * diag.max():
        raise ConditioningError("design matrix is numerically singular")
    x = solve_triangular(R, Q.T @ pl, lower=False)
    f, e, d, c = (float(v) for v in x)
    residuals = pl - A @ x
    return FitResult(
        CubicCoeffs(c, d, e, f),
        float(np.sqrt(np.mean(residuals**2))),
        float(np.max(np.abs(residuals))),
        int(alpha.size),
        residuals,
    )


def fit_table(
    point_sets: Mapping[float, Sequence],
    carrier_hz: float = const.CARRIER_HZ,
    valid_angle_range: tuple[float, float] = const.VALID_ANGLE_RANGE_DEG,
    return_fits: bool = False,
):
    """Fit one cubic per bandwidth (keys in Hz) and assemble a table.

    A failure in any single fit is re-raised as :class:`FitError` naming the
    bandwidth. With ``return_fits`` the per-bandwidth :class:`FitResult`
    mapping is returned alongside the table.
    """
    if not point_sets:
        raise InvalidArgumentError("no point sets to fit")
    fits = {}
    for bw in sorted(point_sets):
        try:
            fits[bw] = fit_cubic(point_sets[bw])
        except TreePLError as exc:
            raise FitError(bw, exc) from exc
    table = ModelTable(carrier_hz, tuple((bw, fits[bw].coeffs) for bw in sorted(fits)), valid_angle_range)
    return (table, fits) if return_fits else table
