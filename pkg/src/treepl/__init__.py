"""Single-tree path-loss model versus reception angle and bandwidth at 80 GHz."""

from .errors import TreePLError
from .fitting import AnglePlPoint, FitResult, fit_cubic, fit_table
from .model import (
    CubicCoeffs,
    LinkGeometry,
    ModelTable,
    default_geometry,
    default_table,
    delta_pl,
    eval_poly,
    fspl,
    predict,
    specific_attenuation,
    stationary_points,
)
from .pipeline import (
    CalibrationConstants,
    Ecdf,
    ImpulseSpectra,
    band_power,
    correction_coeff,
    ecdf,
    impulse_power,
    mean_power,
    pl_at_angle,
    pl_at_near_angle,
    pl_direct,
    process_dataset,
)
from .synth import SynthConfig, generate, perturb

__version__ = "0.1.0"
