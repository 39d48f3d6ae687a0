"""Measurement-campaign constants (81.6 GHz willow scenario)."""

import math

SPEED_OF_LIGHT = 299_792_458.0  # m/s

CARRIER_HZ = 81.6e9
SWEEP_BANDWIDTH_HZ = 2.048e9  # FMCW sweep, also the complex sample rate
SWEEP_DURATION_S = 8e-6
SIGNAL_HALF_BAND_HZ = 980e6
MAX_ANALYSIS_BANDWIDTH_HZ = 2 * SIGNAL_HALF_BAND_HZ

ATTENUATOR_DB = 79.0
OWGA_GAIN_DBI = 7.0
DEFAULT_IMPULSES = 1000

REFERENCE_ANGLE_DEG = 180.0
NEAR_ANGLE_DEG = 21.0
DISTANCE_FAR_M = 15.61
DISTANCE_NEAR_M = 13.80
MEASURED_ANGLES_DEG = (21.0, 105.0, 145.0, 180.0)

TREE_HEIGHT_M = 4.3
TREE_DIAMETER_M = 3.0
REFERENCE_SPECIFIC_ATTENUATION_DB_PER_M = 4.83

VALID_ANGLE_RANGE_DEG = (20.0, 180.0)

FOUR_PI_OVER_C_DB = 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT)
