"""Holder-continuity bounds for quasiconformal maps in the chordal metric."""

from .bounds import (
    BoundValue,
    DistortionParams,
    LambdaBounds,
    aux_radius,
    bonfert_bound,
    eta_inverse_lower,
    eta_m_bound,
    eta_upper,
    holder_lift,
    lehto_constant,
    m1_default,
    m1_from_m3,
    m2_hat,
    m3_ball,
    m3_global,
    m4_crude,
    m4_sharp,
    qs_spherical_bound,
    theorem_R,
)
from .geometry import (
    DiskAutomorphism,
    ExtendedPoint,
    SphereSpec,
    chord_waypoint,
    disk_automorphism,
    invert,
    spherical_distance,
    stereo_lift,
)
from .maps import parse_map
from .verify import SampleConfig, empirical_holder, run_check, sharpness_trend

__version__ = "0.1.0"
