"""Covert-downlink analysis for dual-waveguide pinching-antenna systems."""
from ._kernels import BACKEND
from .errors import *  # noqa: F401,F403
from .fusion import dep_exact, esp, pgf_coeffs
from .geometry import SystemGeometry
from .local_detect import WardenProfile, make_profile, p_fa, p_md
from .radiation import RadiationSpec

__version__ = "0.1.0"
