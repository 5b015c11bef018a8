"""Local coefficients matrices and fixed-point invariants of covering groups."""

from .cover import CoverDatum, build_cover, bisector_from_q_short, dual_datum
from .errors import CapExceeded, MetacoeffError
from .rootdata import RootDatum, build_root_datum

__all__ = [
    "CapExceeded",
    "CoverDatum",
    "MetacoeffError",
    "RootDatum",
    "bisector_from_q_short",
    "build_cover",
    "build_root_datum",
    "dual_datum",
]
