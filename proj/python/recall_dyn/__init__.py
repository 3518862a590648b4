"""Free-recall attractor network analysis (compiled core)."""

from ._core import *  # noqa: F401,F403
from ._core import Error, NetworkConfig, WeightMatrix

REFERENCE_PATTERNS = [
    [1, 1, 1, 1, 1, 1],
    [2, 2, 2, 1, 1, 1],
    [2, 2, 3, 1, 3, 2],
]

__all__ = ["Error", "NetworkConfig", "WeightMatrix", "REFERENCE_PATTERNS"]
