"""Threshold-cryptography toolkit: verifiable secret sharing, leaderless
distributed key generation, two-round binding threshold signing and
gossip-based signature aggregation, with a deterministic network simulator
and a scaling benchmark."""

from .errors import ConfigError, NonceReuseError, ProtocolAbort, TrustmeshError
from .groups import GroupBackend, GroupElement, Scalar, get_backend, hash_to_scalar
from .rng import SeededRng

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "GroupBackend",
    "GroupElement",
    "NonceReuseError",
    "ProtocolAbort",
    "Scalar",
    "SeededRng",
    "TrustmeshError",
    "get_backend",
    "hash_to_scalar",
    "__version__",
]
