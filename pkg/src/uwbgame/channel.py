"""Random multipath channel realizations for the uplink users.

Each user sees a tapped delay line with ``L`` real, zero-mean Gaussian
taps. The per-tap variance is the product of a power-delay-profile shape
(flat or exponentially decaying, normalized to ``sum(shape) == L``) and a
per-user large-scale factor made of power-law path loss and optional
lognormal shadowing. Only second-order statistics enter the analysis, so
the Gaussian marginal is a convenience rather than a requirement.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError
from .params import GameParams

SeedLike = Union[int, Sequence[int], np.random.SeedSequence, np.random.Generator]


class PdpKind(str, enum.Enum):
    FLAT = "flat"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class ChannelModel:
    """Second-order description of the users' channels.

    Attributes
    ----------
    pdp_kind : PdpKind
        Shape of the power delay profile.
    decay_constant : float
        Exponential decay per tap (only used for ``EXPONENTIAL``).
    shadowing_sigma_db : float
        Standard deviation of lognormal shadowing in dB; 0 disables it.
    pathloss_exponent : float
        Large-scale gain is ``distance ** -pathloss_exponent`` (1 m reference).
    distance_range : tuple of float
        Users are dropped uniformly in ``[min, max]`` metres.
    per_user_variance : sequence of float, optional
        Explicit per-user tap variance; replaces path loss and shadowing.
    """

    pdp_kind: PdpKind = PdpKind.FLAT
    decay_constant: float = 0.1
    shadowing_sigma_db: float = 0.0
    pathloss_exponent: float = 0.0
    distance_range: tuple = (3.0, 20.0)
    per_user_variance: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "pdp_kind", PdpKind(self.pdp_kind))
        object.__setattr__(self, "distance_range", tuple(float(d) for d in self.distance_range))
        if self.per_user_variance is not None:
            object.__setattr__(self, "per_user_variance",
                               tuple(float(v) for v in self.per_user_variance))
        if self.pdp_kind is PdpKind.EXPONENTIAL and not self.decay_constant > 0:
            raise ConfigurationError(
                f"decay_constant must be positive for an exponential PDP, got {self.decay_constant!r}")
        if len(self.distance_range) != 2:
            raise ConfigurationError("distance_range must be a (min, max) pair")
        dmin, dmax = self.distance_range
        if not dmin > 0:
            raise ConfigurationError(f"minimum distance must be positive, got {dmin!r}")
        if dmin > dmax:
            raise ConfigurationError(f"distance_range min {dmin} exceeds max {dmax}")
        if self.shadowing_sigma_db < 0:
            raise ConfigurationError("shadowing_sigma_db cannot be negative")
        if self.per_user_variance is not None and any(not v > 0 for v in self.per_user_variance):
            raise ConfigurationError("per_user_variance entries must be positive")

    def pdp_shape(self, L: int) -> np.ndarray:
        """Relative tap variances, normalized so that they sum to ``L``."""
        if self.pdp_kind is PdpKind.FLAT:
            return np.ones(L)
        shape = np.exp(-self.decay_constant * np.arange(L))
        return shape * (L / shape.sum())


@dataclass(frozen=True)
class ChannelRealization:
    """One joint draw of all users' channels.

    ``alpha`` has shape ``(K, L)``; ``variance_profile`` holds the standard
    deviation actually used for each tap, with the same shape.
    """

    alpha: np.ndarray
    delay_chips: np.ndarray
    distance: np.ndarray
    variance_profile: np.ndarray
    large_scale: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("alpha", "delay_chips", "distance", "variance_profile", "large_scale"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def K(self) -> int:
        return self.alpha.shape[0]

    @property
    def L(self) -> int:
        return self.alpha.shape[1]

    @classmethod
    def from_taps(cls, alpha, variance_profile=None) -> "ChannelRealization":
        """Wrap fixed tap values, e.g. for hand-built test channels."""
        alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
        K = alpha.shape[0]
        if variance_profile is None:
            variance_profile = np.ones_like(alpha)
        return cls(alpha=alpha, delay_chips=np.zeros(K, dtype=np.int64),
                   distance=np.ones(K), variance_profile=variance_profile,
                   large_scale=np.ones(K))


def make_rng(seed: SeedLike, *key: int) -> np.random.Generator:
    """Counter-based generator for ``seed`` and an optional substream key.

    The same ``(seed, key)`` always yields the same stream, independent of
    how many other streams were created before, which keeps trials
    reproducible under any scheduling.
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise TypeError("substream keys require an integer seed")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    else:
        ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def draw_realization(model: ChannelModel, params: GameParams, seed: SeedLike) -> ChannelRealization:
    """Draw channels for all ``params.K`` users.

    Parameters
    ----------
    model : ChannelModel
    params : GameParams
        Supplies ``K``, ``L`` and the processing gain used for the delays.
    seed : int, sequence, SeedSequence or Generator
        Fully determines the draw.

    Returns
    -------
    ChannelRealization
    """
    K, L = params.K, params.L
    rng = make_rng(seed)
    distance = rng.uniform(model.distance_range[0], model.distance_range[1], size=K)
    if model.per_user_variance is not None:
        if len(model.per_user_variance) != K:
            raise ConfigurationError(
                f"per_user_variance has {len(model.per_user_variance)} entries for K={K} users")
        large_scale = np.asarray(model.per_user_variance, dtype=float)
        rng.standard_normal(K)  # keep the stream layout independent of the override
    else:
        large_scale = distance ** (-model.pathloss_exponent)
        shadow_db = model.shadowing_sigma_db * rng.standard_normal(K)
        large_scale = large_scale * 10.0 ** (shadow_db / 10.0)
    delays = rng.integers(0, params.N, size=K)
    std = np.sqrt(large_scale[:, None] * model.pdp_shape(L)[None, :])
    alpha = std * rng.standard_normal((K, L))
    # all-zero rows have probability zero but would break the SINR ratios
    for k in np.flatnonzero(~np.any(alpha != 0.0, axis=1)):
        while not np.any(alpha[k] != 0.0):
            alpha[k] = std[k] * rng.standard_normal(L)
    return ChannelRealization(alpha=alpha, delay_chips=delays, distance=distance,
                              variance_profile=std, large_scale=large_scale)


def channel_gain(real: ChannelRealization, k: int) -> float:
    """Squared Euclidean norm of user ``k``'s tap vector."""
    if not 0 <= k < real.K:
        raise IndexError(f"user index {k} out of range for K={real.K}")
    a = real.alpha[k]
    return float(np.dot(a, a))
