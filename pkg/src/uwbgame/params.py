"""Static scenario parameters shared by every module."""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

from .errors import ConfigurationError, SmallFrameCountWarning

MIN_RELIABLE_FRAMES = 5


@dataclass(frozen=True)
class GameParams:
    """Network and link parameters of one power-control game.

    Defaults reproduce the reference operating point: 100-bit packets with
    no overhead, 100 kb/s, 5e-16 W of thermal noise and a 1 uW power cap.

    Attributes
    ----------
    K : int
        Number of users.
    N_f : int
        Frames (pulses) per information symbol.
    N_c : int
        Chip positions per frame.
    L : int
        Resolvable channel paths.
    M, D : int
        Total and information bits per packet.
    R : float
        Bit rate in b/s.
    noise_var : float
        Receiver noise variance in W.
    p_max, p_min : float
        Power limits in W; only ``p_min = 0`` is supported.
    """

    K: int
    N_f: int
    N_c: int
    L: int
    M: int = 100
    D: int = 100
    R: float = 1.0e5
    noise_var: float = 5.0e-16
    p_max: float = 1.0e-6
    p_min: float = 0.0

    def __post_init__(self):
        for name in ("K", "N_f", "N_c", "L", "M", "D"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
        if self.M < 2:
            raise ConfigurationError("M must be at least 2 so that f'(0) = 0")
        if self.D > self.M:
            raise ConfigurationError(f"D ({self.D}) cannot exceed M ({self.M})")
        if not self.R > 0:
            raise ConfigurationError(f"R must be positive, got {self.R!r}")
        if not self.noise_var > 0:
            raise ConfigurationError(f"noise_var must be positive, got {self.noise_var!r}")
        if self.p_min != 0:
            raise ConfigurationError("only p_min = 0 is supported")
        if not self.p_max > 0:
            raise ConfigurationError(f"p_max must be positive, got {self.p_max!r}")
        if self.N_f < MIN_RELIABLE_FRAMES:
            warnings.warn(
                f"N_f = {self.N_f} < {MIN_RELIABLE_FRAMES}: the Rake-output SINR "
                "approximation may be inaccurate",
                SmallFrameCountWarning,
                stacklevel=3,
            )

    @property
    def N(self) -> int:
        """Processing gain ``N_f * N_c``."""
        return self.N_f * self.N_c

    @property
    def rho(self) -> float:
        """Load factor ``N_c / L``."""
        return self.N_c / self.L

    def replace(self, **changes) -> "GameParams":
        data = asdict(self)
        data.update(changes)
        return GameParams(**data)

    def to_dict(self) -> dict:
        return asdict(self)
