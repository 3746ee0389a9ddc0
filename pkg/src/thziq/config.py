"""System-level configuration shared by all simulator modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

SPEED_OF_LIGHT = float(speed_of_light)


@dataclass(frozen=True)
class SystemConfig:
    """Static link parameters.

    Subcarriers are indexed k in {-K..-1, 1..K} (no DC subcarrier); the total
    count is 2K.  Each of the N transmit subarrays and each of the M single
    subarray users carries Q_side**2 antenna elements.

    Parameters
    ----------
    f_c : carrier frequency [Hz]
    B : total bandwidth [Hz]
    K : half the subcarrier count
    N : transmit subarray count
    M : user count
    Q_side : antenna elements per array side (Q_tot = Q_side**2)
    element_spacing : element pitch [m]; None means half-wavelength at f_c
    P : transmit power per active subcarrier per stream [W]
    sigma2 : noise power per subcarrier [W]
    G_T_gain, G_R_gain : dimensionless antenna gains (amplitude enters the
        path loss linearly)
    """

    f_c: float
    B: float
    K: int
    N: int = 3
    M: int = 3
    Q_side: int = 16
    element_spacing: float | None = None
    P: float = 1.0
    sigma2: float = 1.0
    G_T_gain: float = 1.0
    G_R_gain: float = 1.0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if self.Q_side < 1:
            raise ValueError(f"Q_side must be >= 1, got {self.Q_side}")
        if self.B <= 0:
            raise ValueError(f"B must be > 0, got {self.B}")
        if self.f_c <= self.B / 2:
            raise ValueError(
                f"f_c must exceed B/2 (got f_c={self.f_c}, B={self.B})"
            )
        if self.P < 0:
            raise ValueError(f"P must be >= 0, got {self.P}")
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        if self.element_spacing is not None and self.element_spacing <= 0:
            raise ValueError(
                f"element_spacing must be > 0, got {self.element_spacing}"
            )

    @property
    def Q_tot(self) -> int:
        return self.Q_side**2

    @property
    def delta_f(self) -> float:
        """Subcarrier spacing B / (2K)."""
        return self.B / (2 * self.K)

    @property
    def spacing(self) -> float:
        """Resolved element spacing (defaults to lambda/2 at f_c)."""
        if self.element_spacing is not None:
            return self.element_spacing
        return SPEED_OF_LIGHT / (2.0 * self.f_c)

    @property
    def subcarriers(self) -> np.ndarray:
        """All 2K subcarrier indices, negative half first."""
        return np.concatenate([np.arange(-self.K, 0), np.arange(1, self.K + 1)])
