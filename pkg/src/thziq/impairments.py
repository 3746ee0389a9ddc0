"""I/Q-imbalance mismatch matrices, image-rejection ratio, noise covariance.

Amplitude error g and phase error Phi of each up/down-converter chain mix a
subcarrier with the conjugate of its image.  The mixing is captured by the
diagonal matrices G1/G2 (transmit) and K1/K2 (receive); all operations here
keep only their diagonals as 1-D complex arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class IqiParams:
    """Per-chain amplitude and phase errors.

    g_t, phi_t have one entry per transmit chain (length N); g_r, phi_r one
    per receive chain (length M).  Perfect IQ response is g = 1, phi = 0.
    """

    g_t: np.ndarray
    phi_t: np.ndarray
    g_r: np.ndarray
    phi_r: np.ndarray

    def __post_init__(self):
        for name in ("g_t", "phi_t", "g_r", "phi_r"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arr)
        if self.g_t.shape != self.phi_t.shape or self.g_r.shape != self.phi_r.shape:
            raise ValueError("amplitude and phase arrays must have matching shapes")
        if np.any(self.g_t <= 0) or np.any(self.g_r <= 0):
            raise ValueError("amplitude errors g must be > 0")

    @classmethod
    def perfect(cls, N: int, M: int) -> "IqiParams":
        return cls(np.ones(N), np.zeros(N), np.ones(M), np.zeros(M))

    @classmethod
    def uniform(
        cls,
        g: float,
        phi: float,
        N: int,
        M: int,
        tx: bool = True,
        rx: bool = True,
    ) -> "IqiParams":
        """Same (g, phi) on every chain, optionally only one side impaired."""
        g_t, phi_t = (g, phi) if tx else (1.0, 0.0)
        g_r, phi_r = (g, phi) if rx else (1.0, 0.0)
        return cls(
            np.full(N, g_t), np.full(N, phi_t), np.full(M, g_r), np.full(M, phi_r)
        )


@dataclass(frozen=True)
class MismatchMatrices:
    """Diagonals of the IQI mixing matrices.

    g1, g2 are length N (transmit); k1, k2 are length M (receive).  They
    satisfy g2 = 1 - conj(g1) and k2 = 1 - conj(k1) elementwise.
    """

    g1: np.ndarray
    g2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray

    @property
    def G1(self) -> np.ndarray:
        return np.diag(self.g1)

    @property
    def G2(self) -> np.ndarray:
        return np.diag(self.g2)

    @property
    def K1(self) -> np.ndarray:
        return np.diag(self.k1)

    @property
    def K2(self) -> np.ndarray:
        return np.diag(self.k2)


def mismatch_matrices(params: IqiParams) -> MismatchMatrices:
    """Mixing diagonals from the per-chain errors.

    G1 = (I + G_T e^{j Phi_T}) / 2,  G2 = I - conj(G1),
    K1 = (I + G_R e^{-j Phi_R}) / 2, K2 = I - conj(K1).
    """
    g1 = 0.5 * (1.0 + params.g_t * np.exp(1j * params.phi_t))
    k1 = 0.5 * (1.0 + params.g_r * np.exp(-1j * params.phi_r))
    return MismatchMatrices(g1=g1, g2=1.0 - g1.conj(), k1=k1, k2=1.0 - k1.conj())


def irr_db(g: float, phi: float) -> float:
    """Image rejection ratio |1 + g e^{-j phi}|^2 / |1 - g e^{j phi}|^2 in dB.

    Equals |K1|^2 / |K2|^2 of a single chain.  Returns +inf for the perfect
    case (zero image component).
    """
    if g <= 0:
        raise ValueError(f"g must be > 0, got {g}")
    desired = 1.0 + 2.0 * g * np.cos(phi) + g * g
    image = 1.0 - 2.0 * g * np.cos(phi) + g * g
    if image == 0.0:
        return np.inf
    return 10.0 * np.log10(desired / image)


def max_irr_db(phi: float) -> float:
    """Largest IRR achievable at phase error phi over g in (0, 1]."""
    return irr_db(1.0, phi)


def amplitude_from_irr(irr: float, phi: float) -> float:
    """Amplitude error g <= 1 solving irr_db(g, phi) = irr.

    Raises ValueError when the requested IRR exceeds the cap
    ``max_irr_db(phi)`` (for phi = 5 deg the cap is about 27.2 dB).
    Solved by bisection to |delta irr| < 1e-9 dB.
    """
    cap = max_irr_db(phi)
    if irr > cap:
        raise ValueError(
            f"IRR of {irr:.6g} dB is infeasible at phase error {phi:.6g} rad "
            f"(cap {cap:.6g} dB at g = 1)"
        )
    if np.isinf(irr):
        return 1.0
    lo = 1e-12
    if irr <= irr_db(lo, phi):
        raise ValueError(f"IRR of {irr:.6g} dB is below the g -> 0 limit")
    # irr_db is strictly increasing in g on (0, 1] for |phi| < pi/2
    g = brentq(lambda x: irr_db(x, phi) - irr, lo, 1.0, xtol=1e-15, rtol=1e-15)
    assert abs(irr_db(g, phi) - irr) < 1e-9
    return g


def noise_covariance_iqi(sigma2: float, params: IqiParams) -> np.ndarray:
    """Receive noise covariance with IQI: (sigma2 / 2)(I + G_R G_R^H).

    Diagonal, Hermitian positive definite; reduces to sigma2 * I for perfect
    chains.
    """
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    return np.diag(0.5 * sigma2 * (1.0 + params.g_r**2)).astype(complex)
