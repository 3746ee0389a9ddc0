"""LOS array-of-subarrays channel construction and the Rayleigh baseline.

The terahertz channel between transmit subarray n and user m is a rank-1
outer product of receive and transmit steering vectors scaled by the
free-space amplitude path loss, evaluated at each subcarrier frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT, SystemConfig


def subcarrier_indices(K: int) -> np.ndarray:
    """All 2K subcarrier indices in row order: [-K..-1, 1..K]."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return np.concatenate([np.arange(-K, 0), np.arange(1, K + 1)])


def k_to_row(k, K: int):
    """Row of subcarrier k in arrays ordered like ``subcarrier_indices(K)``.

    The mirror subcarrier -k sits at row 2K - 1 - row(k), i.e. reversing the
    row axis maps every subcarrier to its image.
    """
    karr = np.asarray(k)
    if np.any(karr == 0) or np.any(np.abs(karr) > K):
        raise ValueError(f"subcarrier index must be in [-{K}..-1, 1..{K}]")
    row = np.where(karr < 0, karr + K, karr + K - 1)
    return int(row) if np.isscalar(k) else row


def subcarrier_frequency(k, cfg: SystemConfig):
    """Passband frequency f_k = f_c + k * B/(2K) of subcarrier k.

    f_k and f_{-k} are symmetric about the carrier; k = +-K hits the band
    edges.
    """
    karr = np.asarray(k)
    if np.any(karr == 0) or np.any(np.abs(karr) > cfg.K):
        raise ValueError(
            f"subcarrier index must be in [-{cfg.K}..-1, 1..{cfg.K}], got {k}"
        )
    f = cfg.f_c + karr * cfg.delta_f
    return float(f) if np.isscalar(k) else f


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna element positions [m], one row (x, y, z) per element."""

    positions: np.ndarray
    spacing: float | None = None

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[1] != 3:
            raise ValueError("positions must be (Q_tot, 3)")
        object.__setattr__(self, "positions", pos)

    @property
    def Q_tot(self) -> int:
        return self.positions.shape[0]


def element_positions(Q_side: int, spacing: float) -> ArrayGeometry:
    """Uniform planar Q_side x Q_side grid in the x-y plane, centered at origin."""
    if Q_side < 1:
        raise ValueError(f"Q_side must be >= 1, got {Q_side}")
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    coords = (np.arange(Q_side) - (Q_side - 1) / 2.0) * spacing
    x, y = np.meshgrid(coords, coords, indexing="ij")
    positions = np.column_stack(
        [x.ravel(), y.ravel(), np.zeros(Q_side * Q_side)]
    )
    return ArrayGeometry(positions=positions, spacing=spacing)


def direction_vector(azimuth, elevation) -> np.ndarray:
    """Unit propagation direction; elevation is measured from the z axis."""
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    return np.stack(
        [np.sin(el) * np.cos(az), np.sin(el) * np.sin(az), np.cos(el)],
        axis=-1,
    )


def steering_vector(
    geom: ArrayGeometry, azimuth: float, elevation: float, f: float
) -> np.ndarray:
    """Unit-norm URPA steering vector at frequency f.

    Entry q is exp(j * kappa * phi_q) / sqrt(Q_tot) with wavenumber
    kappa = 2 pi f / c and phase progression
    phi_q = s_x sin(el) cos(az) + s_y sin(el) sin(az) + s_z cos(el).
    """
    if f <= 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    kappa = 2.0 * np.pi * f / SPEED_OF_LIGHT
    phase = geom.positions @ direction_vector(azimuth, elevation)
    return np.exp(1j * kappa * phase) / np.sqrt(geom.Q_tot)


def path_loss(
    f: float, delta: float, G_T_gain: float = 1.0, G_R_gain: float = 1.0
) -> float:
    """Free-space amplitude gain alpha = G_T * G_R * c / (4 pi f delta)."""
    if f <= 0:
        raise ValueError(f"frequency must be > 0, got {f}")
    if delta <= 0:
        raise ValueError(f"distance must be > 0, got {delta}")
    return G_T_gain * G_R_gain * SPEED_OF_LIGHT / (4.0 * np.pi * f * delta)


@dataclass(frozen=True)
class UserPlacement:
    """Per (user m, transmit subarray n) link geometry.

    All arrays are (M, N): distance [m], arrival azimuth/elevation and
    departure azimuth/elevation [rad].  ``seed`` records the RNG seed when
    the placement was drawn randomly (None for hand-built placements).
    """

    distances: np.ndarray
    aoa_az: np.ndarray
    aoa_el: np.ndarray
    aod_az: np.ndarray
    aod_el: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        arrays = {}
        shape = None
        for name in ("distances", "aoa_az", "aoa_el", "aod_az", "aod_el"):
            arr = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ValueError("all placement arrays must share one (M, N) shape")
            arrays[name] = arr
        if np.any(arrays["distances"] <= 0):
            raise ValueError("distances must be > 0")
        for name in ("aoa_az", "aod_az"):
            if np.any(np.abs(arrays[name]) > np.pi):
                raise ValueError(f"{name} must lie in [-pi, pi]")
        for name in ("aoa_el", "aod_el"):
            if np.any(arrays[name] < 0) or np.any(arrays[name] > np.pi):
                raise ValueError(f"{name} must lie in [0, pi]")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def M(self) -> int:
        return self.distances.shape[0]

    @property
    def N(self) -> int:
        return self.distances.shape[1]


class ChannelSet:
    """Lazy per-subcarrier passband channel assembled from rank-1 factors.

    Each (m, n) block of H[k] is alpha_mn(f_k) * a_r a_t^H with unit-norm
    steering vectors, so the block has rank 1 and Frobenius norm alpha_mn(f_k).
    """

    def __init__(
        self,
        cfg: SystemConfig,
        placement: UserPlacement,
        geom: ArrayGeometry,
    ):
        if placement.M != cfg.M or placement.N != cfg.N:
            raise ValueError(
                f"placement shape {placement.M}x{placement.N} does not match "
                f"config M={cfg.M}, N={cfg.N}"
            )
        self.cfg = cfg
        self.placement = placement
        self.geom = geom

    def alpha(self, m: int, n: int, k: int) -> float:
        f_k = subcarrier_frequency(k, self.cfg)
        return path_loss(
            f_k,
            self.placement.distances[m, n],
            self.cfg.G_T_gain,
            self.cfg.G_R_gain,
        )

    def block(self, m: int, n: int, k: int) -> np.ndarray:
        """Rank-1 channel block H_mn[k], shape (Q_tot, Q_tot)."""
        f_k = subcarrier_frequency(k, self.cfg)
        a_r = steering_vector(
            self.geom, self.placement.aoa_az[m, n], self.placement.aoa_el[m, n], f_k
        )
        a_t = steering_vector(
            self.geom, self.placement.aod_az[m, n], self.placement.aod_el[m, n], f_k
        )
        return self.alpha(m, n, k) * np.outer(a_r, a_t.conj())

    def full(self, k: int) -> np.ndarray:
        """Assembled passband matrix H[k], shape (M Q_tot, N Q_tot)."""
        Q = self.geom.Q_tot
        H = np.zeros((self.cfg.M * Q, self.cfg.N * Q), dtype=complex)
        for m in range(self.cfg.M):
            for n in range(self.cfg.N):
                H[m * Q : (m + 1) * Q, n * Q : (n + 1) * Q] = self.block(m, n, k)
        return H


def los_channel(
    cfg: SystemConfig,
    placement: UserPlacement,
    geom: ArrayGeometry,
    k: int,
) -> np.ndarray:
    """Full LOS passband channel H[k] for one subcarrier."""
    return ChannelSet(cfg, placement, geom).full(k)


def rayleigh_channel(M: int, N: int, K: int, seed) -> np.ndarray:
    """I.i.d. CN(0, 1) concatenated channel H_c[k], shape (2K, M, N).

    Baseline for conventional (low-frequency) bands; drawn independently per
    subcarrier and reproducible from the seed.  ``seed`` may also be a
    numpy Generator.
    """
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    shape = (2 * K, M, N)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
