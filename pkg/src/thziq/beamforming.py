"""Analog/digital beamformers and the IQI-mixed effective channels.

The analog beamformers are matched steering vectors (phase-shifter arrays,
one unit-norm column per subarray).  Concatenating them with the passband
channel yields the low-dimensional M x N channel H_c[k]; mixing H_c[k] with
the conjugated image channel H_c[-k] through the IQI matrices produces the
desired channel H_d[k] and the image-interference channel H_i[k].
"""

from __future__ import annotations

import numpy as np

from .channel import (
    ArrayGeometry,
    UserPlacement,
    direction_vector,
    subcarrier_frequency,
)
from .config import SPEED_OF_LIGHT, SystemConfig
from .impairments import MismatchMatrices


def _resolve_pairing(M: int, N: int, pairing) -> np.ndarray:
    if pairing is None:
        if M > N:
            raise ValueError("default pairing needs M <= N")
        return np.arange(M)
    pairing = np.asarray(pairing, dtype=int)
    if pairing.shape != (M,):
        raise ValueError(f"pairing must map all {M} users, got shape {pairing.shape}")
    if np.any(pairing < 0) or np.any(pairing >= N):
        raise ValueError("pairing entries must index a transmit subarray")
    if len(np.unique(pairing)) != M:
        raise ValueError("pairing must be injective (one subarray per user)")
    return pairing


def analog_beamformers(
    placement: UserPlacement,
    geom: ArrayGeometry,
    f_design: float,
    pairing=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal matched analog beamformers (F_T, F_R) at f_design.

    Column m of F_R is the receive steering vector of user m toward its
    paired transmit subarray; column n of F_T steers subarray n toward its
    paired user.  Unpaired subarrays (N > M) steer broadside.  Every column
    is unit-norm with unit-modulus entries scaled by 1/sqrt(Q_tot).
    """
    M, N = placement.M, placement.N
    Q = geom.Q_tot
    pair = _resolve_pairing(M, N, pairing)
    kappa = 2.0 * np.pi * f_design / SPEED_OF_LIGHT

    F_R = np.zeros((M * Q, M), dtype=complex)
    for m in range(M):
        n = pair[m]
        u = direction_vector(placement.aoa_az[m, n], placement.aoa_el[m, n])
        F_R[m * Q : (m + 1) * Q, m] = np.exp(1j * kappa * (geom.positions @ u))
    F_R /= np.sqrt(Q)

    F_T = np.zeros((N * Q, N), dtype=complex)
    user_of = {int(pair[m]): m for m in range(M)}
    for n in range(N):
        if n in user_of:
            m = user_of[n]
            u = direction_vector(placement.aod_az[m, n], placement.aod_el[m, n])
        else:
            u = np.array([0.0, 0.0, 1.0])
        F_T[n * Q : (n + 1) * Q, n] = np.exp(1j * kappa * (geom.positions @ u))
    F_T /= np.sqrt(Q)
    return F_T, F_R


def concatenate(H: np.ndarray, F_R: np.ndarray, F_T: np.ndarray) -> np.ndarray:
    """Effective low-dimensional channel H_c = F_R^H H F_T (M x N)."""
    if H.shape != (F_R.shape[0], F_T.shape[0]):
        raise ValueError(
            f"dimension mismatch: H {H.shape}, F_R {F_R.shape}, F_T {F_T.shape}"
        )
    return F_R.conj().T @ H @ F_T


def digital_beamformers(
    cfg: SystemConfig, nulled=()
) -> tuple[dict[int, np.ndarray], np.ndarray]:
    """Equal-power digital precoders W_T[k] = sqrt(P) I and combiner W_R = I.

    Subcarriers listed in ``nulled`` get W_T[k] = 0 (no transmit power).
    """
    nulled = set(int(k) for k in nulled)
    eye = np.eye(cfg.N, dtype=complex)
    w_t = {}
    for k in cfg.subcarriers:
        k = int(k)
        w_t[k] = np.zeros_like(eye) if k in nulled else np.sqrt(cfg.P) * eye
    return w_t, np.eye(cfg.M, dtype=complex)


def effective_channels(
    hc_k: np.ndarray, hc_mk: np.ndarray, mm: MismatchMatrices
) -> tuple[np.ndarray, np.ndarray]:
    """Desired and image channels of one subcarrier.

    H_d[k] = K1 H_c[k] G1      + K2 conj(H_c[-k]) G2
    H_i[k] = K1 H_c[k] conj(G2) + K2 conj(H_c[-k]) conj(G1)

    With perfect IQ this reduces to (H_c[k], 0).
    """
    k1 = mm.k1[:, None]
    k2 = mm.k2[:, None]
    h_d = k1 * hc_k * mm.g1[None, :] + k2 * hc_mk.conj() * mm.g2[None, :]
    h_i = (
        k1 * hc_k * mm.g2.conj()[None, :]
        + k2 * hc_mk.conj() * mm.g1.conj()[None, :]
    )
    return h_d, h_i


def effective_channels_all(
    hc: np.ndarray, mm: MismatchMatrices
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``effective_channels`` over a (2K, M, N) channel stack.

    Rows follow ``subcarrier_indices`` order, so the image stack H_c[-k] is
    the row-reversed array.
    """
    hc_img = hc[::-1].conj()
    k1 = mm.k1[None, :, None]
    k2 = mm.k2[None, :, None]
    g1 = mm.g1[None, None, :]
    g2 = mm.g2[None, None, :]
    h_d = k1 * hc * g1 + k2 * hc_img * g2
    h_i = k1 * hc * g2.conj() + k2 * hc_img * g1.conj()
    return h_d, h_i


def concatenated_los_channel(
    cfg: SystemConfig,
    placement: UserPlacement,
    geom: ArrayGeometry,
    pairing=None,
    per_subcarrier_analog: bool = False,
) -> np.ndarray:
    """H_c[k] for every subcarrier, shape (2K, M, N), computed from factors.

    Entry (m, n) is alpha_mn(f_k) (f_r^m)^H a_r (a_t)^H f_t^n; the rank-1
    structure lets us skip assembling the (M Q x N Q) passband matrix.  The
    analog beamformers are designed at f_c (frequency-flat phase shifters,
    beam squint included) unless ``per_subcarrier_analog`` re-designs them at
    every f_k.
    """
    M, N, Q = cfg.M, cfg.N, cfg.Q_tot
    pair = _resolve_pairing(M, N, pairing)
    freqs = subcarrier_frequency(cfg.subcarriers, cfg)
    kappas = 2.0 * np.pi * freqs / SPEED_OF_LIGHT
    kappa_c = 2.0 * np.pi * cfg.f_c / SPEED_OF_LIGHT

    # Element-wise phase progressions pos . u for every (m, n) direction
    u_a = direction_vector(placement.aoa_az, placement.aoa_el)  # (M, N, 3)
    u_d = direction_vector(placement.aod_az, placement.aod_el)
    proj_a = np.einsum("qx,mnx->mnq", geom.positions, u_a)  # (M, N, Q)
    proj_d = np.einsum("qx,mnx->mnq", geom.positions, u_d)

    hc = np.empty((2 * cfg.K, M, N), dtype=complex)
    for m in range(M):
        ref_a = proj_a[m, pair[m]]  # receive beam of user m
        for n in range(N):
            kd = kappas[:, None] if per_subcarrier_analog else kappa_c
            # (f_r^m)^H a_r(m, n; f_k)
            gain_r = np.exp(
                1j * (kappas[:, None] * proj_a[m, n][None, :] - kd * ref_a[None, :])
            ).mean(axis=1)
            # a_t(m, n; f_k)^H f_t^n  (subarray n steers to its paired user)
            if n in set(int(p) for p in pair):
                m_pair = int(np.nonzero(pair == n)[0][0])
                ref_d = proj_d[m_pair, n]
            else:
                ref_d = geom.positions[:, 2]  # broadside
            gain_t = np.exp(
                1j * (kd * ref_d[None, :] - kappas[:, None] * proj_d[m, n][None, :])
            ).mean(axis=1)
            alpha = (
                cfg.G_T_gain
                * cfg.G_R_gain
                * SPEED_OF_LIGHT
                / (4.0 * np.pi * freqs * placement.distances[m, n])
            )
            hc[:, m, n] = alpha * gain_r * gain_t
    return hc
