"""SINR, per-subcarrier rates, minimum bit energy and wideband slope.

Channel stacks are (2K, M, N) complex arrays in ``subcarrier_indices`` row
order with the user-subarray pairing on the diagonal (h_mm is the paired
entry).  The low-SNR closed forms assume unit noise power (sigma2 = 1); an
independent finite-difference oracle cross-checks them from the first and
second derivatives of the aggregate capacity at zero power.
"""

from __future__ import annotations

import numpy as np

LN2 = np.log(2.0)


class NumericalError(RuntimeError):
    """A rate computation failed for numerical reasons."""


class OracleConvergenceError(RuntimeError):
    """The finite-difference slope oracle did not converge."""


def _diag_power(h: np.ndarray) -> np.ndarray:
    """|h_mm|^2 per (k, m) for a (2K, M, N) stack (requires M <= N)."""
    M = h.shape[1]
    return np.abs(h[:, np.arange(M), np.arange(M)]) ** 2


def _row_power(h: np.ndarray) -> np.ndarray:
    """sum_n |h_mn|^2 per (k, m)."""
    return np.sum(np.abs(h) ** 2, axis=2)


def sinr_no_iqi(hc_k: np.ndarray, P: float, sigma2: float, m: int | None = None):
    """Per-user SINR treating inter-user interference as noise.

    gamma_m = |h_mm|^2 P / (P sum_{n != m} |h_mn|^2 + sigma2).
    Returns the full length-M vector when m is None.
    """
    row = np.sum(np.abs(hc_k) ** 2, axis=1)
    M = hc_k.shape[0]
    diag = np.abs(hc_k[np.arange(M), np.arange(M)]) ** 2
    gamma = diag * P / (P * (row - diag) + sigma2)
    return gamma if m is None else float(gamma[m])


def sinr_iqi(
    hd_k: np.ndarray,
    hi_k: np.ndarray,
    P: float,
    sigma2: float,
    m: int | None = None,
):
    """Per-user SINR with IQI: the image channel adds interference.

    gamma_m = |h_d,mm|^2 P /
              (P (sum_{n != m} |h_d,mn|^2 + sum_n |h_i,mn|^2) + sigma2).
    """
    M = hd_k.shape[0]
    diag = np.abs(hd_k[np.arange(M), np.arange(M)]) ** 2
    cross = np.sum(np.abs(hd_k) ** 2, axis=1) - diag
    image = np.sum(np.abs(hi_k) ** 2, axis=1)
    gamma = diag * P / (P * (cross + image) + sigma2)
    return gamma if m is None else float(gamma[m])


def rate_subcarrier(
    w_r: np.ndarray,
    w_t_k: np.ndarray,
    w_t_mk: np.ndarray,
    h_d: np.ndarray,
    h_i: np.ndarray,
    zbar: np.ndarray,
) -> float:
    """Achievable rate of one subcarrier in bits per channel use.

    R = log2 det(I + C^{-1} A A^H) with the signal term
    A = W_R^H H_d W_T[k] and the interference-plus-noise covariance
    C = W_R^H H_i conj(W_T[-k]) W_T[-k]^T H_i^H W_R + Zbar.
    """
    A = w_r.conj().T @ h_d @ w_t_k
    B = w_r.conj().T @ h_i @ w_t_mk.conj()
    C = B @ B.conj().T + zbar
    try:
        np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "interference-plus-noise covariance is not positive definite"
        ) from exc
    sign_num, logdet_num = np.linalg.slogdet(C + A @ A.conj().T)
    sign_den, logdet_den = np.linalg.slogdet(C)
    if sign_num.real <= 0 or sign_den.real <= 0:
        raise NumericalError("non-positive determinant in rate computation")
    return float((logdet_num - logdet_den) / LN2)


def sum_rate(
    hd: np.ndarray,
    hi: np.ndarray,
    P: float,
    zbar: np.ndarray,
    P_image: float | None = None,
    active: np.ndarray | None = None,
) -> float:
    """Sum rate over a (2K, M, N) stack with W_T = sqrt(P) I, W_R = I.

    ``P_image`` is the power on the image subcarriers (defaults to P);
    passing 0 removes the IQI interference term (subcarrier nulling).
    ``active`` masks the rows that carry power.
    """
    sig = P * hd @ hd.conj().transpose(0, 2, 1)
    p_img = P if P_image is None else P_image
    cov = p_img * hi @ hi.conj().transpose(0, 2, 1) + zbar[None, :, :]
    _, logdet_den = np.linalg.slogdet(cov)
    _, logdet_num = np.linalg.slogdet(cov + sig)
    rates = (logdet_num - logdet_den) / LN2
    if active is not None:
        rates = rates[active]
    return float(np.sum(rates))


def sum_rate_tin(
    hd: np.ndarray,
    hi: np.ndarray,
    P: float,
    sigma2_diag: np.ndarray,
    P_image: float | None = None,
    active: np.ndarray | None = None,
) -> float:
    """Treat-interference-as-noise sum rate sum_{k, m} log2(1 + gamma_m[k]).

    Both inter-user and image interference enter the SINR denominator:
    gamma_m = |h_d,mm|^2 P /
              (P sum_{n != m} |h_d,mn|^2 + P_img sum_n |h_i,mn|^2 + sigma2_m).
    ``P_image`` defaults to P; 0 models a silent image subcarrier.
    ``sigma2_diag`` is the per-user noise power (the diagonal of Zbar).
    """
    a = _diag_power(hd)
    b = _row_power(hd) - a
    img = _row_power(hi)
    p_img = P if P_image is None else P_image
    gamma = a * P / (P * b + p_img * img + np.real(sigma2_diag)[None, :])
    rates = np.sum(np.log1p(gamma), axis=1) / LN2
    if active is not None:
        rates = rates[active]
    return float(np.sum(rates))


def ebn0_min(hc: np.ndarray, n_subarrays: int) -> tuple[float, float]:
    """Minimum energy per bit without IQI, (linear, dB).

    Eb/N0_min = N 2K ln2 / sum_{k, m} |h_c,mm[k]|^2 under unit noise power.
    """
    s = float(np.sum(_diag_power(hc)))
    if s == 0.0:
        raise ValueError("all paired channel entries are zero; Eb/N0_min undefined")
    value = n_subarrays * hc.shape[0] * LN2 / s
    return value, 10.0 * np.log10(value)


def ebn0_min_iqi(hd: np.ndarray, n_subarrays: int) -> tuple[float, float]:
    """Minimum energy per bit with IQI (same form on the desired channel)."""
    return ebn0_min(hd, n_subarrays)


def wideband_slope(hc: np.ndarray) -> float:
    """Wideband slope S0 without IQI.

    S0 = 2 (sum a)^2 / sum(a^2 + a b) with a = |h_mm|^2 and
    b = sum_{n != m} |h_mn|^2, summed over all (k, m).
    """
    a = _diag_power(hc)
    b = _row_power(hc) - a
    num = 2.0 * float(np.sum(a)) ** 2
    den = float(np.sum(a * a + a * b))
    if den == 0.0:
        raise ValueError("all channel entries are zero; slope undefined")
    return num / den


def wideband_slope_iqi(hd: np.ndarray, hi: np.ndarray) -> float:
    """Wideband slope S0 with IQI.

    The denominator gains the interference penalty
    zeta_m = a (sum_{n != m} |h_d,mn|^2) + a (sum_n |h_i,mn|^2); the image
    channel can only reduce the slope.
    """
    a = _diag_power(hd)
    b = _row_power(hd) - a
    zeta = a * b + a * _row_power(hi)
    num = 2.0 * float(np.sum(a)) ** 2
    den = float(np.sum(a * a + zeta))
    if den == 0.0:
        raise ValueError("all channel entries are zero; slope undefined")
    return num / den


def se_approx(ebn0_db, ebn0_min_db: float, s0: float):
    """Low-SNR spectral-efficiency line S0 * (Eb/N0 - Eb/N0_min)[dB] / 3 dB.

    Clamped at zero below the minimum for plotting.
    """
    se = s0 * (np.asarray(ebn0_db, dtype=float) - ebn0_min_db) / 3.0
    return np.maximum(se, 0.0)


def numeric_slope_oracle(
    gamma_fn,
    n_subarrays: int,
    two_k: int,
    rel_tol: float = 1e-4,
) -> tuple[float, float, float]:
    """Derivative-based (Eb/N0_min linear, Eb/N0_min dB, S0) oracle.

    ``gamma_fn(P)`` returns the SINRs of every (k, m) pair at power P.  The
    aggregate capacity C(P) = sum ln(1 + gamma) gives
    Eb/N0_min = N 2K ln2 / C'(0) and S0 = 2 C'(0)^2 / (-C''(0)).  Central
    differences with Richardson extrapolation; raises
    OracleConvergenceError when successive extrapolants change by more than
    ``rel_tol`` relative.
    """

    def capacity(P: float) -> float:
        return float(np.sum(np.log1p(np.asarray(gamma_fn(P), dtype=float))))

    # Pilot slope fixes the step scale so gamma(h) stays O(1e-2)
    pilot = capacity(1e-9) / 1e-9
    if pilot <= 0:
        raise ValueError("capacity slope at zero power is not positive")
    h0 = 1e-2 * two_k / pilot

    def d1(h: float) -> float:
        return (capacity(h) - capacity(-h)) / (2.0 * h)

    def d2(h: float) -> float:
        return (capacity(h) + capacity(-h)) / (h * h)

    c1 = _richardson(d1, h0, rel_tol)
    c2 = _richardson(d2, h0, rel_tol)
    if c2 >= 0:
        raise OracleConvergenceError("second derivative of capacity is not negative")
    ebn0 = n_subarrays * two_k * LN2 / c1
    return ebn0, 10.0 * np.log10(ebn0), 2.0 * c1 * c1 / (-c2)


def _richardson(d, h0: float, rel_tol: float, max_halvings: int = 12) -> float:
    """Richardson-extrapolated central difference with convergence check."""
    prev_raw = d(h0)
    prev_extrap = None
    h = h0
    for _ in range(max_halvings):
        h /= 2.0
        raw = d(h)
        extrap = (4.0 * raw - prev_raw) / 3.0
        if prev_extrap is not None:
            scale = max(abs(extrap), 1e-300)
            if abs(extrap - prev_extrap) / scale <= rel_tol:
                return extrap
        prev_raw = raw
        prev_extrap = extrap
    raise OracleConvergenceError(
        f"Richardson extrapolation did not reach rel_tol={rel_tol}"
    )


def random_low_snr_instance(rng: np.random.Generator, with_iqi: bool):
    """Random small instance for oracle cross-checks.

    Draws a diagonal-dominant channel stack (pencil-beam regime: off-diagonal
    cross-talk at most 5% in amplitude) with M = N <= 3, K <= 4, and
    hardware-realistic IQI (g in [0.9, 1], |phi| <= 5 deg) when requested.
    Returns (hc, hd, hi, params) with hd = hc, hi = 0 in the no-IQI case.
    """
    from .beamforming import effective_channels_all
    from .impairments import IqiParams, mismatch_matrices

    M = int(rng.integers(1, 4))
    K = int(rng.integers(1, 5))
    shape = (2 * K, M, M)
    hc = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    eps = rng.uniform(0.0, 0.05)
    off = ~np.eye(M, dtype=bool)
    hc[:, off] *= eps
    # keep paired entries bounded away from zero
    diag = hc[:, np.arange(M), np.arange(M)]
    small = np.abs(diag) < 0.3
    diag[small] = 0.3 * np.exp(1j * rng.uniform(0, 2 * np.pi, size=int(small.sum())))
    hc[:, np.arange(M), np.arange(M)] = diag

    if with_iqi:
        params = IqiParams(
            g_t=rng.uniform(0.9, 1.0, M),
            phi_t=rng.uniform(-np.deg2rad(5), np.deg2rad(5), M),
            g_r=rng.uniform(0.9, 1.0, M),
            phi_r=rng.uniform(-np.deg2rad(5), np.deg2rad(5), M),
        )
    else:
        params = IqiParams.perfect(M, M)
    hd, hi = effective_channels_all(hc, mismatch_matrices(params))
    return hc, hd, hi, params


def oracle_agreement(n_instances: int, seed: int) -> float:
    """Max relative error of the closed forms against the derivative oracle.

    Half the instances carry IQI.  Compares both Eb/N0_min and S0 per
    instance and returns the worst relative error seen.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_instances):
        with_iqi = i % 2 == 1
        hc, hd, hi, _ = random_low_snr_instance(rng, with_iqi)
        two_k = hc.shape[0]
        n_sub = hc.shape[2]
        if with_iqi:
            ebn0_lin, _ = ebn0_min_iqi(hd, n_sub)
            s0 = wideband_slope_iqi(hd, hi)
            gamma_fn = lambda P: sinr_iqi_stack(hd, hi, P)
        else:
            ebn0_lin, _ = ebn0_min(hc, n_sub)
            s0 = wideband_slope(hc)
            gamma_fn = lambda P: sinr_stack(hc, P)
        o_lin, _, o_s0 = numeric_slope_oracle(gamma_fn, n_sub, two_k)
        worst = max(
            worst,
            abs(ebn0_lin - o_lin) / o_lin,
            abs(s0 - o_s0) / o_s0,
        )
    return worst


def sinr_stack(hc: np.ndarray, P: float, sigma2: float = 1.0) -> np.ndarray:
    """Vectorized no-IQI SINR over a (2K, M, N) stack, flattened."""
    a = _diag_power(hc)
    b = _row_power(hc) - a
    return (a * P / (P * b + sigma2)).ravel()


def sinr_iqi_stack(
    hd: np.ndarray, hi: np.ndarray, P: float, sigma2: float = 1.0
) -> np.ndarray:
    """Vectorized IQI SINR over (2K, M, N) stacks, flattened."""
    a = _diag_power(hd)
    b = _row_power(hd) - a
    img = _row_power(hi)
    return (a * P / (P * (b + img) + sigma2)).ravel()
