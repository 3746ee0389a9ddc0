import numpy as np
import pytest

from thziq.metrics import (
    LN2,
    NumericalError,
    ebn0_min,
    ebn0_min_iqi,
    numeric_slope_oracle,
    oracle_agreement,
    random_low_snr_instance,
    rate_subcarrier,
    se_approx,
    sinr_iqi,
    sinr_iqi_stack,
    sinr_no_iqi,
    sinr_stack,
    sum_rate,
    sum_rate_tin,
    wideband_slope,
    wideband_slope_iqi,
)


def random_stack(rng, two_k, M, N):
    return (
        rng.standard_normal((two_k, M, N)) + 1j * rng.standard_normal((two_k, M, N))
    ) / np.sqrt(2.0)


class TestSinr:
    def test_single_user_unit_channel(self):
        hc = np.array([[1.0 + 0j]])
        assert sinr_no_iqi(hc, 1.0, 1.0, 0) == pytest.approx(1.0)

    def test_zero_power(self):
        hc = np.array([[2.0 + 1j, 0.3], [0.1, 1.0]])
        assert np.all(sinr_no_iqi(hc, 0.0, 1.0) == 0.0)

    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(0)
        hc = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        P, s2 = 1.7, 0.4
        for m in range(3):
            num = abs(hc[m, m]) ** 2 * P
            den = s2 + P * sum(abs(hc[m, n]) ** 2 for n in range(3) if n != m)
            assert sinr_no_iqi(hc, P, s2, m) == pytest.approx(num / den, rel=1e-12)

    def test_iqi_reduces_to_no_iqi(self):
        rng = np.random.default_rng(1)
        hc = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        np.testing.assert_allclose(
            sinr_iqi(hc, np.zeros_like(hc), 0.9, 1.3),
            sinr_no_iqi(hc, 0.9, 1.3),
        )

    def test_high_power_ceiling(self):
        rng = np.random.default_rng(2)
        hd = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        hi = 0.1 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        for m in range(2):
            ceiling = abs(hd[m, m]) ** 2 / (
                sum(abs(hd[m, n]) ** 2 for n in range(2) if n != m)
                + sum(abs(hi[m, n]) ** 2 for n in range(2))
            )
            got = sinr_iqi(hd, hi, 1e12, 1.0, m)
            assert got == pytest.approx(ceiling, rel=1e-3)

    def test_ceiling_scale_invariant(self):
        rng = np.random.default_rng(3)
        hd = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        hi = 0.2 * rng.standard_normal((2, 2)).astype(complex)
        c = 3.7 - 1.1j
        a = sinr_iqi(hd, hi, 1e12, 1.0)
        b = sinr_iqi(c * hd, c * hi, 1e12, 1.0)
        np.testing.assert_allclose(a, b, rtol=1e-6)


class TestRateSubcarrier:
    def test_scalar_shannon(self):
        h = np.array([[0.8 - 0.3j]])
        P, s2 = 2.0, 0.5
        w = np.array([[np.sqrt(P)]], dtype=complex)
        r = rate_subcarrier(
            np.eye(1, dtype=complex), w, w, h, np.zeros((1, 1)), s2 * np.eye(1)
        )
        assert r == pytest.approx(np.log2(1 + P * abs(h[0, 0]) ** 2 / s2), rel=1e-12)

    def test_vanishes_with_infinite_noise(self):
        h = np.array([[1.0 + 0j]])
        w = np.eye(1, dtype=complex)
        r = rate_subcarrier(w, w, w, h, np.zeros((1, 1)), 1e15 * np.eye(1))
        assert r == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_factorizes_into_sinr_terms(self):
        rng = np.random.default_rng(4)
        M = 3
        hd = np.diag(rng.standard_normal(M) + 1j * rng.standard_normal(M))
        hi = np.diag(0.3 * (rng.standard_normal(M) + 1j * rng.standard_normal(M)))
        s2 = 0.8
        P = 1.9
        zbar = s2 * np.eye(M)
        w = np.sqrt(P) * np.eye(M, dtype=complex)
        r = rate_subcarrier(np.eye(M, dtype=complex), w, w, hd, hi, zbar)
        expected = np.sum(np.log2(1 + sinr_iqi(hd, hi, P, s2)))
        assert r == pytest.approx(expected, abs=1e-10)

    def test_nonpositive_covariance_reported(self):
        h = np.array([[1.0 + 0j]])
        w = np.eye(1, dtype=complex)
        with pytest.raises(NumericalError):
            rate_subcarrier(w, w, w, h, np.zeros((1, 1)), -np.eye(1))

    def test_batched_sum_matches_single(self):
        rng = np.random.default_rng(5)
        hd = random_stack(rng, 4, 2, 2)
        hi = 0.2 * random_stack(rng, 4, 2, 2)
        zbar = 0.7 * np.eye(2, dtype=complex)
        P = 3.0
        w = np.sqrt(P) * np.eye(2, dtype=complex)
        total = sum(
            rate_subcarrier(np.eye(2, dtype=complex), w, w, hd[r], hi[r], zbar)
            for r in range(4)
        )
        assert sum_rate(hd, hi, P, zbar) == pytest.approx(total, rel=1e-12)

    def test_rate_ceiling_with_image_interference(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            _, hd, hi, _ = random_low_snr_instance(rng, with_iqi=True)
            zbar = np.eye(hd.shape[1], dtype=complex)
            r5 = sum_rate(hd, hi, 1e5, zbar)
            r6 = sum_rate(hd, hi, 1e6, zbar)
            assert r6 - r5 < 0.01 * r5

    def test_growth_without_interference(self):
        rng = np.random.default_rng(7)
        hc = random_stack(rng, 6, 1, 1)
        zbar = np.eye(1, dtype=complex)
        r5 = sum_rate(hc, np.zeros_like(hc), 1e5, zbar)
        r6 = sum_rate(hc, np.zeros_like(hc), 1e6, zbar)
        per_decade = (r6 - r5) / 6  # 6 subcarriers, 1 user
        assert per_decade == pytest.approx(np.log2(10), abs=0.05)

    def test_tin_matches_sinr_sum(self):
        rng = np.random.default_rng(8)
        hd = random_stack(rng, 4, 3, 3)
        hi = 0.1 * random_stack(rng, 4, 3, 3)
        s2 = np.array([0.9, 1.1, 1.0])
        P = 2.3
        got = sum_rate_tin(hd, hi, P, s2)
        manual = 0.0
        for r in range(4):
            for m in range(3):
                a = abs(hd[r, m, m]) ** 2
                b = sum(abs(hd[r, m, n]) ** 2 for n in range(3) if n != m)
                img = sum(abs(hi[r, m, n]) ** 2 for n in range(3))
                manual += np.log2(1 + a * P / (P * (b + img) + s2[m]))
        assert got == pytest.approx(manual, rel=1e-12)

    def test_tin_nulled_image_removes_interference_exactly(self):
        rng = np.random.default_rng(9)
        hd = random_stack(rng, 4, 2, 2)
        hi = random_stack(rng, 4, 2, 2)
        s2 = np.ones(2)
        with_null = sum_rate_tin(hd, hi, 2.0, s2, P_image=0.0)
        without_hi = sum_rate_tin(hd, np.zeros_like(hi), 2.0, s2)
        assert with_null == without_hi


class TestLowSnrMetrics:
    def test_classical_awgn_anchor(self):
        hc = np.ones((2, 1, 1), dtype=complex)
        lin, db = ebn0_min(hc, 1)
        assert lin == pytest.approx(LN2, rel=1e-12)
        assert db == pytest.approx(-1.59, abs=0.01)

    def test_channel_scaling(self):
        rng = np.random.default_rng(10)
        hc = random_stack(rng, 4, 2, 2)
        lin1, _ = ebn0_min(hc, 2)
        lin2, _ = ebn0_min(3.0 * hc, 2)
        assert lin2 == pytest.approx(lin1 / 9.0, rel=1e-12)
        assert wideband_slope(3.0 * hc) == pytest.approx(wideband_slope(hc), rel=1e-12)

    def test_hand_summation(self):
        rng = np.random.default_rng(11)
        hc = random_stack(rng, 6, 3, 3)
        total = sum(
            abs(hc[r, m, m]) ** 2 for r in range(6) for m in range(3)
        )
        lin, _ = ebn0_min(hc, 3)
        assert lin == pytest.approx(3 * 6 * LN2 / total, rel=1e-12)

    def test_all_zero_diagonal_reported(self):
        hc = np.zeros((2, 2, 2), dtype=complex)
        hc[:, 0, 1] = 1.0
        with pytest.raises(ValueError):
            ebn0_min(hc, 1)

    def test_slope_flat_single_user(self):
        hc = np.ones((2, 1, 1), dtype=complex)
        assert wideband_slope(hc) == pytest.approx(4.0)
        K = 5
        hc = np.ones((2 * K, 1, 1), dtype=complex)
        assert wideband_slope(hc) == pytest.approx(4 * K)

    def test_slope_iqi_reductions(self):
        rng = np.random.default_rng(12)
        hc = random_stack(rng, 4, 2, 2)
        assert wideband_slope_iqi(hc, np.zeros_like(hc)) == pytest.approx(
            wideband_slope(hc), rel=1e-15
        )
        hi = 0.3 * random_stack(rng, 4, 2, 2)
        assert wideband_slope_iqi(hc, hi) < wideband_slope(hc)

    def test_ebn0_monotone_in_receive_amplitude_error(self):
        from thziq.beamforming import effective_channels_all
        from thziq.impairments import IqiParams, mismatch_matrices

        rng = np.random.default_rng(13)
        hc = random_stack(rng, 4, 2, 2)
        base, _ = ebn0_min(hc, 2)
        prev = base
        for g in (0.9, 0.8, 0.7):
            mm = mismatch_matrices(IqiParams.uniform(g, 0.0, 2, 2, tx=False))
            hd, _ = effective_channels_all(hc, mm)
            lin, _ = ebn0_min_iqi(hd, 2)
            assert lin > prev
            prev = lin

    def test_ebn0_phase_only_not_better(self):
        from thziq.beamforming import effective_channels_all
        from thziq.impairments import IqiParams, mismatch_matrices

        rng = np.random.default_rng(14)
        hc = random_stack(rng, 4, 2, 2)
        mm = mismatch_matrices(IqiParams.uniform(1.0, np.deg2rad(5.0), 2, 2))
        hd, _ = effective_channels_all(hc, mm)
        assert ebn0_min_iqi(hd, 2)[0] >= ebn0_min(hc, 2)[0] - 1e-12


class TestSeApprox:
    def test_zero_at_minimum(self):
        assert se_approx(-1.59, -1.59, 4.0) == 0.0

    def test_slope_per_three_db(self):
        assert se_approx(1.41, -1.59, 4.0) == pytest.approx(4.0)

    def test_linear_with_clamp(self):
        grid = np.array([-5.0, -1.59, 1.41, 4.41])
        se = se_approx(grid, -1.59, 6.0)
        np.testing.assert_allclose(se, [0.0, 0.0, 6.0, 12.0])


class TestNumericSlopeOracle:
    def test_classical_awgn(self):
        hc = np.ones((2, 1, 1), dtype=complex)
        lin, db, s0 = numeric_slope_oracle(lambda P: sinr_stack(hc, P), 1, 2)
        assert db == pytest.approx(-1.59, abs=0.01)
        assert s0 == pytest.approx(wideband_slope(hc), rel=1e-4)

    def test_agrees_with_closed_forms_no_iqi(self):
        rng = np.random.default_rng(15)
        hc, _, _, _ = random_low_snr_instance(rng, with_iqi=False)
        lin, _, s0 = numeric_slope_oracle(
            lambda P: sinr_stack(hc, P), hc.shape[2], hc.shape[0]
        )
        assert lin == pytest.approx(ebn0_min(hc, hc.shape[2])[0], rel=0.01)
        assert s0 == pytest.approx(wideband_slope(hc), rel=0.01)

    def test_agrees_with_closed_forms_iqi(self):
        rng = np.random.default_rng(16)
        _, hd, hi, _ = random_low_snr_instance(rng, with_iqi=True)
        lin, _, s0 = numeric_slope_oracle(
            lambda P: sinr_iqi_stack(hd, hi, P), hd.shape[2], hd.shape[0]
        )
        assert lin == pytest.approx(ebn0_min_iqi(hd, hd.shape[2])[0], rel=0.01)
        assert s0 == pytest.approx(wideband_slope_iqi(hd, hi), rel=0.01)

    def test_oracle_agreement_suite(self):
        assert oracle_agreement(30, seed=123) < 0.01
