import json
import os

import numpy as np
import pytest

import thziq
from thziq import experiments as ex
from thziq.channel import direction_vector


def desk_cfg(**kw):
    defaults = dict(
        f_c=3e11, B=1e10, K=8, N=3, M=3, Q_side=8,
        G_T_gain=316.227766, G_R_gain=316.227766,
    )
    defaults.update(kw)
    return thziq.SystemConfig(**defaults)


def desk_scenario(**kw):
    defaults = dict(cfg=desk_cfg(), trials=4, seed=9, min_sep_deg=10.0)
    defaults.update(kw)
    return ex.Scenario(**defaults)


class TestPlaceUsers:
    def test_single_user_deterministic(self):
        cfg = desk_cfg(M=1, N=1)
        a = ex.place_users(cfg, 1.0, seed=5)
        b = ex.place_users(cfg, 1.0, seed=5)
        np.testing.assert_array_equal(a.aoa_az, b.aoa_az)
        assert a.seed == 5

    def test_distances_all_equal(self):
        p = ex.place_users(desk_cfg(), 2.5, seed=1)
        assert np.all(p.distances == 2.5)

    def test_pairwise_separation_over_many_draws(self):
        cfg = desk_cfg()
        min_sep = np.deg2rad(5.0)
        for seed in range(1000):
            p = ex.place_users(cfg, 1.0, seed=seed, min_sep_deg=5.0)
            for n in range(cfg.N):
                u = direction_vector(p.aod_az[:, n], p.aod_el[:, n])
                dots = np.clip(u @ u.T, -1, 1)
                np.fill_diagonal(dots, -1)
                assert np.arccos(dots.max()) >= min_sep

    def test_rejection_failure_reported(self):
        cfg = desk_cfg(M=3)
        with pytest.raises(RuntimeError, match="attempts"):
            ex.place_users(
                cfg, 1.0, seed=0,
                az_cone_deg=(-0.1, 0.1), el_cone_deg=(89.9, 90.1),
                min_sep_deg=30.0, max_attempts=20,
            )

    def test_rejects_bad_distance(self):
        with pytest.raises(ValueError):
            ex.place_users(desk_cfg(), 0.0, seed=0)


class TestScenario:
    def test_round_trip_through_dict(self):
        scn = desk_scenario()
        again = ex.Scenario.from_dict(json.loads(json.dumps(scn.to_dict())))
        assert again == scn
        assert again.canonical_json() == scn.canonical_json()

    def test_rejects_unknown_key(self):
        d = desk_scenario().to_dict()
        d["bogus"] = 1
        with pytest.raises(ValueError, match="bogus"):
            ex.Scenario.from_dict(d)

    def test_rejects_empty_sweep(self):
        with pytest.raises(ValueError, match="snr_db"):
            desk_scenario(snr_db=())

    def test_rejects_bad_band(self):
        with pytest.raises(ValueError, match="band"):
            desk_scenario(band="fm")

    def test_rejects_bad_g(self):
        with pytest.raises(ValueError, match="iqi_g"):
            desk_scenario(iqi_g=-1.0)


class TestDeterminism:
    @pytest.mark.parametrize("study", ex.STUDIES)
    def test_rerun_is_byte_identical(self, study, tmp_path):
        scn = desk_scenario(trials=2)
        d1, d2 = tmp_path / "a", tmp_path / "b"
        _, p1 = ex.run(scn, study, str(d1), deterministic_names=True)
        _, p2 = ex.run(scn, study, str(d2), deterministic_names=True)
        assert os.path.basename(p1) == f"{study}_thz.csv"
        with open(p1, "rb") as f1, open(p2, "rb") as f2:
            assert f1.read() == f2.read()

    def test_different_seed_changes_results(self):
        t1 = ex.sweep_slope_vs_g(desk_scenario(seed=1, trials=2))
        t2 = ex.sweep_slope_vs_g(desk_scenario(seed=2, trials=2))
        assert not np.array_equal(t1.rows, t2.rows)


class TestCsvFormat:
    def test_header_and_digits(self, tmp_path):
        scn = desk_scenario(trials=2)
        _, path = ex.run(scn, "slope-sweep", str(tmp_path), deterministic_names=True)
        with open(path) as fh:
            lines = fh.read().splitlines()
        assert lines[0].startswith("# scenario={")
        assert lines[0].endswith(f" seed={scn.seed}")
        meta = lines[0][len("# scenario=") : lines[0].rindex(" seed=")]
        assert ex.Scenario.from_dict(json.loads(meta)) == scn
        assert lines[1] == "g,slope_mean,slope_std,trials"
        assert len(lines) == 2 + len(scn.g_sweep)
        # 9 significant digits
        value = lines[2].split(",")[1]
        assert len(value.replace(".", "").replace("-", "").lstrip("0")) <= 9

    def test_no_partial_left_behind(self, tmp_path):
        scn = desk_scenario(trials=2)
        _, path = ex.run(scn, "nulling", str(tmp_path), deterministic_names=True)
        assert not os.path.exists(path + ".partial")

    def test_unknown_study_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="study"):
            ex.run(desk_scenario(), "warp-drive", str(tmp_path))


class TestStudyProperties:
    def test_slope_sweep_endpoint_matches_no_iqi(self):
        scn = desk_scenario(trials=3)
        table = ex.sweep_slope_vs_g(scn)
        assert table.rows[-1, 0] == 1.0
        no_iqi = np.mean(
            [
                thziq.wideband_slope(ex.trial_channel(scn, t))
                for t in range(scn.trials)
            ]
        )
        assert table.rows[-1, 1] == pytest.approx(no_iqi, rel=1e-12)

    def test_slope_sweep_monotone(self):
        table = ex.sweep_slope_vs_g(desk_scenario(trials=5))
        assert np.all(np.diff(table.rows[:, 1]) >= -1e-9)

    def test_se_curve_intercept_and_slope(self):
        scn = desk_scenario(trials=2, g_levels=(0.9,), ebn0_db=tuple(range(-30, 1)))
        intercept_db, s0 = ex.low_snr_params(scn, 0.9)
        table = ex.sweep_se_vs_ebn0(scn)
        grid = table.rows[:, 0]
        se = table.rows[:, 1]
        np.testing.assert_allclose(
            se, thziq.se_approx(grid, intercept_db, s0), rtol=1e-12
        )
        assert np.all(se[grid < intercept_db] == 0.0)
        above = grid >= intercept_db + 1
        assert np.allclose(np.diff(se[above]), s0 / 3.0, rtol=1e-9)

    def test_toggle_consistency_waterfall(self):
        # IUI-off + IQI-off equals the analytic single-user waterfall
        scn = desk_scenario(trials=1, snr_db=(0.0, 10.0, 20.0))
        table = ex.sweep_rate_vs_snr(scn)
        hc = ex.trial_channel(scn, 0)
        M = scn.cfg.M
        diag = np.abs(hc[:, np.arange(M), np.arange(M)]) ** 2
        for i, snr in enumerate(scn.snr_db):
            P = 10 ** (snr / 10.0) * scn.cfg.sigma2
            expected = np.sum(np.log2(1 + P * diag / scn.cfg.sigma2))
            assert table.rows[i, 1] == pytest.approx(expected, rel=1e-12)

    def test_nulling_power_accounting(self):
        # pooled policy: equal total power between full-band and nulled modes
        cfg = desk_cfg()
        w_full, _ = thziq.digital_beamformers(cfg)
        total_full = sum(np.linalg.norm(w) ** 2 for w in w_full.values())
        nulled = [int(k) for k in cfg.subcarriers if k < 0]
        cfg2 = thziq.SystemConfig(**{**cfg.__dict__, "P": 2 * cfg.P})
        w_null, _ = thziq.digital_beamformers(cfg2, nulled=nulled)
        total_null = sum(np.linalg.norm(w) ** 2 for w in w_null.values())
        assert total_full == pytest.approx(total_null)

    def test_nulling_matches_manual_oracle(self):
        # nulled column must equal the TIN rate over the positive half-band
        # with the image term silenced, at the boosted power
        scn = desk_scenario(trials=1, iqi_g=0.9, snr_db=(30.0,))
        rows = ex.sweep_nulling(scn).rows
        hc = ex.trial_channel(scn, 0)
        mm = thziq.mismatch_matrices(scn.iqi_params())
        hd, hi = thziq.effective_channels_all(hc, mm)
        zbar = np.diag(
            thziq.noise_covariance_iqi(scn.cfg.sigma2, scn.iqi_params())
        ).real
        P = 1e3 * scn.cfg.sigma2
        K = scn.cfg.K
        manual = thziq.sum_rate_tin(
            hd[K:], np.zeros_like(hi[K:]), 2 * P, zbar
        )
        assert rows[0, 2] == pytest.approx(manual, rel=1e-12)

    def test_trial_count_convergence(self):
        scn_a = desk_scenario(trials=8)
        scn_b = desk_scenario(trials=16)
        ta = ex.sweep_slope_vs_g(scn_a).rows
        tb = ex.sweep_slope_vs_g(scn_b).rows
        stderr = ta[:, 2] / np.sqrt(scn_a.trials)
        assert np.all(np.abs(ta[:, 1] - tb[:, 1]) < 4 * stderr + 1e-9)

    def test_rayleigh_band_runs(self):
        scn = desk_scenario(band="rayleigh", trials=2, snr_db=(0.0, 20.0))
        table = ex.sweep_rate_vs_snr(scn)
        assert table.band == "rayleigh"
        assert np.all(table.rows[:, 1:] >= 0)
