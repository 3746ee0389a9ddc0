"""Scenario orchestration: user placement, Monte Carlo sweeps, CSV output.

Five studies mirror the simulation campaign: wideband slope vs. amplitude
imbalance, spectral-efficiency curves vs. Eb/N0, sum rate vs. SNR under the
four interference toggles, the same in the Rayleigh baseline band, and the
subcarrier-nulling comparison.  Every result is a pure function of
(scenario, master seed); trial t uses the independent stream
``default_rng([seed, t])`` and sweep points share trials (common random
numbers).
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from . import beamforming, channel, impairments, metrics
from .config import SystemConfig

STUDIES = ("slope-sweep", "se-curve", "rate-vs-snr", "nulling")
BANDS = ("thz", "rayleigh")


@dataclass(frozen=True)
class Scenario:
    """Full description of one Monte Carlo study run."""

    cfg: SystemConfig
    band: str = "thz"
    distance_m: float = 1.0
    iqi_g: float = 1.0
    iqi_phase_rad: float = 0.0
    tx_iqi: bool = True
    rx_iqi: bool = True
    iui: bool = True
    nulling_power_policy: str = "pooled"
    per_subcarrier_analog: bool = False
    az_cone_deg: tuple[float, float] = (-60.0, 60.0)
    el_cone_deg: tuple[float, float] = (80.0, 100.0)
    min_sep_deg: float = 5.0
    trials: int = 100
    seed: int = 1
    snr_db: tuple[float, ...] = tuple(float(x) for x in range(0, 61, 5))
    g_sweep: tuple[float, ...] = tuple(
        float(np.round(g, 4)) for g in np.linspace(0.7, 1.0, 13)
    )
    g_levels: tuple[float, ...] = (0.9, 0.8, 0.7)
    ebn0_db: tuple[float, ...] = tuple(float(x) for x in range(-30, 11))

    def __post_init__(self):
        if self.band not in BANDS:
            raise ValueError(f"band must be one of {BANDS}, got {self.band!r}")
        if self.nulling_power_policy not in ("pooled", "fixed"):
            raise ValueError(
                "nulling_power_policy must be 'pooled' or 'fixed', "
                f"got {self.nulling_power_policy!r}"
            )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.distance_m <= 0:
            raise ValueError(f"distance_m must be > 0, got {self.distance_m}")
        if not (0.0 < self.iqi_g <= 1.1):
            raise ValueError(f"iqi_g must lie in (0, 1.1], got {self.iqi_g}")
        if self.band == "thz" and self.cfg.M != self.cfg.N:
            raise ValueError("THz studies assume M == N (identity pairing)")
        for name in ("snr_db", "g_sweep", "g_levels", "ebn0_db"):
            vals = getattr(self, name)
            if len(vals) == 0:
                raise ValueError(f"sweep '{name}' must be non-empty")
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"sweep '{name}' contains non-finite values")

    def iqi_params(self, g: float | None = None) -> impairments.IqiParams:
        return impairments.IqiParams.uniform(
            self.iqi_g if g is None else g,
            self.iqi_phase_rad,
            self.cfg.N,
            self.cfg.M,
            tx=self.tx_iqi,
            rx=self.rx_iqi,
        )

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["cfg"] = dataclasses.asdict(self.cfg)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        cfg = SystemConfig(**d.pop("cfg"))
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise ValueError(f"unknown key '{sorted(unknown)[0]}'")
        for name in ("az_cone_deg", "el_cone_deg", "snr_db", "g_sweep",
                     "g_levels", "ebn0_db"):
            if name in d:
                d[name] = tuple(d[name])
        return cls(cfg=cfg, **d)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class ResultTable:
    """One study's aggregated rows plus reproducibility metadata."""

    study: str
    band: str
    columns: list[str]
    rows: np.ndarray
    scenario_json: str
    seed: int

    def write_csv(self, path: str) -> None:
        tmp = path + ".partial"
        try:
            with open(tmp, "w") as fh:
                fh.write(f"# scenario={self.scenario_json} seed={self.seed}\n")
                fh.write(",".join(self.columns) + "\n")
                for row in self.rows:
                    fh.write(",".join(f"{v:.9g}" for v in row) + "\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _angular_separation(u: np.ndarray) -> float:
    """Smallest pairwise great-circle angle among unit vectors (rows)."""
    dots = np.clip(u @ u.T, -1.0, 1.0)
    np.fill_diagonal(dots, -1.0)
    return float(np.arccos(np.max(dots)))


def _draw_separated(
    rng: np.random.Generator,
    count: int,
    az_range: tuple[float, float],
    el_range: tuple[float, float],
    min_sep: float,
    max_attempts: int,
) -> tuple[np.ndarray, np.ndarray]:
    for _ in range(max_attempts):
        az = rng.uniform(az_range[0], az_range[1], count)
        el = rng.uniform(el_range[0], el_range[1], count)
        if count == 1:
            return az, el
        if _angular_separation(channel.direction_vector(az, el)) >= min_sep:
            return az, el
    raise RuntimeError(
        f"could not draw {count} directions separated by {np.rad2deg(min_sep):.1f} "
        f"deg within {max_attempts} attempts"
    )


def place_users(
    cfg: SystemConfig,
    distance: float,
    seed=None,
    rng: np.random.Generator | None = None,
    az_cone_deg: tuple[float, float] = (-60.0, 60.0),
    el_cone_deg: tuple[float, float] = (80.0, 100.0),
    min_sep_deg: float = 5.0,
    max_attempts: int = 1000,
) -> channel.UserPlacement:
    """Random user placement at a fixed distance.

    Azimuth/elevation are drawn uniformly from the configured cone; the M
    departure directions of each subarray and the N arrival directions at
    each user are kept pairwise separated by at least ``min_sep_deg``
    (rejection sampling).
    """
    if distance <= 0:
        raise ValueError(f"distance must be > 0, got {distance}")
    if rng is None:
        rng = np.random.default_rng(seed)
    az = tuple(np.deg2rad(az_cone_deg))
    el = tuple(np.deg2rad(el_cone_deg))
    sep = np.deg2rad(min_sep_deg)

    aod_az = np.empty((cfg.M, cfg.N))
    aod_el = np.empty((cfg.M, cfg.N))
    for n in range(cfg.N):
        aod_az[:, n], aod_el[:, n] = _draw_separated(
            rng, cfg.M, az, el, sep, max_attempts
        )
    aoa_az = np.empty((cfg.M, cfg.N))
    aoa_el = np.empty((cfg.M, cfg.N))
    for m in range(cfg.M):
        aoa_az[m, :], aoa_el[m, :] = _draw_separated(
            rng, cfg.N, az, el, sep, max_attempts
        )
    return channel.UserPlacement(
        distances=np.full((cfg.M, cfg.N), float(distance)),
        aoa_az=aoa_az,
        aoa_el=aoa_el,
        aod_az=aod_az,
        aod_el=aod_el,
        seed=seed if isinstance(seed, int) else None,
    )


def trial_channel(scn: Scenario, trial: int) -> np.ndarray:
    """Concatenated channel stack H_c (2K, M, N) for one Monte Carlo trial."""
    rng = np.random.default_rng([scn.seed, trial])
    cfg = scn.cfg
    if scn.band == "rayleigh":
        return channel.rayleigh_channel(cfg.M, cfg.N, cfg.K, rng)
    placement = place_users(
        cfg,
        scn.distance_m,
        rng=rng,
        az_cone_deg=scn.az_cone_deg,
        el_cone_deg=scn.el_cone_deg,
        min_sep_deg=scn.min_sep_deg,
    )
    geom = channel.element_positions(cfg.Q_side, cfg.spacing)
    return beamforming.concatenated_los_channel(
        cfg, placement, geom, per_subcarrier_analog=scn.per_subcarrier_analog
    )


def _paired_only(hc: np.ndarray) -> np.ndarray:
    """Zero the off-diagonal (unpaired) entries: the IUI-free channel."""
    M = hc.shape[1]
    out = np.zeros_like(hc)
    idx = np.arange(M)
    out[:, idx, idx] = hc[:, idx, idx]
    return out


def sweep_slope_vs_g(scn: Scenario) -> ResultTable:
    """Mean wideband slope with IQI over the amplitude-imbalance sweep."""
    g_values = np.asarray(scn.g_sweep, dtype=float)
    slopes = np.empty((scn.trials, len(g_values)))
    for t in range(scn.trials):
        hc = trial_channel(scn, t)
        for j, g in enumerate(g_values):
            mm = impairments.mismatch_matrices(scn.iqi_params(g=g))
            hd, hi = beamforming.effective_channels_all(hc, mm)
            slopes[t, j] = metrics.wideband_slope_iqi(hd, hi)
    rows = np.column_stack(
        [
            g_values,
            slopes.mean(axis=0),
            slopes.std(axis=0, ddof=1) if scn.trials > 1 else np.zeros_like(g_values),
            np.full_like(g_values, scn.trials),
        ]
    )
    return ResultTable(
        "slope-sweep",
        scn.band,
        ["g", "slope_mean", "slope_std", "trials"],
        rows,
        scn.canonical_json(),
        scn.seed,
    )


def low_snr_params(scn: Scenario, g: float) -> tuple[float, float]:
    """Trial-averaged (Eb/N0_min [dB], S0) at amplitude imbalance g."""
    mm = impairments.mismatch_matrices(scn.iqi_params(g=g))
    ebn0_db = np.empty(scn.trials)
    s0 = np.empty(scn.trials)
    for t in range(scn.trials):
        hc = trial_channel(scn, t)
        hd, hi = beamforming.effective_channels_all(hc, mm)
        _, ebn0_db[t] = metrics.ebn0_min_iqi(hd, scn.cfg.N)
        s0[t] = metrics.wideband_slope_iqi(hd, hi)
    return float(ebn0_db.mean()), float(s0.mean())


def sweep_se_vs_ebn0(scn: Scenario) -> ResultTable:
    """Low-SNR spectral-efficiency curves, one column per amplitude level."""
    grid = np.asarray(scn.ebn0_db, dtype=float)
    cols = [grid]
    names = ["ebn0_db"]
    for g in scn.g_levels:
        intercept_db, s0 = low_snr_params(scn, g)
        cols.append(metrics.se_approx(grid, intercept_db, s0))
        names.append(f"se_g{g:g}")
    return ResultTable(
        "se-curve",
        scn.band,
        names,
        np.column_stack(cols),
        scn.canonical_json(),
        scn.seed,
    )


def _variant_rates(
    scn: Scenario, hc: np.ndarray, powers: np.ndarray
) -> np.ndarray:
    """Sum rate per SNR point for the four interference toggles.

    Columns: no-interference, IUI-only, IQI-only, IQI+IUI.  Rates treat all
    interference (inter-user and image) as noise per user, which is what
    makes the IUI-limited curves saturate.
    """
    cfg = scn.cfg
    hc_paired = _paired_only(hc)
    mm = impairments.mismatch_matrices(scn.iqi_params())
    zbar_iqi = np.diag(
        impairments.noise_covariance_iqi(cfg.sigma2, scn.iqi_params())
    ).real
    zbar_ideal = np.full(cfg.M, cfg.sigma2)
    zero = np.zeros_like(hc)

    hd_iqi, hi_iqi = beamforming.effective_channels_all(hc_paired, mm)
    hd_both, hi_both = beamforming.effective_channels_all(hc, mm)

    out = np.empty((len(powers), 4))
    for i, P in enumerate(powers):
        out[i, 0] = metrics.sum_rate_tin(hc_paired, zero, P, zbar_ideal)
        out[i, 1] = metrics.sum_rate_tin(hc, zero, P, zbar_ideal)
        out[i, 2] = metrics.sum_rate_tin(hd_iqi, hi_iqi, P, zbar_iqi)
        out[i, 3] = metrics.sum_rate_tin(hd_both, hi_both, P, zbar_iqi)
    return out


def sweep_rate_vs_snr(scn: Scenario) -> ResultTable:
    """Mean sum rate vs. SNR for the four interference toggles."""
    snr = np.asarray(scn.snr_db, dtype=float)
    powers = scn.cfg.sigma2 * 10.0 ** (snr / 10.0)
    acc = np.zeros((len(snr), 4))
    for t in range(scn.trials):
        acc += _variant_rates(scn, trial_channel(scn, t), powers)
    acc /= scn.trials
    rows = np.column_stack([snr, acc])
    return ResultTable(
        "rate-vs-snr",
        scn.band,
        ["snr_db", "rate_noint", "rate_iui", "rate_iqi", "rate_iqi_iui"],
        rows,
        scn.canonical_json(),
        scn.seed,
    )


def sweep_nulling(scn: Scenario) -> ResultTable:
    """Full-band vs. image-nulled sum rate over the SNR sweep.

    Image-nulled mode transmits on k > 0 only, which removes the image
    interference term entirely.  Under the default pooled power policy each
    active subcarrier gets 2P so total radiated power matches the full-band
    mode; the 'fixed' policy keeps P per active subcarrier.
    """
    snr = np.asarray(scn.snr_db, dtype=float)
    powers = scn.cfg.sigma2 * 10.0 ** (snr / 10.0)
    boost = 2.0 if scn.nulling_power_policy == "pooled" else 1.0
    cfg = scn.cfg
    mm = impairments.mismatch_matrices(scn.iqi_params())
    zbar = np.diag(
        impairments.noise_covariance_iqi(cfg.sigma2, scn.iqi_params())
    ).real
    active = np.zeros(2 * cfg.K, dtype=bool)
    active[cfg.K :] = True  # rows of k = 1..K

    acc = np.zeros((len(snr), 2))
    for t in range(scn.trials):
        hc = trial_channel(scn, t)
        if not scn.iui:
            hc = _paired_only(hc)
        hd, hi = beamforming.effective_channels_all(hc, mm)
        for i, P in enumerate(powers):
            acc[i, 0] += metrics.sum_rate_tin(hd, hi, P, zbar)
            acc[i, 1] += metrics.sum_rate_tin(
                hd, hi, boost * P, zbar, P_image=0.0, active=active
            )
    acc /= scn.trials
    rows = np.column_stack([snr, acc])
    return ResultTable(
        "nulling",
        scn.band,
        ["snr_db", "rate_fullband", "rate_nulled"],
        rows,
        scn.canonical_json(),
        scn.seed,
    )


_STUDY_FNS = {
    "slope-sweep": sweep_slope_vs_g,
    "se-curve": sweep_se_vs_ebn0,
    "rate-vs-snr": sweep_rate_vs_snr,
    "nulling": sweep_nulling,
}


def run(
    scn: Scenario,
    study: str,
    out_dir: str,
    deterministic_names: bool = False,
) -> tuple[ResultTable, str]:
    """Execute one study and write its CSV; returns (table, csv path)."""
    if study not in _STUDY_FNS:
        raise ValueError(f"unknown study {study!r}; expected one of {STUDIES}")
    table = _STUDY_FNS[study](scn)
    os.makedirs(out_dir, exist_ok=True)
    name = f"{study}_{scn.band}"
    if not deterministic_names:
        name += time.strftime("_%Y%m%dT%H%M%S", time.gmtime())
    path = os.path.join(out_dir, name + ".csv")
    table.write_csv(path)
    return table, path
