"""Command-line entry point.

Thin shell over the experiments module: every study reachable here is also
reachable through the library with identical results.  Exit codes: 0
success, 1 validation error, 2 runtime/numerical failure, 3 I/O failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import sys

import numpy as np

from . import experiments, metrics
from .config import SystemConfig
from .impairments import amplitude_from_irr

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_IO = 3
EXIT_USAGE = 64

# config key -> (section for error messages only, handled specially below)
_TOP_KEYS = {
    "carrier_hz", "bandwidth_hz", "half_subcarrier_count",
    "tx_subarray_count", "user_count", "elements_per_side",
    "element_spacing_m", "tx_power_w", "noise_power_w",
    "tx_antenna_gain", "rx_antenna_gain", "band", "distance_m", "iqi",
    "iui", "nulling_power_policy", "per_subcarrier_analog",
    "azimuth_cone_deg", "elevation_cone_deg", "min_separation_deg",
    "trials", "seed", "snr_sweep_db", "g_sweep", "g_levels",
    "ebn0_sweep_db",
}
_IQI_KEYS = {"g", "phase_deg", "irr_db", "tx", "rx"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"usage error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def default_config() -> dict:
    """The bundled 300 GHz / 3-user reference scenario."""
    ref = importlib.resources.files("thziq.data").joinpath("paper_v.json")
    return json.loads(ref.read_text())


def scenario_from_config(cfg_dict: dict) -> experiments.Scenario:
    """Validate a config dictionary and build the Scenario."""
    unknown = set(cfg_dict) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown key '{sorted(unknown)[0]}'")
    d = dict(default_config())
    d_iqi = dict(d["iqi"])
    if "iqi" in cfg_dict:
        iqi_in = cfg_dict["iqi"]
        if not isinstance(iqi_in, dict):
            raise ValueError("key 'iqi' must be an object")
        bad = set(iqi_in) - _IQI_KEYS
        if bad:
            raise ValueError(f"unknown key 'iqi.{sorted(bad)[0]}'")
        d_iqi.update(iqi_in)
    d.update({k: v for k, v in cfg_dict.items() if k != "iqi"})

    phase = float(np.deg2rad(d_iqi.get("phase_deg", 0.0)))
    if "irr_db" in d_iqi and d_iqi["irr_db"] is not None:
        if "g" in d_iqi and "irr_db" in (cfg_dict.get("iqi") or {}) and \
                "g" in (cfg_dict.get("iqi") or {}):
            raise ValueError("keys 'iqi.g' and 'iqi.irr_db' are mutually exclusive")
        try:
            g = amplitude_from_irr(float(d_iqi["irr_db"]), phase)
        except ValueError as exc:
            raise ValueError(f"key 'iqi.irr_db': {exc}") from exc
    else:
        g = float(d_iqi.get("g", 1.0))

    try:
        sys_cfg = SystemConfig(
            f_c=float(d["carrier_hz"]),
            B=float(d["bandwidth_hz"]),
            K=int(d["half_subcarrier_count"]),
            N=int(d["tx_subarray_count"]),
            M=int(d["user_count"]),
            Q_side=int(d["elements_per_side"]),
            element_spacing=(
                None if d["element_spacing_m"] is None
                else float(d["element_spacing_m"])
            ),
            P=float(d["tx_power_w"]),
            sigma2=float(d["noise_power_w"]),
            G_T_gain=float(d["tx_antenna_gain"]),
            G_R_gain=float(d["rx_antenna_gain"]),
        )
        return experiments.Scenario(
            cfg=sys_cfg,
            band=str(d["band"]),
            distance_m=float(d["distance_m"]),
            iqi_g=g,
            iqi_phase_rad=phase,
            tx_iqi=bool(d_iqi.get("tx", True)),
            rx_iqi=bool(d_iqi.get("rx", True)),
            iui=bool(d["iui"]),
            nulling_power_policy=str(d["nulling_power_policy"]),
            per_subcarrier_analog=bool(d["per_subcarrier_analog"]),
            az_cone_deg=tuple(float(x) for x in d["azimuth_cone_deg"]),
            el_cone_deg=tuple(float(x) for x in d["elevation_cone_deg"]),
            min_sep_deg=float(d["min_separation_deg"]),
            trials=int(d["trials"]),
            seed=int(d["seed"]),
            snr_db=tuple(float(x) for x in d["snr_sweep_db"]),
            g_sweep=tuple(float(x) for x in d["g_sweep"]),
            g_levels=tuple(float(x) for x in d["g_levels"]),
            ebn0_db=tuple(float(x) for x in d["ebn0_sweep_db"]),
        )
    except (TypeError, KeyError) as exc:
        raise ValueError(f"invalid configuration: {exc}") from exc


def _parse_set(values: list[str]) -> dict:
    """Turn repeated KEY=VALUE flags into a (possibly nested) dict."""
    out: dict = {}
    for item in values:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got '{item}'")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"conflicting override for key '{key}'")
        node[parts[-1]] = value
    return out


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def build_parser() -> _Parser:
    parser = _Parser(prog="thziq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", metavar="PATH", help="JSON scenario file")
        p.add_argument(
            "--set", metavar="KEY=VALUE", action="append", default=[],
            help="override a config key (repeatable, dotted keys allowed)",
        )
        p.add_argument(
            "--out", metavar="DIR",
            default=os.environ.get("THZ_IQI_OUT", "."),
            help="output directory (default: $THZ_IQI_OUT or cwd)",
        )
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--trials", type=int, metavar="N")
        p.add_argument("--band", choices=list(experiments.BANDS))
        p.add_argument("--deterministic-names", action="store_true")
        p.add_argument("--quiet", action="store_true")

    for study in experiments.STUDIES:
        add_common(sub.add_parser(study, help=f"run the {study} study"))

    oc = sub.add_parser(
        "oracle-check",
        help="cross-check closed-form Eb/N0_min and S0 against the "
        "finite-difference oracle",
    )
    oc.add_argument("--instances", type=int, default=100, metavar="N")
    oc.add_argument("--seed", type=int, default=0, metavar="U64")
    oc.add_argument("--quiet", action="store_true")
    return parser


def _load_scenario(args) -> experiments.Scenario:
    cfg_dict: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg_dict = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config '{args.config}': {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"config '{args.config}' is not valid JSON: {exc}")
    cfg_dict = _merge(cfg_dict, _parse_set(args.set))
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.trials is not None:
        cfg_dict["trials"] = args.trials
    if args.band is not None:
        cfg_dict["band"] = args.band
    return scenario_from_config(cfg_dict)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK

    try:
        if args.command == "oracle-check":
            worst = metrics.oracle_agreement(args.instances, args.seed)
            if not args.quiet:
                print(
                    f"oracle-check: max relative error = {worst:.3e} "
                    f"over {args.instances} instances"
                )
            return EXIT_OK if worst < 0.01 else EXIT_RUNTIME
        scn = _load_scenario(args)
        table, path = experiments.run(
            scn, args.command, args.out,
            deterministic_names=args.deterministic_names,
        )
        if not args.quiet:
            print(f"wrote {path} ({table.rows.shape[0]} rows)")
        return EXIT_OK
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (metrics.NumericalError, metrics.OracleConvergenceError,
            ArithmeticError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
