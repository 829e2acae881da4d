"""Command-line interface: scenario | simulate | fit | eval.

Flag precedence: explicit flags override a flat key=value --config file,
which overrides built-in defaults. Every run echoes a JSON manifest
(<out>.manifest.json) with the resolved configuration so results can be
reproduced bit-for-bit.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DataFormatError,
    ParticipantExcludedError,
    ProfileError,
    SimulationDivergedError,
    SvcMiscError,
)
from .fitting import (
    ConditionData,
    FitConfig,
    fit,
    fit_per_condition,
    mean_abs_error,
    objective_j,
    pearson_r,
    read_params_csv,
    write_diagnostics_csv,
    write_params_csv,
)
from .misc_output import OutputParams, OutputVariant
from .motion_data import (
    GRAVITY_DEFAULT,
    load_misc_csv,
    load_motion_csv,
    write_motion_csv,
)
from .scenario import (
    HeadTilt,
    HeadTiltCondition,
    ShuttleConfig,
    head_motion,
    shuttle_accel_profile,
    write_timeline_csv,
)
from .simulator import SimConfig, sample_at, simulate, write_result_csv
from .svc_observer import SvcParams

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_EXCLUDED = 5


def _load_config_file(path) -> dict:
    """Flat key=value file; '#' comments and blank lines ignored."""
    cfg = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DataFormatError(f"cannot read config file: {e}") from e
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError(f"{path}:{lineno}: expected key=value")
        key, _, val = line.partition("=")
        cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


def _coerce(raw: str, default):
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if default is None:
        return raw
    return type(default)(raw)


def _resolve(args, defaults: dict) -> dict:
    """Merge flags > config file > defaults for the keys in `defaults`."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    resolved = {}
    for key, default in defaults.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = flag_val
        elif key in file_cfg:
            resolved[key] = _coerce(file_cfg[key], default)
        else:
            resolved[key] = default
    return resolved


def _write_manifest(out_path, subcommand: str, resolved: dict, paths: dict) -> None:
    manifest = {
        "tool": "svcmisc",
        "version": __version__,
        "subcommand": subcommand,
        "config": {k: v for k, v in resolved.items()},
        "paths": paths,
    }
    mpath = str(out_path) + ".manifest.json"
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _output_params_from_args(variant: OutputVariant, args) -> OutputParams:
    if args.params:
        params = read_params_csv(args.params)
        if params.variant is not variant:
            raise DataFormatError(
                f"params file is for variant '{params.variant.value}', "
                f"not '{variant.value}'"
            )
        return params
    fields = {}
    for name in ("beta1", "beta2", "exponent", "b", "tau_i", "gain"):
        v = getattr(args, name, None)
        if v is not None:
            fields[name] = v
    return OutputParams(variant, **fields)


# ---------------------------------------------------------------------------
# subcommands


def cmd_scenario(args) -> int:
    defaults = {
        "condition": "static",
        "distance": 3.0,
        "v_max": 1.67,
        "a_peak": 1.0,
        "dwell": 0.5,
        "set_duration": 300.0,
        "n_sets": 4,
        "break_duration": 30.0,
        "recovery_duration": 300.0,
        "dt": 0.01,
        "tau_head": 0.0,
        "g0": GRAVITY_DEFAULT,
        "seed": 0,
    }
    r = _resolve(args, defaults)
    cfg = ShuttleConfig(
        distance=r["distance"],
        v_max=r["v_max"],
        a_peak=r["a_peak"],
        dwell=r["dwell"],
        set_duration=r["set_duration"],
        n_sets=int(r["n_sets"]),
        break_duration=r["break_duration"],
        recovery_duration=r["recovery_duration"],
        dt=r["dt"],
    )
    condition = HeadTiltCondition(HeadTilt.parse(r["condition"]), r["tau_head"])
    profile = shuttle_accel_profile(cfg)
    motion = head_motion(profile, condition, r["g0"])
    write_motion_csv(motion, args.out)
    paths = {"out": str(args.out)}
    if args.timeline:
        write_timeline_csv(profile, args.timeline)
        paths["timeline"] = str(args.timeline)
    _write_manifest(args.out, "scenario", r, paths)
    print(
        f"scenario: condition={r['condition']} duration={profile.duration:.9g} s "
        f"samples={motion.n} -> {args.out}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    defaults = {
        "variant": "omanhill",
        "dt": 0.01,
        "stride": 10,
        "g0": GRAVITY_DEFAULT,
        "clamp": False,
        "seed": 0,
    }
    r = _resolve(args, defaults)
    variant = OutputVariant.parse(r["variant"])
    out_p = _output_params_from_args(variant, args)
    motion = load_motion_csv(args.motion, r["g0"])
    svc = SvcParams(g0=r["g0"])
    cfg = SimConfig(
        dt_sim=r["dt"], clamp_output=bool(r["clamp"]), record_stride=int(r["stride"])
    )
    result = simulate(motion, svc, variant, out_p, cfg)
    write_result_csv(result, args.out)
    r["svc_params"] = {
        "K_a": svc.K_a, "K_w": svc.K_w, "K_ac": svc.K_ac, "K_wc": svc.K_wc,
        "K_vc": svc.K_vc, "tau": svc.tau, "tau_d": svc.tau_d, "g0": svc.g0,
    }
    r["output_params"] = dict(zip(out_p.names(), out_p.values()))
    _write_manifest(
        args.out, "simulate", r, {"motion": str(args.motion), "out": str(args.out)}
    )
    print(
        f"simulate: variant={variant.value} steps={result.t.size} "
        f"max_misc={result.misc.max():.9g} -> {args.out}"
    )
    return EXIT_OK


def cmd_fit(args) -> int:
    defaults = {
        "variant": "omanhill",
        "dt": 0.01,
        "g0": GRAVITY_DEFAULT,
        "seed": 0,
        "n_starts": 32,
        "max_iters": 2000,
        "per_condition": False,
    }
    r = _resolve(args, defaults)
    if not args.motion or not args.misc or len(args.motion) != len(args.misc):
        raise DataFormatError("--motion and --misc must be given in matching pairs")
    variant = OutputVariant.parse(r["variant"])
    svc = SvcParams(g0=r["g0"])
    conditions = [
        ConditionData(load_motion_csv(m, r["g0"]), load_misc_csv(o))
        for m, o in zip(args.motion, args.misc)
    ]
    cfg = FitConfig(
        n_starts=int(r["n_starts"]),
        max_iters=int(r["max_iters"]),
        rng_seed=int(r["seed"]),
        dt_sim=r["dt"],
    )
    out_prefix = str(args.out)
    if r["per_condition"]:
        results = fit_per_condition(variant, conditions, svc, cfg)
    else:
        results = [fit(variant, conditions, svc, cfg)]

    for i, res in enumerate(results):
        suffix = f"_cond{i + 1}" if len(results) > 1 else ""
        write_params_csv(res.best_params, f"{out_prefix}{suffix}_params.csv")
        write_diagnostics_csv(res, f"{out_prefix}{suffix}_starts.csv")
        print(f"fit{suffix}: J={res.J:.9g}")
        conds = [conditions[i]] if len(results) > 1 else conditions
        for j, (cond, pred) in enumerate(zip(conds, res.predictions)):
            obs = cond.observed.values
            mae = mean_abs_error(obs, pred)
            try:
                rr = f"{pearson_r(obs, pred):.9g}"
            except DataFormatError:
                rr = "nan (zero variance)"
            print(f"  condition {j + 1}: mae={mae:.9g} pearson_r={rr}")
    _write_manifest(
        out_prefix,
        "fit",
        r,
        {"motion": list(map(str, args.motion)), "misc": list(map(str, args.misc)),
         "out_prefix": out_prefix},
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    defaults = {"seed": 0}
    r = _resolve(args, defaults)
    if not args.obs or not args.pred or len(args.obs) != len(args.pred):
        raise DataFormatError("--obs and --pred must be given in matching pairs")
    pairs = []
    for opath, ppath in zip(args.obs, args.pred):
        obs = load_misc_csv(opath)
        # predictions are real-valued; bypass the integer check
        from .motion_data import _read_csv_rows

        header, rows = _read_csv_rows(ppath)
        if "t" not in header or "misc" not in header:
            raise DataFormatError(f"{ppath}: expected header t,misc")
        it, im = header.index("t"), header.index("misc")
        pt = np.array([float(row[it]) for row in rows])
        pv = np.array([float(row[im]) for row in rows])
        if pt.shape != obs.t.shape or np.any(np.abs(pt - obs.t) > 1e-6):
            raise DataFormatError(
                f"{ppath}: prediction timestamps do not match {opath}"
            )
        pairs.append((obs.values, pv))

    lines = ["series,pearson_r,mae"]
    notes = []

    def metrics_row(label, o, p):
        mae = mean_abs_error(o, p)
        try:
            rr = "%.12g" % pearson_r(o, p)
        except DataFormatError as e:
            rr = "nan"
            notes.append(f"{label}: {e}")
        lines.append(f"{label},{rr},%.12g" % mae)

    for i, (o, p) in enumerate(pairs):
        metrics_row(f"condition_{i + 1}", o, p)
    pooled_o = np.concatenate([o for o, _ in pairs])
    pooled_p = np.concatenate([p for _, p in pairs])
    metrics_row("pooled", pooled_o, pooled_p)

    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_manifest(
        args.out,
        "eval",
        r,
        {"obs": list(map(str, args.obs)), "pred": list(map(str, args.pred)),
         "out": str(args.out)},
    )
    for line in lines:
        print(line)
    for note in notes:
        print("note:", note)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_shared(sp):
    sp.add_argument("--config", help="flat key=value config file")
    sp.add_argument("--seed", type=int, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="svcmisc",
        description="SVC observer simulation, MISC output dynamics, and "
        "output-part parameter fitting",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sc = sub.add_parser("scenario", help="synthesize shuttle head-motion traces")
    sc.add_argument("--condition", choices=["static", "move"])
    sc.add_argument("--distance", type=float)
    sc.add_argument("--v-max", dest="v_max", type=float)
    sc.add_argument("--a-peak", dest="a_peak", type=float)
    sc.add_argument("--dwell", type=float)
    sc.add_argument("--set-duration", dest="set_duration", type=float)
    sc.add_argument("--n-sets", dest="n_sets", type=int)
    sc.add_argument("--break-duration", dest="break_duration", type=float)
    sc.add_argument("--recovery-duration", dest="recovery_duration", type=float)
    sc.add_argument("--dt", type=float)
    sc.add_argument("--tau-head", dest="tau_head", type=float)
    sc.add_argument("--g0", type=float)
    sc.add_argument("--timeline", help="optional timeline CSV path")
    sc.add_argument("--out", required=True, help="motion CSV path")
    _add_shared(sc)
    sc.set_defaults(func=cmd_scenario)

    si = sub.add_parser("simulate", help="simulate conflict and MISC from motion")
    si.add_argument("--motion", required=True)
    si.add_argument("--variant", choices=[v.value for v in OutputVariant])
    si.add_argument("--params", help="param,value CSV (as written by fit)")
    si.add_argument("--beta1", type=float)
    si.add_argument("--beta2", type=float)
    si.add_argument("--exponent", type=float)
    si.add_argument("--b", type=float)
    si.add_argument("--tau-i", dest="tau_i", type=float)
    si.add_argument("--gain", type=float)
    si.add_argument("--dt", type=float, help="integration step (s)")
    si.add_argument("--stride", type=int, help="recording stride")
    si.add_argument("--clamp", action="store_const", const=True,
                    help="clamp reported MISC to [0, 10]")
    si.add_argument("--g0", type=float)
    si.add_argument("--out", required=True)
    _add_shared(si)
    si.set_defaults(func=cmd_simulate)

    fi = sub.add_parser("fit", help="fit output-part parameters to observed MISC")
    fi.add_argument("--motion", action="append", help="motion CSV (repeatable)")
    fi.add_argument("--misc", action="append", help="observed MISC CSV (repeatable)")
    fi.add_argument("--variant", choices=[v.value for v in OutputVariant])
    fi.add_argument("--n-starts", dest="n_starts", type=int)
    fi.add_argument("--max-iters", dest="max_iters", type=int)
    fi.add_argument("--dt", type=float)
    fi.add_argument("--g0", type=float)
    fi.add_argument("--per-condition", dest="per_condition", action="store_const",
                    const=True, help="fit each condition independently")
    fi.add_argument("--out", required=True, help="output file prefix")
    _add_shared(fi)
    fi.set_defaults(func=cmd_fit)

    ev = sub.add_parser("eval", help="Pearson r and MAE between MISC series")
    ev.add_argument("--obs", action="append", help="observed MISC CSV (repeatable)")
    ev.add_argument("--pred", action="append", help="predicted MISC CSV (repeatable)")
    ev.add_argument("--out", required=True, help="metrics CSV path")
    _add_shared(ev)
    ev.set_defaults(func=cmd_eval)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SimulationDivergedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ParticipantExcludedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EXCLUDED
    except (DataFormatError, ProfileError, SvcMiscError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
