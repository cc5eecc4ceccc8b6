"""Command-line entry point: scatter, evolve, painleve, compare, fit."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings

import numpy as np

from .errors import ConfigError, MKdVError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, usage=self.format_usage().strip())


def _emit_error(exc, code):
    if isinstance(exc, MKdVError):
        doc = exc.to_dict()
    else:
        doc = {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(doc, default=str) + "\n")
    return code


def _load_config(args):
    from .harness import ExperimentConfig

    if args.config:
        if not os.path.exists(args.config):
            raise ConfigError("config file not found", path=args.config)
        return ExperimentConfig.from_yaml(args.config)
    return ExperimentConfig({})


def _print(doc):
    sys.stdout.write(json.dumps(doc, indent=1, default=str) + "\n")


def cmd_scatter(args):
    from .scattering import reflection_coefficient

    cfg = _load_config(args)
    sc = cfg.data["scattering"]
    table = reflection_coefficient(cfg.scattering_potential(), float(sc["z_max"]), float(sc["dz"]),
                                   threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    table.to_csv(os.path.join(args.out, "reflection.csv"))
    table.to_json(os.path.join(args.out, "reflection.json"))
    _print({"r0": [table.r0().real, table.r0().imag], **table.meta})


def cmd_evolve(args):
    from .solver import evolve, write_snapshots

    cfg = _load_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        snaps = evolve(cfg.solver_potential(), cfg.solver_config)
    write_snapshots(snaps, args.out, {"experiment": cfg.data, "solver": cfg.solver_config.to_dict()})
    _print({"times": [s.t for s in snaps], "warnings": [str(w.message) for w in caught]})


def cmd_painleve(args):
    from .special import painleve2_solve

    cfg = _load_config(args)
    pv = cfg.data["painleve"]
    rho = args.rho if args.rho is not None else pv.get("rho")
    if rho is None:
        raise ConfigError("painleve needs --rho or painleve.rho in the config")
    sol = painleve2_solve(float(rho), float(pv["s_min"]), float(pv["s_max"]), float(pv["ds"]))
    os.makedirs(args.out, exist_ok=True)
    sol.to_csv(os.path.join(args.out, "painleve.csv"))
    _print({"rho": sol.rho, "P0": float(sol(0.0)), **sol.meta})


def cmd_compare(args):
    from .harness import emit_report, run_compare

    cfg = _load_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = run_compare(cfg, threads=args.threads)
    files = emit_report(report, args.out)
    _print({"files": [os.path.basename(f) for f in files],
            "fits": {k: vars(v) for k, v in report.fits.items()},
            "rho": report.manifest["rho"]})


def _read_series(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    head = [c.strip() for c in rows[0]]
    if "t" not in head or "err" not in head:
        raise ConfigError("series CSV needs columns t and err", path=path)
    it, ie = head.index("t"), head.index("err")
    return [(float(r[it]), float(r[ie])) for r in rows[1:] if r]


def cmd_fit(args):
    from .harness import fit_decay

    if args.series:
        series = _read_series(args.series)
    elif args.synthetic is not None:
        rng = np.random.default_rng(args.seed)
        ts = np.array([25.0, 50.0, 100.0, 200.0, 400.0, 800.0])
        errs = ts ** args.synthetic * (1.0 + args.noise * rng.standard_normal(ts.size))
        series = list(zip(ts.tolist(), errs.tolist()))
    else:
        raise ConfigError("fit needs --series PATH or --synthetic EXPONENT")
    fit = fit_decay(series)
    doc = {**vars(fit), "series": series}
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "fit.json"), "w") as fh:
        json.dump(doc, fh, indent=1)
    _print(doc)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML experiment config")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory")
    common.add_argument("--threads", metavar="N", type=int, default=1)
    common.add_argument("--seed", metavar="N", type=int, default=0, help="RNG seed (synthetic noise only)")

    p = _Parser(prog="mkdv-longtime", description="Long-time asymptotics of defocusing MKdV")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("scatter", parents=[common], help="reflection coefficient table").set_defaults(func=cmd_scatter)
    sub.add_parser("evolve", parents=[common], help="reference PDE snapshots").set_defaults(func=cmd_evolve)
    pp = sub.add_parser("painleve", parents=[common], help="Ablowitz-Segur table")
    pp.add_argument("--rho", type=float)
    pp.set_defaults(func=cmd_painleve)
    sub.add_parser("compare", parents=[common], help="full comparison report").set_defaults(func=cmd_compare)
    pf = sub.add_parser("fit", parents=[common], help="power-law fit of an error series")
    pf.add_argument("--series", metavar="CSV")
    pf.add_argument("--synthetic", type=float, metavar="EXPONENT")
    pf.add_argument("--noise", type=float, default=0.0)
    pf.set_defaults(func=cmd_fit)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1", threads=args.threads)
        args.func(args)
    except ConfigError as exc:
        return _emit_error(exc, 2)
    except (MKdVError, ValueError, OSError) as exc:
        return _emit_error(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
