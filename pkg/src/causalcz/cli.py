"""Command-line front end: run experiments from flags or a JSON config,
emit report JSON (plus CSV tables), build and serialize sparse families,
and import/export grid functions.

Exit codes: 0 all verdicts pass, 1 verdict failure, 2 usage error,
3 internal error.  A config file supplies defaults; explicit flags
override it; unknown config keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from . import __version__, core
from .experiments import (
    AppendixSpec,
    run_appendix,
    run_carleson_bound,
    run_domination,
    run_example_2_1,
    run_example_2_3,
    run_hormander,
    run_weak_l1,
)
from .experiments.randomized import _default_graph
from .grid import GridFunction
from .kernels import beurling, hilbert_boundary, lipgraph
from .operators import PvParams
from .sparse import SparseParams, build, verify_sparsity

KERNEL_CHOICES = {
    "beurling-": lambda: beurling(sign="-"),
    "beurling+": lambda: beurling(sign="+"),
    "hilbert-": lambda: hilbert_boundary(sign="-"),
    "hilbert+": lambda: hilbert_boundary(sign="+"),
    "lipgraph-": lambda: lipgraph(_default_graph(), 0.5, sign="-"),
    "lipgraph+": lambda: lipgraph(_default_graph(), 0.5, sign="+"),
}


def _add_common(sp):
    sp.add_argument("--config", help="JSON file with parameter defaults")
    sp.add_argument("--out", help="write the report as JSON here")
    sp.add_argument("--csv", help="prefix for CSV exports of report tables")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="causalcz",
        description="verification experiments for causal singular integrals",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    specs = {
        "ex21": {
            "help": "exact concentrated-profile sparse counterexample",
            "params": {"n_min": 4, "n_max": 12, "p": 2.0},
        },
        "ex23": {
            "help": "exact horizontal Hilbert counterexample",
            "params": {"n_min": 3, "n_max": 8},
        },
        "appendix": {
            "help": "lacunary Poisson-extension contradiction",
            "params": {"center": 0.75, "width": 0.5, "amplitude": 1.0,
                       "k0": 4, "p": 2.0, "k_counts": "2,4,8"},
        },
        "dominate": {
            "help": "sparse domination constants for seeded random data",
            "params": {"seed": 0, "trials": 10, "j": 6, "n": 1,
                       "refine_count": 3, "jobs": 1},
        },
        "carleson": {
            "help": "Carleson-norm and pointwise sparse bounds",
            "params": {"seed": 0, "trials": 50, "p": 2.0, "q": 2.0, "j": 6,
                       "n": 1, "refine_count": 2, "jobs": 1},
        },
        "weakl1": {
            "help": "weak (1,1) level-set constants",
            "params": {"seed": 0, "trials": 10, "j": 6, "n": 1,
                       "decades": 4.0},
        },
        "hormander": {
            "help": "integral regularity stability for the built-in kernels",
            "params": {"seed": 0, "samples": 100, "outer_halfwidth": 24,
                       "resolution": 4},
        },
    }
    for name, info in specs.items():
        sp = sub.add_parser(name, help=info["help"])
        _add_common(sp)
        for key, default in info["params"].items():
            kind = type(default)
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key,
                            type=kind, default=None,
                            help=f"default {default}")
        sp.set_defaults(_param_spec=info["params"])

    sp = sub.add_parser("sparse-build",
                        help="build a sparse family from a grid function")
    _add_common(sp)
    sp.add_argument("--input", required=True,
                    help="grid function (.csv or .bin)")
    sp.add_argument("--kernel", required=True, choices=sorted(KERNEL_CHOICES))
    sp.add_argument("--json", required=True, dest="json_out",
                    help="output path for the serialized family")
    sp.add_argument("--cover-levels", dest="cover_levels", type=int,
                    default=None, help="default 3")
    sp.add_argument("--c-init", dest="c_init", type=float, default=None,
                    help="default 1.0")
    sp.add_argument("--exclusion-radius", dest="exclusion_radius", type=int,
                    default=None, help="default 1")
    sp.set_defaults(
        _param_spec={"cover_levels": 3, "c_init": 1.0, "exclusion_radius": 1}
    )

    sp = sub.add_parser("info", help="print version, backend and defaults")
    sp.set_defaults(_param_spec={})
    return ap


def _merge_params(args) -> dict:
    spec = args._param_spec
    merged = dict(spec)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(spec)
        if unknown:
            _usage_error(f"unknown config keys: {sorted(unknown)}")
        merged.update(cfg)
    for key in spec:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


class UsageError(Exception):
    pass


def _usage_error(msg: str):
    raise UsageError(msg)


def _dispatch(args):
    cmd = args.command
    if cmd == "info":
        print(f"causalcz {__version__}")
        print(f"summation backend: {core.backend_name()}")
        print("geometry: exact dyadic rationals on the positive quadrant")
        print("defaults: pv exclusion radius 1, sparse alpha 2^-(2+n), "
              "kept fraction target 1/4, covering levels 3")
        return None
    p = _merge_params(args)
    if cmd == "ex21":
        return run_example_2_1(range(p["n_min"], p["n_max"] + 1), p["p"])
    if cmd == "ex23":
        return run_example_2_3(range(p["n_min"], p["n_max"] + 1))
    if cmd == "appendix":
        counts = [int(s) for s in str(p["k_counts"]).split(",")]
        spec = AppendixSpec(center=p["center"], width=p["width"],
                            amplitude=p["amplitude"], k0=p["k0"], p=p["p"])
        return run_appendix(spec, k_counts=counts)
    if cmd == "dominate":
        return run_domination(seed=p["seed"], trials=p["trials"],
                              depth=p["j"], n=p["n"],
                              refine_count=p["refine_count"], jobs=p["jobs"])
    if cmd == "carleson":
        return run_carleson_bound(seed=p["seed"], trials=p["trials"],
                                  p=p["p"], q=p["q"], depth=p["j"], n=p["n"],
                                  refine_count=p["refine_count"],
                                  jobs=p["jobs"])
    if cmd == "weakl1":
        return run_weak_l1(seed=p["seed"], trials=p["trials"], depth=p["j"],
                           n=p["n"], decades=p["decades"])
    if cmd == "hormander":
        return run_hormander(seed=p["seed"], samples=p["samples"],
                             outer_halfwidth=p["outer_halfwidth"],
                             resolution=p["resolution"])
    if cmd == "sparse-build":
        return _sparse_build(args, p)
    raise UsageError(f"unknown command {cmd}")


def _sparse_build(args, p):
    path = args.input
    if path.endswith(".bin"):
        f = GridFunction.from_binary(path)
    else:
        f = GridFunction.from_csv(path)
    k = KERNEL_CHOICES[args.kernel]()
    params = SparseParams(cover_levels=p["cover_levels"], c_init=p["c_init"],
                          pv=PvParams(exclusion_radius=p["exclusion_radius"]))
    fam = build(k, f, params)
    fam.to_json(args.json_out)
    rep = verify_sparsity(fam)
    from .experiments.report import ExperimentReport

    out = ExperimentReport(
        "sparse-build",
        {"input": path, "kernel": args.kernel, **p},
    )
    out.fitted["entries"] = rep.entry_count
    out.fitted["worst_kept_fraction"] = str(rep.worst_ratio)
    out.add_verdict("sparsity_exact", rep.ok,
                    f"{rep.entry_count} cubes, worst kept fraction "
                    f"{rep.worst_ratio}")
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        report = _dispatch(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3
    if report is None:
        return 0
    if getattr(args, "out", None):
        report.to_json(args.out)
    if getattr(args, "csv", None):
        report.tables_to_csv(args.csv)
    print(report.summary_line())
    return 0 if report.passed() else 1


if __name__ == "__main__":
    sys.exit(main())
