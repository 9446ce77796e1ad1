"""Command line entry point: ``rimnull {calibrate,pattern,solve,sweep}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import harness
from .errors import RimNullError
from .pofield import gain_dbi


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value scenario file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any configuration key (repeatable)")
    common.add_argument("--seed", type=int)
    common.add_argument("--method", help="optimal|lsq|gp|sa|serial (comma list allowed)")
    common.add_argument("--M", type=int, dest="M")
    common.add_argument("--nulls", help="null angles in degrees, comma separated")
    common.add_argument("--mainlobe-constraint", action="store_true", default=None)
    common.add_argument("--delta", type=float)
    common.add_argument("--out")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="rimnull", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("calibrate", parents=[common], help="derive F/D, tiling and gain anchors")
    sub.add_parser("pattern", parents=[common], help="write pattern cuts for fixed and solved dishes")
    sub.add_parser("solve", parents=[common], help="solve once and write weights")
    sub.add_parser("sweep", parents=[common], help="null-angle sweep (CSV + SVG)")
    sub.add_parser("show-config", parents=[common], help="print the effective configuration")
    return p


def _overrides(args):
    pairs = {}
    for item in args.set:
        if "=" not in item:
            raise RimNullError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        pairs[k] = v
    for key in ("seed", "method", "M", "nulls", "delta", "out"):
        v = getattr(args, key)
        if v is not None:
            pairs[key] = str(v)
    if args.mainlobe_constraint:
        pairs["mainlobe_constraint"] = "true"
    return pairs


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = harness.load_scenario(args.config, _overrides(args))
        if args.command == "show-config":
            sys.stdout.write(harness.dump_scenario(scenario))
        elif args.command == "calibrate":
            rep = harness.calibrate(scenario)
            for k, v in rep.items():
                print(f"{k:26s} {v:.6g}" if isinstance(v, float) else f"{k:26s} {v}")
        elif args.command == "pattern":
            paths, _ = harness.run_pattern(scenario)
            print("\n".join(paths))
        elif args.command == "solve":
            os.makedirs(scenario.out, exist_ok=True)
            system = harness.build_system(scenario)
            ref = system.uniform_reference()
            for method in scenario.method:
                rep = harness.solve(system, scenario, method, scenario.nulls)
                label = harness.method_label(scenario, method)
                path = os.path.join(scenario.out, f"weights_{label}.csv")
                harness.write_weights(path, rep.weights, system.segments)
                w = rep.weights.values
                nulls = ", ".join(f"{a:g} deg: {gain_dbi(system.field(w, np.radians(a))[0], ref):.2f} dBi"
                                  for a in scenario.nulls)
                print(f"{label}: cost={rep.cost:.4e} iters={rep.iterations} "
                      f"G(0)={gain_dbi(system.field(w, 0.0)[0]):.3f} dBi; {nulls}")
                print(path)
        elif args.command == "sweep":
            paths, _ = harness.run_null_sweep(scenario)
            print("\n".join(paths))
    except (RimNullError, OSError) as exc:
        print(f"rimnull: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
