"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 scenario validation error, 3 IO error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import scenario as scn
from .sim import compare, run

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adhocsim", description="DSR / ESSDSR lifetime simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, protocol=True):
        p.add_argument("--scenario", default="paper-default",
                       help="scenario JSON file, or 'paper-default' (the default)")
        p.add_argument("--seed", type=int)
        p.add_argument("--horizon", type=float)
        if protocol:
            p.add_argument("--protocol", choices=scn.PROTOCOLS)

    p = sub.add_parser("run", help="simulate one protocol")
    common(p)
    p.add_argument("--out", default="out")
    p = sub.add_parser("compare", help="simulate both protocols with the same seed")
    common(p, protocol=False)
    p.add_argument("--out", default="out")
    p = sub.add_parser("validate", help="check a scenario file")
    common(p)
    p = sub.add_parser("emit-default-scenario", help="print or write the built-in scenario")
    common(p)
    p.add_argument("--out", help="file to write instead of stdout")
    return parser


def _scenario(args) -> scn.Scenario:
    s = scn.load_scenario(args.scenario)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if getattr(args, "protocol", None):
        changes["protocol"] = args.protocol
    return s.with_(**changes) if changes else s


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        s = _scenario(args)
    except scn.ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "validate":
            print(f"ok: {s.name}, {len(s.nodes)} nodes, {len(s.flows)} flow(s), digest {s.digest()}")
        elif args.command == "emit-default-scenario":
            text = scn.dumps(s)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
        elif args.command == "run":
            result = run(s, out_dir=args.out)
            rep = result.report
            print(f"{rep.protocol}: network lifetime {rep.network_lifetime:.3f} s ({rep.lifetime_cause})")
        elif args.command == "compare":
            c = compare(s, out_dir=args.out)
            print(f"dsr: {c.dsr.report.network_lifetime:.3f} s ({c.dsr.report.lifetime_cause})")
            print(f"essdsr: {c.essdsr.report.network_lifetime:.3f} s ({c.essdsr.report.lifetime_cause})")
            print(f"improvement: {c.improvement_percent:.2f} %")
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
