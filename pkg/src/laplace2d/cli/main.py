"""laplace2d command line: one subcommand per computation, artifacts in a run directory.

Exit codes: 0 all checks passed, 1 a numerical check failed or a routine raised,
2 bad usage or configuration.
"""

import argparse
import sys
import traceback

from . import acceptance
from .artifacts import Artifacts
from .commands import COMMANDS, HELP, SELF_TEST_FILES
from .config import SPECS, UsageError, build_config


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _flag_type(spec):
    if spec.type is str:
        return str
    return lambda s: s  # coerced and validated in build_config


def build_parser():
    parser = _Parser(prog="laplace2d", description="Laplace chains, magnetic Bloch spectra and lattice analogues.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, specs in SPECS.items():
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="JSON config file (keys: command, params, output_dir, seed, tolerances)")
        sp.add_argument("--output-dir", help="run directory (default runs/<command>)")
        sp.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a pass tolerance")
        sp.add_argument("--self-test", action="store_true", help="run this module's property tests first")
        for key, spec in specs.items():
            kw = {"dest": f"p_{key}", "metavar": key.upper(), "default": None, "type": _flag_type(spec), "help": f"{spec.help} (default {spec.default})"}
            sp.add_argument(f"--{key}", **kw)
    return parser


def run(cfg):
    """Execute one configured run; returns (report, exit code)."""
    art = Artifacts(cfg.output_dir)
    report = {"command": cfg.command, "params": cfg.params, "tolerances": cfg.tolerances}
    if cfg.self_test and SELF_TEST_FILES[cfg.command]:
        st = acceptance.run_property_suite(SELF_TEST_FILES[cfg.command])
        report["self_test"] = st
        if not st["passed"]:
            report["passed"] = False
            return report, art, 1
    try:
        result = COMMANDS[cfg.command](cfg.params, cfg.tolerances, art)
    except UsageError:
        raise
    except Exception as exc:  # numerical failure: keep the diagnostics in the report
        report["error"] = {"type": type(exc).__name__, "message": str(exc), "traceback": traceback.format_exc().splitlines()[-6:]}
        report["passed"] = False
        return report, art, 1
    report["result"] = result
    report["passed"] = bool(result.get("passed", False))
    return report, art, 0 if report["passed"] else 1


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        flags = {k[2:]: v for k, v in vars(args).items() if k.startswith("p_")}
        cfg = build_config(args.command, flags, args.output_dir, args.config, args.tol, args.self_test)
        report, art, code = run(cfg)
    except UsageError as exc:
        print(f"laplace2d: error: {exc}", file=sys.stderr)
        return 2
    report["artifacts"] = sorted(set(art.written) | {"report.json", "advisory.json"})
    art.json("report.json", report)
    art.json("advisory.json", {})
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{cfg.command}: {status} ({cfg.output_dir / 'report.json'})")
    return code


if __name__ == "__main__":
    sys.exit(main())
