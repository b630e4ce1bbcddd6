"""Command-line front end.

Exit codes: 0 success, 1 other failure (including a failed robust verdict
for ``synth`` without ``--force``), 2 configuration error, 3 disconnected
graph, 4 coprime factorization failure, 5 margin shortfall, 6 no graph
for the live agent count.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import Config, load_config, load_default_config
from .errors import (ConfigError, EventGraphMismatch, FactorizationFailed, MarginShortfall,
                     NotConnected, RaiddError)
from .graphs import nonzero_laplacian_eigenvalues
from .pipeline import eigenvalue_pool, margin_report, synthesize
from .simulator import simulate, write_result
from .synthesis import Controller

log = logging.getLogger("raidd")

EXIT_CODES = [
    (ConfigError, 2),
    (NotConnected, 3),
    (FactorizationFailed, 4),
    (MarginShortfall, 5),
    (EventGraphMismatch, 6),
]


def _fmt(values):
    return ",".join(f"{v:.6g}" for v in values)


def _config(args) -> Config:
    return load_config(args.config) if args.config else load_default_config()


def _out_dir(args, cfg) -> Path:
    return Path(args.out) if args.out else Path(cfg.output["directory"])


def cmd_spectra(args) -> int:
    cfg = _config(args)
    names = [args.bank] if args.bank else cfg.bank_names()
    report = {}
    for name in names:
        if name not in cfg.bank_names():
            raise ConfigError(f"unknown bank {name!r}", "$.topology.banks")
        bank = cfg.bank(name)
        marker = " (default)" if name == cfg.default_bank else ""
        print(f"bank {name}{marker}")
        graphs = []
        for count in bank.counts():
            for G in bank.sets[count]:
                ev = nonzero_laplacian_eigenvalues(G)
                print(f"  n={count} {G.name}: {_fmt(ev)}")
                graphs.append({"count": count, "name": G.name, "eigenvalues": ev.tolist()})
        pool = eigenvalue_pool(cfg, name)
        print(f"  xi={pool.xi}")
        print(f"  pool: {_fmt(pool.lambdas)}")
        report[name] = {"graphs": graphs, "pool": list(pool.lambdas), "xi": pool.xi}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "spectra.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    return 0


def _print_report(r):
    print(f"central plant: index {r.cp_index} (lambda = {r.lambda_cp:.6g})")
    print(f"b_max   = {r.b_max:.6f}")
    print(f"eps_cp  = {r.eps_cp:.6f}")
    print(f"psi_max = {r.psi_max:.6f}")
    print(f"nominal condition b_max > eps_cp:  {'holds' if r.nominal_ok else 'fails'}")
    print(f"robust condition  b_max > psi_max: {'holds' if r.robust_ok else 'fails'}")


def cmd_margin(args) -> int:
    cfg = _config(args)
    _, report = margin_report(cfg, args.grid)
    _print_report(report)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "margin.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n",
                                     encoding="utf-8")
    return 0


def cmd_synth(args) -> int:
    cfg = _config(args)
    _, report = margin_report(cfg, args.grid)
    _print_report(report)
    if not report.robust_ok and not args.force:
        print("robust condition fails; rerun with --force to synthesize anyway", file=sys.stderr)
        return 1
    outcome = synthesize(cfg, gamma_rel=args.gamma_rel, report=report)
    out = _out_dir(args, cfg)
    path = Path(args.controller) if args.controller else out / "controller.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(outcome.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"controller order {outcome.controller.nstates}, gamma_rel {outcome.gamma_rel:g}")
    print(f"achieved margin b(P_cp, K) = {outcome.margin:.6f}")
    print(f"wrote {path}")
    return 0


def _load_controller(path: Path) -> Controller:
    if not path.exists():
        raise FileNotFoundError(f"controller file {path} not found; run 'raidd synth' first")
    try:
        return Controller.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad controller file {path}: {exc}", "$") from exc


def cmd_simulate(args) -> int:
    cfg = _config(args)
    case = args.scenario if args.scenario is not None else str(args.case)
    out = _out_dir(args, cfg)
    K = _load_controller(Path(args.controller) if args.controller else out / "controller.json")
    every = cfg.output["record_every"]
    formats = cfg.output["formats"]
    for sc in _checked(lambda: cfg.scenarios(case, K), case):
        result = _checked(lambda: simulate(sc), case)
        write_result(result, out / sc.label, every=every, formats=formats)
        print(f"{sc.label}: final disagreement {result.final_disagreement:.3e}")
    return 0


def _checked(fn, case):
    # scenario-level ValueErrors (bad event sequences) are configuration errors
    try:
        return fn()
    except RaiddError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), f"$.scenario.cases.{case}") from exc


def cmd_seed_config(args) -> int:
    text = load_default_config().dumps()
    if not args.out:
        sys.stdout.write(text)
        return 0
    path = Path(args.out)
    if path.is_dir() or not path.suffix:
        path.mkdir(parents=True, exist_ok=True)
        path = path / "config.json"
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raidd", description="Robust consensus protocol synthesis and simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="output directory (default: the config's output.directory)"):
        p.add_argument("--config", help="JSON config (default: shipped case study)")
        p.add_argument("--out", help=out_help)

    p = sub.add_parser("spectra", help="Laplacian spectra and the eigenvalue pool")
    common(p, "also write spectra.json into this directory")
    p.add_argument("--bank", help="only this bank")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("margin", help="central plant, b_max, eps_cp and the robust sweep")
    common(p)
    p.add_argument("--grid", type=int, help="grid points per perturbed entry")
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("synth", help="synthesize the controller")
    common(p)
    p.add_argument("--grid", type=int, help="grid points per perturbed entry")
    p.add_argument("--gamma-rel", type=float, help="gamma relative to the optimum (>= 1)")
    p.add_argument("--force", action="store_true", help="synthesize even if the check fails")
    p.add_argument("--controller", help="controller JSON path (default: OUT/controller.json)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="run a configured case")
    common(p)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--case", type=int, help="case number")
    which.add_argument("--scenario", help="case name")
    p.add_argument("--controller", help="controller JSON path (default: OUT/controller.json)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("seed-config", help="print or write the shipped case-study config")
    p.add_argument("--out", help="file or directory to write instead of stdout")
    p.set_defaults(func=cmd_seed_config)
    return parser


def _setup_logging():
    # RAI_LOG takes a level name (DEBUG, INFO, ...) or number
    raw = os.environ.get("RAI_LOG", "WARNING").strip().upper()
    level = int(raw) if raw.isdigit() else logging.getLevelName(raw)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RaiddError as exc:
        code = next((c for cls, c in EXIT_CODES if isinstance(exc, cls)), 1)
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
