"""Command line driver: ``vvote setup | inject | run | verify | audit``.

A run directory holds everything for one election::

    config.json scenario.json keys/        written by setup, edited by inject
    public/ private/ report.json report.txt written by run
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from vvote import auditmath
from vvote.config import ElectionConfig, desk_config
from vvote.election import keygen_ceremony
from vvote.errors import ConfigError, VVoteError
from vvote.scenario import FAULT_KINDS, Scenario, generate_scenario, inject_fault, run_scenario
from vvote.verifier import verify_public, verify_run_dir

log = logging.getLogger("vvote")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _load_run(run_dir: Path) -> tuple[ElectionConfig, Scenario]:
    cfg_path, sc_path = run_dir / "config.json", run_dir / "scenario.json"
    if not cfg_path.exists() or not sc_path.exists():
        raise ConfigError(f"{run_dir} has no config.json/scenario.json; run `vvote setup` first")
    return ElectionConfig.load(cfg_path), Scenario.from_json(json.loads(sc_path.read_text()))


# -- subcommands -----------------------------------------------------------------------


def cmd_setup(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    if args.config:
        cfg = ElectionConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
    else:
        cfg = desk_config(args.mode, seed=args.seed if args.seed is not None else "desk")
    if args.gen_audit is not None:
        cfg = cfg.replace(gen_audit_fraction=args.gen_audit)
    cfg.validate()
    scenario = generate_scenario(cfg, args.voters, days=args.days, mix_actions=not args.plain_actions)
    _write_json(run_dir / "config.json", cfg.to_dict())
    _write_json(run_dir / "scenario.json", scenario.to_json())
    keys = keygen_ceremony(cfg, args.keygen)
    files = keys.write(run_dir / "keys")
    _write_json(run_dir / "keys" / "ceremony.json", {"mode": args.keygen, "seed": cfg.seed})
    print(f"setup: {len(scenario.voters)} voters over {scenario.days} days, {len(files)} key files in {run_dir / 'keys'}")
    return 0


def cmd_inject(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    cfg, scenario = _load_run(run_dir)
    scenario = inject_fault(scenario, args.kind, cfg)
    if args.target:
        scenario.faults[-1].target = args.target
    _write_json(run_dir / "scenario.json", scenario.to_json())
    print(f"inject: {args.kind} added ({len(scenario.faults)} fault(s) in scenario)")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    cfg, scenario = _load_run(run_dir)
    factory = None
    if args.live:
        from vvote.transport import live_factory

        factory = live_factory
    keygen = args.keygen
    if keygen is None:
        ceremony = run_dir / "keys" / "ceremony.json"
        keygen = json.loads(ceremony.read_text())["mode"] if ceremony.exists() else "joint"
    res = run_scenario(cfg, scenario, run_dir, keygen_mode=keygen, network_factory=factory)
    if args.live:
        res.election.net.close()
    report = verify_run_dir(run_dir)
    report.write(run_dir / "report.json")
    match = res.tally_matches
    _write_json(
        run_dir / "tally.json",
        {"matches": match, "votes": sum(res.decrypted.values()), "intended": sum(res.intended.values()), "seconds": round(res.seconds, 3)},
    )
    print(report.to_text(), end="")
    print(f"tally: decrypted multiset {'equals' if match else 'DIFFERS FROM'} intended multiset ({sum(res.decrypted.values())} rows)")
    print(f"run: {res.seconds:.1f}s")
    honest = not scenario.faults
    return 0 if report.passed and (match or not honest) else 1


def cmd_verify(args: argparse.Namespace) -> int:
    if args.run_dir:
        report = verify_run_dir(args.run_dir)
    else:
        if not args.board or not args.config:
            raise ConfigError("verify needs --run-dir, or --board and --config")
        report = verify_public(args.board, args.config, args.markoff, args.digests, args.receipts, args.count, args.registry)
    if args.report:
        report.write(args.report)
    print(report.to_text(), end="")
    return 0 if report.passed else 1


def cmd_audit(args: argparse.Namespace) -> int:
    if args.tables:
        for p in auditmath.emit_tables(args.tables, args.delimiter):
            print(p)
        return 0
    if args.N is not None and args.S is not None:
        print(f"pass probability (exact) = {auditmath.prob_pass_exact(args.N, args.S, args.F):.6g}")
    if args.r is not None:
        if args.q is not None:
            print(f"posterior P(fraud | pass) = {auditmath.posterior(args.q, args.r, args.F):.6g}")
        print(f"pass probability (approx) = {auditmath.prob_pass_approx(args.r, args.F):.6g}")
    if args.confidence is not None:
        if args.q is not None:
            res = auditmath.required_rate(args.q, args.F, args.confidence)
            print(f"required rate (prior q={args.q}) = {res.rate:.6g}")
        print(f"required rate (no prior) = {auditmath.required_rate_no_prior(args.F, args.confidence):.6g}")
        if args.N is not None:
            print(f"required rate (exact, N={args.N}) = {auditmath.required_rate_exact(args.N, args.F, args.confidence).rate:.6g}")
    return 0


# -- parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vvote", description="Desk-scale verifiable election simulator and verifier.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("setup", help="write config, scenario and key files into a run directory")
    s.add_argument("run_dir")
    s.add_argument("--config", help="election config JSON (default: the built-in desk election)")
    s.add_argument("--mode", choices=("alg1", "alg2"), default="alg1")
    s.add_argument("--voters", type=int, default=100)
    s.add_argument("--days", type=int, default=2)
    s.add_argument("--seed")
    s.add_argument("--gen-audit", type=float, help="generation-audit fraction")
    s.add_argument("--keygen", choices=("joint", "dealer"), default="joint")
    s.add_argument("--plain-actions", action="store_true", help="every voter just votes (no confirmations or cancels)")
    s.set_defaults(fn=cmd_setup)

    s = sub.add_parser("inject", help="add a fault to the run directory's scenario")
    s.add_argument("run_dir")
    s.add_argument("kind", choices=FAULT_KINDS)
    s.add_argument("--target", help="printer id the fault applies to")
    s.set_defaults(fn=cmd_inject)

    s = sub.add_parser("run", help="run the scenario end to end, then verify")
    s.add_argument("run_dir")
    s.add_argument("--keygen", choices=("joint", "dealer"), help="default: the mode setup used")
    s.add_argument("--live", action="store_true", help="peers listen on loopback TCP sockets")
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("verify", help="verify a published board from public files only")
    s.add_argument("--run-dir", help="use <run-dir>/public for every input")
    s.add_argument("--board", help="public board directory")
    s.add_argument("--config", help="election config JSON")
    s.add_argument("--markoff", help="markoff counts JSON")
    s.add_argument("--digests", help="out-of-band commit digests file")
    s.add_argument("--receipts", help="voter receipts JSON")
    s.add_argument("--count", help="external count file JSON")
    s.add_argument("--registry", help="public key registry JSON (default: next to --config)")
    s.add_argument("--report", help="write the report here (.json plus .txt)")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("audit", help="audit-rate calculator")
    s.add_argument("-q", type=float, help="prior probability of fraud")
    s.add_argument("-F", type=int, default=100, help="number of altered ballots")
    s.add_argument("-N", type=int, help="population size")
    s.add_argument("-S", type=int, help="sample size")
    s.add_argument("-r", type=float, help="audit rate")
    s.add_argument("--confidence", type=float)
    s.add_argument("--tables", help="write every table as delimited text into this directory")
    s.add_argument("--delimiter", default=",")
    s.set_defaults(fn=cmd_audit)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (VVoteError, ValueError) as exc:
        print(f"vvote {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
