"""Command-line entry point.

    riskconf critical-values --n 64 --m inf --alpha 0.05,0.1 --reps 5000 --seed 1 --out table.json
    riskconf confset-nested  --in x.txt --alpha 0.1 --table table.json
    riskconf confset-general --in x.txt --family fam.json --alpha 0.1
    riskconf simulate --experiment coverage-nested --n 64 --reps 2000 --seed 7

Exit codes: 0 success, 1 coupling-order found a violation, 2 usage or input
error, 3 numeric failure, 4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import experiments, general, io, multiscale
from .errors import InvalidArgument, NumericFailure, ResourceLimit
from .seqmodel import CandidateFamily, VarianceModel

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4

EXPERIMENTS = ("coverage-nested", "oracle-nested", "coverage-general", "coupling-order", "toy-rates")
DEFAULT_TOY_SCALES = (8.0, 16.0, 32.0, 64.0, 128.0)


def parse_m(text: str) -> float:
    if text.strip().lower() == "inf":
        return math.inf
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"m must be a positive integer or 'inf', got {text!r}") from None
    if m < 1:
        raise argparse.ArgumentTypeError("m must be >= 1")
    return float(m)


def parse_alphas(text: str) -> list[float]:
    out = []
    for tok in text.split(","):
        try:
            a = float(tok)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad alpha {tok!r}") from None
        if not 0.0 < a < 1.0:
            raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {a}")
        out.append(a)
    return out


@dataclass
class RunConfig:
    subcommand: str
    alphas: list[float] = field(default_factory=list)
    n: int | None = None
    m: float = math.inf
    reps: int = 2000
    seed: int = 0
    threads: int = 1
    c_const: float = multiscale.DEFAULT_C_CONST
    experiment: str | None = None
    inp: Path | None = None
    family: Path | None = None
    out: Path | None = None
    table: Path | None = None
    sigma2: float = 1.0
    signal: str = "lf"
    kappa_reps: int = 2000
    family_size: int = 8

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        alphas = [a for group in (ns.alpha or []) for a in group]
        path = lambda v: Path(v) if v else None  # noqa: E731
        return cls(ns.command, alphas, ns.n, ns.m, ns.reps, ns.seed, ns.threads, ns.c_const,
                   ns.experiment, path(ns.inp), path(ns.family), path(ns.out), path(ns.table),
                   ns.sigma2, ns.signal, ns.kappa_reps, ns.family_size)

    def alpha(self) -> float:
        if len(self.alphas) > 1:
            raise InvalidArgument("this command takes a single --alpha")
        return self.alphas[0] if self.alphas else 0.1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=parse_alphas, action="append",
                        help="level(s); repeat the flag or give a comma list")
    common.add_argument("--n", type=int, help="dimension (grid size for toy-rates)")
    common.add_argument("--m", type=parse_m, default=math.inf, help="variance-estimate degrees of freedom or 'inf'")
    common.add_argument("--reps", type=int, default=2000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--c-const", type=float, default=multiscale.DEFAULT_C_CONST)
    common.add_argument("--in", dest="inp", help="observation vector, one float per line")
    common.add_argument("--family", help="candidate family JSON")
    common.add_argument("--out", help="output path (stdout when omitted, except critical-values)")
    common.add_argument("--table", help="critical-value table JSON; computed and saved when missing")
    common.add_argument("--sigma2", type=float, default=1.0,
                        help="known noise variance, or the estimate when --m is finite")
    common.add_argument("--signal", default="lf", choices=experiments.SIGNAL_PRESETS)
    common.add_argument("--kappa-reps", type=int, default=2000,
                        help="replicates for critical values computed on the fly")
    common.add_argument("--family-size", type=int, default=8, help="random family size for coverage-general")
    common.add_argument("--experiment", choices=EXPERIMENTS)

    p = argparse.ArgumentParser(prog="riskconf", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("critical-values", parents=[common], help="simulate a least-favorable critical-value table")
    sub.add_parser("confset-nested", parents=[common], help="region for the optimal nested model")
    sub.add_parser("confset-general", parents=[common], help="region for the optimal member of a family")
    sub.add_parser("simulate", parents=[common], help="run a named validation experiment, CSV out")
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8", newline="\n")


def _table_for(cfg: RunConfig, n: int, alphas: list[float], reps: int) -> multiscale.CriticalValueTable:
    """Load ``cfg.table`` if it exists, else simulate (and save when a path is given)."""
    if cfg.table is not None and cfg.table.exists():
        return multiscale.CriticalValueTable.load(cfg.table)
    table = multiscale.critical_values(n, VarianceModel(cfg.m), alphas, reps, cfg.seed,
                                       cfg.c_const, threads=cfg.threads)
    if cfg.table is not None:
        table.save(cfg.table)
    return table


def cmd_critical_values(cfg: RunConfig) -> int:
    if cfg.out is None:
        raise InvalidArgument("critical-values requires --out")
    if cfg.n is None:
        raise InvalidArgument("critical-values requires --n")
    alphas = cfg.alphas or [0.05, 0.1]
    table = multiscale.critical_values(cfg.n, VarianceModel(cfg.m), alphas, cfg.reps, cfg.seed,
                                       cfg.c_const, threads=cfg.threads)
    table.save(cfg.out)
    return EXIT_OK


def _require_input(cfg: RunConfig):
    if cfg.inp is None:
        raise InvalidArgument("--in is required")
    return io.read_vector(cfg.inp)


def cmd_confset_nested(cfg: RunConfig) -> int:
    x = _require_input(cfg)
    alpha = cfg.alpha()
    table = _table_for(cfg, x.size, [alpha], cfg.kappa_reps)
    region = multiscale.nested_region(x, cfg.sigma2, table, alpha, m=cfg.m)
    _emit(io.dumps(region.to_dict()), cfg.out)
    return EXIT_OK


def cmd_confset_general(cfg: RunConfig) -> int:
    x = _require_input(cfg)
    if cfg.family is None:
        family = CandidateFamily.nested(x.size)
    else:
        family = io.read_family(cfg.family)
    if family.n != x.size:
        raise InvalidArgument(f"family n={family.n} does not match the {x.size} observations")
    alpha = cfg.alpha()
    if cfg.m == math.inf:
        region = general.general_region(x, cfg.sigma2, family, alpha)
    else:
        region = general.general_region_unknown_sigma(x, cfg.sigma2, cfg.m, family, alpha)
    _emit(io.dumps(region.to_dict()), cfg.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.experiment is None:
        raise InvalidArgument(f"--experiment is required; choose from {EXPERIMENTS}")
    alpha = cfg.alpha()
    status = EXIT_OK
    if cfg.experiment == "toy-rates":
        N = cfg.n or 1025
        rows = experiments.toy_rates(DEFAULT_TOY_SCALES, N, cfg.reps, alpha, cfg.seed,
                                     cfg.kappa_reps, threads=cfg.threads)
    else:
        n = cfg.n or 64
        if cfg.experiment == "coupling-order":
            presets = ("lf", "zero", "spike")
            rows = experiments.coupling_order(presets, n, cfg.m, cfg.reps, cfg.seed, threads=cfg.threads)
            if any(r["violations"] for r in rows):
                status = EXIT_VIOLATION
        elif cfg.experiment == "coverage-general":
            family = io.read_family(cfg.family) if cfg.family else \
                experiments.random_family(n, cfg.family_size, cfg.seed)
            if family.n != n:
                raise InvalidArgument(f"family n={family.n} does not match --n {n}")
            rows = experiments.coverage_general(experiments.make_signal(cfg.signal, n), family, alpha,
                                                cfg.reps, cfg.seed, cfg.m, threads=cfg.threads)
        else:
            table = _table_for(cfg, n, [alpha], cfg.kappa_reps)
            spec = experiments.make_signal(cfg.signal, n)
            run = experiments.coverage_nested if cfg.experiment == "coverage-nested" else experiments.oracle_nested
            rows = run(spec, VarianceModel(cfg.m), table, alpha, cfg.reps, cfg.seed, threads=cfg.threads)
    _emit(experiments.rows_to_csv(rows), cfg.out)
    return status


COMMANDS = {
    "critical-values": cmd_critical_values,
    "confset-nested": cmd_confset_nested,
    "confset-general": cmd_confset_general,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig.from_args(ns)
    try:
        if cfg.reps < 1 or cfg.threads < 1:
            raise InvalidArgument("--reps and --threads must be positive")
        return COMMANDS[cfg.subcommand](cfg)
    except InvalidArgument as exc:
        print(f"riskconf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"riskconf: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ResourceLimit as exc:
        print(f"riskconf: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
