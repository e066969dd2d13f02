"""Command-line interface.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 numerical or truncation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import exact, gibbs, related
from .distributions import BoundedUniformFamily, GeometricStream, JumpFamily, MemorylessFamily, TableFamily
from .errors import DomainError, NumericalError
from .harness import convergence_profile, monte_carlo
from .process import simulate
from .sets import EMPTY, ParticleConfig, parse_config
from .verify import run_all


class ConfigError(DomainError):
    pass


@dataclass
class RunConfig:
    command: str
    family: str = "memoryless"
    alpha: float | None = None
    m: int | None = None
    table: str | None = None
    n: int | None = None
    init: ParticleConfig | None = None
    base: ParticleConfig = EMPTY
    horizon: int | None = None
    samples: int | None = None
    seed: int = 0
    hmax: int | None = None
    tol: float = 1e-10
    lam: float | None = None
    eta: float | None = None
    t_end: float | None = None
    out: str | None = None
    extra_out: dict[str, str | None] = field(default_factory=dict)

    def validate(self) -> RunConfig:
        need_alpha = self.command in {"gibbs", "gibbs-sample", "converge"} or (
            self.command in {"simulate", "stationary"} and self.family == "memoryless"
        )
        if need_alpha and (self.alpha is None or not 0.0 < self.alpha < 1.0):
            raise ConfigError("--alpha in (0, 1) is required")
        if self.family not in {"memoryless", "bounded-uniform", "table"}:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.family == "bounded-uniform" and self.command in {"simulate", "stationary"}:
            if self.m is None or self.m < 1:
                raise ConfigError("--m (positive) is required for the bounded-uniform family")
        if self.family == "table" and self.command in {"simulate", "stationary"} and not self.table:
            raise ConfigError("--table is required for the table family")
        if self.init is not None and self.n is None:
            self.n = len(self.init)
        if self.init is not None and len(self.init) != self.n:
            raise ConfigError(f"--init has {len(self.init)} particles but --n is {self.n}")
        if self.command in {"simulate", "converge"} and self.init is None:
            raise ConfigError("--init is required")
        if self.command in {"simulate", "converge"} and (self.horizon is None or self.horizon < 1):
            raise ConfigError("--t must be a positive integer")
        if self.command in {"stationary", "gibbs", "gibbs-sample", "warrington", "asep"} and (self.n is None or self.n < 1):
            raise ConfigError("--n must be a positive integer")
        if self.command == "warrington" and (self.m is None or self.m < self.n):
            raise ConfigError("--m must be at least --n")
        if self.command == "gibbs-sample" and (self.samples is None or self.samples < 1):
            raise ConfigError("--samples must be positive")
        if self.command == "asep":
            if self.lam is None or self.eta is None or not 0 < self.lam < self.eta:
                raise ConfigError("need 0 < --lam < --eta")
            if self.samples is not None and (self.samples < 1 or self.t_end is None or self.t_end < 0):
                raise ConfigError("simulation needs --samples >= 1 and --t-end >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if self.hmax is not None and self.hmax < 1:
            raise ConfigError("--hmax must be positive")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        return self

    def family_obj(self) -> JumpFamily:
        if self.family == "memoryless":
            return MemorylessFamily(self.alpha)
        if self.family == "bounded-uniform":
            return BoundedUniformFamily(self.m)
        return TableFamily.from_json(Path(self.table))


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _default_hmax(cfg: RunConfig) -> int:
    """Smallest h with ``n * alpha**(h - n)`` below ``tol``."""
    if cfg.hmax is not None:
        return cfg.hmax
    if cfg.family == "bounded-uniform":
        return cfg.m
    if cfg.family == "table":
        raise ConfigError("--hmax is required for table families")
    n = cfg.n
    return n + max(1, math.ceil(math.log(cfg.tol / n) / math.log(cfg.alpha)))


def _empirical_csv(emp) -> str:
    probs = emp.probabilities()
    return exact.write_distribution_csv(list(probs), list(probs.values()))


def cmd_simulate(cfg: RunConfig) -> int:
    traj = simulate(cfg.init, cfg.family_obj(), cfg.horizon, GeometricStream(cfg.seed))
    _emit(traj.to_jsonl(), cfg.out)
    return 0


def cmd_stationary(cfg: RunConfig) -> int:
    space = exact.enumerate_states(cfg.n, _default_hmax(cfg))
    matrix = exact.build_matrix(cfg.family_obj(), space, tol=cfg.tol)
    pi = exact.stationary_distribution(matrix, tol=cfg.tol)
    _emit(exact.write_distribution_csv(space, pi), cfg.out)
    if cfg.extra_out.get("matrix"):
        Path(cfg.extra_out["matrix"]).write_text(matrix.to_json())
    return 0


def cmd_gibbs(cfg: RunConfig) -> int:
    space = exact.enumerate_states(cfg.n, _default_hmax(cfg))
    _emit(exact.write_distribution_csv(space, gibbs.gibbs_vector(space, cfg.alpha)), cfg.out)
    stats = gibbs.equilibrium_stats(cfg.n, cfg.alpha).to_json() + "\n"
    if cfg.extra_out.get("stats"):
        Path(cfg.extra_out["stats"]).write_text(stats)
    elif cfg.out:
        sys.stdout.write(stats)
    return 0


def cmd_gibbs_sample(cfg: RunConfig) -> int:
    def sampler(size, stream):
        return gibbs.sample_gibbs_batch(cfg.base, cfg.n, cfg.alpha, size, stream)

    emp = monte_carlo(sampler, cfg.samples, cfg.seed)
    _emit(_empirical_csv(emp), cfg.out)
    return 0


def cmd_converge(cfg: RunConfig) -> int:
    space = exact.enumerate_states(len(cfg.init), _default_hmax(cfg))
    profile = convergence_profile(cfg.init, cfg.alpha, cfg.horizon, space, tol=max(cfg.tol, 1e-9))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "tv"])
    for t, tv in profile:
        w.writerow([t, repr(tv)])
    _emit(buf.getvalue(), cfg.out)
    return 0


def cmd_warrington(cfg: RunConfig) -> int:
    space = exact.enumerate_states(cfg.n, cfg.m)
    probs = [related.warrington_pmf(cfg.n, cfg.m, s) for s in space.states]
    _emit(exact.write_distribution_csv(space, probs), cfg.out)
    return 0


def cmd_asep(cfg: RunConfig) -> int:
    params = related.AsepParams(cfg.n, cfg.lam, cfg.eta)
    if cfg.hmax is None:
        cfg.hmax = cfg.n + max(1, math.ceil(math.log(cfg.tol / cfg.n) / math.log(params.ratio)))
    space, pi = related.asep_stationary_exact(params, cfg.hmax, tol=cfg.tol)
    _emit(exact.write_distribution_csv(space, pi), cfg.out)
    if cfg.samples is not None:
        X0 = cfg.init if cfg.init is not None else ParticleConfig(range(cfg.n))

        def sampler(size, stream):
            return related.asep_simulate_batch(params, X0, cfg.t_end, size, stream)[0]

        emp = monte_carlo(sampler, cfg.samples, cfg.seed, chunk=20_000)
        _emit(_empirical_csv(emp), cfg.extra_out.get("sim"))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    lines: list[str] = []
    ok = run_all(lines.append)
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0 if ok else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "stationary": cmd_stationary,
    "gibbs": cmd_gibbs,
    "gibbs-sample": cmd_gibbs_sample,
    "converge": cmd_converge,
    "warrington": cmd_warrington,
    "asep": cmd_asep,
    "verify": cmd_verify,
}


def _state(text: str) -> ParticleConfig:
    try:
        return parse_config(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--hmax", type=int, default=None, help="exclusive height bound of the truncation")
    common.add_argument("--tol", type=float, default=1e-10, help="truncation / solver tolerance")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", default="memoryless", choices=["memoryless", "bounded-uniform", "table"])
    fam.add_argument("--alpha", type=float)
    fam.add_argument("--m", type=int)
    fam.add_argument("--table", help="JSON table family file")

    parser = argparse.ArgumentParser(prog="jep", description="Exclusion process with jumps from zero: simulation and exact analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, fam], help="simulate a trajectory (JSONL)")
    p.add_argument("--n", type=int)
    p.add_argument("--init", type=_state, required=True)
    p.add_argument("--t", dest="horizon", type=int, required=True)

    p = sub.add_parser("stationary", parents=[common, fam], help="exact stationary law (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--matrix-out", dest="matrix_out")

    p = sub.add_parser("gibbs", parents=[common], help="Gibbs law on a truncation (CSV) and stats (JSON)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--stats")

    p = sub.add_parser("gibbs-sample", parents=[common], help="empirical law of the exact sampler (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--base", type=_state, default=EMPTY)

    p = sub.add_parser("converge", parents=[common], help="exact TV-to-Gibbs profile (CSV)")
    p.add_argument("--init", type=_state, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t", dest="horizon", type=int, required=True)

    p = sub.add_parser("warrington", parents=[common], help="bounded uniform equilibrium (CSV)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("asep", parents=[common], help="reflecting ASEP equilibrium (CSV), optional simulation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--init", type=_state)
    p.add_argument("--sim-out", dest="sim_out")

    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    known = {f for f in RunConfig.__dataclass_fields__ if f != "extra_out"}
    values = {k: v for k, v in vars(args).items() if k in known and v is not None}
    extra = {"matrix": getattr(args, "matrix_out", None), "stats": getattr(args, "stats", None),
             "sim": getattr(args, "sim_out", None)}
    return RunConfig(extra_out=extra, **values).validate()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (DomainError, FileNotFoundError, ValueError) as exc:
        print(f"jep: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"jep: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
