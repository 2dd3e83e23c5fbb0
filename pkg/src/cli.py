"""`eis` command line: build, raise, pullback, check-integrality, verify-siegel, verify-archimedean, cross-check."""
import json
import logging
import random
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import click
from sqlalchemy.exc import SQLAlchemyError

from . import config
from .characters import character_from_descriptor
from .eisenstein import (
    EisensteinSpec,
    NormalizedExpansion,
    build_expansion,
    default_index_bound,
    direct_series_numeric,
    eval_expansion_numeric,
    integrality_report,
    truncation_tail_bound,
)
from .errors import BudgetExceeded, EisError, PreconditionError
from .nearholo import NHExpansion, eisenstein_at_minus_m0, nh_integrality_report, to_two_pi_y_variable
from .pullback import archimedean_grid, cusp_support_check, restrict_diagonal
from .quadforms import HalfIntegralMatrix
from .siegelseries import compare_oracles

logger = logging.getLogger(__name__)

COMMANDS = (
    "build",
    "raise",
    "pullback",
    "check-integrality",
    "verify-siegel",
    "verify-archimedean",
    "cross-check",
)

ARCHIMEDEAN_TOLERANCE = 1e-6
DEFAULT_BOUND = 8


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int = 1
    level: int = 4
    k: int = 6
    chi: str = "trivial"
    m0: int = 0
    bound: Optional[int] = None  # None: DEFAULT_BOUND, or derived from Im Z by cross-check
    height: int = 3
    radius: int = 4
    cap: int = config.BRUTE_FORCE_CAP
    primes: tuple[int, ...] = ()
    dets: tuple[int, ...] = ()
    random_cases: int = 0
    point: Optional[str] = None
    tolerance: float = 1e-4
    in_path: Optional[str] = None
    out: Optional[str] = None
    workers: int = config.WORKERS
    seed: int = config.SEED
    verbose: bool = False
    record: bool = config.RECORD_RUNS

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise PreconditionError(f"unknown command {self.command!r}")
        if (self.bound is not None and self.bound < 0) or self.height < 1 or self.radius < 1:
            raise PreconditionError("bounds must be nonnegative and the coset height positive")
        if self.workers < 1:
            raise PreconditionError("workers must be at least 1")
        if self.command in ("check-integrality", "verify-siegel") and not self.primes:
            raise PreconditionError(f"{self.command} needs at least one prime")

    def spec(self) -> EisensteinSpec:
        return EisensteinSpec(self.n, self.k, self.level, character_from_descriptor(self.chi, self.level), self.m0)

    @property
    def index_bound(self) -> int:
        return self.bound if self.bound is not None else DEFAULT_BOUND

    def parameters(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in ("record", "verbose")}


@dataclass
class Outcome:
    passed: bool
    artifact: dict
    headers: tuple[str, ...] = ()
    rows: list[tuple] = field(default_factory=list)
    records: list[tuple[str, str, bool, dict]] = field(default_factory=list)  # kind, key, passed, payload


# ---------- helpers ----------


def parse_point(text: str) -> list[list[complex]]:
    """'2i,0;0,2i' -> [[2j, 0], [0, 2j]]."""
    try:
        return [[complex(entry.strip().replace("i", "j")) for entry in row.split(",")] for row in text.split(";")]
    except ValueError as exc:
        raise PreconditionError(f"cannot parse point {text!r}: {exc}") from exc


def format_table(headers, rows) -> str:
    cells = [tuple(str(c) for c in headers)] + [tuple(str(c) for c in row) for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines)


def _load_expansion(path: str):
    data = json.loads(Path(path).read_text())
    if "normalization" in data:
        return NormalizedExpansion.from_json(data)
    return NHExpansion.from_json(data)


def _random_binary(rng: random.Random, p: int, count: int) -> list[HalfIntegralMatrix]:
    out = []
    while len(out) < count:
        a, b, c = rng.randint(1, 9), rng.randint(-6, 6), rng.randint(1, 9)
        if b == 0 or 4 * a * c - b * b <= 0:
            continue
        h = HalfIntegralMatrix.binary(a, b, c)
        det = h.det_two_level_h()
        v = 0
        while det % p == 0:
            det //= p
            v += 1
        if v <= 3:
            out.append(h)
    return out


# ---------- commands ----------


def _build(cfg: RunConfig) -> Outcome:
    exp = build_expansion(cfg.spec(), cfg.index_bound, cfg.workers)
    rows = [(str(h), repr(c.value)) for h, c in exp.coefficients.items()]
    return Outcome(True, exp.to_json(), ("h", "a(h)"), rows)


def _raise(cfg: RunConfig) -> Outcome:
    nh = eisenstein_at_minus_m0(cfg.spec(), cfg.index_bound, cfg.primes, cfg.workers)
    rows, records, passed = [], [], True
    for p in cfg.primes:
        report = nh_integrality_report(nh, p)
        ok = report.passed or not report.within_hypotheses
        passed = passed and ok
        rows.append((p, report.label, "PASS" if report.passed else "FAIL"))
        records.append(("integrality", f"p={p}", ok, report.to_json()))
    artifact = nh.to_json()
    artifact["theorem_variable"] = to_two_pi_y_variable(nh).to_json()
    return Outcome(passed, artifact, ("p", "label", "verdict"), rows, records)


def _pullback(cfg: RunConfig) -> Outcome:
    spec = cfg.spec()
    if spec.m0:
        source = eisenstein_at_minus_m0(spec, cfg.index_bound, cfg.primes, cfg.workers)
    else:
        source = build_expansion(spec, cfg.index_bound, cfg.workers)
    pb = restrict_diagonal(source, keep_breakdown=cfg.verbose)
    verdict = cusp_support_check(pb)
    artifact = pb.to_json(cuspidal=verdict.passed)
    artifact["verdict"] = verdict.to_json()
    rows = [(a, b, len(poly.terms)) for (a, b), poly in sorted(pb.coefficients.items())]
    record = ("cusp", f"N={spec.level},k={spec.k},m0={spec.m0}", verdict.passed, verdict.to_json())
    return Outcome(verdict.passed, artifact, ("a", "b", "terms"), rows, [record])


def _check_integrality(cfg: RunConfig) -> Outcome:
    if cfg.in_path:
        exp = _load_expansion(cfg.in_path)
    elif cfg.m0:
        exp = eisenstein_at_minus_m0(cfg.spec(), cfg.index_bound, cfg.primes, cfg.workers)
    else:
        exp = build_expansion(cfg.spec(), cfg.index_bound, cfg.workers)
    rows, records, reports, passed = [], [], [], True
    for p in cfg.primes:
        if isinstance(exp, NHExpansion):
            report = nh_integrality_report(exp, p)
        else:
            report = integrality_report(exp, p)
        ok = report.passed or not report.within_hypotheses
        passed = passed and ok
        failures = sum(1 for v in report.verdicts if v.passed is False)
        unsupported = sum(1 for v in report.verdicts if v.passed is None)
        rows.append((p, report.label, "PASS" if report.passed else "FAIL", failures, unsupported))
        records.append(("integrality", f"p={p}", ok, report.to_json()))
        reports.append(report.to_json())
    return Outcome(passed, {"reports": reports}, ("p", "label", "verdict", "failures", "unsupported"), rows, records)


def _verify_siegel(cfg: RunConfig) -> Outcome:
    chi = character_from_descriptor(cfg.chi, cfg.level)
    rng = random.Random(cfg.seed)
    rows, records, results, passed = [], [], [], True
    for p in cfg.primes:
        cases = [HalfIntegralMatrix.diagonal(1, d) for d in cfg.dets]
        cases += _random_binary(rng, p, cfg.random_cases)
        for h in cases:
            record = compare_oracles(h, p, cfg.k, chi, cfg.n, cfg.cap)
            passed = passed and record["equal"]
            results.append(record)
            rows.append((str(h), p, record["equal"], "+".join(record["f_poly"]), record["pkey_margin"]))
            records.append(("siegel", f"{h}@{p}", record["equal"], record))
    return Outcome(passed, {"rows": results}, ("h", "p", "equal", "f_poly", "margin"), rows, records)


def _verify_archimedean(cfg: RunConfig) -> Outcome:
    reports = archimedean_grid()
    rows, records, passed = [], [], True
    for r in reports:
        ok = abs(r.value) < ARCHIMEDEAN_TOLERANCE and r.residual < ARCHIMEDEAN_TOLERANCE
        passed = passed and ok
        rows.append((r.ell, r.m, r.z, f"{float(abs(r.value)):.2e}", f"{r.residual:.2e}"))
        records.append(("archimedean", f"I({r.ell},{r.m})@{r.z}", ok, r.to_json()))
    return Outcome(passed, {"grid": [r.to_json() for r in reports]}, ("l", "m", "z", "|I|", "residual"), rows,
                   records)


def _cross_check(cfg: RunConfig) -> Outcome:
    spec = cfg.spec()
    z = parse_point(cfg.point or "2i,0;0,2i")
    direct = direct_series_numeric(spec, z, cfg.height, cfg.radius)
    bound = cfg.bound if cfg.bound is not None else default_index_bound(spec, z)
    exp = build_expansion(spec, bound, cfg.workers)
    fourier = eval_expansion_numeric(exp, z)
    truncation = truncation_tail_bound(exp, z) if exp.coefficients else None
    rel = float(abs(direct.value - fourier) / abs(direct.value)) if direct.value else float("inf")
    passed = rel < cfg.tolerance
    artifact = {
        "point": cfg.point,
        "bound": bound,
        "direct": [float(direct.value.real), float(direct.value.imag)],
        "fourier": [float(fourier.real), float(fourier.imag)],
        "relative_error": rel,
        "tail_estimate": direct.tail_estimate,
        "truncation": truncation.to_json() if truncation else None,
        "warning": direct.warning,
    }
    tail = f"{truncation.relative:.2e}" if truncation else "-"
    row = (cfg.point, bound, f"{complex(direct.value):.8g}", f"{complex(fourier):.8g}", f"{rel:.2e}", tail)
    record = ("cross-check", f"N={spec.level},k={spec.k},Z={cfg.point}", passed, artifact)
    return Outcome(passed, artifact, ("Z", "B", "direct", "fourier", "rel. error", "tail bound"), [row], [record])


DISPATCH: dict[str, Callable[[RunConfig], Outcome]] = {
    "build": _build,
    "raise": _raise,
    "pullback": _pullback,
    "check-integrality": _check_integrality,
    "verify-siegel": _verify_siegel,
    "verify-archimedean": _verify_archimedean,
    "cross-check": _cross_check,
}


# ---------- run ledger ----------


def _record(cfg: RunConfig, status: int, records: list[tuple[str, str, bool, dict]]) -> None:
    from .db import SessionLocal, init_db
    from .models import Run, VerificationRecord

    try:
        init_db()
        with SessionLocal() as session:
            run = Run(command=cfg.command, parameters=cfg.parameters(), seed=cfg.seed, exit_status=status)
            seen = set()
            for kind, key, passed, payload in records:
                if (kind, key) in seen:
                    continue
                seen.add((kind, key))
                run.records.append(VerificationRecord(kind=kind, key=key, passed=bool(passed), payload=payload))
            session.add(run)
            session.commit()
    except SQLAlchemyError as exc:
        logger.warning("run ledger unavailable: %s", exc)


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns (exit status, artifacts)."""
    try:
        cfg.validate()
        outcome = DISPATCH[cfg.command](cfg)
    except (PreconditionError, BudgetExceeded) as exc:
        logger.error("%s", exc)
        click.echo(f"error: {exc}", err=True)
        artifacts = {"command": cfg.command, "error": str(exc), "kind": type(exc).__name__}
        if cfg.record:
            _record(cfg, 2, [])
        return 2, artifacts
    except EisError as exc:
        logger.error("%s failed: %s", cfg.command, exc)
        artifacts = {"command": cfg.command, "error": str(exc), "kind": type(exc).__name__, "passed": False}
        if cfg.record:
            _record(cfg, 1, [("failure", cfg.command, False, artifacts)])
        return 1, artifacts

    status = 0 if outcome.passed else 1
    artifacts = {"command": cfg.command, "passed": outcome.passed, "result": outcome.artifact}
    if outcome.headers:
        click.echo(format_table(outcome.headers, outcome.rows))
    logger.info("%s: %s", cfg.command, "PASS" if outcome.passed else "FAIL")
    if cfg.out:
        stamped = dict(artifacts, timestamp=datetime.now(timezone.utc).isoformat())
        Path(cfg.out).write_text(json.dumps(stamped, indent=2, sort_keys=True, default=str))
    if cfg.record:
        _record(cfg, status, outcome.records)
    return status, artifacts


def configure_logging(level: str) -> None:
    root = logging.getLogger("src")
    for old in [h for h in root.handlers if getattr(h, "_eis", False)]:
        root.removeHandler(old)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("[eis] %(levelname)s %(name)s: %(message)s"))
    handler._eis = True
    root.addHandler(handler)
    root.setLevel(level.upper())


# ---------- click surface ----------


def _int_list(ctx, param, value) -> tuple[int, ...]:
    if not value:
        return ()
    try:
        return tuple(int(x) for x in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected a comma-separated list of integers, got {value!r}")


def spec_options(fn):
    for decorator in reversed([
        click.option("--n", "n", type=int, default=1, show_default=True, help="Half-degree."),
        click.option("--N", "level", type=int, default=4, show_default=True, help="Level."),
        click.option("--k", "k", type=int, default=6, show_default=True, help="Weight."),
        click.option("--chi", default="trivial", show_default=True, help="trivial, odd4, kron:D or angles:a,b"),
        click.option("--m0", type=int, default=0, show_default=True),
        click.option("--bound", type=int, default=None,
                     help=f"Bound on tr(N h) [default: {DEFAULT_BOUND}; cross-check derives it from Im Z]."),
    ]):
        fn = decorator(fn)
    return fn


def common_options(fn):
    for decorator in reversed([
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON artifact path."),
        click.option("--workers", type=int, default=config.WORKERS, show_default=True),
        click.option("--seed", type=int, default=config.SEED, show_default=True),
        click.option("--verbose", is_flag=True, default=False),
        click.option("--no-record", is_flag=True, default=False, help="Skip the run ledger."),
    ]):
        fn = decorator(fn)
    return fn


def _finish(command: str, **kwargs) -> None:
    no_record = kwargs.pop("no_record", False)
    cfg = RunConfig(command=command, record=config.RECORD_RUNS and not no_record, **kwargs)
    status, _ = run(cfg)
    raise SystemExit(status)


@click.group()
@click.option("--log-level", default=config.LOG_LEVEL, show_default=True)
def eis(log_level):
    """Siegel Eisenstein series: exact expansions and their verification."""
    configure_logging(log_level)


@eis.command("build")
@spec_options
@common_options
def build_cmd(**kwargs):
    _finish("build", **kwargs)


@eis.command("raise")
@spec_options
@click.option("--primes", callback=_int_list, default="", help="Comma-separated primes to check.")
@common_options
def raise_cmd(**kwargs):
    _finish("raise", **kwargs)


@eis.command("pullback")
@spec_options
@click.option("--primes", callback=_int_list, default="")
@common_options
def pullback_cmd(**kwargs):
    _finish("pullback", **kwargs)


@eis.command("check-integrality")
@spec_options
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--p", "primes", callback=_int_list, required=True, help="Prime or comma-separated primes.")
@common_options
def check_integrality_cmd(**kwargs):
    _finish("check-integrality", **kwargs)


@eis.command("verify-siegel")
@click.option("--n", "n", type=int, default=1, show_default=True)
@click.option("--N", "level", type=int, default=4, show_default=True)
@click.option("--k", "k", type=int, default=6, show_default=True)
@click.option("--chi", default="trivial", show_default=True)
@click.option("--p", "primes", callback=_int_list, required=True)
@click.option("--dets", callback=_int_list, default="1", show_default=True, help="d for h = diag(1, d).")
@click.option("--random", "random_cases", type=int, default=0, show_default=True)
@click.option("--cap", type=int, default=config.BRUTE_FORCE_CAP, show_default=True)
@common_options
def verify_siegel_cmd(**kwargs):
    _finish("verify-siegel", **kwargs)


@eis.command("verify-archimedean")
@common_options
def verify_archimedean_cmd(**kwargs):
    _finish("verify-archimedean", **kwargs)


@eis.command("cross-check")
@spec_options
@click.option("--point", default="2i,0;0,2i", show_default=True, help="Rows separated by ';'.")
@click.option("--height", type=int, default=3, show_default=True)
@click.option("--radius", type=int, default=4, show_default=True)
@click.option("--tolerance", type=float, default=1e-4, show_default=True)
@common_options
def cross_check_cmd(**kwargs):
    _finish("cross-check", **kwargs)


if __name__ == "__main__":
    eis()
