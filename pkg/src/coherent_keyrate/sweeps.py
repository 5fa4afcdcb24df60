"""Parameter sweeps behind the unbalanced-statistics and detector-mismatch curves.

Rows are computed by pure functions, optionally in a process pool, and always
returned in sweep-index order so parallel and serial runs give identical CSVs.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import EmptyData, Infeasible, InfeasibleAlpha, NotPositive
from .finegrained import FineGrainedStats, bb84_opt_keyrate, sixstate_opt_keyrate
from .keyrate import bb84_keyrate, sixstate_keyrate
from .mismatch import discard_keyrate_k1, koashi_keyrate_k2, mismatch_keyrate

ALPHA_COLUMNS = ("alpha", "K_bb84", "K_bb84_opt", "K_six", "K_six_opt")
MISMATCH_COLUMNS = ("x", "K", "K1", "K2")
SIG_DIGITS = 9


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    steps: int
    fixed: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError(f"a sweep needs at least 2 steps, got {self.steps}")
        if not self.start < self.stop:
            raise ValueError(f"sweep start {self.start} must be below stop {self.stop}")

    def points(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class SweepResult:
    columns: tuple
    rows: tuple

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        return format_csv(self.columns, self.rows)


def format_number(v: float) -> str:
    """Nine significant digits; scientific with a lowercase ``e`` when ``|v| >= 1e6`` or ``|v| < 1e-6``."""
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return repr(v)
    if v == 0.0:
        return "0"
    if abs(v) >= 1e6 or abs(v) < 1e-6:
        return np.format_float_scientific(v, precision=SIG_DIGITS - 1, unique=False, trim="-")
    return np.format_float_positional(v, precision=SIG_DIGITS, unique=False, fractional=False, trim="-")


def format_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(format_number(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> SweepResult:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyData("CSV has no header") from None
    rows = []
    for lineno, rec in enumerate(reader, 2):
        if not rec:
            continue
        if len(rec) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(rec)}")
        try:
            rows.append(tuple(float(v) for v in rec))
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field in {rec}") from None
    return SweepResult(tuple(header), tuple(rows))


def alpha_row(alpha: float, e: float) -> tuple:
    """Rates at one unbalance ``alpha`` with ``e_x = e_y = e_z = e``.

    Raises:
        InfeasibleAlpha: no state has these statistics.
    """
    try:
        stats = FineGrainedStats.from_alpha(alpha, e_b=e, e_p=e, e_y=e)
        opt6 = sixstate_opt_keyrate(stats).rate
        opt4 = bb84_opt_keyrate(stats).rate
    except (NotPositive, Infeasible) as exc:
        raise InfeasibleAlpha(f"alpha = {alpha} gives no valid state at e = {e}: {exc}") from None
    return (
        alpha,
        bb84_keyrate(e, e).rate,
        opt4,
        sixstate_keyrate(e, e, e).rate,
        opt6,
    )


def mismatch_row(x: float, e_p: float, e_b: float) -> tuple:
    return (
        x,
        mismatch_keyrate(x, e_p, e_b).rate,
        discard_keyrate_k1(x, e_p, e_b),
        koashi_keyrate_k2(x, e_p, e_b),
    )


def _evaluate(fn, points, jobs: int) -> tuple:
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(points) < 2:
        return tuple(fn(p) for p in points)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map yields in submission order regardless of completion order
        return tuple(pool.map(fn, points))


def sweep_alpha(e: float = 0.03, start: float = 0.38, stop: float = 0.62, steps: int = 25, jobs: int = 1):
    spec = SweepSpec("alpha", start, stop, steps, {"e": e})
    return SweepResult(ALPHA_COLUMNS, _evaluate(partial(alpha_row, e=e), spec.points(), jobs))


def sweep_mismatch(
    e_p: float = 0.05, e_b: float = 0.05, start: float = 0.01, stop: float = 0.5, steps: int = 50, jobs: int = 1
):
    spec = SweepSpec("x", start, stop, steps, {"e_p": e_p, "e_b": e_b})
    return SweepResult(MISMATCH_COLUMNS, _evaluate(partial(mismatch_row, e_p=e_p, e_b=e_b), spec.points(), jobs))
