"""Improved key rates from the four Z(x)Z outcome frequencies.

Only the parity-dephased state matters for the key rate, and with real
off-diagonals it has the X-shaped form

    [[m00, 0,   0,   a  ],
     [0,   m11, b,   0  ],
     [0,   b,   m22, 0  ],
     [a,   0,   0,   m33]]

BB84 fixes ``a + b = 1/2 - e_p`` and leaves one free direction, over which
the coherence is minimized. Six-state statistics pin both ``a`` and ``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .coherence import binary_entropy, xlog2x
from .errors import BadIndex, Infeasible, NotPositive, OutOfRange
from .keyrate import KeyRateReport, error_rates
from .qstate import TwoQubitState, as_matrix

FEASIBILITY_SLACK = 1e-12
RATIO_RTOL = 1e-9
GRID_POINTS = 1001
GOLDEN_TOL = 1e-12

_INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class FineGrainedStats:
    """Z(x)Z outcome frequencies plus phase error (and ``e_y`` for six-state).

    ``e_p`` doubles as ``e_x`` in six-state mode.
    """

    m00: float
    m11: float
    m22: float
    m33: float
    e_p: float
    e_y: Optional[float] = None

    def __post_init__(self):
        m = self.diagonal
        if np.any(m < 0) or abs(m.sum() - 1) > 1e-9:
            raise OutOfRange(f"diagonal frequencies must form a distribution, got {m}")
        for name in ("e_p", "e_y"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise OutOfRange(f"{name} must lie in [0, 1], got {v}")

    @property
    def diagonal(self) -> np.ndarray:
        return np.array([self.m00, self.m11, self.m22, self.m33], dtype=float)

    @property
    def e_b(self) -> float:
        return self.m11 + self.m22

    @property
    def e_x(self) -> float:
        return self.e_p

    @classmethod
    def from_state(cls, rho) -> "FineGrainedStats":
        m = as_matrix(rho)
        d = np.clip(np.real(np.diag(m)), 0, None)
        d = d / d.sum()
        e_x, e_y, _ = error_rates(m)
        return cls(*map(float, d), e_p=e_x, e_y=e_y)

    @classmethod
    def from_alpha(cls, alpha: float, e_b: float, e_p: float, e_y: float | None = None):
        """Unbalanced diagonal with ``m00/m33 = m22/m11 = alpha/(1-alpha)``."""
        if not (0.0 <= alpha <= 1.0):
            raise OutOfRange(f"alpha must lie in [0, 1], got {alpha}")
        return cls(
            alpha * (1 - e_b),
            (1 - alpha) * e_b,
            alpha * e_b,
            (1 - alpha) * (1 - e_b),
            e_p=e_p,
            e_y=e_y,
        )


@dataclass(frozen=True)
class Problem1Solution:
    a_bar: float
    b_bar: float
    c_min: float
    method: str  # "closed_form" or "numeric"


def rho_of_ab(stats: FineGrainedStats, a: float, b: float) -> TwoQubitState:
    """The X-shaped state with diagonal ``stats`` and real off-diagonals ``a``, ``b``."""
    A, B = _bounds(stats)
    if abs(a) > A + FEASIBILITY_SLACK or abs(b) > B + FEASIBILITY_SLACK:
        raise NotPositive(
            f"positive semidefinite: need |a| <= {A:.6g} and |b| <= {B:.6g}, got a={a:.6g}, b={b:.6g}"
        )
    m = np.diag(stats.diagonal).astype(complex)
    m[0, 3] = m[3, 0] = a
    m[1, 2] = m[2, 1] = b
    return TwoQubitState(m)


def _bounds(stats):
    return math.sqrt(stats.m00 * stats.m33), math.sqrt(stats.m11 * stats.m22)


def _block_entropy(t, d, off):
    """Entropy contribution ``-sum lam log2 lam`` of [[(t+d)/2, off],[off, (t-d)/2]]."""
    r = np.sqrt((d / 2) ** 2 + np.square(off))
    return -(xlog2x(t / 2 + r) + xlog2x(np.clip(t / 2 - r, 0.0, None)))


def coherence_of_ab(stats: FineGrainedStats, a, b):
    """``C(rho(a, b))`` from the eigenvalues of the two 2x2 parity blocks.

    Vectorized over ``a`` and ``b``.
    """
    d = stats.diagonal
    h_diag = -np.sum(xlog2x(d))
    s = _block_entropy(d[0] + d[3], d[0] - d[3], a) + _block_entropy(d[1] + d[2], d[1] - d[2], b)
    return np.maximum(h_diag - s, 0.0)


def feasible_interval(stats: FineGrainedStats) -> tuple[float, float]:
    """Range of ``a`` satisfying both box constraints with ``b = 1/2 - e_p - a``.

    Raises:
        Infeasible: when no real ``(a, b)`` meets the constraints.
    """
    A, B = _bounds(stats)
    s = 0.5 - stats.e_p
    lo = max(-A, s - B)
    hi = min(A, s + B)
    if lo > hi + FEASIBILITY_SLACK:
        raise Infeasible(
            f"no state matches the statistics: |1/2 - e_p| = {abs(s):.6g} exceeds "
            f"sqrt(m00*m33) + sqrt(m11*m22) = {A + B:.6g}"
        )
    if lo > hi:
        lo = hi = (lo + hi) / 2
    return lo, hi


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = GOLDEN_TOL):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(200):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_PHI * (hi - lo)
            f2 = f(x2)
    x = (lo + hi) / 2
    return x, f(x)


def _ratio_alpha(stats: FineGrainedStats) -> Optional[float]:
    """Diagonal ratio ``alpha`` when the closed form applies, else None."""
    plus = stats.m00 + stats.m33
    minus = stats.m11 + stats.m22
    a_plus = stats.m00 / plus if plus > 0 else None
    a_minus = stats.m11 / minus if minus > 0 else None
    if a_plus is None:
        return a_minus
    if a_minus is None:
        return a_plus
    if math.isclose(a_plus, a_minus, rel_tol=RATIO_RTOL, abs_tol=1e-15) or math.isclose(
        a_plus, 1 - a_minus, rel_tol=RATIO_RTOL, abs_tol=1e-15
    ):
        return a_plus
    return None


def lemma2_closed_form(alpha: float, e_b: float, e_p: float) -> Problem1Solution:
    """Closed-form minimum for ratio-balanced diagonals.

    ``c_min = H(alpha) - H(1/2 + sqrt((alpha - 1/2)^2 + (1/2 - e_p)^2))`` at
    ``a = (1 - e_b)(1/2 - e_p)``, ``b = e_b (1/2 - e_p)``.
    """
    for name, v in (("alpha", alpha), ("e_b", e_b), ("e_p", e_p)):
        if not (0.0 <= v <= 1.0):
            raise OutOfRange(f"{name} must lie in [0, 1], got {v}")
    s = 0.5 - e_p
    g = 0.5 + math.sqrt((alpha - 0.5) ** 2 + s**2)
    if g > 1 + FEASIBILITY_SLACK:
        raise Infeasible(
            f"|1/2 - e_p| = {abs(s):.6g} exceeds sqrt(alpha(1-alpha)) = "
            f"{math.sqrt(alpha * (1 - alpha)):.6g}; no state matches"
        )
    c = binary_entropy(alpha) - binary_entropy(min(g, 1.0))
    return Problem1Solution((1 - e_b) * s, e_b * s, max(c, 0.0), "closed_form")


def _solve_numeric(stats: FineGrainedStats) -> Problem1Solution:
    lo, hi = feasible_interval(stats)
    s = 0.5 - stats.e_p
    if hi - lo <= 0:
        a = lo
        return Problem1Solution(a, s - a, float(coherence_of_ab(stats, a, s - a)), "numeric")

    def obj(a):
        return float(coherence_of_ab(stats, a, s - a))

    grid = np.linspace(lo, hi, GRID_POINTS)
    vals = coherence_of_ab(stats, grid, s - grid)
    k = int(np.argmin(vals))
    a_lo = grid[max(k - 1, 0)]
    a_hi = grid[min(k + 1, GRID_POINTS - 1)]
    a, c = golden_section(obj, a_lo, a_hi)
    if vals[k] < c:
        a, c = float(grid[k]), float(vals[k])
    return Problem1Solution(float(a), float(s - a), float(c), "numeric")


def solve_problem1(stats: FineGrainedStats, method: str = "auto") -> Problem1Solution:
    """Minimize ``C(rho(a, b))`` subject to ``a + b = 1/2 - e_p`` and the PSD box.

    Args:
        stats: measured diagonal and phase error.
        method: ``"auto"`` uses the closed form whenever the diagonal ratios
            allow it and the grid + golden-section search otherwise;
            ``"numeric"`` and ``"closed_form"`` force one route.

    Raises:
        Infeasible: the statistics match no quantum state.
    """
    if method not in ("auto", "numeric", "closed_form"):
        raise ValueError(f"unknown method {method!r}")
    feasible_interval(stats)
    alpha = _ratio_alpha(stats)
    if method == "closed_form" and alpha is None:
        raise ValueError("closed form needs m00/m33 = m11/m22 or m00/m33 = m22/m11")
    if method != "numeric" and alpha is not None:
        sol = lemma2_closed_form(alpha, stats.e_b, stats.e_p)
        # empty parity blocks carry no coherence and no off-diagonal weight
        A, B = _bounds(stats)
        a = float(np.clip(sol.a_bar, -A, A))
        b = float(np.clip(sol.b_bar, -B, B))
        return Problem1Solution(a, b, sol.c_min, "closed_form")
    return _solve_numeric(stats)


def bb84_opt_keyrate(stats: FineGrainedStats, method: str = "auto") -> KeyRateReport:
    """BB84 rate from fine-grained statistics: ``C(rho(a_bar, b_bar)) - H(e_b)``."""
    sol = solve_problem1(stats, method)
    e_b = min(max(stats.e_b, 0.0), 1.0)
    return KeyRateReport.from_terms(
        sol.c_min,
        binary_entropy(e_b),
        "bb84-opt",
        rho_of_ab(stats, sol.a_bar, sol.b_bar),
        solution=sol,
    )


def tau_matrix(stats: FineGrainedStats) -> np.ndarray:
    if stats.e_y is None:
        raise ValueError("six-state rates need e_y")
    m = np.diag(stats.diagonal).astype(complex)
    m[0, 3] = m[3, 0] = (1 - stats.e_x - stats.e_y) / 2
    m[1, 2] = m[2, 1] = (stats.e_y - stats.e_x) / 2
    return m


def sixstate_opt_keyrate(stats: FineGrainedStats) -> KeyRateReport:
    """Six-state rate from fine-grained statistics: ``C(tau) - H(e_z)``.

    Raises:
        NotPositive: ``tau`` is not a state, i.e. the statistics are inconsistent.
    """
    tau = tau_matrix(stats)
    A, B = _bounds(stats)
    a, b = tau[0, 3].real, tau[1, 2].real
    if abs(a) > A + FEASIBILITY_SLACK or abs(b) > B + FEASIBILITY_SLACK:
        raise NotPositive(
            "inconsistent statistics: tau is not positive semidefinite "
            f"(|a|={abs(a):.6g} vs {A:.6g}, |b|={abs(b):.6g} vs {B:.6g})"
        )
    c = float(coherence_of_ab(stats, a, b))
    return KeyRateReport.from_terms(
        c, binary_entropy(min(stats.e_b, 1.0)), "six-opt", TwoQubitState(tau)
    )


def swap_matrix(i: int, j: int, dim: int = 4) -> np.ndarray:
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise BadIndex(f"need distinct indices in 0..{dim - 1}, got ({i}, {j})")
    s = np.eye(dim, dtype=complex)
    s[[i, j]] = s[[j, i]]
    return s


def symmetrize(rho, i: int, j: int) -> TwoQubitState:
    """``1/2 S rho S + 1/2 rho`` with ``S`` swapping basis states ``i`` and ``j``."""
    s = swap_matrix(i, j)
    m = as_matrix(rho)
    return TwoQubitState((s @ m @ s + m) / 2)


def real_dephase_qubit(rho) -> np.ndarray:
    """Incoherent map that replaces the qubit coherence ``|c| e^{i phi}`` by ``|c| cos phi``."""
    m = as_matrix(rho)
    phi = np.angle(m[0, 1])
    u = np.diag([1.0, np.exp(2j * phi)])
    return (u @ m @ u.conj().T + m) / 2


def real_part_state(rho) -> TwoQubitState:
    """Parity-dephased state with the imaginary parts of its coherences removed."""
    src = as_matrix(rho)
    m = np.diag(np.real(np.diag(src))).astype(complex)
    m[0, 3] = m[3, 0] = src[0, 3].real
    m[1, 2] = m[2, 1] = src[1, 2].real
    return TwoQubitState(m)


__all__ = [
    "FineGrainedStats",
    "Problem1Solution",
    "rho_of_ab",
    "coherence_of_ab",
    "feasible_interval",
    "solve_problem1",
    "lemma2_closed_form",
    "bb84_opt_keyrate",
    "sixstate_opt_keyrate",
    "tau_matrix",
    "symmetrize",
    "real_dephase_qubit",
    "real_part_state",
]
