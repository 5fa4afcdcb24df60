"""Entanglement-side bounds on the coherence key rate.

* hashing bound ``S(Tr_A Phi(rho)) - S(Phi(rho))`` caps the per-state rate,
* the Devetak-Winter privacy term ``D(rho || Delta_{Z_A}(rho))``,
* ``K^m``: the per-state rate maximized over local measurement bases,
  found by a multi-start Nelder-Mead search (a lower bound, not certified),
* two-qubit entanglement of formation via Wootters' concurrence, which
  upper-bounds ``K^m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .coherence import binary_entropy, quantum_relative_entropy, von_neumann_entropy
from .qstate import (
    PAULI_Y,
    as_matrix,
    dephase_A,
    hermitian_eigensystem,
    partial_dephase_matrix,
    partial_trace_A,
)

EIGEN_FLOOR = 1e-14


def hashing_bound(rho) -> float:
    phi = partial_dephase_matrix(as_matrix(rho))
    return von_neumann_entropy(partial_trace_A(phi)) - von_neumann_entropy(phi)


def devetak_winter_privacy(rho) -> float:
    """``S(Z_A | E)`` written as ``D(rho || Delta_{Z_A}(rho))``."""
    m = as_matrix(rho)
    return quantum_relative_entropy(m, dephase_A(m))


def concurrence(rho) -> float:
    """Wootters concurrence.

    With ``rho = W W^dagger`` the spin-flip values are the singular values of
    ``W^T (Y (x) Y) W``; this avoids square roots of rounding-level
    eigenvalues, which would otherwise shift pure-state results by ~1e-8.
    """
    lam, vec = hermitian_eigensystem(as_matrix(rho))
    keep = lam > EIGEN_FLOOR
    w = vec[:, keep] * np.sqrt(lam[keep])
    sv = np.linalg.svd(w.T @ np.kron(PAULI_Y, PAULI_Y) @ w, compute_uv=False)
    sv = np.concatenate([np.sort(sv)[::-1], np.zeros(4)])[:4]
    return float(max(0.0, sv[0] - sv[1] - sv[2] - sv[3]))


def entanglement_of_formation(rho) -> float:
    c = min(concurrence(rho), 1.0)
    return binary_entropy(0.5 + 0.5 * math.sqrt(1 - c * c))


@dataclass(frozen=True)
class BasisSearchConfig:
    """Settings for the local-basis search behind ``K^m``.

    Each local basis is a Bloch direction, reached by ``Ry(t1) Rz(t2)``; the
    third Euler angle only rephases basis vectors and leaves the rate
    unchanged, so it is not searched.
    """

    restarts: int = 12
    max_iterations: int = 2000
    tolerance: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def _rot(t1, t2):
    """``Ry(t1) @ Rz(t2)``."""
    c, s = math.cos(t1 / 2), math.sin(t1 / 2)
    e = complex(math.cos(t2 / 2), -math.sin(t2 / 2))
    return np.array([[c * e, -s * e.conjugate()], [s * e, c * e.conjugate()]])


def _kron2(a, b):
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(4, 4)


def _xlog2x(p):
    return p * math.log2(p) if p > 1e-300 else 0.0


def _rate_from_entries(d, c03, c12):
    """``C(Phi(m)) - H(e_b)`` from the diagonal and the two surviving coherences."""
    d = [max(v, 0.0) for v in d]
    h = 0.0
    for v in d:
        h -= _xlog2x(v)
    for i, j, c in ((0, 3, c03), (1, 2, c12)):
        half = (d[i] + d[j]) / 2
        r = math.sqrt(((d[i] - d[j]) / 2) ** 2 + c * c)
        h += _xlog2x(half + r) + _xlog2x(max(half - r, 0.0))
    e_b = min(d[1] + d[2], 1.0)
    return max(h, 0.0) + _xlog2x(e_b) + _xlog2x(1.0 - e_b)


def _rate_of_matrix(m: np.ndarray) -> float:
    return _rate_from_entries(m.diagonal().real.tolist(), abs(m[0, 3]), abs(m[1, 2]))


def schmidt_bases(rho):
    """Local unitaries rotating the Schmidt basis of rho's top eigenvector onto ``|kk>``."""
    _, vec = hermitian_eigensystem(as_matrix(rho))
    psi = vec[:, 0].reshape(2, 2)
    u, _, vh = np.linalg.svd(psi)
    # psi = u diag(s) vh, so (u^dagger (x) conj(vh)) psi = sum_k s_k |kk>
    return u.conj().T, vh.conj()


def max_keyrate_over_bases(rho, cfg: BasisSearchConfig | None = None):
    """Largest per-state rate found over local measurement bases.

    Returns:
        (rate, uA, uB) with ``local_rotate(rho, uA, uB)`` attaining ``rate``
        in the computational basis.
    """
    cfg = cfg or BasisSearchConfig()
    m = as_matrix(rho)
    rng = np.random.default_rng(cfg.seed)

    eye = np.eye(2, dtype=complex)
    sa, sb = schmidt_bases(m)
    starts = [(eye, eye, np.zeros(4)), (sa, sb, np.zeros(4))]
    for _ in range(cfg.restarts):
        theta = np.concatenate([[math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi)] for _ in "ab"])
        starts.append((eye, eye, theta))

    best = (-math.inf, eye, eye)
    for base_a, base_b, theta0 in starts:
        pre = np.kron(base_a, base_b)
        m0 = pre @ m @ pre.conj().T

        def neg_rate(t):
            u = _kron2(_rot(t[0], t[1]), _rot(t[2], t[3]))
            return -_rate_of_matrix(u @ m0 @ u.conj().T)

        res = minimize(
            neg_rate,
            theta0,
            method="Nelder-Mead",
            options=dict(
                maxiter=cfg.max_iterations,
                xatol=1e-9,
                fatol=cfg.tolerance,
                initial_simplex=theta0 + 0.4 * np.vstack([np.zeros(4), np.eye(4)]),
            ),
        )
        for t, val in ((res.x, -res.fun), (theta0, -neg_rate(theta0))):
            if val > best[0]:
                best = (val, _rot(t[0], t[1]) @ base_a, _rot(t[2], t[3]) @ base_b)
    return best
