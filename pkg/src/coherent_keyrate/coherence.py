"""Entropies and the relative entropy of coherence, all in bits."""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, InvalidDistribution, OutOfRange
from .qstate import (
    as_matrix,
    check_hermitian,
    clipped_spectrum,
    full_dephase,
    hermitian_eigensystem,
)

LOG_FLOOR = 1e-300
SUPPORT_TOL = 1e-12
WEIGHT_TOL = 1e-10


def xlog2x(p) -> np.ndarray:
    """Elementwise ``p log2 p`` with arguments below 1e-300 treated as zero."""
    p = np.asarray(p, dtype=float)
    safe = np.where(p > LOG_FLOOR, p, 1.0)
    return np.where(p > LOG_FLOOR, p * np.log2(safe), 0.0)


def binary_entropy(e: float) -> float:
    """``H(e) = -e log2 e - (1-e) log2 (1-e)``.

    Raises:
        OutOfRange: if ``e`` lies outside [0, 1].
    """
    if not (0.0 <= e <= 1.0):
        raise OutOfRange(f"binary entropy needs 0 <= e <= 1, got {e}")
    return float(-(xlog2x(e) + xlog2x(1.0 - e)))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise InvalidDistribution(f"not a probability vector: {p}")
    return float(max(0.0, -np.sum(xlog2x(p))))


def von_neumann_entropy(rho) -> float:
    """``S(rho) = -Tr rho log2 rho`` over the clipped spectrum."""
    lam = clipped_spectrum(as_matrix(rho))
    return float(max(0.0, -np.sum(xlog2x(lam))))


def rel_entropy_coherence(rho, basis="Z") -> float:
    """Relative entropy of coherence ``S(diag(rho)) - S(rho)`` in ``basis``.

    The reference basis is the ``n``-fold product of the single-qubit
    ``basis``, so this works on qubit states as well as two-qubit states.
    """
    m = as_matrix(rho)
    p = np.clip(full_dephase(m, basis), 0.0, None)
    p = p / p.sum()
    c = shannon_entropy(p) - von_neumann_entropy(m)
    return max(0.0, c)


def quantum_relative_entropy(rho, sigma) -> float:
    """``D(rho || sigma)`` in bits; ``math.inf`` when supp(rho) is not in supp(sigma).

    Both operators are diagonalized separately and combined through the
    overlap matrix ``|<v_i|w_j>|^2``; ``sigma`` eigenvalues below 1e-12
    carrying more than 1e-10 of rho-weight signal infinite divergence.
    """
    r = as_matrix(rho)
    s = as_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes differ: {r.shape} vs {s.shape}")
    check_hermitian(r)
    check_hermitian(s)
    p, v = hermitian_eigensystem(r)
    q, w = hermitian_eigensystem(s)
    p = np.clip(p, 0.0, None)
    q = np.clip(q, 0.0, None)
    overlap = np.abs(v.conj().T @ w) ** 2  # [i, j] = |<v_i|w_j>|^2
    weight_on_q = p @ overlap
    null = q < SUPPORT_TOL
    if np.any(weight_on_q[null] > WEIGHT_TOL):
        return math.inf
    log_q = np.where(null, 0.0, np.log2(np.where(null, 1.0, q)))
    d = float(np.sum(xlog2x(p)) - np.sum(weight_on_q * log_q))
    return max(0.0, d)
