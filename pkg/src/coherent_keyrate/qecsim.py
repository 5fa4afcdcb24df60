"""Small-scale check that hashing-based error correction commutes with Z measurement.

Two paths produce the joint distribution of Alice's and Bob's final key strings
for ``n`` copies of a two-qubit state:

classical
    Measure every pair in Z, compute the syndrome ``H (z_A xor z_B)`` and let
    Bob flip the bits of the minimum-weight coset leader.
virtual
    Attach ``r`` ancilla EPR pairs, apply CNOTs from the data qubits to the
    ancillas on each side according to ``H``, measure the ancillas in Z, form
    the syndrome from both ancilla strings, apply Bob's X corrections and only
    then measure the data in Z. This is simulated on the full density matrix.

Qubit order for the virtual path is ``A1 B1 A2 B2 ... An Bn Aa1 Ba1 ... Aar Bar``
with the first qubit as the most significant bit of a basis index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .coherence import shannon_entropy
from .errors import StateFileError, TooLarge
from .qstate import BELL_VECTORS, as_matrix

MAX_CLASSICAL_PAIRS = 4
MAX_VIRTUAL_QUBITS = 12
SUM_TOL = 1e-10

Bits = tuple


@dataclass(frozen=True)
class HashingMatrix:
    """Binary ``r x n`` matrix with ``r <= n`` and no zero row."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(b) for b in row) for row in self.rows)
        if not rows or not rows[0]:
            raise ValueError("hashing matrix needs at least one row and one column")
        n = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError(f"row {i + 1} has {len(row)} entries, expected {n}")
            if any(b not in (0, 1) for b in row):
                raise ValueError(f"row {i + 1} has entries other than 0 and 1")
            if not any(row):
                raise ValueError(f"row {i + 1} is all zeros")
        if len(rows) > n:
            raise ValueError(f"hashing matrix has more rows ({len(rows)}) than columns ({n})")
        object.__setattr__(self, "rows", rows)

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def syndrome(self, e: Bits) -> Bits:
        return tuple(sum(h * b for h, b in zip(row, e)) % 2 for row in self.rows)

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "HashingMatrix":
        """One row per line, written with the characters 0 and 1; blank and ``#`` lines are skipped."""
        rows = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            bad = set(line) - {"0", "1"}
            if bad:
                raise StateFileError(f"{source}:{lineno}: unexpected characters {sorted(bad)} in hashing row")
            rows.append(tuple(int(c) for c in line))
        if not rows:
            raise StateFileError(f"{source}: no hashing rows found")
        try:
            return cls(tuple(rows))
        except ValueError as exc:
            raise StateFileError(f"{source}: {exc}") from None

    @classmethod
    def read(cls, path) -> "HashingMatrix":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), str(path))

    def to_text(self) -> str:
        return "".join("".join(str(b) for b in row) + "\n" for row in self.rows)


DEFAULT_HASHING = HashingMatrix(((1, 1, 0), (0, 1, 1)))


@dataclass(frozen=True)
class KeyDistribution:
    """Probabilities of ``(alice_bits, bob_bits)`` after correction.

    ``syndromes`` holds the probability of each observed syndrome.
    """

    probs: dict
    syndromes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        total = sum(self.probs.values())
        if any(p < -SUM_TOL for p in self.probs.values()) or abs(total - 1) > SUM_TOL:
            raise ValueError(f"key distribution must be a probability distribution (sum {total})")

    @property
    def mismatch_probability(self) -> float:
        return float(sum(p for (a, b), p in self.probs.items() if a != b))

    def alice_marginal(self) -> dict:
        out: dict = {}
        for (a, _), p in self.probs.items():
            out[a] = out.get(a, 0.0) + p
        return out

    def total_variation(self, other: "KeyDistribution") -> float:
        keys = set(self.probs) | set(other.probs)
        return 0.5 * sum(abs(self.probs.get(k, 0.0) - other.probs.get(k, 0.0)) for k in keys)


def coset_leaders(h: HashingMatrix) -> dict:
    """Minimum-weight error pattern per syndrome, ties broken lexicographically."""
    patterns = sorted(itertools.product((0, 1), repeat=h.n), key=lambda e: (sum(e), e))
    leaders: dict = {}
    for e in patterns:
        leaders.setdefault(h.syndrome(e), e)
    return leaders


def _z_outcomes(rho) -> np.ndarray:
    """``p[zA, zB]`` for one pair."""
    d = np.clip(np.real(np.diag(as_matrix(rho))), 0.0, None)
    return (d / d.sum()).reshape(2, 2)


def _xor(a: Bits, b: Bits) -> Bits:
    return tuple(x ^ y for x, y in zip(a, b))


def _check_n(n, h: HashingMatrix):
    if n != h.n:
        raise ValueError(f"pair count {n} does not match hashing matrix width {h.n}")


def classical_ec_run(rho, n: int, h: HashingMatrix) -> KeyDistribution:
    """Measure first, then correct with the syndrome."""
    _check_n(n, h)
    if n > MAX_CLASSICAL_PAIRS:
        raise TooLarge(f"classical enumeration is capped at n = {MAX_CLASSICAL_PAIRS} pairs, got {n}")
    p1 = _z_outcomes(rho)
    leaders = coset_leaders(h)
    probs: dict = {}
    syn: dict = {}
    for za in itertools.product((0, 1), repeat=n):
        for zb in itertools.product((0, 1), repeat=n):
            p = math.prod(p1[a, b] for a, b in zip(za, zb))
            if p == 0.0:
                continue
            s = h.syndrome(_xor(za, zb))
            key = (za, _xor(zb, leaders[s]))
            probs[key] = probs.get(key, 0.0) + p
            syn[s] = syn.get(s, 0.0) + p
    return KeyDistribution(probs, syn)


def uncorrectable_probability(rho, h: HashingMatrix) -> float:
    """Probability that the Z error pattern is not the leader of its coset."""
    p1 = _z_outcomes(rho)
    p_err = (p1[0, 1] + p1[1, 0], p1[0, 0] + p1[1, 1])  # (flip, no flip)
    leaders = set(coset_leaders(h).values())
    total = 0.0
    for e in itertools.product((0, 1), repeat=h.n):
        if e not in leaders:
            total += math.prod(p_err[0] if b else p_err[1] for b in e)
    return total


def _index_bits(k: int, width: int) -> Bits:
    return tuple((k >> (width - 1 - q)) & 1 for q in range(width))


def _cnot_permutation(n: int, h: HashingMatrix) -> np.ndarray:
    """``f`` with ``CNOTs |k> = |f[k]>`` for the whole hashing circuit."""
    width = 2 * n + 2 * h.r
    idx = np.arange(2**width)

    def bit(q):
        return 1 << (width - 1 - q)

    for j, row in enumerate(h.rows):
        for k, hk in enumerate(row):
            if hk:
                for side in (0, 1):
                    c, t = bit(2 * k + side), bit(2 * n + 2 * j + side)
                    idx = np.where(idx & c, idx ^ t, idx)
    return idx


def _bob_flip_permutation(n: int, flips: Bits) -> np.ndarray:
    mask = 0
    for k, f in enumerate(flips):
        if f:
            mask |= 1 << (2 * n - 1 - (2 * k + 1))
    return np.arange(4**n) ^ mask


def virtual_qec_run(rho, n: int, h: HashingMatrix) -> KeyDistribution:
    """Correct coherently with ancilla EPR pairs, then measure the data in Z."""
    _check_n(n, h)
    width = 2 * n + 2 * h.r
    if width > MAX_VIRTUAL_QUBITS:
        raise TooLarge(
            f"virtual simulation is capped at {MAX_VIRTUAL_QUBITS} qubits, n = {n} and r = {h.r} need {width}"
        )
    m = as_matrix(rho)
    data = m
    for _ in range(n - 1):
        data = np.kron(data, m)
    epr = np.outer(BELL_VECTORS[0], BELL_VECTORS[0].conj())
    anc = np.ones((1, 1), dtype=complex)
    for _ in range(h.r):
        anc = np.kron(anc, epr)

    # total state rho_data (x) rho_anc, permuted by the CNOT network:
    # rho'[i, j] = rho[f^-1(i), f^-1(j)]
    f = _cnot_permutation(n, h)
    finv = np.empty_like(f)
    finv[f] = np.arange(f.size)
    shift = 2 * h.r
    amask = (1 << shift) - 1
    data_idx = np.arange(4**n)
    leaders = coset_leaders(h)

    probs: dict = {}
    syn: dict = {}
    for anc_out in range(2**shift):
        rows = finv[(data_idx << shift) | anc_out]
        d, a = rows >> shift, rows & amask
        block = data[np.ix_(d, d)] * anc[np.ix_(a, a)]
        weight = float(np.real(np.trace(block)))
        if weight <= 0.0:
            continue
        bits = _index_bits(anc_out, shift)
        s = _xor(bits[0::2], bits[1::2])
        syn[s] = syn.get(s, 0.0) + weight
        q = _bob_flip_permutation(n, leaders[s])
        corrected = block[np.ix_(q, q)]
        diag = np.clip(np.real(np.diag(corrected)), 0.0, None)
        for k in np.flatnonzero(diag):
            z = _index_bits(int(k), 2 * n)
            key = (z[0::2], z[1::2])
            probs[key] = probs.get(key, 0.0) + float(diag[k])
    total = sum(probs.values())
    probs = {k: v / total for k, v in probs.items()}
    syn = {k: v / total for k, v in syn.items()}
    return KeyDistribution(probs, syn)


def ec_cost(rho) -> float:
    """``H(Z_A | Z_B)`` in bits from the Z x Z outcome distribution."""
    p = _z_outcomes(rho)
    return max(0.0, shannon_entropy(p.ravel()) - shannon_entropy(p.sum(axis=0)))
