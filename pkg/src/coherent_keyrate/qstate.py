"""Two-qubit states, parity projectors and the dephasing channels.

Basis ordering is fixed everywhere as ``|00>, |01>, |10>, |11>`` with Alice's
qubit first (most significant).
"""

from __future__ import annotations

import enum
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    InconsistentErrorRates,
    InvalidDistribution,
    NoConvergence,
    NotHermitian,
    NotPositive,
    NotUnitary,
    StateFileError,
    TraceNotOne,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-9
UNITARY_TOL = 1e-10


class Basis(str, enum.Enum):
    Z = "Z"
    X = "X"
    Y = "Y"


_S2 = 1 / np.sqrt(2)

# columns are the two eigenvectors, "+" first
BASIS_VECTORS = {
    Basis.Z: np.eye(2, dtype=complex),
    Basis.X: np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    Basis.Y: np.array([[1, 1], [1j, -1j]], dtype=complex) * _S2,
}

BELL_VECTORS = np.array(
    [
        [1, 0, 0, 1],  # Phi+
        [1, 0, 0, -1],  # Phi-
        [0, 1, 1, 0],  # Psi+
        [0, 1, -1, 0],  # Psi-
    ],
    dtype=complex,
) * _S2

HADAMARD = BASIS_VECTORS[Basis.X].copy()
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


def as_basis(label) -> Basis:
    try:
        return Basis(str(getattr(label, "value", label)).upper())
    except ValueError:
        raise ValueError(f"unknown basis {label!r}; expected one of Z, X, Y") from None


class TwoQubitState:
    """Validated 4x4 density matrix. Immutable after construction."""

    __slots__ = ("_matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "_matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("TwoQubitState is immutable")

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._matrix, dtype=dtype)

    def __repr__(self):
        return f"TwoQubitState(\n{np.array2string(self._matrix, precision=4)})"

    def __eq__(self, other):
        if not isinstance(other, TwoQubitState):
            return NotImplemented
        return bool(np.array_equal(self._matrix, other._matrix))

    __hash__ = None


StateLike = Union[TwoQubitState, np.ndarray, Sequence]


def as_matrix(rho) -> np.ndarray:
    if isinstance(rho, TwoQubitState):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"Hermitian: matrix must be square, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        i, j = np.unravel_index(np.argmax(np.abs(m - m.conj().T)), m.shape)
        raise NotHermitian(
            f"Hermitian: max |M - M^dagger| = {dev:.3e} > {tol:g} at entry ({i}, {j})"
        )


def validate_density_matrix(m) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return a hermitized copy."""
    m = np.array(m, dtype=complex)
    check_hermitian(m)
    tr = np.trace(m)
    if abs(tr - 1) > TRACE_TOL:
        raise TraceNotOne(f"unit trace: |Tr M - 1| = {abs(tr - 1):.3e} > {TRACE_TOL:g}")
    m = (m + m.conj().T) / 2
    lam_min = np.linalg.eigvalsh(m)[0]
    if lam_min < -PSD_TOL:
        raise NotPositive(
            f"positive semidefinite: min eigenvalue {lam_min:.3e} < {-PSD_TOL:g}"
        )
    return m


def make_state(matrix) -> TwoQubitState:
    """Validate a 4x4 matrix and wrap it as a :class:`TwoQubitState`.

    Raises:
        NotHermitian, TraceNotOne, NotPositive: naming the violated invariant.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (4, 4):
        raise DimensionMismatch(f"two-qubit state must be 4x4, got shape {m.shape}")
    return TwoQubitState(validate_density_matrix(m))


def hermitian_eigensystem(m):
    """Eigen-decomposition of a Hermitian matrix.

    Returns:
        (eigenvalues, eigenvectors): eigenvalues real and sorted in descending
        order, eigenvectors as orthonormal columns so that
        ``M = V @ diag(lam) @ V^dagger``.
    """
    m = as_matrix(m)
    check_hermitian(m)
    try:
        lam, vec = np.linalg.eigh((m + m.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return lam[::-1].copy(), vec[:, ::-1].copy()


def clipped_spectrum(m) -> np.ndarray:
    """Eigenvalues of a density matrix with tiny negatives clipped to zero.

    Eigenvalues in ``[-1e-9, 0)`` become 0 and the spectrum is renormalized;
    anything more negative is rejected.
    """
    lam = hermitian_eigensystem(m)[0]
    if lam[-1] < -PSD_TOL:
        raise NotPositive(f"positive semidefinite: min eigenvalue {lam[-1]:.3e}")
    lam = np.clip(lam, 0.0, None)
    return lam / lam.sum()


def product_basis(basis, n_qubits: int = 2) -> np.ndarray:
    """Columns are the product eigenbasis, e.g. ``|++>, |+->, |-+>, |-->`` for X."""
    v = BASIS_VECTORS[as_basis(basis)]
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n_qubits):
        out = np.kron(out, v)
    return out


@dataclass(frozen=True)
class ParityProjectors:
    plus: np.ndarray
    minus: np.ndarray
    basis: Basis


def _ketbra(v):
    return np.outer(v, v.conj())


def parity_projectors(basis="Z") -> ParityProjectors:
    """Two-qubit parity projectors for the Z, X or Y basis.

    For Z and X the ``plus`` projector spans the aligned outcomes
    (``|00>,|11>`` and ``|++>,|-->``). For Y the pairing is reversed:
    ``plus`` spans the anti-aligned kets ``|+i,-i>`` and ``|-i,+i>``, which is
    the subspace containing ``|Phi+>``.
    """
    b = as_basis(basis)
    v = BASIS_VECTORS[b]
    k = [np.kron(v[:, i], v[:, j]) for i in (0, 1) for j in (0, 1)]
    aligned = _ketbra(k[0]) + _ketbra(k[3])
    anti = _ketbra(k[1]) + _ketbra(k[2])
    if b is Basis.Y:
        plus, minus = anti, aligned
    else:
        plus, minus = aligned, anti
    plus.setflags(write=False)
    minus.setflags(write=False)
    return ParityProjectors(plus=plus, minus=minus, basis=b)


_PZ = parity_projectors("Z")


def partial_dephase_matrix(m: np.ndarray) -> np.ndarray:
    p, q = _PZ.plus, _PZ.minus
    return p @ m @ p + q @ m @ q


def partial_dephase(rho: StateLike) -> TwoQubitState:
    """Z-parity dephasing: ``Pi+ rho Pi+ + Pi- rho Pi-``."""
    return TwoQubitState(partial_dephase_matrix(as_matrix(rho)))


def full_dephase(rho: StateLike, basis="Z") -> np.ndarray:
    """Outcome probabilities of measuring every qubit in ``basis``.

    Works for any ``2**n``-dimensional state; entries follow the product
    ordering of :func:`product_basis`.
    """
    m = as_matrix(rho)
    n = int(round(np.log2(m.shape[0])))
    if 2**n != m.shape[0]:
        raise ValueError(f"dimension {m.shape[0]} is not a power of two")
    if as_basis(basis) is Basis.Z:
        return np.real(np.diag(m)).copy()
    b = product_basis(basis, n)
    return np.real(np.einsum("ki,kl,li->i", b.conj(), m, b))


def dephased_state(rho: StateLike, basis="Z") -> np.ndarray:
    """Fully dephased density matrix in ``basis``, expressed in the Z basis."""
    m = as_matrix(rho)
    n = int(round(np.log2(m.shape[0])))
    b = product_basis(basis, n)
    p = full_dephase(m, basis)
    return (b * p) @ b.conj().T


def partial_trace_A(rho: StateLike) -> np.ndarray:
    """Bob's 2x2 marginal."""
    return np.einsum("ijik->jk", as_matrix(rho).reshape(2, 2, 2, 2))


def partial_trace_B(rho: StateLike) -> np.ndarray:
    return np.einsum("ijkj->ik", as_matrix(rho).reshape(2, 2, 2, 2))


def dephase_A(rho: StateLike) -> np.ndarray:
    """Z dephasing on Alice only: ``sum_i |i><i|_A rho |i><i|_A``."""
    m = as_matrix(rho).copy()
    m[0:2, 2:4] = 0
    m[2:4, 0:2] = 0
    return m


def check_unitary(u: np.ndarray, name: str = "U") -> None:
    u = np.asarray(u)
    dev = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if dev > UNITARY_TOL:
        raise NotUnitary(f"{name} is not unitary: max |U U^dagger - I| = {dev:.3e}")


def local_rotate(rho: StateLike, uA, uB) -> TwoQubitState:
    """Apply ``(uA (x) uB) rho (uA (x) uB)^dagger``."""
    uA = np.asarray(uA, dtype=complex)
    uB = np.asarray(uB, dtype=complex)
    check_unitary(uA, "uA")
    check_unitary(uB, "uB")
    u = np.kron(uA, uB)
    out = u @ as_matrix(rho) @ u.conj().T
    return TwoQubitState((out + out.conj().T) / 2)


@dataclass(frozen=True)
class BellProbs:
    """Weights on ``Phi+, Phi-, Psi+, Psi-``."""

    p0: float
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        p = self.as_array()
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
            raise InvalidDistribution(f"Bell weights must be a distribution, got {p}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3], dtype=float)

    @property
    def e_x(self) -> float:
        return self.p1 + self.p3

    @property
    def e_y(self) -> float:
        return self.p1 + self.p2

    @property
    def e_z(self) -> float:
        return self.p2 + self.p3

    @classmethod
    def from_error_rates(cls, e_x, e_y, e_z, clip_tol: float = 1e-12) -> "BellProbs":
        p = np.array(
            [
                (2 - e_x - e_y - e_z) / 2,
                (e_x + e_y - e_z) / 2,
                (e_y + e_z - e_x) / 2,
                (e_z + e_x - e_y) / 2,
            ]
        )
        bad = np.flatnonzero(p < -clip_tol)
        if bad.size:
            names = ", ".join(f"p{i}={p[i]:.6g}" for i in bad)
            raise InconsistentErrorRates(
                f"error rates (e_x={e_x}, e_y={e_y}, e_z={e_z}) give negative Bell weight(s) {names}"
            )
        p = np.clip(p, 0, None)
        return cls(*(float(v) for v in p / p.sum()))


def bell_diagonal(p) -> TwoQubitState:
    """``p0|Phi+><Phi+| + p1|Phi-><Phi-| + p2|Psi+><Psi+| + p3|Psi-><Psi-|``."""
    if not isinstance(p, BellProbs):
        p = BellProbs(*p)
    w = p.as_array()
    m = (BELL_VECTORS.T * w) @ BELL_VECTORS.conj()
    return TwoQubitState(m)


def bell_weights(rho: StateLike) -> np.ndarray:
    """Diagonal of ``rho`` in the Bell basis."""
    m = as_matrix(rho)
    return np.real(np.einsum("ki,ij,kj->k", BELL_VECTORS.conj(), m, BELL_VECTORS))


def pure_state(psi) -> TwoQubitState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return TwoQubitState(np.outer(psi, psi.conj()))


def random_density_matrix(rng: np.random.Generator, dim: int = 4, rank: int | None = None):
    """Ginibre-distributed density matrix: ``G G^dagger / Tr``."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return (m + m.conj().T) / 2


def random_state(rng: np.random.Generator, rank: int | None = None) -> TwoQubitState:
    return TwoQubitState(random_density_matrix(rng, 4, rank))


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# ---------------------------------------------------------------------------
# state files

def format_state_text(rho: StateLike) -> str:
    m = as_matrix(rho)
    re_vals = ", ".join(repr(float(v)) for v in m.real.ravel())
    im_vals = ", ".join(repr(float(v)) for v in m.imag.ravel())
    return (
        "[state]\n"
        "dims = [4, 4]\n"
        f"re = [{re_vals}]\n"
        f"im = [{im_vals}]\n"
    )


def write_state_file(path, rho: StateLike) -> None:
    Path(path).write_text(format_state_text(rho))


def _key_line(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return lineno
    return None


def parse_state_text(text: str, source: str = "<string>") -> TwoQubitState:
    """Parse the TOML state format: a ``[state]`` table with ``dims``, ``re``, ``im``.

    ``re`` and ``im`` hold 16 numbers each in row-major order. Errors carry
    the offending line number.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise StateFileError(f"{source}: {exc}") from exc
    table = doc.get("state", doc)

    def where(key):
        line = _key_line(text, key)
        return f"{source}:{line}" if line else source

    for key in ("dims", "re", "im"):
        if key not in table:
            raise StateFileError(f"{source}: missing field '{key}'")
    dims = table["dims"]
    if list(dims) != [4, 4]:
        raise StateFileError(f"{where('dims')}: dims must be [4, 4], got {dims}")
    arrays = {}
    for key in ("re", "im"):
        vals = table[key]
        if not isinstance(vals, list) or len(vals) != 16:
            raise StateFileError(f"{where(key)}: '{key}' must hold 16 numbers")
        try:
            arrays[key] = np.array([float(v) for v in vals]).reshape(4, 4)
        except (TypeError, ValueError) as exc:
            raise StateFileError(f"{where(key)}: non-numeric entry in '{key}'") from exc
    m = arrays["re"] + 1j * arrays["im"]

    bad_re = np.abs(arrays["re"] - arrays["re"].T) > HERMITIAN_TOL
    bad_im = np.abs(arrays["im"] + arrays["im"].T) > HERMITIAN_TOL
    if bad_re.any() or bad_im.any():
        msgs = []
        for key, bad in (("re", bad_re), ("im", bad_im)):
            for i, j in zip(*np.nonzero(np.triu(bad))):
                msgs.append(
                    f"{where(key)}: {key}[{i},{j}]={arrays[key][i, j]!r} "
                    f"inconsistent with {key}[{j},{i}]={arrays[key][j, i]!r}"
                )
        raise NotHermitian("not Hermitian:\n  " + "\n  ".join(msgs))
    return make_state(m)


def read_state_file(path) -> TwoQubitState:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StateFileError(f"{path}: {exc.strerror}") from exc
    return parse_state_text(text, source=str(path))
