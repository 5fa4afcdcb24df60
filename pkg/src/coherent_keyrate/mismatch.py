"""Detection-efficiency mismatch on Bob's side.

Bob's two detectors have efficiencies ``eta0`` and ``eta1``. Each lossy
measurement is modeled as a filter ``F`` on Bob's qubit followed by an ideal
measurement. From the observed Z and X frequencies the chain

    Gamma, Gamma'  ->  e_p'' = Tr(Pi_x^- rho)  ->  e_p' = Tr(Pi_x^- rho^Z)

recovers the phase error of the Z-filtered state exactly, which then feeds
the fine-grained BB84 rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import binary_entropy
from .errors import OutOfRange, VanishingNorm
from .finegrained import FineGrainedStats, bb84_opt_keyrate
from .keyrate import KeyRateReport
from .qstate import (
    BASIS_VECTORS,
    Basis,
    TwoQubitState,
    as_basis,
    as_matrix,
    full_dephase,
)

NORM_TOL = 1e-12


@dataclass(frozen=True)
class DetectorModel:
    eta0: float
    eta1: float

    def __post_init__(self):
        for name in ("eta0", "eta1"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise OutOfRange(f"{name} must lie in (0, 1], got {v}")

    @property
    def x(self) -> float:
        """Mismatch ratio ``eta0 / (eta0 + eta1)``."""
        return self.eta0 / (self.eta0 + self.eta1)

    @property
    def pattern(self) -> np.ndarray:
        """Efficiency seen by each joint outcome 00, 01, 10, 11 (Bob's bit decides)."""
        return np.array([self.eta0, self.eta1, self.eta0, self.eta1])


@dataclass(frozen=True)
class ObservedDiag:
    """Joint outcome frequencies in the Z (``00..11``) or X (``++..--``) basis."""

    basis: Basis
    m_hat: tuple

    def __post_init__(self):
        m = np.asarray(self.m_hat, dtype=float)
        if m.shape != (4,) or np.any(m < 0) or abs(m.sum() - 1) > 1e-9:
            raise OutOfRange(f"observed frequencies must be 4 probabilities, got {self.m_hat}")
        object.__setattr__(self, "basis", as_basis(self.basis))
        object.__setattr__(self, "m_hat", tuple(float(v) for v in m))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.m_hat)


def _check_basis(basis) -> Basis:
    b = as_basis(basis)
    if b is Basis.Y:
        raise ValueError("detector filters are defined for the Z and X bases only")
    return b


def filter_op(basis, det: DetectorModel) -> np.ndarray:
    """Bob's 2x2 filter ``sqrt(eta0)|b0><b0| + sqrt(eta1)|b1><b1|`` in the Z representation."""
    v = BASIS_VECTORS[_check_basis(basis)]
    return (v * np.sqrt([det.eta0, det.eta1])) @ v.conj().T


def filtered_state(rho, basis, det: DetectorModel) -> TwoQubitState:
    """Normalized ``(1 (x) F) rho (1 (x) F)^dagger``."""
    f = np.kron(np.eye(2), filter_op(basis, det))
    out = f @ as_matrix(rho) @ f.conj().T
    norm = np.real(np.trace(out))
    if norm <= NORM_TOL:
        raise VanishingNorm(f"filtered state has norm {norm:.3e}")
    out = out / norm
    return TwoQubitState((out + out.conj().T) / 2)


def filter_norm(rho, basis, det: DetectorModel) -> float:
    f = np.kron(np.eye(2), filter_op(basis, det))
    return float(np.real(np.trace(f @ as_matrix(rho) @ f.conj().T)))


def observe(rho, basis, det: DetectorModel) -> ObservedDiag:
    """Frequencies Alice and Bob would record when both measure in ``basis``."""
    b = _check_basis(basis)
    p = np.clip(full_dephase(filtered_state(rho, b, det), b), 0, None)
    return ObservedDiag(b, tuple(p / p.sum()))


def gamma_from_observed(obs: ObservedDiag, det: DetectorModel) -> float:
    """Filter normalization ``1 / sum_k m_hat_k / eta_k``."""
    return float(1.0 / np.sum(obs.array / det.pattern))


def phase_error_double_prime(obs_x: ObservedDiag, det: DetectorModel) -> float:
    """Phase error of the unfiltered state from X-basis observations."""
    if obs_x.basis is not Basis.X:
        raise ValueError("needs X-basis observations")
    m = obs_x.array
    g = gamma_from_observed(obs_x, det)
    return float(np.clip(g * (m[1] / det.eta1 + m[2] / det.eta0), 0.0, 1.0))


def corrected_phase_error(gamma: float, e_pp: float, det: DetectorModel) -> float:
    """Phase error of the Z-filtered state: ``1/2 - sqrt(eta0 eta1)/Gamma (1/2 - e_p'')``."""
    if gamma <= 0:
        raise OutOfRange(f"Gamma must be positive, got {gamma}")
    return float(0.5 - math.sqrt(det.eta0 * det.eta1) / gamma * (0.5 - e_pp))


def _check_mismatch_args(x, e_p, e_b):
    if not (0.0 < x < 1.0):
        raise OutOfRange(f"mismatch ratio x must lie in (0, 1), got {x}")
    for name, v in (("e_p", e_p), ("e_b", e_b)):
        if not (0.0 <= v <= 0.5):
            raise OutOfRange(f"{name} must lie in [0, 0.5], got {v}")


def mismatch_f(x: float, e_p: float) -> float:
    return 0.5 + math.sqrt((0.5 - x) ** 2 + x * (1 - x) * (1 - 2 * e_p) ** 2)


def mismatch_keyrate(x: float, e_p: float, e_b: float) -> KeyRateReport:
    """Symmetric-attack rate ``H(x) - H(f(x, e_p)) - H(e_b)``."""
    _check_mismatch_args(x, e_p, e_b)
    f = min(mismatch_f(x, e_p), 1.0)
    return KeyRateReport.from_terms(
        binary_entropy(x) - binary_entropy(f),
        binary_entropy(e_b),
        "mismatch",
        x=x,
        f=f,
    )


def discard_keyrate_k1(x: float, e_p: float, e_b: float) -> float:
    """Data-discarding rate ``2 min(x, 1-x) (1 - H(e_p) - H(e_b))``."""
    _check_mismatch_args(x, e_p, e_b)
    return 2 * min(x, 1 - x) * (1 - binary_entropy(e_p) - binary_entropy(e_b))


def koashi_keyrate_k2(x: float, e_p: float, e_b: float) -> float:
    """Complementarity-based rate ``2 min(x, 1-x) (1 - H(e_p)) - H(e_b)``."""
    _check_mismatch_args(x, e_p, e_b)
    return 2 * min(x, 1 - x) * (1 - binary_entropy(e_p)) - binary_entropy(e_b)


def mismatch_pipeline(rho, det: DetectorModel) -> KeyRateReport:
    """Full estimation chain from simulated observations to the fine-grained rate.

    The observed Z frequencies are the diagonal of the Z-filtered state; the
    X observations give ``e_p''``, corrected to ``e_p'`` through ``Gamma``.
    Applying the fine-grained BB84 rate to those statistics gives the key rate
    of the Z-filtered state.
    """
    obs_z = observe(rho, Basis.Z, det)
    obs_x = observe(rho, Basis.X, det)
    gamma = gamma_from_observed(obs_z, det)
    gamma_x = gamma_from_observed(obs_x, det)
    e_pp = phase_error_double_prime(obs_x, det)
    e_p_prime = float(np.clip(corrected_phase_error(gamma, e_pp, det), 0.0, 1.0))
    stats = FineGrainedStats(*obs_z.m_hat, e_p=e_p_prime)
    report = bb84_opt_keyrate(stats)
    details = dict(report.details)
    details.update(
        gamma=gamma,
        gamma_x=gamma_x,
        e_p_double_prime=e_pp,
        e_p_prime=e_p_prime,
        observed_e_p=obs_x.m_hat[1] + obs_x.m_hat[2],
        observed_e_b=stats.e_b,
        obs_z=obs_z,
        obs_x=obs_x,
    )
    return KeyRateReport(
        report.rate,
        report.coherence_term,
        report.reconciliation_term,
        "mismatch-pipeline",
        report.witness,
        details,
    )
