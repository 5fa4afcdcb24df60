"""Coherence-based key rates: per-state rate, BB84 and six-state formulas.

The per-state rate is the Z-basis coherence of the parity-dephased state
minus the reconciliation cost ``I_ec``:

    K(rho) = C(Phi(rho)) - I_ec

with ``I_ec`` defaulting to ``H(e_b)`` (symmetric case).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coherence import binary_entropy, rel_entropy_coherence, shannon_entropy
from .errors import OutOfRange
from .qstate import (
    BellProbs,
    TwoQubitState,
    as_matrix,
    bell_diagonal,
    parity_projectors,
    partial_dephase_matrix,
)

__all__ = [
    "BellProbs",
    "KeyRateReport",
    "error_rates",
    "keyrate_of_state",
    "bb84_keyrate",
    "sixstate_keyrate",
    "bb84_worstcase_state",
]

_PROJ = {b: parity_projectors(b) for b in ("Z", "X", "Y")}


@dataclass(frozen=True)
class KeyRateReport:
    """Key rate together with its two terms.

    ``rate == coherence_term - reconciliation_term``. Negative rates are kept
    as-is; ``secure`` is False for them.
    """

    rate: float
    coherence_term: float
    reconciliation_term: float
    protocol: str
    witness: Optional[TwoQubitState] = field(default=None, repr=False, compare=False)
    details: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_terms(cls, coherence_term, reconciliation_term, protocol, witness=None, **details):
        c = float(coherence_term)
        i = float(reconciliation_term)
        return cls(c - i, c, i, protocol, witness, details)

    @property
    def secure(self) -> bool:
        return self.rate > 0


def _check_rate(name, e, upper=0.5):
    if not (0.0 <= e <= upper):
        raise OutOfRange(f"{name} must lie in [0, {upper}], got {e}")


def error_rates(rho) -> tuple[float, float, float]:
    """``(e_x, e_y, e_z)`` as ``Tr(Pi^- rho)`` in each basis."""
    m = as_matrix(rho)
    out = tuple(float(np.clip(np.real(np.trace(_PROJ[b].minus @ m)), 0.0, 1.0)) for b in "XYZ")
    return out


def keyrate_of_state(rho, iec: float | None = None) -> KeyRateReport:
    m = as_matrix(rho)
    e_b = error_rates(m)[2]
    if iec is None:
        iec = binary_entropy(e_b)
    elif iec < 0:
        raise OutOfRange(f"reconciliation cost must be non-negative, got {iec}")
    phi = partial_dephase_matrix(m)
    c = rel_entropy_coherence(phi, "Z")
    return KeyRateReport.from_terms(c, iec, "state", TwoQubitState(phi), e_b=e_b)


def bb84_worstcase_state(e_b: float, e_p: float) -> TwoQubitState:
    """Bell-diagonal state attaining the BB84 minimum for given error rates."""
    _check_rate("e_b", e_b)
    _check_rate("e_p", e_p)
    return bell_diagonal(
        ((1 - e_b) * (1 - e_p), (1 - e_b) * e_p, e_b * (1 - e_p), e_b * e_p)
    )


def bb84_keyrate(e_b: float, e_p: float) -> KeyRateReport:
    """``1 - H(e_p) - H(e_b)``."""
    _check_rate("e_b", e_b)
    _check_rate("e_p", e_p)
    return KeyRateReport.from_terms(
        1.0 - binary_entropy(e_p),
        binary_entropy(e_b),
        "bb84",
        bb84_worstcase_state(e_b, e_p),
        e_b=e_b,
        e_p=e_p,
    )


def sixstate_keyrate(e_x: float, e_y: float, e_z: float) -> KeyRateReport:
    """``1 - H({p_i})`` with Bell weights reconstructed from the three error rates.

    Raises:
        InconsistentErrorRates: if a reconstructed weight is below -1e-12.
    """
    for name, e in (("e_x", e_x), ("e_y", e_y), ("e_z", e_z)):
        _check_rate(name, e, upper=1.0)
    p = BellProbs.from_error_rates(e_x, e_y, e_z)
    total = shannon_entropy(p.as_array())
    h_ez = binary_entropy(p.e_z)
    # split 1 - H(p) into coherence and reconciliation parts: H(p) = H(e_z) + rest
    return KeyRateReport.from_terms(
        1.0 - (total - h_ez),
        h_ez,
        "six",
        bell_diagonal(p),
        bell_probs=p,
    )
