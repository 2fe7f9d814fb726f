"""Ortho/para superposition amplitudes from electron capture.

A He+ ion holding a spin-up electron captures an incident electron prepared
in ``a|up>_z + b|down>_z``.  Because the capture Hamiltonian is symmetric in
the two identical electrons it acts linearly, so the atom ends up in
``a|ortho> + b|para>``: the capture map is the identity on the amplitude
pair.  The (-1)^(2J) superselection check never forbids these states (single
electron capture gives 2J = 2l + 1, odd for every l), but the parity report
is kept for auditability.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .constants import NORM_TOL
from .exceptions import NotNormalized, WeightOutOfRange

__all__ = [
    "SpinState",
    "SuperpositionState",
    "SuperselectionReport",
    "prepare_superposition",
    "superselection_allowed",
    "amplitudes_from_weights",
]


def _check_normalized(a: complex, b: complex, what: str) -> None:
    norm_sq = abs(a) ** 2 + abs(b) ** 2
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise NotNormalized(f"{what}: |a|^2 + |b|^2 = {norm_sq!r}, expected 1 within {NORM_TOL}")


@dataclass(frozen=True)
class SpinState:
    """Incident electron spin along z: up_amplitude |up>_z + down_amplitude |down>_z."""

    up_amplitude: complex
    down_amplitude: complex

    def __post_init__(self):
        _check_normalized(self.up_amplitude, self.down_amplitude, "SpinState")


@dataclass(frozen=True)
class SuperpositionState:
    """Amplitude pair over the ortho (alpha) and para (beta) branches."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        _check_normalized(self.alpha, self.beta, "SuperpositionState")

    @property
    def weight_ortho(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def weight_para(self) -> float:
        return abs(self.beta) ** 2

    def to_dict(self) -> dict:
        return {
            "alpha": {"re": self.alpha.real, "im": self.alpha.imag},
            "beta": {"re": self.beta.real, "im": self.beta.imag},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SuperpositionState":
        return cls(
            alpha=complex(d["alpha"]["re"], d["alpha"]["im"]),
            beta=complex(d["beta"]["re"], d["beta"]["im"]),
        )


@dataclass(frozen=True)
class SuperselectionReport:
    """(-1)^(2J) parities of both branches and the resulting verdict."""

    allowed: bool
    two_j_ortho: int
    two_j_para: int
    parity_ortho: int  # (-1)^(2J), +1 or -1
    parity_para: int


def prepare_superposition(incident: SpinState) -> SuperpositionState:
    """Capture map: amplitudes carry over unchanged, up -> ortho, down -> para."""
    return SuperpositionState(alpha=incident.up_amplitude, beta=incident.down_amplitude)


def superselection_allowed(l_ortho: int, l_para: int) -> SuperselectionReport:
    """Check the (-1)^(2J) superselection rule for the two branches.

    With a single 1s core electron and an outer electron of orbital quantum
    number l, 2J = 2l + 1 is odd on both branches, so the parities always
    match; the report records them anyway.
    """
    if l_ortho < 0 or l_para < 0:
        raise ValueError("orbital quantum numbers must be >= 0")
    two_j_or = 2 * l_ortho + 1
    two_j_pa = 2 * l_para + 1
    parity_or = -1 if two_j_or % 2 else 1
    parity_pa = -1 if two_j_pa % 2 else 1
    return SuperselectionReport(
        allowed=parity_or == parity_pa,
        two_j_ortho=two_j_or,
        two_j_para=two_j_pa,
        parity_ortho=parity_or,
        parity_para=parity_pa,
    )


def amplitudes_from_weights(w_or: float, phase: float = 0.0) -> SuperpositionState:
    """Build a state with ortho weight w_or and relative phase on the para branch.

    alpha = sqrt(w_or) (real, non-negative by convention),
    beta = sqrt(1 - w_or) * exp(i * phase).
    """
    if not (math.isfinite(w_or) and 0.0 <= w_or <= 1.0):
        raise WeightOutOfRange(f"ortho weight must lie in [0, 1], got {w_or!r}")
    alpha = complex(math.sqrt(w_or))
    beta = math.sqrt(1.0 - w_or) * cmath.exp(1j * phase)
    return SuperpositionState(alpha=alpha, beta=beta)
