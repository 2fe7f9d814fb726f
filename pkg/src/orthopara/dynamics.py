"""Decay rates, lifetimes and quantum beats of the 1s2s superposition.

The two branches decay to the 1s^2 ground state with rates Gamma_or and
Gamma_pa; the matrix elements are taken real and non-negative, M_i =
sqrt(Gamma_i) (complex matrix elements are out of scope).  The instantaneous
decay rate of ``alpha|ortho> + beta|para>`` is

    |alpha|^2 Gamma_or + |beta|^2 Gamma_pa
        + 2 Re(conj(alpha) beta M_or M_pa exp(-i omega t)),

with omega = (E_pa - E_or) / hbar.  Averaging over an observation window T
multiplies the interference term by sin(omega T)/(omega T); for the physical
1s2s splitting (omega ~ 1e15 rad/s) that factor kills the interference for
any realistic T, leaving the weighted rate that sets the mean lifetime.
The un-averaged interference survives as quantum beats of the emission
probability at frequency omega.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR_EV_S
from .exceptions import NegativeTime, NonPositiveRate, NonPositiveWindow
from .states import SuperpositionState

__all__ = [
    "Branch",
    "DecayChannel",
    "BeatModel",
    "sinc_factor",
    "SINC_SERIES_THRESHOLD",
    "instantaneous_rate",
    "averaged_rate",
    "lifetime",
    "beat_signal",
    "beat_omega_from_levels",
]

# Below this |omega*T| the sinc factor switches to its Taylor series to avoid
# cancellation in sin(x)/x.
SINC_SERIES_THRESHOLD = 1e-6


class Branch(str, enum.Enum):
    ORTHO = "ortho"
    PARA = "para"


@dataclass(frozen=True)
class DecayChannel:
    """Per-branch decay data: level energy (eV), rate Gamma (s^-1), M = sqrt(Gamma)."""

    label: Branch
    energy: float
    gamma: float
    matrix_element: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise NonPositiveRate(f"decay rate must be > 0, got {self.gamma!r}")
        m = self.matrix_element
        if m is None:
            object.__setattr__(self, "matrix_element", math.sqrt(self.gamma))
        elif abs(m - math.sqrt(self.gamma)) > 1e-12 * math.sqrt(self.gamma):
            raise ValueError(
                f"matrix_element={m!r} inconsistent with sqrt(gamma)={math.sqrt(self.gamma)!r}"
            )


@dataclass(frozen=True)
class BeatModel:
    """The two-channel decay system with its beat angular frequency (rad/s)."""

    state: SuperpositionState
    ortho: DecayChannel
    para: DecayChannel
    omega: float

    def __post_init__(self):
        if self.ortho.label is not Branch.ORTHO or self.para.label is not Branch.PARA:
            raise ValueError("channels must be labeled ortho and para respectively")
        expected = beat_omega_from_levels(self.ortho.energy, self.para.energy)
        scale = max(abs(expected), abs(self.omega), 1.0)
        if abs(self.omega - expected) > 1e-12 * scale:
            raise ValueError(
                f"omega={self.omega!r} inconsistent with (E_pa - E_or)/hbar = {expected!r}"
            )

    @classmethod
    def from_channels(
        cls, state: SuperpositionState, ortho: DecayChannel, para: DecayChannel
    ) -> "BeatModel":
        return cls(
            state=state,
            ortho=ortho,
            para=para,
            omega=beat_omega_from_levels(ortho.energy, para.energy),
        )


def beat_omega_from_levels(e_or: float, e_pa: float) -> float:
    """Signed beat angular frequency (E_pa - E_or) / hbar in rad/s."""
    return (e_pa - e_or) / HBAR_EV_S


def sinc_factor(x: float) -> float:
    """sin(x)/x, via its Taylor series 1 - x^2/6 + x^4/120 for |x| < 1e-6."""
    if abs(x) < SINC_SERIES_THRESHOLD:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return math.sin(x) / x


def _weighted_sum(model: BeatModel) -> float:
    st = model.state
    return st.weight_ortho * model.ortho.gamma + st.weight_para * model.para.gamma


def instantaneous_rate(model: BeatModel, t):
    """Instantaneous decay rate (s^-1) at time(s) t (seconds).

    Accepts a scalar or array t and returns a matching float or ndarray.
    """
    st = model.state
    cross = np.conjugate(st.alpha) * st.beta * model.ortho.matrix_element * model.para.matrix_element
    t_arr = np.asarray(t, dtype=float)
    rate = _weighted_sum(model) + 2.0 * np.real(cross * np.exp(-1j * model.omega * t_arr))
    return float(rate) if np.isscalar(t) or t_arr.ndim == 0 else rate


def averaged_rate(model: BeatModel, window_T: float) -> float:
    """Decay rate (s^-1) averaged over an observation window [0, T].

    The interference term is Gamma_ab * sin(omega T)/(omega T) with
    Gamma_ab = 2 Re(conj(alpha) beta) M_or M_pa, which reduces to
    2 alpha beta M_or M_pa for real amplitudes.
    """
    if not (math.isfinite(window_T) and window_T > 0.0):
        raise NonPositiveWindow(f"window must be > 0, got {window_T!r}")
    st = model.state
    gamma_ab = (
        2.0
        * (np.conjugate(st.alpha) * st.beta).real
        * model.ortho.matrix_element
        * model.para.matrix_element
    )
    return _weighted_sum(model) + gamma_ab * sinc_factor(model.omega * window_T)


def lifetime(state: SuperpositionState, gamma_or: float, gamma_pa: float) -> float:
    """Mean lifetime 1 / (|alpha|^2 Gamma_or + |beta|^2 Gamma_pa) in seconds."""
    if not (math.isfinite(gamma_or) and gamma_or > 0.0):
        raise NonPositiveRate(f"gamma_or must be > 0, got {gamma_or!r}")
    if not (math.isfinite(gamma_pa) and gamma_pa > 0.0):
        raise NonPositiveRate(f"gamma_pa must be > 0, got {gamma_pa!r}")
    return 1.0 / (state.weight_ortho * gamma_or + state.weight_para * gamma_pa)


def beat_signal(model: BeatModel, t_grid) -> np.ndarray:
    """Quantum-beat emission probability on a time grid.

    Evaluates, with real amplitudes A_or = Re(alpha) M_or and
    A_pa = Re(beta) M_pa,

        A_or^2 exp(-2 Gamma_or t) + A_pa^2 exp(-2 Gamma_pa t)
            + 2 A_or A_pa exp(-(Gamma_or + Gamma_pa) t) cos(omega t)

    and returns an (n, 2) array of (t, value) rows, one per grid point.
    """
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size and t.min() < 0.0:
        raise NegativeTime("beat signal is defined for t >= 0 only")
    a_or = model.state.alpha.real * model.ortho.matrix_element
    a_pa = model.state.beta.real * model.para.matrix_element
    g_or, g_pa = model.ortho.gamma, model.para.gamma
    signal = (
        a_or**2 * np.exp(-2.0 * g_or * t)
        + a_pa**2 * np.exp(-2.0 * g_pa * t)
        + 2.0 * a_or * a_pa * np.exp(-(g_or + g_pa) * t) * np.cos(model.omega * t)
    )
    return np.column_stack([t, signal])
