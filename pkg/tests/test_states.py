"""Superposition preparation, superselection check, weight constructors."""

import cmath
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orthopara.exceptions import NotNormalized, WeightOutOfRange
from orthopara.states import (
    SpinState,
    SuperpositionState,
    amplitudes_from_weights,
    prepare_superposition,
    superselection_allowed,
)

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def test_pure_up_capture_gives_pure_ortho():
    state = prepare_superposition(SpinState(1.0, 0.0))
    assert state.alpha == 1.0
    assert state.beta == 0.0


def test_spin_along_x_gives_equal_weights():
    state = prepare_superposition(SpinState(INV_SQRT2, INV_SQRT2))
    assert state.alpha == pytest.approx(INV_SQRT2)
    assert state.beta == pytest.approx(INV_SQRT2)


def test_spin_along_y_keeps_complex_phase():
    state = prepare_superposition(SpinState(INV_SQRT2, -1j * INV_SQRT2))
    assert state.alpha == pytest.approx(INV_SQRT2)
    assert state.beta == pytest.approx(-1j * INV_SQRT2)


def test_capture_is_identity_on_amplitudes():
    up, down = 0.6, complex(0.0, -0.8)
    state = prepare_superposition(SpinState(up, down))
    assert state.alpha == up and state.beta == down
    assert state.weight_ortho == abs(up) ** 2
    assert state.weight_para == abs(down) ** 2


@pytest.mark.parametrize("up,down", [(1.0, 1.0), (0.0, 0.0), (1.0, 1e-6)])
def test_unnormalized_spin_states_rejected(up, down):
    with pytest.raises(NotNormalized):
        SpinState(up, down)


def test_unnormalized_superposition_rejected():
    with pytest.raises(NotNormalized):
        SuperpositionState(0.9, 0.5)


# -- superselection ----------------------------------------------------------


@pytest.mark.parametrize("l_or,l_pa", [(0, 0), (1, 3), (5, 2)])
def test_superselection_allows_capture_states(l_or, l_pa):
    report = superselection_allowed(l_or, l_pa)
    assert report.allowed
    assert report.two_j_ortho % 2 == 1
    assert report.two_j_para % 2 == 1
    assert report.parity_ortho == report.parity_para == -1


@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=0, max_value=10_000))
def test_superselection_never_blocks_single_electron_capture(l_or, l_pa):
    report = superselection_allowed(l_or, l_pa)
    assert report.allowed
    assert report.two_j_ortho == 2 * l_or + 1
    assert report.two_j_para == 2 * l_pa + 1


def test_superselection_rejects_negative_l():
    with pytest.raises(ValueError):
        superselection_allowed(-1, 0)


# -- weight constructor --------------------------------------------------------


def test_full_ortho_weight():
    state = amplitudes_from_weights(1.0, phase=1.234)
    assert state.alpha == 1.0
    assert state.beta == 0.0


def test_symmetric_weights():
    state = amplitudes_from_weights(0.5, phase=0.0)
    assert state.alpha == pytest.approx(INV_SQRT2)
    assert state.beta == pytest.approx(INV_SQRT2)


def test_quarter_weight_with_pi_phase():
    state = amplitudes_from_weights(0.25, phase=math.pi)
    assert state.alpha == pytest.approx(0.5)
    assert state.beta == pytest.approx(-math.sqrt(0.75), abs=1e-12)
    # re-square to recover the weights
    assert state.weight_ortho == pytest.approx(0.25, abs=1e-12)
    assert state.weight_para == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("w", [-0.1, 1.1, float("nan")])
def test_weight_out_of_range(w):
    with pytest.raises(WeightOutOfRange):
        amplitudes_from_weights(w)


@given(
    w=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    phase=st.floats(min_value=-10.0, max_value=10.0),
)
def test_weight_roundtrip(w, phase):
    state = amplitudes_from_weights(w, phase)
    assert abs(state.weight_ortho - w) < 1e-12
    assert abs(state.weight_para - (1.0 - w)) < 1e-12
    assert state.alpha.imag == 0.0 and state.alpha.real >= 0.0  # phase convention


def test_state_dict_roundtrip():
    state = amplitudes_from_weights(0.3, phase=0.7)
    assert SuperpositionState.from_dict(state.to_dict()) == state
