"""Generator validation, exact chain sampling, stationary distributions."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpsfde.errors import NegativeOffDiagonal, ReducibleChain, RowSumNonZero
from hpsfde.markov import (GeneratorMatrix, make_generator,
                           sample_regime_path, stationary_distribution)

TWO_STATE = [[-1.0, 1.0], [2.0, -2.0]]


def test_make_generator_accepts_valid_matrix():
    g = make_generator(TWO_STATE)
    assert isinstance(g, GeneratorMatrix)
    assert g.n_states == 2
    assert g.exit_rate(1) == 1.0
    assert g.exit_rate(2) == 2.0


def test_make_generator_rejects_non_square():
    with pytest.raises(ValueError):
        make_generator([[-1.0, 1.0]])


def test_make_generator_rejects_negative_off_diagonal():
    with pytest.raises(NegativeOffDiagonal):
        make_generator([[-1.0, -1.0], [2.0, -2.0]])


def test_make_generator_rejects_bad_row_sum():
    with pytest.raises(RowSumNonZero):
        make_generator([[-1.0, 1.5], [2.0, -2.0]])


def test_make_generator_tolerates_tiny_row_sum_error():
    g = make_generator([[-1.0, 1.0 + 1e-13], [2.0, -2.0]])
    assert g.n_states == 2


def test_generator_rates_read_only():
    g = make_generator(TWO_STATE)
    with pytest.raises(ValueError):
        g.rates[0, 0] = 5.0


def test_sample_path_structure():
    g = make_generator(TWO_STATE)
    rp = sample_regime_path(g, 1, 1.0, 50.0, seed=123)
    assert rp.states[0] == 1
    assert len(rp.states) == len(rp.jump_times) + 1
    assert np.all(np.diff(rp.jump_times) > 0)
    assert np.all(rp.jump_times > 1.0)
    assert np.all(rp.jump_times < 50.0)
    # consecutive states differ (jump chain never self-loops)
    assert np.all(np.diff(rp.states) != 0)


def test_sample_path_deterministic_per_seed():
    g = make_generator(TWO_STATE)
    a = sample_regime_path(g, 1, 1.0, 100.0, seed=7)
    b = sample_regime_path(g, 1, 1.0, 100.0, seed=7)
    c = sample_regime_path(g, 1, 1.0, 100.0, seed=8)
    assert np.array_equal(a.jump_times, b.jump_times)
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.jump_times, c.jump_times)


def test_state_at_right_continuous():
    g = make_generator(TWO_STATE)
    rp = sample_regime_path(g, 1, 1.0, 20.0, seed=5)
    assert rp.n_jumps > 0
    s = rp.jump_times[0]
    after = rp.states[1]
    assert rp.state_at(s) == after
    assert rp.state_at(s - 1e-9) != after or rp.states[0] == after
    assert rp.state_at(1.0) == 1


def test_single_state_chain_has_no_jumps():
    g = make_generator([[0.0]])
    rp = sample_regime_path(g, 1, 1.0, 10.0, seed=0)
    assert rp.n_jumps == 0
    assert rp.state_at(5.0) == 1


def test_absorbing_state_stops_jumping():
    g = make_generator([[-1.0, 1.0], [0.0, 0.0]])
    rp = sample_regime_path(g, 1, 1.0, 1000.0, seed=3)
    assert rp.n_jumps == 1
    assert rp.state_at(999.0) == 2


def test_occupation_fractions_sum_to_one():
    g = make_generator(TWO_STATE)
    rp = sample_regime_path(g, 1, 1.0, 30.0, seed=11)
    occ = rp.occupation_fractions(2)
    assert occ.shape == (2,)
    assert abs(occ.sum() - 1.0) < 1e-12


def test_long_run_occupation_near_stationary():
    # ergodic theorem sanity run; the tight version is an acceptance test
    g = make_generator(TWO_STATE)
    rp = sample_regime_path(g, 1, 1.0, 5000.0, seed=42)
    occ = rp.occupation_fractions(2)
    assert abs(occ[0] - 2.0 / 3.0) < 0.03
    assert abs(occ[1] - 1.0 / 3.0) < 0.03


def test_stationary_distribution_two_state_exact():
    pi = stationary_distribution(make_generator(TWO_STATE))
    assert abs(pi[0] - 2.0 / 3.0) < 1e-12
    assert abs(pi[1] - 1.0 / 3.0) < 1e-12


def test_stationary_distribution_single_state():
    pi = stationary_distribution(make_generator([[0.0]]))
    assert pi.shape == (1,)
    assert pi[0] == 1.0


def test_stationary_distribution_solves_pi_gamma_zero():
    rates = [[-2.0, 1.5, 0.5], [0.3, -0.8, 0.5], [1.0, 2.0, -3.0]]
    g = make_generator(rates)
    pi = stationary_distribution(g)
    assert np.all(pi >= 0)
    assert abs(pi.sum() - 1.0) < 1e-12
    assert np.max(np.abs(pi @ g.rates)) < 1e-12


def test_stationary_distribution_rejects_reducible_chain():
    # two disconnected blocks: the stationary law is not unique
    rates = [[-1.0, 1.0, 0.0, 0.0],
             [1.0, -1.0, 0.0, 0.0],
             [0.0, 0.0, -2.0, 2.0],
             [0.0, 0.0, 2.0, -2.0]]
    with pytest.raises(ReducibleChain):
        stationary_distribution(make_generator(rates))


def test_absorbing_chain_stationary_is_point_mass():
    g = make_generator([[-1.0, 1.0], [0.0, 0.0]])
    pi = stationary_distribution(g)
    assert abs(pi[0]) < 1e-12
    assert abs(pi[1] - 1.0) < 1e-12


@st.composite
def generators(draw):
    n = draw(st.integers(min_value=2, max_value=4))
    rows = []
    for i in range(n):
        off = [draw(st.floats(min_value=0.0, max_value=5.0)) for _ in
               range(n - 1)]
        row = off[:i] + [-sum(off)] + off[i:]
        rows.append(row)
    return rows


@given(generators(), st.integers(min_value=0, max_value=2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_sampled_paths_respect_generator_support(rates, seed):
    g = make_generator(rates)
    rp = sample_regime_path(g, 1, 1.0, 11.0, seed=seed)
    assert np.all(rp.states >= 1)
    assert np.all(rp.states <= g.n_states)
    assert np.all(np.diff(rp.jump_times) > 0)
    # a state is only left through a positive rate
    for s_from, s_to in zip(rp.states[:-1], rp.states[1:]):
        assert g.rates[s_from - 1, s_to - 1] > 0.0
