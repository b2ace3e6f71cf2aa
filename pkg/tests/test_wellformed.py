import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfa_lab.machines import lnh_machine, lys_machine
from qfa_lab.quantum_rt import random_superop, random_unitary
from qfa_lab.wellformed import (CheckReport, check_local_2qfa, check_local_unidirectional,
                                check_stochastic, check_superop, check_unitary,
                                delta_from_unitaries, kraus_from_unidirectional,
                                unidirectional_to_2qfa)

R2 = 1 / np.sqrt(2)


def random_unidirectional(rng, nq, ns=3, nw=2):
    """Table whose per-symbol stacked Kraus family is an isometry."""
    delta = np.zeros((nq, ns, nq, nw), dtype=complex)
    for s in range(ns):
        u = random_unitary(rng, nq * nw)[:, :nq]  # orthonormal columns
        delta[:, s] = u.T.reshape(nq, nq, nw)
    dirs = [("left", "stay", "right")[i] for i in rng.integers(0, 3, nq)]
    return delta, dirs


def permutation_table(nq=3, ns=2):
    delta = np.zeros((nq, ns, nq, 1))
    for s in range(ns):
        for q in range(nq):
            delta[q, s, (q + s + 1) % nq, 0] = 1
    return delta


# ----------------------------------------------------------- stochastic


def test_stochastic_identity():
    assert check_stochastic([np.eye(3)]).passed


def test_stochastic_column_sum_witness():
    r = check_stochastic([[[0.5, 1], [0.5, 0.1]]])
    assert not r.passed
    (v,) = r.violations
    assert v.condition == "stochastic.column_sum"
    assert v.witness == (0, 1) and abs(v.measured - 1.1) < 1e-15


def test_stochastic_negative_entry():
    r = check_stochastic([[[1.5, 0], [-0.5, 1]]], labels=["a"])
    assert {v.condition for v in r.violations} == {"stochastic.nonnegative"}
    assert r.violations[0].witness == ("a", 1, 0)


def test_stochastic_fixtures():
    from qfa_lab.machinefile import load_machine
    from qfa_lab.machines import fixture_text
    m = load_machine(fixture_text("fair_coin_pfa.yaml"))
    assert check_stochastic(list(m.matrices.values())).passed


# -------------------------------------------------------------- superop


def test_superop_examples():
    assert check_superop([np.eye(2)]).passed
    assert check_superop([R2 * np.eye(2), R2 * np.eye(2)]).passed
    r = check_superop([np.eye(2), np.eye(2)])
    assert not r.passed
    np.testing.assert_array_equal(r.violations[0].detail, np.eye(2))


@given(st.integers(0, 2**31), st.integers(1, 4), st.integers(1, 3))
def test_random_superops_pass(seed, n, k):
    assert check_superop(random_superop(np.random.default_rng(seed), n, k)).passed


# -------------------------------------------------------------- unitary


def test_unitary_examples():
    assert check_unitary([np.eye(4)]).passed
    assert check_unitary([R2 * np.array([[1, 1], [1, -1]])]).passed
    r = check_unitary([R2 * np.array([[1, 1], [1, 1]])])
    assert not r.passed and r.violations[0].witness[0] == 0


def test_unitary_shape():
    r = check_unitary([np.ones((2, 3))])
    assert r.violations[0].condition == "unitary.shape"


# ---------------------------------------------------------- local 2QFA


def test_permutation_table_passes_everything():
    delta = permutation_table()
    assert check_local_unidirectional(delta).passed
    assert check_local_2qfa(unidirectional_to_2qfa(delta, ["right", "stay", "left"])).passed


@pytest.mark.parametrize("seed", range(12))
def test_unidirectional_implies_local(seed):
    rng = np.random.default_rng(seed)
    delta, dirs = random_unidirectional(rng, int(rng.integers(1, 5)))
    assert check_local_unidirectional(delta, dirs).passed
    assert check_local_2qfa(unidirectional_to_2qfa(delta, dirs)).passed


def test_perturbed_table_fails_case_one():
    delta = unidirectional_to_2qfa(permutation_table(), ["right", "stay", "left"])
    delta[1, 0, 2, 1, 0] += 1e-3
    r = check_local_2qfa(delta, symbols=["a", "b"], states=["x", "y", "z"])
    case1 = [v for v in r.violations if v.condition == "local2qfa.case1"]
    assert case1
    # only the norm of y's column under a moves
    assert {v.witness for v in case1} == {("y", "y", "a")}
    assert abs(case1[0].measured - 1e-6) < 1e-15


def test_case_two_detected():
    # one state moving right from one square and staying from the next overlaps on the target
    delta = np.zeros((2, 1, 2, 3, 1))
    delta[0, 0, 0, 2, 0] = 1  # 0 -> 0 right
    delta[1, 0, 0, 1, 0] = 1  # 1 -> 0 stay
    r = check_local_2qfa(delta)
    assert any(v.condition == "local2qfa.case2" for v in r.violations)


def test_case_three_detected():
    delta = np.zeros((2, 1, 2, 3, 1))
    delta[0, 0, 0, 2, 0] = 1  # 0 -> 0 right
    delta[1, 0, 0, 0, 0] = 1  # 1 -> 0 left
    r = check_local_2qfa(delta)
    assert any(v.condition == "local2qfa.case3" for v in r.violations)


def test_bad_table_shape():
    with pytest.raises(ValueError):
        check_local_2qfa(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        check_local_unidirectional(np.zeros((2, 2, 2, 1)), ["left"])


# ---------------------------------------------- unidirectional vs superop


@given(st.integers(0, 2**31), st.booleans())
def test_unidirectional_iff_superop(seed, perturb):
    rng = np.random.default_rng(seed)
    delta, dirs = random_unidirectional(rng, int(rng.integers(1, 4)))
    if perturb:
        idx = tuple(int(rng.integers(0, k)) for k in delta.shape)
        delta[idx] += 1e-3
    local = check_local_unidirectional(delta, dirs).passed
    families = kraus_from_unidirectional(delta)
    assert local == all(check_superop(f).passed for f in families)
    assert local != perturb


# ---------------------------------------------------- monotone, mutants


@given(st.integers(0, 2**31), st.floats(1e-6, 1e-2), st.floats(0.0, 1.0))
def test_failures_persist_at_smaller_tolerance(seed, size, shrink):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, 3)
    u[0, 0] += size
    tau = 1e-4
    if not check_unitary([u], tau).passed:
        assert not check_unitary([u], tau * shrink).passed
    k = [R2 * np.eye(2), R2 * np.eye(2) + size]
    if not check_superop(k, tau).passed:
        assert not check_superop(k, tau * shrink).passed
    a = np.array([[0.5, 0.5], [0.5 + size, 0.5]])
    if not check_stochastic([a], tau).passed:
        assert not check_stochastic([a], tau * shrink).passed


@pytest.mark.parametrize("make", [lnh_machine, lys_machine])
def test_fixture_unitaries_pass_and_mutants_fail(make):
    m = make()
    labels = list(m.unitaries)
    us = [m.unitaries[s] for s in labels]
    assert check_unitary(us, labels=labels).passed
    delta = delta_from_unitaries(us)
    assert check_local_unidirectional(delta, m.directions).passed
    us[0] = us[0].copy()
    us[0][0, 0] += 1e-3
    r = check_unitary(us, labels=labels)
    assert not r.passed and r.violations[0].witness[0] == labels[0]
    assert not check_local_unidirectional(delta_from_unitaries(us), m.directions).passed


# ------------------------------------------------------------ rendering


def test_report_render_and_json():
    r = check_stochastic([[[0.5, 1], [0.5, 0.1]]], labels=["a"]) + check_unitary([np.eye(2)])
    text = r.render()
    assert text.splitlines()[0] == "checks: stochastic, unitary"
    assert "FAIL (1 violation(s))" in text
    assert "stochastic.column_sum: witness [a 1]" in text
    doc = json.loads(r.to_json())
    assert doc["passed"] is False and doc["violations"][0]["witness"] == ["a", 1]


def test_empty_report_passes():
    assert CheckReport().passed and bool(CheckReport())
    assert json.loads(check_superop([np.eye(2)], label="a").to_json())["violations"] == []
