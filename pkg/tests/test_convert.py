import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfa_lab.classical import CENT, DOLLAR, RtPfa, random_rtpfa, run_gfa, run_rtpfa
from qfa_lab.convert import (build_embedding, equiprobable_union, hermitian_compression,
                             orthogonalising_block, padded_matrices, real_pair_encoding,
                             rtpfa_to_rtkwqfa, rtpfa_to_rtqfa, rtqfa_to_gfa)
from qfa_lab.errors import ConstructionError, InputError
from qfa_lab.linalg import unitarity_defect, vec
from qfa_lab.quantum_rt import (ACCEPTING, NONHALTING, REJECTING, RtKwqfa, RtQfa, SuperOp,
                                random_rtkwqfa, random_rtqfa, rtkwqfa_steps, run_rtkwqfa, run_rtqfa)
from qfa_lab.wellformed import superop_defect

from conftest import random_complex


def words(max_len, alphabet="ab"):
    for k in range(max_len + 1):
        yield from map("".join, itertools.product(alphabet, repeat=k))


def fair_coin():
    half = np.full((2, 2), 0.5)
    return RtPfa(("a",), {"a": half, CENT: np.eye(2), DOLLAR: np.eye(2)}, {1})


# ------------------------------------------------------------ real pairs


@given(st.complex_numbers(max_magnitude=1e3), st.complex_numbers(max_magnitude=1e3))
def test_real_pair_is_homomorphism(x, y):
    ex, ey = real_pair_encoding(x), real_pair_encoding(y)
    scale = max(1.0, abs(x) * abs(y))
    assert np.max(np.abs(real_pair_encoding(x * y) - ex @ ey)) <= 1e-12 * scale
    assert np.max(np.abs(real_pair_encoding(x + y) - (ex + ey))) <= 1e-12 * max(1.0, abs(x) + abs(y))


def test_real_pair_blockwise(rng):
    a, b = random_complex(rng, 3, 2), random_complex(rng, 2, 4)
    np.testing.assert_allclose(real_pair_encoding(a @ b), real_pair_encoding(a) @ real_pair_encoding(b),
                               atol=1e-12)
    assert real_pair_encoding(1 + 2j).tolist() == [[1, 2], [-2, 1]]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_compression_round_trip(n, rng):
    L, Lp = hermitian_compression(n)
    assert L.shape == (n * n, 2 * n * n) and Lp.shape == (2 * n * n, n * n)
    assert set(np.unique(L)) <= {-1.0, 0.0, 1.0}
    g = random_complex(rng, n, n)
    rho = g + g.conj().T
    long = real_pair_encoding(vec(rho))[:, 0]
    assert np.max(np.abs(Lp @ L @ long - long)) <= 1e-12


# ------------------------------------------------------------- RT-QFA -> GFA


def test_one_state_identity_gfa():
    m = RtQfa(("a", "b"), {s: SuperOp((np.eye(1),)) for s in ("a", "b", CENT, DOLLAR)}, {0})
    g = rtqfa_to_gfa(m)
    assert g.n == 1
    for w in ("", "a", "abba"):
        assert abs(run_gfa(g, w) - 1) <= 1e-15


@pytest.mark.parametrize("seed", range(15))
def test_gfa_matches_density_matrices(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    m = random_rtqfa(rng, n)
    g = rtqfa_to_gfa(m)
    assert g.n == n * n
    for w in words(5):
        assert abs(run_rtqfa(m, w) - run_gfa(g, w)) <= 1e-9


def test_gfa_state_count_for_four_states(rng):
    assert rtqfa_to_gfa(random_rtqfa(rng, 4)).n == 16


# ----------------------------------------------------------- RT-PFA -> KWQFA


def test_fair_coin_embedding():
    m = rtpfa_to_rtkwqfa(fair_coin())
    assert m.n == 12
    assert all(unitarity_defect(u) <= 1e-9 for u in m.unitaries.values())
    assert m.kinds.count(NONHALTING) == 2
    assert m.kinds.count(ACCEPTING) == 5 and m.kinds.count(REJECTING) == 5
    out = run_rtkwqfa(m, "a")
    assert abs(out.p_acc - 0.5) <= 1e-12


def test_padded_end_marker_routes_by_acceptance():
    # state 1 accepts -> slot n; state 0 rejects -> slot n + 1
    a = padded_matrices(fair_coin())[DOLLAR]
    np.testing.assert_array_equal(a, [[0, 0, 0, 0], [0, 0, 0, 0], [0, 1, 1, 0], [1, 0, 0, 1]])


def check_bounds(emb, n):
    scale = emb.scale
    assert scale == 2 * n + 7
    for step in emb.loop:
        assert step.length < 2
        assert 2 * n + 6 < abs(step.diagonal) < 2 * n + 7
        assert all(0 <= b < 1 / (n + 3) for b in step.off_diagonal)


@pytest.mark.parametrize("seed", range(20))
def test_embedding_bounds_and_unitarity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    p = random_rtpfa(rng, n)
    emb = build_embedding(p)
    check_bounds(emb, n)
    assert emb.machine.n == 3 * n + 6
    assert len(emb.loop) == (n + 2) * 4
    for s, u in emb.machine.unitaries.items():
        assert unitarity_defect(u) <= 1e-9
        assert np.allclose(np.triu(emb.upper[s]), emb.upper[s])


def test_loop_rejects_too_small_scale():
    with pytest.raises(ConstructionError, match="column 0"):
        orthogonalising_block(np.array([[1.0, 0.0], [0.0, 1.0]]) * 3, 2.0, "a")


@pytest.mark.parametrize("seed", range(10))
def test_rescaled_embedding_invariant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    p = random_rtpfa(rng, n)
    emb = build_embedding(p)
    for w in words(6):
        v = np.zeros(n + 2)
        v[0] = 1.0
        for t, (s, uv, _, _) in enumerate(rtkwqfa_steps(emb.machine, w), start=1):
            v = emb.padded[s] @ v
            got = uv[:n + 2] * emb.scale ** t
            assert np.max(np.abs(got - v)) <= 1e-12 * max(1.0, np.abs(v).max())


@pytest.mark.parametrize("seed", range(10))
def test_decision_identity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    p = random_rtpfa(rng, n)
    m = rtpfa_to_rtkwqfa(p)
    scale = 2 * n + 7
    for w in words(2):
        lhs = run_rtkwqfa(m, w).p_acc - 0.5
        rhs = scale ** (-2 * (len(w) + 2)) * (run_rtpfa(p, w) - 0.5)
        assert abs(lhs - rhs) <= 1e-13


@pytest.mark.parametrize("seed", range(10))
def test_decision_equivalence(seed):
    rng = np.random.default_rng(100 + seed)
    p = random_rtpfa(rng, 2)
    m = rtpfa_to_rtkwqfa(p)
    for w in words(2):
        fp = run_rtpfa(p, w)
        if abs(fp - 0.5) > 1e-4:
            assert (run_rtkwqfa(m, w).p_acc > 0.5) == (fp > 0.5)


def test_completion_order_does_not_change_runs(rng):
    p = random_rtpfa(rng, 3)
    a, d = rtpfa_to_rtkwqfa(p, "ascending"), rtpfa_to_rtkwqfa(p, "descending")
    for w in words(4):
        assert abs(run_rtkwqfa(a, w).p_acc - run_rtkwqfa(d, w).p_acc) <= 1e-15


# ----------------------------------------------------------- RT-PFA -> RT-QFA


def test_permutation_pfa_gets_one_element_per_entry():
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    p = RtPfa(("a",), {"a": swap, CENT: np.eye(2), DOLLAR: np.eye(2)}, {1})
    q = rtpfa_to_rtqfa(p)
    assert len(q.operators["a"].elements) == 2
    for w in words(4, "a"):
        assert run_rtqfa(q, w) == run_rtpfa(p, w)


def test_fair_coin_quantum():
    assert abs(run_rtqfa(rtpfa_to_rtqfa(fair_coin()), "a") - 0.5) <= 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_quantum_simulation_exact(seed):
    rng = np.random.default_rng(seed)
    p = random_rtpfa(rng, int(rng.integers(1, 5)))
    q = rtpfa_to_rtqfa(p)
    for op in q.operators.values():
        assert np.max(np.abs(superop_defect(op.elements))) <= 1e-15
    for w in words(6):
        assert abs(run_rtqfa(q, w) - run_rtpfa(p, w)) <= 1e-12


# ------------------------------------------------------------------- union


def constant_machine(kind):
    kinds = (NONHALTING, kind)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    return RtKwqfa(("a", "b"), {"a": np.eye(2), "b": np.eye(2), CENT: swap, DOLLAR: np.eye(2)}, kinds)


def test_union_of_accept_and_reject():
    u = equiprobable_union(constant_machine(ACCEPTING), constant_machine(REJECTING))
    assert u.n == 5
    for w in words(3):
        assert abs(run_rtkwqfa(u, w).p_acc - 0.5) <= 1e-15


@pytest.mark.parametrize("seed", range(8))
def test_union_averages(seed):
    rng = np.random.default_rng(seed)
    m1 = random_rtkwqfa(rng, int(rng.integers(1, 5)))
    m2 = random_rtkwqfa(rng, int(rng.integers(1, 5)))
    u = equiprobable_union(m1, m2)
    self_union = equiprobable_union(m1, m1)
    for w in words(4):
        f1, f2 = run_rtkwqfa(m1, w).p_acc, run_rtkwqfa(m2, w).p_acc
        assert abs(run_rtkwqfa(u, w).p_acc - (f1 + f2) / 2) <= 1e-9
        assert abs(run_rtkwqfa(self_union, w).p_acc - f1) <= 1e-12


def test_union_alphabet_mismatch(rng):
    m1 = random_rtkwqfa(rng, 2, ("a", "b"))
    m2 = random_rtkwqfa(rng, 2, ("a", "c"))
    with pytest.raises(InputError):
        equiprobable_union(m1, m2)


def test_union_initial_split():
    m = constant_machine(ACCEPTING)
    u = equiprobable_union(m, m)
    col = u.unitaries[CENT][:, 0]
    # both copies start in their own initial state's image under the end-marker
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(col, [0, 0, r, 0, r], atol=1e-15)

