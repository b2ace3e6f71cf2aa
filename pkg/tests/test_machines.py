import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfa_lab.errors import InputError
from qfa_lab.machines import (ORACLES, encoding_audit, fixture_names, in_lfre, in_lnh, in_lys,
                              lnh_machine, lys_machine, oracle, strings_upto)
from qfa_lab.quantum_rt import ACCEPTING, NONHALTING, REJECTING
from qfa_lab.twoway import run_twoway

R2 = 1 / np.sqrt(2)


def column(m, symbol, state):
    u = m.unitaries[symbol]
    col = u[:, m.states.index(state)]
    return {m.states[k]: complex(col[k]) for k in np.flatnonzero(np.abs(col) > 1e-12)}


def census(m):
    return tuple(m.kinds.count(k) for k in (NONHALTING, ACCEPTING, REJECTING))


def test_fixtures_shipped():
    assert {"lnh.yaml", "lys.yaml"} <= set(fixture_names())


def test_lnh_census_and_directions():
    m = lnh_machine()
    assert m.n == 63 and census(m) == (27, 18, 18)
    assert m.is_one_way
    for name, d in zip(m.states, m.directions):
        if name[0] == "w":
            assert d == "stay"
        elif name[0] in "qpar":
            assert d == "right", name


def test_lnh_start_splits_into_two_paths():
    assert column(lnh_machine(), "cent", "q0") == pytest.approx({"q1": R2, "p1": R2}, abs=1e-15)


def test_lys_census_and_transitions():
    m = lys_machine()
    assert m.n == 19 and census(m) == (9, 5, 5)
    assert not m.is_one_way
    assert column(m, "b", "q1") == pytest.approx({"w1": R2, "r1": R2}, abs=1e-15)
    assert column(m, "cent", "p1") == {"p2": 1}
    assert m.directions[m.states.index("p2")] == "right"
    assert {s for s, d in zip(m.states, m.directions) if d == "left"} == {"p1", "r3"}


def test_twin_halting_states_paired():
    for m in (lnh_machine(), lys_machine()):
        acc = sorted(s for s, k in zip(m.states, m.kinds) if k == ACCEPTING)
        rej = sorted(s for s, k in zip(m.states, m.kinds) if k == REJECTING)
        assert [s[1:] for s in acc] == [s[1:] for s in rej]


@pytest.mark.parametrize("make", [lnh_machine, lys_machine])
def test_encoding_audit_clean(make):
    report = encoding_audit(make(), 6)
    assert report.passed, report


def test_audit_flags_unspecified_reachable_column():
    from qfa_lab.machinefile import load_machine
    text = """
type: kwqfa-1way
alphabet: [a]
states: [[s, nonhalting, right], [t, nonhalting, right], [A, accepting, stay], [R, rejecting, stay]]
transitions:
  cent: [[s, s, "1"]]
  a: [[s, t, "1"]]
  dollar: [[s, A, "1"]]
"""
    report = encoding_audit(load_machine(text), 2)
    assert ("t", "dollar") in report.unspecified and ("t", "a") in report.unspecified
    assert report.unreferenced == ("R",)
    assert not report.passed


@pytest.mark.parametrize("w,expected", [("abab", True), ("aabab", False), ("aababab", True),
                                        ("aabaab", True), ("ab", False), ("", False),
                                        ("abba", False), ("bab", False), ("aabab" + "ab", True)])
def test_lnh_oracle(w, expected):
    assert in_lnh(w) is expected


@pytest.mark.parametrize("w,expected", [("abaa", True), ("aba", False), ("ab", False),
                                        ("aabaaa", True), ("aabaaaaaa", True), ("aabaaaa", False),
                                        ("ba", False), ("abaab", False)])
def test_lys_oracle(w, expected):
    assert in_lys(w) is expected


def test_lfre_oracle():
    assert in_lfre("aabaa") and not in_lfre("aaba") and not in_lfre("b")


def test_oracle_lookup():
    assert oracle("lnh")("abab")
    assert set(ORACLES) == {"lnh", "lys", "lfre"}
    with pytest.raises(InputError, match="unknown oracle"):
        oracle("nope")


def brute_lnh(w):
    parts = w.split("b")
    if not w.endswith("b") or len(parts) < 3:
        return False
    blocks = [len(p) for p in parts[:-1]]
    if min(blocks) == 0:
        return False
    return any(blocks[0] == sum(blocks[1:k + 1]) for k in range(1, len(blocks)))


@given(st.text(alphabet="ab", max_size=14))
def test_lnh_oracle_matches_brute_force(w):
    assert in_lnh(w) == brute_lnh(w)


@given(st.integers(2, 6), st.integers(0, 30))
def test_lys_oracle_arithmetic(n, m):
    assert in_lys("a" * (n - 1) + "b" + "a" * m) == (m > 0 and m % n == 0)


def test_strings_upto_shortlex():
    assert list(strings_upto("ab", 2)) == ["", "a", "b", "aa", "ab", "ba", "bb"]
    assert sum(1 for _ in strings_upto("ab", 12)) == 8191


def test_completion_invariance_short():
    asc, desc = lnh_machine("ascending"), lnh_machine("descending")
    assert any(not np.allclose(asc.unitaries[s], desc.unitaries[s]) for s in asc.unitaries)
    for w in strings_upto("ab", 5):
        a, d = run_twoway(asc, w), run_twoway(desc, w)
        assert abs(a.p_acc - d.p_acc) <= 1e-12 and abs(a.p_rej - d.p_rej) <= 1e-12
