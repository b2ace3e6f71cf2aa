"""Real-time probabilistic finite automata and generalized finite automata."""
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, InputError, WellformednessError
from .wellformed import check_stochastic

CENT = "cent"
DOLLAR = "dollar"
END_MARKERS = (CENT, DOLLAR)

STOCHASTIC_TOL = 1e-12


def default_names(n: int, prefix: str = "q") -> tuple:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


def validate_alphabet(alphabet) -> tuple:
    alphabet = tuple(alphabet)
    for s in alphabet:
        if not isinstance(s, str) or len(s) != 1:
            raise InputError(f"alphabet symbols must be single characters, got {s!r}")
    if len(set(alphabet)) != len(alphabet):
        raise InputError(f"duplicate symbols in alphabet {alphabet}")
    return alphabet


def check_word(alphabet, w: str) -> None:
    for pos, ch in enumerate(w):
        if ch not in alphabet:
            raise InputError(f"symbol {ch!r} at position {pos} is not in the alphabet {list(alphabet)}")


def tilde(w: str) -> list:
    """The tape contents ``cent w dollar`` as a list of symbol keys."""
    return [CENT, *w, DOLLAR]


@dataclass(frozen=True)
class RtPfa:
    """Real-time PFA with left-stochastic matrices (columns sum to one).

    ``matrices`` maps every alphabet symbol plus ``"cent"`` and ``"dollar"``
    to an ``n x n`` array; ``matrices[s][j, k]`` is the probability of moving
    from state ``k`` to state ``j``. The initial state is index 0.
    """

    alphabet: tuple
    matrices: Mapping[str, np.ndarray]
    accepting: frozenset
    states: tuple = ()

    def __post_init__(self):
        alphabet = validate_alphabet(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        mats = {}
        for s in (*alphabet, CENT, DOLLAR):
            if s not in self.matrices:
                raise WellformednessError(f"missing transition matrix for symbol {s!r}")
            a = np.array(self.matrices[s], dtype=np.float64)
            a.setflags(write=False)
            mats[s] = a
        n = mats[CENT].shape[0]
        for s, a in mats.items():
            if a.shape != (n, n):
                raise DimensionError(f"matrix for {s!r} has shape {a.shape}, expected {(n, n)}")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "accepting", frozenset(int(i) for i in self.accepting))
        if any(not 0 <= i < n for i in self.accepting):
            raise WellformednessError(f"accepting set {sorted(self.accepting)} outside 0..{n - 1}")
        if not self.states:
            object.__setattr__(self, "states", default_names(n))
        elif len(self.states) != n:
            raise DimensionError(f"{len(self.states)} state names for {n} states")
        report = check_stochastic([mats[s] for s in (*alphabet, CENT, DOLLAR)], tol=STOCHASTIC_TOL,
                                  labels=[*alphabet, CENT, DOLLAR])
        if not report.passed:
            raise WellformednessError(f"RT-PFA is not stochastic:\n{report.render()}")

    @property
    def n(self) -> int:
        return self.matrices[CENT].shape[0]


@dataclass(frozen=True)
class Gfa:
    """Generalized finite automaton ``f A_w v0`` over real weights."""

    alphabet: tuple
    matrices: Mapping[str, np.ndarray]
    v0: np.ndarray
    f: np.ndarray
    states: tuple = field(default=())

    def __post_init__(self):
        alphabet = validate_alphabet(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        v0 = np.array(self.v0, dtype=np.float64).reshape(-1)
        f = np.array(self.f, dtype=np.float64).reshape(-1)
        n = v0.shape[0]
        if f.shape[0] != n:
            raise DimensionError(f"final vector has length {f.shape[0]}, initial vector {n}")
        mats = {}
        for s in alphabet:
            if s not in self.matrices:
                raise WellformednessError(f"missing transition matrix for symbol {s!r}")
            a = np.array(self.matrices[s], dtype=np.float64)
            if a.shape != (n, n):
                raise DimensionError(f"matrix for {s!r} has shape {a.shape}, expected {(n, n)}")
            a.setflags(write=False)
            mats[s] = a
        v0.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "f", f)
        if not self.states:
            object.__setattr__(self, "states", default_names(n, "g"))
        elif len(self.states) != n:
            raise DimensionError(f"{len(self.states)} state names for {n} states")

    @property
    def n(self) -> int:
        return self.v0.shape[0]


def rtpfa_state_vectors(m: RtPfa, w: str) -> list:
    """State vectors ``v_0, v_1, ..., v_{|w|+2}`` along ``cent w dollar``."""
    check_word(m.alphabet, w)
    v = np.zeros(m.n)
    v[0] = 1.0
    out = [v]
    for s in tilde(w):
        v = m.matrices[s] @ v
        out.append(v)
    return out


def run_rtpfa(m: RtPfa, w: str) -> float:
    """Acceptance probability: accepting mass of ``A_dollar A_w A_cent e_1``."""
    v = rtpfa_state_vectors(m, w)[-1]
    return float(sum(v[i] for i in sorted(m.accepting)))


def run_gfa(g: Gfa, w: str) -> float:
    """Raw acceptance value ``f A_{w_n} ... A_{w_1} v0``; may fall outside [0, 1]."""
    check_word(g.alphabet, w)
    v = np.array(g.v0)
    for s in w:
        v = g.matrices[s] @ v
    return float(g.f @ v)


def classify(value: float, cutpoint: float, mode: str = "strict", tol: float = 1e-9) -> bool:
    """Compare an acceptance value with a cutpoint.

    ``strict``: value > cutpoint; ``nonstrict``: value >= cutpoint;
    ``equals``: |value - cutpoint| <= tol.
    """
    if mode == "strict":
        return value > cutpoint
    if mode == "nonstrict":
        return value >= cutpoint
    if mode == "equals":
        return abs(value - cutpoint) <= tol
    raise ValueError(f"unknown classification mode {mode!r}")


def classify_all(value: float, cutpoint: float = 0.5, tol: float = 1e-9) -> dict:
    """All three verdicts; the two-sided (member above, non-member below) test
    is read off as ``strict`` together with ``not nonstrict``."""
    return {mode: classify(value, cutpoint, mode, tol) for mode in ("strict", "nonstrict", "equals")}


def random_rtpfa(rng: np.random.Generator, n: int, alphabet: Sequence[str] = ("a", "b"),
                 accepting=None) -> RtPfa:
    """Random RT-PFA with Dirichlet-distributed columns."""
    mats = {s: rng.dirichlet(np.ones(n), size=n).T for s in (*alphabet, CENT, DOLLAR)}
    if accepting is None:
        k = int(rng.integers(1, n + 1)) if n > 1 else 1
        accepting = rng.choice(n, size=k, replace=False)
    return RtPfa(tuple(alphabet), mats, frozenset(int(i) for i in accepting))
