"""Real-time quantum finite automata.

Two presentations are simulated: the general superoperator model (RT-QFA),
traced with density matrices and measured once at the end, and the
Kondacs-Watrous model (RT-KWQFA), traced with an unnormalised pure state and
measured after every symbol.
"""
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classical import CENT, DOLLAR, check_word, default_names, tilde, validate_alphabet
from .errors import ConservationError, DimensionError, WellformednessError
from .linalg import RunOutcome, WELLFORMED_TOL, dagger
from .wellformed import check_superop, check_unitary

NONHALTING, ACCEPTING, REJECTING = "nonhalting", "accepting", "rejecting"
KINDS = (NONHALTING, ACCEPTING, REJECTING)


@dataclass(frozen=True)
class SuperOp:
    """Kraus family ``{E_i}`` with ``sum E_i^H E_i = I``."""

    elements: tuple

    def __post_init__(self):
        els = []
        for e in self.elements:
            a = np.array(e, dtype=np.complex128)
            a.setflags(write=False)
            els.append(a)
        if not els:
            raise WellformednessError("a superoperator needs at least one Kraus element")
        n = els[0].shape[0]
        for a in els:
            if a.shape != (n, n):
                raise DimensionError(f"Kraus element shape {a.shape}, expected {(n, n)}")
        object.__setattr__(self, "elements", tuple(els))

    @property
    def n(self) -> int:
        return self.elements[0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(e @ rho @ dagger(e) for e in self.elements)

    def then(self, other: "SuperOp") -> "SuperOp":
        """Apply ``self`` first, then ``other``: elements ``E'_j E_i``."""
        return SuperOp(tuple(ej @ ei for ej in other.elements for ei in self.elements))


@dataclass(frozen=True)
class RtQfa:
    alphabet: tuple
    operators: Mapping[str, SuperOp]
    accepting: frozenset
    states: tuple = ()

    def __post_init__(self):
        alphabet = validate_alphabet(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        ops = {}
        for s in (*alphabet, CENT, DOLLAR):
            if s not in self.operators:
                raise WellformednessError(f"missing superoperator for symbol {s!r}")
            op = self.operators[s]
            ops[s] = op if isinstance(op, SuperOp) else SuperOp(tuple(op))
        n = ops[CENT].n
        for s, op in ops.items():
            if op.n != n:
                raise DimensionError(f"superoperator for {s!r} acts on {op.n} states, expected {n}")
            report = check_superop(op, WELLFORMED_TOL, label=s)
            if not report.passed:
                raise WellformednessError(f"not a superoperator:\n{report.render()}")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "accepting", frozenset(int(i) for i in self.accepting))
        if any(not 0 <= i < n for i in self.accepting):
            raise WellformednessError(f"accepting set {sorted(self.accepting)} outside 0..{n - 1}")
        if not self.states:
            object.__setattr__(self, "states", default_names(n))
        elif len(self.states) != n:
            raise DimensionError(f"{len(self.states)} state names for {n} states")

    @property
    def n(self) -> int:
        return self.operators[CENT].n

    def accept_projector(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        for i in self.accepting:
            p[i, i] = 1.0
        return p


def rtqfa_density_matrices(m: RtQfa, w: str) -> list:
    """``rho_0, rho_1, ..., rho_{|w|+2}`` along ``cent w dollar``."""
    check_word(m.alphabet, w)
    rho = np.zeros((m.n, m.n), dtype=np.complex128)
    rho[0, 0] = 1.0
    out = [rho]
    for s in tilde(w):
        rho = m.operators[s].apply(rho)
        out.append(rho)
    return out


def run_rtqfa(m: RtQfa, w: str) -> float:
    """``tr(P_a rho_final)`` with ``rho_0 = |q1><q1|``."""
    rho = rtqfa_density_matrices(m, w)[-1]
    return float(sum(rho[i, i].real for i in m.accepting))


@dataclass(frozen=True)
class RtKwqfa:
    """Real-time Kondacs-Watrous QFA; ``kinds[i]`` partitions the states."""

    alphabet: tuple
    unitaries: Mapping[str, np.ndarray]
    kinds: tuple
    initial: int = 0
    states: tuple = ()

    def __post_init__(self):
        alphabet = validate_alphabet(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        n = len(self.kinds)
        us = {}
        for s in (*alphabet, CENT, DOLLAR):
            if s not in self.unitaries:
                raise WellformednessError(f"missing unitary for symbol {s!r}")
            u = np.array(self.unitaries[s], dtype=np.complex128)
            if u.shape != (n, n):
                raise DimensionError(f"unitary for {s!r} has shape {u.shape}, expected {(n, n)}")
            u.setflags(write=False)
            us[s] = u
        labels = list(us)
        report = check_unitary([us[s] for s in labels], WELLFORMED_TOL, labels=labels)
        if not report.passed:
            raise WellformednessError(f"transition matrices are not unitary:\n{report.render()}")
        object.__setattr__(self, "unitaries", us)
        kinds = tuple(self.kinds)
        bad = [k for k in kinds if k not in KINDS]
        if bad:
            raise WellformednessError(f"unknown state kinds {bad}")
        object.__setattr__(self, "kinds", kinds)
        if kinds[self.initial] != NONHALTING:
            raise WellformednessError("the initial state must be nonhalting")
        if not self.states:
            object.__setattr__(self, "states", default_names(n))
        elif len(self.states) != n:
            raise DimensionError(f"{len(self.states)} state names for {n} states")

    @property
    def n(self) -> int:
        return len(self.kinds)

    def mask(self, kind: str) -> np.ndarray:
        return np.array([k == kind for k in self.kinds])


def rtkwqfa_steps(m: RtKwqfa, w: str):
    """Yield ``(symbol, U|u_{j-1}>, accept increment, reject increment)`` per step."""
    check_word(m.alphabet, w)
    nonhalt, acc, rej = m.mask(NONHALTING), m.mask(ACCEPTING), m.mask(REJECTING)
    u = np.zeros(m.n, dtype=np.complex128)
    u[m.initial] = 1.0
    for s in tilde(w):
        v = m.unitaries[s] @ u
        yield s, v, float(np.sum(np.abs(v[acc]) ** 2)), float(np.sum(np.abs(v[rej]) ** 2))
        u = np.where(nonhalt, v, 0.0)


def run_rtkwqfa(m: RtKwqfa, w: str) -> RunOutcome:
    """Accumulated accept/reject probabilities; leftover nonhalting mass is the residual."""
    p_acc = p_rej = 0.0
    residual = 1.0
    steps = 0
    nonhalt = m.mask(NONHALTING)
    for _, v, da, dr in rtkwqfa_steps(m, w):
        p_acc += da
        p_rej += dr
        new_residual = float(np.sum(np.abs(v[nonhalt]) ** 2))
        steps += 1
        if abs(p_acc + p_rej + new_residual - 1.0) > WELLFORMED_TOL:
            raise ConservationError(f"probability not conserved at step {steps}")
        if new_residual > residual * (1 + 1e-12) + 1e-15:
            raise ConservationError(f"residual increased at step {steps}")
        residual = new_residual
    return RunOutcome(p_acc, p_rej, residual, steps, converged=True)


def random_superop(rng: np.random.Generator, n: int, k: int) -> SuperOp:
    """Random Kraus family from the blocks of a random ``kn x n`` isometry."""
    g = rng.normal(size=(k * n, n)) + 1j * rng.normal(size=(k * n, n))
    q, _ = np.linalg.qr(g)
    return SuperOp(tuple(q[i * n:(i + 1) * n] for i in range(k)))


def random_rtqfa(rng: np.random.Generator, n: int, max_kraus: int = 3,
                 alphabet: Sequence[str] = ("a", "b")) -> RtQfa:
    ops = {s: random_superop(rng, n, int(rng.integers(1, max_kraus + 1)))
           for s in (*alphabet, CENT, DOLLAR)}
    k = int(rng.integers(1, n + 1))
    return RtQfa(tuple(alphabet), ops, frozenset(int(i) for i in rng.choice(n, size=k, replace=False)))


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_rtkwqfa(rng: np.random.Generator, n: int, alphabet: Sequence[str] = ("a", "b")) -> RtKwqfa:
    """Random unitaries; state 0 nonhalting, the rest drawn uniformly from the three kinds."""
    kinds = [NONHALTING] + [KINDS[int(i)] for i in rng.integers(0, 3, size=n - 1)]
    us = {s: random_unitary(rng, n) for s in (*alphabet, CENT, DOLLAR)}
    return RtKwqfa(tuple(alphabet), us, tuple(kinds))
