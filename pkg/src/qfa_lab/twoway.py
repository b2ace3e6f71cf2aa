"""Configuration-space simulation of one-way and two-way Kondacs-Watrous QFAs.

A configuration is ``(state, head position)`` with positions ``1..|cent w dollar|``.
Configurations are indexed state-major, ``state * P + (position - 1)`` with
0-based states and ``P = len(w) + 2``. The induced operator is

    M[(q2, x + D(q2)), (q, x)] = U_{tape[x]}[q2, q]

with positions taken cyclically, so ``M`` is exactly unitary whenever every
``U_s`` is. Head moves past either end-marker from a configuration reachable
from the start are rejected as boundary violations when the operator is built,
so the cyclic wrap only ever touches configurations the run cannot visit.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
import scipy.sparse as sp

from .classical import CENT, DOLLAR, check_word, default_names, tilde, validate_alphabet
from .errors import DimensionError, WellformednessError
from .linalg import RunOutcome, WELLFORMED_TOL, accumulate_halting
from .quantum_rt import ACCEPTING, KINDS, NONHALTING, REJECTING
from .wellformed import DIRECTIONS, OFFSETS, check_unitary

AMP_EPS = 1e-12


@dataclass(frozen=True)
class TwoWayKwqfa:
    """Unidirectional two-way KWQFA.

    ``directions[q]`` is where the head moves on entering state ``q``:
    ``"left"``, ``"stay"`` or ``"right"``. ``specified`` optionally records,
    per symbol, which columns came from the machine description rather than
    from unitary completion; it drives the encoding audit.
    """

    alphabet: tuple
    unitaries: Mapping[str, np.ndarray]
    kinds: tuple
    directions: tuple
    initial: int = 0
    states: tuple = ()
    specified: Optional[Mapping[str, frozenset]] = field(default=None, compare=False)
    amp_text: Optional[Mapping[tuple, str]] = field(default=None, compare=False, repr=False)

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
        if any(k not in KINDS for k in kinds):
            raise WellformednessError(f"unknown state kinds in {kinds}")
        dirs = tuple(self.directions)
        if len(dirs) != n or any(d not in DIRECTIONS for d in dirs):
            raise WellformednessError(f"need one of {DIRECTIONS} per state, got {dirs}")
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "directions", dirs)
        if kinds[self.initial] != NONHALTING:
            raise WellformednessError("the initial state must be nonhalting")
        if not self.states:
            object.__setattr__(self, "states", default_names(n))
        elif len(self.states) != n:
            raise DimensionError(f"{len(self.states)} state names for {n} states")

    @property
    def n(self) -> int:
        return len(self.kinds)

    @property
    def is_one_way(self) -> bool:
        return all(d != "left" for d in self.directions)

    def offsets(self) -> np.ndarray:
        return np.array([OFFSETS[DIRECTIONS.index(d)] for d in self.directions], dtype=np.int64)

    def kind_codes(self) -> np.ndarray:
        return np.array([KINDS.index(k) for k in self.kinds], dtype=np.int64)


@dataclass(frozen=True)
class ConfigSpace:
    word: str
    tape: tuple
    n_states: int
    operator: sp.csr_matrix
    row_kind: np.ndarray = field(repr=False)

    @property
    def positions(self) -> int:
        return len(self.tape)

    @property
    def dim(self) -> int:
        return self.n_states * self.positions

    def index(self, state: int, position: int) -> int:
        return state * self.positions + (position - 1)

    def config(self, index: int) -> tuple:
        q, x = divmod(int(index), self.positions)
        return q, x + 1

    def blocks(self):
        """``(P_n M, P_a M, P_r M)`` as CSR matrices of full shape."""
        coo = self.operator.tocoo()
        kind = self.row_kind[coo.row]
        out = []
        for code in range(3):
            sel = kind == code
            out.append(sp.csr_matrix((coo.data[sel], (coo.row[sel], coo.col[sel])),
                                     shape=self.operator.shape))
        return tuple(out)


def _sparse_columns(m: TwoWayKwqfa):
    """Per symbol, the COO entries of U and an adjacency list of significant targets."""
    cache = {}
    for s, u in m.unitaries.items():
        r, c = np.nonzero(u)
        adj = [[] for _ in range(m.n)]
        for q2, q in zip(r, c):
            if abs(u[q2, q]) > AMP_EPS:
                adj[q].append((int(q2), complex(u[q2, q])))
        cache[s] = (r.astype(np.int64), c.astype(np.int64), u[r, c], adj)
    return cache


_CACHE_ATTR = "_qfa_sparse_cache"


def _machine_cache(m: TwoWayKwqfa):
    cache = m.__dict__.get(_CACHE_ATTR)
    if cache is None:
        cache = _sparse_columns(m)
        object.__setattr__(m, _CACHE_ATTR, cache)
    return cache


def find_boundary_violation(m: TwoWayKwqfa, w: str):
    """First reachable transition that moves the head off the tape, or ``None``.

    Reachability follows every amplitude above 1e-12 from nonhalting
    configurations, starting at ``(initial, 1)``; no cancellation is assumed.
    Returns ``(state, position, symbol, target_state, amplitude)``.
    """
    tape = tilde(w)
    P = len(tape)
    off = m.offsets()
    cache = _machine_cache(m)
    nonhalt = [k == NONHALTING for k in m.kinds]
    start = (m.initial, 1)
    seen = {start}
    queue = deque([start])
    while queue:
        q, x = queue.popleft()
        s = tape[x - 1]
        for q2, a in cache[s][3][q]:
            tx = x + int(off[q2])
            if tx < 1 or tx > P:
                return q, x, s, q2, a
            if nonhalt[q2] and (q2, tx) not in seen:
                seen.add((q2, tx))
                queue.append((q2, tx))
    return None


def build_config_operator(m: TwoWayKwqfa, w: str, check_boundary: bool = True) -> ConfigSpace:
    """Assemble the configuration-level operator ``M^w`` (CSR).

    Raises
    ------
    WellformednessError
        A reachable configuration sends nonzero amplitude to position 0 or
        ``|cent w dollar| + 1``.
    """
    check_word(m.alphabet, w)
    tape = tuple(tilde(w))
    P = len(tape)
    if check_boundary:
        hit = find_boundary_violation(m, w)
        if hit is not None:
            q, x, s, q2, a = hit
            raise WellformednessError(
                f"boundary violation on input {w!r}: state {m.states[q]} at position {x} "
                f"reading {s} sends amplitude {a:.6g} to {m.states[q2]} at position "
                f"{x + int(m.offsets()[q2])}")
    off = m.offsets()
    cache = _machine_cache(m)
    rows, cols, vals = [], [], []
    tape_arr = np.array(tape, dtype=object)
    for s in set(tape):
        xs = np.flatnonzero(tape_arr == s)  # 0-based positions
        r, c, v = cache[s][:3]
        tx = (xs[np.newaxis, :] + off[r][:, np.newaxis]) % P
        rows.append((r[:, np.newaxis] * P + tx).ravel())
        cols.append((c[:, np.newaxis] * P + xs[np.newaxis, :]).ravel())
        vals.append(np.repeat(v, xs.size))
    dim = m.n * P
    op = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(dim, dim), dtype=np.complex128)
    row_kind = np.repeat(m.kind_codes(), P)
    return ConfigSpace(w, tape, m.n, op, row_kind)


def run_twoway(m: TwoWayKwqfa, w: str, tol: float = 1e-12, max_steps: int = 100_000,
               backend=None) -> RunOutcome:
    """Halting probabilities of ``m`` on ``w``, accumulated until the
    nonhalting mass drops below ``tol`` or ``max_steps`` is reached."""
    cs = build_config_operator(m, w)
    nonhalt, acc, rej = cs.blocks()
    init = np.zeros(cs.dim, dtype=np.complex128)
    init[cs.index(m.initial, 1)] = 1.0
    return accumulate_halting(nonhalt, acc, rej, init, tol, max_steps, backend=backend)


@dataclass(frozen=True)
class TraceStep:
    step: int
    entries: tuple  # (state name, position, amplitude)
    accept_increment: float
    reject_increment: float


def path_trace(m: TwoWayKwqfa, w: str, step_limit: int, threshold: float = AMP_EPS) -> list:
    """Nonhalting superposition after each step, entries above ``threshold``.

    Step 0 is the initial configuration. The dump ends early once no
    nonhalting amplitude above ``threshold`` remains.
    """
    cs = build_config_operator(m, w)
    nonhalt, acc, rej = cs.blocks()
    psi = np.zeros(cs.dim, dtype=np.complex128)
    psi[cs.index(m.initial, 1)] = 1.0

    def entries(v):
        out = []
        for i in np.flatnonzero(np.abs(v) > threshold):
            q, x = cs.config(i)
            out.append((m.states[q], x, complex(v[i])))
        return tuple(out)

    trace = [TraceStep(0, entries(psi), 0.0, 0.0)]
    for t in range(1, step_limit + 1):
        da = acc @ psi
        dr = rej @ psi
        psi = nonhalt @ psi
        step = TraceStep(t, entries(psi), float(np.vdot(da, da).real), float(np.vdot(dr, dr).real))
        trace.append(step)
        if not step.entries:
            break
    return trace


def format_trace(trace) -> str:
    """Line-oriented table: ``step state position re im``."""
    lines = ["# step state position re im"]
    for st in trace:
        for name, x, a in st.entries:
            lines.append(f"{st.step} {name} {x} {a.real:.17g} {a.imag:.17g}")
    return "\n".join(lines)


def config_unitarity_defect(cs: ConfigSpace) -> float:
    m = cs.operator
    d = (m.conj().T @ m - sp.identity(cs.dim, format="csr")).tocoo()
    return float(np.max(np.abs(d.data), initial=0.0))


def accepting_rejecting(m: TwoWayKwqfa):
    return ([i for i, k in enumerate(m.kinds) if k == ACCEPTING],
            [i for i, k in enumerate(m.kinds) if k == REJECTING])
