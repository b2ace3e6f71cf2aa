"""Machine-to-machine reductions.

* ``rtqfa_to_gfa``: superoperator machine to an ``n**2``-state real GFA.
* ``rtpfa_to_rtkwqfa``: stochastic matrices embedded in unitaries with
  ``3n + 6`` states.
* ``rtpfa_to_rtqfa``: exact simulation with one Kraus element per nonzero
  transition probability.
* ``equiprobable_union``: run two Kondacs-Watrous machines with probability
  one half each.
"""
from dataclasses import dataclass

import numpy as np

from .classical import CENT, DOLLAR, Gfa, RtPfa
from .errors import ConstructionError, InputError
from .linalg import complete_to_unitary, kron, vec
from .quantum_rt import ACCEPTING, NONHALTING, REJECTING, RtKwqfa, RtQfa, SuperOp

# ---------------------------------------------------------------- real pairs


def real_pair_encoding(z) -> np.ndarray:
    """``a + bi`` as the real block ``[[a, b], [-b, a]]``; arrays map blockwise."""
    z = np.asarray(z, dtype=np.complex128)
    a, b = z.real, z.imag
    if z.ndim == 0:
        return np.array([[a, b], [-b, a]])
    if z.ndim == 1:
        z = z.reshape(-1, 1)
        a, b = z.real, z.imag
    r, c = z.shape
    out = np.empty((2 * r, 2 * c))
    out[0::2, 0::2] = a
    out[0::2, 1::2] = b
    out[1::2, 0::2] = -b
    out[1::2, 1::2] = a
    return out


def hermitian_compression(n: int):
    """``(L, L')`` between real-pair vectors of ``vec(rho)`` and ``n**2`` reals.

    Vectors on the long side hold ``(Re x_k, -Im x_k)`` at ``(2k, 2k+1)``,
    the first column of the real-pair block of entry ``x_k``. The short
    side keeps ``Re rho[i, i]`` at slot ``(i, i)`` and, for ``i < j``,
    ``Re rho[i, j]`` at ``(i, j)`` and ``Im rho[i, j]`` at ``(j, i)``.
    ``L' @ L`` is the identity on encodings of Hermitian matrices.
    """
    big = 2 * n * n
    L = np.zeros((n * n, big))
    Lp = np.zeros((big, n * n))
    for i in range(n):
        for j in range(n):
            k = i * n + j
            if i == j:
                L[k, 2 * k] = 1.0
                Lp[2 * k, k] = 1.0
            elif i < j:
                kt = j * n + i
                L[k, 2 * k] = 1.0
                L[kt, 2 * k + 1] = -1.0
                # rho[i, j] = x + iy -> (x, -y); rho[j, i] = x - iy -> (x, y)
                Lp[2 * k, k] = 1.0
                Lp[2 * k + 1, kt] = -1.0
                Lp[2 * kt, k] = 1.0
                Lp[2 * kt + 1, kt] = 1.0
    return L, Lp


def _lifted(op: SuperOp) -> np.ndarray:
    """``sum_i E_i kron conj(E_i)``: acts on ``vec(rho)``."""
    return sum(kron(e, np.conj(e)) for e in op.elements)


def rtqfa_to_gfa(m: RtQfa) -> Gfa:
    """Real GFA with ``n**2`` states and the same acceptance function."""
    n = m.n
    rho0 = np.zeros((n, n), dtype=np.complex128)
    rho0[0, 0] = 1.0
    v0 = vec(m.operators[CENT].apply(rho0))
    f = vec(m.accept_projector()) @ _lifted(m.operators[DOLLAR])
    L, Lp = hermitian_compression(n)
    v0_long = real_pair_encoding(v0)[:, 0]
    f_long = real_pair_encoding(f.reshape(1, -1))[0]
    mats = {s: L @ real_pair_encoding(_lifted(m.operators[s])) @ Lp for s in m.alphabet}
    names = tuple(f"{a}.{b}" for a in m.states for b in m.states)
    return Gfa(m.alphabet, mats, L @ v0_long, f_long @ Lp, states=names)


# ----------------------------------------------------- stochastic to unitary


@dataclass(frozen=True)
class LoopStep:
    """One pass of the column-orthogonalising loop for symbol ``symbol``."""

    symbol: str
    i: int
    length: float  # column length before row i is written
    diagonal: float  # b[i, i]
    off_diagonal: tuple  # b[i, j] for j > i


@dataclass(frozen=True)
class KwqfaEmbedding:
    machine: RtKwqfa
    scale: float  # l
    padded: dict  # symbol -> (n+2)x(n+2) matrix holding the PFA
    upper: dict  # symbol -> upper-triangular B
    loop: tuple  # LoopStep records


def padded_matrices(p: RtPfa) -> dict:
    """``(n+2) x (n+2)`` matrices with two absorbing slots; the end-marker
    matrix routes accepting mass to slot ``n`` and the rest to ``n + 1``."""
    n = p.n
    out = {}
    for s in (*p.alphabet, CENT, DOLLAR):
        a = np.zeros((n + 2, n + 2))
        a[:n, :n] = p.matrices[s]
        a[n:, n:] = np.eye(2)
        out[s] = a
    t = np.zeros((n + 2, n + 2))
    t[n:, n:] = np.eye(2)
    for i in range(n):
        t[n if i in p.accepting else n + 1, i] = 1.0
    out[DOLLAR] = t @ out[DOLLAR]
    return out


def orthogonalising_block(a: np.ndarray, scale: float, symbol: str = ""):
    """Upper-triangular ``B`` making the columns of ``[a; B]`` orthogonal with length ``scale``.

    Row ``i`` of ``B`` is written once: the diagonal tops column ``i`` up to
    length ``scale``, then ``b[i, j] = <col_i, col_j> / |b[i, i]|`` cancels
    the current overlap with each later column.
    """
    k = a.shape[0]
    b = np.zeros((k, k))
    steps = []
    for i in range(k):
        length = float(np.sqrt(a[:, i] @ a[:, i] + b[:, i] @ b[:, i]))
        if length >= scale:
            raise ConstructionError(
                f"column {i} of {symbol!r} has length {length:.6g} >= l = {scale:g}")
        b[i, i] = -np.sqrt(scale * scale - length * length)
        for j in range(i + 1, k):
            overlap = a[:, i] @ a[:, j] + b[:i, i] @ b[:i, j]
            b[i, j] = overlap / abs(b[i, i])
        steps.append(LoopStep(symbol, i, length, float(b[i, i]), tuple(b[i, i + 1:])))
    return b, steps


def build_embedding(p: RtPfa, order: str = "ascending") -> KwqfaEmbedding:
    """Full record of the RT-PFA to RT-KWQFA embedding, including loop values."""
    n = p.n
    k = n + 2
    scale = float(2 * n + 7)
    padded = padded_matrices(p)
    unitaries, uppers, loop = {}, {}, []
    for s, a in padded.items():
        b, steps = orthogonalising_block(a, scale, s)
        uppers[s] = b
        loop.extend(steps)
        cols = np.vstack([a / scale, b / (np.sqrt(2) * scale), b / (np.sqrt(2) * scale)])
        unitaries[s] = complete_to_unitary(cols, order=order)
    kinds = [NONHALTING] * n + [ACCEPTING, REJECTING] + [ACCEPTING] * k + [REJECTING] * k
    names = ([*p.states, "acc", "rej"] + [f"pa{i + 1}" for i in range(k)]
             + [f"pr{i + 1}" for i in range(k)])
    machine = RtKwqfa(p.alphabet, unitaries, tuple(kinds), 0, tuple(names))
    return KwqfaEmbedding(machine, scale, padded, uppers, tuple(loop))


def rtpfa_to_rtkwqfa(p: RtPfa, order: str = "ascending") -> RtKwqfa:
    """RT-KWQFA with ``3n + 6`` states deciding the same cutpoint-1/2 language.

    ``f_M(w) - 1/2 == l**(-2(|w| + 2)) * (f_P(w) - 1/2)`` with ``l = 2n + 7``.
    """
    return build_embedding(p, order).machine


# ------------------------------------------------------ stochastic to Kraus


def rtpfa_to_rtqfa(p: RtPfa) -> RtQfa:
    """Kraus elements ``sqrt(A[j, k]) |j><k|`` for every positive entry."""
    ops = {}
    for s in (*p.alphabet, CENT, DOLLAR):
        a = p.matrices[s]
        els = []
        for j, k in zip(*np.nonzero(a > 0)):
            e = np.zeros((p.n, p.n))
            e[j, k] = np.sqrt(a[j, k])
            els.append(e)
        ops[s] = SuperOp(tuple(els))
    return RtQfa(p.alphabet, ops, p.accepting, states=p.states)


# ---------------------------------------------------------------- union


def equiprobable_union(m1: RtKwqfa, m2: RtKwqfa) -> RtKwqfa:
    """Machine accepting with probability ``(f_1(w) + f_2(w)) / 2``.

    A fresh nonhalting start state ``s0`` is split by the left end-marker
    into the two start states with amplitude ``1/sqrt(2)`` each, after which
    each copy evolves on its own block. The split is the unitary ``H`` on
    ``span{s0, init_1, init_2}`` with ``s0 -> (init_1 + init_2)/sqrt(2)``,
    ``init_1 -> (init_1 - init_2)/sqrt(2)``, ``init_2 -> s0``, applied
    before the copies' own end-marker operators; ``s0`` is never reoccupied.
    """
    if m1.alphabet != m2.alphabet:
        raise InputError(f"alphabets differ: {list(m1.alphabet)} vs {list(m2.alphabet)}")
    n1, n2 = m1.n, m2.n
    d = 1 + n1 + n2
    i1, i2 = 1 + m1.initial, 1 + n1 + m2.initial
    unitaries = {}
    for s in (*m1.alphabet, CENT, DOLLAR):
        u = np.zeros((d, d), dtype=np.complex128)
        u[0, 0] = 1.0
        u[1:1 + n1, 1:1 + n1] = m1.unitaries[s]
        u[1 + n1:, 1 + n1:] = m2.unitaries[s]
        unitaries[s] = u
    h = np.eye(d, dtype=np.complex128)
    r = 1 / np.sqrt(2)
    h[[0, i1, i2], :] = 0.0
    h[i1, 0] = h[i2, 0] = r
    h[i1, i1], h[i2, i1] = r, -r
    h[0, i2] = 1.0
    unitaries[CENT] = unitaries[CENT] @ h
    kinds = (NONHALTING, *m1.kinds, *m2.kinds)
    names = ("s0", *(f"1.{x}" for x in m1.states), *(f"2.{x}" for x in m2.states))
    return RtKwqfa(m1.alphabet, unitaries, kinds, 0, names)
