"""Wellformedness checkers that report witnesses instead of booleans.

Direction axes of transition tables use the index order ``LEFT, STAY, RIGHT``.
"""
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

LEFT, STAY, RIGHT = 0, 1, 2
DIRECTIONS = ("left", "stay", "right")
OFFSETS = (-1, 0, 1)


@dataclass(frozen=True)
class Violation:
    condition: str
    witness: tuple
    measured: float
    tolerance: float
    detail: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def as_dict(self) -> dict:
        out = {"condition": self.condition, "witness": list(self.witness),
               "measured": self.measured, "tolerance": self.tolerance}
        if self.detail is not None:
            d = np.asarray(self.detail)
            out["detail"] = {"re": d.real.tolist(), "im": d.imag.tolist()}
        return out


@dataclass(frozen=True)
class CheckReport:
    violations: tuple = ()
    checked: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.passed

    def __add__(self, other: "CheckReport") -> "CheckReport":
        checked = self.checked + tuple(c for c in other.checked if c not in self.checked)
        return CheckReport(self.violations + other.violations, checked)

    def render(self) -> str:
        lines = [f"checks: {', '.join(self.checked) if self.checked else '(none)'}",
                 f"result: {'PASS' if self.passed else 'FAIL'} ({len(self.violations)} violation(s))"]
        for v in self.violations:
            witness = " ".join(str(x) for x in v.witness)
            lines.append(f"  {v.condition}: witness [{witness}] measured {v.measured:.6g} "
                         f"tolerance {v.tolerance:g}")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "checked": list(self.checked),
                           "violations": [v.as_dict() for v in self.violations]}, indent=2)


def _labels(labels, count):
    return list(labels) if labels is not None else list(range(count))


def check_stochastic(ms: Sequence, tol: float = 1e-12, labels=None) -> CheckReport:
    """Every column nonnegative and summing to one."""
    out = []
    for label, m in zip(_labels(labels, len(ms)), ms):
        a = np.asarray(m)
        if np.iscomplexobj(a):
            bad = np.argwhere(np.abs(a.imag) > tol)
            for r, c in bad:
                out.append(Violation("stochastic.real", (label, int(r), int(c)),
                                     float(abs(a.imag[r, c])), tol))
            a = a.real
        for r, c in np.argwhere(a < -tol):
            out.append(Violation("stochastic.nonnegative", (label, int(r), int(c)), float(a[r, c]), tol))
        sums = a.sum(axis=0)
        for c in np.flatnonzero(np.abs(sums - 1.0) > tol):
            out.append(Violation("stochastic.column_sum", (label, int(c)), float(sums[c]), tol))
    return CheckReport(tuple(out), ("stochastic",))


def superop_defect(elements) -> np.ndarray:
    els = [np.asarray(e, dtype=np.complex128) for e in elements]
    n = els[0].shape[1]
    total = sum(np.conj(e).T @ e for e in els)
    return total - np.eye(n)


def check_superop(s, tol: float = 1e-9, label=None) -> CheckReport:
    """``sum_i E_i^H E_i == I``, i.e. the stacked Kraus matrix has orthonormal columns."""
    elements = getattr(s, "elements", s)
    defect = superop_defect(elements)
    mag = np.abs(defect)
    if mag.max(initial=0.0) <= tol:
        return CheckReport((), ("superop",))
    r, c = np.unravel_index(int(np.argmax(mag)), mag.shape)
    witness = ((label,) if label is not None else ()) + (int(r), int(c))
    return CheckReport((Violation("superop.completeness", witness, float(mag[r, c]), tol, defect),),
                       ("superop",))


def check_unitary(us: Sequence, tol: float = 1e-9, labels=None) -> CheckReport:
    out = []
    for label, u in zip(_labels(labels, len(us)), us):
        u = np.asarray(u, dtype=np.complex128)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            out.append(Violation("unitary.shape", (label,) + tuple(u.shape), float("nan"), tol))
            continue
        defect = np.conj(u).T @ u - np.eye(u.shape[0])
        mag = np.abs(defect)
        if mag.max(initial=0.0) > tol:
            r, c = np.unravel_index(int(np.argmax(mag)), mag.shape)
            out.append(Violation("unitary", (label, int(r), int(c)), float(mag[r, c]), tol, defect))
    return CheckReport(tuple(out), ("unitary",))


def _gram(x, y):
    """``sum_k conj(x[q1, k]) y[q2, k]`` over flattened trailing axes."""
    q = x.shape[0]
    return np.conj(x.reshape(q, -1)) @ y.reshape(q, -1).T


def check_local_2qfa(delta, tol: float = 1e-9, symbols=None, states=None) -> CheckReport:
    """Local wellformedness of a two-way QFA transition table.

    ``delta[q, s, q2, d, w]`` is the amplitude of moving from state ``q``
    reading symbol ``s`` to state ``q2`` with head direction ``d`` while
    writing ``w`` to the register. Three cases, by head distance of the two
    source configurations:

    1. same position: columns orthonormal for every symbol;
    2. positions one apart: right/stay and stay/left overlaps cancel;
    3. positions two apart: right/left overlaps cancel.

    Cases 2 and 3 are checked for every ordered pair of symbols, since the two
    source configurations sit on different tape squares; iterating ordered
    state pairs covers the conjugate-symmetric cases.
    """
    delta = np.asarray(delta, dtype=np.complex128)
    if delta.ndim != 5 or delta.shape[3] != 3:
        raise ValueError(f"expected table of shape (Q, S, Q, 3, W), got {delta.shape}")
    nq, ns = delta.shape[0], delta.shape[1]
    syms = _labels(symbols, ns)
    names = _labels(states, nq)
    out = []
    eye = np.eye(nq)
    for s in range(ns):
        g = _gram(delta[:, s], delta[:, s]) - eye
        for q1, q2 in np.argwhere(np.abs(g) > tol):
            out.append(Violation("local2qfa.case1", (names[q1], names[q2], syms[s]),
                                 float(abs(g[q1, q2])), tol))
    for s1 in range(ns):
        for s2 in range(ns):
            g2 = (_gram(delta[:, s1, :, RIGHT], delta[:, s2, :, STAY])
                  + _gram(delta[:, s1, :, STAY], delta[:, s2, :, LEFT]))
            for q1, q2 in np.argwhere(np.abs(g2) > tol):
                out.append(Violation("local2qfa.case2", (names[q1], syms[s1], names[q2], syms[s2]),
                                     float(abs(g2[q1, q2])), tol))
            g3 = _gram(delta[:, s1, :, RIGHT], delta[:, s2, :, LEFT])
            for q1, q2 in np.argwhere(np.abs(g3) > tol):
                out.append(Violation("local2qfa.case3", (names[q1], syms[s1], names[q2], syms[s2]),
                                     float(abs(g3[q1, q2])), tol))
    return CheckReport(tuple(out), ("local2qfa",))


def check_local_unidirectional(delta, directions=None, tol: float = 1e-9, symbols=None,
                               states=None) -> CheckReport:
    """``sum_{q', w} conj(delta(q1,s,q',w)) delta(q2,s,q',w) == [q1 == q2]``.

    ``delta[q, s, q2, w]``; the head direction is a function of the target
    state (``directions``), so it does not enter the condition.
    """
    delta = np.asarray(delta, dtype=np.complex128)
    if delta.ndim != 4:
        raise ValueError(f"expected table of shape (Q, S, Q, W), got {delta.shape}")
    nq, ns = delta.shape[0], delta.shape[1]
    if directions is not None and len(directions) != nq:
        raise ValueError(f"{len(directions)} directions for {nq} states")
    syms = _labels(symbols, ns)
    names = _labels(states, nq)
    out = []
    eye = np.eye(nq)
    for s in range(ns):
        g = _gram(delta[:, s], delta[:, s]) - eye
        for q1, q2 in np.argwhere(np.abs(g) > tol):
            out.append(Violation("unidirectional", (names[q1], names[q2], syms[s]),
                                 float(abs(g[q1, q2])), tol))
    return CheckReport(tuple(out), ("unidirectional",))


def unidirectional_to_2qfa(delta, directions) -> np.ndarray:
    """Expand a unidirectional table into the general ``(Q, S, Q, 3, W)`` form."""
    delta = np.asarray(delta, dtype=np.complex128)
    nq, ns, _, nw = delta.shape
    out = np.zeros((nq, ns, nq, 3, nw), dtype=np.complex128)
    for q2, d in enumerate(directions):
        d = DIRECTIONS.index(d) if isinstance(d, str) else int(d)
        out[:, :, q2, d, :] = delta[:, :, q2, :]
    return out


def kraus_from_unidirectional(delta) -> list:
    """Per-symbol operator families ``E_{s,w}[q2, q] = delta(q, s, q2, w)``."""
    delta = np.asarray(delta, dtype=np.complex128)
    return [[delta[:, s, :, w].T.copy() for w in range(delta.shape[3])]
            for s in range(delta.shape[1])]


def delta_from_unitaries(unitaries: Sequence) -> np.ndarray:
    """Unidirectional table ``(Q, S, Q, 1)`` of a Kondacs-Watrous machine."""
    us = [np.asarray(u, dtype=np.complex128) for u in unitaries]
    return np.stack([u.T for u in us], axis=1)[..., np.newaxis]
