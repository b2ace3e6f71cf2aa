"""Built-in machines and membership oracles for the languages they recognize.

* ``L_NH``: ``a^x b a^y1 b ... a^yt b`` with every exponent positive and
  ``x = y1 + ... + yk`` for some ``k``.
* ``L_YS``: ``a^(n-1) b a^(kn)`` with ``n > 1`` and ``k > 0``.
* ``L_fre``: ``a^n b a^n`` with ``n >= 1``.
"""
import itertools
import re
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable

from .classical import tilde
from .errors import InputError
from .machinefile import load_machine
from .quantum_rt import NONHALTING
from .twoway import AMP_EPS, TwoWayKwqfa, _machine_cache


def fixture_text(name: str) -> str:
    return resources.files("qfa_lab.fixtures").joinpath(name).read_text()


def fixture_names() -> list:
    return sorted(p.name for p in resources.files("qfa_lab.fixtures").iterdir()
                  if p.name.endswith(".yaml"))


@lru_cache(maxsize=None)
def _load_fixture(name: str, order: str):
    return load_machine(fixture_text(name), completion_order=order)


def lnh_machine(order: str = "ascending") -> TwoWayKwqfa:
    """63-state one-way KWQFA recognizing ``L_NH`` with cutpoint 1/2."""
    return _load_fixture("lnh.yaml", order)


def lys_machine(order: str = "ascending") -> TwoWayKwqfa:
    """19-state two-way KWQFA recognizing ``L_YS`` with cutpoint 1/2."""
    return _load_fixture("lys.yaml", order)


_BLOCKS = re.compile(r"(a+)b")


def in_lnh(w: str) -> bool:
    blocks = []
    pos = 0
    for m in _BLOCKS.finditer(w):
        if m.start() != pos:
            return False
        blocks.append(len(m.group(1)))
        pos = m.end()
    if pos != len(w) or len(blocks) < 2:
        return False
    x = blocks[0]
    return x in itertools.accumulate(blocks[1:])


_LYS = re.compile(r"(a+)b(a+)")


def in_lys(w: str) -> bool:
    m = _LYS.fullmatch(w)
    if m is None:
        return False
    n = len(m.group(1)) + 1
    return len(m.group(2)) % n == 0


_LFRE = re.compile(r"(a+)b(a+)")


def in_lfre(w: str) -> bool:
    m = _LFRE.fullmatch(w)
    return m is not None and len(m.group(1)) == len(m.group(2))


@dataclass(frozen=True)
class LanguageOracle:
    name: str
    predicate: Callable[[str], bool]
    alphabet: tuple = ("a", "b")

    def __call__(self, w: str) -> bool:
        return self.predicate(w)


ORACLES = {
    "lnh": LanguageOracle("lnh", in_lnh),
    "lys": LanguageOracle("lys", in_lys),
    "lfre": LanguageOracle("lfre", in_lfre),
}


def oracle(name: str) -> LanguageOracle:
    try:
        return ORACLES[name]
    except KeyError:
        raise InputError(f"unknown oracle {name!r}; choose from {sorted(ORACLES)}") from None


def strings_upto(alphabet, max_len: int):
    """All strings over ``alphabet`` of length ``<= max_len``, shortlex order."""
    for k in range(max_len + 1):
        for t in itertools.product(alphabet, repeat=k):
            yield "".join(t)


@dataclass(frozen=True)
class AuditReport:
    """Encoding audit of a partially specified machine.

    ``unspecified`` lists reachable ``(state, symbol)`` pairs whose column
    came from unitary completion; ``unreferenced`` lists states that appear
    in no specified transition.
    """

    unspecified: tuple
    unreferenced: tuple
    max_len: int

    @property
    def passed(self) -> bool:
        return not self.unspecified and not self.unreferenced


def encoding_audit(m: TwoWayKwqfa, max_len: int = 6) -> AuditReport:
    """Walk every configuration reachable from the start on every input up
    to ``max_len``; report nonhalting states read under a symbol whose column
    the description left open."""
    if m.specified is None:
        raise InputError("machine carries no record of specified columns")
    cache = _machine_cache(m)
    off = m.offsets()
    hits = set()
    for w in strings_upto(m.alphabet, max_len):
        tape = tilde(w)
        start = (m.initial, 1)
        seen = {start}
        queue = deque([start])
        while queue:
            q, x = queue.popleft()
            s = tape[x - 1]
            if q not in m.specified[s]:
                hits.add((m.states[q], s))
                continue
            for q2, _ in cache[s][3][q]:
                tx = x + int(off[q2])
                if m.kinds[q2] == NONHALTING and 1 <= tx <= len(tape) and (q2, tx) not in seen:
                    seen.add((q2, tx))
                    queue.append((q2, tx))
    referenced = set()
    for s, cols in m.specified.items():
        u = m.unitaries[s]
        for j in cols:
            referenced.add(j)
            referenced.update(int(i) for i in (abs(u[:, j]) > AMP_EPS).nonzero()[0])
    unreferenced = tuple(m.states[i] for i in range(m.n) if i not in referenced)
    return AuditReport(tuple(sorted(hits)), unreferenced, max_len)
