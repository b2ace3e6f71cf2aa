"""Machine definition files (YAML).

Example::

    type: kwqfa-2way            # rt-pfa | gfa | rt-qfa | rt-kwqfa | kwqfa-1way | kwqfa-2way
    alphabet: [a, b]
    initial: q0
    complete: ascending         # kwqfa types: fill unspecified columns (ascending|descending|none)
    states:
      - [q0, nonhalting, right] # name, kind, direction (direction only for two-way types)
      - [A1, accepting, stay]
    transitions:
      cent:                     # end-markers are spelled cent / dollar
        - [q0, q0, "1"]         # from, to, amplitude expression
      a:
        matrix: [["1/sqrt(2)", "0"], ...]   # dense alternative, rows = targets

``rt-qfa`` transitions give ``{kraus: [payload, ...]}`` per symbol; ``gfa``
files add ``initial_vector`` and ``final_vector`` and have no end-markers.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .ampexpr import amp, format_amp
from .classical import CENT, DOLLAR, Gfa, RtPfa
from .errors import AmpEvaluationError, AmpSyntaxError, MachineFileError, WellformednessError
from .linalg import complete_to_unitary
from .quantum_rt import KINDS, NONHALTING, ACCEPTING, RtKwqfa, RtQfa, SuperOp
from .twoway import TwoWayKwqfa
from .wellformed import DIRECTIONS

MACHINE_TYPES = ("rt-pfa", "gfa", "rt-qfa", "rt-kwqfa", "kwqfa-1way", "kwqfa-2way")
KWQFA_TYPES = ("rt-kwqfa", "kwqfa-1way", "kwqfa-2way")
TWO_WAY_TYPES = ("kwqfa-1way", "kwqfa-2way")
RESERVED = (CENT, DOLLAR)


def _amp(value, where):
    if isinstance(value, bool) or value is None:
        raise MachineFileError(f"{where}: amplitude must be an expression, got {value!r}")
    text = value if isinstance(value, str) else repr(value)
    try:
        return amp(text), text
    except (AmpSyntaxError, AmpEvaluationError) as exc:
        raise MachineFileError(f"{where}: {exc}") from exc


def _states(doc, mtype):
    raw = doc.get("states")
    if not isinstance(raw, list) or not raw:
        raise MachineFileError("states: expected a non-empty list")
    names, kinds, dirs = [], [], []
    for k, entry in enumerate(raw):
        where = f"states[{k}]"
        if isinstance(entry, str):
            entry = {"name": entry}
        elif isinstance(entry, list):
            entry = dict(zip(("name", "kind", "direction"), entry))
        if not isinstance(entry, dict) or "name" not in entry:
            raise MachineFileError(f"{where}: expected a name, [name, kind, direction] or mapping")
        name = str(entry["name"])
        kind = entry.get("kind", NONHALTING)
        if kind not in KINDS:
            raise MachineFileError(f"{where}: kind {kind!r} not one of {KINDS}")
        direction = entry.get("direction")
        if mtype in TWO_WAY_TYPES:
            if direction not in DIRECTIONS:
                raise MachineFileError(f"{where}: direction {direction!r} not one of {DIRECTIONS}")
            if mtype == "kwqfa-1way" and direction == "left":
                raise MachineFileError(f"{where}: one-way machines cannot move left")
        if name in names:
            raise MachineFileError(f"{where}: duplicate state name {name!r}")
        names.append(name)
        kinds.append(kind)
        dirs.append(direction)
    return names, kinds, dirs


def _alphabet(doc):
    raw = doc.get("alphabet")
    if not isinstance(raw, list):
        raise MachineFileError("alphabet: expected a list of single-character symbols")
    out = []
    for k, s in enumerate(raw):
        s = str(s)
        if s in RESERVED or len(s) != 1:
            raise MachineFileError(f"alphabet[{k}]: {s!r} is not a valid single-character symbol")
        if s in out:
            raise MachineFileError(f"alphabet[{k}]: duplicate symbol {s!r}")
        out.append(s)
    return tuple(out)


def _payload(payload, index, n, where, texts=None, key=None):
    """Matrix from a dense ``{matrix: ...}`` or sparse ``[[from, to, amp], ...]`` payload.

    Returns ``(matrix, specified_columns)``.
    """
    m = np.zeros((n, n), dtype=np.complex128)
    if isinstance(payload, dict) and "matrix" in payload:
        rows = payload["matrix"]
        if not isinstance(rows, list) or len(rows) != n or any(
                not isinstance(r, list) or len(r) != n for r in rows):
            raise MachineFileError(f"{where}.matrix: expected {n}x{n} entries")
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                m[i, j], text = _amp(v, f"{where}.matrix[{i}][{j}]")
                if texts is not None and not isinstance(v, (int, float)):
                    texts[(key, i, j)] = text
        return m, set(range(n))
    if not isinstance(payload, list):
        raise MachineFileError(f"{where}: expected a matrix mapping or a list of [from, to, amp]")
    specified = set()
    seen = set()
    for k, t in enumerate(payload):
        w = f"{where}[{k}]"
        if not isinstance(t, list) or len(t) != 3:
            raise MachineFileError(f"{w}: expected [from, to, amplitude]")
        src, dst = str(t[0]), str(t[1])
        for name in (src, dst):
            if name not in index:
                raise MachineFileError(f"{w}: unknown state {name!r}")
        if (src, dst) in seen:
            raise MachineFileError(f"{w}: duplicate transition {src} -> {dst}")
        seen.add((src, dst))
        value, text = _amp(t[2], w)
        j, i = index[src], index[dst]
        m[i, j] = value
        specified.add(j)
        if texts is not None:
            texts[(key, i, j)] = text
    return m, specified


def _complete(m, specified, order, names, symbol):
    n = m.shape[0]
    spec = sorted(specified)
    free = [j for j in range(n) if j not in specified]
    if not free:
        return m
    if order == "none":
        raise MachineFileError(
            f"transitions.{symbol}: columns {[names[j] for j in free]} unspecified and completion disabled")
    try:
        full = complete_to_unitary(m[:, spec], order=order)
    except WellformednessError as exc:
        # map column positions back to state names
        gram = np.conj(m[:, spec]).T @ m[:, spec]
        bad = np.abs(gram - np.eye(len(spec)))
        a, b = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise WellformednessError(
            f"transitions.{symbol}: columns of {names[spec[a]]} and {names[spec[b]]} "
            f"are not orthonormal (inner product {complex(gram[a, b]):.6g})") from exc
    out = np.array(m)
    out[:, free] = full[:, len(spec):]
    return out


@dataclass
class MachineSpec:
    """Parsed but unvalidated machine description.

    ``matrices`` holds one matrix per symbol (a list of Kraus elements for
    ``rt-qfa``); for Kondacs-Watrous types only the columns in
    ``specified[symbol]`` come from the file.
    """

    mtype: str
    alphabet: tuple
    states: tuple
    kinds: tuple
    directions: tuple
    initial: int
    matrices: dict
    specified: dict = field(default_factory=dict)
    texts: dict = field(default_factory=dict)
    v0: Optional[np.ndarray] = None
    f: Optional[np.ndarray] = None
    order: str = "ascending"

    @property
    def accepting(self) -> frozenset:
        return frozenset(i for i, k in enumerate(self.kinds) if k == ACCEPTING)


def _read_doc(source):
    if isinstance(source, dict):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise MachineFileError(f"cannot read {source}: {exc}") from exc
    else:
        text = source
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MachineFileError(f"YAML syntax error: {exc}") from exc
    if not isinstance(doc, dict):
        raise MachineFileError("machine file must be a mapping")
    return doc


def parse_machine(source, completion_order: Optional[str] = None) -> MachineSpec:
    """Parse a path, YAML string or mapping without checking wellformedness.

    Raises
    ------
    MachineFileError
        Syntax errors, unknown types or symbols, duplicate or unknown states.
    """
    doc = _read_doc(source)
    mtype = doc.get("type")
    if mtype not in MACHINE_TYPES:
        raise MachineFileError(f"type: {mtype!r} not one of {MACHINE_TYPES}")
    alphabet = _alphabet(doc)
    names, kinds, dirs = _states(doc, mtype)
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    trans = doc.get("transitions")
    if not isinstance(trans, dict):
        raise MachineFileError("transitions: expected a mapping from symbol to payload")
    trans = {str(k): v for k, v in trans.items()}
    symbols = list(alphabet) if mtype == "gfa" else [*alphabet, CENT, DOLLAR]
    for s in trans:
        if s not in symbols:
            raise MachineFileError(f"transitions.{s}: symbol not in the alphabet")
    missing = [s for s in symbols if s not in trans]
    if missing and mtype not in KWQFA_TYPES:
        raise MachineFileError(f"transitions: no entry for {missing}")
    spec = MachineSpec(mtype, alphabet, tuple(names), tuple(kinds), tuple(dirs), 0, {})

    if mtype == "gfa":
        spec.matrices = {s: _payload(trans[s], index, n, f"transitions.{s}")[0] for s in symbols}
        vecs = []
        for key in ("initial_vector", "final_vector"):
            raw = doc.get(key)
            if not isinstance(raw, list) or len(raw) != n:
                raise MachineFileError(f"{key}: expected {n} entries")
            vecs.append(np.array([_amp(v, f"{key}[{k}]")[0] for k, v in enumerate(raw)]))
        spec.v0, spec.f = vecs
        return spec

    initial = str(doc.get("initial", names[0]))
    if initial not in index:
        raise MachineFileError(f"initial: unknown state {initial!r}")
    spec.initial = index[initial]

    if mtype in ("rt-pfa", "rt-qfa"):
        if spec.initial != 0:
            raise MachineFileError(f"initial: {mtype} files must list the initial state first")
        for s in symbols:
            if mtype == "rt-pfa":
                spec.matrices[s] = _payload(trans[s], index, n, f"transitions.{s}")[0]
                continue
            p = trans[s]
            if not isinstance(p, dict) or not isinstance(p.get("kraus"), list) or not p["kraus"]:
                raise MachineFileError(f"transitions.{s}: expected {{kraus: [payload, ...]}}")
            spec.matrices[s] = [_payload(e, index, n, f"transitions.{s}.kraus[{k}]")[0]
                                for k, e in enumerate(p["kraus"])]
        return spec

    order = completion_order or doc.get("complete", "ascending")
    if order not in ("ascending", "descending", "none"):
        raise MachineFileError(f"complete: {order!r} not one of ascending, descending, none")
    spec.order = order
    for s in symbols:
        m, cols = _payload(trans.get(s, []), index, n, f"transitions.{s}", spec.texts, s)
        spec.matrices[s] = m
        spec.specified[s] = frozenset(cols)
    return spec


def completed_unitaries(spec: MachineSpec) -> dict:
    return {s: _complete(m, spec.specified[s], spec.order, spec.states, s)
            for s, m in spec.matrices.items()}


def build_machine(spec: MachineSpec):
    """Validated machine object from a parsed description.

    Raises
    ------
    WellformednessError
        The description violates its model's wellformedness condition.
    """
    names = spec.states
    if spec.mtype == "gfa":
        for key, arr in (("transitions", np.array(list(spec.matrices.values()))),
                         ("initial_vector", spec.v0), ("final_vector", spec.f)):
            if np.any(np.asarray(arr).imag != 0):
                raise MachineFileError(f"{key}: GFA weights must be real")
        return Gfa(spec.alphabet, {s: m.real for s, m in spec.matrices.items()},
                   spec.v0.real, spec.f.real, states=names)
    if spec.mtype == "rt-pfa":
        for s, m in spec.matrices.items():
            if np.any(m.imag != 0):
                raise WellformednessError(f"transitions.{s}: RT-PFA entries must be real")
        return RtPfa(spec.alphabet, {s: m.real for s, m in spec.matrices.items()},
                     spec.accepting, states=names)
    if spec.mtype == "rt-qfa":
        ops = {s: SuperOp(tuple(els)) for s, els in spec.matrices.items()}
        return RtQfa(spec.alphabet, ops, spec.accepting, states=names)
    unitaries = completed_unitaries(spec)
    if spec.mtype == "rt-kwqfa":
        return RtKwqfa(spec.alphabet, unitaries, spec.kinds, spec.initial, names)
    return TwoWayKwqfa(spec.alphabet, unitaries, spec.kinds, spec.directions, spec.initial, names,
                       specified=dict(spec.specified), amp_text=dict(spec.texts))


def load_machine(source, completion_order: Optional[str] = None):
    """Load a machine from a path, a YAML string, or an already parsed mapping.

    ``completion_order`` overrides the file's ``complete`` setting for
    Kondacs-Watrous types.
    """
    return build_machine(parse_machine(source, completion_order))


def _amp_out(z, text=None):
    if text is not None and amp(text) == complex(z):
        return text
    return format_amp(z)


def _sparse_out(u, names, texts=None, symbol=None):
    out = []
    for j in range(u.shape[1]):
        for i in np.flatnonzero(u[:, j] != 0):
            text = texts.get((symbol, int(i), j)) if texts else None
            out.append([names[j], names[int(i)], _amp_out(u[i, j], text)])
    return out


def _dense_out(m):
    return {"matrix": [[format_amp(v) for v in row] for row in np.asarray(m)]}


def machine_type(m) -> str:
    if isinstance(m, RtPfa):
        return "rt-pfa"
    if isinstance(m, Gfa):
        return "gfa"
    if isinstance(m, RtQfa):
        return "rt-qfa"
    if isinstance(m, RtKwqfa):
        return "rt-kwqfa"
    if isinstance(m, TwoWayKwqfa):
        return "kwqfa-1way" if m.is_one_way else "kwqfa-2way"
    raise TypeError(f"not a machine: {type(m).__name__}")


def machine_to_doc(m) -> dict:
    mtype = machine_type(m)
    names = list(m.states)
    doc = {"type": mtype, "alphabet": list(m.alphabet)}
    if mtype == "gfa":
        doc["states"] = names
        doc["initial_vector"] = [format_amp(v) for v in m.v0]
        doc["final_vector"] = [format_amp(v) for v in m.f]
        doc["transitions"] = {s: _dense_out(m.matrices[s]) for s in m.alphabet}
        return doc
    symbols = [*m.alphabet, CENT, DOLLAR]
    if mtype in ("rt-pfa", "rt-qfa"):
        doc["initial"] = names[0]
        doc["states"] = [[name, ACCEPTING if i in m.accepting else NONHALTING]
                         for i, name in enumerate(names)]
        if mtype == "rt-pfa":
            doc["transitions"] = {s: _dense_out(m.matrices[s]) for s in symbols}
        else:
            doc["transitions"] = {s: {"kraus": [_dense_out(e) for e in m.operators[s].elements]}
                                  for s in symbols}
        return doc
    doc["initial"] = names[m.initial]
    doc["complete"] = "none"
    if mtype == "rt-kwqfa":
        doc["states"] = [[name, k] for name, k in zip(names, m.kinds)]
    else:
        doc["states"] = [[name, k, d] for name, k, d in zip(names, m.kinds, m.directions)]
    texts = getattr(m, "amp_text", None)
    doc["transitions"] = {s: _sparse_out(m.unitaries[s], names, texts, s) for s in symbols}
    return doc


class _Dumper(yaml.SafeDumper):
    pass


def _repr_list(dumper, data):
    # flow style for leaf rows keeps files compact and diffable
    flow = all(not isinstance(x, (list, dict)) for x in data)
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_Dumper.add_representer(list, _repr_list)


def dump_machine(m) -> str:
    return yaml.dump(machine_to_doc(m), Dumper=_Dumper, sort_keys=False, width=120)


def save_machine(m, path) -> None:
    Path(path).write_text(dump_machine(m))
