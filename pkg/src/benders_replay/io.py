"""Line-oriented text formats for instances, scenario sets, pools and archives.

Every block starts with a ``<TAG> v1`` header and ends with ``END``. Floats
are written with ``repr`` so a write/read cycle is bit exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np

from .errors import FormatError
from .initialization import SolutionArchive
from .model import CoreInstance, DemandModel, Scenario, ScenarioSet
from .pool import DualPool, DualSolution, fingerprint

PathLike = Union[str, Path]


def _f(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _floats(tokens) -> np.ndarray:
    try:
        return np.array([float(t) for t in tokens], dtype=float)
    except ValueError as exc:
        raise FormatError(f"expected numbers, got {' '.join(tokens)!r}") from exc


class _Lines:
    def __init__(self, text: str):
        self._lines = [ln.strip() for ln in text.splitlines()]
        self._lines = [ln for ln in self._lines if ln and not ln.startswith("#")]
        self.i = 0

    def __bool__(self):
        return self.i < len(self._lines)

    def peek(self) -> list:
        if self.i >= len(self._lines):
            raise FormatError("unexpected end of input")
        return self._lines[self.i].split()

    def next(self, key: str = None) -> list:
        tok = self.peek()
        self.i += 1
        if key is not None and tok[0] != key:
            raise FormatError(f"expected {key!r}, found {tok[0]!r}")
        return tok[1:]

    def header(self, tag: str) -> list:
        tok = self.next()
        if len(tok) < 1 or self._lines[self.i - 1].split()[0] != tag or tok[0] != "v1":
            raise FormatError(f"expected '{tag} v1' header, found {self._lines[self.i - 1]!r}")
        return tok[1:]


# ---------------------------------------------------------------------------
# instances


def dumps_instance(inst: CoreInstance) -> str:
    out = [f"SPINST v1 {inst.family}", f"name {inst.name}", "FIRSTSTAGE", f"n {inst.n_first}",
           f"c {_f(inst.c)}", f"lower {_f(inst.x_lower)}", f"upper {_f(inst.x_upper)}",
           "integer " + " ".join("1" if v else "0" for v in inst.integer), f"rows {inst.b.size}"]
    for i in range(inst.b.size):
        out.append(f"row {inst.first_senses[i]} {inst.b[i]!r} {_f(inst.A[i])}")
    m2, n2 = inst.W.shape
    d = inst.H.shape[1]
    out += ["RECOURSE", f"dims {m2} {n2} {d}", f"q {_f(inst.q)}", "senses " + " ".join(inst.second_senses),
            f"h0 {_f(inst.h0)}"]
    out += [f"W {_f(inst.W[i])}" for i in range(m2)]
    out += [f"T {_f(inst.T[i])}" for i in range(m2)]
    out += [f"H {_f(inst.H[i])}" for i in range(m2)]
    out += [f"theta_lb {inst.theta_lower_bound!r}", f"complete_recourse {int(inst.complete_recourse)}"]
    dm = inst.demand
    out += ["SCENARIOGEN", f"kind {dm.kind}", f"mean {_f(dm.mean)}", f"spread {dm.spread!r}", f"cv {dm.cv!r}", "END"]
    return "\n".join(out) + "\n"


def loads_instance(text: str) -> CoreInstance:
    ln = _Lines(text)
    rest = ln.header("SPINST")
    if len(rest) != 1:
        raise FormatError("SPINST header needs a family name")
    family = rest[0]
    name = " ".join(ln.next("name"))
    ln.next("FIRSTSTAGE")
    n = int(ln.next("n")[0])
    c = _floats(ln.next("c"))
    lower = _floats(ln.next("lower"))
    upper = _floats(ln.next("upper"))
    integer = np.array([t == "1" for t in ln.next("integer")], dtype=bool)
    r = int(ln.next("rows")[0])
    senses, b, A = [], [], []
    for _ in range(r):
        tok = ln.next("row")
        senses.append(tok[0])
        b.append(float(tok[1]))
        A.append(_floats(tok[2:]))
    ln.next("RECOURSE")
    m2, n2, d = (int(t) for t in ln.next("dims"))
    q = _floats(ln.next("q"))
    second = ln.next("senses")
    h0 = _floats(ln.next("h0"))
    W = np.array([_floats(ln.next("W")) for _ in range(m2)]).reshape(m2, n2)
    T = np.array([_floats(ln.next("T")) for _ in range(m2)]).reshape(m2, n)
    H = np.array([_floats(ln.next("H")) for _ in range(m2)]).reshape(m2, d)
    theta_lb = float(ln.next("theta_lb")[0])
    complete = ln.next("complete_recourse")[0] == "1"
    ln.next("SCENARIOGEN")
    kind = ln.next("kind")[0]
    mean = _floats(ln.next("mean"))
    spread = float(ln.next("spread")[0])
    cv = float(ln.next("cv")[0])
    ln.next("END")
    if c.size != n:
        raise FormatError("first-stage cost length does not match n")
    return CoreInstance(
        name=name, family=family, c=c, A=np.array(A).reshape(r, n), first_senses=senses, b=np.array(b),
        x_lower=lower, x_upper=upper, integer=integer, W=W, q=q, second_senses=second, h0=h0, H=H, T=T,
        demand=DemandModel(kind, mean, spread=spread, cv=cv), complete_recourse=complete,
        theta_lower_bound=theta_lb,
    )


# ---------------------------------------------------------------------------
# scenarios


def dumps_scenarios(scen: ScenarioSet) -> str:
    d = scen.xi.shape[1] if scen.K else 0
    out = ["SCEN v1", f"seed {'none' if scen.seed is None else int(scen.seed)}", f"K {scen.K}", f"dim {d}"]
    out += [f"s {s.probability!r} {_f(s.xi)}" for s in scen]
    out.append("END")
    return "\n".join(out) + "\n"


def loads_scenarios(text: str) -> ScenarioSet:
    ln = _Lines(text)
    ln.header("SCEN")
    seed_tok = ln.next("seed")[0]
    seed = None if seed_tok == "none" else int(seed_tok)
    K = int(ln.next("K")[0])
    d = int(ln.next("dim")[0])
    items = []
    for k in range(K):
        vals = _floats(ln.next("s"))
        if vals.size != d + 1:
            raise FormatError(f"scenario {k} has {vals.size - 1} values, expected {d}")
        items.append(Scenario(k, vals[1:], float(vals[0])))
    ln.next("END")
    return ScenarioSet(items, seed=seed)


# ---------------------------------------------------------------------------
# pool


def dumps_pool(pool: DualPool) -> str:
    ids = lambda s: " ".join(str(i) for i in sorted(s))  # noqa: E731
    out = ["POOL v1", f"dim {pool.dim}", f"next_id {pool._next_id}", f"perm {ids(pool.perm)}",
           f"trial {ids(pool.trial)}", f"curated {ids(pool.curated)}"]
    for e in pool.entries.values():
        out.append(f"entry {e.id} {e.kind} {e.origin} {_f(e.vector)}")
    out.append("END")
    return "\n".join(out) + "\n"


def loads_pool(text: str) -> DualPool:
    ln = _Lines(text)
    ln.header("POOL")
    dim = int(ln.next("dim")[0])
    pool = DualPool(dim)
    pool._next_id = int(ln.next("next_id")[0])
    pool.perm = {int(t) for t in ln.next("perm")}
    pool.trial = {int(t) for t in ln.next("trial")}
    pool.curated = {int(t) for t in ln.next("curated")}
    while ln.peek()[0] == "entry":
        tok = ln.next("entry")
        vec = _floats(tok[3:])
        if vec.size != dim:
            raise FormatError(f"pool entry {tok[0]} has wrong dimension")
        e = DualSolution(int(tok[0]), vec, fingerprint(vec), tok[1], int(tok[2]))
        pool.entries[e.id] = e
        pool._by_fp[e.fingerprint] = e.id
    ln.next("END")
    known = set(pool.entries)
    if not (pool.perm | pool.trial | pool.curated) <= known:
        raise FormatError("pool partition refers to unknown ids")
    return pool


# ---------------------------------------------------------------------------
# archive


def dumps_archive(archive: SolutionArchive) -> str:
    dim = archive.feas[0].size if archive.feas else 0
    out = ["ARCHIVE v1", f"dim {dim}"]
    out += [f"opt {r} {_f(x)}" for x, r in zip(archive.opt, archive.opt_origin)]
    out += [f"feas {r} {_f(x)}" for x, r in zip(archive.feas, archive.feas_origin)]
    out.append("END")
    return "\n".join(out) + "\n"


def loads_archive(text: str) -> SolutionArchive:
    ln = _Lines(text)
    ln.header("ARCHIVE")
    dim = int(ln.next("dim")[0])
    arch = SolutionArchive()
    opt = []
    while ln.peek()[0] in ("opt", "feas"):
        tag = ln.peek()[0]
        tok = ln.next(tag)
        x = _floats(tok[1:])
        if x.size != dim:
            raise FormatError("archive vector has wrong dimension")
        if tag == "opt":
            opt.append((x, int(tok[0])))
        else:
            arch.add_feas(x, int(tok[0]))
    ln.next("END")
    for x, r in opt:
        arch.opt.append(x)
        arch.opt_origin.append(r)
        arch.add_feas(x, r)
    return arch


# ---------------------------------------------------------------------------


def write_text(path: PathLike, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def read_text(path: PathLike) -> str:
    return Path(path).read_text(encoding="utf-8")


def save_instance(path: PathLike, inst: CoreInstance) -> None:
    write_text(path, dumps_instance(inst))


def load_instance(path: PathLike) -> CoreInstance:
    return loads_instance(read_text(path))


def save_scenarios(path: PathLike, scen: ScenarioSet) -> None:
    write_text(path, dumps_scenarios(scen))


def load_scenarios(path: PathLike) -> ScenarioSet:
    return loads_scenarios(read_text(path))
