"""Line-based text formats for lattices, functions, domains and transition
systems.

Lattice files::

    elem <name>
    cover <lower> <upper>
    map <fn> <arg> <value>
    domain <name> <elem>...

Transition-system files::

    states <n>
    label <id> <name>
    edge <a> <b>
    init <id>...
    error <id>...
    block <name> <id>...

``#`` starts a comment.  State ids are 0-based; labels are free-form names.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .absdom import AbstractDomain, MonotoneFn
from .ats import Partition, TransitionSystem
from .lattice import Lattice, LatticeError


class FormatError(ValueError):
    def __init__(self, msg: str, source: str = "<text>", line: int | None = None):
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {msg}")
        self.source = source
        self.line = line


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if words:
            yield no, words


@dataclass
class LatticeFile:
    lattice: Lattice
    functions: dict[str, MonotoneFn] = field(default_factory=dict)
    domains: dict[str, AbstractDomain] = field(default_factory=dict)

    def same_as(self, other: "LatticeFile") -> bool:
        a, b = self.lattice, other.lattice
        return (
            a.names == b.names
            and a.down_masks == b.down_masks
            and {k: f.table for k, f in self.functions.items()}
            == {k: f.table for k, f in other.functions.items()}
            and {k: d.image for k, d in self.domains.items()}
            == {k: d.image for k, d in other.domains.items()}
        )


def parse_lattice(text: str, source: str = "<text>") -> LatticeFile:
    names: list[str] = []
    covers: list[tuple[str, str, int]] = []
    maps: dict[str, dict[str, tuple[str, int]]] = {}
    domains: dict[str, tuple[list[str], int]] = {}
    for no, words in _lines(text):
        kw, args = words[0], words[1:]
        if kw == "elem" and len(args) == 1:
            if args[0] in names:
                raise FormatError(f"element {args[0]!r} declared twice", source, no)
            names.append(args[0])
        elif kw == "cover" and len(args) == 2:
            covers.append((args[0], args[1], no))
        elif kw == "map" and len(args) == 3:
            fn = maps.setdefault(args[0], {})
            if args[1] in fn:
                raise FormatError(f"{args[0]} defined twice at {args[1]!r}", source, no)
            fn[args[1]] = (args[2], no)
        elif kw == "domain" and len(args) >= 1:
            if args[0] in domains:
                raise FormatError(f"domain {args[0]!r} declared twice", source, no)
            domains[args[0]] = (args[1:], no)
        else:
            raise FormatError(f"cannot parse {' '.join(words)!r}", source, no)
    if not names:
        raise FormatError("no elements", source)
    index = {n: i for i, n in enumerate(names)}

    def lookup(name: str, no: int) -> int:
        if name not in index:
            raise FormatError(f"unknown element {name!r}", source, no)
        return index[name]

    pairs = [(lookup(lo, no), lookup(hi, no)) for lo, hi, no in covers]
    try:
        lat = Lattice.from_covers(names, pairs, check=True)
    except LatticeError as exc:
        raise FormatError(str(exc), source) from exc

    functions = {}
    for fname, entries in sorted(maps.items()):
        missing = [n for n in names if n not in entries]
        if missing:
            raise FormatError(f"{fname} is not total: missing {', '.join(missing)}", source)
        table = {lookup(a, no): lookup(v, no) for a, (v, no) in entries.items()}
        fn = MonotoneFn.from_mapping(lat, table, fname, check=False)
        bad = fn.monotonicity_violation()
        if bad is not None:
            x, y = bad
            raise FormatError(f"{fname} is not monotone at {names[x]} <= {names[y]}", source)
        functions[fname] = fn

    doms = {}
    for dname, (elems, no) in sorted(domains.items()):
        image = frozenset(lookup(e, no) for e in elems)
        if not lat.is_meet_closed(image) or lat.top not in image:
            raise FormatError(f"domain {dname} is not closed under meets", source, no)
        doms[dname] = AbstractDomain(lat, image, dname)
    return LatticeFile(lat, functions, doms)


def serialize_lattice(lf: LatticeFile) -> str:
    lat = lf.lattice
    out = [f"elem {n}" for n in lat.names]
    out += [f"cover {lat.name(a)} {lat.name(b)}" for a, b in lat.covers()]
    for fname in sorted(lf.functions):
        fn = lf.functions[fname]
        out += [f"map {fname} {lat.name(x)} {lat.name(fn(x))}" for x in lat.elements()]
    for dname in sorted(lf.domains):
        out.append(" ".join(["domain", dname, *lat.names_of(sorted(lf.domains[dname].image))]))
    return "\n".join(out) + "\n"


def parse_domain(text: str, lat: Lattice, source: str = "<text>", name: str = "A") -> AbstractDomain:
    """A domain file lists one element per ``elem`` line."""
    image = set()
    for no, words in _lines(text):
        if words[0] != "elem" or len(words) != 2:
            raise FormatError(f"cannot parse {' '.join(words)!r}", source, no)
        try:
            image.add(lat.index(words[1]))
        except KeyError:
            raise FormatError(f"unknown element {words[1]!r}", source, no) from None
    image = frozenset(image)
    if lat.top not in image or not lat.is_meet_closed(image):
        raise FormatError("domain is not closed under meets (top included)", source)
    return AbstractDomain(lat, image, name)


@dataclass
class SystemFile:
    system: TransitionSystem
    partition: Partition

    def same_as(self, other: "SystemFile") -> bool:
        return (
            self.system == other.system
            and self.partition == other.partition
            and self.partition.names == other.partition.names
        )


def _int(word: str, source: str, no: int) -> int:
    try:
        return int(word)
    except ValueError:
        raise FormatError(f"expected an integer, got {word!r}", source, no) from None


def parse_system(text: str, source: str = "<text>") -> SystemFile:
    n = None
    labels: dict[int, str] = {}
    edges, init, error = set(), set(), set()
    blocks: list[tuple[str, list[int], int]] = []
    for no, words in _lines(text):
        kw, args = words[0], words[1:]
        if kw == "states" and len(args) == 1:
            if n is not None:
                raise FormatError("states declared twice", source, no)
            n = _int(args[0], source, no)
            if n < 0:
                raise FormatError("negative state count", source, no)
            continue
        if n is None:
            raise FormatError("'states' must come first", source, no)
        numeric = args[:1] if kw == "label" else args[1:] if kw == "block" else args
        ids = [_int(a, source, no) for a in numeric]
        for s in ids:
            if not 0 <= s < n:
                raise FormatError(f"state {s} out of range", source, no)
        if kw == "label" and len(args) == 2:
            labels[ids[0]] = args[1]
        elif kw == "edge" and len(args) == 2:
            edges.add((ids[0], ids[1]))
        elif kw == "init":
            init.update(ids)
        elif kw == "error":
            error.update(ids)
        elif kw == "block" and len(args) >= 2:
            blocks.append((args[0], ids, no))
        else:
            raise FormatError(f"cannot parse {' '.join(words)!r}", source, no)
    if n is None:
        raise FormatError("missing 'states'", source)
    names = tuple(labels.get(i, str(i)) for i in range(n))
    try:
        ts = TransitionSystem(n, frozenset(edges), frozenset(init), frozenset(error), names)
        if blocks:
            part = Partition.from_blocks(
                [ids for _, ids, _ in blocks],
                {frozenset(ids): name for name, ids, _ in blocks},
            )
            if any(len(set(ids)) != len(ids) for _, ids, _ in blocks):
                raise ValueError("a state is listed twice in one block")
            if part.n_states != n:
                raise ValueError(f"blocks cover {part.n_states} of {n} states")
        else:
            part = Partition.discrete(n)
    except ValueError as exc:
        raise FormatError(str(exc), source) from exc
    return SystemFile(ts, part)


def serialize_system(sf: SystemFile) -> str:
    ts, part = sf.system, sf.partition
    out = [f"states {ts.size}"]
    out += [f"label {i} {name}" for i, name in enumerate(ts.labels) if name != str(i)]
    out += [f"edge {a} {b}" for a, b in sorted(ts.edges)]
    if ts.init:
        out.append("init " + " ".join(map(str, sorted(ts.init))))
    if ts.error:
        out.append("error " + " ".join(map(str, sorted(ts.error))))
    if any(len(b) > 1 for b in part.blocks) or part.names:
        for i, b in enumerate(part.blocks):
            name = part.names.get(b) or f"B{i}"
            out.append(f"block {name} " + " ".join(map(str, sorted(b))))
    return "\n".join(out) + "\n"


def read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def load_lattice(path: str | Path) -> LatticeFile:
    return parse_lattice(read_text(path), str(path))


def load_system(path: str | Path) -> SystemFile:
    return parse_system(read_text(path), str(path))
