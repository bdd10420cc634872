"""``egas`` command line.

Every command prints a plain ``key: value`` report (or JSON with
``--json``).  Exit status: 0 when the analysis ran, whatever its verdict;
2 for usage errors, 3 for unreadable files, 4 for inputs that parse but
make no sense (a non-lattice order, a non-monotone map, ...).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .absdom import AbstractDomain, bca, identity_domain
from .ats import build_ats, iterate_partition_kernel, merge_groups, partition_kernel
from .cegar import Heuristic, cegar_loop, coro2_check
from .dot import ats_dot, domain_dot, lattice_dot
from .formats import FormatError, LatticeFile, SystemFile, load_lattice, load_system, parse_domain
from .generators import random_system
from .kernel import ORACLE_IMAGE_LIMIT, correctness_kernel, kernel_oracle
from .lattice import LatticeError
from .predabs import (
    Abstraction,
    bca_post_b,
    boolean_kernel,
    foo_fixture,
    foo_verification,
    render_set,
    render_vec,
)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SEMANTIC = 0, 2, 3, 4


class InputError(Exception):
    """Semantic problem with otherwise readable input."""


@dataclass
class Report:
    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    lines: list[str] = field(default_factory=list)
    result: dict[str, Any] = field(default_factory=dict)

    def add(self, key: str, value: Any) -> None:
        self.lines.append(f"{key}: {value}")

    def to_json(self) -> str:
        doc = {"command": self.command, "inputs": self.inputs, "result": self.result}
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _names(lat, xs) -> list[str]:
    return lat.names_of(sorted(xs))


def _braced(lat, xs) -> str:
    return "{" + ", ".join(_names(lat, xs)) + "}"


# --- lattice commands --------------------------------------------------------

def _open_lattice(args, rep: Report) -> LatticeFile:
    lf = load_lattice(args.lattice)
    rep.inputs[args.lattice] = _digest(args.lattice)
    return lf


def _pick_domain(args, lf: LatticeFile, rep: Report) -> AbstractDomain:
    choice = args.domain
    if choice == "full":
        return identity_domain(lf.lattice, "full")
    if choice in lf.domains:
        return lf.domains[choice]
    path = Path(choice)
    if not path.exists():
        raise FileNotFoundError(choice)
    rep.inputs[choice] = _digest(choice)
    return parse_domain(path.read_text(encoding="utf-8"), lf.lattice, choice, path.stem)


def _pick_fns(args, lf: LatticeFile):
    names = args.fn or sorted(lf.functions)
    missing = [n for n in names if n not in lf.functions]
    if missing:
        raise InputError(f"unknown function(s): {', '.join(missing)}")
    if not names:
        raise InputError("lattice file defines no functions")
    return [lf.functions[n] for n in names]


def cmd_lattice_check(args) -> Report:
    rep = Report("lattice-check")
    lf = _open_lattice(args, rep)
    lat = lf.lattice
    covers = sorted(lat.covers())
    rep.add("elements", lat.size)
    rep.add("bottom", lat.name(lat.bottom))
    rep.add("top", lat.name(lat.top))
    rep.add("covers", "; ".join(f"{lat.name(a)} < {lat.name(b)}" for a, b in covers))
    rep.add("functions", ", ".join(sorted(lf.functions)) or "-")
    rep.add("domains", ", ".join(sorted(lf.domains)) or "-")
    rep.add("status", "lattice ok")
    rep.result = {
        "elements": list(lat.names),
        "bottom": lat.name(lat.bottom),
        "top": lat.name(lat.top),
        "covers": [[lat.name(a), lat.name(b)] for a, b in covers],
        "functions": sorted(lf.functions),
        "domains": {k: _names(lat, d.image) for k, d in sorted(lf.domains.items())},
    }
    if args.dot_dir:
        _write(Path(args.dot_dir) / "lattice.dot", lattice_dot(lat))
    if args.figure:
        from .plotting import kernel_figure
        kernel_figure(lat, (), (), args.figure, "Hasse diagram")
    return rep


def cmd_bca(args) -> Report:
    rep = Report("bca")
    lf = _open_lattice(args, rep)
    lat = lf.lattice
    dom = _pick_domain(args, lf, rep)
    rep.add("domain", f"{dom.name} = {_braced(lat, dom.image)}")
    tables = {}
    for fn in _pick_fns(args, lf):
        table = bca(dom, fn)
        tables[fn.name] = {lat.name(a): lat.name(b) for a, b in sorted(table.entries.items())}
        for a, b in sorted(table.entries.items()):
            rep.lines.append(f"{fn.name}^A({lat.name(a)}) = {lat.name(b)}")
    rep.result = {"domain": _names(lat, dom.image), "tables": tables}
    return rep


def cmd_kernel(args) -> Report:
    rep = Report("kernel")
    lf = _open_lattice(args, rep)
    lat = lf.lattice
    dom = _pick_domain(args, lf, rep)
    fns = _pick_fns(args, lf)
    if args.oracle and len(dom.image) > ORACLE_IMAGE_LIMIT:
        raise InputError(f"--oracle needs a domain of at most {ORACLE_IMAGE_LIMIT} elements, got {len(dom.image)}")
    res = correctness_kernel(dom, fns)
    rep.add("domain", f"{dom.name} = {_braced(lat, dom.image)}")
    rep.add("functions", ", ".join(f.name for f in fns))
    per_fn = {}
    for name, w in res.per_function.items():
        rep.add(f"image {name}^A", _braced(lat, w.image))
        for y, pre in sorted(w.max_preimages.items()):
            rep.add(f"max preimage {name}^A -> {lat.name(y)}", _braced(lat, pre))
        per_fn[name] = {
            "image": _names(lat, w.image),
            "max_preimages": {lat.name(y): _names(lat, p) for y, p in w.max_preimages.items()},
        }
    rep.add("generators", _braced(lat, res.required))
    rep.add("kernel", _braced(lat, res.kernel.image))
    rep.add("removed", _braced(lat, res.removed))
    rep.add("verification", res.verification)
    rep.result = {
        "domain": _names(lat, dom.image),
        "functions": per_fn,
        "generators": _names(lat, res.required),
        "kernel": _names(lat, res.kernel.image),
        "removed": _names(lat, res.removed),
        "verification": res.verification,
    }
    if args.oracle:
        oracle = kernel_oracle(dom, fns)
        agree = oracle.image == res.kernel.image
        rep.add("oracle", f"{_braced(lat, oracle.image)} ({'agrees' if agree else 'DISAGREES'})")
        rep.result["oracle"] = {"kernel": _names(lat, oracle.image), "agrees": agree}
    if args.dot_dir:
        _write(Path(args.dot_dir) / "kernel.dot", domain_dot(dom, res.kernel))
    if args.figure:
        from .plotting import kernel_figure
        kernel_figure(lat, dom.image, res.kernel.image, args.figure, f"kernel of {dom.name}")
    return rep


# --- transition-system commands ------------------------------------------------

def _open_system(path: str, rep: Report) -> SystemFile:
    sf = load_system(path)
    rep.inputs[path] = _digest(path)
    return sf


def cmd_partition_kernel(args) -> Report:
    rep = Report("partition-kernel")
    sf = _open_system(args.system, rep)
    ts, part = sf.system, sf.partition
    groups = merge_groups(ts, part)
    kern = partition_kernel(ts, part)
    merged = [
        "{" + ",".join(part.block_name(i, ts) for i in g) + "} -> " + ts.render(part.gamma(g))
        for g in groups
    ]
    rep.add("partition", part.render(ts))
    rep.add("kernel", kern.render(ts))
    rep.add("merged", "; ".join(merged) or "nothing")
    rep.result = {
        "partition": [sorted(ts.labels[s] for s in b) for b in part.blocks],
        "kernel": [sorted(ts.labels[s] for s in b) for b in kern.blocks],
        "merged": merged,
    }
    stages = [part, kern]
    if args.iterate:
        stages = iterate_partition_kernel(ts, part)
        rep.add("iterated (beyond the single-pass guarantee)", " => ".join(p.render(ts) for p in stages))
        rep.result["iterated"] = [p.render(ts) for p in stages]
    if args.dot_dir:
        for i, p in enumerate(stages):
            _write(Path(args.dot_dir) / f"stage{i}.dot", ats_dot(build_ats(ts, p), f"stage{i}"))
    if args.figure:
        from .plotting import ats_figure
        titles = ["original"] + [f"kernel {i}" if args.iterate else "kernel" for i in range(1, len(stages))]
        ats_figure([(t, build_ats(ts, p), ()) for t, p in zip(titles, stages)], args.figure)
    return rep


def cmd_cegar(args) -> Report:
    rep = Report("cegar")
    sf = _open_system(args.system, rep)
    ts = sf.system
    if not ts.init or not ts.error:
        raise InputError("system needs init and error states")
    out = cegar_loop(ts, sf.partition, args.heuristic, args.max_iters)
    rep.add("heuristic", out.heuristic.value)
    rep.add("initial", sf.partition.render(ts))
    steps = []
    for n, step in enumerate(out.trace, 1):
        p = step.partition
        path = "<" + ",".join(p.block_name(b, ts) for b in step.path) + ">"
        entry = {"path": path, "spurious": step.spu.spurious}
        if step.split is None:
            rep.add(f"iteration {n}", f"path {path} is real")
        else:
            s = step.split
            rep.add(
                f"iteration {n}",
                f"path {path} fails at {step.spu.failure_index}; dead {ts.render(s.dead)}; "
                f"bad {ts.render(s.bad)}; irrelevant {ts.render(s.irrelevant)}; "
                f"dead_irr {ts.render(s.dead_irr)}; bad_irr {ts.render(s.bad_irr)}",
            )
            rep.add(f"refined {n}", step.refined.render(ts))
            entry.update(
                failure_index=step.spu.failure_index,
                dead=ts.render(s.dead), bad=ts.render(s.bad), irrelevant=ts.render(s.irrelevant),
                dead_irr=ts.render(s.dead_irr), bad_irr=ts.render(s.bad_irr),
                refined=step.refined.render(ts),
            )
        steps.append(entry)
    rep.add("final", out.partition.render(ts))
    verdict = out.verdict.value
    if out.concrete_path is not None:
        verdict += " " + " ".join(ts.labels[s] for s in out.concrete_path)
    rep.lines.append(verdict)
    rep.result = {
        "heuristic": out.heuristic.value,
        "initial": sf.partition.render(ts),
        "iterations": steps,
        "final": out.partition.render(ts),
        "verdict": out.verdict.value,
        "counterexample": [ts.labels[s] for s in out.concrete_path] if out.concrete_path else None,
    }
    partitions = out.partitions()
    paths = [s.path for s in out.trace]
    if args.dot_dir:
        for i, p in enumerate(partitions):
            _write(Path(args.dot_dir) / f"iter{i:02d}.dot", ats_dot(build_ats(ts, p), f"iter{i}"))
    if args.figure:
        from .plotting import ats_figure
        panels = [
            (f"step {i}", build_ats(ts, p), paths[i] if i < len(paths) else ())
            for i, p in enumerate(partitions)
        ]
        ats_figure(panels, args.figure)
    return rep


def cmd_coro2_check(args) -> Report:
    rep = Report("coro2-check")
    cases: list[tuple[str, Any, Any]] = []
    if args.system:
        sf = _open_system(args.system, rep)
        cases.append((args.system, sf.system, sf.partition))
    else:
        rng = random.Random(args.seed)
        for i in range(args.count):
            ts, part = random_system(rng, max_states=12, max_blocks=6)
            cases.append((f"random#{i}", ts, part))
    failures, spurious = [], 0
    for name, ts, part in cases:
        r = coro2_check(ts, part, args.max_len)
        spurious += r.checked
        if not r.ok:
            failures.append(name)
    rep.add("seed", args.seed if not args.system else "-")
    rep.add("systems", len(cases))
    rep.add("spurious kernel paths checked", spurious)
    rep.add("failures", ", ".join(failures) or "none")
    rep.lines.append("OK" if not failures else "FAILED")
    rep.result = {
        "seed": None if args.system else args.seed,
        "systems": len(cases),
        "spurious_paths": spurious,
        "failures": failures,
        "ok": not failures,
    }
    return rep


# --- predicate abstraction ---------------------------------------------------

def cmd_predabs(args) -> Report:
    rep = Report("predabs")
    fx = foo_fixture(args.modulus)
    tables = {}
    for stmt in (fx.s1, fx.s2):
        table = bca_post_b(fx.preds, fx.space, stmt)
        tables[stmt.name] = {render_vec(v): render_set(t) for v, t in table.items()}
        for v, t in table.items():
            rep.add(f"{stmt.name}^B({render_vec(v)})", render_set(t))
    kern = boolean_kernel(fx.preds, fx.space, [fx.s1, fx.s2])
    kimage = sorted(kern.carrier.name(x) for x in kern.image)
    rep.add("kernel", "{" + ", ".join(kimage) + "}")
    res = foo_verification(args.abstraction, args.modulus)
    rep.add("abstraction", res.abstraction.value)
    rep.add("iterates", " -> ".join(res.chain))
    rep.add("loop head", res.loop_exit)
    rep.add("after x=y", res.after_guard)
    rep.lines.append(res.verdict.value)
    rep.result = {
        "modulus": args.modulus,
        "predicates": [p.name for p in fx.preds.predicates],
        "tables": tables,
        "kernel": kimage,
        "abstraction": res.abstraction.value,
        "iterates": list(res.chain),
        "loop_head": res.loop_exit,
        "after_guard": res.after_guard,
        "verdict": res.verdict.value,
    }
    return rep


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# --- argument parsing --------------------------------------------------------

def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _modulus(text: str) -> int:
    n = int(text)
    if n < 3:
        raise argparse.ArgumentTypeError("modulus must be at least 3")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, fn: Callable, help: str, figure: bool = True):
        p = sub.add_parser(name, help=help)
        p.set_defaults(run=fn)
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        if figure:
            p.add_argument("--figure", metavar="PATH", help="also render a matplotlib figure")
        return p

    p = command("lattice-check", cmd_lattice_check, "load and validate a lattice file")
    p.add_argument("--lattice", required=True)
    p.add_argument("--dot-dir")

    p = command("bca", cmd_bca, "best correct approximations on a domain", figure=False)
    p.add_argument("--lattice", required=True)
    p.add_argument("--domain", default="full", help="'full', a domain name from the lattice file, or a domain file")
    p.add_argument("--fn", nargs="+")

    p = command("kernel", cmd_kernel, "correctness kernel of a domain")
    p.add_argument("--lattice", required=True)
    p.add_argument("--domain", default="full", help="'full', a domain name from the lattice file, or a domain file")
    p.add_argument("--fn", nargs="+")
    p.add_argument("--oracle", action="store_true", help="cross-check by brute force")
    p.add_argument("--dot-dir")

    p = command("partition-kernel", cmd_partition_kernel, "simplify a partition-abstracted system")
    p.add_argument("--system", required=True)
    p.add_argument("--iterate", action="store_true", help="repeat until the partition is stable")
    p.add_argument("--dot-dir")

    p = command("cegar", cmd_cegar, "abstraction refinement loop")
    p.add_argument("--system", required=True)
    p.add_argument("--heuristic", choices=[h.value for h in Heuristic], default="basic")
    p.add_argument("--max-iters", type=_positive)
    p.add_argument("--dot-dir")

    p = command("coro2-check", cmd_coro2_check, "spurious paths survive kernel simplification", figure=False)
    p.add_argument("--system", help="check one system instead of random ones")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=_positive, default=50)
    p.add_argument("--max-len", type=_positive, default=6)

    p = command("predabs", cmd_predabs, "predicate abstraction case study", figure=False)
    p.add_argument("--fixture", choices=["foo"], default="foo")
    p.add_argument("--abstraction", choices=[a.value for a in Abstraction], default="boolean")
    p.add_argument("--modulus", type=_modulus, default=4)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        rep = args.run(args)
    except FileNotFoundError as exc:
        print(f"egas: cannot read {exc.filename or exc.args[0]}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"egas: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FormatError, LatticeError, InputError, ValueError) as exc:
        print(f"egas: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    sys.stdout.write(rep.to_json() + "\n" if args.json else rep.to_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
