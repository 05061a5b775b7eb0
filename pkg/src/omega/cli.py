"""The ``omega`` command line.

Every verb prints a plain-text report on stdout.  Exit status is 0 when the
verdict is true, 1 when it is false (a witness is printed), and 2 when the
input cannot be read.  Set ``OMEGA_MAX_WORKERS`` to spread per-tree checks
over several processes; the report does not depend on it.
"""
from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

from . import serialize as ser
from .freecat import free_cells, multiply, fmap, unit as free_unit, unit_free
from .globset import GlobularSet, OmegaError, Report, hom_enumerate, terminal, validate
from .kontraction import build_K, census, compose as k_compose, encode, normalize
from .nerve import (
    CellularSet, Theta, boundary_extension_check, category_of_elements, free_algebra, functoriality_check,
    nerve_complex_stats, nerve_of_algebra, representable, segal_check,
)
from .operad import check_associativity, check_operad, is_contractible
from .tree import (
    Tree, boundary_union, enumerate_trees, globe_cover_check, is_cover, planar_json, subtrees,
)

EXIT_OK, EXIT_FALSE, EXIT_INPUT = 0, 1, 2


def shape_note(t: Tree) -> str:
    if t.linear:
        return f" (globe {t.height})"
    if t.height == 1:
        return f" (star {len(t.planar)})"
    return ""


def tree_name(t: Tree) -> str:
    return planar_json(t.planar) + shape_note(t)


def max_workers() -> int:
    raw = os.environ.get("OMEGA_MAX_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise OmegaError(f"OMEGA_MAX_WORKERS must be an integer, got {raw!r}") from None


_JOB: Callable | None = None


def _run_job(i: int):
    return _JOB(i)


def per_tree(fn: Callable, trees: Sequence[Tree]) -> list:
    """``[fn(t) for t in trees]``, in worker processes when allowed; order is preserved."""
    global _JOB
    workers = min(max_workers(), len(trees))
    if workers <= 1:
        return [fn(t) for t in trees]
    _JOB = lambda i: fn(trees[i])
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(workers, mp_context=ctx) as pool:
        return list(pool.map(_run_job, range(len(trees))))


# -- argument helpers ------------------------------------------------------------------

def _add_cellular_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--cellular", metavar="FILE", help="cell-json file")
    src.add_argument("--free-algebra", metavar="TREE", help="nerve of the free algebra on TREE")
    src.add_argument("--representable", metavar="TREE", help="the representable presheaf on TREE")
    p.add_argument("--operad", default="terminal", help="initial, terminal or an operad-json file (default terminal)")
    p.add_argument("--trunc-dim", type=int, default=2)
    p.add_argument("--bound", type=int, default=5, help="largest tree size evaluated (default 5)")
    p.add_argument("--save", metavar="FILE", help="also write the cellular set as cell-json")


def _cellular(args) -> CellularSet:
    if args.cellular:
        return ser.read_cellular(args.cellular)
    ref = args.operad or "terminal"
    o = ser.read_operad(ref, args.trunc_dim, args.bound)
    th = Theta(o, args.bound)
    if args.free_algebra:
        t = ser.read_tree(args.free_algebra)
        x, act, _ = free_algebra(th, t)
        out = nerve_of_algebra(th, x, act)
        out.name = f"nerve of the free algebra on {planar_json(t.planar)}"
    else:
        t = ser.read_tree(args.representable)
        out = representable(th, t)
    if args.save:
        ref = ref if ref in ("initial", "terminal") else os.path.abspath(ref)
        with open(args.save, "w", encoding="utf-8") as fh:
            fh.write(ser.dumps_cellular(out, ref))
    return out


def _trees_arg(x: CellularSet, arg: str) -> list[Tree]:
    if arg == "all":
        return list(x.theta.trees)
    return [ser.read_tree(arg)]


def _print_report(rep: Report, limit: int = 20) -> None:
    for v in rep.violations[:limit]:
        print(f"  {v}")
    if len(rep.violations) > limit:
        print(f"  ... {len(rep.violations) - limit} more")


# -- verbs ------------------------------------------------------------------------------

def cmd_trees(args) -> int:
    if args.action == "enumerate":
        ts = enumerate_trees(args.max_cells, max_height=args.max_height)
        for t in ts:
            print(f"{planar_json(t.planar)}  cells={t.size} height={t.height}")
        print(f"{len(ts)} trees")
        return EXIT_OK
    if args.tree is None:
        raise OmegaError(f"trees {args.action} needs --tree")
    t = ser.read_tree(args.tree)
    if args.action == "show":
        print(f"tree {tree_name(t)}")
        print(f"cells {t.size}, height {t.height}, linear {str(t.linear).lower()}")
        print(f"peaks {' '.join(t.peaks)}")
        for c in t.underlying:
            faces = "" if c.dim == 0 else f" : {c.src} -> {c.tgt}"
            print(f"  {c.id} (dim {c.dim}){faces}")
        return EXIT_OK
    if args.action == "subtrees":
        subs = subtrees(t, proper_only=not args.all)
        for s, f in subs:
            print(f"{planar_json(s.planar)}  image {' '.join(sorted(f.image()))}")
        print(f"{len(subs)} subtrees")
        return EXIT_OK
    ok, witness = globe_cover_check(t)
    print(f"globe cover of {tree_name(t)}: {'holds' if ok else 'fails'}")
    if not ok:
        print(f"  comparison map: {dict(witness.assignment) if witness is not None else 'none'}")
    return EXIT_OK if ok else EXIT_FALSE


def cmd_hom(args) -> int:
    if args.operad:
        s, t = ser.read_tree(args.source), ser.read_tree(args.target)
        o = ser.read_operad(args.operad, max(s.height, t.height, args.trunc_dim), max(s.size, t.size))
        th = Theta(o, max(s.size, t.size))
        maps = th.hom(s, t)
        print(f"hom {planar_json(s.planar)} -> {planar_json(t.planar)} over {o.name or args.operad}: {len(maps)}")
        if args.list:
            for f in maps:
                print("  " + "  ".join(f"{c}:{a.op}[{a.cell.token()}]" for c, a in zip(s.underlying.ids, f.images)))
        return EXIT_OK
    x, y = _graph_or_tree(args.source), _graph_or_tree(args.target)
    maps = hom_enumerate(x, y)
    print(f"globular maps: {len(maps)}")
    if args.list:
        for f in maps:
            print("  " + " ".join(f"{c}->{f(c)}" for c in x.ids))
    return EXIT_OK


def _graph_or_tree(arg: str):
    if arg.lstrip().startswith("[") or not arg.endswith(".json"):
        return ser.read_tree(arg).underlying
    text = ser.read_text(arg)
    if text.lstrip().startswith("["):
        return ser.loads_ptree(text, arg).underlying
    return ser.loads_gset(text, arg)


def cmd_free_cells(args) -> int:
    x = ser.read_gset(args.graph)
    fc = free_cells(x, args.dim, args.max_tree_cells)
    by_tree: dict[str, int] = {}
    for c in fc:
        key = planar_json(c.shape.planar)
        by_tree[key] = by_tree.get(key, 0) + 1
    print(f"free {args.dim}-cells with at most {args.max_tree_cells} tree cells: {len(fc)}")
    for key, n in by_tree.items():
        print(f"  {key}: {n}")
    if fc.truncated:
        print("  (more cells exist beyond the tree bound)")
    if args.list:
        for c in fc:
            print(json.dumps(c.as_record(), sort_keys=True))
    return EXIT_OK


def _limit_verb(args, check: Callable, label: str) -> int:
    x = _cellular(args)
    trees = _trees_arg(x, args.tree)
    if check is boundary_extension_check:
        if args.tree == "all":
            trees = [t for t in trees if not t.linear]
        elif trees[0].linear:
            raise OmegaError("the boundary extension check is only defined at non-linear trees")
    results = per_tree(lambda t: check(x, t), trees)
    failed = 0
    for t, (ok, witness) in zip(trees, results):
        print(f"{label} at {tree_name(t)}: {'holds' if ok else 'fails'}")
        if not ok:
            failed += 1
            print(f"  witness: {witness.describe()}")
    return EXIT_OK if not failed else EXIT_FALSE


def cmd_segal(args) -> int:
    return _limit_verb(args, segal_check, "segal condition")


def cmd_boundary(args) -> int:
    if args.cellular or args.free_algebra or args.representable:
        return _limit_verb(args, boundary_extension_check, "boundary extension")
    if args.tree is None or args.tree == "all":
        raise OmegaError("boundary needs --tree TREE, or a cellular source")
    t = ser.read_tree(args.tree)
    sub, _ = boundary_union(t)
    whole = len(sub) == t.size
    covers = is_cover([f for _, f in subtrees(t)], t)
    print(f"tree {tree_name(t)}: linear {str(t.linear).lower()}")
    print(f"boundary has {len(sub)} of {t.size} cells; equals the tree: {str(whole).lower()}")
    print(f"proper subtrees cover: {str(covers).lower()}")
    ok = whole == covers == (not t.linear)
    if not ok:
        missing = sorted(set(t.underlying.ids) - set(sub.ids))
        print(f"  witness: cells outside the boundary {' '.join(missing)}")
    return EXIT_OK if ok else EXIT_FALSE


def cmd_contractible(args) -> int:
    trunc = args.max_dim if args.trunc_dim is None else args.trunc_dim
    o = ser.read_operad(args.operad, trunc, args.tree_bound)
    print(f"operad {o.name or args.operad}: truncated at dimension {o.coll.trunc_dim}, trees up to {o.coll.tree_bound} cells")
    verdicts = is_contractible(o, args.max_dim)
    failed = False
    for v in verdicts:
        print(f"dimension {v.dim}: {v.status} ({v.squares} squares, {len(v.witnesses)} unfilled)")
        if not v.holds:
            failed = True
            sq = v.witnesses[0]
            print(f"  witness: {sq.describe()}{shape_note(sq.tree)}")
    return EXIT_FALSE if failed else EXIT_OK


def cmd_build_k(args) -> int:
    kb = build_K(args.max_dim, args.max_tree_cells, args.max_term_size)
    total = kb.operad.total
    print(f"K truncated at dimension {args.max_dim}, trees up to {args.max_tree_cells} cells, "
          f"terms up to size {args.max_term_size}")
    for n in range(args.max_dim + 1):
        rows = census(kb, n)
        gens = sum(g for g, _ in rows.values())
        print(f"dimension {n}: {len(total.cells_of_dim(n))} cells, {gens} generators")
        for t, (g, c) in rows.items():
            print(f"  {t}: generators {g}, terms {c}")
    if kb.frontier:
        print("discarded by the tree bound:")
        for n, t, k in kb.frontier:
            print(f"  dimension {n}, tree {t}: {k}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            ser.write_operad(kb.operad, fh)
        print(f"wrote {args.out}")
    if args.inventory:
        inv = {}
        for n in range(args.max_dim + 1):
            per: dict[str, dict] = {}
            for cid in total.cells_of_dim(n):
                key = planar_json(kb.operad.over(cid).planar)
                entry = per.setdefault(key, {"generators": 0, "terms": 0, "encodings": []})
                entry["terms"] += 1
                entry["generators"] += cid.startswith("g")
                entry["encodings"].append(encode(kb.term(cid)))
            inv[str(n)] = dict(sorted(per.items()))
        with open(args.inventory, "w", encoding="utf-8") as fh:
            json.dump(inv, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.inventory}")
    return EXIT_OK


def cmd_elements(args) -> int:
    x = _cellular(args)
    c, _ = category_of_elements(x)
    rep = c.check()
    stats = nerve_complex_stats(c, args.max_simplex_dim)
    print(f"category of elements of {x.name or 'the cellular set'}")
    print(f"objects {len(c.objects)}, morphisms {len(c.morphisms)}")
    print(f"non-degenerate simplices by dimension: {' '.join(map(str, stats.counts))}")
    print(f"euler characteristic {stats.euler}{' (partial: longer chains exist)' if stats.partial else ''}")
    term = c.labels.get(stats.terminal, str(stats.terminal)) if stats.has_terminal else "none"
    print(f"terminal object: {term}")
    if not rep:
        print("category laws fail:")
        _print_report(rep)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(ser.dumps_dot(c))
        print(f"wrote {args.dot}")
    return EXIT_OK if rep else EXIT_FALSE


def cmd_check(args) -> int:
    if args.laws:
        return _check_laws(args.samples, args.seed)
    if args.gset:
        text = ser.read_text(args.gset)
        data = ser._decode(text, "gset-json", args.gset)
        rep = validate(GlobularSet.from_records(data["cells"]))
        what = f"globular set {args.gset}"
    elif args.map:
        f = ser.read_map(args.map)
        rep, what = f.validate(), f"map {args.map}"
    elif args.operad:
        o = ser.read_operad(args.operad, args.trunc_dim, args.tree_bound)
        rep, what = check_operad(o), f"operad {o.name or args.operad}"
    elif args.cellular or args.free_algebra or args.representable:
        x = _cellular(args)
        rep, what = functoriality_check(x), f"cellular set {x.name or args.cellular}"
    else:
        raise OmegaError("check needs one of --gset, --map, --operad, --cellular, --free-algebra, --representable, --laws")
    print(f"{what}: {'ok' if rep else 'violations'}")
    _print_report(rep)
    return EXIT_OK if rep else EXIT_FALSE


def _check_laws(samples: int, seed: int) -> int:
    """Randomly sampled monad and operad laws."""
    rng = random.Random(seed)
    rep = Report()
    x = terminal(2)
    cells = list(free_cells(x, 2, 7))
    picked = [cells[rng.randrange(len(cells))] for _ in range(samples)]
    for c in picked:
        if multiply(unit_free(c)) != c or multiply(fmap(c, lambda v: free_unit(x, v))) != c:
            rep.add(f"unit law fails at {c.token()}")
    kb = build_K(2, 5, 3)
    keys = list(kb.operad.mult)
    sample = [keys[rng.randrange(len(keys))] for _ in range(samples)]
    rep.extend(check_associativity(kb.operad, sample), "K: ")
    for a, labels in sample:
        t = k_compose(kb.term(a), [kb.term(l) for l in labels])
        if normalize(t) != t or normalize(normalize(t)) != normalize(t):
            rep.add(f"normal form not stable at {encode(t)}")
    print(f"laws on {samples} samples (seed {seed}): {'ok' if rep else 'violations'}")
    _print_report(rep)
    return EXIT_OK if rep else EXIT_FALSE


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="omega", description="Trees, globular operads and their nerves.")
    sub = p.add_subparsers(dest="verb", required=True)

    q = sub.add_parser("trees", help="enumerate and inspect trees")
    q.add_argument("action", choices=["enumerate", "show", "subtrees", "globe-cover"])
    q.add_argument("--max-cells", type=int, default=5)
    q.add_argument("--max-height", type=int)
    q.add_argument("--tree", help="ptree-json string or file")
    q.add_argument("--all", action="store_true", help="include the tree itself among its subtrees")
    q.set_defaults(run=cmd_trees)

    q = sub.add_parser("hom", help="count morphisms")
    q.add_argument("--source", required=True, help="tree or gset-json file")
    q.add_argument("--target", required=True, help="tree or gset-json file")
    q.add_argument("--operad", help="count Kleisli maps over this operad instead of globular maps")
    q.add_argument("--trunc-dim", type=int, default=0)
    q.add_argument("--list", action="store_true")
    q.set_defaults(run=cmd_hom)

    q = sub.add_parser("free-cells", help="cells of the free strict omega-category on a graph")
    q.add_argument("--graph", required=True, metavar="FILE")
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--max-tree-cells", type=int, default=5)
    q.add_argument("--list", action="store_true", help="print each cell as JSON")
    q.set_defaults(run=cmd_free_cells)

    q = sub.add_parser("segal", help="check the Segal condition")
    _add_cellular_source(q)
    q.add_argument("--tree", default="all", help="a tree, or 'all' (default)")
    q.set_defaults(run=cmd_segal)

    q = sub.add_parser("boundary", help="boundaries of trees and boundary extension")
    src = q.add_mutually_exclusive_group()
    src.add_argument("--cellular", metavar="FILE")
    src.add_argument("--free-algebra", metavar="TREE")
    src.add_argument("--representable", metavar="TREE")
    q.add_argument("--operad", default="terminal")
    q.add_argument("--trunc-dim", type=int, default=2)
    q.add_argument("--bound", type=int, default=5)
    q.add_argument("--save", metavar="FILE")
    q.add_argument("--tree", help="a tree, or 'all' with a cellular source")
    q.set_defaults(run=cmd_boundary)

    q = sub.add_parser("contractible", help="lifting against sphere inclusions")
    q.add_argument("--operad", required=True, help="initial, terminal or an operad-json file")
    q.add_argument("--max-dim", type=int, required=True)
    q.add_argument("--trunc-dim", type=int, help="truncation of a built-in operad (default --max-dim)")
    q.add_argument("--tree-bound", type=int, default=7)
    q.set_defaults(run=cmd_contractible)

    q = sub.add_parser("build-k", help="bounded initial operad with contractions")
    q.add_argument("--max-dim", type=int, required=True)
    q.add_argument("--max-tree-cells", type=int, required=True)
    q.add_argument("--max-term-size", type=int, required=True)
    q.add_argument("--out", metavar="FILE", help="write the operad as operad-json")
    q.add_argument("--inventory", metavar="FILE", help="write term encodings per dimension and tree")
    q.set_defaults(run=cmd_build_k)

    q = sub.add_parser("elements", help="category of elements and its nerve")
    _add_cellular_source(q)
    q.add_argument("--max-simplex-dim", type=int, default=8)
    q.add_argument("--dot", metavar="FILE", help="write the category as DOT")
    q.set_defaults(run=cmd_elements)

    q = sub.add_parser("check", help="validate inputs or sample algebraic laws")
    what = q.add_mutually_exclusive_group()
    what.add_argument("--gset", metavar="FILE")
    what.add_argument("--map", metavar="FILE")
    what.add_argument("--operad")
    what.add_argument("--cellular", metavar="FILE")
    what.add_argument("--free-algebra", metavar="TREE")
    what.add_argument("--representable", metavar="TREE")
    what.add_argument("--laws", action="store_true")
    q.add_argument("--trunc-dim", type=int, default=2)
    q.add_argument("--tree-bound", type=int, default=7)
    q.add_argument("--bound", type=int, default=5)
    q.add_argument("--save", metavar="FILE")
    q.add_argument("--samples", type=int, default=100)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(run=cmd_check)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except ser.FormatError as e:
        print(f"omega: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OmegaError as e:
        print(f"omega: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
