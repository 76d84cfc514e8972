"""Command-line entry point: ``splitlimit <command> ...``.

Machine-readable results go to stdout or ``--out``; progress and errors go to
stderr. Exit codes: 0 success, 1 failed check or module error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

from . import __version__
from . import asymptotics, crt, enumeration, sampler, stats, treecodec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# -- io helpers --------------------------------------------------------------------


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def meta(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",) and not callable(v)}
    return {"tool": "splitlimit", "version": __version__, "config": cfg}


def csv_header(args) -> str:
    m = meta(args)
    lines = [f"# tool=splitlimit version={m['version']}"]
    lines += [f"# {k}={v}" for k, v in m["config"].items()]
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def read_json(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def resolve_seed(args) -> None:
    if getattr(args, "seed", "absent") is None:
        args.seed = sampler.seed_from_env(0)


# -- commands ----------------------------------------------------------------------


def cmd_count(args) -> int:
    body = enumeration.counts_csv(args.family, args.max_n)
    emit(csv_header(args) + body, args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    c = asymptotics.solve_constants(args.family, args.precision)
    rep = asymptotics.verify_constant_identities(args.family, args.precision)
    out = {"meta": meta(args), "constants": c.to_dict(), "identities_ok": rep.ok, "identity_failures": rep.failures()}
    emit(dumps(out), args.out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_sample(args) -> int:
    resolve_seed(args)
    outdir = Path(args.out)
    manifest = {"meta": meta(args), "files": []}
    for r in range(args.count):
        cfg = sampler.SamplerConfig(args.family, args.size, args.mode, args.eps, args.seed)
        rng = sampler.make_rng(args.seed, r)
        t = sampler.sample(cfg, rng)
        g = treecodec.gr(t)
        obj = {"n": g.n, "edges": [list(e) for e in g.edges()], "meta": {**meta(args), "replicate": r}}
        name = f"graph_{r:05d}.json"
        write_atomic(outdir / name, json.dumps(obj, separators=(",", ":")) + "\n")
        if args.trees:
            write_atomic(outdir / f"tree_{r:05d}.json", t.to_json() + "\n")
        manifest["files"].append(name)
        print(f"replicate {r}: {g.n} vertices", file=sys.stderr)
    write_atomic(outdir / "manifest.json", dumps(manifest))
    return EXIT_OK


def _load_tree(path) -> treecodec.DHTree:
    t = treecodec.DHTree.from_json(read_json(path))
    treecodec.validate_reduced(t)
    return t


def _load_graph(path) -> treecodec.Graph:
    return treecodec.Graph.from_json(read_json(path))


def cmd_tree(args) -> int:
    t = _load_tree(args.input)
    if args.action == "distance":
        if not args.pair:
            raise argparse.ArgumentTypeError("--pair is required for distance")
        a, b = args.pair
        emit(f"{treecodec.distance(t, a, b)}\n", args.out)
    elif args.action == "graph":
        emit(treecodec.gr(t).to_json() + "\n", args.out)
    elif args.action == "classify":
        emit(dumps({"meta": meta(args), **treecodec.classify(t)}), args.out)
    return EXIT_OK


def cmd_distances(args) -> int:
    """All pairwise distances of a tree (read on the tree) or graph (BFS)."""
    text = read_json(args.input)
    obj = json.loads(text)
    if isinstance(obj, dict) and "edges" in obj:
        g = treecodec.Graph.from_json(obj)
        labels = list(range(g.n))
        rows = [g.bfs(v) for v in labels]
    else:
        t = treecodec.DHTree.from_json(obj)
        labels = [0] + t.leaves()
        rows = [[treecodec.distance(t, v, w) for w in labels] for v in labels]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex", *labels])
    for v, row in zip(labels, rows):
        w.writerow([v, *row])
    emit(csv_header(args) + buf.getvalue(), args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    g = _load_graph(args.input)
    emit(treecodec.decompose(g).to_json() + "\n", args.out)
    return EXIT_OK


def cmd_crt(args) -> int:
    resolve_seed(args)
    rng = sampler.make_rng(args.seed, 5, args.k)
    k = args.k
    pairs = [(i, j) for i in range(k + 1) for j in range(i + 1, k + 1)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["replicate", "shape", *[f"d_{i}_{j}" for i, j in pairs]])
    for r in range(args.count):
        shape, lengths = crt.sample_kproper(k, rng)
        m = crt.distance_matrix(shape, lengths)
        w.writerow([r, crt.shape_key(shape), *[repr(float(m[i, j])) for i, j in pairs]])
    emit(csv_header(args) + buf.getvalue(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    resolve_seed(args)
    kw = dict(mode=args.mode, eps=args.eps, jobs=args.jobs)
    if args.experiment == "two-point":
        rep = stats.two_point(args.family, args.n, args.reps, args.seed, **kw)
    else:
        rep = stats.k_point(args.family, args.n, args.k, args.reps, args.seed, **kw)
    if args.csv:
        write_atomic(args.csv, rep.csv_text(meta(args)))
    if args.svg:
        write_atomic(args.svg, rep.svg_text())
    summary = {"meta": meta(args), "report": rep.to_dict()}
    print(dumps(summary), end="")
    return EXIT_OK


def cmd_identities(args) -> int:
    rep = enumeration.verify_identities(args.order, brute_max_n=args.brute_max_n, max_k=args.max_k, strict=False)
    out = {
        "meta": meta(args),
        "ok": rep.ok,
        "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in rep.checks],
    }
    emit(dumps(out), args.out)
    for c in rep.failures():
        print(f"FAIL {c.name}: {c.detail}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_semilarge(args) -> int:
    rows = []
    for n in args.n:
        r = asymptotics.semilarge_check(args.family, n, args.x)
        rows.append(dataclasses.asdict(r))
    emit(dumps({"meta": meta(args), "rows": rows}), args.out)
    return EXIT_OK


# -- selftest ----------------------------------------------------------------------


def golden_dir() -> Path:
    return Path(str(resources.files("splitlimit") / "data"))


def _selftest_checks(gdir: Path):
    """Yield (name, ok, detail); every check is deterministic."""
    for f in enumeration.FAMILIES:
        path = gdir / f"golden_counts_{f}.csv"
        try:
            rows = list(csv.DictReader(line for line in path.read_text().splitlines() if not line.startswith("#")))
            golden = {int(r["n"]): int(r["tree_count"]) for r in rows}
            bad = [n for n in range(1, 11) if golden.get(n) != enumeration.count_trees(f, n)]
            yield f"golden counts {path.name}", not bad, f"{path}: mismatch at n={bad}" if bad else ""
        except (OSError, KeyError, ValueError) as exc:
            yield f"golden counts {path.name}", False, f"{path}: {exc}"
        for n in range(1, 6):
            want = enumeration.count_trees(f, n)
            got = len(enumeration.brute_force_trees(f, n))
            yield f"count {f} n={n}", got == want, f"{got} brute vs {want}" if got != want else ""
    rep = enumeration.verify_identities(15, brute_max_n=5, max_k=2, strict=False)
    for c in rep.checks:
        yield f"identity {c.name}", c.ok, c.detail
    for f in enumeration.FAMILIES:
        r = asymptotics.verify_constant_identities(f, 64)
        yield f"constants {f} (64 bit)", r.ok, json.dumps(r.failures()) if not r.ok else ""
    for f in enumeration.FAMILIES:
        rng = sampler.make_rng(0, 7, enumeration.FAMILIES.index(f))
        bad = 0
        for size in (3, 10, 30, 60):
            for _ in range(5):
                t = sampler.exact_sampler(f, 60).sample(size, rng)
                if treecodec.DHTree.from_json(t.to_json()) != t or treecodec.decompose(treecodec.gr(t)) != t:
                    bad += 1
        yield f"round trips {f} sizes<=60", bad == 0, f"{bad} failures" if bad else ""


def cmd_selftest(args) -> int:
    gdir = Path(args.golden_dir) if args.golden_dir else golden_dir()
    failed = []
    for name, ok, detail in _selftest_checks(gdir):
        line = f"{'PASS' if ok else 'FAIL'} {name}" + (f" -- {detail}" if detail else "")
        print(line, flush=True)
        if not ok:
            failed.append(line)
    print(f"selftest: {len(failed)} failed", flush=True)
    for line in failed:
        print(line, file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


# -- parser --------------------------------------------------------------------------


def _family(p):
    p.add_argument("--family", required=True, choices=enumeration.FAMILIES)


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="splitlimit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"splitlimit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="exact tree and graph counts as CSV")
    _family(p)
    p.add_argument("--max-n", type=_positive, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("constants", help="singularity and scaling constants as JSON")
    _family(p)
    p.add_argument("--precision", type=int, default=128)
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("sample", help="random family graphs, one JSON file per replicate")
    _family(p)
    p.add_argument("--size", type=_positive, required=True)
    p.add_argument("--mode", choices=sampler.MODES, default="exact")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=_positive, default=1)
    p.add_argument("--trees", action="store_true", help="also write the decomposition trees")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("tree", help="queries on a tree JSON file")
    p.add_argument("action", choices=("distance", "graph", "classify"))
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--pair", type=int, nargs=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("distances", help="distance matrix of a tree or graph JSON file as CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("decompose", help="reduced decomposition tree of a graph JSON file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("crt", help="continuum random tree distance matrices")
    p.add_argument("action", choices=("sample",))
    p.add_argument("-k", type=_positive, required=True)
    p.add_argument("--count", type=_positive, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_crt)

    p = sub.add_parser("verify", help="Monte-Carlo distance experiments")
    p.add_argument("experiment", choices=("two-point", "k-point"))
    _family(p)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--reps", type=_positive, default=1000)
    p.add_argument("--k", type=_positive, default=3)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=sampler.MODES, default="boltzmann")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--jobs", type=_positive, default=os.cpu_count() or 1)
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("identities", help="exact generating-function identities")
    p.add_argument("--order", type=_positive, default=30)
    p.add_argument("--brute-max-n", type=_positive, default=6)
    p.add_argument("--max-k", type=_positive, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("semilarge", help="coefficient vs Rayleigh-density prediction for jump powers")
    _family(p)
    p.add_argument("--n", type=_positive, nargs="+", required=True)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_semilarge)

    p = sub.add_parser("selftest", help="fast deterministic subset of the acceptance checks")
    p.add_argument("--golden-dir")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError, RuntimeError, AssertionError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
