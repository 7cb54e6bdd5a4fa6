"""Command-line front end: ``tetstore <command> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench as benchmod
from .errors import PipelineError, TetStoreError
from .hilbert import assign_hcodes
from .interp import NodalField, interpolate_batch
from .locate import NOT_FOUND, LocatorConfig, locate_batch, prepare
from .mesh import MeshStore, validate_mesh
from .meshio import (
    generate_box,
    load_archive,
    load_field_csv,
    load_points_csv,
    load_tets_csv,
    load_vertices_csv,
    parse_delimiter,
    save_archive,
    write_rows,
    write_tets_csv,
    write_vertices_csv,
)
from .partition import partition
from .pipeline import LoadConfig, run_pipeline
from .surface import extract_unoriented, normalized_rows, orient

log = logging.getLogger("tetstore")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--delimiter", default=",", help="field separator: ',' (default), 'tab'")
    p.add_argument("--threads", type=int, default=None, help="locate worker threads (default: all cores)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-15, help="containment tolerance")
    p.add_argument("--max-steps", type=int, default=None, help="walk step limit per candidate")
    p.add_argument("--fanout", type=int, default=4, help="Hilbert candidates tried per point")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _floats(n):
    def parse(text):
        vals = [float(v) for v in text.replace(",", " ").split()]
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} numbers, got {text!r}")
        return tuple(vals)
    return parse


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="tetstore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a structured Kuhn box mesh")
    p.add_argument("--n", type=int, default=None, help="cells per axis (sets nx=ny=nz)")
    p.add_argument("--nx", type=int, default=4)
    p.add_argument("--ny", type=int, default=4)
    p.add_argument("--nz", type=int, default=4)
    p.add_argument("--box", type=_floats(6), default=(0, 0, 0, 1, 1, 1),
                   help="'x0 y0 z0 x1 y1 z1'")
    p.add_argument("--out", required=True, help="archive to write (.tmq)")
    p.add_argument("--vertices-out")
    p.add_argument("--tets-out")

    p = sub.add_parser("load", parents=[common], help="run the CSV load pipeline into an archive")
    p.add_argument("--vertices", required=True)
    p.add_argument("--tets", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("save", parents=[common], help="export an archive as vertex/tet CSV files")
    p.add_argument("--mesh", required=True)
    p.add_argument("--vertices-out", required=True)
    p.add_argument("--tets-out", required=True)

    p = sub.add_parser("validate", parents=[common], help="check mesh invariants")
    p.add_argument("--mesh")
    p.add_argument("--vertices")
    p.add_argument("--tets")

    p = sub.add_parser("locate", parents=[common], help="find the element containing each point")
    p.add_argument("--mesh", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("interp", parents=[common], help="interpolate a nodal field at points")
    p.add_argument("--mesh", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true", help="fail if any point is outside the mesh")

    p = sub.add_parser("surface", parents=[common], help="extract the oriented boundary surface")
    p.add_argument("--mesh", required=True)
    p.add_argument("--out", required=True, help="TriID,v0,v1,v2 rows")
    p.add_argument("--normalized-out", help="TriID,Rank,VertexID rows")
    p.add_argument("--unoriented-out", help="TriID,a,b,c rows with a<b<c")

    p = sub.add_parser("partition", parents=[common], help="Hilbert-order NTILE partitioning")
    p.add_argument("--mesh", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", parents=[common], help="point-location throughput benchmark")
    p.add_argument("--mesh", help="archive; omit to use a generated box (--gen-n)")
    p.add_argument("--gen-n", type=int, default=16)
    p.add_argument("--mode", choices=[benchmod.FIXED, benchmod.RANDOM], default=benchmod.FIXED)
    p.add_argument("--center", type=_floats(3), default=None)
    p.add_argument("--radius", type=float, nargs="+", default=[0.01],
                   help="cloud radius (fixed) or maximum radius (random); several allowed")
    p.add_argument("--clouds", type=int, nargs="+", default=[1], help="N (random mode)")
    p.add_argument("--total", type=int, default=20_000)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.add_argument("--locality", action="store_true",
                   help="also report Hilbert locality and candidate hit statistics")
    return parser


def _config(args) -> LocatorConfig:
    return LocatorConfig(epsilon=args.epsilon, max_steps=args.max_steps, fanout=args.fanout)


def _open_mesh(path) -> MeshStore:
    store = load_archive(path)
    if store.hcodes is None:
        assign_hcodes(store)
    return store


def cmd_gen(args, d):
    n = (args.n,) * 3 if args.n else (args.nx, args.ny, args.nz)
    box = args.box
    store = generate_box(*n, lo=box[:3], hi=box[3:])
    assign_hcodes(store)
    save_archive(store, args.out)
    if args.vertices_out:
        write_vertices_csv(store, args.vertices_out, d)
    if args.tets_out:
        write_tets_csv(store, args.tets_out, d)
    print(f"generated {store.n_vertices} vertices, {store.n_tets} tets -> {args.out}", file=sys.stderr)
    return 0


def cmd_load(args, d):
    try:
        store, report = run_pipeline(LoadConfig(args.vertices, args.tets, d))
    except PipelineError as exc:
        print(exc.report.describe(), file=sys.stderr)
        raise
    print(report.describe(), file=sys.stderr)
    save_archive(store, args.out)
    print(f"loaded {store.n_vertices} vertices, {store.n_tets} tets -> {args.out}", file=sys.stderr)
    return 0


def cmd_save(args, d):
    store = load_archive(args.mesh)
    write_vertices_csv(store, args.vertices_out, d)
    write_tets_csv(store, args.tets_out, d)
    return 0


def cmd_validate(args, d):
    if args.mesh:
        store = load_archive(args.mesh)
    elif args.vertices and args.tets:
        store = MeshStore.from_quads(load_vertices_csv(args.vertices, d), load_tets_csv(args.tets, d))
    else:
        raise ValueError("validate needs --mesh or both --vertices and --tets")
    report = validate_mesh(store)
    for f in report:
        print(f"{f.kind}: {f.detail}")
    print(f"{len(report)} finding(s)", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_locate(args, d):
    store = prepare(_open_mesh(args.mesh))
    pts = load_points_csv(args.points, d)
    batch = locate_batch(store, pts, _config(args), args.threads)
    write_rows(args.out, ((*p, r.elem_id) for p, r in zip(pts.tolist(), batch.results)), d)
    missing = sum(r.elem_id == NOT_FOUND for r in batch.results)
    print(f"{len(pts)} point(s), {batch.distinct} distinct element(s), {missing} not contained",
          file=sys.stderr)
    return 0


def cmd_interp(args, d):
    store = prepare(_open_mesh(args.mesh))
    fld = NodalField(load_field_csv(args.field, d), name=args.field)
    fld.aligned(store)
    pts = load_points_csv(args.points, d)
    vals = interpolate_batch(store, fld, pts, _config(args), args.threads)
    write_rows(args.out, ((*p, float(v)) for p, v in zip(pts.tolist(), vals.tolist())), d)
    missing = int(np.isnan(vals).sum())
    if missing:
        print(f"{missing} point(s) outside the mesh (value nan)", file=sys.stderr)
        if args.strict:
            return 1
    return 0


def cmd_surface(args, d):
    store = load_archive(args.mesh)
    tris = extract_unoriented(store)
    oriented = orient(store, tris)
    write_rows(args.out, ((t.tri_id, *t.v) for t in oriented), d)
    if args.normalized_out:
        write_rows(args.normalized_out, normalized_rows(oriented), d)
    if args.unoriented_out:
        write_rows(args.unoriented_out, tris, d)
    print(f"{len(oriented)} surface triangle(s)", file=sys.stderr)
    return 0


def cmd_partition(args, d):
    store = _open_mesh(args.mesh)
    pa = partition(store, args.n)
    write_rows(args.out, zip(pa.elem_ids.tolist(), pa.partition_ids.tolist()), d)
    print("sizes " + " ".join(map(str, pa.sizes())), file=sys.stderr)
    return 0


def cmd_bench(args, d):
    if args.mesh:
        store = _open_mesh(args.mesh)
    else:
        store = generate_box(args.gen_n, args.gen_n, args.gen_n)
    prepare(store)
    cfg = _config(args)
    header = benchmod.FIXED_HEADER if args.mode == benchmod.FIXED else benchmod.RANDOM_HEADER
    rows = []
    clouds = [1] if args.mode == benchmod.FIXED else args.clouds
    for r in args.radius:
        for n in clouds:
            spec = benchmod.BenchSpec(args.mode, args.center, r, n, None, args.total, args.seed)
            for _ in range(args.repeat):
                rows.append(benchmod.report_row(benchmod.run_bench(store, spec, cfg, args.threads)))
    if args.out:
        _write_table(args.out, header, rows, d)
    else:
        print(d.join(header))
        for row in rows:
            print(d.join(str(v) for v in row))
    if args.locality:
        stats = benchmod.hilbert_locality(seed=args.seed)
        print("hilbert locality: " + ", ".join(f"{k}={v}" for k, v in stats.items()), file=sys.stderr)
        lo, hi = store.bounding_box()
        spread = benchmod.BenchSpec(benchmod.FIXED, None, float(np.linalg.norm(hi - lo)) / 2,
                                    total=min(args.total, 2000), seed=args.seed)
        pts, _, _ = benchmod.make_points(store, spread)
        rate = benchmod.candidate_hit_rate(store, pts, args.fanout, args.epsilon)
        print(f"candidate hit rate (fanout {args.fanout}): {rate:.3f}", file=sys.stderr)
    return 0


def _write_table(path, header, rows, d):
    with open(path, "w", newline="") as f:
        f.write(d.join(header) + "\n")
        for row in rows:
            f.write(d.join(str(v) for v in row) + "\n")


COMMANDS = {
    "gen": cmd_gen,
    "load": cmd_load,
    "save": cmd_save,
    "validate": cmd_validate,
    "locate": cmd_locate,
    "interp": cmd_interp,
    "surface": cmd_surface,
    "partition": cmd_partition,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        d = parse_delimiter(args.delimiter)
        return COMMANDS[args.command](args, d)
    except (TetStoreError, OSError, ValueError) as exc:
        print(f"tetstore {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
