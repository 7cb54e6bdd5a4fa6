import struct

import numpy as np
import pytest

from oracles import face_tally
from tetstore import (
    CorruptArchiveError,
    MeshStore,
    ParseError,
    TetQuad,
    Vertex,
    assign_hcodes,
    centroid,
    generate_box,
    load_archive,
    point_in_tet,
    save_archive,
    signed_volume,
    validate_mesh,
)
from tetstore.meshio import (
    KUHN_TETS,
    archive_bytes,
    load_field_csv,
    load_points_csv,
    load_tets_csv,
    load_vertices_csv,
    parse_delimiter,
    write_tets_csv,
    write_vertices_csv,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_vertex_rows(tmp_path):
    assert load_vertices_csv(write(tmp_path, "v.csv", "7,0.5,1.0,-2.0\n")) == [
        Vertex(7, 0.5, 1.0, -2.0)]
    assert load_vertices_csv(write(tmp_path, "e.csv", "")) == []
    tab = write(tmp_path, "t.tsv", "1\t0\t0\t0\n\n2\t1\t0\t0\n")
    assert [v.vertex_id for v in load_vertices_csv(tab, "\t")] == [1, 2]


@pytest.mark.parametrize("text,line", [
    ("7,0.5,NaN,0\n", 1),
    ("1,0,0,0\n1,1,1,1\n", 2),
    ("1,0,0,0\n2,0,0\n", 2),
    ("1,0,0,0\nx,0,0,0\n", 2),
    ("1,0,0,inf\n", 1),
])
def test_vertex_parse_errors(tmp_path, text, line):
    with pytest.raises(ParseError) as exc:
        load_vertices_csv(write(tmp_path, "v.csv", text))
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_tet_rows(tmp_path):
    assert load_tets_csv(write(tmp_path, "t.csv", "1,12,4711,841,3\n")) == [
        TetQuad(1, 12, 4711, 841, 3)]
    with pytest.raises(ParseError):
        load_tets_csv(write(tmp_path, "d.csv", "1,1,2,3,4\n1,5,6,7,8\n"))
    with pytest.raises(ParseError):
        load_tets_csv(write(tmp_path, "s.csv", "1,1,2,3\n"))


def test_points_and_field(tmp_path):
    pts = load_points_csv(write(tmp_path, "p.csv", "0.1,0.2,0.3\n1,2,3\n"))
    assert pts.shape == (2, 3) and pts[1].tolist() == [1, 2, 3]
    assert load_points_csv(write(tmp_path, "e.csv", "")).shape == (0, 3)
    assert load_field_csv(write(tmp_path, "f.csv", "4,2.5\n9,-1\n")) == {4: 2.5, 9: -1.0}
    with pytest.raises(ParseError):
        load_field_csv(write(tmp_path, "g.csv", "4,2.5\n4,1\n"))


def test_delimiters():
    assert parse_delimiter("tab") == "\t"
    assert parse_delimiter("\\t") == "\t"
    assert parse_delimiter(",") == ","
    with pytest.raises(ValueError):
        parse_delimiter("::")


def test_csv_round_trip_fixed_point(tmp_path):
    store = generate_box(2, 1, 1, lo=(0.1, -0.3, 1 / 3), hi=(0.7, 0.2, 2.0))
    v1, t1 = tmp_path / "v1.csv", tmp_path / "t1.csv"
    write_vertices_csv(store, v1)
    write_tets_csv(store, t1)
    verts, quads = load_vertices_csv(v1), load_tets_csv(t1)
    assert quads == store.quads()
    assert [(v.x, v.y, v.z) for v in verts] == [tuple(c) for c in store.coords.tolist()]
    again = MeshStore.from_quads(verts, quads)
    v2, t2 = tmp_path / "v2.csv", tmp_path / "t2.csv"
    write_vertices_csv(again, v2)
    write_tets_csv(again, t2)
    assert v1.read_bytes() == v2.read_bytes() and t1.read_bytes() == t2.read_bytes()


def test_archive_round_trip_byte_identical(tmp_path):
    store = generate_box(4, 4, 4)
    assign_hcodes(store)
    a, b = tmp_path / "a.tmq", tmp_path / "b.tmq"
    save_archive(store, a)
    loaded = load_archive(a)
    save_archive(loaded, b)
    assert a.read_bytes() == b.read_bytes()
    assert np.array_equal(loaded.coords, store.coords)
    assert np.array_equal(loaded.hcodes, store.hcodes)
    assert loaded.quantizer == store.quantizer
    assert loaded.rows() == store.rows()
    assert validate_mesh(loaded).ok


def test_archive_without_codes(tmp_path):
    store = generate_box(1, 1, 1)
    path = tmp_path / "plain.tmq"
    save_archive(store, path)
    loaded = load_archive(path)
    assert loaded.hcodes is None
    assert loaded.quads() == store.quads()


def test_archive_header_layout():
    data = archive_bytes(generate_box(1, 1, 1))
    magic, version, flags, nv, nrows = struct.unpack_from("<4sIIQQ", data)
    assert (magic, version, flags, nv, nrows) == (b"TMQ1", 1, 0, 8, 24)
    assert len(data) == 28 + 8 * 28 + 24 * 12


@pytest.mark.parametrize("mutate", [
    lambda d: d[:10],
    lambda d: d[:-1],
    lambda d: d + b"\0",
    lambda d: b"XXXX" + d[4:],
    lambda d: d[:4] + struct.pack("<I", 2) + d[8:],
    lambda d: d[:8] + struct.pack("<I", 6) + d[12:],
])
def test_corrupt_archives(tmp_path, mutate):
    store = generate_box(1, 1, 1)
    assign_hcodes(store)
    path = tmp_path / "bad.tmq"
    path.write_bytes(mutate(archive_bytes(store)))
    with pytest.raises(CorruptArchiveError):
        load_archive(path)


def test_kuhn_tets_positive_and_cover_cube():
    assert len(KUHN_TETS) == 6
    vols = [signed_volume([tuple(map(float, c)) for c in t]) for t in KUHN_TETS]
    assert all(v > 0 for v in vols)
    assert sum(vols) == pytest.approx(1.0)


@pytest.mark.parametrize("n,nv,nt,ns", [(1, 8, 6, 12), (3, 64, 162, 108)])
def test_generator_counts(n, nv, nt, ns):
    store = generate_box(n, n, n)
    assert (store.n_vertices, store.n_tets) == (nv, nt)
    tally = face_tally(store.quads())
    assert sum(1 for owners in tally.values() if len(owners) == 1) == ns


def test_generator_orientation_and_centroids():
    store = generate_box(2, 3, 1, lo=(-1, 0, 5), hi=(1, 3, 6))
    assert store.n_vertices == 3 * 4 * 2 and store.n_tets == 36
    for idx in range(store.n_tets):
        t = store.corners(idx)
        assert signed_volume(t) > 0
        assert point_in_tet(t, centroid(t))
    assert store.bounding_box()[0].tolist() == [-1, 0, 5]


def test_generator_rejects_bad_counts():
    for bad in ((0, 1, 1), (1, -2, 1), (1, 1, 1.5)):
        with pytest.raises(ValueError):
            generate_box(*bad)
