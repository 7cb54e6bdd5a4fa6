import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import UNIT_TET
from tetstore import (
    MeshError,
    NodalField,
    NotContainedError,
    face_neighbor,
    interpolate,
    shape_values,
)
from tetstore.interp import interpolate_batch, interpolate_in


def affine(x, y, z):
    return 2 * x - 3 * y + z + 5


def test_shape_value_examples():
    assert shape_values(UNIT_TET, UNIT_TET[0]) == (1, 0, 0, 0)
    assert shape_values(UNIT_TET, (0.25, 0.25, 0.25)) == (0.25, 0.25, 0.25, 0.25)


@given(st.tuples(*[st.floats(0, 1, allow_nan=False)] * 3))
def test_shape_values_sum_to_one(p):
    assert sum(shape_values(UNIT_TET, p)) == pytest.approx(1.0, abs=1e-12)


def test_constant_and_affine_fields(box3):
    const = NodalField.from_function(box3, lambda x, y, z: 7.5)
    lin = NodalField.from_function(box3, affine)
    rng = np.random.default_rng(12)
    for p in rng.uniform(0, 1, size=(300, 3)):
        assert interpolate(box3, const, p) == pytest.approx(7.5, rel=1e-12)
        assert interpolate(box3, lin, p) == pytest.approx(affine(*p), rel=1e-12)


def test_nodal_values_exact(box3):
    rng = np.random.default_rng(3)
    fld = NodalField(dict(zip(box3.vertex_ids.tolist(), rng.normal(size=box3.n_vertices))))
    for vid, xyz in zip(box3.vertex_ids.tolist(), box3.coords.tolist()):
        assert interpolate(box3, fld, xyz) == fld.values[vid]


def test_continuity_across_shared_faces(box3):
    rng = np.random.default_rng(4)
    fld = NodalField(dict(zip(box3.vertex_ids.tolist(), rng.normal(size=box3.n_vertices))))
    checked = 0
    for q in box3.quads()[::5]:
        for r in range(4):
            nb = face_neighbor(box3, q.elem_id, r)
            if nb == -1:
                continue
            face = [box3.coords[box3.vertex_index[v]] for k, v in enumerate(q.vertices) if k != r]
            w = rng.dirichlet([1, 1, 1])
            p = w[0] * face[0] + w[1] * face[1] + w[2] * face[2]
            a = interpolate_in(box3, fld, q.elem_id, p)
            b = interpolate_in(box3, fld, nb, p)
            assert a == pytest.approx(b, rel=1e-10, abs=1e-12)
            checked += 1
    assert checked > 50


def test_not_contained(box3):
    fld = NodalField.from_function(box3, affine)
    with pytest.raises(NotContainedError):
        interpolate(box3, fld, (3.0, 0.5, 0.5))
    vals = interpolate_batch(box3, fld, [(0.5, 0.5, 0.5), (3.0, 0.5, 0.5)])
    assert vals[0] == pytest.approx(affine(0.5, 0.5, 0.5), rel=1e-12)
    assert np.isnan(vals[1])


def test_field_validation(box3):
    with pytest.raises(ValueError):
        NodalField({1: float("inf")})
    partial = NodalField({1: 1.0})
    with pytest.raises(MeshError):
        interpolate(box3, partial, (0.5, 0.5, 0.5))


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_affine_reproduction_property(box3, a, b, c, d):
    fld = NodalField.from_function(box3, lambda x, y, z: a * x + b * y + c * z + d)
    p = (0.3, 0.61, 0.77)
    exact = a * p[0] + b * p[1] + c * p[2] + d
    assert interpolate(box3, fld, p) == pytest.approx(exact, rel=1e-12, abs=1e-12)
