import pytest

from tetstore import MeshStore, TetQuad, Vertex, generate_box

UNIT_TET = ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

ACCEPTANCE_LINES = []


def single_tet_store(elem_id=1, vids=(0, 1, 2, 3), corners=UNIT_TET):
    verts = [Vertex(v, *c) for v, c in zip(vids, corners)]
    return MeshStore.from_quads(verts, [TetQuad(elem_id, *vids)])


def two_tet_store():
    """Unit tet 10 = (0,1,2,3) glued on face (1,2,3) to tet 20 = (4,1,2,3)."""
    corners = UNIT_TET + ((1.0, 1.0, 1.0),)
    verts = [Vertex(i, *c) for i, c in enumerate(corners)]
    return MeshStore.from_quads(verts, [TetQuad(10, 0, 1, 2, 3), TetQuad(20, 4, 1, 3, 2)])


@pytest.fixture
def unit_store():
    return single_tet_store().freeze()


@pytest.fixture
def glued():
    return two_tet_store().freeze()


@pytest.fixture(scope="session")
def box3():
    return generate_box(3, 3, 3)


@pytest.fixture(scope="session")
def box4():
    return generate_box(4, 4, 4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
