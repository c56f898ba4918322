import numpy as np
import pytest
import scipy.sparse as sp

from hesccd.instances import arbitrage_config, case1_config
from hesccd.pipeline import build_problem
from hesccd.solver import export_mps, import_external_solution, read_mps, solve, write_solution
from hesccd.solver.external import highs_available, solve_mps_with_highs
from hesccd.solver.mps import MpsError
from hesccd.transcription import LpProblem, assemble_lp, build_mesh


def _same(a, b):
    assert a.n_rows == b.n_rows and a.n_cols == b.n_cols
    assert np.array_equal(a.c, b.c) and a.c0 == b.c0
    assert (a.A != b.A).nnz == 0
    assert np.array_equal(a.sense, b.sense) and np.array_equal(a.b, b.b)
    assert np.array_equal(a.lb, b.lb) and np.array_equal(a.ub, b.ub)


def test_arbitrage_roundtrip(tmp_path):
    lp = build_problem(arbitrage_config())
    path = export_mps(lp, tmp_path / "m.mps", tmp_path / "names.csv")
    text = path.read_text()
    for section in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
        assert section in text
    back = read_mps(path, tmp_path / "names.csv")
    _same(lp, back)
    assert list(back.row_names) == list(lp.row_names)
    assert list(back.col_names) == lp.column_names()


def test_roundtrip_with_offset_and_awkward_numbers(tmp_path):
    rng = np.random.default_rng(1)
    A = sp.random(5, 7, density=0.5, random_state=2, format="csr")
    A.data = A.data * 1e7 / 3.0
    lp = LpProblem(rng.normal(size=7) / 7.0, 123.456789012345, A, np.array(list("<=<=<")), rng.normal(size=5),
                   np.array([0, -np.inf, 1, 2, 0, -1, -np.inf]), np.array([np.inf, np.inf, 1, 5, 1e-13, 3, 4.0]),
                   tuple(f"r{i}" for i in range(5)))
    back = read_mps(export_mps(lp, tmp_path / "x.mps"))
    _same(lp, back)


def test_empty_problem(tmp_path):
    lp = LpProblem(np.zeros(0), 0.0, sp.csr_matrix((0, 0)), np.array([], dtype="<U1"), np.zeros(0),
                   np.zeros(0), np.zeros(0), ())
    path = export_mps(lp, tmp_path / "e.mps")
    assert path.read_text().rstrip().endswith("ENDATA")
    back = read_mps(path)
    assert back.n_cols == 0 and back.n_rows == 0


def test_greater_rows_and_ranges(tmp_path):
    p = tmp_path / "g.mps"
    p.write_text("NAME T\nROWS\n N OBJ\n G R1\nCOLUMNS\n X1 OBJ 1 R1 2\nRHS\n RHS R1 4\nBOUNDS\n UP BND X1 9\nENDATA\n")
    lp = read_mps(p)
    assert lp.sense.tolist() == ["<"] and lp.A.toarray().tolist() == [[-2.0]] and lp.b.tolist() == [-4.0]
    assert lp.c.tolist() == [-1.0]
    p.write_text("NAME T\nROWS\n N OBJ\n L R1\nCOLUMNS\n X1 R1 1\nRHS\n RHS R1 4\nRANGES\n RNG R1 2\nENDATA\n")
    with pytest.raises(MpsError, match="RANGES"):
        read_mps(p)


def test_unwritable_path(tmp_path):
    lp = build_problem(arbitrage_config())
    with pytest.raises(OSError):
        export_mps(lp, tmp_path / "missing-dir" / "m.mps")


def test_reimport_own_solution(tmp_path):
    lp = build_problem(arbitrage_config())
    rep = solve(lp)
    write_solution(rep, lp, tmp_path / "sol.txt")
    back = import_external_solution(lp, tmp_path / "sol.txt")
    assert back.status == "optimal"
    assert back.objective == pytest.approx(rep.objective, abs=1e-9)
    write_solution(rep, lp, tmp_path / "primal.txt", duals=False)
    assert import_external_solution(lp, tmp_path / "primal.txt").status == "feasible, optimality unverified"


def test_unknown_name_rejected(tmp_path):
    lp = build_problem(arbitrage_config())
    p = tmp_path / "bad.txt"
    p.write_text("C0000001 1.0\nNOT_A_COLUMN 2.0\n")
    with pytest.raises(ValueError, match="NOT_A_COLUMN"):
        import_external_solution(lp, p)


def test_missing_values_default_with_warning(tmp_path):
    lp = build_problem(arbitrage_config())
    p = tmp_path / "part.txt"
    p.write_text("C0000001 1.0\n")
    rep = import_external_solution(lp, p)
    assert any("defaulted to 0" in w for w in rep.warnings)


def test_year_instance_row_count(tmp_path):
    cfg = case1_config(hours=8760)
    mesh = build_mesh(0, 8760, 1)
    lp = assemble_lp(cfg, mesh)
    n_int = mesh.n_intervals
    # generator and storage dynamics, release/tie rows, coupling, boundary, charge and load rows
    expected = 2 * n_int + n_int + mesh.n_nodes + 3 + n_int + 4 * n_int
    assert lp.n_rows == expected
    path = export_mps(lp, tmp_path / "year.mps")
    rows_section = path.read_text().split("COLUMNS")[0]
    assert sum(1 for ln in rows_section.splitlines() if ln.startswith(" L ") or ln.startswith(" E ")) == lp.n_rows


@pytest.mark.skipif(not highs_available(), reason="highspy not installed")
def test_external_route(tmp_path):
    lp = build_problem(arbitrage_config())
    export_mps(lp, tmp_path / "m.mps")
    status = solve_mps_with_highs(tmp_path / "m.mps", tmp_path / "sol.txt")
    assert status == "optimal"
    rep = import_external_solution(lp, tmp_path / "sol.txt")
    assert rep.status == "optimal"
    assert rep.objective == pytest.approx(100.0, abs=1e-9)
