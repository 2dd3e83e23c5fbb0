import json

from click.testing import CliRunner
from sqlalchemy import select

from src.cli import RunConfig, eis, format_table, parse_point, run
from src.db import SessionLocal
from src.eisenstein import OUTSIDE_HYPOTHESES
from src.models import Run, VerificationRecord


def _invoke(*args):
    return CliRunner().invoke(eis, [*args, "--no-record"])


def test_parse_point():
    assert parse_point("2i,0;0,1+2i") == [[2j, 0], [0, 1 + 2j]]


def test_format_table():
    text = format_table(("a", "bb"), [(1, 2), (10, 3)])
    lines = text.splitlines()
    assert lines[0] == "a  | bb"
    assert lines[1] == "---+---"
    assert len(lines) == 4


def test_precondition_exits_with_two():
    result = _invoke("build", "--k", "1", "--chi", "odd4")
    assert result.exit_code == 2


def test_unknown_character_exits_with_two():
    result = _invoke("build", "--chi", "sextic")
    assert result.exit_code == 2


def test_build_writes_timestamped_json(tmp_path):
    out = tmp_path / "e.json"
    result = _invoke("build", "--N", "4", "--k", "5", "--chi", "odd4", "--bound", "4", "--out", str(out))
    assert result.exit_code == 0, result.output
    data = json.loads(out.read_text())
    assert data["passed"] is True
    assert "timestamp" in data
    assert data["result"]["coeffs"]


def test_small_prime_integrality_is_labelled():
    status, artifacts = run(RunConfig(command="check-integrality", k=6, bound=4, primes=(5,), record=False))
    assert status == 0
    (report,) = artifacts["result"]["reports"]
    assert report["label"] == OUTSIDE_HYPOTHESES


def test_integrality_reads_a_saved_expansion(tmp_path):
    out = tmp_path / "e.json"
    status, _ = run(RunConfig(command="build", k=5, chi="odd4", bound=4, out=str(out), record=False))
    assert status == 0
    saved = tmp_path / "exp.json"
    saved.write_text(json.dumps(json.loads(out.read_text())["result"]))
    result = _invoke("check-integrality", "--in", str(saved), "--p", "13,17")
    assert result.exit_code == 0, result.output


def test_check_integrality_needs_a_prime():
    status, artifacts = run(RunConfig(command="check-integrality", record=False))
    assert status == 2
    assert "prime" in artifacts["error"]


def test_verify_archimedean_passes():
    result = _invoke("verify-archimedean")
    assert result.exit_code == 0, result.output
    assert "residual" in result.output


def test_verify_siegel_small_dets():
    result = _invoke("verify-siegel", "--p", "3", "--k", "6", "--dets", "1,3")
    assert result.exit_code == 0, result.output


def test_pullback_passes_cusp_check():
    status, artifacts = run(RunConfig(command="pullback", k=6, bound=6, record=False))
    assert status == 0
    assert artifacts["result"]["cuspidal"] is True


def test_raise_reports_per_prime():
    status, artifacts = run(RunConfig(command="raise", k=7, chi="odd4", m0=1, bound=4, primes=(17,), record=False))
    assert status == 0
    assert artifacts["result"]["theorem_variable"]["variable"] == "V"


def test_runs_are_recorded(ledger):
    status, _ = run(RunConfig(command="verify-archimedean", record=True))
    assert status == 0
    with SessionLocal() as session:
        stored = session.scalars(select(Run)).one()
        assert stored.command == "verify-archimedean"
        assert stored.exit_status == 0
        kinds = {r.kind for r in session.scalars(select(VerificationRecord))}
        assert kinds == {"archimedean"}


def test_precondition_runs_are_recorded(ledger):
    status, _ = run(RunConfig(command="build", k=1, chi="odd4", record=True))
    assert status == 2
    with SessionLocal() as session:
        assert session.scalars(select(Run.exit_status)).one() == 2


def test_cross_check_at_small_height_reports_instead_of_crashing():
    result = _invoke("cross-check", "--N", "3", "--k", "8", "--height", "1", "--radius", "1", "--bound", "4")
    assert result.exception is None or isinstance(result.exception, SystemExit)
    assert result.exit_code in (0, 1)
    status, artifacts = run(RunConfig(command="cross-check", level=3, k=8, height=1, radius=1, bound=4,
                                      point="2i,0;0,2i", record=False))
    data = artifacts["result"]
    assert data["warning"].startswith("height bound too small")
    assert data["bound"] == 4
    assert data["truncation"]["bound"] == 4
    assert data["truncation"]["relative"] > 0
