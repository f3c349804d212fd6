import json
import subprocess
import sys

import pytest

from ncadelic.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out, [json.loads(line) for line in out.splitlines()]


def test_generic_check(capsys):
    code, _, records = run(capsys, "generic-check", "--m", "2", "--tau", "1,-1")
    assert code == 0
    gen = next(r for r in records if r["event"] == "generic")
    assert gen["generic"] is False and gen["certificate"][:2] == [0, 1]
    code, _, records = run(capsys, "generic-check", "--m", "1", "--tau", "1")
    assert code == 0 and next(r for r in records if r["event"] == "generic")["generic"] is True


def test_records_share_config_hash(capsys):
    _, _, records = run(capsys, "cohomology-table", "--m", "1", "--range=-3:3")
    hashes = {r["config"] for r in records[1:]}
    assert len(hashes) == 1 and all(r["cmd"] == "cohomology-table" for r in records)
    row = next(r for r in records if r["event"] == "row" and (r["p"], r["i"], r["j"]) == (0, 1, 1))
    assert row["dim"] == 4


def test_quiver_file_commands(capsys, tmp_path):
    path = tmp_path / "cm2.json"
    code, _, _ = run(capsys, "gen-quiver", "--cm", "2", "--out", str(path))
    assert code == 0 and path.exists()
    for cmd in ("verify-quiver", "monad", "trivialize"):
        code, _, records = run(capsys, cmd, str(path), "--bounds", "2x2")
        assert code == 0, cmd
        assert records[-1] == {**records[-1], "event": "result", "ok": True}
    out = tmp_path / "point.json"
    code, _, _ = run(capsys, "pipeline", str(path), "--out", str(out))
    assert code == 0 and "U" in json.loads(out.read_text())


def test_cyclic_quiver(capsys, tmp_path):
    path = tmp_path / "cyc.json"
    code, _, _ = run(capsys, "gen-quiver", "--m", "2", "--tau", "1,1", "--dims-v", "1,1", "--dims-w", "1,0",
                     "--out", str(path))
    assert code == 0
    code, _, _ = run(capsys, "pipeline", str(path))
    assert code == 0


def test_roundtrip_and_koszul(capsys):
    code, _, records = run(capsys, "roundtrip", "--m", "2", "--d", "1", "--r", "1", "--count", "3")
    assert code == 0
    assert any(r["event"] == "expected-fail" for r in records)
    code, _, _ = run(capsys, "koszul-check", "--m", "2", "--tau", "1,3", "--box", "2x2")
    assert code == 0


def test_selftest(capsys):
    code, _, records = run(capsys, "selftest")
    assert code == 0
    assert sum(1 for r in records if r["event"] == "check" and r.get("name") == "fixture") == 3
    assert any(r["event"] == "documented-deviation" for r in records)


def test_selftest_missing_fixtures(capsys, tmp_path):
    code, _, _ = run(capsys, "selftest", "--fixtures", str(tmp_path))
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["roundtrip", "--m", "1", "--d", "2", "--r", "1", "--count", "3", "--seed", "4"],
    ["cohomology-table", "--m", "2", "--range=-2:2"],
])
def test_deterministic_output(capsys, argv):
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second


def test_jobs_do_not_change_output(capsys):
    serial = run(capsys, "selftest")[1]
    parallel = run(capsys, "selftest", "--jobs", "2")[1]
    assert serial == parallel


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ncadelic", "generic-check", "--m", "3", "--tau", "1,2,3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[-1])["ok"] is True
    assert "generic-check: ok" in proc.stderr
