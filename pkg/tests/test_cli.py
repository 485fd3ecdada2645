import json

import pytest

from sl2ulrich.cli import main, matrix_from_dict, matrix_to_dict, parse_range
from sl2ulrich.instanton import build_resolution


@pytest.fixture
def cache(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("SL2ULRICH_CACHE_DIR", str(d))
    return d


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_resolution_files(tmp_path, capsys, cache):
    code, out, _ = run(capsys, "resolution", "--m", "1", "--out", str(tmp_path))
    assert code == 0
    assert "solution spaces: 1, 1; constant rank 3: OK" in out
    psi = json.loads((tmp_path / "psi_m1.json").read_text())
    assert (psi["rows"], psi["cols"]) == (5, 4)
    assert psi["source_twists"] == [-2] * 4 and psi["target_twists"] == [-1] * 5
    assert (tmp_path / "kappa_m1.json").exists()


def test_resolution_round_trip(tmp_path, capsys, cache):
    assert run(capsys, "resolution", "--m", "2", "--out", str(tmp_path))[0] == 0
    for name, A in (("psi", build_resolution(2).psi), ("kappa", build_resolution(2).kappa)):
        text = (tmp_path / f"{name}_m2.json").read_text()
        back = matrix_from_dict(json.loads(text))
        assert back == A
        assert json.dumps(matrix_to_dict(back), indent=1, sort_keys=True) + "\n" == text


def test_resolution_m0_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["resolution", "--m", "0"])
    assert exc.value.code == 2


def test_cohomology_md_and_cache(tmp_path, capsys, cache, caplog):
    argv = ["cohomology", "--sheaf", "S2E", "--m", "1", "--range", "-6..3", "--format", "md"]
    code, first, _ = run(capsys, *argv)
    assert code == 0
    lines = first.splitlines()
    assert lines[2] == "| i \\ t | -6 | -5 | -4 | -3 | -2 | -1 | 0 | 1 | 2 | 3 |"
    assert lines[4].startswith("| h^3 | 14 |")
    assert lines[6] == "| h^1 | . | . | . | . | . | 4 | 5 | . | . | . |"
    caplog.clear()
    with caplog.at_level("INFO", logger="sl2ulrich"):
        code, second, _ = run(capsys, *argv)
    assert second == first
    assert any("cached" in r.message for r in caplog.records)
    assert not any("computing" in r.message for r in caplog.records)


def test_corrupt_cache_entry_is_replaced(capsys, cache):
    argv = ["cohomology", "--sheaf", "E", "--m", "1", "--range", "0..1", "--format", "csv"]
    _, first, _ = run(capsys, *argv)
    files = sorted(cache.glob("*.json"))
    assert len(files) == 2
    files[0].write_text("{not json")
    _, again, _ = run(capsys, *argv)
    assert again == first
    json.loads(files[0].read_text())


def test_cohomology_json_and_out(tmp_path, capsys, cache):
    out = tmp_path / "t.json"
    code, text, _ = run(capsys, "cohomology", "--sheaf", "E", "--m", "1", "--range", "-2..0",
                        "--format", "json", "--out", str(out))
    assert code == 0
    data = json.loads(text)
    assert data == json.loads(out.read_text())
    assert [e["t"] for e in data["entries"]] == [-2, -1, 0]
    assert data["entries"][1]["h"] == [0, 1, 0, 0]


def test_line_bundle(capsys):
    code, out, _ = run(capsys, "cohomology", "--sheaf", "LineBundle", "--n", "-4", "--range",
                       "0..0", "--format", "csv", "--no-cache")
    assert out.splitlines()[1] == "0,0,0,0,1"


def test_exact_mode_refuses_oversized(capsys, cache):
    code, _, err = run(capsys, "cohomology", "--sheaf", "E", "--m", "1", "--range", "-3..3",
                       "--mode", "exact", "--exact-threshold", "3", "--no-cache")
    assert code == 2
    assert "refused" in err and "nonzero entries" in err


@pytest.mark.parametrize("what", ["instanton", "coh0", "lepotier", "moduli-dim", "ulrich"])
def test_checks_m1(what, tmp_path, capsys, cache):
    cert = tmp_path / "c.json"
    code, out, _ = run(capsys, "check", what, "--m", "1", "--out", str(cert))
    assert code == 0, out
    data = json.loads(cert.read_text())
    assert data["passed"] is True
    if what == "ulrich":
        assert data["twists"] == [1, -2, -5]


def test_check_natural(tmp_path, capsys, cache):
    cert = tmp_path / "n.json"
    code, _, _ = run(capsys, "check", "natural", "--m", "1", "--range", "-5..2", "--out", str(cert))
    data = json.loads(cert.read_text())
    assert code == (0 if data["passed"] else 1)
    assert data["twists"] == list(range(-5, 3))


def test_check_requires_long(tmp_path, capsys, cache):
    code, _, err = run(capsys, "check", "coh0", "--m", "3", "--out", str(tmp_path / "x.json"))
    assert code == 2
    assert "requires --long" in err


def test_ranks(capsys):
    assert "Ur(X_9) = 3N*" in run(capsys, "ranks", "--n", "3", "--d", "9")[1]
    assert "every Ulrich rank divisible by 8; completeness unknown" in \
        run(capsys, "ranks", "--n", "5", "--d", "2")[1]
    assert "Ur(X_2) = 2N*" in run(capsys, "ranks", "--n", "3", "--d", "2")[1]
    assert "Ur(X_7) = N* \\ {1}" in run(capsys, "ranks", "--n", "3", "--d", "7")[1]
    assert "Ur(X^4_24) = 24N*" in run(capsys, "ranks", "--n", "4", "--d", "24")[1]


def test_parse_range():
    assert parse_range("-2..1") == [-2, -1, 0, 1]
    assert parse_range("3") == [3]
    with pytest.raises(Exception):
        parse_range("4..1")
