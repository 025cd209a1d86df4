import json

import pytest

from dyngcd.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# ---------------------------------------------------------------------------
# happy paths
# ---------------------------------------------------------------------------


def test_ord_output(capsys):
    rc, out, _ = run(capsys, "ord", "--poly", "x^2+1", "--n", "13", "--n", "3")
    assert rc == 0
    assert out == "n=13 ord=4 ell=52\nn=3 ord=inf ell=inf\n"


def test_classify_output(capsys):
    rc, out, _ = run(capsys, "classify", "--poly", "x^2+1")
    assert rc == 0 and "wandering" in out
    rc, out, _ = run(capsys, "classify", "--poly", "x^2-2")
    assert rc == 0
    assert "preperiod 2" in out and "0 -> -2 -> 2 -> 2" in out


def test_scan_csv(capsys):
    rc, out, _ = run(capsys, "scan", "--poly", "x^2+1", "--pmax", "13")
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "p,ord,pretty,anomalous,injective,ell"
    assert lines[1] == "2,2,1,1,1,2"
    assert lines[-1] == "13,4,1,0,0,52"


def test_density_table(capsys):
    rc, out, _ = run(capsys, "density", "--poly", "x^2+1", "--k", "1", "--x", "100", "--T", "40")
    assert rc == 0
    assert "count_A 47" in out and "count_B 47" in out
    assert "floor_identity 47" in out
    assert "witness 1" in out


def test_density_json_deterministic(capsys):
    args = ("density", "--poly", "x^2+1", "--k", "5", "--x", "1000", "--T", "200", "--format", "json")
    rc1, out1, _ = run(capsys, *args)
    rc2, out2, _ = run(capsys, *args)
    assert rc1 == rc2 == 0
    assert out1 == out2
    decoded = json.loads(out1)
    assert decoded["count_A"] == 33
    assert decoded["witness"] == 15


def test_density_csv(capsys):
    rc, out, _ = run(capsys, "density", "--poly", "x^2+1", "--k", "1", "--x", "1000", "--format", "csv")
    assert rc == 0
    assert out.startswith("x,count_A,count_B,ratio_A,ratio_B\n")
    assert "1000,465,465" in out


def test_series_table(capsys):
    rc, out, _ = run(capsys, "series", "--poly", "x^2+1", "--k", "1", "--T", "120")
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "T,series_B,last_block_B,series_A,last_block_A"
    assert len(lines) == 4
    assert lines[1].startswith("30,0.466666667")


def test_coprime_json(capsys):
    rc, out, _ = run(
        capsys, "coprime", "--poly", "x^2+1", "--a", "2", "--b", "1",
        "--x", "2000", "--z", "5", "--z", "13", "--format", "json",
    )
    assert rc == 0
    decoded = json.loads(out)
    assert decoded["count_coprime"] == 1821
    assert len(decoded["checkpoints"]) == 2


def test_verify_small_bound(capsys):
    rc, out, _ = run(capsys, "verify", "--poly", "x^2+1", "--bound", "30")
    assert rc == 0
    lines = [l for l in out.strip().split("\n") if l]
    assert all(l.startswith("PASS") for l in lines)
    assert any("rank_crt" in l for l in lines)


def test_diag_runs(capsys):
    rc, out, _ = run(capsys, "diag", "--poly", "x^2+1", "--x", "500")
    assert rc == 0
    assert "mertens_product" in out
    assert "partial_sum" in out


# ---------------------------------------------------------------------------
# cache wiring
# ---------------------------------------------------------------------------


def test_cache_created_and_merged(tmp_path, capsys):
    cache = tmp_path / "ranks.csv"
    rc, _, _ = run(capsys, "scan", "--poly", "x^2+1", "--pmax", "20", "--cache", str(cache))
    assert rc == 0 and cache.exists()
    first = cache.read_text()
    # idempotent rerun, then a consistent extension through another command
    rc, _, _ = run(capsys, "scan", "--poly", "x^2+1", "--pmax", "20", "--cache", str(cache))
    assert rc == 0 and cache.read_text() == first
    rc, out, _ = run(capsys, "ord", "--poly", "x^2+1", "--n", "45833", "--cache", str(cache))
    assert rc == 0 and "ell=274998" in out
    assert "45833,6" in cache.read_text()


def test_cache_mismatch_exit_code(tmp_path, capsys):
    cache = tmp_path / "ranks.csv"
    rc, _, _ = run(capsys, "scan", "--poly", "x^2+1", "--pmax", "20", "--cache", str(cache))
    assert rc == 0
    rc, _, err = run(capsys, "scan", "--poly", "x^2+x+1", "--pmax", "20", "--cache", str(cache))
    assert rc == 3
    assert "cache" in err


def test_cache_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DYNGCD_CACHE_DIR", str(tmp_path))
    rc, _, _ = run(capsys, "ord", "--poly", "x^2+1", "--n", "5", "--cache", "sub/r.csv")
    assert rc == 0
    assert (tmp_path / "sub" / "r.csv").exists()


# ---------------------------------------------------------------------------
# failure modes
# ---------------------------------------------------------------------------


def test_parse_error_exit_code(capsys):
    rc, _, err = run(capsys, "ord", "--poly", "x^2+", "--n", "5")
    assert rc == 2 and "parse" in err


def test_preperiodic_exit_code(capsys):
    rc, _, err = run(capsys, "ord", "--poly", "x^2-2", "--n", "5")
    assert rc == 2 and "preperiodic" in err
    rc, _, _ = run(capsys, "density", "--poly", "x^2-2", "--k", "1", "--x", "100")
    assert rc == 2


def test_bad_threads_exit_code(capsys):
    rc, _, err = run(capsys, "ord", "--poly", "x^2+1", "--n", "5", "--threads", "0")
    assert rc == 2 and "threads" in err


def test_threads_accepted(capsys):
    rc, out, _ = run(capsys, "ord", "--poly", "x^2+1", "--n", "5", "--threads", "4")
    assert rc == 0 and "ord=3" in out


def test_bad_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate"])
    assert ei.value.code == 2


def test_missing_required_argument(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["density", "--poly", "x^2+1"])
    assert ei.value.code == 2
