import csv
import io
import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from flatlab.cli import rational, tolerance


def run(*args, env_dir=None, **kw):
    env = None if env_dir is None else {**os.environ, "FLATLAB_CACHE_DIR": str(env_dir)}
    return subprocess.run([sys.executable, "-m", "flatlab", *args],
                          capture_output=True, text=True, env=env, **kw)


@pytest.fixture
def cache_dir(tmp_path):
    return tmp_path / "cache"


def test_help():
    cp = run("--help")
    assert cp.returncode == 0
    for sub in ("census", "verify", "gn", "scan", "plotdata", "cache"):
        assert sub in cp.stdout


# -- flag parsing ---------------------------------------------------------------


def test_rational_flags():
    assert rational("1/4") == Fraction(1, 4)
    assert rational("-3") == Fraction(-3)
    for bad in ["2/(3*pi)", "0.5", "1/0", "pi"]:
        with pytest.raises(Exception):
            rational(bad)


def test_tolerance_sugar_is_exact():
    assert tolerance("1e-10") == Fraction(1, 10**10)
    assert tolerance("1/1000") == Fraction(1, 1000)
    with pytest.raises(Exception):
        tolerance("-1e-3")


# -- census -------------------------------------------------------------------------


def test_census_json_stdout(cache_dir):
    cp = run("census", "--f", "exp(-(u))", "--n-max", "3", env_dir=cache_dir)
    assert cp.returncode == 0, cp.stderr
    doc = json.loads(cp.stdout)
    assert doc["spec"] == "exp(-(u))"
    assert [r["z"] for r in doc["rows"]] == [0, 0, 1, 2]
    row2 = doc["rows"][2]
    assert Fraction(row2["min_zero"]["lo"]) <= Fraction(1, 2) < Fraction(row2["min_zero"]["hi"])


def test_census_n_max_zero(cache_dir):
    cp = run("census", "--n-max", "0", "--format", "csv", env_dir=cache_dir)
    assert cp.returncode == 0
    assert cp.stdout.splitlines() == ["n,z,s,min_zero_lo,min_zero_hi,max_zero_hi", "0,0,1,,,"]


def test_census_files_and_summary(tmp_path, cache_dir):
    out, gaps = tmp_path / "rows.csv", tmp_path / "gaps.json"
    cp = run("census", "--n-max", "5", "--format", "csv", "-o", str(out),
             "--gap-report", str(gaps), "--checks", env_dir=cache_dir)
    assert cp.returncode == 0, cp.stderr
    assert cp.stdout.splitlines()[:4] == ["n=0 z=0 s=1", "n=1 z=0 s=1", "n=2 z=1 s=2",
                                          "n=3 z=2 s=3"]
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [int(r["z"]) for r in rows] == [0, 0, 1, 2, 2, 3]
    assert json.loads(gaps.read_text())["data_only"] is True
    assert "interlacing: PASS" in cp.stderr
    assert not list(tmp_path.glob("*.tmp"))


def test_census_output_is_deterministic(tmp_path, cache_dir):
    a = run("census", "--n-max", "6", env_dir=cache_dir).stdout
    b = run("census", "--n-max", "6", "--no-cache").stdout
    assert a == b


def test_second_census_run_reuses_cache(cache_dir):
    first = run("census", "--n-max", "8", "--stats", env_dir=cache_dir)
    second = run("census", "--n-max", "8", "--stats", env_dir=cache_dir)
    assert "recurrence_steps=8" in first.stderr
    assert "recurrence_steps=0" in second.stderr


def test_cache_dir_flag(tmp_path):
    d = tmp_path / "explicit"
    run("census", "--n-max", "2", "--cache-dir", str(d))
    assert len(list(d.glob("*.flc"))) == 1


@pytest.mark.parametrize("spec", ["exp(u)", "exp(-(-u))", "exp(-(u))*(", "sin(u)"])
def test_malformed_spec(spec, cache_dir):
    cp = run("census", "--f", spec, env_dir=cache_dir)
    assert cp.returncode == 1
    assert "parse error" in cp.stderr


def test_corrupt_cache_exits_nonzero(cache_dir):
    run("census", "--n-max", "3", env_dir=cache_dir)
    (path,) = cache_dir.glob("*.flc")
    path.write_text(path.read_text().replace("4:1/1", "4:3/1"))
    cp = run("census", "--n-max", "3", env_dir=cache_dir)
    assert cp.returncode == 1 and "checksum" in cp.stderr


# -- verify ---------------------------------------------------------------------------


def test_verify_theorem1(tmp_path, cache_dir):
    report = tmp_path / "t1.json"
    cp = run("verify", "theorem1", "--f", "exp(-(u))", "--n-max", "10", "--report", str(report),
             env_dir=cache_dir)
    assert cp.returncode == 0
    doc = json.loads(report.read_text())
    assert doc["status"] == "PASS" and doc["summary"]["n_witness"] == 2


def test_verify_theorem1_inconclusive(cache_dir):
    cp = run("verify", "theorem1", "--n-max", "1", env_dir=cache_dir)
    assert cp.returncode == 2
    assert json.loads(cp.stdout)["status"] == "INCONCLUSIVE"


def test_verify_lemma4_pass(cache_dir):
    cp = run("verify", "lemma4", "--f", "exp(-(u))", "--alpha", "1/4", "--n", "1",
             env_dir=cache_dir)
    assert cp.returncode == 0
    assert json.loads(cp.stdout)["status"] == "PASS"


def test_verify_lemma4_hypothesis_violated(cache_dir):
    cp = run("verify", "lemma4", "--f", "exp(-(u))", "--alpha", "1/4", "--n", "2",
             env_dir=cache_dir)
    assert cp.returncode == 1
    assert json.loads(cp.stdout)["status"] == "HYPOTHESIS_VIOLATED"


def test_verify_numerator(cache_dir):
    cp = run("verify", "numerator", "--alpha", "1/4", "--n", "1", "--samples", "1/4", "1/2", "3/4",
             env_dir=cache_dir)
    assert cp.returncode == 0
    assert json.loads(cp.stdout)["summary"]["numerator"] == "4*u-1"


def test_verify_lemma7(cache_dir):
    cp = run("verify", "lemma7", "--x", "1/2", env_dir=cache_dir)
    assert cp.returncode == 0 and json.loads(cp.stdout)["summary"]["least_p"] == 2
    cp = run("verify", "lemma7", "--x", "1/2", "--p-max", "0", env_dir=cache_dir)
    assert cp.returncode == 2


def test_verify_lemma4_bad_sample_is_an_error(cache_dir):
    cp = run("verify", "numerator", "--n", "1", "--samples", "1", env_dir=cache_dir)
    assert cp.returncode == 1


# -- gn / scan / plotdata / cache --------------------------------------------------------


def test_gn_positive_enclosure():
    cp = run("gn", "--n", "2", "--x", "1/2", "--tol", "1e-10")
    assert cp.returncode == 0
    mid, rad = cp.stdout.split("+/-")
    assert float(mid) > 0 and float(rad) <= 1e-10 and float(mid) > float(rad)


def test_gn_json():
    cp = run("gn", "--n", "1", "--x", "1", "--tol", "1/1000000", "--json")
    doc = json.loads(cp.stdout)
    assert doc["method"] == "cauchy-kernel" and abs(doc["value"]["approx"] - 0.279012471842) < 1e-6


@pytest.mark.parametrize("args", [["--n", "1", "--x", "2/(3*pi)"], ["--n", "0", "--x", "1/2"]])
def test_gn_usage_errors(args):
    cp = run("gn", *args)
    assert cp.returncode == 2 and "usage" in cp.stderr


def test_gn_budget_exhausted():
    cp = run("gn", "--n", "1", "--x", "1", "--tol", "1e-30", "--budget", "4")
    assert cp.returncode == 1 and "budget" in cp.stderr


def test_scan_g0():
    cp = run("scan", "--lo", "1/20", "--hi", "1/4")
    doc = json.loads(cp.stdout)
    assert doc["heuristic"] is True
    assert "".join(c["label"] for c in doc["intervals"]) == "+?+?+?+"


def test_scan_family(cache_dir):
    cp = run("scan", "--f", "exp(-(u))", "--n", "2", "--lo", "2/5", "--hi", "3/5",
             env_dir=cache_dir)
    assert "".join(c["label"] for c in json.loads(cp.stdout)["intervals"]) == "+?-"


def test_plotdata(tmp_path, cache_dir):
    cp = run("plotdata", "--n", "2", env_dir=cache_dir)
    rows = list(csv.DictReader(io.StringIO(cp.stdout)))
    assert len(rows) == 1 and abs(float(rows[0]["x"]) - 0.5) < 1e-12
    assert (rows[0]["sign_left"], rows[0]["sign_right"]) == ("+", "-")
    out = tmp_path / "p3.csv"
    run("plotdata", "--n", "3", "-o", str(out), env_dir=cache_dir)
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 2 and float(rows[0]["x"]) < float(rows[1]["x"])
    cp = run("plotdata", "--n", "0", env_dir=cache_dir)
    assert cp.stdout.splitlines() == ["n,x,lo,hi,multiplicity,sign_left,sign_right"]


def test_cache_info_and_purge(cache_dir):
    run("census", "--n-max", "2", env_dir=cache_dir)
    info = json.loads(run("cache", "info", env_dir=cache_dir).stdout)
    assert info["files"][0]["spec"] == "exp(-(u))" and info["files"][0]["n_max"] == 2
    cp = run("cache", "purge", env_dir=cache_dir)
    assert "removed 1" in cp.stdout
    assert json.loads(run("cache", "info", env_dir=cache_dir).stdout)["files"] == []


def test_concurrent_invocations_share_a_cache(cache_dir):
    procs = [subprocess.Popen([sys.executable, "-m", "flatlab", "census", "--n-max", str(n)],
                              stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
                              env={**os.environ, "FLATLAB_CACHE_DIR": str(cache_dir)})
             for n in (10, 12, 14)]
    for p in procs:
        p.communicate()
        assert p.returncode == 0
    info = json.loads(run("cache", "info", env_dir=cache_dir).stdout)
    assert info["files"][0]["ok"] and info["files"][0]["n_max"] == 14
