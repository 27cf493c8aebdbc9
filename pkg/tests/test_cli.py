import csv
import io
import json
import subprocess
import sys

import pytest

from sievelab import progressions as pp
from sievelab.arithmetic import build_tables
from sievelab.cli import ANCHORS, build_parser, run


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_phi_sum_json(capsys):
    code, out, _ = invoke(capsys, "phi-sum", "--y", "100", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert {"paper_anchor", "params", "seed"} <= set(doc)
    s, main, err = pp.phi_square_sum(100)
    assert doc["result"] == {"sum": s, "main": main, "error": err}


def test_bv_square_csv_rows_and_summary(capsys):
    code, out, _ = invoke(capsys, "bv-square", "--x", "100000", "--qmax", "21", "--A", "2", "--format", "csv")
    assert code == 0
    rows_part, summary_part = out.split("\r\n\r\n")
    rows = list(csv.DictReader(io.StringIO(rows_part)))
    ref = pp.bv_sum(build_tables(100_000), 100_000, 21, square_weight=True, A=2)
    assert [int(r["q"]) for r in rows] == list(range(1, 22))
    assert [float(r["contribution"]) for r in rows] == [r.contribution for r in ref.rows]
    summary = dict(csv.reader(io.StringIO(summary_part)))
    assert float(summary["lhs"]) == ref.lhs


def test_ls_classical_trials(capsys):
    code, out, _ = invoke(capsys, "ls-classical", "--Q", "20", "--N", "50", "--seq", "random-unit",
                          "--seed", "7", "--trials", "100", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["result"]["trials"]) == 100
    assert doc["result"]["violations"] == 0
    assert all(t["lhs"] <= t["rhs"] for t in doc["result"]["trials"])


@pytest.mark.parametrize("argv", [
    ["phi-sum"],
    ["phi-sum", "--y", "abc"],
    ["bogus"],
    ["phi-sum", "--y", "0"],
    ["vaughan-check", "--x", "100", "--U", "20", "--V", "20"],
    ["ls-sparse", "--Q", "10", "--t", "20", "--N", "5"],
    ["bv", "--x", "100", "--Q", "5", "--set", "primes"],
    ["vaughan-check", "--x", "100", "--U", "2", "--V", "2", "--f", "chi:5:9"],
])
def test_argument_errors_exit_2(argv, capsys):
    try:
        code = run(argv)
    except SystemExit as exc:
        code = exc.code
    err = capsys.readouterr().err
    assert code == 2
    assert err.strip() and "Traceback" not in err


def test_resource_limit_exit_1(capsys):
    code, _, err = invoke(capsys, "weighted-sum", "--x", "1000", "--y", "3", "--xmax", "100")
    assert code == 1 and len(err.strip().splitlines()) == 1
    code, _, _ = invoke(capsys, "ls-bilinear", "--Q", "10", "--M", "1000", "--N", "1000")
    assert code == 1


def test_help_names_every_anchor(capsys):
    parser = build_parser()
    assert set(parser._subparsers._group_actions[0].choices) == set(ANCHORS)
    for name, anchor in ANCHORS.items():
        with pytest.raises(SystemExit):
            run([name, "--help"])
        assert anchor.split()[0] in capsys.readouterr().out


DETERMINISM = [
    ["bdh", "--x", "50000", "--Q", "40"],
    ["bv", "--x", "20000", "--Q", "30", "--set", "squares", "--ygrid", "exact"],
    ["ls-sparse", "--Q", "300", "--N", "40", "--seed", "3"],
    ["ls-conjecture", "--Q", "100", "--N", "20", "--trials", "3"],
    ["census-am2", "--x", "20000"],
    ["vaughan-check", "--x", "2000", "--U", "7", "--V", "9", "--f", "chi:7:2"],
]


@pytest.mark.parametrize("argv", DETERMINISM, ids=lambda a: a[0])
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_byte_identical_across_threads(argv, fmt, tmp_path):
    outs = []
    for threads in (1, 4, 1):
        path = tmp_path / f"o{len(outs)}"
        assert run(argv + ["--format", fmt, "--threads", str(threads), "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "sievelab.cli", "sparsity", "--x", "100", "--theta", "1",
                          "--format", "json"], capture_output=True, text=True, check=True).stdout
    assert json.loads(out)["result"]["count"] == 100


def test_sieve_build_writes_cache(tmp_path, capsys):
    path = tmp_path / "t.slab"
    code, out, _ = invoke(capsys, "sieve-build", "--xmax", "1000", "--cache-out", str(path), "--format", "json")
    assert code == 0 and json.loads(out)["result"]["prime_count"] == 168
    assert path.read_bytes()[:5] == b"SLAB1"
