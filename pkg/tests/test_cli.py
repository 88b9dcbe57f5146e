import json
from fractions import Fraction

import pytest

from tpmahler.cli import compare_tables, main
from tpmahler.coeffs import CoeffTable, gen_diff_recurrence, golden_csv, golden_table, tables_from_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coeffs_matches_golden_column(capsys):
    code, out, _ = run(capsys, "coeffs", "--p", "2", "--n", "20", "--algorithm", "diff")
    assert code == 0
    parsed = tables_from_csv(out)
    assert [parsed[(2, n)] for n in range(21)] == list(golden_table()[2])
    assert "2,20,144427,262144" in out.splitlines()


def test_verify_p3(capsys):
    code, out, _ = run(capsys, "verify", "--p", "3", "--n", "400")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 5 and all(",true," in l for l in lines[1:])


def test_eval_origin(capsys):
    code, out, _ = run(capsys, "eval", "--p", "2", "--alpha", "0", "--prec", "128")
    assert code == 0
    row = out.splitlines()[1].split(",")
    assert row[2] == "1.0" and row[4] == "0.0"


@pytest.mark.parametrize("argv,code", [
    (("eval", "--p", "2", "--alpha", "1"), 2),
    (("eval", "--p", "2", "--alpha=-3/2"), 2),
    (("eval", "--p", "6", "--alpha", "1/2"), 1),
    (("eval", "--p", "2", "--alpha", "half"), 1),
    (("coeffs", "--n", "-1"), 1),
    (("coeffs", "--algorithm", "fft"), 1),
    (("decay", "--alpha", "1/2", "--P", "1"), 1),
    (("ledger", "--alpha", "1/2", "--alpha-im", "1/3"), 1),
    (("bogus",), 1),
    (("regularity", "--alpha", "0"), 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_stated_orbit_identity_reports_invariant_failure(capsys):
    code, out, err = run(capsys, "iterate", "--p", "2", "--alpha", "1/2", "--kmax", "2")
    assert code == 3 and "k = [1, 2]" in err
    assert out.splitlines()[0] == "k,lhs,rhs,residual,radius,ok"
    assert run(capsys, "iterate", "--p", "2", "--alpha", "1/2", "--kmax", "2", "--form", "root")[0] == 0


def test_determinism(tmp_path, capsys):
    outs = []
    for i in range(2):
        for cmd in (["coeffs", "--p", "3", "--n", "60", "--format", "json"],
                    ["aux", "--P", "3", "--format", "json"],
                    ["decay", "--alpha", "1/2", "--kmax", "3"],
                    ["ledger", "--alpha", "1/2", "--sweep", "2..5"],
                    ["probe", "--radii", "1/2,9/10"]):
            path = tmp_path / f"{i}_{cmd[0]}.out"
            assert main(cmd + ["-o", str(path)]) == 0
            outs.append(path.read_bytes())
    assert outs[:5] == outs[5:]


def test_env_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TPMAHLER_OUT_DIR", str(tmp_path / "out"))
    code, out, _ = run(capsys, "coeffs", "--p", "5", "--n", "20")
    assert code == 0 and out == ""
    written = (tmp_path / "out" / "coeffs_p5_n20.csv").read_text()
    assert written.startswith("p,n,numerator,denominator\n")


def test_json_table_round_trip(tmp_path, capsys):
    path = tmp_path / "t.json"
    assert main(["coeffs", "--p", "7", "--n", "80", "--format", "json", "-o", str(path)]) == 0
    tab = CoeffTable.from_json(path.read_text())
    assert tab.t == gen_diff_recurrence(7, 80).t


def test_compare(tmp_path, capsys):
    gold = tmp_path / "gold.csv"
    gold.write_text(golden_csv())
    gen = tmp_path / "gen.csv"
    assert main(["coeffs", "--p", "5", "--n", "20", "-o", str(gen)]) == 0
    assert run(capsys, "compare", str(gen), str(gen))[1].splitlines() == ["p,n,expected,found"]
    assert run(capsys, "compare", str(gold), str(gen))[0] == 0

    bad = tmp_path / "bad.csv"
    bad.write_text(gen.read_text().replace("5,10,3,25", "5,10,4,25"))
    code, out, _ = run(capsys, "compare", str(gen), str(bad))
    assert code == 3
    assert out.splitlines()[1:] == ["5,10,3/25,4/25"]

    broken = tmp_path / "broken.csv"
    broken.write_text("p,n,numerator,denominator\n5,0,1\n")
    code, _, err = run(capsys, "compare", str(gen), str(broken))
    assert code == 1 and "line 2" in err


def test_compare_tables_reports_missing_entries():
    a = "p,n,numerator,denominator\n2,0,1,1\n2,1,0,1\n"
    b = "p,n,numerator,denominator\n2,0,1,1\n"
    assert compare_tables(a, b) == [(2, 1, Fraction(0), None)]


def test_aux_outputs(capsys):
    code, out, _ = run(capsys, "aux", "--P", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["d"] == [[0, 0, 1], [0, 0, -1], [0, 0, 0]] and doc["achieved_vanishing"] == 4
    code, out, _ = run(capsys, "aux", "--P", "2", "--m", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and (doc["unknowns"], doc["conditions"]) == (54, 15)


def test_decay_and_ledger_headers(capsys):
    assert run(capsys, "decay", "--alpha", "1/2")[1].startswith("k,log_abs,decay_exponent\n")
    assert run(capsys, "ledger", "--alpha", "1/2")[1].startswith("k,analytic,arithmetic\n")
    code, out, _ = run(capsys, "ledger", "--alpha", "1/2", "--sweep", "2..8", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["slope_error"] < 0.05 and doc["crossover_P"] > 8
