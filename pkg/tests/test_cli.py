import json

import pytest

from mallows_lcs.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_stats(capsys):
    code, out, _ = run(capsys, "stats", "--pi", "2,4,1,3", "--tau", "1,3,2,4")
    assert code == 0
    assert json.loads(out) == {"lis_pi": 2, "lis_tau": 3, "lcs": 2, "l(pi)": 3, "l(tau)": 1}


def test_stats_rejects_non_permutation(capsys):
    code, _, err = run(capsys, "stats", "--pi", "1,1,3", "--tau", "1,2,3")
    assert code == 2 and "duplicate value 1" in err


def test_couple_reports_counts(capsys):
    code, out, _ = run(capsys, "couple", "--n", "4", "--q", "0.6", "--q-prime", "0.6",
                       "--steps", "2000", "--seed", "1")
    data = json.loads(out)
    assert code == 0 and data["dominance_violations"] == 0
    assert 0 <= data["tv_x"] <= 1 and 0 <= data["tv_y"] <= 1


def test_couple_bad_parameters(capsys):
    code, _, err = run(capsys, "couple", "--n", "4", "--q", "0.9", "--q-prime", "0.5")
    assert code == 2 and "q <= q'" in err


def test_density_csv(capsys, tmp_path):
    out_file = tmp_path / "rho.csv"
    assert main(["density", "--beta", "2", "--grid", "5", "--out", str(out_file)]) == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "x,y,u_beta,rho"
    assert len(lines) == 26
    x, y, ub, r = map(float, lines[-1].split(","))
    assert (x, y) == (1.0, 1.0) and ub > 0 and r > 0


def test_jbar(capsys):
    code, out, _ = run(capsys, "jbar", "--beta", "2", "--gamma", "2", "--K", "16", "--L", "4")
    data = json.loads(out)
    assert code == 0
    assert data["lower"] <= data["closed_form"] <= data["upper"]
    assert data["midpoint_dominance"] is True


def test_jbar_unequal_has_no_closed_form(capsys):
    _, out, _ = run(capsys, "jbar", "--beta", "2", "--gamma", "-3", "--K", "8", "--L", "2")
    assert json.loads(out)["closed_form"] is None


def test_experiment_files(capsys, tmp_path):
    rep, csv = tmp_path / "r.json", tmp_path / "t.csv"
    code, _, _ = run(capsys, "experiment", "--n", "100", "--beta", "0.5", "--gamma", "0.5",
                     "--trials", "3", "--seed", "4", "--rect", "0,0.5,0,0.5",
                     "--out", str(rep), "--csv", str(csv), "--verify-oracle")
    assert code == 0
    data = json.loads(rep.read_text())
    assert data["trials"] == 3 and data["rectangles"] == ["0.0,0.5,0.0,0.5"]
    assert csv.read_text().count("\n") == 4


def test_experiment_guard_and_config_errors(capsys, tmp_path):
    code, _, err = run(capsys, "experiment", "--n", "50", "--beta", "2", "--rect", "0,0.5,0,0.5")
    assert code == 2 and "ln 2" in err
    code, _, err = run(capsys, "experiment", "--trials", "2")
    assert code == 2 and "--n" in err
    code, _, _ = run(capsys, "experiment", "--n", "3", "--beta", "5")
    assert code == 2


def test_experiment_raw_q_and_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 40, "trials": 2, "seed": 3}))
    code, out, _ = run(capsys, "experiment", "--config", str(cfg), "--q", "0.95")
    data = json.loads(out)
    assert code == 0
    assert data["beta"] == pytest.approx(2.0) and data["gamma"] == 0.0


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["nope"])
