import json

import pytest

from twospin import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dressed_without_coupling(capsys):
    code, out, _ = run(capsys, "dressed", "--de", "11", "--g", "0")
    assert code == 0
    assert out == "g,dressed_energy\n0.00000000e+00,1.10000000e+01\n"


def test_help_lists_every_verb(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for verb in cli.VERBS:
        assert verb in text


def test_exit_codes(capsys):
    assert run(capsys, "frobnicate")[0] == cli.EXIT_USAGE
    assert run(capsys, "dressed", "--de", "11", "--bogus")[0] == cli.EXIT_USAGE
    assert run(capsys, "dressed")[0] == cli.EXIT_USAGE
    assert run(capsys, "dressed", "--de", "11", "--n0", "0")[0] == cli.EXIT_PRECONDITION
    code, _, err = run(capsys, "resonance", "--de1", "11", "--de2", "15", "--g1", "0.1", "--dn", "-2")
    assert code == cli.EXIT_PRECONDITION and "NoResonance" in err
    # (n-1, +, +) lies at -hw0 + (DE1 + DE2)/2 = 1 relative to n hw0
    code, _, err = run(capsys, "sixstate", "--de1", "3", "--de2", "1", "--u1", "0.01", "--u2", "0.01",
                       "--n", "10", "--energy", "1")
    assert code == cli.EXIT_NUMERICAL and "PoleError" in err


def test_resonance_json_is_sorted_and_deterministic(capsys):
    argv = ["resonance", "--de1", "11", "--de2", "15", "--g1", "0.5", "--dn", "-2"]
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    data = json.loads(first)
    assert list(data) == sorted(data)
    assert data["g2"] == pytest.approx(0.1611206, rel=5e-3)


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"de": 11, "g": [0.5], "n0": 9600}))
    code, out, _ = run(capsys, "dressed", "--config", str(cfg))
    assert code == 0 and out.splitlines()[1].startswith("5.00000000e-01,")
    code, out, _ = run(capsys, "dressed", "--config", str(cfg), "--g", "0")
    assert out.splitlines()[1] == "0.00000000e+00,1.10000000e+01"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "dressed", "--config", str(cfg))[0] == cli.EXIT_USAGE


def test_output_file(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, out, _ = run(capsys, "dressed", "--de", "11", "--g", "0", "0.1", "-o", str(path))
    assert code == 0 and out == ""
    assert path.read_bytes().count(b"\n") == 3 and b"\r" not in path.read_bytes()


def test_sixstate_verb(capsys):
    code, out, _ = run(capsys, "sixstate", "--de1", "11", "--de2", "11", "--g1", "0.01", "--g2", "0.02",
                       "--n", "10000")
    data = json.loads(out)
    assert code == 0
    assert set(data) >= {"v16", "v61", "sigma1", "sigma6", "splitting", "terms"}
    assert len(data["terms"]) == 4
    assert data["splitting"] == pytest.approx(2 * data["v16"]["abs"], rel=1e-8)


def test_multimode_verb(tmp_path, capsys):
    spec = {"k": [0.5, 1.0, 1.5], "weights": [1, 1, 1], "omega": [1.0, 2.0, 3.0], "delta_e1": 11.0,
            "separations": [0.0, 1.0, 2.0]}
    path = tmp_path / "modes.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "multimode", "--spec", str(path))
    lines = out.splitlines()
    assert code == 0 and lines[0] == "separation,re_v16,im_v16,abs_v16" and len(lines) == 4


def test_spectrum_and_map(capsys, tmp_path):
    code, out, _ = run(capsys, "spectrum", "--de1", "5", "--de2", "7", "--g1", "0.2", "--g2", "0.3",
                       "--n0", "50", "--halfwidth", "30", "--emin", "-1", "--emax", "1",
                       "--dump-band", str(tmp_path / "band.csv"))
    assert code == 0 and len(out.splitlines()) == 9
    assert (tmp_path / "band.csv").exists()
    code, out, _ = run(capsys, "map", "--de1", "11", "--de2", "15", "--g1-grid", "0.4", "0.8", "3",
                       "--dn", "-2", "0")
    assert code == 0 and len(out.splitlines()) == 7


def test_jobs_do_not_change_output(capsys, monkeypatch):
    argv = ["map", "--de1", "11", "--de2", "15", "--g1-grid", "0.5", "1.0", "4", "--dn", "-2", "0"]
    serial = run(capsys, *argv, "--jobs", "1")[1]
    monkeypatch.setenv("TWOSPIN_JOBS", "2")
    assert run(capsys, *argv)[1] == serial
    assert run(capsys, *argv, "--jobs", "0")[0] == cli.EXIT_PRECONDITION


def test_table1_single_row(capsys):
    code, out, _ = run(capsys, "table1", "--de1", "11", "--de2", "15", "--n0", "9600", "--g1", "0.8")
    g1, g2, i12, i12w = map(float, out.splitlines()[1].split(","))
    assert code == 0
    assert g2 == pytest.approx(0.4528576, rel=5e-3)
    assert i12 == pytest.approx(0.1562, rel=0.01) and i12w == pytest.approx(0.1562, rel=0.01)


def test_validate_quick_reports_every_check(capsys):
    from twospin.validation import QUICK

    code, _, err = run(capsys, "validate", "--suite", "quick")
    lines = [l for l in err.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert len(lines) == len(QUICK)
    assert code == (cli.EXIT_FAILED_CHECKS if any(l.startswith("FAIL") for l in lines) else 0)
