import subprocess
import sys

import pytest

from confqkd.cli import main
from confqkd.protocol import parse_record


@pytest.fixture
def ini(tmp_path):
    def make(text):
        p = tmp_path / "c.ini"
        p.write_text(text)
        return str(p)
    return make


def test_run_ideal(ini, capsys):
    code = main(["run", "--config", ini("[session]\nnum_pulses = 4096\nseed = 2\n")])
    rec = parse_record(capsys.readouterr().out)
    assert code == 0
    assert rec["key_alice"] == rec["key_bob"] == rec["key_charlie"]


def test_run_abort(ini, capsys):
    code = main(["run", "--config", ini("[channels]\nbob = depolarizing:p=0.6\ncharlie = depolarizing:p=0.6\n")])
    out = capsys.readouterr()
    assert code == 2 and "reason=rate_nonpositive" in out.out and "rate_nonpositive" in out.err


def test_run_malformed_config(ini, capsys):
    code = main(["run", "--config", ini("[session]\nseed = 3\nbroken\n")])
    err = capsys.readouterr().err
    assert code == 1 and ":3:" in err


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.ini")]) == 1
    assert "absent.ini" in capsys.readouterr().err


def test_usage_error(capsys):
    assert_exit = pytest.raises(SystemExit)
    with assert_exit as exc:
        main(["launch"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--axis", "depolarizing_p:0:0:1", "--trials", "0"])
    assert exc.value.code == 1


def test_run_writes_files(ini, tmp_path):
    out, tr = tmp_path / "out.txt", tmp_path / "t.txt"
    cfg = ini("[session]\nnum_pulses = 1024\n")
    assert main(["run", "--config", cfg, "--seed", "5", "--out", str(out), "--transcript", str(tr)]) == 0
    assert out.read_text().startswith("status=completed")
    assert tr.read_text().startswith("STEP 4 alice BASES ")


def test_sweep_unknown_axis(capsys):
    assert main(["sweep", "--axis", "temperature:0:1:2"]) == 1
    assert "temperature" in capsys.readouterr().err


def test_sweep_output(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--axis", "depolarizing_p:0:0:1", "--trials", "2", "--jobs", "1", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1].endswith(",1.000000,1.000000,0.000000")


def test_verify_css_ok_and_fault(capsys):
    assert main(["verify-css", "--max-n", "2"]) == 0
    assert "overall=pass" in capsys.readouterr().out
    assert main(["verify-css", "--max-n", "2", "--fault-inject", "sign"]) == 3
    assert "mix0" in capsys.readouterr().err


def test_codes_listing(capsys):
    assert main(["codes"]) == 0
    assert "hamming_7_4,7,4,0.571429,3" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "confqkd", "codes"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("name,n,k")


def test_identical_seeds_identical_bytes(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"o{i}.txt"
        t = tmp_path / f"t{i}.txt"
        main(["run", "--seed", "77", "--out", str(p), "--transcript", str(t)])
        outs.append((p.read_bytes(), t.read_bytes()))
    assert outs[0] == outs[1]
