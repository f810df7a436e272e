import io
import subprocess
import sys

import numpy as np
import pytest

from orthotucker.cli import main
from orthotucker.tns import format_tns, parse_tns


def run(capsys, monkeypatch, argv, stdin=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def report(text):
    return dict(line.split(": ", 1) for line in text.splitlines())


def test_gen_then_decompose(capsys, monkeypatch):
    code, tns, _ = run(capsys, monkeypatch, ["gen", "--shape", "3", "4", "5", "--seed", "7"])
    assert code == 0
    code, out, err = run(capsys, monkeypatch, ["decompose", "--starts", "20"], stdin=tns)
    assert code == 0 and "wall_time_s" in err
    rep = report(out)
    assert float(rep["relative_distance"]) <= 1e-8
    assert rep["shape"] == "3 4 5" and rep["flags"] == "none"


def test_reports_are_byte_identical(capsys, monkeypatch, tmp_path):
    f = tmp_path / "t.tns"
    f.write_text(format_tns(np.random.default_rng(0).standard_normal((2, 3, 3))))
    outs = [run(capsys, monkeypatch, ["distance", str(f), "--starts", "3", "--seed", "5"])[1] for _ in range(2)]
    assert outs[0] == outs[1]
    gens = [run(capsys, monkeypatch, ["gen", "--shape", "3", "3", "3", "--sym", "--seed", "2"])[1] for _ in range(2)]
    assert gens[0] == gens[1]


def test_gen_roundtrip_is_lossless(capsys, monkeypatch):
    from orthotucker.synthetic import planted

    _, tns, _ = run(capsys, monkeypatch, ["gen", "--shape", "2", "3", "4", "--seed", "4"])
    assert np.array_equal(parse_tns(tns).tensor, planted((2, 3, 4), seed=4).T)


def test_odeco_distance_not_smaller(capsys, monkeypatch, tmp_path):
    f = tmp_path / "t.tns"
    f.write_text(format_tns(np.random.default_rng(1).standard_normal((3, 3, 3))))
    full = report(run(capsys, monkeypatch, ["distance", str(f), "--starts", "4"])[1])
    odeco = report(run(capsys, monkeypatch, ["distance", str(f), "--starts", "4", "--odeco"])[1])
    assert odeco["target"] == "X_odeco"
    assert float(odeco["relative_distance"]) >= float(full["relative_distance"]) - 1e-8


def test_member2d(capsys, monkeypatch):
    for extra in ([], ["--exact"]):
        code, out, _ = run(capsys, monkeypatch, ["member2d", "--d", "3", "--t", "1,0,1,0", *extra])
        assert code == 0 and report(out)["verdict"] == "on variety"
    code, out, _ = run(capsys, monkeypatch, ["member2d", "--d", "3", "--t", "1,1,0,0", "--exact"])
    assert report(out)["verdict"] == "off variety" and report(out)["r"] == "-81"


def test_cumulant_writes_symmetric_tns(capsys, monkeypatch, tmp_path):
    f = tmp_path / "d.csv"
    X = np.random.default_rng(2).exponential(size=(30, 3))
    f.write_text("x,y,z\n" + "\n".join(",".join(str(float(v)) for v in row) for row in X))
    code, out, _ = run(capsys, monkeypatch, ["cumulant", "--order", "3", "--csv", str(f)])
    assert code == 0
    tf = parse_tns(out)
    assert tf.sym and tf.tensor.shape == (3, 3, 3)


def test_verify_and_mq(capsys, monkeypatch, tmp_path):
    f = tmp_path / "t.tns"
    T = np.zeros((2, 2, 2))
    T[0, 0, 0], T[1, 1, 1] = 2.0, 1.0
    f.write_text(format_tns(T))
    with pytest.warns(UserWarning, match="normalised"):
        code, out, _ = run(capsys, monkeypatch, ["verify", str(f), "--vectors", "1,2;1,2;1,2"])
    rep = report(out)
    assert code == 0 and rep["singular_vector_tuple"] == "true"
    code, out, _ = run(capsys, monkeypatch, ["mq", "--q", "P", "I", "I", "I"])
    rep = report(out)
    assert rep["rank"] == "8" and rep["iQ"] == "1000" and rep["M[0000]"] == "0 0 0 0 1 0 0 0"


def test_pattern_is_one_based(capsys, monkeypatch):
    code, out, _ = run(capsys, monkeypatch, ["pattern", "--shape", "2", "2", "2"])
    lines = [l for l in out.splitlines() if l.startswith("index")]
    assert code == 0 and len(lines) == 6 and lines[0] == "index: 1 1 2"


def test_dim_check_and_codim_table(capsys, monkeypatch):
    rep = report(run(capsys, monkeypatch, ["dim-check", "--shape", "3", "3", "3", "--sym"])[1])
    assert rep["expected"] == rep["measured"] == "7"
    rep = report(run(capsys, monkeypatch, ["codim-table", "--d", "6"])[1])
    assert rep["match"] == "true" and rep["sym_hadamard_ranks"] == "1 1 1 1 1 1 1 1"


def test_out_file(capsys, monkeypatch, tmp_path):
    out_path = tmp_path / "r.txt"
    code, out, _ = run(capsys, monkeypatch, ["dim-check", "--shape", "2", "2", "2", "--out", str(out_path)])
    assert code == 0 and out_path.read_text() == out


def test_exit_codes_and_messages(capsys, monkeypatch, tmp_path):
    code, _, err = run(capsys, monkeypatch, ["decompose", str(tmp_path / "missing.tns")])
    assert code == 2 and "missing.tns" in err
    bad = tmp_path / "bad.tns"
    bad.write_text("TNS 1\ndims: 2 2\n1 2 inf 4\n")
    code, _, err = run(capsys, monkeypatch, ["decompose", str(bad)])
    assert code == 2 and "bad.tns" in err and "(2, 1)" in err
    code, _, err = run(capsys, monkeypatch, ["member2d", "--d", "3", "--t", "1,2"])
    assert code == 1 and "--t" in err
    with pytest.raises(SystemExit) as exc:
        main(["decompose", "--starts", "0"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "orthotucker", "pattern", "--shape", "2", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("command: pattern")
