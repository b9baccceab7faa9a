import numpy as np
import pytest

from covertdomain.cli import cli_main
from covertdomain.experiments import ExperimentReport
from covertdomain.image import load_image, save_image, synth_cover


@pytest.fixture
def workspace(tmp_path):
    save_image(synth_cover(1, 32, 24), tmp_path / "c1.pgm")
    save_image(synth_cover(2, 32, 24), tmp_path / "c2.pgm")
    assert cli_main(["keygen", "--out", str(tmp_path / "key"), "--seed", "7"]) == 0
    return tmp_path


def _run(*args):
    return cli_main([str(a) for a in args])


def test_keygen(tmp_path):
    assert _run("keygen", "--out", tmp_path / "k") == 0
    assert len((tmp_path / "k").read_bytes()) == 32
    _run("keygen", "--out", tmp_path / "a", "--seed", "1")
    _run("keygen", "--out", tmp_path / "b", "--seed", "1")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_embed_extract(workspace):
    w = workspace
    (w / "m.bin").write_bytes(b"\xde\xad\xbe\xef")
    assert _run("embed", "--key", w / "key", "--in", w / "c1.pgm", "--bits", w / "m.bin",
                "--capacity", 32, "--out", w / "s.pgm") == 0
    assert _run("extract", "--key", w / "key", "--in", w / "s.pgm", "--capacity", 32, "--out", w / "got.bin") == 0
    assert (w / "got.bin").read_bytes() == b"\xde\xad\xbe\xef"


def test_extract_prints_bits(workspace, capsys):
    w = workspace
    (w / "m.bin").write_bytes(b"\xa0")
    _run("embed", "--key", w / "key", "--in", w / "c1.pgm", "--bits", w / "m.bin", "--capacity", 3, "--out", w / "s.pgm")
    capsys.readouterr()
    assert _run("extract", "--key", w / "key", "--in", w / "s.pgm", "--capacity", 3) == 0
    assert capsys.readouterr().out.strip() == "101"


def test_add_workflow(workspace):
    w = workspace
    (w / "m1.bin").write_bytes(b"\xf0\x0f")
    (w / "m2.bin").write_bytes(b"\xff\x00")
    for i in (1, 2):
        _run("embed", "--key", w / "key", "--in", w / f"c{i}.pgm", "--bits", w / f"m{i}.bin",
             "--capacity", 16, "--out", w / f"s{i}.pgm")
    assert _run("compute", "--case", "add", "--in", w / "s1.pgm", "--in2", w / "s2.pgm", "--out", w / "r.dccd") == 0
    assert _run("recover", "--key", w / "key", "--in", w / "r.dccd", "--capacity", 16, "--out", w / "x.bin") == 0
    assert (w / "x.bin").read_bytes() == b"\x0f\x0f"


def test_outer_workflow(workspace, capsys):
    w = workspace
    save_image(synth_cover(3, 8, 8), w / "o1.pgm")
    save_image(synth_cover(4, 8, 8), w / "o2.pgm")
    (w / "m1.bin").write_bytes(b"\xa0")
    (w / "m2.bin").write_bytes(b"\x60")
    for i in (1, 2):
        _run("embed", "--key", w / "key", "--in", w / f"o{i}.pgm", "--bits", w / f"m{i}.bin",
             "--capacity", 3, "--out", w / f"s{i}.pgm")
    _run("compute", "--case", "outer", "--in", w / "s1.pgm", "--in2", w / "s2.pgm", "--out", w / "r.dccd")
    capsys.readouterr()
    assert _run("recover", "--key", w / "key", "--in", w / "r.dccd", "--capacity", 3) == 0
    # [1,0,1] outer [0,1,1]
    assert capsys.readouterr().out.split() == ["011", "000", "011"]


def test_inner_workflow(workspace, capsys):
    w = workspace
    n = 32 * 24
    rng = np.random.default_rng(0)
    m1, m2 = rng.integers(0, 2, n), rng.integers(0, 2, n)
    (w / "m1.bin").write_bytes(np.packbits(m1).tobytes())
    (w / "m2.bin").write_bytes(np.packbits(m2).tobytes())
    for i in (1, 2):
        assert _run("embed", "--key", w / "key", "--in", w / f"c{i}.pgm", "--bits", w / f"m{i}.bin",
                    "--case", "inner", "--out", w / f"s{i}.pgm") == 0
    _run("compute", "--case", "inner", "--semantics", "int", "--in", w / "s1.pgm", "--in2", w / "s2.pgm", "--out", w / "r.dccd")
    capsys.readouterr()
    assert _run("recover", "--in", w / "r.dccd") == 0
    assert int(capsys.readouterr().out) == int(np.dot(m1, m2))


def test_errors(workspace, capsys):
    w = workspace
    assert _run("embed", "--bogus") != 0
    assert _run("nonsense") != 0
    assert _run("extract", "--key", w / "key", "--in", w / "missing.pgm", "--capacity", 4) == 1
    assert "error" in capsys.readouterr().err
    (w / "m.bin").write_bytes(b"\x00")
    assert _run("embed", "--key", w / "key", "--in", w / "c1.pgm", "--bits", w / "m.bin",
                "--capacity", 64, "--out", w / "s.pgm") == 1
    assert _run("extract", "--key", w / "key", "--in", w / "c1.pgm", "--capacity", 0) != 0
    assert _run("recover", "--in", w / "c1.pgm") == 1


def test_exp_security(tmp_path):
    out = tmp_path / "sec.txt"
    assert _run("exp-security", "--trials", 1, "--capacity", "500", "--dims", "40x30", "--out", out) == 0
    rep = ExperimentReport.from_text(out.read_text())
    assert rep.value(500, "error_with_key") == 0.0


def test_exp_feasibility_stdout(capsys):
    assert _run("exp-feasibility", "--trials", 1, "--capacity", "50", "--dims", "16x16") == 0
    assert "difference_ratio_add" in capsys.readouterr().out


def test_bad_dims():
    assert _run("exp-timing", "--dims", "12") != 0
    assert _run("exp-timing", "--capacity", "a,b") != 0
