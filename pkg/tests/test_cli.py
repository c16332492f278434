import json
import subprocess
import sys

import pytest

from pdms.cli import main
from pdms.codec import Share

from conftest import REF_G, REF_SOURCE, small_field_source

EX = ["--q", "11", "--n", "6", "--k", "5", "--mu", "1", "--p", "2"]
BYTE = ["--q", "257", "--n", "6", "--k", "5", "--mu", "1", "--p", "2"]


@pytest.fixture
def example_descriptor(tmp_path):
    src = tmp_path / "gpp.json"
    src.write_text(json.dumps(REF_SOURCE))
    out = tmp_path / "ex.json"
    assert main(["construct", *EX, "--source", str(src), "--out", str(out)]) == 0
    return out


@pytest.fixture
def byte_descriptor(tmp_path):
    out = tmp_path / "byte.json"
    assert main(["construct", *BYTE, "--seed", "42", "--out", str(out)]) == 0
    return out


def encode(tmp_path, scheme, data, seed="1", name="shares"):
    inp = tmp_path / f"{name}.in"
    inp.write_bytes(data)
    out = tmp_path / name
    assert main(["encode", "--scheme", str(scheme), "--input", str(inp), "--out", str(out),
                 "--seed", seed]) == 0
    return out


def test_construct_example(example_descriptor, capsys):
    d = json.loads(example_descriptor.read_text())
    assert d["G"] == REF_G and d["source"] == REF_SOURCE
    assert example_descriptor.read_bytes().endswith(b"\n")


def test_construct_prints_digest(tmp_path, capsys):
    out = tmp_path / "s.json"
    main(["construct", *BYTE, "--seed", "3", "--out", str(out)])
    import hashlib
    digest = capsys.readouterr().out.strip()
    assert digest == hashlib.sha256(out.read_bytes().rstrip(b"\n")).hexdigest()


def test_construct_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["construct", "--q", "257", "--n", "8", "--k", "5", "--mu", "1", "--p", "2", "--seed", "42"]
    assert main([*args, "--out", str(a)]) == 0
    assert main([*args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_construct_errors(tmp_path):
    out = tmp_path / "x.json"
    assert main(["construct", "--q", "10", "--n", "6", "--k", "5", "--mu", "1", "--p", "2",
                 "--seed", "1", "--out", str(out)]) == 2
    assert main(["construct", *BYTE, "--out", str(out)]) == 2
    assert main(["construct", "--q", "11", "--n", "7", "--k", "5", "--mu", "1", "--p", "2",
                 "--seed", "1", "--out", str(out)]) == 3
    assert main(["construct", *BYTE, "--source", str(tmp_path / "missing.json"),
                 "--out", str(out)]) == 5
    bad = tmp_path / "bad.json"
    rows = [r[:] for r in REF_SOURCE]
    rows[4][0] = 0
    bad.write_text(json.dumps(rows))
    assert main(["construct", *EX, "--source", str(bad), "--out", str(out)]) == 3
    assert not out.exists()


def test_search(tmp_path):
    out = tmp_path / "s.json"
    assert main(["search", "--q", "1009", "--n", "10", "--k", "8", "--mu", "2", "--p", "2",
                 "--tries", "1000", "--seed", "7", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["perfect_candidate"] is True and d["search"]["attempts"] >= 1
    assert main(["search", "--q", "257", "--n", "8", "--k", "5", "--mu", "1", "--p", "1",
                 "--seed", "0", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["search"]["attempts"] == 1


def test_search_exhausted(tmp_path, capsys):
    out = tmp_path / "s.json"
    code = main(["search", "--q", "13", "--n", "12", "--k", "9", "--mu", "3", "--p", "2",
                 "--tries", "1", "--seed", "0", "--out", str(out)])
    assert code == 4 and "1 attempts" in capsys.readouterr().err
    assert not out.exists()


def test_search_indivisible_params(tmp_path):
    # k - mu = 7 is odd, so groups of p = 2 do not tile the file
    for k in ("9", "10"):
        mu = "2" if k == "9" else "3"
        n = "10" if k == "9" else "12"
        assert main(["search", "--q", "1009", "--n", n, "--k", k, "--mu", mu, "--p", "2",
                     "--seed", "7", "--out", str(tmp_path / "s.json")]) == 2


def test_encode_decode_round_trip(tmp_path, byte_descriptor):
    data = bytes(range(256)) * 7
    shares = encode(tmp_path, byte_descriptor, data)
    assert sorted(p.name for p in shares.iterdir()) == [f"share_{i}.pdms" for i in range(1, 7)]
    for drop in range(1, 7):
        use = [str(shares / f"share_{i}.pdms") for i in range(1, 7) if i != drop]
        out = tmp_path / f"dec{drop}"
        assert main(["decode", "--scheme", str(byte_descriptor), "--out", str(out), *use]) == 0
        assert out.read_bytes() == data


def test_encode_layout(tmp_path, byte_descriptor):
    shares = encode(tmp_path, byte_descriptor, b"0123456789")
    sh = Share.from_bytes((shares / "share_1.pdms").read_bytes())
    assert sh.stripe_count == 3 and sh.original_length == 10
    empty = encode(tmp_path, byte_descriptor, b"", name="empty")
    assert Share.from_bytes((empty / "share_2.pdms").read_bytes()).stripe_count == 0


def test_encode_deterministic(tmp_path, byte_descriptor):
    a = encode(tmp_path, byte_descriptor, b"determinism", name="a")
    b = encode(tmp_path, byte_descriptor, b"determinism", name="b")
    for i in range(1, 7):
        assert (a / f"share_{i}.pdms").read_bytes() == (b / f"share_{i}.pdms").read_bytes()


def test_encode_small_field(tmp_path, example_descriptor):
    inp = tmp_path / "in"
    inp.write_bytes(b"x")
    assert main(["encode", "--scheme", str(example_descriptor), "--input", str(inp),
                 "--out", str(tmp_path / "o"), "--seed", "0"]) == 2
    assert main(["encode", "--scheme", str(example_descriptor), "--input", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "o"), "--seed", "0"]) == 5


def test_decode_errors(tmp_path, byte_descriptor):
    shares = encode(tmp_path, byte_descriptor, b"payload")
    other = tmp_path / "other.json"
    main(["construct", *BYTE, "--seed", "43", "--out", str(other)])
    foreign = encode(tmp_path, other, b"payload", name="foreign")
    out = tmp_path / "out"
    mixed = [str(shares / f"share_{i}.pdms") for i in range(1, 5)] + [str(foreign / "share_5.pdms")]
    assert main(["decode", "--scheme", str(byte_descriptor), "--out", str(out), *mixed]) == 6
    few = [str(shares / f"share_{i}.pdms") for i in range(1, 5)]
    assert main(["decode", "--scheme", str(byte_descriptor), "--out", str(out), *few]) == 2
    corrupt = tmp_path / "corrupt.pdms"
    corrupt.write_bytes(b"XXXX" + (shares / "share_5.pdms").read_bytes()[4:])
    assert main(["decode", "--scheme", str(byte_descriptor), "--out", str(out), *few,
                 str(corrupt)]) == 6
    assert not out.exists()


def test_partial(tmp_path, byte_descriptor):
    data = bytes(range(50, 73))
    shares = encode(tmp_path, byte_descriptor, data)
    for group, nodes in ((0, (1, 2, 3)), (1, (1, 4, 5))):
        out = tmp_path / f"g{group}"
        assert main(["partial", "--scheme", str(byte_descriptor), "--group", str(group),
                     "--out", str(out), *[str(shares / f"share_{i}.pdms") for i in nodes]]) == 0
        side = json.loads((tmp_path / f"g{group}.json").read_text())
        assert side["nodes"] == list(nodes) and side["group"] == group
        want = bytes(data[j * 4 + group * 2 + t] for j in range(6) for t in range(2)
                     if j * 4 + group * 2 + t < len(data))
        assert out.read_bytes() == want
    out = tmp_path / "bad"
    assert main(["partial", "--scheme", str(byte_descriptor), "--group", "0", "--out", str(out),
                 *[str(shares / f"share_{i}.pdms") for i in (2, 3, 4)]]) == 2
    assert not out.exists()
    assert main(["partial", "--scheme", str(byte_descriptor), "--group", "5", "--out", str(out),
                 *[str(shares / f"share_{i}.pdms") for i in (1, 2, 3)]]) == 2


def test_audit_example(example_descriptor, capsys):
    capsys.readouterr()
    assert main(["audit", "--scheme", str(example_descriptor)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["perfect"] is True and rep["weak_security_level"] >= 2


def test_audit_systematic(tmp_path, capsys):
    g = [[1, 0, 0, 1, 1], [0, 1, 0, 1, 2], [0, 0, 1, 1, 3]]
    path = tmp_path / "sys.json"
    path.write_text(json.dumps({"version": 1, "q": 7, "n": 5, "k": 3, "mu": 0, "p": 1, "G": g}))
    assert main(["audit", "--scheme", str(path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["perfect"] is True and rep["weak_security_level"] == 0


def test_audit_entropy(tmp_path, capsys):
    src = tmp_path / "src.json"
    src.write_text(json.dumps(small_field_source(0).tolist()))
    desc = tmp_path / "small.json"
    assert main(["construct", "--q", "5", "--n", "4", "--k", "3", "--mu", "1", "--p", "2",
                 "--source", str(src), "--out", str(desc)]) == 0
    capsys.readouterr()
    assert main(["audit", "--scheme", str(desc), "--entropy"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["entropy"]["discrepancies"] == [] and rep["entropy"]["joint_uniform"]


def test_audit_exit_codes(tmp_path, example_descriptor, capsys, monkeypatch):
    assert main(["audit", "--scheme", str(example_descriptor), "--budget-subsets", "3"]) == 7
    monkeypatch.setenv("PDMS_BUDGET", "subsets=3")
    assert main(["audit", "--scheme", str(example_descriptor)]) == 7
    monkeypatch.setenv("PDMS_BUDGET", "junk")
    assert main(["audit", "--scheme", str(example_descriptor)]) == 2
    monkeypatch.delenv("PDMS_BUDGET")
    d = json.loads(example_descriptor.read_text())
    d["G"][4][3] = 0   # bottom row loses a nonzero entry: not strongly secure
    bad = tmp_path / "weak.json"
    bad.write_text(json.dumps(d))
    code = main(["audit", "--scheme", str(bad)])
    assert code in (1, 3)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "pdms", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "construct" in res.stdout
