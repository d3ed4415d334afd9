import csv
import io
import json

import pytest

from pinrate import __version__
from pinrate.cli import main, parse_args


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_happy_paths():
    cfg = parse_args("delta --family basic --alpha 0.5 --b 0.5 --nmax 2000 --precision auto --out csv".split())
    assert cfg.command == "delta" and cfg.n_max == 2000 and cfg.precision.is_auto and cfg.out_format == "csv"
    cfg = parse_args("b0 --family shifted --alpha 0.5 --m 1 --tol 1e-6".split())
    assert cfg.family == "shifted" and cfg.m == 1 and cfg.tol == 1e-6


@pytest.mark.parametrize("argv,flag", [
    ("tilt --b -0.1", "--b"),
    ("tilt --b 0.5 --alpha 1.5", "--alpha"),
    ("delta --b 0.5 --nmax 0", "--nmax"),
    ("u --family two-point --b 0.1", "--p"),
    ("tilt --b 0.5 --bogus 3", "--bogus"),
    ("tilt --b 0.5 --precision fast", "--precision"),
    ("rate --b 0.5 --nmax 100 --window 50,200", "--window"),
    ("tilt", "--b"),
])
def test_usage_errors(argv, flag, capsys):
    code, _, err = run(argv.split(), capsys)
    assert code == 1
    assert flag in err


def test_precision_exit_code(capsys):
    code, _, err = run("delta --b 0.5 --nmax 2000 --precision 64".split(), capsys)
    assert code == 2 and "bits" in err


def test_singularity_exit_code(capsys):
    code, _, _ = run("ratio --family two-point --p 0.5 --b 0.1 --nmax 40 --n 30".split(), capsys)
    assert code == 3


def test_b0_json(capsys):
    code, out, _ = run("b0 --family shifted --alpha 0.5 --m 1 --tol 1e-6".split(), capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"command", "params", "results", "provenance"}
    assert abs(doc["results"]["b0"] - 0.248399) < 1e-5 and doc["results"]["tol"] == 1e-6
    assert doc["provenance"]["version"] == __version__


def test_b0_basic_sentinel(capsys):
    code, out, _ = run("b0 --family basic --alpha 0.5 --b-hi 5".split(), capsys)
    assert code == 0 and json.loads(out)["results"]["b0"] == "inf"


def test_delta_csv_format(tmp_path):
    path = tmp_path / "d.csv"
    assert main(f"delta --family two-point --p 0.5 --b 0.1 --nmax 20 --out csv --out-path {path}".split()) == 0
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(io.StringIO(raw.decode("utf-8"))))
    assert rows[0] == ["n", "u", "d", "grad_u"] and len(rows) == 22


def test_xi_scan_csv(capsys):
    code, out, _ = run("xi-scan --family basic --alpha 0.5 --grid 0.4,0.2,0.1 --out csv".split(), capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 3
    assert all(abs(float(r["b_times_xi"]) - 1) < 0.1 for r in rows)


def test_mc_deterministic_files(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        argv = f"mc --family basic --alpha 0.5 --b 0.5 --horizon 20 --paths 50000 --seed 42 --out csv --out-path {p}"
        assert main(argv.split()) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_merge(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# defaults\nfamily = shifted\nalpha=0.5\nm=1\nb=0.2\n")
    cfg = parse_args(["roots", "--config", str(cfg_file), "--b", "0.5"])
    assert cfg.family == "shifted" and cfg.b == 0.5
    code, out, _ = run(["roots", "--config", str(cfg_file), "--b", "0.5"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["results"]["count"]["count"] == 1 and len(doc["results"]["roots"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=red\n")
    code, _, err = run(["roots", "--config", str(bad)], capsys)
    assert code == 1 and "colour" in err


@pytest.mark.parametrize("argv", [
    "law --family geometric --p 0.3 --nmax 5",
    "tilt --family logcorrected --alpha 0.5 --j 1 --b 0.5",
    "u --family table --table 0.2,0.5,0.3 --b 0 --nmax 10",
    "rate --family basic --alpha 0.5 --b 0.5 --nmax 400",
    "ratio --b 0.5 --nmax 300 --n 100,250",
    "pinning --beta 1.0 --N 200",
])
def test_json_round_trip(argv, capsys):
    code, out, _ = run(argv.split(), capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == argv.split()[0]
    assert isinstance(doc["results"], dict)
    assert set(doc["provenance"]) == {"precision_bits", "seed", "version"}
    assert json.loads(json.dumps(doc)) == doc


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "out.json"
    assert main(f"tilt --b 0.5 --out-path {target}".split()) == 0
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]
    json.loads(target.read_text())
