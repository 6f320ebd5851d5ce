import json

import numpy as np
import pytest

from concent.cli import main, parse_shape, read_matrix_csv, InputError
from concent.linalg import RngState
from concent.simulators import Constant, Linear, Step, generate_spectrum, synthesize_data


def _write(path, X, header=None):
    lines = [header] if header else []
    lines += [",".join(repr(float(v)) for v in row) for row in X]
    path.write_text("\n".join(lines) + "\n")
    return path


def _data_rows(path):
    return [line for line in path.read_text().splitlines()[2:] if line]


def test_recover_is_byte_identical(tmp_path):
    X = np.random.default_rng(0).standard_normal((100, 100))
    src = _write(tmp_path / "x.csv", X)
    assert main(["recover", str(src), "--seed", "7", "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["recover", str(src), "--seed", "7", "--output-dir", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a/recovery.json").read_bytes() == (tmp_path / "b/recovery.json").read_bytes()


def test_recover_json_schema(tmp_path):
    X = np.random.default_rng(1).standard_normal((30, 8))
    src = _write(tmp_path / "x.csv", X, header="a,b,c,d,e,f,g,h")
    code = main(["recover", str(src), "--header", "--loops", "3", "--csv", "--centered",
                 "--output-dir", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "recovery.json").read_text())
    assert set(doc) == {"manifest", "sample_spectrum", "recovered", "iterates"}
    assert len(doc["sample_spectrum"]) == 8 and len(doc["iterates"]) == 3
    assert doc["recovered"] == doc["iterates"][-1]
    m = doc["manifest"]
    assert m["subcommand"] == "recover" and m["config"]["centered"] is True
    assert len(m["input_sha256"]) == 64
    assert (tmp_path / "recovery.csv").read_text().startswith("# manifest: ")
    assert len(_data_rows(tmp_path / "recovery.csv")) == 8


def test_recover_zero_matrix(tmp_path):
    src = _write(tmp_path / "z.csv", np.zeros((10, 4)))
    assert main(["recover", str(src), "--output-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "recovery.json").read_text())
    assert doc["recovered"] == [0.0] * 4


def test_recover_round_trip_improves_on_sample(tmp_path):
    truth = generate_spectrum(Linear(0, 10), 100)
    X = synthesize_data(truth, 100, RngState(21, domain=1))
    src = _write(tmp_path / "lin.csv", X)
    assert main(["recover", str(src), "--seed", "3", "--output-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "recovery.json").read_text())
    t = truth.values
    rel = lambda v: np.linalg.norm(np.array(v) - t) / np.linalg.norm(t)
    assert rel(doc["recovered"]) < rel(doc["sample_spectrum"])


@pytest.mark.parametrize(
    "content, fragment",
    [("1,2\n3\n", "row 2"), ("1,2\n3,abc\n", "row 2, column 2"), ("", "p = 0"), ("1,nan\n", "non-finite")],
)
def test_recover_bad_csv_exit_2(tmp_path, capsys, content, fragment):
    src = tmp_path / "bad.csv"
    src.write_text(content)
    assert main(["recover", str(src), "--output-dir", str(tmp_path)]) == 2
    assert fragment in capsys.readouterr().err


def test_recover_missing_file(tmp_path):
    assert main(["recover", str(tmp_path / "nope.csv")]) == 2


def test_crlf_and_header(tmp_path):
    src = tmp_path / "crlf.csv"
    src.write_bytes(b"a,b\r\n1,2\r\n3,4\r\n")
    X, digest = read_matrix_csv(src, header=True)
    np.testing.assert_array_equal(X, [[1, 2], [3, 4]])
    assert len(digest) == 64


def test_simulate_rows_and_curves(tmp_path):
    code = main(["simulate", "--shape", "step:2x0.5,1x0.5", "--n", "50", "--p", "50", "--seeds", "3",
                 "--loops", "3", "--output-dir", str(tmp_path)])
    assert code == 0
    rows = _data_rows(tmp_path / "summary.csv")
    assert len(rows) == 3
    for seed in range(3):
        assert len(_data_rows(tmp_path / f"curves_seed{seed}.csv")) == 50
    header = (tmp_path / "summary.csv").read_text().splitlines()[1]
    assert header == "seed,shape,n,p,err_sample_rel_l2,err_concent_rel_l2"


def test_simulate_large_n_constant(tmp_path):
    assert main(["simulate", "--shape", "constant:1", "--n", "10000", "--p", "5",
                 "--output-dir", str(tmp_path)]) == 0
    row = _data_rows(tmp_path / "summary.csv")[0].split(",")
    assert float(row[-1]) < 0.1


def test_simulate_bad_shape(tmp_path):
    assert main(["simulate", "--shape", "linear:5,1", "--n", "5", "--p", "5",
                 "--output-dir", str(tmp_path)]) == 2


def test_concentration_outputs(tmp_path):
    assert main(["concentration", "--shape", "constant:1", "--n", "100", "--p", "100", "--reps", "200",
                 "--output-dir", str(tmp_path)]) == 0
    stats = tmp_path / "concentration_stats.csv"
    assert stats.read_text().splitlines()[1] == "index,mean,std,mp_quantile,mp_density"
    rows = [list(map(float, r.split(","))) for r in _data_rows(stats)]
    assert len(rows) == 100
    assert max(r[2] for r in rows) <= 0.2
    assert len(_data_rows(tmp_path / "concentration_deviation.csv")) == 200


def test_concentration_zero_shape(tmp_path):
    assert main(["concentration", "--shape", "constant:0", "--n", "20", "--p", "10", "--reps", "5",
                 "--output-dir", str(tmp_path)]) == 0
    stats = tmp_path / "concentration_stats.csv"
    assert stats.read_text().splitlines()[1] == "index,mean,std"
    assert all(float(x) == 0.0 for r in _data_rows(stats) for x in r.split(",")[1:])


def test_concentration_rejects_single_rep(tmp_path):
    assert main(["concentration", "--shape", "constant:1", "--n", "5", "--p", "5", "--reps", "1",
                 "--output-dir", str(tmp_path)]) == 2


def test_parse_shape():
    assert parse_shape("constant:1", 3) == Constant(1.0)
    assert parse_shape("linear:0,10", 3) == Linear(0.0, 10.0)
    assert parse_shape("step:2x0.5,1x0.5", 5) == Step(((2.0, 2), (1.0, 3)))
    assert generate_spectrum(parse_shape("sparse:10", 4), 4).tolist() == [10.0, 7.5, 0.0, 0.0]
    for bad in ("step:2x0.7,1x0.7", "power", "wave:1", "step:2"):
        with pytest.raises(InputError):
            parse_shape(bad, 4)
