import json

import pytest

from projshape.cli import build_parser, config_from_args, main
from projshape.exceptions import documented_exit_codes
from projshape.io import load_fixture, serialize_dataset

COLLINEAR_FRAME_CSV = """# name: collinear
# m: 2
group,view,landmark,x1,x2
a,1,1,0.0,0.0
a,1,2,1.0,1.0
a,1,3,2.0,2.0
a,1,4,0.0,1.0
a,1,5,3.0,5.0
"""


@pytest.fixture
def buildings_csv(tmp_path):
    return serialize_dataset(load_fixture("table2"), tmp_path / "table2.csv")


def test_reproduce_registration_json(capsys):
    assert main(["reproduce", "ex2.1", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    rows = payload["sections"][0]["rows"]
    assert rows[0][1:4] == pytest.approx([1.0683, -1.0862, 1.0180], abs=1e-4)
    assert rows[1][4:] == pytest.approx([0.7074, -0.0060, 0.7067], abs=5e-4)


def test_reproduce_mean_json(capsys):
    assert main(["reproduce", "ex4.1", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["sections"][0]["rows"][0] == pytest.approx([0.7062, -0.0095, 0.7080], abs=5e-4)


def test_text_report_goes_to_stdout(capsys):
    assert main(["reproduce", "ex2.1"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("projshape reproduce ex2.1")
    assert "tolerances:" in captured.out


def test_register_writes_artifacts(tmp_path, capsys):
    source = serialize_dataset(load_fixture("table1"), tmp_path / "table1.csv")
    out = tmp_path / "out"
    assert main(["register", "--input", str(source), "--out", str(out)]) == 0
    assert (out / "registered.csv").exists()
    assert (out / "report.txt").exists()
    assert "artifact:" in capsys.readouterr().out


def test_two_sample_command(buildings_csv, capsys):
    assert main(["test2", "--input", str(buildings_csv), "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    tangent = payload["sections"][0]["tests"][0]
    assert tangent["df"] == [2.0, 6.0]
    assert tangent["statistic"] == pytest.approx(2.6075, abs=5e-3)


def test_one_sample_command(buildings_csv, capsys):
    argv = ["test1", "--input", str(buildings_csv), "--groups", "education", "--mu0", "0.8,0.57,0.19", "--json"]
    assert main(argv) == 0
    tests = json.loads(capsys.readouterr().out)["sections"][0]["tests"]
    assert [t["test"] for t in tests][:2] == ["one-sample extrinsic T2", "one-sample tangent Hotelling"]


def test_calibrate_command(capsys):
    assert main(["calibrate", "--scenario", "tangent", "--n", "20", "--reps", "20", "--seed", "3"]) == 0
    assert "calibration: tangent" in capsys.readouterr().out


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["mean", "--input", str(tmp_path / "absent.csv")]) == 3
    assert "error:" in capsys.readouterr().err


def test_degenerate_frame_exit_code(tmp_path):
    path = tmp_path / "collinear.csv"
    path.write_text(COLLINEAR_FRAME_CSV)
    assert main(["register", "--input", str(path)]) == 10


def test_invalid_alpha_exit_code():
    assert main(["reproduce", "ex2.1", "--alpha", "1.5"]) == 2


def test_bad_dataset_exit_code(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("group,view,landmark,x1\na,1,1,\n")
    assert main(["mean", "--input", str(path)]) == 20


def test_reproduce_is_deterministic(capsys):
    # Thread count must not change a seeded result
    assert main(["reproduce", "ex5.3", "--B", "50", "--seed", "11", "--workers", "1"]) == 0
    first = capsys.readouterr().out
    assert main(["reproduce", "ex5.3", "--B", "50", "--seed", "11", "--workers", "2"]) == 0
    assert capsys.readouterr().out == first


def test_reproduce_writes_cloud(tmp_path):
    out = tmp_path / "ex52"
    assert main(["reproduce", "ex5.2", "--B", "30", "--out", str(out)]) == 0
    assert (out / "ex5.2_cloud.svg").exists()
    assert (out / "ex5.2_cloud.csv").exists()


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["plot"])


def test_config_from_args():
    args = build_parser().parse_args(["test2", "--input", "data.csv", "--frame", "0,1,2,3", "--groups", "a,b"])
    config = config_from_args(args)
    assert config.frame == [0, 1, 2, 3]
    assert config.groups == ["a", "b"]
    assert config.B is None


def test_documented_exit_codes():
    codes = documented_exit_codes()
    assert codes["ValueError"] == 2
    assert codes["OSError"] == 3
    assert codes["DegenerateFrame"] == 10
    assert codes["BootstrapUnstable"] == 17
