import json
import math

import numpy as np
import pytest

from opkern.cli import main
from opkern.families import SampleSet
from opkern.paley_wiener import BandlimitedSignal, pw_window


@pytest.fixture()
def signal_file(tmp_path):
    gen = np.random.default_rng(1)
    coeffs = (gen.standard_normal(9) + 1j * gen.standard_normal(9)) / math.sqrt(2)
    sig = BandlimitedSignal.symmetric(coeffs, pw_window(8))
    path = tmp_path / "sig.json"
    path.write_text(json.dumps(sig.to_json()))
    return path


def test_gram_fourier_identity_csv(tmp_path):
    out = tmp_path / "gram"
    assert main(["gram", "--family", "fourier", "--indices=-2..2", "--out", str(out)]) == 0
    lines = (tmp_path / "gram.csv").read_text().strip().splitlines()
    assert lines[0] == "index,-2,-1,0,1,2"
    row0 = lines[1].split(",")
    assert complex(row0[1]) == pytest.approx(1.0, abs=1e-8)
    assert abs(complex(row0[2])) < 1e-8
    manifest = json.loads((tmp_path / "gram.manifest.json").read_text())
    assert manifest["command"] == "gram"
    assert "version" in manifest


def test_psd_report(tmp_path):
    out = tmp_path / "psd"
    assert main(["psd", "--family", "average", "--indices=-4..4", "--delta", "0.2", "--out", str(out)]) == 0
    rep = json.loads((tmp_path / "psd.json").read_text())
    assert rep["pass"]
    assert rep["min_eig"] >= -1e-8 * max(rep["max_eig"], 1.0)


def test_kadec_json(tmp_path):
    out = tmp_path / "kadec"
    assert main(["kadec", "--delta", "0.1", "--out", str(out)]) == 0
    rep = json.loads((tmp_path / "kadec.json").read_text())
    assert rep["A"] == pytest.approx(2.5900216461986734, abs=1e-12)
    assert rep["pass"]


def test_reconstruct_pw_and_rerun_is_byte_identical(signal_file, tmp_path):
    out = tmp_path / "rec"
    argv = [
        "reconstruct", "--space", "pw", "--signal", str(signal_file),
        "--m", "8", "--delta", "0.2", "--out", str(out),
    ]
    assert main(argv) == 0
    rep = json.loads((tmp_path / "rec.json").read_text())
    assert rep["rel_l2_interior"] < 1e-2
    first_csv = (tmp_path / "rec.csv").read_bytes()
    first_fn = (tmp_path / "rec.function.json").read_text()
    assert main(argv) == 0
    assert (tmp_path / "rec.csv").read_bytes() == first_csv
    # the function artifact reloads through the shared format
    from opkern.core import GridFunction

    back = GridFunction.from_json(json.loads(first_fn))
    assert back.grid.n > 0


def test_reconstruct_fourier_exact(signal_file, tmp_path):
    out = tmp_path / "recf"
    argv = [
        "reconstruct", "--space", "fourier", "--signal", str(signal_file),
        "--m", "6", "--grid-n", "257", "--out", str(out),
    ]
    assert main(argv) == 0
    rep = json.loads((tmp_path / "recf.json").read_text())
    assert rep["rel_l2_interior"] < 1e-10


def test_avg_sample_roundtrip(signal_file, tmp_path):
    out = tmp_path / "samples"
    assert main([
        "avg-sample", "--signal", str(signal_file), "--x=-4..4",
        "--delta", "0.2", "--m", "8", "--out", str(out),
    ]) == 0
    ss = SampleSet.from_json(json.loads((tmp_path / "samples.json").read_text()))
    assert len(ss) == 9


def test_regnet_from_problem_file(signal_file, tmp_path):
    problem = {
        "family": {"family": "average", "params": {"delta": 0.2, "profile": "box"}},
        "indices": [-2, -1, 0, 1, 2],
        "lambda": 0.1,
        "signal": json.loads(signal_file.read_text()),
        "noise": {"sigma": 0.01, "seed": 3},
    }
    ppath = tmp_path / "prob.json"
    ppath.write_text(json.dumps(problem))
    out = tmp_path / "regnet"
    assert main(["regnet", "--problem", str(ppath), "--m", "8", "--out", str(out)]) == 0
    rep = json.loads((tmp_path / "regnet.json").read_text())
    assert len(rep["eta"]) == 5
    assert rep["residual"] < 1e-8


def test_si_diagnose(tmp_path):
    out = tmp_path / "si"
    assert main(["si-diagnose", "--generator", "hat", "--out", str(out)]) == 0
    rep = json.loads((tmp_path / "si.json").read_text())
    assert rep["biorthogonality_residual"] < 1e-6
    assert rep["coefficient_identity_deviation"] < 1e-5
    assert rep["density_rank"] == rep["density_family_size"]


def test_stability_report(tmp_path):
    out = tmp_path / "stab"
    assert main([
        "stability", "--m", "8", "--sizes", "4,8", "--trials", "25",
        "--lambda", "0.1", "--out", str(out),
    ]) == 0
    rep = json.loads((tmp_path / "stab.json").read_text())
    assert rep["truncated"]["pass"]
    assert rep["tikhonov"]["pass"]
    table = (tmp_path / "stab.csv").read_text().strip().splitlines()
    assert table[0] == "size,truncated_ratio,damped_ratio"
    assert len(table) == 3


def test_vector_sampling_report(tmp_path):
    out = tmp_path / "vs"
    assert main(["vector-sampling", "--n", "2", "--m-range", "8", "--out", str(out)]) == 0
    rep = json.loads((tmp_path / "vs.json").read_text())
    assert rep["cross_block_max"] < 1e-8
    assert len(rep["x"]) == 2 * 17


def test_window_flag_controls_evaluation_width(signal_file, tmp_path):
    out = tmp_path / "recw"
    assert main([
        "reconstruct", "--space", "pw", "--signal", str(signal_file),
        "--m", "8", "--delta", "0.2", "--window", "20", "--out", str(out),
    ]) == 0
    fn = json.loads((tmp_path / "recw.function.json").read_text())
    assert fn["a"] == -20.0 and fn["b"] == 20.0


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"delta": 0.05}))
    out = tmp_path / "kadec"
    assert main(["kadec", "--delta", "0.2", "--config", str(cfg), "--out", str(out)]) == 0
    manifest = json.loads((tmp_path / "kadec.manifest.json").read_text())
    assert manifest["config"]["delta"] == 0.05


def test_validation_error_exit_code(tmp_path, capsys):
    # admissibility violation: delta beyond the quarter-shift threshold
    code = main(["kadec", "--delta", "0.3", "--out", str(tmp_path / "bad")])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "AdmissibilityError"


def test_missing_signal_exit_code(tmp_path):
    code = main([
        "reconstruct", "--space", "pw", "--signal", str(tmp_path / "nope.json"),
        "--out", str(tmp_path / "x"),
    ])
    assert code == 2


def test_conditioning_error_exit_code(signal_file, tmp_path, capsys):
    problem = {
        "family": {"family": "average", "params": {"delta": 0.2}},
        "indices": [0, 1],
        "lambda": 0.0,  # refused: damping must be positive
        "signal": json.loads(signal_file.read_text()),
    }
    ppath = tmp_path / "prob.json"
    ppath.write_text(json.dumps(problem))
    code = main(["regnet", "--problem", str(ppath), "--m", "8", "--out", str(tmp_path / "x")])
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConditioningError"
