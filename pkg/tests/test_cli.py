import json
import random
from pathlib import Path

import numpy as np
import pytest

from memfir import fixtures
from memfir.cli import RandomnessUsed, main, no_rng
from memfir.filter_design import load_coefficients
from memfir.signal_io import read_signal

LOWPASS = fixtures.data_path("lowpass_17tap.txt")
HIGHPASS = fixtures.data_path("highpass_12tap.txt")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_design_lowpass(tmp_path, capsys):
    code, out, _ = run(capsys, "design", "--family", "lowpass", "--fs", "400e3", "--fc", "20e3",
                       "--order", "16", "--out-dir", tmp_path)
    assert code == 0
    coeffs = load_coefficients(tmp_path / "coefficients.txt")
    assert len(coeffs) == 17
    assert "symmetry: symmetric" in out
    assert "DC gain |H(0)|: 1.0" in out


def test_design_usage_errors(tmp_path, capsys):
    code, _, err = run(capsys, "design", "--family", "lowpass", "--fs", "400e3", "--fc", "20e3",
                       "--order", "0", "--out-dir", tmp_path)
    assert code == 2 and "order" in err
    code, _, err = run(capsys, "design", "--family", "highpass", "--fs", "500e3", "--fc", "10e3",
                       "--order", "11", "--out-dir", tmp_path)
    assert code == 2 and "--coeff-file" in err
    code, _, err = run(capsys, "design", "--fs", "1")
    assert code == 2 and "missing" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--method", "magic"])
    assert exc.value.code == 2


def test_synth_both_methods(tmp_path, capsys):
    code, out, _ = run(capsys, "synth", "--coeff-file", LOWPASS, "--bits", "7", "--method", "both",
                       "--out-dir", tmp_path)
    assert code == 0
    report = json.loads((tmp_path / "error_report.json").read_text())
    by_method = {s["method"]: s for s in report["summary"]}
    assert by_method["advanced"]["max_error_pct"] < 1.0
    assert by_method["simple"]["max_error_pct"] > by_method["advanced"]["max_error_pct"]
    assert (tmp_path / "synth_simple_7bit.csv").exists()
    assert (tmp_path / "error_report.csv").read_text().startswith("tap,method,bits")


def test_synth_multiple_bits(tmp_path, capsys):
    code, _, _ = run(capsys, "synth", "--coeff-file", HIGHPASS, "--bits", "6,7,8", "--out-dir", tmp_path)
    assert code == 0
    for bits in (6, 7, 8):
        doc = json.loads((tmp_path / f"synth_advanced_{bits}bit.json").read_text())
        errs = [t["error_pct"] for t in doc["taps"]]
        assert max(errs) < 1.0


def test_synth_bad_bits(tmp_path, capsys):
    code, _, err = run(capsys, "synth", "--coeff-file", LOWPASS, "--bits", "0", "--out-dir", tmp_path)
    assert code == 2 and "bits" in err


def test_synth_infeasible(tmp_path, capsys):
    f = tmp_path / "big.txt"
    f.write_text("5000\n1\n")
    code, _, err = run(capsys, "synth", "--coeff-file", f, "--method", "simple", "--out-dir", tmp_path)
    assert code == 3 and "infeasible" in err


def test_synth_parse_error(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("0.1\nabc\n")
    code, _, err = run(capsys, "synth", "--coeff-file", f, "--out-dir", tmp_path)
    assert code == 2 and "line 2" in err


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bits": "5", "method": "simple", "out_dir": str(tmp_path / "a")}))
    code, _, _ = run(capsys, "synth", "--config", cfg, "--coeff-file", LOWPASS, "--bits", "6")
    assert code == 0
    assert (tmp_path / "a" / "synth_simple_6bit.json").exists()
    assert not (tmp_path / "a" / "synth_simple_5bit.json").exists()


def test_synth_deterministic_serial_parallel(tmp_path, capsys):
    for jobs, d in ((1, "s"), (2, "p")):
        assert run(capsys, "synth", "--coeff-file", HIGHPASS, "--jobs", jobs, "--out-dir", tmp_path / d)[0] == 0
    a = (tmp_path / "s" / "synth_advanced_7bit.json").read_bytes()
    b = (tmp_path / "p" / "synth_advanced_7bit.json").read_bytes()
    assert a == b


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    for name, path in (("lp", LOWPASS), ("hp", HIGHPASS)):
        assert main(["synth", "--coeff-file", path, "--method", "both", "--out-dir", str(d / name)]) == 0
    return d


def test_simulate_lowpass(synth_dir, tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", "--synthesis", synth_dir / "lp" / "synth_advanced_7bit.json",
                     "--tones", "tones_5k_60k", "--fs", "400e3", "--scale-a", "auto", "--out-dir", tmp_path)
    assert code == 0
    m = json.loads((tmp_path / "measurements.json").read_text())
    assert m["scaling_gain_a"] == 0.125
    c5, c60 = m["components"]
    assert c5["measured_gain"] == pytest.approx(c5["expected_gain"], rel=1e-6)
    assert c60["measured_gain"] == pytest.approx(c60["expected_gain"], rel=1e-4)
    assert c60["output_amplitude_v"] < 0.05 * c5["output_amplitude_v"]
    assert m["drift"]["max_relative_drift"] == 0.0
    y = read_signal(tmp_path / "output.csv")
    assert y.f_sample == 400e3 and len(y) == 800


def test_simulate_highpass(synth_dir, tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", "--synthesis", synth_dir / "hp" / "synth_advanced_7bit.json",
                     "--tones", "tones_2k_90k", "--fs", "500e3", "--scale-a", "auto", "--out-dir", tmp_path)
    assert code == 0
    c2, c90 = json.loads((tmp_path / "measurements.json").read_text())["components"]
    assert c2["measured_gain"] < 0.05
    assert c90["measured_gain"] > 0.9


def test_simulate_dead_zone(synth_dir, tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--synthesis", synth_dir / "lp" / "synth_advanced_7bit.json",
                       "--tones", "tones_5k_60k", "--fs", "400e3", "--scale-a", "1", "--out-dir", tmp_path)
    assert code == 4 and "dead-zone" in err


def test_simulate_zero_tones(synth_dir, tmp_path, capsys):
    tones = tmp_path / "zero.json"
    tones.write_text(json.dumps({"components": [{"amp_v": 0.0, "freq_hz": 5e3, "phase_rad": 0.0}]}))
    code, _, _ = run(capsys, "simulate", "--synthesis", synth_dir / "lp" / "synth_advanced_7bit.json",
                     "--tones", tones, "--fs", "400e3", "--device-threshold", "0", "--out-dir", tmp_path)
    assert code == 0
    assert not read_signal(tmp_path / "output.csv").samples.any()
    assert json.loads((tmp_path / "measurements.json").read_text())["drift"]["max_relative_drift"] == 0.0


def test_response_targets_only(tmp_path, capsys):
    code, _, _ = run(capsys, "response", "--coeff-file", LOWPASS, "--fs", "400e3", "--out-dir", tmp_path)
    assert code == 0
    row = (tmp_path / "response_ideal.csv").read_text().splitlines()[1].split(",")
    assert float(row[0]) == 0.0 and float(row[1]) == pytest.approx(1.0, abs=1e-7)
    assert not (tmp_path / "deviation.json").exists()


def test_response_with_both_methods(synth_dir, tmp_path, capsys):
    code, _, _ = run(capsys, "response", "--coeff-file", LOWPASS, "--fs", "400e3", "--passband", "0,20e3",
                     "--synthesis", synth_dir / "lp" / "synth_simple_7bit.json",
                     synth_dir / "lp" / "synth_advanced_7bit.json", "--out-dir", tmp_path)
    assert code == 0
    dev = json.loads((tmp_path / "deviation.json").read_text())["deviation"]
    adv = dev["synth_advanced_7bit"]["passband_max_abs_db"]
    assert adv <= dev["synth_simple_7bit"]["passband_max_abs_db"]
    assert adv < 0.1
    assert (tmp_path / "response_synth_advanced_7bit.csv").exists()


def test_seedless_pipeline(tmp_path, capsys):
    code, _, _ = run(capsys, "synth", "--coeff-file", LOWPASS, "--seedless", "--out-dir", tmp_path)
    assert code == 0


def test_no_rng_guard():
    with no_rng():
        with pytest.raises(RandomnessUsed):
            random.random()
        with pytest.raises(RandomnessUsed):
            np.random.default_rng(0)
    random.random()


def test_outputs_are_reproducible(tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "synth", "--coeff-file", LOWPASS, "--method", "both", "--out-dir", tmp_path / d)
    for name in ("synth_simple_7bit.json", "error_report.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
