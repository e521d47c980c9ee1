import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import freqz

from memfir import fixtures
from memfir.analysis import (
    DB_FLOOR,
    error_report,
    frequency_response,
    realized_response,
    response_at,
    response_deviation,
    to_db,
    tone_amplitude,
)
from memfir.device import build_grid
from memfir.exceptions import AnalysisError
from memfir.simulation import Signal, ToneSpec, common_window, evaluate_direct, generate_tones
from memfir.synthesis import SearchConfig, synthesize_advanced, synthesize_simple


@pytest.fixture(scope="module")
def lp_results():
    t = fixtures.lowpass_targets()
    g = build_grid()
    return synthesize_simple(t, g), synthesize_advanced(t, SearchConfig(g))


@pytest.mark.parametrize("which", ["lowpass", "highpass"])
def test_matches_scipy_freqz(which, request):
    b = request.getfixturevalue(which).as_array()
    fr = frequency_response(b, 400e3, 257)
    w, h = freqz(b, worN=np.linspace(0, np.pi, 257))
    np.testing.assert_allclose(fr.magnitude, np.abs(h), atol=1e-13)
    np.testing.assert_allclose(fr.f, w / np.pi * 200e3, rtol=1e-14)
    nz = np.abs(h) > 1e-9
    np.testing.assert_allclose(np.exp(1j * fr.phase[nz]), h[nz] / np.abs(h[nz]), atol=1e-9)


def test_endpoint_examples(lowpass, highpass):
    lp = frequency_response(lowpass, 400e3)
    assert lp.magnitude[0] == pytest.approx(1.0, abs=1e-7)
    hp = frequency_response(highpass, 500e3)
    assert hp.magnitude[0] < 1e-15
    one = frequency_response([1.0], 1e3, 16)
    np.testing.assert_allclose(one.magnitude, 1.0, rtol=1e-15)


@settings(max_examples=100)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=20), st.integers(2, 64))
def test_endpoints_are_exact(b, n_points):
    fr = frequency_response(b, 1e3, n_points)
    dc = 0.0
    ny = 0.0
    for i, v in enumerate(b):
        dc += v
        ny += v if i % 2 == 0 else -v
    assert fr.magnitude[0] == abs(dc)
    assert fr.magnitude[-1] == abs(ny)
    assert fr.f[0] == 0.0 and fr.f[-1] == 500.0
    assert np.all(np.diff(fr.f) > 0)


def test_linear_phase(lowpass):
    f_s = 400e3
    fr = frequency_response(lowpass, f_s, 512)
    m = lowpass.order
    keep = fr.magnitude > 1e-12
    resid = fr.phase[keep] + 2 * np.pi * fr.f[keep] * (m / 2) / f_s
    wrapped = np.mod(resid - resid[0] + np.pi / 2, np.pi) - np.pi / 2
    np.testing.assert_allclose(wrapped, 0.0, atol=1e-9)


def test_db_floor():
    np.testing.assert_array_equal(to_db([0.0, 1.0, 10.0]), [DB_FLOOR, 0.0, 20.0])
    assert to_db(1e-200) == DB_FLOOR


def test_response_csv_header(lowpass):
    text = frequency_response(lowpass, 400e3, 4).to_csv()
    lines = text.splitlines()
    assert lines[0] == "f_hz,magnitude,magnitude_db,phase_rad"
    assert len(lines) == 5
    assert float(lines[1].split(",")[1]) == frequency_response(lowpass, 400e3, 4).magnitude[0]


def test_response_at_matches_grid(highpass):
    fr = frequency_response(highpass, 500e3, 11)
    np.testing.assert_allclose(np.abs(response_at(highpass, fr.f, 500e3)), fr.magnitude, atol=1e-14)


def test_tone_amplitude_pure():
    for f in (1e3, 5e3, 50e3):
        s = generate_tones(ToneSpec(((0.37, f, 0.3),)), 400e3, 2e-3)
        assert tone_amplitude(s, f) == pytest.approx(0.37, abs=1e-9)


def test_tone_amplitude_two_tones():
    s = generate_tones(fixtures.tone_spec("tones_5k_60k"), 400e3, 1e-3)
    assert tone_amplitude(s, 5e3) == pytest.approx(0.4, abs=1e-9)
    assert tone_amplitude(s, 60e3) == pytest.approx(0.4, abs=1e-9)
    assert tone_amplitude(s, 30e3) == pytest.approx(0.0, abs=1e-9)


def test_tone_amplitude_edges():
    assert tone_amplitude(Signal(np.full(10, -0.25), 1.0), 0.0) == 0.25
    alt = Signal(0.3 * (-1.0) ** np.arange(20), 2.0)
    assert tone_amplitude(alt, 1.0) == pytest.approx(0.3)


def test_tone_amplitude_errors():
    s = generate_tones(ToneSpec(((1.0, 5e3, 0.0),)), 400e3, 1e-4)
    with pytest.raises(AnalysisError):
        tone_amplitude(s, 5e3)  # 40 samples, half a cycle
    with pytest.raises(AnalysisError):
        tone_amplitude(Signal(np.zeros(1000), 1.0), np.pi / 10)
    with pytest.raises(AnalysisError):
        tone_amplitude(Signal(np.zeros(100), 400e3), 5e3, n_window=200)
    with pytest.raises(AnalysisError):
        tone_amplitude(Signal(np.zeros(200), 400e3), 5e3, n_window=90)


@settings(max_examples=30)
@given(a=st.floats(-2, 2), c=st.floats(-2, 2))
def test_tone_amplitude_linear(a, c):
    s1 = generate_tones(ToneSpec(((1.0, 5e3, 0.0),)), 400e3, 1e-3)
    s2 = generate_tones(ToneSpec(((0.5, 5e3, 1.0),)), 400e3, 1e-3)
    combo = Signal(a * s1.samples + c * s2.samples, 400e3)
    expected = abs(a * 1.0 + c * 0.5 * np.exp(1j * 1.0))
    assert tone_amplitude(combo, 5e3) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("f", [2e3, 5e3, 20e3, 50e3, 100e3])
def test_filtering_property(f, rng):
    b = rng.uniform(-0.5, 0.5, int(rng.integers(2, 18)))
    A = 0.3
    x = generate_tones(ToneSpec(((A, f, 0.4),)), 400e3, 2e-3)
    y = evaluate_direct(b, x)
    settle = len(b) - 1
    n = common_window([f], 400e3, len(x) - settle)
    got = tone_amplitude(y, f, settle=settle, n_window=n)
    assert got == pytest.approx(abs(response_at(b, f, 400e3)[0]) * A, rel=1e-6)


def test_error_report(lp_results):
    simple, adv = lp_results
    rep = error_report([simple, adv])
    assert len(rep.rows) == 34
    s, a = rep.summary
    assert a["max_error_pct"] < s["max_error_pct"]
    assert s["label"] == "simple-7bit"
    assert rep.to_csv().splitlines()[0] == "tap,method,bits,target,realized,error_pct"
    json.dumps(rep.to_dict())


def test_error_report_zero_error():
    g = build_grid(1e3, 1e6, 1)
    r = synthesize_advanced([0.0, 0.0], SearchConfig(g))
    rep = error_report([r])
    assert all(row["error_pct"] == 0 for row in rep.rows)


def test_error_report_highpass_simple_large(highpass):
    rep = error_report([synthesize_simple(highpass, build_grid())])
    assert rep.summary[0]["max_error_pct"] > 25


def test_error_report_mismatch(lp_results, highpass):
    other = synthesize_simple(highpass, build_grid())
    with pytest.raises(AnalysisError):
        error_report([lp_results[0], other])
    with pytest.raises(AnalysisError):
        error_report([lp_results[0]], labels=["a", "b"])
    with pytest.raises(AnalysisError):
        error_report([])


def test_response_deviation(lowpass, lp_results):
    ideal = frequency_response(lowpass, 400e3)
    assert response_deviation(ideal, ideal) == (0.0, 0.0)
    published = fixtures.published_realized("lowpass")
    adv_pub = frequency_response(published["advanced"]["realized"], 400e3)
    simple_pub = frequency_response(published["simple"]["realized"], 400e3)
    d_adv = response_deviation(ideal, adv_pub, (0, 20e3))[0]
    d_simple = response_deviation(ideal, simple_pub, (0, 20e3))[0]
    assert d_adv < 0.1
    assert d_simple > d_adv
    simple, adv = lp_results
    ours_adv = response_deviation(ideal, realized_response(adv, 400e3), (0, 20e3))[0]
    ours_simple = response_deviation(ideal, realized_response(simple, 400e3), (0, 20e3))[0]
    assert ours_adv < 0.1 < ours_simple


def test_response_deviation_errors(lowpass):
    a = frequency_response(lowpass, 400e3, 64)
    with pytest.raises(AnalysisError):
        response_deviation(a, frequency_response(lowpass, 400e3, 65))
    with pytest.raises(AnalysisError):
        response_deviation(a, a, (1.0, 2.0))
