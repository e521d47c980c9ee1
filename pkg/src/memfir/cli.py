"""Command-line entry point: ``memfir {design,synth,simulate,response}``.

Options come from built-in defaults, then an optional ``--config`` JSON
file (keys are option names with underscores), then the command line.
Exit codes: 0 success, 2 usage or input error, 3 infeasible synthesis,
4 dead-zone violation.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import random
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .analysis import (
    error_report,
    frequency_response,
    response_at,
    response_deviation,
    tone_amplitude,
)
from .device import MemristanceGrid, MemristorState
from .exceptions import DeadZoneViolation, InfeasibleError, MemfirError
from .filter_design import FilterSpec, design_windowed, load_coefficients, save_coefficients
from .signal_io import write_signal
from .simulation import (
    CircuitConfig,
    ToneSpec,
    common_window,
    drift_check,
    evaluate_circuit,
    generate_tones,
    max_scaling_gain,
    sample_hold,
)
from .synthesis import NORMS, SearchConfig, SynthesisResult, synthesize_advanced, synthesize_simple

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_DEAD_ZONE = 0, 2, 3, 4
SPACING_NAMES = {"linres": "linear_resistance", "lincond": "linear_conductance"}

DEFAULTS = {
    "out_dir": ".",
    "bits": "7",
    "grid_min_ohms": 1e3,
    "grid_max_ohms": 1e6,
    "grid_spacing": "linres",
    "method": "advanced",
    "rf_ohms": None,
    "scale_a": "0.1",
    "seedless": False,
    "jobs": 1,
    # design
    "window": "hamming",
    "attenuation_db": 50.0,
    "output": None,
    # synth
    "rf_step": 1e3,
    "rf_on_grid": False,
    "objective": "sum_rel",
    # simulate
    "duration": 2e-3,
    "oversample": 10,
    "settle": None,
    "device_threshold": 0.1,
    "tones": None,
    # response
    "n_points": 1024,
    "passband": None,
    "synthesis": None,
    "coeff_file": None,
}


class UsageError(Exception):
    pass


def _global_options():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--out-dir", help="directory for output files")
    p.add_argument("--bits", help="resolution(s), comma separated, e.g. 6,7,8")
    p.add_argument("--grid-min-ohms", type=float)
    p.add_argument("--grid-max-ohms", type=float)
    p.add_argument("--grid-spacing", choices=sorted(SPACING_NAMES))
    p.add_argument("--method", choices=["simple", "advanced", "both"])
    p.add_argument("--rf-ohms", type=float, help="fix the feedback resistor")
    p.add_argument("--scale-a", help="input buffer gain, or 'auto'")
    p.add_argument("--jobs", type=int, help="parallel workers for the r_f sweep")
    p.add_argument(
        "--seedless",
        action="store_true",
        help="fail if any random number generator is touched",
    )
    return p


def build_parser():
    common = _global_options()
    parser = argparse.ArgumentParser(prog="memfir", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", parents=[common], argument_default=argparse.SUPPRESS,
                       help="design windowed-sinc target coefficients")
    d.add_argument("--family", choices=["lowpass", "highpass"])
    d.add_argument("--fs", type=float, help="sampling frequency in Hz")
    d.add_argument("--fc", type=float, help="cutoff frequency in Hz")
    d.add_argument("--order", type=int)
    d.add_argument("--window", choices=["rectangular", "hamming", "hann", "blackman", "chebyshev"])
    d.add_argument("--attenuation-db", type=float, help="sidelobe level for the chebyshev window")
    d.add_argument("--output", help="coefficient file (default OUT_DIR/coefficients.txt)")

    s = sub.add_parser("synth", parents=[common], argument_default=argparse.SUPPRESS,
                       help="map coefficients onto memristor pairs")
    s.add_argument("--coeff-file", help="target coefficient file")
    s.add_argument("--rf-step", type=float, help="r_f sweep step in ohms")
    s.add_argument("--rf-on-grid", action="store_true", help="restrict r_f to grid levels")
    s.add_argument("--objective", choices=list(NORMS))

    m = sub.add_parser("simulate", parents=[common], argument_default=argparse.SUPPRESS,
                       help="run test tones through the behavioral circuit")
    m.add_argument("--synthesis", help="synthesis result JSON")
    m.add_argument("--tones", help=f"tone spec JSON, or one of {sorted(fixtures.TONE_SPECS)}")
    m.add_argument("--fs", type=float, help="filter sampling frequency in Hz")
    m.add_argument("--duration", type=float, help="seconds of signal")
    m.add_argument("--oversample", type=int, help="dense-rate multiple of f_s before sampling")
    m.add_argument("--settle", type=int, help="samples skipped before measuring")
    m.add_argument("--device-threshold", type=float, help="memristor dead-zone in volts for drift check")

    r = sub.add_parser("response", parents=[common], argument_default=argparse.SUPPRESS,
                       help="ideal and realized frequency responses")
    r.add_argument("--coeff-file", help="target coefficient file")
    r.add_argument("--synthesis", nargs="+", help="synthesis result JSON file(s)")
    r.add_argument("--fs", type=float, help="sampling frequency in Hz")
    r.add_argument("--n-points", type=int)
    r.add_argument("--passband", help="passband edges in Hz, 'lo,hi'")
    return parser


def _merge(ns):
    opts = dict(DEFAULTS)
    given = vars(ns)
    if "config" in given:
        try:
            cfg = json.loads(Path(given["config"]).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {given['config']}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        opts.update({k.replace("-", "_"): v for k, v in cfg.items()})
    opts.update(given)
    return opts


def _parse_bits(value):
    if isinstance(value, int):
        items = [value]
    elif isinstance(value, list):
        items = value
    else:
        items = [v for v in str(value).split(",") if v.strip()]
    try:
        bits = [int(v) for v in items]
    except (TypeError, ValueError):
        raise UsageError(f"--bits must be integers, got {value!r}") from None
    if not bits or any(not 1 <= b <= 16 for b in bits):
        raise UsageError(f"--bits values must lie in [1, 16], got {value!r}")
    return bits


def _require(opts, *names):
    missing = [n for n in names if opts.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _grid(opts, bits):
    spacing = opts["grid_spacing"]
    if spacing not in SPACING_NAMES:
        raise UsageError(f"--grid-spacing must be one of {sorted(SPACING_NAMES)}")
    return MemristanceGrid(float(opts["grid_min_ohms"]), float(opts["grid_max_ohms"]), bits, SPACING_NAMES[spacing])


def _out_dir(opts):
    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_design(opts):
    _require(opts, "family", "fs", "fc", "order")
    try:
        spec = FilterSpec(
            opts["family"], float(opts["fs"]), float(opts["fc"]), int(opts["order"]),
            window=opts["window"], attenuation_db=float(opts["attenuation_db"]),
        )
        coeffs = design_windowed(spec)
    except MemfirError as exc:
        msg = str(exc)
        if opts["family"] == "highpass" and int(opts["order"]) % 2:
            msg += " (e.g. memfir synth --coeff-file FILE)"
        raise UsageError(msg) from None
    out = Path(opts["output"]) if opts["output"] else _out_dir(opts) / "coefficients.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    header = (
        f"{spec.family} f_s={spec.f_s!r} f_c={spec.f_c!r} order={spec.order} window={spec.window}"
    )
    save_coefficients(out, coeffs, header=header)
    b = coeffs.as_array()
    dc = sum(b.tolist())
    nyq = sum(((-1) ** i) * v for i, v in enumerate(b.tolist()))
    print(f"wrote {len(b)} coefficients to {out}")
    print(f"symmetry: {coeffs.symmetry.value}")
    print(f"DC gain |H(0)|: {abs(dc)!r}")
    print(f"Nyquist gain |H(f_s/2)|: {abs(nyq)!r}")
    return EXIT_OK


def _load_targets(path):
    try:
        return load_coefficients(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def cmd_synth(opts):
    _require(opts, "coeff_file")
    targets = _load_targets(opts["coeff_file"])
    bits_list = _parse_bits(opts["bits"])
    methods = ["simple", "advanced"] if opts["method"] == "both" else [opts["method"]]
    if opts["objective"] not in NORMS:
        raise UsageError(f"--objective must be one of {NORMS}")
    out = _out_dir(opts)
    rf = opts["rf_ohms"]
    results, status = [], EXIT_OK
    for bits in bits_list:
        grid = _grid(opts, bits)
        for method in methods:
            try:
                if method == "simple":
                    res = synthesize_simple(targets, grid, rf, rf_step=float(opts["rf_step"]), norm=opts["objective"])
                else:
                    config = SearchConfig(
                        grid,
                        r_f_candidates=None if rf is None else (float(rf),),
                        objective_norm=opts["objective"],
                        rf_step=float(opts["rf_step"]),
                        rf_on_grid=bool(opts["rf_on_grid"]),
                        n_jobs=int(opts["jobs"]),
                    )
                    res = synthesize_advanced(targets, config)
            except InfeasibleError as exc:
                print(f"{method} {bits}-bit: infeasible: {exc}", file=sys.stderr)
                status = EXIT_INFEASIBLE
                continue
            stem = out / f"synth_{method}_{bits}bit"
            stem.with_suffix(".json").write_text(res.to_json() + "\n", encoding="utf-8")
            stem.with_suffix(".csv").write_text(res.to_csv(), encoding="utf-8")
            results.append(res)
            print(
                f"{method} {bits}-bit: r_f={res.r_f:g} ohm, max error {res.max_error_pct:.6g} %, "
                f"objective {res.objective:.6g} -> {stem.with_suffix('.json')}"
            )
    if results:
        report = error_report(results)
        (out / "error_report.csv").write_text(report.to_csv(), encoding="utf-8")
        (out / "error_report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    return status


def _load_tones(name):
    if name in fixtures.TONE_SPECS:
        return fixtures.tone_spec(name)
    try:
        return ToneSpec.from_json(Path(name).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read tone spec {name}: {exc}") from None


def _load_result(path):
    try:
        return SynthesisResult.from_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read synthesis result {path}: {exc}") from None


def cmd_simulate(opts):
    _require(opts, "synthesis", "tones", "fs")
    result = _load_result(opts["synthesis"])
    tones = _load_tones(opts["tones"])
    f_s = float(opts["fs"])
    oversample = int(opts["oversample"])
    if oversample < 1:
        raise UsageError("--oversample must be >= 1")
    dense = generate_tones(tones, f_s * oversample, float(opts["duration"]))
    x = sample_hold(dense, f_s)
    scale = str(opts["scale_a"])
    # auto uses the tone-sum bound, which is never below the sampled peak
    a = max_scaling_gain(max(tones.peak_bound(), x.peak())) if scale == "auto" else float(scale)
    cfg = CircuitConfig(scaling_gain_a=a)
    y = evaluate_circuit(result, x, cfg)
    device = MemristorState(
        r_on=result.grid.r_min, r_off=result.grid.r_max, v_threshold=float(opts["device_threshold"])
    )
    drift = drift_check(result, x, cfg, device)

    settle = result.n_taps - 1 if opts["settle"] is None else int(opts["settle"])
    freqs = tones.frequencies
    window = common_window(freqs, f_s, len(x) - settle)
    gains = np.abs(response_at(result.realized, freqs, f_s)) if freqs else []
    components = []
    for (amp, f, _), h in zip(tones.components, gains):
        a_in = tone_amplitude(x, f, settle, n_window=window)
        a_out = tone_amplitude(y, f, settle, n_window=window)
        components.append(
            {
                "freq_hz": f,
                "input_amplitude_v": a_in,
                "output_amplitude_v": a_out,
                "measured_gain": a_out / a_in if a_in > 0 else None,
                "expected_gain": float(h),
            }
        )
    out = _out_dir(opts)
    write_signal(out / "input.csv", x)
    write_signal(out / "output.csv", y)
    report = {
        "f_s_hz": f_s,
        "scaling_gain_a": a,
        "compensated": cfg.compensate_output,
        "settle_samples": settle,
        "window_samples": window,
        "initial_conditions": "zero",
        "components": components,
        "drift": drift.to_dict(),
    }
    (out / "measurements.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    for c in components:
        print(
            f"{c['freq_hz']:g} Hz: in {c['input_amplitude_v']:.6g} V, out {c['output_amplitude_v']:.6g} V, "
            f"|H| {c['expected_gain']:.6g}"
        )
    print(f"max memristance drift: {drift.max_relative_drift:g}")
    return EXIT_OK


def _passband(value):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        lo, hi = value
    else:
        try:
            lo, hi = (float(v) for v in str(value).split(","))
        except ValueError:
            raise UsageError(f"--passband must be 'lo,hi', got {value!r}") from None
    return float(lo), float(hi)


def cmd_response(opts):
    _require(opts, "fs")
    if opts["coeff_file"] is None and not opts["synthesis"]:
        raise UsageError("give --coeff-file and/or --synthesis")
    f_s = float(opts["fs"])
    n_points = int(opts["n_points"])
    passband = _passband(opts["passband"])
    paths = opts["synthesis"] or []
    if isinstance(paths, str):
        paths = [paths]
    results = [(Path(p).stem, _load_result(p)) for p in paths]
    if opts["coeff_file"] is not None:
        targets = _load_targets(opts["coeff_file"]).as_array()
    else:
        targets = np.array(results[0][1].targets)
    out = _out_dir(opts)
    ideal = frequency_response(targets, f_s, n_points)
    (out / "response_ideal.csv").write_text(ideal.to_csv(), encoding="utf-8")
    print(f"ideal: |H(0)| = {float(ideal.magnitude[0])!r}, |H(f_s/2)| = {float(ideal.magnitude[-1])!r}")
    summary = {}
    for label, res in results:
        resp = frequency_response(res.realized, f_s, n_points)
        (out / f"response_{label}.csv").write_text(resp.to_csv(), encoding="utf-8")
        band_db, overall_db = response_deviation(ideal, resp, passband)
        summary[label] = {
            "method": res.method,
            "bits": res.grid.bits,
            "passband_max_abs_db": band_db,
            "overall_max_abs_db": overall_db,
        }
        print(f"{label}: passband deviation {band_db:.6g} dB, overall {overall_db:.6g} dB")
    if results:
        doc = {"f_s_hz": f_s, "n_points": n_points, "passband_hz": passband, "deviation": summary}
        (out / "deviation.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


COMMANDS = {"design": cmd_design, "synth": cmd_synth, "simulate": cmd_simulate, "response": cmd_response}


class RandomnessUsed(RuntimeError):
    pass


@contextlib.contextmanager
def no_rng():
    """Make every common RNG entry point raise while the block runs."""

    def trap(*args, **kwargs):
        raise RandomnessUsed("random number generator used in a seedless run")

    targets = [(random, n) for n in ("random", "seed", "randint", "uniform", "choice", "shuffle", "gauss")]
    targets += [
        (np.random, n)
        for n in ("default_rng", "seed", "rand", "randn", "random", "randint", "choice", "shuffle", "normal", "uniform", "RandomState")
    ]
    saved = [(mod, name, getattr(mod, name)) for mod, name in targets]
    try:
        for mod, name, _ in saved:
            setattr(mod, name, trap)
        yield
    finally:
        for mod, name, fn in saved:
            setattr(mod, name, fn)


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    command = ns.command
    del ns.command
    try:
        opts = _merge(ns)
        guard = no_rng() if opts["seedless"] else contextlib.nullcontext()
        with guard:
            return COMMANDS[command](opts)
    except UsageError as exc:
        print(f"memfir {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DeadZoneViolation as exc:
        print(f"memfir {command}: dead-zone violation: {exc}", file=sys.stderr)
        return EXIT_DEAD_ZONE
    except InfeasibleError as exc:
        print(f"memfir {command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MemfirError, ValueError) as exc:
        print(f"memfir {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
