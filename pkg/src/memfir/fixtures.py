"""Bundled reference data: the two published coefficient tables and test tones."""

import json
from importlib import resources

from .filter_design import CoefficientSet, load_coefficients
from .simulation import ToneSpec

# (f_s, f_c, order) of the bundled designs
LOWPASS_PARAMS = {"family": "lowpass", "f_s": 400e3, "f_c": 20e3, "order": 16}
HIGHPASS_PARAMS = {"family": "highpass", "f_s": 500e3, "f_c": 10e3, "order": 11}

TONE_SPECS = {
    "tone_2k": "tone_2k.json",
    "tones_5k_60k": "tones_5k_60k.json",
    "tones_2k_90k": "tones_2k_90k.json",
}


def _data(name):
    return resources.files("memfir").joinpath("data", name)


def lowpass_targets() -> CoefficientSet:
    """17-tap low-pass targets (f_s = 400 kHz, f_c = 20 kHz)."""
    with _data("lowpass_17tap.txt").open("r", encoding="utf-8") as fh:
        return load_coefficients(fh)


def highpass_targets() -> CoefficientSet:
    """12-tap antisymmetric high-pass targets (f_s = 500 kHz, f_c = 10 kHz)."""
    with _data("highpass_12tap.txt").open("r", encoding="utf-8") as fh:
        return load_coefficients(fh)


def published_realized(which):
    """Published realized coefficients, keyed by method, for ``lowpass``/``highpass``."""
    name = {"lowpass": "lowpass_published_realized.json", "highpass": "highpass_published_realized.json"}[which]
    return json.loads(_data(name).read_text(encoding="utf-8"))


def tone_spec(name) -> ToneSpec:
    return ToneSpec.from_json(_data(TONE_SPECS[name]).read_text(encoding="utf-8"))


def data_path(name):
    """Filesystem path of a bundled data file (for CLI examples)."""
    return str(_data(name))
