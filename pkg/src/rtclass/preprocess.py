"""Smoothing, scaling and channel-parameter derivation.

The cascade applied to every channel series is fixed: Gaussian smoothing,
then per-trace min-max scaling, then feature extraction (see ``features``).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .trace_model import RadioTrace, Tech

FILTER_GRID: dict[str, float] = {f"f{i}": float(i) for i in range(6)}
N_GROUPS = 8
DEFAULT_TRUNCATE = 4.0

_CSI_FIELDS = {"L": "lltf", "H": "ht", "S": "stbc"}
_ALIASES = {"R": "RSSI", "FPP/CIR": "FC", "A": "A_ALL", "CIR": "CIR_POWER", "U_AMP": "A_ALL"}


@dataclass(frozen=True)
class SmoothingConfig:
    sigma: float = 0.0
    truncate: float = DEFAULT_TRUNCATE
    filter_grid: Mapping[str, float] = field(default_factory=lambda: dict(FILTER_GRID))

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        sig = list(self.filter_grid.values())
        if any(b < a for a, b in zip(sig, sig[1:])):
            raise ValueError("filter grid must be monotone in sigma")

    @property
    def truncation_radius(self) -> int:
        return int(math.ceil(self.truncate * self.sigma))


@dataclass(frozen=True, eq=False)
class ChannelSeries:
    name: str
    values: np.ndarray
    trace_id: str


def filter_sigma(filter_name: str) -> float:
    try:
        return FILTER_GRID[filter_name]
    except KeyError:
        raise ValueError(
            f"unknown filter {filter_name!r}; expected one of {', '.join(FILTER_GRID)}"
        ) from None


def gaussian_kernel(sigma: float, truncate: float = DEFAULT_TRUNCATE) -> np.ndarray:
    """Unit-sum sampled Gaussian on ``[-ceil(truncate*sigma), +ceil(truncate*sigma)]``."""
    if sigma <= 0:
        return np.ones(1)
    radius = int(math.ceil(truncate * sigma))
    x = np.arange(-radius, radius + 1, dtype=float)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(series, sigma: float, truncate: float = DEFAULT_TRUNCATE) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("gaussian_smooth needs a non-empty 1-D series")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return x.copy()
    k = gaussian_kernel(sigma, truncate)
    r = k.size // 2
    # 'symmetric' pads d c b a | a b c d, i.e. the edge sample is repeated
    padded = np.pad(x, r, mode="symmetric")
    return np.convolve(padded, k, mode="valid")


def min_max_scale(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("min_max_scale needs a non-empty series")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    y = np.clip((x - lo) / (hi - lo), 0.0, 1.0)
    # only the true maximum maps to 1; near-max values must not round onto it
    return np.where(x == hi, 1.0, np.minimum(y, np.nextafter(1.0, 0.0)))


def preprocess_series(series, filter_name: str = "f0") -> np.ndarray:
    return min_max_scale(gaussian_smooth(series, filter_sigma(filter_name)))


def _group_slices(width: int) -> list[slice]:
    edges = np.linspace(0, width, N_GROUPS + 1).round().astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]


def parameter_names(tech: Tech, width: int, has_rxp: bool = True) -> list[str]:
    """Parameter identifiers ``derive_parameters`` emits for this layout.

    ``width`` is the subcarrier count (CSI) or CIR length (UWB).
    """
    if tech is Tech.WLAN_CSI:
        names = ["RSSI"]
        for short in _CSI_FIELDS:
            names += [f"{short}_AMP_SC{i}" for i in range(width)]
        for short in _CSI_FIELDS:
            names += [f"{short}_AMP_G{j + 1}" for j in range(N_GROUPS)]
        if has_rxp:
            names.append("RXP")
        return names
    names = ["FPP", "CIR_POWER", "FC", "RXP"]
    names += [f"A_{i}" for i in range(width)]
    names.append("A_ALL")
    return names


def canonical_parameter(name: str) -> str:
    key = name.strip().upper()
    return _ALIASES.get(key, key)


_SC_RE = re.compile(r"^([LHS])_AMP_(SC|G)(\d+)$")
_A_RE = re.compile(r"^A_(\d+)$")


class ParameterError(KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


def parameter_series(trace: RadioTrace, name: str) -> np.ndarray:
    """Time series of one named channel parameter of ``trace``."""
    name = canonical_parameter(name)
    missing = ParameterError(
        f"trace {trace.id!r} ({trace.tech.value}) has no parameter {name!r}")
    if trace.tech is Tech.WLAN_CSI:
        if name == "RSSI":
            return np.array(trace.scalars["rssi"], dtype=float)
        if name == "RXP":
            rxp = trace.scalars.get("rxp")
            if rxp is None or np.isnan(rxp).any():
                raise missing
            return np.array(rxp)
        m = _SC_RE.match(name)
        if m is None:
            raise missing
        amp = trace.vector(_CSI_FIELDS[m.group(1)])
        idx = int(m.group(3))
        if m.group(2) == "SC":
            if idx >= amp.shape[1]:
                raise missing
            return np.array(amp[:, idx])
        if not 1 <= idx <= N_GROUPS:
            raise missing
        return amp[:, _group_slices(amp.shape[1])[idx - 1]].mean(axis=1)

    s = trace.scalars
    if name == "FPP":
        return np.array(s["fpp"])
    if name == "CIR_POWER":
        return np.array(s["cir_power"])
    if name == "FC":
        return s["fpp"] / s["cir_power"]
    if name == "RXP":
        return np.array(s["rxp"])
    if name == "A_ALL":
        return trace.vector("cir").mean(axis=1)
    m = _A_RE.match(name)
    if m is not None:
        idx = int(m.group(1))
        cir = trace.vector("cir")
        if idx < cir.shape[1]:
            return np.array(cir[:, idx])
    raise missing


def derive_parameters(trace: RadioTrace) -> list[ChannelSeries]:
    if trace.tech is Tech.WLAN_CSI:
        width = trace.vector("lltf").shape[1]
        rxp = trace.scalars.get("rxp")
        has_rxp = rxp is not None and not np.isnan(rxp).any()
    else:
        width = trace.cir_length
        has_rxp = True
    return [ChannelSeries(n, parameter_series(trace, n), trace.id)
            for n in parameter_names(trace.tech, width, has_rxp)]


@dataclass(frozen=True)
class DetectorConfig:
    window_s: float = 2.0
    mad_factor: float = 3.0
    trigger: str | None = None


def trigger_parameter(trace: RadioTrace, config: DetectorConfig) -> str:
    if config.trigger:
        return config.trigger
    return "RSSI" if trace.tech is Tech.WLAN_CSI else "FC"


def window_scores(x: np.ndarray, n_window: int) -> np.ndarray:
    dev = np.abs(x - np.median(x))
    return np.lib.stride_tricks.sliding_window_view(dev, n_window).sum(axis=1)


def extract_window(trace: RadioTrace, config: DetectorConfig = DetectorConfig()) -> RadioTrace:
    """Cut the ``window_s`` section with the largest deviation from baseline.

    Deviation is the window sum of ``|x - median(x)|`` of the trigger series.
    Traces whose peak deviation does not exceed ``mad_factor`` times the
    median absolute deviation are treated as idle and cut at the center;
    equal-scoring windows resolve toward the center as well.
    """
    n = len(trace)
    n_window = int(round(config.window_s * trace.sample_rate_hz))
    if n_window < 1:
        raise ValueError("window shorter than one frame")
    if n_window > n:
        duration = float(trace.t[-1] - trace.t[0]) + 1.0 / trace.sample_rate_hz
        raise ValueError(
            f"trace {trace.id!r} ({duration:.3g} s) is shorter than the "
            f"{config.window_s:g} s window")
    x = parameter_series(trace, trigger_parameter(trace, config))
    center = (n - n_window) // 2
    dev = np.abs(x - np.median(x))
    if dev.max() <= config.mad_factor * np.median(dev):
        start = center
    else:
        scores = window_scores(x, n_window)
        best = np.flatnonzero(scores == scores.max())
        start = int(best[np.argmin(np.abs(best - center))])
    return trace.slice(start, start + n_window)
