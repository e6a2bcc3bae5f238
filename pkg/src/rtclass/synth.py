"""Synthetic CSI/UWB passage traces with class-dependent attenuation dips.

A passing object is modeled as a Gaussian attenuation trough of
class-specific depth and width, plus a sinusoidal fading ripple that is
only present while the object is in the link, plus multiplicative noise.
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .ingestion import (
    Dataset,
    DatasetManifest,
    ManifestEntry,
    serialize_trace,
    write_manifest,
)
from .seeding import child_seed
from .trace_model import (
    DEFAULT_CIR_LENGTH,
    DEFAULT_SUBCARRIERS,
    NOMINAL_RATE_HZ,
    Antenna,
    Label,
    LinkMeta,
    RadioTrace,
    Tech,
)

# (depth fraction, FWHM seconds, ripple amplitude)
CLASS_DIP = {
    Label.IDLE: (0.0, 0.8, 0.0),
    Label.BICYCLE: (0.3, 0.8, 0.02),
    Label.CAR_LIKE: (0.7, 1.5, 0.06),
}
CHANNELS = ("amplitude", "rssi", "rxp", "fpp", "cir_power", "cir")


@dataclass(frozen=True)
class ScenarioConfig:
    tech: Tech
    label: Label
    seed: int = 0
    duration_s: float = 4.0
    sample_rate_hz: float | None = None
    depth: float | None = None
    width_s: float | None = None
    center_s: float | None = None      # None -> duration/2 with jitter
    center_jitter_s: float = 0.4
    noise_sigma: float = 0.04          # relative, per sample
    rssi_noise_db: float = 1.0
    ripple_amp: float | None = None
    ripple_hz: float = 3.0
    selectivity: float = 0.3           # depth of the per-subcarrier gain profile
    n_subcarriers: int = DEFAULT_SUBCARRIERS
    cir_length: int = DEFAULT_CIR_LENGTH
    first_path_index: int = 15
    dip_channels: tuple[str, ...] | None = None   # None -> every channel dips
    distance_m: float | None = None

    def __post_init__(self):
        if not 0 <= self.resolved_depth < 1:
            raise ValueError("dip depth must lie in [0, 1)")
        if self.rate <= 0 or self.duration_s <= 0:
            raise ValueError("sample rate and duration must be > 0")
        if self.dip_channels is not None:
            bad = set(self.dip_channels) - set(CHANNELS)
            if bad:
                raise ValueError(f"unknown dip channel(s) {sorted(bad)}")

    @property
    def rate(self) -> float:
        return self.sample_rate_hz or NOMINAL_RATE_HZ[self.tech.value]

    @property
    def resolved_depth(self) -> float:
        return CLASS_DIP[self.label][0] if self.depth is None else self.depth

    @property
    def resolved_width(self) -> float:
        return CLASS_DIP[self.label][1] if self.width_s is None else self.width_s

    @property
    def resolved_ripple(self) -> float:
        return CLASS_DIP[self.label][2] if self.ripple_amp is None else self.ripple_amp

    def dips(self, channel: str) -> bool:
        return self.dip_channels is None or channel in self.dip_channels


def _envelope(cfg: ScenarioConfig, t: np.ndarray, rng: np.random.Generator):
    """Passage envelope in [0, 1] and the ripple term riding on it."""
    if cfg.resolved_depth == 0 and cfg.resolved_ripple == 0:
        return np.zeros_like(t), np.zeros_like(t), None
    center = cfg.center_s
    if center is None:
        center = cfg.duration_s / 2 + rng.uniform(-cfg.center_jitter_s, cfg.center_jitter_s)
    s = cfg.resolved_width / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    env = np.exp(-0.5 * ((t - center) / s) ** 2)
    phase = rng.uniform(0, 2 * math.pi)
    ripple = cfg.resolved_ripple * env * np.sin(2 * math.pi * cfg.ripple_hz * t + phase)
    return env, ripple, center


def _gain_profile(n: int, selectivity: float, phase: float) -> np.ndarray:
    k = np.arange(n)
    return 1.0 + selectivity * np.sin(2 * math.pi * 1.5 * k / n + phase)


def _noise(rng, sigma, shape):
    if sigma == 0:
        return np.ones(shape)
    return 1.0 + sigma * rng.standard_normal(shape)


def _link(cfg: ScenarioConfig) -> LinkMeta:
    distance = cfg.distance_m
    if distance is None:
        distance = 7.0 if cfg.label is Label.CAR_LIKE else 4.0
    antenna = Antenna.DIRECTIONAL if cfg.tech is Tech.WLAN_CSI else Antenna.OMNIDIRECTIONAL
    site = "road" if cfg.label is Label.CAR_LIKE else "cycle_path"
    return LinkMeta(distance, 1.0, antenna, site)


def generate_trace(cfg: ScenarioConfig, trace_id: str | None = None) -> RadioTrace:
    rng = np.random.default_rng(cfg.seed)
    n = int(round(cfg.duration_s * cfg.rate))
    t = np.arange(n) / cfg.rate
    env, ripple, _ = _envelope(cfg, t, rng)
    depth = cfg.resolved_depth

    def atten(channel, scale=1.0):
        if not cfg.dips(channel):
            return np.ones(n)
        return 1.0 - scale * depth * env + ripple

    trace_id = trace_id or f"{cfg.tech.value}-{cfg.label.value}-{cfg.seed}"
    if cfg.tech is Tech.WLAN_CSI:
        a = atten("amplitude")
        vectors = {}
        for j, name in enumerate(("lltf", "ht", "stbc")):
            gain = _gain_profile(cfg.n_subcarriers, cfg.selectivity, 0.7 + 1.1 * j)
            # frequency-selective dip: weak subcarriers are attenuated more
            sc_depth = 1.25 - 0.5 * (gain - gain.min()) / max(np.ptp(gain), 1e-12)
            body = 1.0 - np.outer(1.0 - a, sc_depth)
            amp = 20.0 * gain * body * _noise(rng, cfg.noise_sigma, (n, cfg.n_subcarriers))
            vectors[name] = np.round(np.clip(amp, 0.0, None), 2)
        r = np.clip(atten("rssi"), 1e-3, None)
        rssi = np.round(-45.0 + 20.0 * np.log10(r) + cfg.rssi_noise_db * rng.standard_normal(n))
        rxp = np.clip(atten("rxp"), 0, None) ** 2 * 400.0 * _noise(rng, cfg.noise_sigma, n)
        scalars = {"rssi": rssi, "rxp": np.round(np.clip(rxp, 0.0, None), 3)}
    else:
        fpp = 1.0 * np.clip(atten("fpp"), 0, None) ** 2 * _noise(rng, cfg.noise_sigma, n)
        cir_power = 4.0 * np.clip(atten("cir_power", 0.3), 0, None) ** 2 * _noise(rng, cfg.noise_sigma, n)
        rxp = 4.4 * np.clip(atten("rxp", 0.3), 0, None) ** 2 * _noise(rng, cfg.noise_sigma, n)
        i = np.arange(cfg.cir_length)
        fp = cfg.first_path_index
        profile = np.where(i >= fp, np.exp(-(i - fp) / 4.0), 0.05)
        near = np.abs(i - fp) <= 2
        tap_atten = np.where(near[None, :], atten("cir")[:, None],
                             atten("cir", 0.3)[:, None])
        cir = 1000.0 * profile * tap_atten * _noise(rng, cfg.noise_sigma, (n, cfg.cir_length))
        scalars = {
            "fpp": np.abs(fpp),
            "cir_power": np.clip(np.abs(cir_power), 1e-9, None),
            "rxp": np.abs(rxp),
        }
        vectors = {"cir": np.round(np.abs(cir), 3)}
    return RadioTrace(id=trace_id, tech=cfg.tech, label=cfg.label, link=_link(cfg),
                      t=t, scalars=scalars, vectors=vectors)


def scenario(tech: Tech, label: Label, seed: int, **overrides) -> ScenarioConfig:
    fields = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(overrides) - fields
    if unknown:
        raise ValueError(f"unknown scenario option(s): {sorted(unknown)}")
    return ScenarioConfig(tech=tech, label=label, seed=seed, **overrides)


def generate_dataset(counts: Mapping[Label, int], tech: Tech, seed: int,
                     overrides: Mapping | None = None,
                     out_dir: str | os.PathLike | None = None) -> tuple[Dataset, DatasetManifest]:
    """Generate ``counts[label]`` traces per label; optionally write them to disk.

    Trace ``i`` of a label draws from its own child seed, so adding labels or
    traces never changes existing ones.  With ``out_dir`` the traces are
    written under ``out_dir/traces/`` and the manifest to
    ``out_dir/manifest.csv``.
    """
    overrides = dict(overrides or {})
    for lab, c in counts.items():
        if int(c) < 1:
            raise ValueError(f"count for {Label(lab).value} must be >= 1")
    traces, entries = [], []
    labels = sorted((Label(lab) for lab in counts), key=lambda lab: lab.index)
    for lab in labels:
        for i in range(int(counts[lab])):
            tid = f"{tech.value}-{lab.value}-{i:04d}"
            cfg = scenario(tech, lab, child_seed(seed, "synth", tech.value, lab.value, i), **overrides)
            traces.append(generate_trace(cfg, tid))
            entries.append(ManifestEntry(f"traces/{tid}.jsonl", lab, tech))
    root = Path(out_dir) if out_dir is not None else None
    manifest = DatasetManifest(tuple(entries), int(seed), root)
    if root is not None:
        (root / "traces").mkdir(parents=True, exist_ok=True)
        for tr, e in zip(traces, entries):
            (root / e.path).write_bytes(serialize_trace(tr))
        write_manifest(manifest, root / "manifest.csv")
    return Dataset(tuple(traces), int(seed)), manifest
