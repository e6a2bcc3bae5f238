"""In-memory model of recorded radio fingerprints.

A trace is stored column-wise (one array per channel quantity) because the
pipeline always consumes whole time series; per-frame records are available
through :attr:`RadioTrace.frames` for I/O and inspection.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

DEFAULT_SUBCARRIERS = 64
DEFAULT_CIR_LENGTH = 32
NOMINAL_RATE_HZ = {"wlan_csi": 80.0, "uwb": 40.0}

CSI_VECTOR_FIELDS = ("lltf", "ht", "stbc")
UWB_VECTOR_FIELDS = ("cir",)


class Label(enum.Enum):
    IDLE = "idle"
    BICYCLE = "bicycle"
    CAR_LIKE = "car_like"

    @property
    def index(self) -> int:
        return _LABEL_ORDER.index(self)

    @classmethod
    def parse(cls, text: str) -> "Label":
        key = text.strip().lower().replace("-", "_")
        aliases = {"carlike": "car_like", "car": "car_like", "cyclist": "bicycle"}
        return cls(aliases.get(key, key))


_LABEL_ORDER = (Label.IDLE, Label.BICYCLE, Label.CAR_LIKE)

TASK_LABELS = {
    "binary": (Label.IDLE, Label.BICYCLE),
    "multi": (Label.IDLE, Label.BICYCLE, Label.CAR_LIKE),
}


class Tech(enum.Enum):
    WLAN_CSI = "wlan_csi"
    UWB = "uwb"


class Antenna(enum.Enum):
    DIRECTIONAL = "directional"
    OMNIDIRECTIONAL = "omnidirectional"


@dataclass(frozen=True)
class LinkMeta:
    tx_rx_distance_m: float = 4.0
    antenna_height_m: float = 1.0
    antenna: Antenna = Antenna.DIRECTIONAL
    site: str = ""


@dataclass(frozen=True)
class CsiFrame:
    t: float
    rssi: int
    lltf_amp: np.ndarray
    htltf_amp: np.ndarray
    stbc_amp: np.ndarray
    rxp: float | None = None


@dataclass(frozen=True)
class UwbFrame:
    t: float
    fpp: float
    cir_power: float
    rxp: float
    cir_amp: np.ndarray


Frame = Union[CsiFrame, UwbFrame]

# frame attribute -> column name
_CSI_ATTRS = {"lltf_amp": "lltf", "htltf_amp": "ht", "stbc_amp": "stbc"}


@dataclass(frozen=True)
class Violation:
    field: str
    message: str
    frame: int | None = None

    def __str__(self) -> str:
        where = f"frame {self.frame}: " if self.frame is not None else ""
        return f"{where}{self.field}: {self.message}"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadioTrace:
    """One passage (or idle window) recorded over a single radio link.

    ``scalars`` maps per-frame scalar quantities (``rssi``/``rxp`` for CSI,
    ``fpp``/``cir_power``/``rxp`` for UWB) to 1-D arrays.  ``vectors`` maps
    the per-frame vector quantities (``lltf``/``ht``/``stbc`` or ``cir``) to
    ``(n_frames, width)`` arrays; a ragged input is kept as a list of rows so
    that :func:`validate_trace` can report it.
    """

    id: str
    tech: Tech
    label: Label
    link: LinkMeta
    t: np.ndarray
    scalars: Mapping[str, np.ndarray]
    vectors: Mapping[str, Union[np.ndarray, Sequence[np.ndarray]]]
    _frames: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "t", _readonly(np.asarray(self.t, dtype=float)))
        object.__setattr__(
            self, "scalars",
            {k: _readonly(np.asarray(v, dtype=float)) for k, v in self.scalars.items()})
        vecs = {}
        for k, v in self.vectors.items():
            if isinstance(v, np.ndarray) and v.ndim == 2:
                vecs[k] = _readonly(v.astype(float, copy=False))
            else:
                rows = [_readonly(np.asarray(r, dtype=float)) for r in v]
                widths = {r.shape for r in rows}
                if len(widths) == 1 and rows and rows[0].ndim == 1:
                    vecs[k] = _readonly(np.vstack(rows))
                elif not rows:
                    vecs[k] = _readonly(np.zeros((0, 0)))
                else:
                    vecs[k] = tuple(rows)
        object.__setattr__(self, "vectors", vecs)

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def n_frames(self) -> int:
        return len(self)

    @property
    def is_ragged(self) -> bool:
        return any(not isinstance(v, np.ndarray) for v in self.vectors.values())

    def vector(self, name: str) -> np.ndarray:
        v = self.vectors[name]
        if not isinstance(v, np.ndarray):
            raise ValueError(f"trace {self.id!r}: column {name!r} is ragged")
        return v

    @property
    def cir_length(self) -> int:
        if self.tech is not Tech.UWB:
            return 0
        return int(self.vector("cir").shape[1])

    @property
    def sample_rate_hz(self) -> float:
        if len(self) < 2:
            return NOMINAL_RATE_HZ[self.tech.value]
        return float(1.0 / np.median(np.diff(self.t)))

    @property
    def frames(self) -> tuple:
        if self._frames is None:
            object.__setattr__(self, "_frames", tuple(self._build_frames()))
        return self._frames

    def _build_frames(self) -> Iterable[Frame]:
        def row(name, i):
            return self.vectors[name][i]

        if self.tech is Tech.WLAN_CSI:
            rxp = self.scalars.get("rxp")
            for i in range(len(self)):
                r = None if rxp is None or np.isnan(rxp[i]) else float(rxp[i])
                yield CsiFrame(
                    t=float(self.t[i]), rssi=int(self.scalars["rssi"][i]),
                    lltf_amp=row("lltf", i), htltf_amp=row("ht", i),
                    stbc_amp=row("stbc", i), rxp=r)
        else:
            for i in range(len(self)):
                yield UwbFrame(
                    t=float(self.t[i]), fpp=float(self.scalars["fpp"][i]),
                    cir_power=float(self.scalars["cir_power"][i]),
                    rxp=float(self.scalars["rxp"][i]), cir_amp=row("cir", i))

    def slice(self, start: int, stop: int, id: str | None = None) -> "RadioTrace":
        """Sub-trace of frames ``start:stop``; timestamps are kept as-is."""
        return RadioTrace(
            id=id or self.id, tech=self.tech, label=self.label, link=self.link,
            t=self.t[start:stop],
            scalars={k: v[start:stop] for k, v in self.scalars.items()},
            vectors={k: v[start:stop] for k, v in self.vectors.items()})

    @classmethod
    def from_frames(cls, id: str, tech: Tech, label: Label, link: LinkMeta,
                    frames: Sequence[Frame]) -> "RadioTrace":
        frames = list(frames)
        expected = CsiFrame if tech is Tech.WLAN_CSI else UwbFrame
        for i, f in enumerate(frames):
            if not isinstance(f, expected):
                raise TypeError(
                    f"frame {i} is {type(f).__name__}, trace tech is {tech.value}")
        t = [f.t for f in frames]
        if tech is Tech.WLAN_CSI:
            scalars = {"rssi": [f.rssi for f in frames]}
            if any(f.rxp is not None for f in frames):
                scalars["rxp"] = [np.nan if f.rxp is None else f.rxp for f in frames]
            vectors = {col: [getattr(f, attr) for f in frames]
                       for attr, col in _CSI_ATTRS.items()}
        else:
            scalars = {
                "fpp": [f.fpp for f in frames],
                "cir_power": [f.cir_power for f in frames],
                "rxp": [f.rxp for f in frames],
            }
            vectors = {"cir": [f.cir_amp for f in frames]}
        return cls(id=id, tech=tech, label=label, link=link, t=t,
                   scalars=scalars, vectors=vectors)


def _vector_width_violations(trace: RadioTrace, names: Sequence[str]) -> list[Violation]:
    out: list[Violation] = []
    ref = None
    for name in names:
        v = trace.vectors.get(name)
        if v is None:
            out.append(Violation(name, "missing column"))
            continue
        if isinstance(v, np.ndarray) and ref is None:
            ref = v.shape[1]
        elif not isinstance(v, np.ndarray) and ref is None:
            ref = len(v[0])
    if ref is None:
        return out
    attr_name = {v: k for k, v in _CSI_ATTRS.items()}
    attr_name["cir"] = "cir_amp"
    for name in names:
        v = trace.vectors.get(name)
        if v is None:
            continue
        label = attr_name.get(name, name)
        if isinstance(v, np.ndarray):
            if v.shape[1] != ref:
                out.append(Violation(label, f"length {v.shape[1]} != {ref}"))
        else:
            for i, r in enumerate(v):
                if r.ndim != 1 or r.shape[0] != ref:
                    out.append(Violation(label, f"length {r.size} != {ref}", i))
    for name in names:
        v = trace.vectors.get(name)
        if v is None:
            continue
        label = attr_name.get(name, name)
        for i, r in enumerate(v):
            if not np.all(np.isfinite(r)):
                out.append(Violation(label, "non-finite amplitude", i))
            elif np.any(r < 0):
                out.append(Violation(label, "negative amplitude", i))
    return out


def validate_trace(trace: RadioTrace) -> list[Violation]:
    """Check every structural invariant; return violations (empty if valid)."""
    out: list[Violation] = []
    n = len(trace)
    if not trace.id:
        out.append(Violation("id", "empty trace id"))
    if trace.link.tx_rx_distance_m <= 0:
        out.append(Violation("link.distance_m", "must be > 0"))
    if trace.link.antenna_height_m <= 0:
        out.append(Violation("link.antenna_height_m", "must be > 0"))
    if n == 0:
        out.append(Violation("frames", "trace has no frames"))
        return out

    t = trace.t
    for i in range(n):
        if not np.isfinite(t[i]):
            out.append(Violation("t", "non-finite timestamp", i))
        elif i > 0 and not t[i] > t[i - 1]:
            out.append(Violation("t", "not strictly increasing", i))

    for name, col in trace.scalars.items():
        if col.shape[0] != n:
            out.append(Violation(name, f"{col.shape[0]} values for {n} frames"))
    for name, col in trace.vectors.items():
        if len(col) != n:
            out.append(Violation(name, f"{len(col)} rows for {n} frames"))

    if trace.tech is Tech.WLAN_CSI:
        rssi = trace.scalars.get("rssi")
        if rssi is None:
            out.append(Violation("rssi", "missing column"))
        else:
            for i, v in enumerate(rssi):
                if not np.isfinite(v) or v != np.round(v):
                    out.append(Violation("rssi", "not an integer dBm value", i))
        rxp = trace.scalars.get("rxp")
        if rxp is not None:
            missing = np.isnan(rxp)
            if missing.any() and not missing.all():
                out.append(Violation(
                    "rxp", "present in some frames only", int(np.argmax(missing))))
        for name in ("fpp", "cir_power", "cir"):
            if name in trace.scalars or name in trace.vectors:
                out.append(Violation(name, "UWB quantity in a CSI trace"))
        out.extend(_vector_width_violations(trace, CSI_VECTOR_FIELDS))
    else:
        for name in ("fpp", "cir_power", "rxp"):
            col = trace.scalars.get(name)
            if col is None:
                out.append(Violation(name, "missing column"))
                continue
            for i, v in enumerate(col):
                if not np.isfinite(v):
                    out.append(Violation(name, "non-finite value", i))
                elif name == "cir_power" and not v > 0:
                    out.append(Violation(name, "must be > 0", i))
                elif v < 0:
                    out.append(Violation(name, "must be >= 0", i))
        for name in ("rssi", *CSI_VECTOR_FIELDS):
            if name in trace.scalars or name in trace.vectors:
                out.append(Violation(name, "CSI quantity in a UWB trace"))
        out.extend(_vector_width_violations(trace, UWB_VECTOR_FIELDS))
    return out
