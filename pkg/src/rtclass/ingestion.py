"""Trace files, dataset manifests and dataset construction.

Trace file layout (UTF-8 JSON Lines)::

    {"id": ..., "tech": "wlan_csi"|"uwb", "label": ..., "link": {...}}
    {"t": 0.0, "rssi": -41, "lltf": [...], "ht": [...], "stbc": [...]}
    ...

Manifest layout (UTF-8 CSV)::

    # seed=7
    path,label,tech
    traces/0000.jsonl,idle,uwb
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .seeding import rng_for
from .trace_model import (
    Antenna,
    Label,
    LinkMeta,
    RadioTrace,
    Tech,
    Violation,
    validate_trace,
)


class TraceFileError(ValueError):
    pass


class TraceParseError(TraceFileError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class TraceValidationError(TraceFileError):
    def __init__(self, violations: Sequence[Violation], trace_id: str = ""):
        self.violations = list(violations)
        head = f"trace {trace_id!r}: " if trace_id else ""
        body = "; ".join(str(v) for v in self.violations[:10])
        more = f" (+{len(self.violations) - 10} more)" if len(self.violations) > 10 else ""
        super().__init__(f"{head}{len(self.violations)} violation(s): {body}{more}")


class DatasetError(ValueError):
    pass


_CSI_KEYS = ("t", "rssi", "lltf", "ht", "stbc")
_UWB_KEYS = ("t", "fpp", "cir_power", "rxp", "cir")


def _frame_tech(obj: dict) -> str | None:
    if "tech" in obj:
        return str(obj["tech"])
    if any(k in obj for k in ("rssi", "lltf", "ht", "stbc")):
        return Tech.WLAN_CSI.value
    if any(k in obj for k in ("fpp", "cir_power", "cir")):
        return Tech.UWB.value
    return None


def _require(obj: dict, keys: Iterable[str], lineno: int) -> None:
    missing = [k for k in keys if k not in obj]
    if missing:
        raise TraceParseError(f"missing key(s) {', '.join(missing)}", lineno)


def _number(value, key: str, lineno: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceParseError(f"{key!r} must be a number", lineno)
    return float(value)


def _vector(value, key: str, lineno: int) -> np.ndarray:
    if not isinstance(value, list):
        raise TraceParseError(f"{key!r} must be an array", lineno)
    return np.array([_number(v, key, lineno) for v in value], dtype=float)


def _parse_header(obj: dict) -> tuple[str, Tech, Label, LinkMeta]:
    _require(obj, ("id", "tech", "label", "link"), 1)
    try:
        tech = Tech(obj["tech"])
    except ValueError:
        raise TraceParseError(f"unknown tech {obj['tech']!r}", 1) from None
    try:
        label = Label.parse(str(obj["label"]))
    except ValueError:
        raise TraceParseError(f"unknown label {obj['label']!r}", 1) from None
    link = obj["link"]
    if not isinstance(link, dict):
        raise TraceParseError("'link' must be an object", 1)
    _require(link, ("distance_m", "antenna_height_m", "antenna"), 1)
    try:
        antenna = Antenna(link["antenna"])
    except ValueError:
        raise TraceParseError(f"unknown antenna {link['antenna']!r}", 1) from None
    meta = LinkMeta(
        tx_rx_distance_m=_number(link["distance_m"], "distance_m", 1),
        antenna_height_m=_number(link["antenna_height_m"], "antenna_height_m", 1),
        antenna=antenna,
        site=str(link.get("site", "")),
    )
    return str(obj["id"]), tech, label, meta


def parse_trace_file(data: bytes | str) -> RadioTrace:
    """Parse one JSONL trace and validate it.

    Raises TraceParseError for malformed content (with the 1-based line
    number) and TraceValidationError when the decoded trace breaks an
    invariant.
    """
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise TraceParseError("no frames (empty file)")
    objs = []
    for lineno, ln in lines:
        try:
            obj = json.loads(ln)
        except json.JSONDecodeError as exc:
            raise TraceParseError(f"invalid JSON: {exc.msg}", lineno) from None
        if not isinstance(obj, dict):
            raise TraceParseError("expected a JSON object", lineno)
        objs.append((lineno, obj))

    trace_id, tech, label, link = _parse_header(objs[0][1])
    frames = objs[1:]
    if not frames:
        raise TraceParseError("no frames")

    violations: list[Violation] = []
    t, scalars, vectors = [], {}, {}
    if tech is Tech.WLAN_CSI:
        keys, vec_keys = _CSI_KEYS, ("lltf", "ht", "stbc")
        scalar_keys = ["rssi"]
        if any("rxp" in obj for _, obj in frames):
            scalar_keys.append("rxp")
    else:
        keys, vec_keys = _UWB_KEYS, ("cir",)
        scalar_keys = ["fpp", "cir_power", "rxp"]
    for k in scalar_keys:
        scalars[k] = []
    for k in vec_keys:
        vectors[k] = []

    for i, (lineno, obj) in enumerate(frames):
        ftech = _frame_tech(obj)
        if ftech is not None and ftech != tech.value:
            violations.append(Violation(
                "tech", f"frame tagged {ftech!r} in a {tech.value!r} trace", i))
            continue
        _require(obj, keys, lineno)
        t.append(_number(obj["t"], "t", lineno))
        for k in scalar_keys:
            if k == "rxp" and tech is Tech.WLAN_CSI and "rxp" not in obj:
                scalars[k].append(np.nan)
            else:
                scalars[k].append(_number(obj[k], k, lineno))
        for k in vec_keys:
            vectors[k].append(_vector(obj[k], k, lineno))

    if violations:
        raise TraceValidationError(violations, trace_id)
    trace = RadioTrace(id=trace_id, tech=tech, label=label, link=link,
                       t=t, scalars=scalars, vectors=vectors)
    violations = validate_trace(trace)
    if violations:
        raise TraceValidationError(violations, trace_id)
    return trace


def serialize_trace(trace: RadioTrace) -> bytes:
    """Canonical JSONL encoding; floats use shortest round-trip repr."""
    if trace.is_ragged:
        raise TraceValidationError(validate_trace(trace), trace.id)
    header = {
        "id": trace.id,
        "tech": trace.tech.value,
        "label": trace.label.value,
        "link": {
            "distance_m": trace.link.tx_rx_distance_m,
            "antenna_height_m": trace.link.antenna_height_m,
            "antenna": trace.link.antenna.value,
            "site": trace.link.site,
        },
    }
    out = io.StringIO()
    out.write(json.dumps(header, separators=(",", ":"), allow_nan=False))
    out.write("\n")
    t = trace.t.tolist()
    if trace.tech is Tech.WLAN_CSI:
        rssi = trace.scalars["rssi"].tolist()
        rxp = trace.scalars.get("rxp")
        rxp = rxp.tolist() if rxp is not None else None
        cols = [trace.vector(k).tolist() for k in ("lltf", "ht", "stbc")]
        for i in range(len(t)):
            frame = {"t": t[i], "rssi": int(rssi[i]),
                     "lltf": cols[0][i], "ht": cols[1][i], "stbc": cols[2][i]}
            if rxp is not None:
                frame["rxp"] = rxp[i]
            out.write(json.dumps(frame, separators=(",", ":"), allow_nan=False))
            out.write("\n")
    else:
        fpp = trace.scalars["fpp"].tolist()
        cp = trace.scalars["cir_power"].tolist()
        rxp = trace.scalars["rxp"].tolist()
        cir = trace.vector("cir").tolist()
        for i in range(len(t)):
            frame = {"t": t[i], "fpp": fpp[i], "cir_power": cp[i],
                     "rxp": rxp[i], "cir": cir[i]}
            out.write(json.dumps(frame, separators=(",", ":"), allow_nan=False))
            out.write("\n")
    return out.getvalue().encode("utf-8")


def read_trace(path: str | os.PathLike) -> RadioTrace:
    return parse_trace_file(Path(path).read_bytes())


def write_trace(trace: RadioTrace, path: str | os.PathLike) -> None:
    Path(path).write_bytes(serialize_trace(trace))


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: Label
    tech: Tech


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    seed: int
    root: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not 0 <= int(self.seed) < 2**64:
            raise DatasetError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        seen = set()
        for e in self.entries:
            if e.path in seen:
                raise DatasetError(f"duplicate manifest path {e.path!r}")
            seen.add(e.path)

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        if not p.is_absolute() and self.root is not None:
            p = self.root / p
        return p

    @property
    def labels(self) -> set[Label]:
        return {e.label for e in self.entries}


def parse_manifest(text: str, root: Path | None = None) -> DatasetManifest:
    seed = None
    body = []
    for ln in text.splitlines():
        s = ln.strip()
        if s.startswith("#"):
            pragma = s[1:].strip()
            if pragma.startswith("seed="):
                try:
                    seed = int(pragma[len("seed="):])
                except ValueError:
                    raise DatasetError(f"bad seed pragma {s!r}") from None
            continue
        if s:
            body.append(ln)
    if seed is None:
        raise DatasetError("manifest lacks '# seed=<u64>' pragma")
    reader = csv.DictReader(body)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["path", "label", "tech"]:
        raise DatasetError("manifest header must be 'path,label,tech'")
    entries = []
    for row in reader:
        try:
            entries.append(ManifestEntry(
                path=row["path"].strip(), label=Label.parse(row["label"]),
                tech=Tech(row["tech"].strip())))
        except (ValueError, AttributeError) as exc:
            raise DatasetError(f"bad manifest row {row}: {exc}") from None
    return DatasetManifest(entries=tuple(entries), seed=seed, root=root)


def read_manifest(path: str | os.PathLike) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"{path}: {exc.strerror or exc}") from None
    return parse_manifest(text, root=path.parent)


def format_manifest(manifest: DatasetManifest) -> str:
    out = io.StringIO()
    out.write(f"# seed={int(manifest.seed)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["path", "label", "tech"])
    for e in manifest.entries:
        w.writerow([e.path, e.label.value, e.tech.value])
    return out.getvalue()


def write_manifest(manifest: DatasetManifest, path: str | os.PathLike) -> None:
    Path(path).write_text(format_manifest(manifest), encoding="utf-8")


@dataclass(frozen=True, eq=False)
class Dataset:
    traces: tuple[RadioTrace, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    @property
    def class_counts(self) -> dict[Label, int]:
        counts: dict[Label, int] = {}
        for tr in self.traces:
            counts[tr.label] = counts.get(tr.label, 0) + 1
        return {lab: counts[lab] for lab in Label if lab in counts}

    @property
    def labels(self) -> list[Label]:
        return sorted(self.class_counts, key=lambda lab: lab.index)

    @property
    def tech(self) -> Tech:
        techs = {tr.tech for tr in self.traces}
        if len(techs) != 1:
            raise DatasetError(f"dataset mixes technologies: {sorted(t.value for t in techs)}")
        return techs.pop()

    def restrict(self, labels: Iterable[Label]) -> "Dataset":
        keep = set(labels)
        return Dataset(tuple(tr for tr in self.traces if tr.label in keep), self.seed)

    def for_task(self, task: str) -> "Dataset":
        from .trace_model import TASK_LABELS

        wanted = TASK_LABELS[task]
        ds = self.restrict(wanted)
        missing = [lab.value for lab in wanted if lab not in ds.class_counts]
        if missing:
            raise DatasetError(f"task {task!r} needs label(s) absent from dataset: {missing}")
        return ds


def load_dataset(manifest: DatasetManifest) -> Dataset:
    traces = []
    for entry in manifest.entries:
        path = manifest.resolve(entry)
        try:
            tr = read_trace(path)
        except FileNotFoundError:
            raise DatasetError(f"{path}: file not found") from None
        except OSError as exc:
            raise DatasetError(f"{path}: {exc.strerror or exc}") from None
        except TraceFileError as exc:
            raise DatasetError(f"{path}: {exc}") from exc
        if tr.label is not entry.label or tr.tech is not entry.tech:
            raise DatasetError(
                f"{path}: header says {tr.label.value}/{tr.tech.value}, "
                f"manifest says {entry.label.value}/{entry.tech.value}")
        traces.append(tr)
    return Dataset(tuple(traces), int(manifest.seed))


def balance(dataset: Dataset, per_class: int, seed: int) -> Dataset:
    """Seeded uniform subsample of exactly ``per_class`` traces per label.

    Selected traces keep their original relative order.
    """
    counts = dataset.class_counts
    if per_class < 1:
        raise DatasetError("per_class must be >= 1")
    for lab, n in sorted(counts.items(), key=lambda kv: (kv[1], kv[0].index)):
        if per_class > n:
            raise DatasetError(
                f"per_class={per_class} exceeds size of class {lab.value} ({n})")
    rng = rng_for(seed, "balance")
    labels = np.array([tr.label.index for tr in dataset.traces])
    chosen = []
    for lab in dataset.labels:
        idx = np.flatnonzero(labels == lab.index)
        chosen.extend(rng.choice(idx, size=per_class, replace=False).tolist())
    chosen.sort()
    return Dataset(tuple(dataset.traces[i] for i in chosen), dataset.seed)
