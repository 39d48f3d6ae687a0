"""File formats.

Measurement dataset file
    One JSON header line, then the payload. The header carries
    ``format_version``, ``angle_deg``, ``M``, ``N``, ``sample_rate_hz``,
    ``payload_encoding`` (``"csv"`` or ``"binary-f32le"``) and optional
    ``metadata``. Binary payloads are little-endian float32 ``(re, im)`` pairs
    in impulse-major order. CSV payloads start with the column line
    ``impulse_index,bin_index,re,im`` followed by one row per bin, 0-based.

Model table file
    JSON: ``{"carrier_ghz", "valid_angle_deg", "entries": [{"bandwidth_mhz",
    "c", "d", "e", "f"}, ...]}``.

Curve / results / ECDF files
    Comma-separated text with a header line.

A given file must not be written by two writers at once; nothing here locks.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import constants as const
from .errors import EmptyInputError, ParseError, ShapeError, VersionError
from .model import LinkGeometry, ModelTable, predict
from .pipeline import AngleResult, CalibrationConstants, Ecdf, ImpulseSpectra

FORMAT_VERSION = 1
DATASET_SUFFIX = ".spectra"
ENCODINGS = ("csv", "binary-f32le")
CSV_COLUMNS = "impulse_index,bin_index,re,im"
CURVE_HEADER = ("alpha_deg", "bandwidth_mhz", "pl_db")
RESULTS_HEADER = ("angle_deg", "mean_power_db", "correction_db", "pl_db", "bandwidth_mhz")


# -- measurement datasets ---------------------------------------------------

@dataclass(frozen=True)
class DatasetHeader:
    format_version: int
    angle_deg: float
    M: int
    N: int
    sample_rate_hz: float
    payload_encoding: str
    metadata: dict | None = None

    def to_json(self) -> str:
        d = {
            "format_version": self.format_version,
            "angle_deg": self.angle_deg,
            "M": self.M,
            "N": self.N,
            "sample_rate_hz": self.sample_rate_hz,
            "payload_encoding": self.payload_encoding,
        }
        if self.metadata:
            d["metadata"] = self.metadata
        return json.dumps(d, sort_keys=True)

    @classmethod
    def parse(cls, line: bytes | str) -> DatasetHeader:
        try:
            d = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ParseError(f"line 1: dataset header is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ParseError("line 1: dataset header must be a JSON object")
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise VersionError(f"unsupported dataset format_version {version!r} (expected {FORMAT_VERSION})")
        try:
            hdr = cls(
                FORMAT_VERSION,
                float(d["angle_deg"]),
                int(d["M"]),
                int(d["N"]),
                float(d["sample_rate_hz"]),
                str(d["payload_encoding"]),
                d.get("metadata"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"line 1: bad dataset header field: {exc}") from exc
        if hdr.payload_encoding not in ENCODINGS:
            raise ParseError(f"line 1: unknown payload_encoding {hdr.payload_encoding!r}")
        if hdr.M < 1 or hdr.N < 2:
            raise ShapeError(f"header declares M={hdr.M}, N={hdr.N}")
        return hdr


def write_dataset(
    spectra: ImpulseSpectra,
    path,
    encoding: str = "binary-f32le",
    metadata: dict | None = None,
) -> Path:
    if encoding not in ENCODINGS:
        raise ValueError(f"encoding must be one of {ENCODINGS}")
    path = Path(path)
    m, n = spectra.bins.shape
    hdr = DatasetHeader(FORMAT_VERSION, spectra.angle_deg, m, n, spectra.sample_rate_hz, encoding, metadata)
    with open(path, "wb") as fh:
        fh.write(hdr.to_json().encode() + b"\n")
        if encoding == "binary-f32le":
            pairs = np.empty((m, n, 2), dtype="<f4")
            pairs[..., 0] = spectra.bins.real
            pairs[..., 1] = spectra.bins.imag
            fh.write(pairs.tobytes())
        else:
            lines = [CSV_COLUMNS]
            for i in range(m):
                row = spectra.bins[i]
                lines.extend(f"{i},{k},{z.real:.9g},{z.imag:.9g}" for k, z in enumerate(row))
            fh.write(("\n".join(lines) + "\n").encode())
    return path


def _read_csv_payload(text: str, hdr: DatasetHeader) -> np.ndarray:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_COLUMNS:
        raise ParseError(f"line 2: expected column header {CSV_COLUMNS!r}")
    rows = [(i + 3, ln) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if len(rows) != hdr.M * hdr.N:
        raise ShapeError(f"payload has {len(rows)} rows, header declares M*N = {hdr.M * hdr.N}")
    out = np.zeros((hdr.M, hdr.N), dtype=np.complex128)
    filled = np.zeros((hdr.M, hdr.N), dtype=bool)
    for lineno, ln in rows:
        fields = ln.split(",")
        if len(fields) != 4:
            raise ParseError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        try:
            i, k = int(fields[0]), int(fields[1])
            re, im = float(fields[2]), float(fields[3])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric field in {ln.strip()!r}") from None
        if not (0 <= i < hdr.M and 0 <= k < hdr.N):
            raise ShapeError(f"line {lineno}: index ({i}, {k}) outside M={hdr.M}, N={hdr.N}")
        if filled[i, k]:
            raise ParseError(f"line {lineno}: duplicate entry for ({i}, {k})")
        out[i, k] = complex(re, im)
        filled[i, k] = True
    return out


def read_dataset(path) -> ImpulseSpectra:
    raw = Path(path).read_bytes()
    head, sep, payload = raw.partition(b"\n")
    if not sep:
        raise ParseError(f"{path}: missing dataset header line")
    hdr = DatasetHeader.parse(head)
    if hdr.payload_encoding == "binary-f32le":
        expected = hdr.M * hdr.N * 8
        if len(payload) != expected:
            raise ShapeError(f"{path}: payload is {len(payload)} bytes, header declares {expected}")
        pairs = np.frombuffer(payload, dtype="<f4").reshape(hdr.M, hdr.N, 2)
        bins = pairs[..., 0].astype(np.float64) + 1j * pairs[..., 1].astype(np.float64)
    else:
        try:
            text = payload.decode("ascii")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{path}: CSV payload is not ASCII") from exc
        bins = _read_csv_payload(text, hdr)
    return ImpulseSpectra(hdr.angle_deg, bins, hdr.sample_rate_hz)


def dataset_filename(angle_deg: float) -> str:
    return f"angle_{angle_deg:08.3f}{DATASET_SUFFIX}".replace("-", "m")


def read_dataset_dir(directory) -> list[ImpulseSpectra]:
    files = sorted(Path(directory).glob(f"*{DATASET_SUFFIX}"))
    if not files:
        raise EmptyInputError(f"no *{DATASET_SUFFIX} files in {directory}")
    return [read_dataset(f) for f in files]


def to_spectra(frames, sample_rate_hz: float, angle_deg: float = const.REFERENCE_ANGLE_DEG) -> ImpulseSpectra:
    """Unnormalised forward DFT of each time-domain I/Q frame, centred bin order.

    With this convention the total spectral power is N times the total
    time-domain power.
    """
    try:
        x = np.asarray(frames, dtype=np.complex128)
    except (ValueError, TypeError) as exc:
        raise ShapeError(f"frames must be a rectangular M x N array: {exc}") from exc
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2:
        raise ShapeError(f"frames must be M x N, got shape {x.shape}")
    return ImpulseSpectra(angle_deg, np.fft.fftshift(np.fft.fft(x, axis=1), axes=1), sample_rate_hz)


# -- JSON configuration files -----------------------------------------------

def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2) + "\n")
    return path


def read_table(path) -> ModelTable:
    return ModelTable.from_dict(_load_json(path))


def write_table(table: ModelTable, path) -> Path:
    return write_json(table.to_dict(), path)


def read_geometry(path) -> LinkGeometry:
    return LinkGeometry.from_dict(_load_json(path))


def write_geometry(geometry: LinkGeometry, path) -> Path:
    return write_json(geometry.to_dict(), path)


def read_calibration(path) -> CalibrationConstants:
    d = _load_json(path)
    try:
        return CalibrationConstants(**d)
    except TypeError as exc:
        raise ParseError(f"{path}: bad calibration fields: {exc}") from exc


def write_calibration(cal: CalibrationConstants, path) -> Path:
    return write_json(
        {
            "attenuator_db": cal.attenuator_db,
            "tx_antenna_gain_dbi": cal.tx_antenna_gain_dbi,
            "rx_antenna_gain_dbi": cal.rx_antenna_gain_dbi,
        },
        path,
    )


# -- delimited text ---------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    alpha_deg: float
    bandwidth_mhz: float
    pl_db: float


def export_curve(
    table: ModelTable,
    bandwidths_mhz: Iterable[float],
    angles_deg: Iterable[float],
    mode: str = "interpolate",
    allow_out_of_range: bool = False,
) -> Iterator[CurveRow]:
    """Rows ordered bandwidth-major, then ascending angle."""
    angles = sorted(float(a) for a in angles_deg)
    for bw in bandwidths_mhz:
        for a in angles:
            yield CurveRow(a, float(bw), predict(a, float(bw) * 1e6, table, mode, allow_out_of_range))


def angle_grid(start_deg: float, stop_deg: float, step_deg: float) -> np.ndarray:
    """Inclusive grid; the stop value is kept when it lies on the step."""
    if not step_deg > 0:
        raise ValueError("step must be positive")
    count = int(math.floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1
    if count < 1:
        raise ValueError("empty angle grid")
    return np.round(start_deg + step_deg * np.arange(count), 9)


def _fmt(x: float) -> str:
    return format(x, ".12g")


def write_curve(rows: Iterable[CurveRow], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for r in rows:
            w.writerow((_fmt(r.alpha_deg), _fmt(r.bandwidth_mhz), f"{r.pl_db:.4f}"))
    return path


def read_curve(path) -> list[CurveRow]:
    return [CurveRow(*row) for row in _read_numeric_csv(path, CURVE_HEADER)]


def write_results(results: Sequence[AngleResult], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for r in results:
            w.writerow(
                (
                    _fmt(r.angle_deg),
                    f"{r.mean_power_db:.6f}",
                    f"{r.correction_db:.6f}",
                    f"{r.pl_db:.6f}",
                    _fmt(r.bandwidth_hz / 1e6),
                )
            )
    return path


def write_ecdf(e: Ecdf, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("value_db", "probability"))
        for v, p in zip(e.values, e.probabilities):
            w.writerow((_fmt(v), _fmt(p)))
    return path


def _read_numeric_csv(path, header: Sequence[str]) -> list[tuple[float, ...]]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != list(header):
            raise ParseError(f"{path}: line 1: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: line {lineno}: expected {len(header)} fields")
            try:
                rows.append(tuple(float(c) for c in row))
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-numeric field") from None
    return rows


def read_points(path, bandwidth_mhz: float | None = None) -> dict[float, list[tuple[float, float]]]:
    """Angle/PL points grouped by bandwidth in Hz.

    Accepts headerless ``alpha_deg,pl_db`` rows (bandwidth from the argument),
    or any CSV with a header naming an angle column (``alpha_deg`` or
    ``angle_deg``), ``pl_db`` and optionally ``bandwidth_mhz``. Curve and
    results files therefore load directly.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and "".join(r).strip()]
    if not rows:
        raise EmptyInputError(f"{path}: no points")
    names = [c.strip() for c in rows[0]]
    start = 1
    if _is_number(names[0]):
        cols = {"alpha": 0, "pl": 1, "bw": None}
        start = 0
    else:
        angle_col = next((c for c in ("alpha_deg", "angle_deg") if c in names), None)
        if angle_col is None or "pl_db" not in names:
            raise ParseError(f"{path}: line 1: header needs alpha_deg (or angle_deg) and pl_db")
        cols = {
            "alpha": names.index(angle_col),
            "pl": names.index("pl_db"),
            "bw": names.index("bandwidth_mhz") if "bandwidth_mhz" in names else None,
        }
    groups: dict[float, list[tuple[float, float]]] = {}
    for lineno, row in enumerate(rows[start:], start=start + 1):
        try:
            alpha = float(row[cols["alpha"]])
            pl = float(row[cols["pl"]])
            bw = float(row[cols["bw"]]) if cols["bw"] is not None else None
        except (ValueError, IndexError):
            raise ParseError(f"{path}: line {lineno}: expected numeric angle and PL fields") from None
        if bandwidth_mhz is not None:
            bw = bandwidth_mhz
        if bw is None:
            raise ParseError(f"{path}: no bandwidth column; pass a bandwidth explicitly")
        groups.setdefault(bw * 1e6, []).append((alpha, pl))
    return groups


def read_values(path) -> np.ndarray:
    """First column of a CSV of numbers; a non-numeric first line is a header."""
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if lineno == 1:
                    continue
                raise ParseError(f"{path}: line {lineno}: non-numeric value {row[0]!r}") from None
    if not values:
        raise EmptyInputError(f"{path}: no values")
    return np.array(values)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_pl_list(text: str) -> dict[float, float]:
    """Parse ``"21:120.1,105:118.3"`` into ``{angle_deg: pl_db}``."""
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        try:
            angle, pl = item.split(":")
            out[float(angle)] = float(pl)
        except ValueError:
            raise ParseError(f"bad angle:pl pair {item!r}") from None
    if not out:
        raise EmptyInputError("empty angle:pl list")
    return out
