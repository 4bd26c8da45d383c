"""Monte Carlo result table and its CSV form.

Column semantics (one row per (speed, SNR) cell):

    waveform        ofdm | otfs | hybrid
    speed_kmh       true mobile speed
    mod_order       4 | 16
    snr_db          per-sample SNR (inf in noiseless runs)
    bits            bits transmitted in the cell
    bit_errors      bit errors after hard decision
    ber             bit_errors / bits
    frames          data frames sent
    seed            derived 64-bit cell seed
    otfs_frames     frames sent with OTFS (hybrid decides per batch)
    complex_mults   radix-2 complex multiplies in modem transforms and sensing
    fft_calls       FFT invocations counted with complex_mults

Floats are written with 17 significant digits so parsing is lossless.
"""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class BerRow:
    waveform: str
    speed_kmh: float
    mod_order: int
    snr_db: float
    bits: int
    bit_errors: int
    ber: float
    frames: int
    seed: int
    otfs_frames: int = 0
    complex_mults: int = 0
    fft_calls: int = 0


COLUMNS = tuple(f.name for f in fields(BerRow))
_TYPES = {f.name: f.type for f in fields(BerRow)}


@dataclass(frozen=True)
class BerTable:
    rows: tuple[BerRow, ...] = ()

    def lookup(self, waveform: str, speed_kmh: float, snr_db: float) -> BerRow:
        for row in self.rows:
            if row.waveform == waveform and row.speed_kmh == speed_kmh and row.snr_db == snr_db:
                return row
        raise KeyError((waveform, speed_kmh, snr_db))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow(_fmt(v) for v in astuple(row))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BerTable":
        reader = csv.reader(io.StringIO(text, newline=""))
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            values = {}
            for name, raw in zip(COLUMNS, rec):
                kind = _TYPES[name]
                values[name] = raw if kind == "str" else (int(raw) if kind == "int" else float(raw))
            rows.append(BerRow(**values))
        return cls(tuple(rows))


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit_csv(table: BerTable, path) -> Path:
    """Write ``table`` to ``path`` (CRLF line ends per RFC 4180)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(table.to_csv())
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write results to {path}: {exc.strerror}") from exc
    return path


def read_csv(path) -> BerTable:
    with open(path, newline="") as fh:
        return BerTable.from_csv(fh.read())
