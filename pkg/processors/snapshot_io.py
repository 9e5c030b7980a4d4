"""
Snapshot Persistence

Binary snapshot files (magic "DNLS", format version, N, L, t, q, lambda, then
u and w as little-endian complex128) with a pandas index of times and norms.
"""

import logging
import struct
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from core.exceptions import DnlsError, InsufficientRun
from core.field_grid import GridSpec, frequency_field, position_field
from core.propagator import Snapshot
from models.simulation_models import NormRecord

MAGIC = b"DNLS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQdddd")
INDEX_FILE = "snapshots.csv"


class SnapshotStore:
    """Read and write the snapshots of one run directory"""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.logger = logging.getLogger(__name__)

    @staticmethod
    def file_name(index: int) -> str:
        return f"snapshot_{index:05d}.bin"

    def write_snapshot(self, path: Path, snapshot: Snapshot, q: float, lam: float) -> None:
        grid = snapshot.u.grid
        header = _HEADER.pack(MAGIC, FORMAT_VERSION, grid.points, grid.half_length,
                              snapshot.t, q, lam)
        with open(path, "wb") as f:
            f.write(header)
            f.write(snapshot.u.values.astype("<c16").tobytes())
            f.write(snapshot.w.values.astype("<c16").tobytes())

    def read_snapshot(self, path: Path) -> Tuple[Dict[str, float], np.ndarray, np.ndarray]:
        """Header fields, u samples and w samples of one snapshot file"""
        data = Path(path).read_bytes()
        if len(data) < _HEADER.size:
            raise DnlsError(f"{path}: truncated snapshot header")
        magic, version, points, half_length, t, q, lam = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise DnlsError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise DnlsError(f"{path}: unsupported format version {version}")
        expected = _HEADER.size + 2 * 16 * points
        if len(data) != expected:
            raise DnlsError(f"{path}: expected {expected} bytes, found {len(data)}")
        body = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
        header = {"points": points, "half_length": half_length, "t": t, "q": q, "lam": lam}
        return header, body[:points].astype(np.complex128), body[points:].astype(np.complex128)

    def save_run(self, snapshots: Sequence[Snapshot], q: float, lam: float) -> Path:
        """Write every snapshot plus the index file; returns the index path"""
        self.directory.mkdir(parents=True, exist_ok=True)
        rows = []
        for index, snapshot in enumerate(snapshots):
            name = self.file_name(index)
            self.write_snapshot(self.directory / name, snapshot, q, lam)
            rows.append({"file": name, "t": snapshot.t, **snapshot.norms.model_dump()})
        index_path = self.directory / INDEX_FILE
        pd.DataFrame(rows).to_csv(index_path, index=False, float_format="%.17g")
        self.logger.info(f"Saved {len(rows)} snapshots to {self.directory}")
        return index_path

    def load_run(self) -> Tuple[List[Snapshot], Dict[str, float]]:
        """Snapshots of the directory in time order, and the header of the first"""
        index_path = self.directory / INDEX_FILE
        if not index_path.is_file():
            raise InsufficientRun(f"no snapshot index in {self.directory}")
        frame = pd.read_csv(index_path, float_precision="round_trip")
        if frame.empty:
            raise InsufficientRun(f"snapshot index in {self.directory} is empty")

        snapshots, first_header = [], None
        norm_fields = list(NormRecord.model_fields)
        for row in frame.itertuples(index=False):
            header, u, w = self.read_snapshot(self.directory / row.file)
            grid = GridSpec(header["half_length"], int(header["points"]))
            record = NormRecord(**{name: getattr(row, name) for name in norm_fields})
            snapshots.append(Snapshot(header["t"], position_field(grid, u), frequency_field(grid, w), record))
            first_header = first_header or header
        return snapshots, first_header
