"""
Observable Tables and Plot Data
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from core.exceptions import DnlsError

OBSERVABLES_FILE = "observables.csv"
COLUMNS = [
    "t",
    "norm_u_inf",
    "sqrt_t_times_norm_u_inf",
    "norm_w_inf",
    "norm_w_h1",
    "w_at_zero_abs",
    "g_cauchy_inf",
    "residual_vw",
    "residual_thm",
]


class ObservableReport:
    """Builds, writes and reads the per-snapshot observable table of a run"""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.logger = logging.getLogger(__name__)

    @staticmethod
    def build_frame(rows: Sequence[Dict[str, float]]) -> pd.DataFrame:
        frame = pd.DataFrame(list(rows), columns=COLUMNS)
        return frame.astype(float)

    def write(self, frame: pd.DataFrame) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / OBSERVABLES_FILE
        frame.to_csv(path, index=False, float_format="%.12e", quoting=csv.QUOTE_MINIMAL,
                     lineterminator="\r\n")
        self.logger.info(f"Wrote {len(frame)} observable rows to {path}")
        return path

    def read(self) -> pd.DataFrame:
        path = self.directory / OBSERVABLES_FILE
        if not self.directory.is_dir():
            raise DnlsError(f"run directory {self.directory} does not exist")
        if not path.is_file():
            raise DnlsError(f"no {OBSERVABLES_FILE} in {self.directory}")
        try:
            frame = pd.read_csv(path)
        except pd.errors.EmptyDataError as e:
            raise DnlsError(f"{path} is empty") from e
        if frame.empty:
            raise DnlsError(f"{path} holds no rows")
        missing = [c for c in COLUMNS if c not in frame.columns]
        if missing:
            raise DnlsError(f"{path} lacks columns {missing}")
        return frame

    def write_plot_data(self, frame: pd.DataFrame) -> List[Path]:
        """One gnuplot-ready two-column file (t, value) per observable"""
        written = []
        for column in COLUMNS[1:]:
            pairs = frame[["t", column]].dropna()
            path = self.directory / f"{column}.dat"
            np.savetxt(path, pairs.to_numpy(), fmt="%.12e", header=f"t {column}")
            written.append(path)
        self.logger.info(f"Wrote {len(written)} plot data files to {self.directory}")
        return written
