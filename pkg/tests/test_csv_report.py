import numpy as np
import pytest

from core.exceptions import DnlsError
from processors.csv_report import COLUMNS, OBSERVABLES_FILE, ObservableReport


def _rows():
    rows = []
    for t in (0.0, 1.0, 2.0):
        row = {column: 0.5 * t for column in COLUMNS}
        row["t"] = t
        rows.append(row)
    rows[0]["residual_thm"] = np.nan
    return rows


def test_write_and_read(tmp_path):
    report = ObservableReport(tmp_path / "run")
    frame = report.build_frame(_rows())
    assert list(frame.columns) == COLUMNS
    path = report.write(frame)
    assert path.name == OBSERVABLES_FILE
    assert b"\r\n" in path.read_bytes()
    assert path.read_bytes().splitlines()[0].decode() == ",".join(COLUMNS)

    back = report.read()
    assert back.shape == (3, len(COLUMNS))
    assert np.isnan(back["residual_thm"][0])
    np.testing.assert_allclose(back["norm_w_h1"], [0.0, 0.5, 1.0])


def test_missing_values_are_blank_fields(tmp_path):
    report = ObservableReport(tmp_path)
    path = report.write(report.build_frame(_rows()))
    first = path.read_text().splitlines()[1]
    assert first.endswith(",")


def test_plot_data_drops_missing_rows(tmp_path):
    report = ObservableReport(tmp_path)
    frame = report.build_frame(_rows())
    written = report.write_plot_data(frame)
    assert len(written) == len(COLUMNS) - 1
    residual = np.loadtxt(tmp_path / "residual_thm.dat")
    assert residual.shape == (2, 2)
    np.testing.assert_allclose(residual[:, 0], [1.0, 2.0])
    assert np.loadtxt(tmp_path / "norm_u_inf.dat").shape == (3, 2)


def test_read_failures(tmp_path):
    with pytest.raises(DnlsError, match="does not exist"):
        ObservableReport(tmp_path / "absent").read()
    with pytest.raises(DnlsError, match="no observables.csv"):
        ObservableReport(tmp_path).read()
    (tmp_path / OBSERVABLES_FILE).write_text("")
    with pytest.raises(DnlsError, match="empty"):
        ObservableReport(tmp_path).read()
    (tmp_path / OBSERVABLES_FILE).write_text("t,norm_u_inf\n1.0,2.0\n")
    with pytest.raises(DnlsError, match="lacks columns"):
        ObservableReport(tmp_path).read()
