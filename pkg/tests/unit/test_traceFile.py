import os

import numpy as np
import pytest

from rlsForget import __version__
from rlsForget.estimator.core import TraceRecord
from rlsForget.scenarios.traceFile import build_header, read_trace, trace_columns, traces_to_frame, write_trace


def sample_traces(count=3, with_psi=True):
    traces = []
    for k in range(count):
        traces.append(TraceRecord(k=k, z=np.array([0.1 * k]), theta=np.array([1.0 / 3.0, -k]),
                                  sigma_P=np.array([2.0, 0.5]), kappa_P=4.0, V=float(k),
                                  psi_col_norms=np.array([0.0, 1.0]) if with_psi else None))
    return traces


def test_column_order():
    assert trace_columns(1, 2) == ["k", "z_1", "theta_1", "theta_2", "sigmaP_1", "sigmaP_2", "kappaP"]
    assert trace_columns(2, 1, with_V=True, with_psi=True) == ["k", "z_1", "z_2", "theta_1", "sigmaP_1", "kappaP",
                                                               "V", "psi_1"]


def test_frame_from_traces():
    frame = traces_to_frame(sample_traces(), 1, 2, with_V=True, with_psi=True)
    assert list(frame.columns) == trace_columns(1, 2, True, True)
    assert frame["k"].tolist() == [0, 1, 2]
    assert frame["theta_2"].tolist() == [0.0, -1.0, -2.0]
    assert frame["psi_2"].tolist() == [1.0, 1.0, 1.0]


def test_missing_psi_is_nan():
    frame = traces_to_frame(sample_traces(with_psi=False), 1, 2, with_psi=True)
    assert frame["psi_1"].isna().all()


def test_header_contents():
    header = build_header({"name": "demo", "steps": 3}, seed=5, theta_true=[1.0, 2.0])
    assert header["prng"] == "numpy.random.PCG64"
    assert header["seed"] == "5"
    assert header["version"] == __version__
    assert header["scenario"] == '{"name":"demo","steps":3}'
    assert header["theta_true"] == "[1.0, 2.0]"


def test_write_and_read_back(tmp_path):
    path = str(tmp_path / "run" / "demo.csv")
    frame = traces_to_frame(sample_traces(), 1, 2, with_V=True)
    header = build_header({"name": "demo"}, seed=0, theta_true=[1.0, 2.0])
    write_trace(path, frame, header, footer=["guard: tripped at k=2 (non-finite value)"])

    assert os.listdir(tmp_path / "run") == ["demo.csv"]
    read_header, read_frame, footer = read_trace(path)
    assert read_header["scenario"] == {"name": "demo"}
    assert read_header["theta_true"] == [1.0, 2.0]
    assert footer == ["guard: tripped at k=2 (non-finite value)"]
    assert list(read_frame.columns) == list(frame.columns)
    assert read_frame["theta_1"].tolist() == pytest.approx([1.0 / 3.0] * 3, rel=1e-15)
    assert read_frame["V"].tolist() == pytest.approx([0.0, 1.0, 2.0])


def test_rewrite_replaces_file(tmp_path):
    path = str(tmp_path / "demo.csv")
    header = build_header({"name": "demo"}, seed=0)
    write_trace(path, traces_to_frame(sample_traces(3), 1, 2), header)
    write_trace(path, traces_to_frame(sample_traces(2), 1, 2), header)
    _, frame, footer = read_trace(path)
    assert len(frame) == 2
    assert footer == []
