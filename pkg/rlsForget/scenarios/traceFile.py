"""
CSV trace files.

Layout:
    # key: value          header lines (scenario echo, prng, seed, version, created, theta_true)
    k,z_1,..,kappaP,...   one row per consumed data point
    # guard: ...          present only when the divergence guard stopped the run
"""
import json
import logging
import os
from datetime import datetime

import numpy as np
import pandas as pd

from rlsForget import __version__
from rlsForget.estimator.core import TraceRecord
from rlsForget.signals.inputs import PRNG_NAME


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def trace_columns(p: int, n: int, with_V: bool = False, with_psi: bool = False) -> list[str]:
    columns = ["k"]
    columns += [f"z_{i}" for i in range(1, p + 1)]
    columns += [f"theta_{i}" for i in range(1, n + 1)]
    columns += [f"sigmaP_{i}" for i in range(1, n + 1)]
    columns.append("kappaP")
    if with_V:
        columns.append("V")
    if with_psi:
        columns += [f"psi_{i}" for i in range(1, n + 1)]
    return columns


def traces_to_frame(traces: list[TraceRecord], p: int, n: int, with_V: bool = False,
                    with_psi: bool = False) -> pd.DataFrame:
    """
    Trace records as a DataFrame with the CSV column layout.

    Missing V or psi values (for instance psi under a strategy that does not
    compute it) are written as nan.
    """
    columns = trace_columns(p, n, with_V, with_psi)
    rows = np.full((len(traces), len(columns)), np.nan)
    for r, t in enumerate(traces):
        row = [float(t.k), *np.ravel(t.z), *t.theta, *t.sigma_P, t.kappa_P]
        if with_V:
            row.append(np.nan if t.V is None else t.V)
        if with_psi:
            row.extend(np.full(n, np.nan) if t.psi_col_norms is None else t.psi_col_norms)
        rows[r] = row
    frame = pd.DataFrame(rows, columns=columns)
    frame["k"] = frame["k"].astype(np.int64)
    return frame


def build_header(scenario_dict: dict, seed: int, theta_true=None) -> dict:
    header = {
        "scenario": json.dumps(scenario_dict, sort_keys=True, separators=(",", ":")),
        "prng": PRNG_NAME,
        "seed": str(seed),
        "version": __version__,
        "created": datetime.now().isoformat(timespec="seconds"),
    }
    if theta_true is not None:
        header["theta_true"] = json.dumps([float(x) for x in np.ravel(theta_true)])
    return header


def write_trace(path: str, frame: pd.DataFrame, header: dict, footer: list[str] | None = None) -> str:
    """
    Write the trace CSV atomically: everything goes to a temporary file in the
    target directory, which then replaces ``path``.

    Raises:
        OSError: the directory cannot be created or written
    """
    directory = os.path.dirname(os.path.abspath(path))
    tmp_path = f"{path}.{os.getpid()}.tmp"
    try:
        os.makedirs(directory, exist_ok=True)
        with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
            for key, value in header.items():
                f.write(f"# {key}: {value}\n")
            frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="nan")
            for line in footer or []:
                f.write(f"# {line}\n")
        os.replace(tmp_path, path)
    except PermissionError as e:
        logger.error(f"Permission denied writing trace {path}: {e}")
        _discard(tmp_path)
        raise
    except OSError as e:
        logger.error(f"Failed to write trace {path}: {e}")
        _discard(tmp_path)
        raise
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _discard(tmp_path: str) -> None:
    if os.path.exists(tmp_path):
        os.remove(tmp_path)


def read_trace(path: str) -> tuple[dict, pd.DataFrame, list[str]]:
    """
    Read a trace CSV back.

    Returns:
        (header dict, data frame, footer lines); the ``scenario`` and
        ``theta_true`` header values are decoded from JSON
    """
    header, footer = {}, []
    seen_body = False
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                seen_body = True
                continue
            key, _, value = line[1:].strip().partition(": ")
            if seen_body:
                footer.append(line[1:].strip())
            else:
                header[key] = value
    for key in ("scenario", "theta_true"):
        if key in header:
            header[key] = json.loads(header[key])

    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    return header, frame, footer
