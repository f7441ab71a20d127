import logging
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from rlsForget.scenarios.traceFile import read_trace


logger = logging.getLogger(__name__)

TINY = 1e-300


def _columns(frame, prefix: str) -> list[str]:
    return [c for c in frame.columns if c.startswith(prefix)]


def _new_axes():
    fig = Figure(figsize=(10, 5))
    return fig, fig.add_subplot()


def _save(fig: Figure, ax, filename: Path, title: str, ylabel: str) -> str:
    ax.set_title(title, fontsize=12, fontweight="bold")
    ax.set_xlabel("k", fontsize=10)
    ax.set_ylabel(ylabel, fontsize=10)
    ax.grid(True, alpha=0.3)
    try:
        logger.debug(f"Saving chart to {filename}")
        fig.savefig(filename, format="svg", bbox_inches="tight")
    except PermissionError as e:
        logger.error(f"Permission denied writing to {filename}")
        raise IOError(f"Permission denied: cannot write to {filename}") from e
    except OSError as e:
        logger.error(f"OS error saving chart to {filename}: {e}")
        raise IOError(f"Cannot save chart to {filename}: {e}") from e
    finally:
        fig.clear()
    return str(filename)


def _semilogy_columns(ax, frame, columns: list[str], transform=np.abs) -> None:
    k = frame["k"].to_numpy()
    for c in columns:
        ax.semilogy(k, np.maximum(transform(frame[c].to_numpy()), TINY), linewidth=1.0, label=c)
    if 1 < len(columns) <= 12:
        ax.legend(loc="best", fontsize=7)


def render_plots(csv_path: str, out_dir: str | None = None) -> list[str]:
    """
    SVG charts derived from a trace CSV alone.

    Draws the singular values and condition number of P_k, the predicted error,
    the parameter-error norm (when the header carries theta_true) and the
    information content (when psi columns are present).

    Returns:
        paths of the written SVG files
    """
    header, frame, footer = read_trace(csv_path)
    source = Path(csv_path)
    target = Path(out_dir) if out_dir else source.parent
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create plot directory {target}")
        raise IOError(f"Cannot create directory for plots: {target}") from e

    name = header.get("scenario", {}).get("name", source.stem)
    stem = target / source.stem
    logger.info(f"Rendering plots for {name} from {csv_path}")
    written = []

    fig, ax = _new_axes()
    _semilogy_columns(ax, frame, _columns(frame, "sigmaP_"))
    written.append(_save(fig, ax, Path(f"{stem}_sigmaP.svg"), f"{name}: singular values of P_k", "sigma(P_k)"))

    fig, ax = _new_axes()
    _semilogy_columns(ax, frame, ["kappaP"])
    written.append(_save(fig, ax, Path(f"{stem}_kappaP.svg"), f"{name}: condition number of P_k", "kappa(P_k)"))

    fig, ax = _new_axes()
    _semilogy_columns(ax, frame, _columns(frame, "z_"))
    written.append(_save(fig, ax, Path(f"{stem}_z.svg"), f"{name}: predicted error", "|z_k|"))

    theta_true = header.get("theta_true")
    if theta_true is not None:
        theta = frame[_columns(frame, "theta_")].to_numpy()
        err = np.linalg.norm(theta - np.asarray(theta_true), axis=1)
        fig, ax = _new_axes()
        ax.semilogy(frame["k"].to_numpy(), np.maximum(err, TINY), linewidth=1.0)
        written.append(_save(fig, ax, Path(f"{stem}_theta_err.svg"), f"{name}: parameter error", "|theta_k - theta|"))

    psi = _columns(frame, "psi_")
    if psi:
        fig, ax = _new_axes()
        _semilogy_columns(ax, frame, psi)
        written.append(_save(fig, ax, Path(f"{stem}_psi.svg"), f"{name}: information content", "|col_i(psi_k)|"))

    if footer:
        logger.warning(f"{name}: trace ends with {footer[-1]}")
    logger.info(f"Wrote {len(written)} charts to {target}")
    return written
