"""Dataset ingestion and result export.

CSV files carry a header row naming the columns and a numeric body; the
response column is named at load time and removed from the factors.
Numeric output uses 17 significant digits so round-trips are exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .data import Dataset
from .demo import wald_table
from .errors import EmptyFile, IoError, MissingColumn, NonNumericCell
from .joint import JointFit

FLOAT_FORMAT = "%.17g"


def load_dataset_csv(path, response_column: str, binomial_index: int | None = None) -> Dataset:
    """Read a comma-separated dataset with a header row.

    Raises ``MissingColumn`` if the response column is absent,
    ``NonNumericCell`` (with 1-based row/column) for blank or non-numeric
    body cells and ``EmptyFile`` when there is no header or no data.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyFile(f"{path}: no header row")
    header = [cell.strip() for cell in rows[0]]
    if len(rows) == 1:
        raise EmptyFile(f"{path}: no data rows")
    if response_column not in header:
        raise MissingColumn(f"{path}: response column {response_column!r} not found")

    body = np.empty((len(rows) - 1, len(header)), dtype=np.float64)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise NonNumericCell(
                f"{path}: row {i} has {len(row)} cells, expected {len(header)}", row=i
            )
        for j, cell in enumerate(row):
            try:
                body[i - 2, j] = float(cell)
            except ValueError:
                raise NonNumericCell(
                    f"{path}: cell ({i}, {j + 1}) is not numeric: {cell!r}",
                    row=i,
                    col=j + 1,
                ) from None

    resp_idx = header.index(response_column)
    factors = {
        name: body[:, j] for j, name in enumerate(header) if j != resp_idx
    }
    return Dataset(
        response=body[:, resp_idx], factors=factors, binomial_index=binomial_index
    )


def write_dataset_csv(dataset: Dataset, path, response_column: str = "y") -> None:
    """Write a dataset back out; numeric cells keep full precision."""
    path = Path(path)
    names = [response_column, *dataset.factors.keys()]
    cols = [dataset.response, *dataset.factors.values()]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for i in range(dataset.n):
            writer.writerow([FLOAT_FORMAT % col[i] for col in cols])


def diagnostics_bundle(fit: JointFit) -> dict:
    """Per-observation diagnostics for both sub-models.

    Mean-model residuals are deviance residuals scaled by sqrt(phi);
    dispersion-model residuals are its Gamma deviance residuals.
    """
    mean_fit = fit.mean_fit
    disp_fit = fit.disp_fit
    sign_m = np.sign(mean_fit.response - mean_fit.fitted_means)
    sign_d = np.sign(disp_fit.response - disp_fit.fitted_means)
    return {
        "mean_fitted": mean_fit.fitted_means,
        "mean_std_residual": sign_m
        * np.sqrt(mean_fit.deviance_components)
        / np.sqrt(fit.phi_hat),
        "mean_hat": mean_fit.hat_values,
        "phi_hat": fit.phi_hat,
        "d_star": fit.std_deviance,
        "disp_fitted": disp_fit.fitted_means,
        "disp_std_residual": sign_d * np.sqrt(disp_fit.deviance_components),
        "disp_hat": disp_fit.hat_values,
    }


def export_diagnostics(fit: JointFit, path) -> Path:
    """Write per-observation diagnostics as CSV plus a JSON sidecar.

    The sidecar carries the Wald coefficient tables of both sub-models
    (estimate, standard error, t value, two-sided p value).  Returns the
    sidecar path.
    """
    path = Path(path)
    bundle = diagnostics_bundle(fit)
    names = list(bundle)
    try:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(names)
            n = len(bundle["phi_hat"])
            for i in range(n):
                writer.writerow([FLOAT_FORMAT % bundle[name][i] for name in names])
        sidecar = path.with_suffix(path.suffix + ".json")
        payload = {
            "mean_coefficients": wald_table(fit.mean_fit),
            "dispersion_coefficients": wald_table(fit.disp_fit),
            "eql": fit.eql,
            "converged": fit.converged,
            "outer_iterations": fit.outer_iterations,
        }
        sidecar.write_text(json.dumps(payload, sort_keys=True, indent=2), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write diagnostics to {path}: {exc}") from exc
    return sidecar


def load_diagnostics_csv(path) -> dict:
    """Reload an exported diagnostics CSV into named vectors."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = list(reader)
    if len(rows) < 2:
        raise EmptyFile(f"{path}: no diagnostics rows")
    header = rows[0]
    body = np.array([[float(c) for c in row] for row in rows[1:]], dtype=np.float64)
    return {name: body[:, j] for j, name in enumerate(header)}
