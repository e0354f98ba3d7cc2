"""The built-in injection-molding experiment.

Eight runs of a 2^(7-4) design in seven controllable factors (A..G), each
observed under the four noise settings of a 2^(3-1) design in M, N, O.
The response is percent shrinkage.  Row order is run-major: the four
noise cells of run 1, then run 2, and so on.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .data import Dataset

CONTROLLABLE = ("A", "B", "C", "D", "E", "F", "G")
NOISE = ("M", "N", "O")

_RUNS = np.array(
    [
        [-1, -1, -1, -1, -1, -1, -1],
        [-1, -1, -1, 1, 1, 1, 1],
        [-1, 1, 1, -1, -1, 1, 1],
        [-1, 1, 1, 1, 1, -1, -1],
        [1, -1, 1, -1, 1, -1, 1],
        [1, -1, 1, 1, -1, 1, -1],
        [1, 1, -1, -1, 1, 1, -1],
        [1, 1, -1, 1, -1, -1, 1],
    ],
    dtype=np.float64,
)

_NOISE_CELLS = np.array(
    [
        [-1, -1, -1],
        [-1, 1, 1],
        [1, -1, 1],
        [1, 1, -1],
    ],
    dtype=np.float64,
)

_SHRINKAGE = np.array(
    [
        [2.2, 2.1, 2.3, 2.3],
        [2.5, 0.3, 2.7, 0.3],
        [0.5, 3.1, 0.4, 2.8],
        [2.0, 1.9, 1.8, 2.0],
        [3.0, 3.1, 3.0, 3.0],
        [2.1, 4.2, 1.0, 3.1],
        [4.0, 1.9, 4.6, 2.2],
        [2.0, 1.9, 1.9, 1.8],
    ],
    dtype=np.float64,
)


def injection_molding_dataset() -> dict:
    """Return the demo dataset plus its default candidate pools.

    The mean pool holds the controllable and noise main effects plus all
    21 controllable-by-noise interactions; the dispersion pool holds the
    controllable main effects.
    """
    n_runs, n_cells = _SHRINKAGE.shape
    y = _SHRINKAGE.reshape(-1)
    factors: dict[str, np.ndarray] = {}
    for j, name in enumerate(CONTROLLABLE):
        factors[name] = np.repeat(_RUNS[:, j], n_cells)
    for j, name in enumerate(NOISE):
        factors[name] = np.tile(_NOISE_CELLS[:, j], n_runs)
    dataset = Dataset(response=y, factors=factors)

    mean_pool = list(CONTROLLABLE) + list(NOISE)
    mean_pool += [c + z for c in CONTROLLABLE for z in NOISE]
    disp_pool = list(CONTROLLABLE)
    return {
        "dataset": dataset,
        "mean_pool": tuple(mean_pool),
        "disp_pool": tuple(disp_pool),
    }


def injection_molding_csv_text() -> str:
    """The same data as CSV text (header y,A..G,M,N,O)."""
    header = ",".join(("y",) + CONTROLLABLE + NOISE)
    data = injection_molding_dataset()["dataset"]
    lines = [header]
    cols = [data.response] + [data.factors[name] for name in CONTROLLABLE + NOISE]
    for i in range(data.n):
        cells = [f"{cols[0][i]:.1f}"] + [f"{int(c[i])}" for c in cols[1:]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def injection_molding_csv_path():
    """Path of the CSV copy shipped inside the package."""
    return resources.files("jmmd").joinpath("data/injection_molding.csv")
