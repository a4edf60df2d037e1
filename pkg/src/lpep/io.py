"""CSV input/output for datasets."""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .glm import Dataset
from .priors import FIXED, HYPER_G_N, ROBUST, DeltaPrior, ModelPrior
from .sampler import McmcConfig

DELTA_KINDS = {"fixed": FIXED, "hyper-gn": HYPER_G_N, "hyper-g/n": HYPER_G_N, "robust": ROBUST}


def _resolve_response(header, response_column):
    if response_column is None:
        return header.index("y") if "y" in header else len(header) - 1
    if isinstance(response_column, int) or str(response_column).lstrip("-").isdigit():
        idx = int(response_column)
        if not -len(header) <= idx < len(header):
            raise DataError(f"response column index {idx} out of range")
        return idx % len(header)
    if response_column not in header:
        raise DataError(f"response column {response_column!r} not found in header")
    return header.index(response_column)


def load_csv(path, response_column=None, standardize=False):
    """Read a header-first CSV into a :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
    response_column : str or int, optional
        Name or 0-based index of the binary response. Defaults to a column
        named ``y``, else the last column.
    standardize : bool
        Center and scale each covariate (the intercept is added afterwards).

    Raises
    ------
    DataError
        With row/column context for non-numeric cells, a non-binary
        response, ragged rows or a rank-deficient design.
    """
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            vals = []
            for name, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: column {name!r}: non-numeric value {cell!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.array(rows)
    if not np.all(np.isfinite(table)):
        r, c = np.argwhere(~np.isfinite(table))[0]
        raise DataError(f"{path}:{r + 2}: column {header[c]!r}: non-finite value")

    ridx = _resolve_response(header, response_column)
    y = table[:, ridx]
    bad = np.flatnonzero((y != 0) & (y != 1))
    if bad.size:
        raise DataError(
            f"{path}:{bad[0] + 2}: response column {header[ridx]!r} must be 0/1, "
            f"got {y[bad[0]]:g}"
        )
    keep = [j for j in range(len(header)) if j != ridx]
    Z = table[:, keep]
    if standardize and Z.shape[1]:
        sd = Z.std(axis=0, ddof=1)
        if np.any(sd == 0):
            j = keep[int(np.flatnonzero(sd == 0)[0])]
            raise DataError(f"column {header[j]!r} is constant; cannot standardize")
        Z = (Z - Z.mean(axis=0)) / sd
    X = np.column_stack([np.ones(len(y)), Z])
    data = Dataset(y=y, X=X, column_names=[header[j] for j in keep])
    try:
        data.check_rank()
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None
    return data


def write_csv(path, data, response_name="y"):
    """Write a dataset as ``covariates..., response`` with full float precision."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(data.column_names) + [response_name])
        for xi, yi in zip(data.X[:, 1:], data.y):
            w.writerow([repr(float(v)) for v in xi] + [str(int(yi))])


def bundled_path(name):
    """Path of a dataset shipped with the package (e.g. ``"endometrial.csv"``)."""
    return Path(__file__).parent / "data" / name


@dataclass
class RunConfig:
    """Everything ``lpep fit`` needs; validated on construction."""

    input_path: str
    response_column: object = None
    delta_prior: str = "fixed"
    model_prior: tuple = (1.0, 1.0)
    iterations: int = 131072
    burn_in: int = 10000
    chains: int = 1
    seed: int = 0
    standardize: bool = False
    output_path: str | None = None
    draw_log: str | None = None

    def __post_init__(self):
        if self.delta_prior not in DELTA_KINDS:
            raise ConfigError(
                f"delta prior must be one of {sorted(DELTA_KINDS)}, got {self.delta_prior!r}"
            )
        if not self.iterations > self.burn_in >= 0:
            raise ConfigError("need iterations > burn_in >= 0")
        if self.chains < 1:
            raise ConfigError("chains must be >= 1")
        a, b = self.model_prior
        if not (a > 0 and b > 0):
            raise ConfigError("model prior parameters must be positive")

    def mcmc_config(self, n):
        return McmcConfig(
            delta_prior=DeltaPrior(DELTA_KINDS[self.delta_prior], n),
            model_prior=ModelPrior(*self.model_prior),
            iterations=self.iterations,
            burn_in=self.burn_in,
            seed=self.seed,
        )


def _jsonable(obj):
    # strict JSON has no NaN/inf; write null instead
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(obj, path=None):
    """Pretty JSON to ``path``, or to stdout when ``path`` is None.

    Non-finite floats become ``null``.
    """
    text = json.dumps(_jsonable(obj), indent=2, allow_nan=False)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def write_metrics_csv(rows, fields, path=None):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
