"""Basis expansions on disk: one directory of CSV matrices plus a JSON header."""

import json
import logging
import os

import pandas as pd

from database.outputs_store import FLOAT_FORMAT, read_numeric_frame
from models import BasisExpansion, DataFormatError

logger = logging.getLogger(__name__)

HEADER = "expansion.json"


def _write_matrix(matrix, path):
    pd.DataFrame(matrix).to_csv(path, index=False, header=False, float_format=FLOAT_FORMAT)


def _read_matrix(path):
    _, values = read_numeric_frame(path, header=False)
    return values


def save_expansion(expansion, directory):
    """Write mean.csv, components.csv, coefficients.csv and expansion.json."""
    os.makedirs(directory, exist_ok=True)
    _write_matrix(expansion.mean[None, :], os.path.join(directory, "mean.csv"))
    _write_matrix(expansion.components, os.path.join(directory, "components.csv"))
    _write_matrix(expansion.coefficients, os.path.join(directory, "coefficients.csv"))
    header = {
        "n_components": expansion.n_components,
        "width": expansion.width,
        "explained_ratio": expansion.explained_ratio,
        "total_energy": expansion.total_energy,
        "grid": None if expansion.grid is None else expansion.grid.tolist(),
    }
    with open(os.path.join(directory, HEADER), "w") as f:
        json.dump(header, f, indent=2)
    logger.info("saved %d-component expansion to %s", expansion.n_components, directory)
    return directory


def load_expansion(directory):
    path = os.path.join(directory, HEADER)
    if not os.path.exists(path):
        raise DataFormatError(f"no {HEADER} in {directory}")
    with open(path) as f:
        header = json.load(f)
    expansion = BasisExpansion(
        _read_matrix(os.path.join(directory, "mean.csv"))[0],
        _read_matrix(os.path.join(directory, "components.csv")),
        _read_matrix(os.path.join(directory, "coefficients.csv")),
        header["explained_ratio"],
        header["total_energy"],
        header.get("grid"),
    )
    if expansion.n_components != header["n_components"] or expansion.width != header["width"]:
        raise DataFormatError(f"{directory}: matrices do not match the sizes recorded in {HEADER}")
    return expansion
