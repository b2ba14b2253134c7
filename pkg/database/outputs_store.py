"""CSV exchange of designs of experiments and functional outputs."""

import logging
import os

import numpy as np
import pandas as pd

from models import DataFormatError, DesignMatrix, DimensionMismatchError, FunctionalOutputs

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def read_numeric_frame(path, header):
    if not os.path.exists(path):
        raise DataFormatError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, header=0 if header else None, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as error:
        raise DataFormatError(f"{path}: ragged rows ({error})") from None
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"{path}: file is empty") from None
    if frame.empty:
        raise DataFormatError(f"{path}: no data rows")

    try:
        return frame, frame.to_numpy(dtype=object).astype(float)
    except ValueError:
        pass
    bad = frame.apply(pd.to_numeric, errors="coerce").isna().to_numpy()
    if bad.any():
        row, col = np.argwhere(bad)[0]
        cell = frame.iat[row, col]
        line = row + (2 if header else 1)
        if cell == "":
            raise DataFormatError(f"{path}:{line}: ragged row or empty cell in column {col + 1}")
        raise DataFormatError(f"{path}:{line}: non-numeric cell '{cell}' in column {col + 1}")
    raise DataFormatError(f"{path}: cells could not be read as numbers")


def detect_header(path, design=None):
    """
    Whether the first row of an outputs file is a header.

    A row with a non-numeric cell is a header. An all-numeric first row is a grid header
    when the file has one row more than the design, and data when it has as many.
    """
    if not os.path.exists(path):
        raise DataFormatError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError):
        return True
    if pd.to_numeric(frame.iloc[0], errors="coerce").isna().any():
        return True
    if design is not None and len(frame) == design.size + 1:
        return True
    if design is not None and len(frame) == design.size:
        return False
    raise DataFormatError(f"{path}: cannot tell whether the numeric first row is a header; set [data] header")


def read_outputs(path, design=None, header=None):
    """
    Read an n x m output matrix, one row per design point.

    :param path: CSV file.
    :param design: optional DesignMatrix whose row count must match.
    :param header: whether the first row is a header; a numeric header is read as the output
        grid. None detects it (see ``detect_header``).
    :return: FunctionalOutputs.
    """
    if header is None:
        header = detect_header(path, design)
        logger.info("%s: first row read as %s", path, "a header" if header else "data")
    frame, values = read_numeric_frame(path, header)
    grid = None
    if header:
        try:
            grid = np.array([float(label) for label in frame.columns])
        except ValueError:
            grid = None
    outputs = FunctionalOutputs(values, grid)
    if design is not None:
        if design.size != outputs.size:
            message = f"{path}: {outputs.size} output rows for a design of {design.size} points"
            if header and outputs.size == design.size - 1:
                message += "; is the first row data? set [data] header = false"
            raise DimensionMismatchError(message)
    logger.debug("read %d x %d outputs from %s", outputs.size, outputs.width, path)
    return outputs


def write_outputs(outputs, path):
    """Write outputs at full double precision, grid coordinates as header when available."""
    if outputs.grid is not None:
        columns = [FLOAT_FORMAT % value for value in outputs.grid]
    else:
        columns = [f"y{i + 1}" for i in range(outputs.width)]
    frame = pd.DataFrame(outputs.values, columns=columns)
    ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_design(path, space):
    """Read doe.csv; columns are matched to the input space by variable name."""
    frame, values = read_numeric_frame(path, header=True)
    columns = [str(column).strip() for column in frame.columns]
    if set(columns) == set(space.names):
        order = [columns.index(name) for name in space.names]
        values = values[:, order]
    elif len(columns) != space.dims:
        raise DimensionMismatchError(f"{path}: {len(columns)} columns for {space.dims} input variables")
    else:
        logger.warning("%s: header %s does not name the variables %s, using column order", path, columns, space.names)
    return DesignMatrix(values, space)


def write_design(design, path):
    frame = pd.DataFrame(design.points, columns=list(design.space.names))
    ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
