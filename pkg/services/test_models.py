import logging

import numpy as np

from models import DimensionMismatchError, FunctionalOutputs, TestModelKind

logger = logging.getLogger(__name__)


def output_grid(m):
    """Uniform grid of m time stamps on [0, 2 pi]."""
    return np.linspace(0.0, 2.0 * np.pi, m)


def eval_test_model(model, points):
    """
    Evaluate a built-in functional model on a design.

    additive-sine:  y_l(x) = cos(t_l) x1 + sin(t_l) x2
    interaction:    additive-sine + c x1 x2
    table:          rows of a stored output matrix, one per design point

    :param model: TestModel.
    :param points: DesignMatrix whose dimension matches the model.
    :return: FunctionalOutputs with the time grid attached.
    """
    if points.space.dims != model.dims:
        raise DimensionMismatchError(f"model expects {model.dims} inputs, design has {points.space.dims}")

    if model.kind is TestModelKind.EXTERNAL_TABLE:
        from database.outputs_store import read_outputs

        table = read_outputs(model.table_path, design=points)
        return table

    if model.dims != 2:
        raise DimensionMismatchError(f"analytical models take 2 inputs, got d={model.dims}")

    grid = output_grid(model.output_dims)
    x1 = points.points[:, [0]]
    x2 = points.points[:, [1]]
    values = x1 * np.cos(grid)[None, :] + x2 * np.sin(grid)[None, :]
    if model.kind is TestModelKind.INTERACTION:
        values = values + model.interaction * x1 * x2
    return FunctionalOutputs(values, grid)


def additive_sine_first_order(grid):
    """Analytical first-order Sobol map of x1 for the additive-sine model (x_i ~ U(0, 1))."""
    return np.cos(grid) ** 2


def interaction_indices(grid, c):
    """
    Analytical closed first-order and total maps of (x1, x2) for the interaction model
    with x_i ~ U(0, 1).

    :return: dict with keys 'closed' and 'total', each a (2, m) array.
    """
    # x1 x2 = (x1 - 1/2)(x2 - 1/2) + (x1 + x2)/2 - 1/4; var(x_i) = 1/12
    a = np.cos(grid) + 0.5 * c
    b = np.sin(grid) + 0.5 * c
    var1 = a ** 2 / 12.0
    var2 = b ** 2 / 12.0
    var12 = c ** 2 / 144.0
    total = var1 + var2 + var12
    closed = np.vstack([var1, var2]) / total
    totals = np.vstack([var1 + var12, var2 + var12]) / total
    return {"closed": closed, "total": totals}
