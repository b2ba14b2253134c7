import numpy as np
import pytest

from models import (
    BasisCriterion,
    BasisExpansion,
    FunctionalOutputs,
    GpOptions,
    InputSpace,
    TestModel,
    TestModelKind,
)
from services.basis import fit_pca
from services.gp import fit_vector_gp
from services.sampling import lhs_sample
from services.test_models import eval_test_model

FAST_GP = GpOptions(starts=2, max_iter=100)


@pytest.fixture(scope="session")
def square():
    return InputSpace.unit(2)


@pytest.fixture(scope="session")
def cube():
    return InputSpace(("a", "b", "c"), [[0.0, 1.0], [-1.0, 1.0], [2.0, 5.0]])


@pytest.fixture(scope="session")
def additive_data(square):
    design = lhs_sample(square, 40, seed=11)
    outputs = eval_test_model(TestModel(TestModelKind.ADDITIVE_SINE, output_dims=30), design)
    return design, outputs


@pytest.fixture(scope="session")
def additive_surrogates(additive_data):
    design, outputs = additive_data
    expansion = fit_pca(outputs, BasisCriterion.variance(0.9999))
    vgp = fit_vector_gp(design, expansion.coefficients, FAST_GP)
    return expansion, vgp


@pytest.fixture(scope="session")
def random_data(cube):
    """Smooth rank-4 functional outputs of 3 inputs on 50 output dimensions."""
    rng = np.random.default_rng(2024)
    design = lhs_sample(cube, 40, seed=5)
    weights = rng.normal(size=(3, 4))
    loadings = rng.normal(size=(4, 50))
    unit = (design.points - cube.lower) / cube.ranges
    outputs = FunctionalOutputs(np.sin(2.0 * unit @ weights) @ loadings)
    return design, outputs


@pytest.fixture(scope="session")
def random_surrogates(random_data):
    design, outputs = random_data
    expansion = fit_pca(outputs, BasisCriterion.fixed(4))
    vgp = fit_vector_gp(design, expansion.coefficients, FAST_GP)
    return expansion, vgp


@pytest.fixture
def skewed_basis():
    """Non-orthonormal 3 x 7 basis with its expansion wrapper."""
    rng = np.random.default_rng(3)
    components = rng.normal(size=(3, 7))
    coefficients = rng.normal(size=(12, 3))
    return BasisExpansion(np.zeros(7), components, coefficients)


SMALL_INI = """\
[pipeline]
version = 1
seed = 3

[data]
source = model
model = additive-sine
grid_size = 16
n = 24

[basis]
threshold = 0.9999

[gp]
starts = 2
max_iter = 50

[analysis]
indices = closed, total
n_pf = 40
n_z = 2
n_x = 3

[sweep]
doe_sizes = 12, 24
n_pf_values = 30, 40

[validation]
count = 6
n_z = 4

[bench]
grid_size = 64
components = 3
n_pf = 30
n_z = 2
n_x = 2
"""


@pytest.fixture
def small_config(tmp_path):
    """Path of a fast additive-sine pipeline file inside tmp_path."""
    path = tmp_path / "small.ini"
    path.write_text(SMALL_INI)
    return str(path)
