"""Designs of experiments and the seed contract shared by every random stream."""

import logging

import numpy as np
from scipy.stats import qmc

from models import DesignMatrix, InvalidDesignError

logger = logging.getLogger(__name__)

# Leading spawn-key entry of each random stream.
STREAM_DESIGN = 1
STREAM_BOOTSTRAP = 2
STREAM_TRAJECTORY = 3
STREAM_VALIDATION = 4
STREAM_DOE = 5
STREAM_BENCH = 6


def derive_seed(master_seed, *keys):
    """
    Derive an independent, reproducible seed from the master seed and integer keys.

    :param master_seed: non-negative run seed.
    :param keys: integer coordinates of the stream (stream id, index-set mask, b, q, j...).
    :return: numpy SeedSequence usable by np.random.default_rng.
    """
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(key) for key in keys))


def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def lhs_sample(space, n, seed):
    """
    Plain (non-optimized) Latin hypercube sample of the input space.

    Each column holds one value in each of the n equiprobable strata, in random order.
    """
    if n < 2:
        raise InvalidDesignError(f"a Latin hypercube needs n >= 2 points, got {n}")
    sampler = qmc.LatinHypercube(d=space.dims, scramble=True, optimization=None, seed=make_rng(seed))
    return DesignMatrix(space.scale(sampler.random(n)), space)


def mc_sample(space, n, seed):
    """i.i.d. uniform draws inside the bounds."""
    if n < 1:
        raise InvalidDesignError(f"a Monte Carlo sample needs n >= 1 points, got {n}")
    unit = make_rng(seed).random((n, space.dims))
    return DesignMatrix(space.scale(unit), space)


def sample_design(space, n, method, seed):
    if method == "lhs":
        return lhs_sample(space, n, seed)
    if method == "mc":
        return mc_sample(space, n, seed)
    raise InvalidDesignError(f"unknown design method '{method}', expected 'lhs' or 'mc'")
