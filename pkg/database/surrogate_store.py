"""Fitted coefficient surrogates, stored as hyperparameters next to their design and basis."""

import json
import logging
import os

from database.expansion_store import load_expansion, save_expansion
from database.outputs_store import read_design, write_design
from models import DataFormatError, InputSpace, KernelParams, VectorGp
from services.gp import condition

logger = logging.getLogger(__name__)

MANIFEST = "surrogates.json"


def save_surrogates(vgp, expansion, directory):
    """
    Persist a VectorGp: doe.csv, the expansion directory and surrogates.json.

    Cholesky factors are not stored; loading rebuilds them from the hyperparameters.
    """
    os.makedirs(directory, exist_ok=True)
    write_design(vgp.design, os.path.join(directory, "doe.csv"))
    save_expansion(expansion, os.path.join(directory, "expansion"))
    record = {
        "design": "doe.csv",
        "expansion": "expansion",
        "space": {"names": list(vgp.design.space.names), "bounds": vgp.design.space.bounds.tolist()},
        "surrogates": [
            {
                "lengthscales": surrogate.params.lengthscales.tolist(),
                "signal_variance": surrogate.params.signal_variance,
                "nugget": surrogate.params.nugget,
                "log_likelihood": surrogate.log_likelihood,
                "jitter": surrogate.jitter,
            }
            for surrogate in vgp
        ],
    }
    with open(os.path.join(directory, MANIFEST), "w") as f:
        json.dump(record, f, indent=2)
    logger.info("saved %d surrogates to %s", len(vgp), directory)
    return directory


def load_surrogates(directory):
    """
    Rebuild (VectorGp, BasisExpansion) without re-optimizing hyperparameters.
    """
    path = os.path.join(directory, MANIFEST)
    if not os.path.exists(path):
        raise DataFormatError(f"no {MANIFEST} in {directory}")
    with open(path) as f:
        record = json.load(f)
    space = InputSpace(tuple(record["space"]["names"]), record["space"]["bounds"])
    design = read_design(os.path.join(directory, record["design"]), space)
    expansion = load_expansion(os.path.join(directory, record["expansion"]))
    entries = record["surrogates"]
    if len(entries) != expansion.n_components or expansion.coefficients.shape[0] != design.size:
        raise DataFormatError(f"{path}: surrogates do not match the stored design and expansion")
    surrogates = tuple(
        condition(
            KernelParams(entry["lengthscales"], entry["signal_variance"], entry["nugget"]),
            design,
            expansion.coefficients[:, q],
            entry["log_likelihood"],
        )
        for q, entry in enumerate(entries)
    )
    return VectorGp(surrogates), expansion
