"""Result tables and the run manifest with SHA-256 digests of every artifact."""

import hashlib
import json
import logging
import os
import platform
from datetime import datetime, timezone

import numpy as np
import pandas as pd
import scipy

from database.outputs_store import FLOAT_FORMAT, ensure_parent
from models import DataFormatError

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def write_table(frame, path):
    """Write a tidy table; missing values are left empty."""
    ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def read_table(path):
    if not os.path.exists(path):
        raise DataFormatError(f"file not found: {path}")
    return pd.read_csv(path, float_precision="round_trip")


def file_digest(path):
    sha256_hash = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            sha256_hash.update(chunk)
    return sha256_hash.hexdigest()


def package_versions():
    from config import VERSION

    return {
        "sensimap": VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def write_manifest(out_dir, command, config, seeds, timings, artifacts, extra=None):
    """
    Write manifest.json describing a run.

    :param command: CLI verb that produced the artifacts.
    :param config: echo of the resolved configuration (plain dict).
    :param seeds: master seed and derived stream descriptions.
    :param timings: wall-clock seconds per stage.
    :param artifacts: file names relative to out_dir.
    """
    manifest = {
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(),
        "config": config,
        "seeds": seeds,
        "versions": package_versions(),
        "timings": timings,
        "artifacts": {name: file_digest(os.path.join(out_dir, name)) for name in sorted(artifacts)},
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, MANIFEST)
    ensure_parent(path)
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, default=str)
    return manifest


def load_manifest(out_dir):
    path = os.path.join(out_dir, MANIFEST)
    if not os.path.exists(path):
        raise DataFormatError(f"no {MANIFEST} in {out_dir}")
    with open(path) as f:
        return json.load(f)


def verify_manifest(out_dir):
    """Recompute every artifact digest; raise DataFormatError on a missing or altered file."""
    manifest = load_manifest(out_dir)
    for name, stored in manifest["artifacts"].items():
        path = os.path.join(out_dir, name)
        if not os.path.exists(path):
            raise DataFormatError(f"artifact missing from {out_dir}: {name}")
        if file_digest(path) != stored:
            raise DataFormatError(f"artifact digest mismatch: {name}")
    return True
