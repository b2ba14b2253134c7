from dataclasses import asdict, fields
from enum import Enum

import numpy as np


class BaseModel:
    """Common helpers for the frozen dataclasses of the package."""

    def to_dict(self):
        """Plain-python view of the record (arrays become nested lists)."""
        record = {}
        for key, value in asdict(self).items():
            if key.startswith("_"):
                continue
            if isinstance(value, np.ndarray):
                value = value.tolist()
            elif isinstance(value, Enum):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            record[key] = value
        return record

    def replace(self, **changes):
        values = {field.name: getattr(self, field.name) for field in fields(self) if field.init}
        values.update(changes)
        return type(self)(**values)
