# sensimap configuration (environment defaults, pipeline files, logging)

import configparser
import logging
import logging.config
import os
import re

from dotenv import load_dotenv

from models import (
    BasisCriterion,
    BenchOptions,
    ConfigError,
    CovarianceMode,
    GpOptions,
    IndexKind,
    IndexSet,
    InputSpace,
    InvalidDesignError,
    PipelineConfig,
    RunConfig,
    SamplingMode,
    TestModel,
    TestModelKind,
)

load_dotenv()

VERSION = "1.0.0"
CONFIG_DIALECT = 1
BASE_DIR = os.path.dirname(os.path.abspath(__file__))


def _env_number(name, default, cast):
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return cast(value)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be a number, got '{value}'") from None


class Config:
    THREADS = _env_number("SENSIMAP_THREADS", 1, int)
    MEMORY_BUDGET_MB = _env_number("SENSIMAP_MEMORY_BUDGET_MB", 2048.0, float)
    LOG_CONFIG = os.getenv("SENSIMAP_LOG_CONFIG", os.path.join(BASE_DIR, "logging.ini"))
    LOG_LEVEL = os.getenv("SENSIMAP_LOG_LEVEL")
    OUTPUT_DIR = os.getenv("SENSIMAP_OUTPUT_DIR", "results")


def setup_logging(level=None, path=None):
    """Configure logging from logging.ini; ``level`` overrides the root level."""
    path = path or Config.LOG_CONFIG
    if path and os.path.exists(path):
        logging.config.fileConfig(path, disable_existing_loggers=False)
    else:
        logging.basicConfig(format="%(levelname)-5.5s [%(name)s] %(message)s")
    level = level or Config.LOG_LEVEL
    if level:
        logging.getLogger().setLevel(str(level).upper())


SECTIONS = {
    "pipeline": {"version", "seed", "output_dir", "threads", "surrogates"},
    "space": None,
    "data": {"source", "model", "grid_size", "interaction", "table", "design", "n", "doe", "outputs", "header"},
    "basis": {"criterion", "threshold", "components"},
    "gp": {"starts", "max_iter"},
    "analysis": {"variables", "indices", "n_pf", "n_z", "n_x", "mode", "covariance", "memory_budget_mb"},
    "sweep": {"doe_sizes", "n_pf_values"},
    "validation": {"count", "indices", "training", "n_z"},
    "bench": {"grid_size", "components", "n_pf", "n_z", "n_x"},
}


class IniReader:
    """configparser wrapper whose errors point at the offending line."""

    def __init__(self, path):
        if not os.path.exists(path):
            raise ConfigError("configuration file not found", path)
        self.path = path
        with open(path) as f:
            self.text = f.read()
        self.lines = self.text.splitlines()
        self.parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
        self.parser.optionxform = str
        try:
            self.parser.read_string(self.text, source=path)
        except configparser.DuplicateOptionError as error:
            raise ConfigError(f"[{error.section}] duplicate key '{error.option}'", path, error.lineno) from None
        except configparser.DuplicateSectionError as error:
            raise ConfigError(f"duplicate section [{error.section}]", path, error.lineno) from None
        except configparser.MissingSectionHeaderError as error:
            raise ConfigError("key outside of any [section]", path, error.lineno) from None
        except configparser.ParsingError as error:
            line = error.errors[0][0] if error.errors else None
            raise ConfigError("malformed line", path, line) from None
        self._check_names()

    def line(self, section, key=None):
        """1-based line of ``[section]`` or of ``key`` inside it."""
        header = re.compile(r"^\s*\[\s*" + re.escape(section) + r"\s*\]")
        any_header = re.compile(r"^\s*\[")
        entry = re.compile(r"^\s*" + re.escape(key) + r"\s*[=:]") if key is not None else None
        inside = False
        for number, text in enumerate(self.lines, start=1):
            if header.match(text):
                if entry is None:
                    return number
                inside = True
            elif any_header.match(text):
                inside = False
            elif inside and entry.match(text):
                return number
        return None

    def error(self, message, section, key=None):
        where = f"[{section}] {key}" if key is not None else f"[{section}]"
        return ConfigError(f"{where} {message}", self.path, self.line(section, key))

    def _check_names(self):
        for section in self.parser.sections():
            if section not in SECTIONS:
                raise self.error(f"is not a known section, expected one of {sorted(SECTIONS)}", section)
            known = SECTIONS[section]
            if known is None:
                continue
            for key in self.parser[section]:
                if key not in known:
                    raise self.error(f"is not a known key, expected one of {sorted(known)}", section, key)

    def has(self, section, key=None):
        if not self.parser.has_section(section):
            return False
        return key is None or self.parser.has_option(section, key)

    def raw(self, section, key, default=None):
        if not self.has(section, key):
            return default
        value = self.parser[section][key].strip()
        if value == "":
            raise self.error("has an empty value", section, key)
        return value

    def integer(self, section, key, default=None, minimum=None):
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            number = int(value)
        except ValueError:
            number = None
        if number is None or (minimum is not None and number < minimum):
            bound = f" >= {minimum}" if minimum is not None else ""
            raise self.error(f"must be an integer{bound}, got '{value}'", section, key)
        return number

    def number(self, section, key, default=None, positive=False):
        value = self.raw(section, key)
        if value is None:
            return default
        try:
            number = float(value)
        except ValueError:
            raise self.error(f"must be a number, got '{value}'", section, key) from None
        if positive and not number > 0:
            raise self.error(f"must be positive, got '{value}'", section, key)
        return number

    def boolean(self, section, key, default=None):
        if not self.has(section, key):
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise self.error(f"must be true or false, got '{self.raw(section, key)}'", section, key) from None

    def choice(self, section, key, choices, default=None):
        value = self.raw(section, key)
        if value is None:
            return default
        if value.lower() not in choices:
            raise self.error(f"must be one of {list(choices)}, got '{value}'", section, key)
        return value.lower()

    def items(self, section, key, default=()):
        value = self.raw(section, key)
        if value is None:
            return tuple(default)
        return tuple(item.strip() for item in value.split(",") if item.strip())

    def integers(self, section, key, minimum=None):
        values = []
        for item in self.items(section, key):
            try:
                number = int(item)
            except ValueError:
                number = None
            if number is None or (minimum is not None and number < minimum):
                bound = f" >= {minimum}" if minimum is not None else ""
                raise self.error(f"must list integers{bound}, got '{item}'", section, key)
            values.append(number)
        return tuple(values)

    def path_value(self, section, key):
        value = self.raw(section, key)
        if value is None:
            return None
        if os.path.isabs(value):
            return value
        return os.path.join(os.path.dirname(os.path.abspath(self.path)), value)


def _read_space(reader, model_kind):
    if not reader.has("space") or not list(reader.parser["space"]):
        if model_kind in (TestModelKind.ADDITIVE_SINE, TestModelKind.INTERACTION):
            return InputSpace.unit(2)
        raise ConfigError("[space] must declare at least one variable", reader.path, reader.line("space"))
    names, bounds = [], []
    for name in reader.parser["space"]:
        parts = reader.items("space", name)
        try:
            low, high = (float(part) for part in parts)
        except ValueError:
            raise reader.error("must be 'lower, upper'", "space", name) from None
        if not low < high:
            raise reader.error(f"needs lower < upper, got {low} and {high}", "space", name)
        names.append(name)
        bounds.append((low, high))
    return InputSpace(tuple(names), bounds)


def _read_index_sets(reader, space):
    labels = reader.items("analysis", "variables", default=space.names)
    index_sets = []
    for label in labels:
        try:
            members = [space.index_of(name.strip()) for name in label.split("+")]
            index_sets.append(IndexSet(tuple(members), space.dims))
        except InvalidDesignError as error:
            raise reader.error(str(error), "analysis", "variables") from None
    return tuple(index_sets)


def _read_kinds(reader):
    kinds = []
    for item in reader.items("analysis", "indices", default=("closed",)):
        try:
            kinds.append(IndexKind(item.lower()))
        except ValueError:
            raise reader.error(
                f"must list index kinds among {[kind.value for kind in IndexKind]}, got '{item}'", "analysis", "indices"
            ) from None
    return tuple(dict.fromkeys(kinds))


def _read_model(reader):
    if reader.choice("data", "source", ("model", "csv"), "model") != "model":
        return None
    value = reader.raw("data", "model", "additive-sine")
    try:
        kind = TestModelKind.parse(value)
    except ConfigError as error:
        raise reader.error(str(error), "data", "model") from None
    return kind


def _pick(override, file_value, env_value):
    if override is not None:
        return override
    if file_value is not None:
        return file_value
    return env_value


def load_pipeline_config(path, seed=None, threads=None, mode=None, covariance=None, output_dir=None):
    """
    Read and validate a pipeline INI file.

    Keyword arguments are command-line overrides; they win over the file, which wins
    over the environment (Config), which wins over built-in defaults.

    :return: PipelineConfig.
    """
    reader = IniReader(path)

    version = reader.integer("pipeline", "version", CONFIG_DIALECT)
    if version != CONFIG_DIALECT:
        raise reader.error(f"dialect {version} is not supported, expected {CONFIG_DIALECT}", "pipeline", "version")

    model_kind = _read_model(reader)
    space = _read_space(reader, model_kind)
    source = "model" if model_kind is not None else "csv"

    model = None
    if model_kind is not None:
        if model_kind is not TestModelKind.EXTERNAL_TABLE and space.dims != 2:
            raise ConfigError(
                f"[space] model '{model_kind.value}' takes 2 inputs, got {space.dims}", path, reader.line("space")
            )
        table = reader.path_value("data", "table")
        if model_kind is TestModelKind.EXTERNAL_TABLE and table is None:
            raise reader.error("model 'table' needs a table file", "data", "model")
        model = TestModel(
            model_kind,
            dims=space.dims,
            output_dims=reader.integer("data", "grid_size", 100, minimum=1),
            interaction=reader.number("data", "interaction", 1.0),
            table_path=table,
        )
    elif not (reader.has("data", "doe") and reader.has("data", "outputs")):
        raise reader.error("source 'csv' needs both 'doe' and 'outputs'", "data", "source")

    criterion_name = reader.choice("basis", "criterion", ("threshold", "fixed"), "threshold")
    if criterion_name == "fixed":
        components = reader.integer("basis", "components", None, minimum=1)
        if components is None:
            raise reader.error("criterion 'fixed' needs 'components'", "basis", "criterion")
        criterion = BasisCriterion.fixed(components)
    else:
        threshold = reader.number("basis", "threshold", 0.99)
        if not 0.0 < threshold <= 1.0:
            raise reader.error(f"must lie in (0, 1], got {threshold}", "basis", "threshold")
        criterion = BasisCriterion.variance(threshold)

    gp = GpOptions(
        starts=reader.integer("gp", "starts", 8, minimum=1), max_iter=reader.integer("gp", "max_iter", 200, minimum=1)
    )

    seed = _pick(seed, reader.integer("pipeline", "seed", None, minimum=0), 0)
    threads = _pick(threads, reader.integer("pipeline", "threads", None, minimum=1), Config.THREADS)
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}", path)
    mode = _pick(mode, reader.choice("analysis", "mode", [m.value for m in SamplingMode]), SamplingMode.BATCH.value)
    covariance = _pick(
        covariance, reader.choice("analysis", "covariance", [c.value for c in CovarianceMode]), CovarianceMode.EMPIRICAL.value
    )
    try:
        run = RunConfig(
            n_pf=reader.integer("analysis", "n_pf", 1000, minimum=2),
            n_z=reader.integer("analysis", "n_z", 50, minimum=1),
            n_x=reader.integer("analysis", "n_x", 20, minimum=1),
            kinds=_read_kinds(reader),
            mode=SamplingMode(mode),
            covariance=CovarianceMode(covariance),
            seed=int(seed),
            threads=int(threads),
            variables=_read_index_sets(reader, space),
        )
    except ConfigError as error:
        raise ConfigError(str(error), path) from None

    validation_count = reader.integer("validation", "count", None, minimum=2)
    validation_indices = reader.integers("validation", "indices", minimum=0)
    if validation_count is not None and validation_indices:
        raise reader.error("takes either 'count' or 'indices', not both", "validation", "indices")
    training = reader.integers("validation", "training", minimum=0)
    overlap = sorted(set(training) & set(validation_indices))
    if overlap:
        raise reader.error(f"rows {overlap} are also training rows", "validation", "indices")

    bench = BenchOptions(
        grid_size=reader.integer("bench", "grid_size", 4096, minimum=1),
        components=reader.integer("bench", "components", 10, minimum=1),
        n_pf=reader.integer("bench", "n_pf", 1000, minimum=2),
        n_z=reader.integer("bench", "n_z", 10, minimum=1),
        n_x=reader.integer("bench", "n_x", 10, minimum=1),
    )
    if bench.components > bench.grid_size:
        raise reader.error("components cannot exceed grid_size", "bench", "components")

    return PipelineConfig(
        space=space,
        run=run,
        source=source,
        model=model,
        design_method=reader.choice("data", "design", ("lhs", "mc"), "lhs"),
        n=reader.integer("data", "n", 100, minimum=2),
        doe_path=reader.path_value("data", "doe"),
        outputs_path=reader.path_value("data", "outputs"),
        outputs_header=reader.boolean("data", "header", None),
        criterion=criterion,
        gp=gp,
        output_dir=_pick(output_dir, reader.raw("pipeline", "output_dir"), Config.OUTPUT_DIR),
        memory_budget_mb=reader.number("analysis", "memory_budget_mb", Config.MEMORY_BUDGET_MB, positive=True),
        doe_sizes=reader.integers("sweep", "doe_sizes", minimum=2),
        n_pf_values=reader.integers("sweep", "n_pf_values", minimum=2),
        validation_count=validation_count,
        validation_indices=validation_indices,
        validation_training=training,
        validation_n_z=reader.integer("validation", "n_z", 100, minimum=1),
        surrogates_dir=reader.path_value("pipeline", "surrogates"),
        bench=bench,
        version=version,
        path=path,
    )
