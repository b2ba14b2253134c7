import os
import textwrap

import pytest

from config import Config, IniReader, load_pipeline_config
from models import ConfigError, CovarianceMode, IndexKind, SamplingMode

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def write_ini(tmp_path, text, name="pipeline.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text).lstrip())
    return str(path)


MINIMAL = """
    [pipeline]
    version = 1
    seed = 5

    [data]
    source = model
    model = additive-sine
    grid_size = 20
    n = 30

    [analysis]
    n_pf = 200
    mode = batch
"""


class TestLoadPipelineConfig:
    def test_defaults(self, tmp_path):
        cfg = load_pipeline_config(write_ini(tmp_path, MINIMAL))
        assert cfg.space.names == ("x1", "x2")
        assert cfg.model.output_dims == 20
        assert cfg.run.n_pf == 200
        assert cfg.run.kinds == (IndexKind.CLOSED,)
        assert [index_set.members for index_set in cfg.index_sets] == [(0,), (1,)]
        assert cfg.criterion.threshold == pytest.approx(0.99)

    def test_command_line_overrides_file(self, tmp_path):
        cfg = load_pipeline_config(
            write_ini(tmp_path, MINIMAL), seed=9, threads=3, mode="per-trajectory", covariance="fixed", output_dir="elsewhere"
        )
        assert cfg.run.seed == 9
        assert cfg.run.threads == 3
        assert cfg.run.mode is SamplingMode.PER_TRAJECTORY
        assert cfg.run.covariance is CovarianceMode.FIXED
        assert cfg.output_dir == "elsewhere"

    def test_file_overrides_environment(self, tmp_path, monkeypatch):
        monkeypatch.setattr(Config, "THREADS", 6)
        assert load_pipeline_config(write_ini(tmp_path, MINIMAL)).run.threads == 6
        text = MINIMAL.replace("seed = 5", "seed = 5\n    threads = 2")
        assert load_pipeline_config(write_ini(tmp_path, text)).run.threads == 2

    def test_index_sets_and_kinds(self, tmp_path):
        text = MINIMAL + """
    variables = x1+x2, x2
    indices = total, plugin, total
"""
        cfg = load_pipeline_config(write_ini(tmp_path, text))
        assert [index_set.members for index_set in cfg.index_sets] == [(0, 1), (1,)]
        assert cfg.run.kinds == (IndexKind.TOTAL, IndexKind.PLUGIN)
        assert cfg.run.needs_total_locations

    def test_relative_paths_follow_the_file(self, tmp_path):
        text = """
            [space]
            a = 0, 1

            [data]
            source = csv
            doe = data/doe.csv
            outputs = data/outputs.csv
            header = false
        """
        cfg = load_pipeline_config(write_ini(tmp_path, text))
        assert cfg.doe_path == str(tmp_path / "data" / "doe.csv")
        assert cfg.outputs_header is False
        assert cfg.source == "csv"

    def test_stored_surrogates_path(self, tmp_path):
        text = MINIMAL.replace("seed = 5", "seed = 5\n    surrogates = fitted/surrogates")
        cfg = load_pipeline_config(write_ini(tmp_path, text))
        assert cfg.surrogates_dir == str(tmp_path / "fitted" / "surrogates")
        assert load_pipeline_config(write_ini(tmp_path, MINIMAL)).surrogates_dir is None

    def test_shipped_configs_load(self):
        for name in ("additive_sine", "interaction", "csv_data", "bench"):
            cfg = load_pipeline_config(os.path.join(CONFIGS, f"{name}.ini"))
            assert cfg.version == 1


class TestConfigErrors:
    def line_of(self, tmp_path, text):
        with pytest.raises(ConfigError) as info:
            load_pipeline_config(write_ini(tmp_path, text))
        return info.value.line, str(info.value)

    def test_bad_integer_points_at_its_line(self, tmp_path):
        line, message = self.line_of(tmp_path, MINIMAL.replace("n_pf = 200", "n_pf = many"))
        assert line == 12
        assert "[analysis] n_pf must be an integer" in message
        assert "pipeline.ini:12:" in message

    def test_unknown_key(self, tmp_path):
        line, message = self.line_of(tmp_path, MINIMAL.replace("grid_size = 20", "grid = 20"))
        assert line == 8
        assert "is not a known key" in message

    def test_unknown_section(self, tmp_path):
        line, _ = self.line_of(tmp_path, MINIMAL + "\n    [plots]\n    width = 3\n")
        assert line == 15

    def test_unknown_variable(self, tmp_path):
        _, message = self.line_of(tmp_path, MINIMAL + "    variables = x1, x3\n")
        assert "unknown variable 'x3'" in message

    def test_unsupported_dialect(self, tmp_path):
        line, _ = self.line_of(tmp_path, MINIMAL.replace("version = 1", "version = 2"))
        assert line == 2

    def test_inverted_bounds(self, tmp_path):
        _, message = self.line_of(tmp_path, MINIMAL + "\n    [space]\n    x1 = 1, 0\n    x2 = 0, 1\n")
        assert "lower < upper" in message

    def test_validation_overlap(self, tmp_path):
        text = MINIMAL + "\n    [validation]\n    indices = 3, 4\n    training = 0, 1, 4\n"
        _, message = self.line_of(tmp_path, text)
        assert "[4] are also training rows" in message

    def test_count_and_indices_exclusive(self, tmp_path):
        text = MINIMAL + "\n    [validation]\n    count = 5\n    indices = 3, 4\n"
        _, message = self.line_of(tmp_path, text)
        assert "either 'count' or 'indices'" in message

    def test_csv_source_needs_files(self, tmp_path):
        _, message = self.line_of(tmp_path, "[space]\nx = 0, 1\n\n[data]\nsource = csv\ndoe = doe.csv\n")
        assert "needs both 'doe' and 'outputs'" in message

    def test_duplicate_key(self, tmp_path):
        line, message = self.line_of(tmp_path, MINIMAL.replace("n = 30", "n = 30\n    n = 40"))
        assert line == 10
        assert "duplicate key" in message

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_pipeline_config(str(tmp_path / "absent.ini"))


class TestIniReader:
    def test_line_lookup(self, tmp_path):
        reader = IniReader(write_ini(tmp_path, MINIMAL))
        assert reader.line("data") == 5
        assert reader.line("data", "model") == 7
        assert reader.line("analysis", "mode") == 13
        assert reader.line("analysis", "missing") is None
