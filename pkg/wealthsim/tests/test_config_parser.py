import os
import sys
import pytest

project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if project_root not in sys.path:
    sys.path.insert(0, project_root)
app_dir = os.path.join(project_root, 'app')
if app_dir not in sys.path:
    sys.path.insert(0, app_dir)

from config_parser import emit_config, format_alpha_mode, load_config, parse_alpha_mode, parse_config  # type: ignore
from core_exchange import AlphaMode  # type: ignore
from errors import ConfigError  # type: ignore
from model_config import ModelConfig, ModelVariant, ScheduleUnit  # type: ignore


class TestParseConfig:
    """Parsing `key: value` documents into ModelConfig."""

    def test_minimal_document_gets_defaults(self):
        config = parse_config("variant: ModelA\nduration: 10000\nseed: 42\n")
        assert config == ModelConfig(variant=ModelVariant.MODEL_A, duration=10_000, seed=42)
        assert config.n0 == 100
        assert config.tau == 10
        assert config.bins == 100_000
        assert config.snapshot_times == (10_000,)

    def test_model_b_defaults(self):
        config = parse_config("variant: ModelB\nduration: 1e6\nseed: 1\n")
        assert config.duration == 1_000_000
        assert config.bins == 10_000
        assert config.schedule_unit is ScheduleUnit.TRANSACTION

    def test_full_document(self):
        text = "\n".join([
            "# Model C3, long run",
            "variant: ModelC3",
            "duration: 1000000",
            "seed: 7",
            "n0: 50",
            "tau: 20",
            "schedule_unit: sweep",
            "alpha_mode: fixed(0.3)",
            "split_fraction: 0.25",
            "bins: 500",
            "ensembles: 4",
            "snapshot_times: [1000, 100000, 1000000]",
        ])
        config = parse_config(text)
        assert config.variant is ModelVariant.MODEL_C3
        assert config.n0 == 50
        assert config.tau == 20
        assert config.schedule_unit is ScheduleUnit.SWEEP
        assert config.alpha_mode == AlphaMode.fixed(0.3)
        assert config.split_fraction == 0.25
        assert config.bins == 500
        assert config.ensembles == 4
        assert config.snapshot_times == (1000, 100_000, 1_000_000)

    def test_comma_separated_times(self):
        config = parse_config("variant: ModelA\nduration: 30\nseed: 1\nsnapshot_times: 10, 20, 30\n")
        assert config.snapshot_times == (10, 20, 30)

    def test_validation_error_reports_line(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config("variant: ModelA\nduration: 100\nseed: 1\ntau: 0\n")
        assert exc_info.value.field == "tau"
        assert exc_info.value.line == 4
        assert str(exc_info.value).startswith("line 4: tau: ")

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config("variant: ModelA\nduration: 100\nseed: 1\ntemperature: 3\n")
        assert exc_info.value.field == "temperature"
        assert exc_info.value.line == 4

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config("variant: ModelA\nduration: 100\nseed: 1\nduration: 200\n")
        assert exc_info.value.field == "duration"
        assert exc_info.value.line == 4
        assert "line 2" in exc_info.value.message

    @pytest.mark.parametrize("spelling", ["sweep", "Sweep", "SWEEP"])
    def test_schedule_unit_spelling(self, spelling):
        config = parse_config(f"variant: ModelB\nduration: 100\nseed: 1\nschedule_unit: {spelling}\n")
        assert config.schedule_unit is ScheduleUnit.SWEEP

    def test_unknown_schedule_unit(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config("variant: ModelB\nduration: 100\nseed: 1\nschedule_unit: epoch\n")
        assert exc_info.value.field == "schedule_unit"
        assert exc_info.value.line == 4

    def test_missing_required_key(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config("variant: ModelA\nduration: 100\n")
        assert "seed" in str(exc_info.value)

    def test_missing_value(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config("variant: ModelA\nduration:\nseed: 1\n")
        assert exc_info.value.field == "duration"
        assert exc_info.value.line == 2

    @pytest.mark.parametrize("text,field", [
        ("variant: ModelZ\nduration: 100\nseed: 1\n", "variant"),
        ("variant: ModelA\nduration: ten\nseed: 1\n", "duration"),
        ("variant: ModelA\nduration: 100\nseed: 1\nsplit_fraction: half\n", "split_fraction"),
        ("variant: ModelA\nduration: 100\nseed: 1\nalpha_mode: random\n", "alpha_mode"),
        ("variant: ModelA\nduration: 100\nseed: 1\nalpha_mode: fixed(2)\n", "alpha_mode"),
        ("variant: ModelA\nduration: 100\nseed: 1\nn0: true\n", "n0"),
        ("variant: ModelA\nduration: 100\nseed: 1\nschedule_unit: transaction\n", "schedule_unit"),
    ])
    def test_bad_values_name_the_field(self, text, field):
        with pytest.raises(ConfigError) as exc_info:
            parse_config(text)
        assert exc_info.value.field == field

    def test_malformed_document(self):
        with pytest.raises(ConfigError) as exc_info:
            parse_config("variant: ModelA\nduration: [100\nseed: 1\n")
        assert exc_info.value.line is not None

    @pytest.mark.parametrize("text", ["", "# only a comment\n", "- ModelA\n- 100\n"])
    def test_empty_or_non_mapping(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_load_config(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("variant: PureTF\nduration: 500\nseed: 3\n", encoding="utf-8")
        assert load_config(path).variant is ModelVariant.PURE_TF


class TestAlphaModeText:
    """Text form of AlphaMode."""

    @pytest.mark.parametrize("text,expected", [
        ("fixed", AlphaMode.fixed()),
        ("fixed(0.3)", AlphaMode.fixed(0.3)),
        ("fixed( 1.0 )", AlphaMode.fixed(1.0)),
        ("per_transaction_uniform", AlphaMode.per_transaction_uniform()),
        ("quenched_per_agent", AlphaMode.quenched_per_agent()),
    ])
    def test_parse(self, text, expected):
        assert parse_alpha_mode(text) == expected

    def test_format(self):
        assert format_alpha_mode(AlphaMode.fixed(0.5)) == "fixed(0.5)"
        assert format_alpha_mode(AlphaMode.quenched_per_agent()) == "quenched_per_agent"


class TestEmitConfig:
    """emit_config writes every field and parses back to the same value."""

    @pytest.mark.parametrize("config", [
        ModelConfig(variant=ModelVariant.MODEL_A, duration=10_000, seed=42),
        ModelConfig(variant=ModelVariant.MODEL_B, duration=1_000_000, seed=2 ** 64 - 1, tau=7,
                    snapshot_times=(10_000, 100_000, 1_000_000), ensembles=3000),
        ModelConfig(variant=ModelVariant.MODEL_C3, duration=100, seed=0, schedule_unit=ScheduleUnit.SWEEP,
                    alpha_mode=AlphaMode.fixed(0.1), split_fraction=0.3, bins=100),
        ModelConfig(variant=ModelVariant.PURE_YS, duration=5, seed=9, alpha_mode=AlphaMode.per_transaction_uniform()),
    ])
    def test_parse_of_emit_is_identity(self, config):
        assert parse_config(emit_config(config)) == config

    def test_field_order_and_comment(self):
        text = emit_config(ModelConfig(variant=ModelVariant.MODEL_A, duration=10, seed=1), comment="desk run")
        lines = text.splitlines()
        assert lines[0] == "# desk run"
        assert [line.split(":")[0] for line in lines[1:]] == [
            "variant", "duration", "seed", "n0", "tau", "schedule_unit", "alpha_mode",
            "split_fraction", "bins", "ensembles", "snapshot_times",
        ]
        assert text.endswith("\n")
