import pytest

from core.exceptions import ConfigError
from models.simulation_models import ProfileFamily, SimConfig
from utils.config_loader import (
    apply_overrides,
    config_hash,
    load_config,
    parse_config,
    parse_config_text,
    serialize_config,
)

SAMPLE = """
# weak coupling, focusing
q = 0.5
lambda = -1.0   # focusing sign
epsilon = 0.05
profile = modulated_gaussian
velocity = 0.25

half_length = 256
points = 4096
"""


def test_parse_sample():
    config = parse_config(SAMPLE)
    assert config.q == 0.5
    assert config.lam == -1.0
    assert config.epsilon == 0.05
    assert config.profile is ProfileFamily.MODULATED_GAUSSIAN
    assert config.points == 4096
    assert config.dt == SimConfig().dt


def test_field_name_is_accepted_for_lambda():
    assert parse_config("lam = 2.5").lam == 2.5


def test_serialize_round_trip():
    config = SimConfig(q=2.0, lam=-1.0, epsilon=0.125, half_length=64.0, points=512,
                       dt=0.05, t_max=8.0, beta=0.05, seed=9, output_dir="runs/x")
    assert parse_config(serialize_config(config)) == config
    assert "lambda = -1.0" in serialize_config(config)


def test_unknown_key_names_the_line():
    with pytest.raises(ConfigError, match=r"<text>:2: unknown key 'mu'"):
        parse_config_text("q = 1\nmu = 3\n")


def test_missing_equals_sign():
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config_text("q 1\n", "run.txt")


def test_validation_error_names_the_field():
    with pytest.raises(ConfigError, match="points"):
        parse_config("points = 1000")
    with pytest.raises(ConfigError, match="q"):
        parse_config("q = -1")
    with pytest.raises(ConfigError, match="beta"):
        parse_config("beta = 0.2")


def test_load_config(tmp_path):
    assert load_config(None) == SimConfig()
    assert load_config("default") == SimConfig()
    path = tmp_path / "config.txt"
    path.write_text(SAMPLE, encoding="utf-8")
    assert load_config(path) == parse_config(SAMPLE)
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.txt")


def test_apply_overrides_skips_none():
    config = apply_overrides(SimConfig(), {"q": 3.0, "lam": None, "points": 1024})
    assert config.q == 3.0
    assert config.lam == SimConfig().lam
    assert config.points == 1024
    with pytest.raises(ConfigError):
        apply_overrides(SimConfig(), {"dt": 0.5})


def test_config_hash_tracks_content():
    assert config_hash(SimConfig()) == config_hash(SimConfig())
    assert config_hash(SimConfig()) != config_hash(SimConfig(seed=1))
    assert len(config_hash(SimConfig())) == 64
