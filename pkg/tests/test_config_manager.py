import pytest

from icardmaps.services import config_manager, file_ops
from icardmaps.services.errors import InputError


def test_defaults_are_written_on_first_read(data_dir):
    config = config_manager.get_active_config()
    assert config == config_manager.get_default_config()
    assert (data_dir / config_manager.ACTIVE_CONFIG_PATH).exists()


def test_stored_config_gains_new_keys():
    file_ops.write_json(config_manager.ACTIVE_CONFIG_PATH, {"budget": 10})
    config = config_manager.get_active_config()
    assert config["budget"] == 10
    assert config["mc_prefix"] == 8


def test_overrides_ignore_none():
    config = config_manager.get_engine_config(budget=None, seed=5)
    assert config.budget == 20000
    assert config.seed == 5


@pytest.mark.parametrize("changes", [{"default_lambda": "0"}, {"default_lambda": "w^"}, {"budget": 0}])
def test_invalid_values(changes):
    with pytest.raises(InputError):
        config_manager.get_engine_config(**changes)


def test_save_versions_and_activates(data_dir):
    version_file, active_file = config_manager.save_config({"default_lambda": "w+1", "seed": 3, "prefix": None})
    assert active_file == "active_engine_config.json"
    assert version_file.startswith("engine_config_seed3__")
    assert (data_dir / file_ops.CONFIG_DIR / version_file).exists()
    active = config_manager.get_engine_config()
    assert active.default_lambda == "w+1"
    assert active.prefix == 5


def test_failed_save_keeps_active_config():
    config_manager.save_config({"seed": 1})
    with pytest.raises(InputError):
        config_manager.save_config({"samples": 0})
    assert config_manager.get_engine_config().samples == 60
    assert config_manager.get_engine_config().seed == 1


def test_reports_dir():
    config_manager.save_config({"reports_dir": "runs"})
    assert config_manager.reports_dir() == "runs"
