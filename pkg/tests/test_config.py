import pytest

from config.settings import configure_logging, default_grid_points, get_int, load_config_file


def test_config_file_keys_are_normalised(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("# solver\nMAX-NEWTON-ITERS=40\ngrid = 128\n", encoding="utf-8")
    assert load_config_file(path) == {"max_newton_iters": "40", "grid": "128"}
    assert load_config_file(None) == {}


def test_environment_integers(monkeypatch):
    monkeypatch.delenv("COVEXT_SEED", raising=False)
    assert get_int("SEED", 5) == 5
    monkeypatch.setenv("COVEXT_SEED", "12")
    assert get_int("SEED", 5) == 12
    monkeypatch.setenv("COVEXT_SEED", "twelve")
    with pytest.raises(RuntimeError, match="COVEXT_SEED"):
        get_int("SEED", 5)


def test_default_grid_points(monkeypatch):
    monkeypatch.delenv("COVEXT_GRID_1D", raising=False)
    assert default_grid_points(1) == 512
    monkeypatch.setenv("COVEXT_GRID_1D", "256")
    assert default_grid_points(1) == 256


def test_unknown_log_level():
    with pytest.raises(RuntimeError, match="Unknown log level"):
        configure_logging("chatty")
