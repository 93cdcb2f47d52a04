import pytest

from config import ConfigValue, load_config_file, parse_config_text, resolve_settings


def test_parse_config_text():
    text = """
    # a comment
    gamma = 0.25
    eps-floor = 1e-6   # trailing comment

    extent = -2 2
    """
    assert parse_config_text(text) == {"gamma": "0.25", "eps_floor": "1e-6", "extent": "-2 2"}


def test_parse_rejects_malformed_line():
    with pytest.raises(ValueError, match="line 2"):
        parse_config_text("gamma = 0.5\nnot a setting\n")


def test_load_config_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("seed = 3\n")
    assert load_config_file(path) == {"seed": "3"}
    assert load_config_file(None) == {}


def test_precedence():
    settings = resolve_settings(
        {"gamma": 0.5, "seed": 0, "tol": 1e-10},
        {"gamma": "0.25", "seed": "4"},
        {"seed": 9, "tol": None},
    )
    assert (settings["gamma"].value, settings["gamma"].source) == ("0.25", "file")
    assert (settings["seed"].value, settings["seed"].source) == (9, "flag")
    assert (settings["tol"].value, settings["tol"].source) == (1e-10, "default")


def test_unknown_key():
    with pytest.raises(ValueError, match="unknown config keys: colour"):
        resolve_settings({"gamma": 0.5}, {"colour": "red"}, {})


def test_config_value_str():
    value = ConfigValue("n", 127)
    value.override(None)
    assert str(value) == "127"
    assert value.source == "default"
