import os

import pytest

from cstarkit import config


def test_defaults(default_config):
    cfg = config.load_config()
    assert config.MAX_VERTICES == cfg["limits"]["max_vertices"]
    assert config.MAX_FREE_RANK == 2
    assert config.MAX_ISOMORPHISM_VERTICES == cfg["classify"]["max_isomorphism_vertices"] == 8
    assert config.LOG_LEVEL == "WARNING"
    assert os.path.isabs(config.TRACES_DIR)
    assert config.get_config() is cfg


def test_yaml_overrides_keep_other_sections(default_config, tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text("limits:\n  max_vertices: 5\nlogging:\n  level: debug\n")
    cfg = config.load_config(str(path))
    assert config.MAX_VERTICES == 5
    assert config.LOG_LEVEL == "DEBUG"
    assert config.MAX_ORBIT_SIZE == cfg["ktheory"]["max_orbit_size"]
    assert cfg["cli"]["manifest_workers"] == config.MANIFEST_WORKERS


def test_relative_paths_resolve_against_the_repo_root(default_config, monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    cfg = config.load_config("configs/default.yaml")
    assert cfg["limits"]["max_vertices"] == 20


def test_config_env_var(default_config, monkeypatch, tmp_path):
    path = tmp_path / "env.yaml"
    path.write_text("ktheory:\n  max_free_rank: 1\n")
    monkeypatch.setenv("CSTARKIT_CONFIG", str(path))
    config.load_config()
    assert config.MAX_FREE_RANK == 1


def test_vertex_limit_env_override(default_config, monkeypatch):
    monkeypatch.setenv(config.MAX_VERTICES_ENV, "7")
    config.load_config()
    assert config.MAX_VERTICES == 7


def test_bad_vertex_limit_env_is_ignored(default_config, monkeypatch, caplog):
    monkeypatch.setenv(config.MAX_VERTICES_ENV, "many")
    config.load_config()
    assert config.MAX_VERTICES == 20
    assert "Ignoring non-integer" in caplog.text


def test_missing_file_raises(default_config, tmp_path):
    with pytest.raises(OSError):
        config.load_config(str(tmp_path / "nope.yaml"))
