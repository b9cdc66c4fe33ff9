import numpy as np
import pytest

from drxsim.config import ConfigError, ScenarioConfig, band_config, read_config_file
from drxsim.scenario import build_deployment, grid_positions


def test_nine_cell_grid():
    cfg = ScenarioConfig()
    dep = build_deployment(cfg, np.random.default_rng(0))
    assert dep.bs_positions.shape == (9, 3)
    xs = sorted(set(dep.bs_positions[:, 0]))
    ys = sorted(set(dep.bs_positions[:, 1]))
    assert xs == [-100.0, 0.0, 100.0] and ys == [-100.0, 0.0, 100.0]
    assert np.all(dep.bs_positions[:, 2] == 10.0)
    assert dep.ue_position[2] == 1.8
    assert np.all(np.abs(dep.ue_position[:2]) <= 100.0)


def test_single_cell_at_centre():
    cfg = ScenarioConfig(n_cells=1, k_listen=1)
    dep = build_deployment(cfg, np.random.default_rng(0))
    np.testing.assert_array_equal(dep.bs_positions, [[0.0, 0.0, 10.0]])


def test_non_square_rejected():
    with pytest.raises(ConfigError, match="perfect square"):
        grid_positions(8, 200.0, 10.0)
    with pytest.raises(ConfigError):
        build_deployment(ScenarioConfig(n_cells=8), np.random.default_rng(0))


def test_same_seed_same_deployment():
    cfg = ScenarioConfig()
    a = build_deployment(cfg, np.random.default_rng(42))
    b = build_deployment(cfg, np.random.default_rng(42))
    np.testing.assert_array_equal(a.bs_positions, b.bs_positions)
    assert a.ue_position.tobytes() == b.ue_position.tobytes()


def test_ue_drop_is_centred():
    cfg = ScenarioConfig()
    ue = np.array([build_deployment(cfg, np.random.default_rng(s)).ue_position[:2] for s in range(10_000)])
    assert np.all(np.abs(ue.mean(axis=0)) < 5.0)


@pytest.mark.parametrize(
    "field,value",
    [
        ("k_listen", 0),
        ("k_listen", 10),
        ("sweep_len_cycles", 0),
        ("carrier_freq_hz", 0.0),
        ("t_ss0_s", 0.003),
        ("bs_height_m", -1.0),
        ("blocker_density_per_m2", -0.1),
        ("rng_seed", -1),
    ],
)
def test_invalid_config(field, value):
    with pytest.raises(ConfigError):
        ScenarioConfig(**{field: value})


def test_band_presets():
    c28, c140 = band_config("28ghz"), band_config("140ghz")
    assert (c28.m_ue, c28.m_bs, c28.carrier_freq_hz) == (8, 64, 28e9)
    assert (c140.m_ue, c140.m_bs, c140.carrier_freq_hz) == (64, 256, 140e9)
    for c in (c28, c140):
        assert c.n_cells == 9 and c.gamma_min_db == -6.5 and c.blocker_density_per_m2 == 0.01
        assert c.tx_power_dbm == 23.0 and c.temperature_k == 298.0 and c.bandwidth_hz == 400e6
    with pytest.raises(ConfigError):
        band_config("60ghz")


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown"):
        ScenarioConfig.from_dict({"n_cell": 9})


def test_config_roundtrip(tmp_path):
    cfg = band_config("140ghz", k_listen=3, rng_seed=2**63 + 5)
    path = tmp_path / "cfg.json"
    import json

    path.write_text(json.dumps(cfg.to_dict()))
    assert ScenarioConfig.from_dict(read_config_file(path)) == cfg


def test_read_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        read_config_file(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        read_config_file(bad)
