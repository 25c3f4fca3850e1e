import numpy as np
import pytest
from hypothesis import given, strategies as st

from bgmalloc.channel import (
    NegativeWeightError,
    SinrModelConfig,
    WeightDimensionError,
    WeightMatrix,
    WeightParseError,
    capacity,
    derive_seed,
    generate_sinr,
    generate_weights,
    load_weights,
    save_weights,
    splitmix64,
)
from bgmalloc.grid import shared_intersection_scenario


@pytest.fixture
def scenario():
    return shared_intersection_scenario((5, 4), 2, K=3, L=6)


def test_capacity_edge_values():
    assert np.all(capacity(np.zeros((2, 4)), 1.26e6) == 0)
    assert np.allclose(capacity(np.ones((2, 4)), 1.26e6), 1.26e6, rtol=0, atol=1e-6)


@given(st.floats(0, 1e6), st.floats(1e-6, 1e3))
def test_capacity_strictly_increasing(sinr, delta):
    assert capacity(sinr + delta, 1.0) > capacity(sinr, 1.0)


def test_splitmix64_reference_values():
    # first outputs of the reference SplitMix64 generator seeded with 0
    state = 0
    outs = []
    for _ in range(3):
        outs.append(splitmix64(state))
        state = (state + 0x9E3779B97F4A7C15) & ((1 << 64) - 1)
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_seed_streams_differ():
    assert derive_seed(1, 0) != derive_seed(1, 1)
    assert derive_seed(1, 0, 0) != derive_seed(1, 0, 1)
    assert derive_seed(1, 0) != derive_seed(2, 0)


def test_generation_is_deterministic(scenario):
    cfg = SinrModelConfig(master_seed=11)
    a = generate_weights(scenario, cfg, 3).values
    b = generate_weights(scenario, cfg, 3).values
    assert a.tobytes() == b.tobytes()
    assert a.shape == (scenario.vehicle_count, 18)
    assert np.all(a >= 0)
    assert not np.array_equal(a, generate_weights(scenario, cfg, 4).values)


def test_zero_spread_gives_constant_weights(scenario):
    # 0 dB mean with no spread is SINR 1 -> exactly one bit per Hz
    cfg = SinrModelConfig(sinr_db_mean=0.0, sinr_db_stddev=0.0)
    w = generate_weights(scenario, cfg, 0).values
    assert np.allclose(w, 1.26e6)


def test_full_correlation_ties_subframe(scenario):
    cfg = SinrModelConfig(per_subframe_correlation=1.0)
    s = generate_sinr(scenario, cfg, 0).reshape(scenario.vehicle_count, scenario.grid.L, scenario.grid.K)
    assert np.allclose(s, s[..., :1])


def test_partial_correlation_statistics():
    big = shared_intersection_scenario((200,), 0, K=2, L=200)
    cfg = SinrModelConfig(sinr_db_mean=10, sinr_db_stddev=4, per_subframe_correlation=0.6)
    db = 10 * np.log10(generate_sinr(big, cfg, 0)).reshape(200, 200, 2)
    assert db.mean() == pytest.approx(10, abs=0.1)
    assert db.std() == pytest.approx(4, abs=0.1)
    r = np.corrcoef(db[..., 0].ravel(), db[..., 1].ravel())[0, 1]
    assert r == pytest.approx(0.6, abs=0.03)


def test_config_validation():
    with pytest.raises(ValueError):
        SinrModelConfig(sinr_db_stddev=-1)
    with pytest.raises(ValueError):
        SinrModelConfig(per_subframe_correlation=1.5)


def test_weight_matrix_rejects_bad_values():
    with pytest.raises(ValueError, match="vehicle 1, subchannel 2"):
        WeightMatrix([[1.0, -1.0]])
    with pytest.raises(ValueError):
        WeightMatrix([[np.nan]])


def test_load_zero_matrix(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("0,0,0,0\n0,0,0,0\n")
    w = load_weights(p, (2, 4))
    assert w.shape == (2, 4) and not w.values.any()


def test_load_negative_entry_named(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("1,2,3\n4,-5,6\n")
    with pytest.raises(NegativeWeightError, match="row 2, column 2"):
        load_weights(p)


def test_load_dimension_mismatch(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("1,2\n3,4\n")
    with pytest.raises(WeightDimensionError):
        load_weights(p, (2, 3))


def test_load_parse_failure(tmp_path):
    p = tmp_path / "w.csv"
    p.write_text("1,abc\n")
    with pytest.raises(WeightParseError):
        load_weights(p)
    p.write_text("1,2\n3\n")
    with pytest.raises(WeightParseError, match="ragged"):
        load_weights(p)


def test_round_trip_is_exact(tmp_path, scenario):
    w = generate_weights(scenario, SinrModelConfig(master_seed=5), 0)
    save_weights(w, tmp_path / "w.csv")
    back = load_weights(tmp_path / "w.csv", w.shape)
    assert back.values.tobytes() == w.values.tobytes()
    assert "e" not in (tmp_path / "w.csv").read_text()
