import math

import numpy as np
import pytest

import jmlmc


def test_schedule_matches_known_counts():
    s = jmlmc.build_schedule(2, "adapted")
    assert [lv["samples"] for lv in s["levels"]] == [4096, 3, 2]
    assert s["levels"][2]["h_bar"] == 0.125
    n = jmlmc.build_schedule(1, "nonadapted")
    assert [lv["samples"] for lv in n["levels"]] == [64, 1]


def test_config_round_trip_and_errors():
    text = jmlmc.default_config()
    assert jmlmc.normalize_config(text) == text
    with pytest.raises(jmlmc.ConfigError):
        jmlmc.normalize_config("[study]\nkappa = 0.4\n")
    assert issubclass(jmlmc.ConfigError, jmlmc.Error)


def test_matern_variance():
    assert jmlmc.matern_cov(0.0) == 0.25
    r = 0.05
    s = math.sqrt(3.0) * r / 0.1
    assert jmlmc.matern_cov(r) == pytest.approx(0.25 * (1 + s) * math.exp(-s), rel=1e-12)


def test_field_sample_shape_and_determinism():
    a = jmlmc.sample_field(1 / 16, seed=4)
    b = jmlmc.sample_field(1 / 16, seed=4)
    assert a.shape == (17, 17)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, jmlmc.sample_field(1 / 16, seed=5))


def test_triangulate_cross():
    vertices, triangles, regions, info = jmlmc.triangulate([0.3, 0.6, 0.4, 0.7], 0.25)
    assert vertices.shape[1] == 2 and triangles.shape[1] == 3
    assert len(regions) == len(triangles)
    assert set(regions) == {0, 1, 2, 3}
    assert info["conforming"]
    assert info["h"] <= 0.25
    assert info["min_angle"] >= 20.0


def test_path_and_estimator():
    psi = jmlmc.solve_path(0, "adapted", seed=1)
    assert psi == jmlmc.solve_path(0, "adapted", seed=1)
    assert 0.0 < psi < 0.1
    est = jmlmc.mlmc_estimate(1, "nonadapted", seed=2)
    assert [lv["samples"] for lv in est["levels"]] == [64, 1]
    assert est["value"] == pytest.approx(sum(lv["mean"] for lv in est["levels"]))
    assert jmlmc.mlmc_estimate(1, "nonadapted", seed=2, threads=2)["value"] == est["value"]


def test_slope():
    assert jmlmc.fit_loglog_slope([1.0, 0.5, 0.25], [1.0, 0.25, 0.0625]) == pytest.approx(2.0)
