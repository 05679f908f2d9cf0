import math
import os
import sys

import numpy as np
import pytest

build = os.environ.get("BFBF_PY_BUILD_DIR")
if build:
    sys.path.insert(0, os.path.join(build, "python"))

bfbf = pytest.importorskip("bfbf")


def test_placement_shape_and_determinism():
    a = bfbf.place_nodes(64, seed=3)
    b = bfbf.place_nodes(64, seed=3)
    assert a.shape == (64, 2)
    assert np.array_equal(a, b)
    assert a.min() >= 0.0 and a.max() < 8.0


def test_channel_and_norms():
    pts = bfbf.place_nodes(128, seed=1)
    h = bfbf.channel_matrix(pts)
    assert h.shape == (128, 128)
    assert np.allclose(h, h.T)
    assert np.all(np.diag(h) == 0)
    ref = np.linalg.norm(h, 2)
    est, iters = bfbf.spectral_norm(h)
    assert est == pytest.approx(ref, rel=1e-6)
    assert iters > 0
    assert bfbf.exact_norm(h) == pytest.approx(ref, rel=1e-12)
    assert bfbf.gershgorin_m1(pts) >= ref
    assert bfbf.block_gershgorin(pts, 4) >= ref * (1 - 1e-10)
    value, trace = bfbf.recursive_norm_bound(pts)
    assert value >= ref * (1 - 1e-10)
    assert trace["exponent_sequence"][0] == 0.5


def test_gain_and_exponents():
    g = bfbf.los_gain(0.5)
    assert abs(g) == pytest.approx(2.0)
    assert bfbf.exponent_map(0.5) == pytest.approx(3 / 8)
    assert bfbf.delta_plus(1.0) == pytest.approx(2 * math.log(2) - 1)
    assert bfbf.offdiag_block_bound(100, 20, 0.0, 1.0) == pytest.approx(math.sqrt(5))
    with pytest.raises(ValueError):
        bfbf.offdiag_block_bound(100, 10, 0.0, 1.0)


def test_trace_moment_matches_numpy():
    pts = bfbf.place_nodes(32, seed=2)
    h = bfbf.channel_matrix(pts)
    tr, root = bfbf.trace_moment(h, 2)
    g = h @ h.conj().T
    assert tr == pytest.approx(np.trace(g @ g).real, rel=1e-10)
    assert root >= np.linalg.norm(h, 2) ** 2 * (1 - 1e-9)


def test_layout_and_rates():
    lay = bfbf.pair_layout(65536, seed=1)
    assert lay["pair_count"] == 8
    assert lay["width"] == pytest.approx(4.0)
    assert bfbf.theorem1_predicted_rate(4096, 4096 ** -0.75, 0.1) == pytest.approx(4096 ** -0.35)
    r = bfbf.measure_scheme_rate(4096, seed=80000, sources=2, noise_realizations=4)
    assert 0 < r["scheme_rate"] <= r["scheme_rate_optimistic"]
    assert r["scheme_rate"] <= r["upper_bound"]
    assert r["tdma_rate"] <= r["upper_bound"]
    with pytest.raises(bfbf.LayoutInfeasible):
        bfbf.pair_layout(256, c2=100.0)


def test_fit_and_criterion():
    slope, _, _ = bfbf.fit_loglog([1, 2, 4, 8], [1, 2 ** 0.5, 2, 8 ** 0.5])
    assert slope == pytest.approx(0.5, abs=1e-12)
    res = bfbf.run_criterion("C3")
    assert res["passed"]
    assert "C3" in bfbf.criterion_ids()
