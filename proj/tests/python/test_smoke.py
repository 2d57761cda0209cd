import numpy as np
import pytest

import bwretrieve as bw


@pytest.fixture
def problem():
    ens = bw.generate_ensemble(20, 200, 3).whiten()
    star = bw.constant_unit_signal(20)
    y = bw.synthesize_measurements(ens, star)
    return ens, y, star


def test_whitening(problem):
    ens, _, _ = problem
    w = ens.whitened
    np.testing.assert_allclose(w @ w.T / ens.n, np.eye(ens.d), atol=1e-10)
    np.testing.assert_allclose(ens.cholesky_factor @ w, ens.raw, atol=1e-12)


def test_solution_is_stationary(problem):
    ens, y, star = problem
    u = ens.cholesky_factor.T @ star
    for eps in (0.0, 1e-3, 1.0):
        assert np.linalg.norm(bw.smoothed_gradient(ens, y, u, eps)) < 1e-9
        assert bw.smoothed_loss(ens, y, u, eps) < 1e-20


def test_newton_equivalence_and_identity_hessian(problem):
    ens, y, _ = problem
    u = np.random.default_rng(0).standard_normal(ens.d)
    np.testing.assert_allclose(bw.bwgd_ds_step(ens, y, u, 0.0), bw.newton_step(ens, y, u), rtol=1e-10)
    np.testing.assert_allclose(bw.smoothed_hessian(ens, y, u, 0.0), np.eye(ens.d), atol=1e-9)


def test_quantile():
    assert bw.quantile([1.0, 2.0, 3.0, 4.0], 0.5) == 2.0
    with pytest.raises(bw.BwretrieveError):
        bw.quantile([], 0.5)


def test_run_recovers_signal(problem):
    ens, y, star = problem
    init = bw.spectral_init(ens, y)
    out = bw.run(ens, y, init, method="quantile", truth=star)
    assert out["status"] == "converged"
    assert out["error"][-1] < 1e-9
    assert len(out["error"]) == out["iterations"] + 1
    sign = np.sign(out["estimate"] @ star)
    np.testing.assert_allclose(sign * out["estimate"], star, atol=1e-8)


def test_errors_are_translated():
    with pytest.raises(bw.BwretrieveError, match="invalid-configuration"):
        bw.generate_ensemble(5, 5, 0)


def test_quantile_suite():
    assert "quantile" in bw.suite_names()
    rows = bw.run_suite("quantile")
    assert all(r["pass"] for r in rows)
