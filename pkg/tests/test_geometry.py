import numpy as np
import pytest

from curvedheat import (
    check_curvature_bounds,
    drift,
    drift_lower_constant,
    load_warping_csv,
    make_euclidean,
    make_gamma_model,
    make_hyperbolic,
    radial_curvature,
    save_warping_csv,
    sphere_curvature,
)


def test_euclidean_definitions(euclid3):
    assert euclid3.psi.eval(2.0) == 2.0
    assert euclid3.psi.deriv1(2.0) == 1.0
    assert euclid3.psi.deriv2(2.0) == 0.0
    r = np.linspace(0.1, 10, 50)
    assert np.all(sphere_curvature(euclid3, r) == 0.0)
    assert np.all(radial_curvature(euclid3, r) == 0.0)
    assert drift(euclid3, 0.5) == pytest.approx(4.0)


def test_dimension_and_scale_validation():
    with pytest.raises(ValueError):
        make_euclidean(1)
    with pytest.raises(ValueError):
        make_hyperbolic(3, 0.0)
    with pytest.raises(ValueError):
        make_hyperbolic(3, -1.0)
    with pytest.raises(ValueError):
        make_gamma_model(3, -1.0, 2.0, 10.0, 1e-3)


def test_hyperbolic_curvatures(hyp3):
    r = np.linspace(0.2, 30, 77)
    assert np.allclose(radial_curvature(hyp3, r), -1.0)
    assert np.allclose(sphere_curvature(hyp3, r), -1.0)


def test_hyperbolic_drift_infimum(hyp3):
    # coth decreases to 1, so the drift decreases to (n-1)k = 2
    r = np.linspace(10, 50, 200)
    f = drift(hyp3, r)
    assert np.all(np.diff(f) <= 0)
    assert f.min() >= 2.0
    assert drift(hyp3, 20.0) == pytest.approx(2.0, abs=1e-8)
    assert drift(hyp3, 50.0) == pytest.approx(2.0, abs=1e-12)


def test_hyperbolic_drift_floor_everywhere(hyp3):
    r = np.geomspace(1e-3, 40, 300)
    assert np.all(drift(hyp3, r) >= 2.0)


def test_class_a_normalization():
    M = make_hyperbolic(2, 2.0)
    r = np.array([1e-6, 1e-5, 1e-4])
    assert np.allclose(M.psi.eval(r) / r, 1.0, atol=1e-8)


def test_drift_rejects_nonpositive_radius(hyp3):
    with pytest.raises(ValueError):
        drift(hyp3, 0.0)
    with pytest.raises(ValueError):
        drift(hyp3, np.array([1.0, -2.0]))


def test_gamma_model_matches_hyperbolic_at_gamma_zero():
    # constant-curvature limit: c0 = k^2 must reproduce sinh(kr)/k
    M = make_gamma_model(3, 1.0, 0.0, 10.0, 1e-3)
    r = M.psi.r
    assert np.max(np.abs(M.psi.eval(r) / np.sinh(r) - 1.0)) < 1e-8
    assert np.max(np.abs(M.psi.ratio1(r) - 1.0 / np.tanh(r))) < 1e-8
    k = 1.7
    M2 = make_gamma_model(4, k**2, 0.0, 8.0, 1e-3)
    r = M2.psi.r
    assert np.max(np.abs(M2.psi.eval(r) / (np.sinh(k * r) / k) - 1.0)) < 1e-8


def test_gamma_model_curvature_is_exact(gamma2):
    assert radial_curvature(gamma2, 5.0) == pytest.approx(-26.0, rel=1e-14)
    r = np.linspace(0.3, 25, 113)
    assert np.allclose(radial_curvature(gamma2, r), -(1.0 + r**2), rtol=1e-14)


def test_gamma_model_log_growth_rate(gamma3=None):
    # log psi ~ C r^{1+gamma/2} with C = sqrt(c0)/(1+gamma/2); for
    # gamma = 2 that is r^2/2, so log(psi)/r^2 -> 0.5 from below
    M = make_gamma_model(3, 1.0, 2.0, 40.0, 1e-3)
    r = np.linspace(20, 40, 21)
    ratio = M.psi.log_eval(r) / r**2
    assert np.all(np.diff(ratio) > 0)
    assert 0.4 < ratio[0] < 0.5
    assert ratio[-1] == pytest.approx(0.5, abs=0.02)


def test_gamma_model_asymptotic_drift_constant(gamma2):
    # exact-model oracle: psi'/psi -> sqrt(c0) r^{gamma/2} from above
    f = drift(gamma2, 10.0)
    assert f >= 2.0 * np.sqrt(1.0) * 10.0  # (n-1) sqrt(c0) r^{gamma/2}
    assert f == pytest.approx(20.0, rel=0.01)


def test_gamma_model_sphere_curvature_bound(gamma2):
    r = np.linspace(0.1, 20, 400)
    assert np.all(sphere_curvature(gamma2, r) <= -1.0)


def test_gamma_model_coarse_step_rejected():
    with pytest.raises(ValueError):
        make_gamma_model(3, 1.0, 2.0, 40.0, 0.1)


def test_tabulated_finite_difference_consistency(gamma2):
    # centered differences of psi must reproduce deriv1/deriv2 to O(h^2)
    psi = gamma2.psi
    r = np.linspace(0.5, 8.0, 40)
    h = 1e-4
    d1 = (psi.eval(r + h) - psi.eval(r - h)) / (2 * h)
    d2 = (psi.eval(r + h) - 2 * psi.eval(r) + psi.eval(r - h)) / h**2
    assert np.max(np.abs(d1 / psi.deriv1(r) - 1.0)) < 1e-6
    assert np.max(np.abs(d2 / psi.deriv2(r) - 1.0)) < 1e-5


def test_drift_is_log_derivative_of_area_factor(hyp3, gamma2):
    h = 1e-5
    for M in (hyp3, gamma2):
        r = np.linspace(0.5, 15, 30)
        num = (M.n - 1) * (M.psi.log_eval(r + h) - M.psi.log_eval(r - h)) / (2 * h)
        assert np.max(np.abs(num - drift(M, r))) < 1e-6


def test_jacobi_residual_from_table(gamma2):
    # psi''/psi is stored as the Jacobi coefficient, so the residual of
    # psi'' = c0 (1 + r^gamma) psi vanishes identically on the table
    psi = gamma2.psi
    resid = np.abs(psi.ratio2(psi.r) - (1.0 + psi.r**2))
    assert np.max(resid) < 1e-8


def test_check_curvature_bounds(euclid3, hyp3, gamma2):
    r = np.linspace(0.1, 10, 200)
    rep = check_curvature_bounds(hyp3, 1.0, 1.0, 0.0, r)
    assert rep.pinch_holds and rep.divergence_holds
    rep = check_curvature_bounds(euclid3, 0.1, 1.0, 0.0, r)
    assert not rep.pinch_holds
    rep = check_curvature_bounds(gamma2, 1.0, 1.0, 2.0, r)
    assert rep.pinch_holds and rep.divergence_holds
    # too-strong candidate fails
    rep = check_curvature_bounds(hyp3, 2.0, 1.0, 0.0, r)
    assert not rep.pinch_holds


def test_drift_lower_constant_positive(gamma2, hyp3):
    r = np.linspace(0.05, 25, 500)
    c = drift_lower_constant(gamma2, r, 2.0)
    assert 0.2 < c < 1.0
    # the bound it certifies actually holds
    f = drift(gamma2, r)
    assert np.all(r * f >= c * 2.0 * (1.0 + r) ** 2 * (1.0 - 1e-12))


def test_warping_csv_roundtrip(tmp_path, gamma2):
    path = tmp_path / "warp.csv"
    save_warping_csv(gamma2.psi, path)
    header = path.read_text().splitlines()[0]
    assert header == "r,log_psi,psi1_over_psi,psi2_over_psi"
    loaded = load_warping_csv(path)
    r = np.linspace(0.5, 20, 50)
    assert np.allclose(loaded.ratio1(r), gamma2.psi.ratio1(r), rtol=1e-10)
    assert np.allclose(loaded.log_eval(r), gamma2.psi.log_eval(r), rtol=1e-10)


def test_tabulated_range_is_enforced(gamma2):
    with pytest.raises(ValueError):
        gamma2.psi.ratio1(31.0)
