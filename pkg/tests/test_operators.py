import numpy as np
import pytest

from curvedheat import (
    RadialField,
    RadialGrid,
    SmoothRadialFn,
    apply_laplacian,
    apply_laplacian_analytic,
    dirichlet_lambda1,
    load_field_csv,
    make_gamma_model,
    save_field_csv,
    sup_norm,
    volume_inner_product,
)
from curvedheat.errors import StabilityError


def field_from(grid, fn):
    return RadialField(grid, fn(grid.nodes))


def test_grid_layout():
    g = RadialGrid(10.0, 99)
    assert g.dr == pytest.approx(0.1)
    assert g.nodes[0] == 0.0
    assert g.nodes[-1] == pytest.approx(10.0)
    assert len(g.nodes) == 101
    with pytest.raises(ValueError):
        RadialGrid(-1.0, 10)
    with pytest.raises(ValueError):
        RadialGrid(1.0, 0)


def test_laplacian_of_r_squared_is_2n(euclid3):
    g = RadialGrid(2.0, 200)
    out = apply_laplacian(euclid3, field_from(g, lambda r: r**2))
    assert np.allclose(out.values[:-1], 6.0, atol=1e-8)


def test_laplacian_of_constant_vanishes(hyp3):
    g = RadialGrid(5.0, 100)
    out = apply_laplacian(hyp3, field_from(g, lambda r: np.full_like(r, 3.7)))
    assert np.max(np.abs(out.values)) < 1e-10


def test_laplacian_linearity(hyp3):
    g = RadialGrid(5.0, 100)
    u = field_from(g, lambda r: np.exp(-(r**2)))
    w = field_from(g, lambda r: np.cos(r))
    a, b = 2.5, -1.25
    comb = RadialField(g, a * u.values + b * w.values)
    lhs = apply_laplacian(hyp3, comb).values
    rhs = a * apply_laplacian(hyp3, u).values + b * apply_laplacian(hyp3, w).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_richardson_ratio_on_hyperbolic(hyp3):
    # halving dr divides the consistency error by ~4
    f = SmoothRadialFn(
        eval=lambda r: np.exp(-(r**2)),
        deriv1=lambda r: -2 * r * np.exp(-(r**2)),
        deriv2=lambda r: (4 * r**2 - 2) * np.exp(-(r**2)),
    )
    errs = []
    for N in (200, 401):
        g = RadialGrid(5.0, N)
        num = apply_laplacian(hyp3, field_from(g, f.eval)).values[1:-1]
        exact = apply_laplacian_analytic(hyp3, f, g.interior)
        errs.append(np.max(np.abs(num - exact)))
    ratio = errs[0] / errs[1]
    assert 3.5 < ratio < 4.5


def test_interior_maximum_principle_shadow(hyp3):
    # discrete Delta at a strict interior maximum is nonpositive
    g = RadialGrid(10.0, 200)
    u = field_from(g, lambda r: np.exp(-((r - 4.0) ** 2)))
    i = int(np.argmax(u.values))
    assert 0 < i < g.N + 1
    out = apply_laplacian(hyp3, u)
    assert out.values[i] <= 0.0


def test_drift_resolution_guard():
    M = make_gamma_model(3, 1.0, 2.0, 20.0, 1e-3)
    with pytest.raises(StabilityError):
        apply_laplacian(M, field_from(RadialGrid(20.0, 50), lambda r: np.exp(-r)))
    # fine grid passes
    apply_laplacian(M, field_from(RadialGrid(20.0, 800), lambda r: np.exp(-r)))


def test_grid_beyond_table_rejected():
    M = make_gamma_model(3, 1.0, 2.0, 10.0, 1e-3)
    with pytest.raises(ValueError):
        apply_laplacian(M, field_from(RadialGrid(12.0, 400), lambda r: np.exp(-r)))


def test_sup_norm():
    g = RadialGrid(3.0, 2)
    assert sup_norm(RadialField(g, np.array([0.0, 1.0, -3.0, 2.0]))) == 3.0


def test_volume_integral_euclidean(euclid3):
    g = RadialGrid(1.0, 2000)
    one = field_from(g, lambda r: np.ones_like(r))
    val = volume_inner_product(euclid3, one, one)
    assert val == pytest.approx(1.0 / 3.0, abs=1e-6)


def test_volume_integral_grid_mismatch(euclid3):
    u = field_from(RadialGrid(1.0, 10), lambda r: r)
    w = field_from(RadialGrid(1.0, 20), lambda r: r)
    with pytest.raises(ValueError):
        volume_inner_product(euclid3, u, w)


def test_rayleigh_quotient_matches_eigenvalue(hyp3):
    est = dirichlet_lambda1(hyp3, 10.0, 800)
    phi = est.eigenfunction
    lap = apply_laplacian(hyp3, phi)
    rq = -volume_inner_product(hyp3, phi, lap) / volume_inner_product(hyp3, phi, phi)
    assert rq == pytest.approx(est.lambda1_ball, abs=1e-6)


def test_analytic_laplacian_values(euclid3, hyp3):
    f = SmoothRadialFn(lambda r: r**2, lambda r: 2 * r, lambda r: np.full_like(r, 2.0))
    assert apply_laplacian_analytic(euclid3, f, 1.0) == pytest.approx(6.0)
    g = SmoothRadialFn(
        lambda r: np.exp(-r), lambda r: -np.exp(-r), lambda r: np.exp(-r)
    )
    expect = np.exp(-2.0) * (1.0 - 2.0 / np.tanh(2.0))
    assert apply_laplacian_analytic(hyp3, g, 2.0) == pytest.approx(expect, rel=1e-12)
    const = SmoothRadialFn(
        lambda r: np.ones_like(np.asarray(r, dtype=float)),
        lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        lambda r: np.zeros_like(np.asarray(r, dtype=float)),
    )
    assert apply_laplacian_analytic(hyp3, const, 3.0) == 0.0
    with pytest.raises(ValueError):
        apply_laplacian_analytic(hyp3, f, 0.0)


def test_field_csv_roundtrip(tmp_path):
    g = RadialGrid(2.0, 19)
    u = field_from(g, lambda r: np.sin(r))
    path = tmp_path / "field.csv"
    save_field_csv(u, path)
    assert path.read_text().splitlines()[0] == "r,u"
    loaded = load_field_csv(path)
    assert loaded.grid.N == g.N
    assert np.allclose(loaded.values, u.values)
