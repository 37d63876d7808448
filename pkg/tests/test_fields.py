import numpy as np
import pytest

from landislab.fields import (
    Ball,
    ComplexField,
    GridSpec,
    Polyline,
    RegionError,
    ScalarField,
    interior_mask,
    load_binary,
    partial_x,
    partial_y,
    points_in_polygon,
    sample,
    save_binary,
    save_csv,
    sup_norm,
    wirtinger,
)


def grid(n=32, r=1.0):
    return GridSpec.square(r, n)


def test_gridspec_invariants():
    g = grid(16, 2.0)
    assert g.h == pytest.approx(0.25)
    assert g.width == pytest.approx(4.0)
    assert g.shape == (17, 17)
    assert g.covers_ball(0, 0, 1.9)
    assert not g.covers_ball(0, 0, 2.1)
    with pytest.raises(ValueError):
        GridSpec(0, 0, 4, 4, 0.1)
    with pytest.raises(ValueError):
        GridSpec(0, 0, 16, 16, -1.0)


def test_fields_are_locked_and_finite():
    g = grid()
    f = ScalarField.from_function(g, lambda x, y: x + y)
    with pytest.raises(ValueError):
        f.values[0, 0] = 3.0
    with pytest.raises(ValueError):
        ScalarField(g, np.full(g.shape, np.nan))


def test_partial_linear_exact():
    g = grid()
    f = ScalarField.from_function(g, lambda x, y: x)
    assert np.allclose(partial_x(f).values, 1.0, atol=1e-13)
    assert np.allclose(partial_y(f).values, 0.0, atol=1e-13)
    c = ScalarField.full(g, 3.5)
    assert np.allclose(partial_x(c).values, 0.0)
    assert np.allclose(partial_y(c).values, 0.0)


def test_partial_refinement_ratio_sin():
    # max error ratio ~ 4 when h halves (second-order stencils)
    errs = []
    for h in (0.02, 0.01):
        n = int(round(2.0 / h))
        g = GridSpec.square(1.0, n)
        f = ScalarField.from_function(g, lambda x, y: np.sin(x))
        err = np.max(np.abs(partial_x(f).values - np.cos(g.nodes()[0])))
        errs.append(err)
    ratio = errs[0] / errs[1]
    assert 3.3 < ratio < 4.7


def test_wirtinger_monomials():
    g = grid(48)
    z = ComplexField.from_function(g, lambda z: z)
    dz, dzb = wirtinger(z)
    assert np.allclose(dz.values, 1.0, atol=1e-12)
    assert np.allclose(dzb.values, 0.0, atol=1e-12)
    zb = ComplexField.from_function(g, lambda z: np.conj(z))
    dz, dzb = wirtinger(zb)
    assert np.allclose(dz.values, 0.0, atol=1e-12)
    assert np.allclose(dzb.values, 1.0, atol=1e-12)


def test_wirtinger_z_zbar():
    # f = z*conj(z): df = conj(z), dbar f = z, up to O(h^2)
    g = grid(64)
    f = ComplexField.from_function(g, lambda z: z * np.conj(z))
    dz, dzb = wirtinger(f)
    Z = g.nodes()[0] + 1j * g.nodes()[1]
    assert np.max(np.abs(dz.values - np.conj(Z))) < 5e-12
    assert np.max(np.abs(dzb.values - Z)) < 5e-12


def test_wirtinger_linearity():
    g = grid(24)
    rng = np.random.default_rng(0)
    f = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    h = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    a, b = 2.0 + 1.0j, -0.5j
    comb = ComplexField(g, a * f.values + b * h.values)
    for k in range(2):
        lhs = wirtinger(comb)[k].values
        rhs = a * wirtinger(f)[k].values + b * wirtinger(h)[k].values
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1, np.max(np.abs(rhs)))


def test_mixed_wirtinger_is_quarter_laplacian():
    # dbar d f = d dbar f = Laplacian(f)/4 within O(h^2)
    errs = []
    for n in (32, 64):
        g = grid(n)
        f = ComplexField.from_function(g, lambda z: np.exp(0.3 * z.real) * np.cos(z.imag)
                                       + 1j * np.sin(z.real * 0.5))
        dz, dzb = wirtinger(f)
        m = interior_mask(g, 2)
        a = wirtinger(dz)[1].values
        b = wirtinger(dzb)[0].values
        X, Y = g.nodes()
        lap = (0.3 ** 2 - 1) * np.exp(0.3 * X) * np.cos(Y) - 1j * 0.25 * np.sin(0.5 * X)
        errs.append(np.max(np.abs(a - lap / 4)[m]))
        assert np.max(np.abs(a - b)[m]) < 1e-10
    assert errs[1] < errs[0] / 2.5


def test_sample_bilinear():
    g = grid(32)
    f = ScalarField.from_function(g, lambda x, y: 2 * x - 3 * y + 1)
    pts = np.array([[0.13, -0.41], [0.9999, 0.9999], [-1.0, -1.0]])
    vals = sample(f, pts[:, 0], pts[:, 1])
    assert np.allclose(vals, 2 * pts[:, 0] - 3 * pts[:, 1] + 1, atol=1e-12)
    with pytest.raises(RegionError):
        sample(f, [1.5], [0.0])


def test_sup_norm_regions():
    g = grid(64, 2.0)
    one = ScalarField.full(g, 1.0)
    assert sup_norm(one, Ball(0, 0, 0.7)) == pytest.approx(1.0)
    f = ScalarField.from_function(g, lambda x, y: np.hypot(x, y))
    r = 1.3
    assert abs(sup_norm(f, Ball(0, 0, r)) - r) < g.h
    # full grid equals exhaustive scan
    rng = np.random.default_rng(1)
    noisy = ScalarField(g, rng.normal(size=g.shape))
    assert sup_norm(noisy, None) == pytest.approx(np.max(np.abs(noisy.values)))
    big = Ball(0, 0, 4.0)  # covers every node
    assert sup_norm(noisy, big) == pytest.approx(np.max(np.abs(noisy.values)))
    with pytest.raises(RegionError):
        sup_norm(noisy, Ball(100.0, 100.0, 0.5))


def test_sup_norm_polyline_matches_ball():
    g = grid(64, 2.0)
    f = ScalarField.from_function(g, lambda x, y: x ** 2 + 0.5 * y)
    th = np.linspace(0, 2 * np.pi, 257)
    poly = Polyline(np.column_stack([1.1 * np.cos(th), 1.1 * np.sin(th)]))
    a = sup_norm(f, poly)
    b = sup_norm(f, Ball(0, 0, 1.1))
    assert abs(a - b) < 5e-3


def test_points_in_polygon_square():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    x = np.array([0.5, 1.5, 0.999, -0.1])
    y = np.array([0.5, 0.5, 0.001, 0.5])
    assert list(points_in_polygon(x, y, square)) == [True, False, True, False]


def test_polyline_radii():
    th = np.linspace(0, 2 * np.pi, 400)
    ell = Polyline(np.column_stack([2 * np.cos(th), np.sin(th)]))
    assert ell.circumradius() == pytest.approx(2.0, abs=1e-3)
    assert ell.inradius() == pytest.approx(1.0, abs=1e-3)


def test_binary_roundtrip(tmp_path):
    g = grid(16)
    f = ScalarField.from_function(g, lambda x, y: np.sin(x) * y)
    p = tmp_path / "f.bin"
    save_binary(f, p)
    f2 = load_binary(p)
    assert isinstance(f2, ScalarField)
    assert f2.spec.close_to(g)
    assert np.array_equal(f2.values, f.values)

    c = ComplexField.from_function(g, lambda z: z ** 2)
    pc = tmp_path / "c.bin"
    save_binary(c, pc)
    c2 = load_binary(pc)
    assert isinstance(c2, ComplexField)
    assert np.array_equal(c2.values, c.values)


def test_csv_export(tmp_path):
    g = grid(8)
    f = ScalarField.from_function(g, lambda x, y: x)
    p = tmp_path / "f.csv"
    save_csv(f, p)
    rows = p.read_text().strip().splitlines()
    assert rows[0] == "x,y,value"
    assert len(rows) == 1 + (g.nx + 1) * (g.ny + 1)


def test_polyline_csv_roundtrip(tmp_path):
    th = np.linspace(0, 2 * np.pi, 33)
    poly = Polyline(np.column_stack([np.cos(th), np.sin(th)]))
    p = tmp_path / "poly.csv"
    poly.save_csv(p)
    poly2 = Polyline.load_csv(p)
    assert np.allclose(poly.vertices, poly2.vertices)
