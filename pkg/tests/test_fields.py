"""Tests for the pseudospectral torus calculus kernel."""

import math

import numpy as np
import pytest

from chemorelax import fields
from chemorelax.fields import Field2D


def test_field_requires_power_of_two_square():
    with pytest.raises(ValueError):
        Field2D(np.zeros((12, 12)))
    with pytest.raises(ValueError):
        Field2D(np.zeros((16, 8)))
    with pytest.raises(ValueError):
        Field2D(np.zeros(16))


def test_field_rejects_nonfinite():
    data = np.zeros((8, 8))
    data[3, 3] = np.nan
    with pytest.raises(ValueError):
        Field2D(data)


def test_binary_ops_require_matching_grids():
    a = fields.constant(8, 1.0)
    b = fields.constant(16, 1.0)
    with pytest.raises(ValueError):
        a + b


def test_field_data_is_immutable():
    f = fields.constant(8, 1.0)
    with pytest.raises(ValueError):
        f.data[0, 0] = 2.0


def test_mean_equals_zero_mode():
    rng = np.random.default_rng(0)
    f = Field2D(rng.standard_normal((32, 32)))
    sf = fields.transform(f)
    assert abs(fields.mean(f) - sf.coeffs[0, 0].real) < 1e-14
    assert abs(sf.coeffs[0, 0].imag) < 1e-14


def test_transform_round_trip():
    rng = np.random.default_rng(1)
    f = Field2D(rng.standard_normal((32, 32)))
    back = fields.inverse(fields.transform(f))
    assert np.max(np.abs(back.data - f.data)) < 1e-12 * np.max(np.abs(f.data))


def test_hermitian_symmetry():
    rng = np.random.default_rng(2)
    sf = fields.transform(Field2D(rng.standard_normal((16, 16))))
    c = sf.coeffs
    conj = np.conj(c[(-np.arange(16)) % 16][:, (-np.arange(16)) % 16])
    assert np.max(np.abs(c - conj)) < 1e-13


def test_derivative_of_constant_is_exactly_zero():
    d = fields.derivative(fields.constant(16, 3.0), "x")
    assert np.all(d.data == 0.0)


def test_derivative_sine_oracle():
    f = fields.from_function(32, lambda x, y: np.sin(2 * np.pi * x))
    exact = fields.from_function(32, lambda x, y: 2 * np.pi * np.cos(2 * np.pi * x))
    err = fields.lp_norm(fields.derivative(f, "x") - exact, np.inf)
    assert err < 1e-10


def test_derivative_wrong_axis_is_zero():
    f = fields.from_function(32, lambda x, y: np.cos(2 * np.pi * y))
    assert fields.lp_norm(fields.derivative(f, "x"), np.inf) < 1e-13
    with pytest.raises(ValueError):
        fields.derivative(f, "z")


def test_laplacian_eigenfunction():
    f = fields.from_function(32, lambda x, y: np.cos(2 * np.pi * x))
    err = fields.lp_norm(fields.laplacian(f) + f * (4 * np.pi**2), np.inf)
    assert err < 1e-10
    # linearity on a two-mode combination
    g = fields.from_function(32, lambda x, y: np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y))
    err = fields.lp_norm(fields.laplacian(g) + g * (4 * np.pi**2), np.inf)
    assert err < 1e-10
    assert np.all(fields.laplacian(fields.constant(16, 1.0)).data == 0.0)


def test_helmholtz_constant_and_single_mode():
    c = fields.solve_helmholtz(fields.constant(32, 1.5), 2.0, 4.0)
    assert fields.lp_norm(c - fields.constant(32, 0.75), np.inf) < 1e-13

    rho = fields.from_function(32, lambda x, y: np.cos(2 * np.pi * x))
    c = fields.solve_helmholtz(rho, 1.0, 1.0)
    exact = rho * (1.0 / (1.0 + 4 * np.pi**2))
    assert fields.lp_norm(c - exact, np.inf) < 1e-13

    zero = fields.solve_helmholtz(fields.constant(32, 0.0), 1.0, 1.0)
    assert np.all(zero.data == 0.0)


def test_helmholtz_rejects_nonpositive_beta():
    rho = fields.constant(16, 1.0)
    with pytest.raises(ValueError):
        fields.solve_helmholtz(rho, 1.0, 0.0)
    with pytest.raises(ValueError):
        fields.solve_helmholtz(rho, 1.0, -1.0)


def test_helmholtz_residual_on_random_field():
    rng = np.random.default_rng(3)
    rho = fields.dealias_field(Field2D(1.0 + 0.5 * rng.standard_normal((64, 64))))
    c = fields.solve_helmholtz(rho, 1.3, 0.7)
    res = fields.laplacian(c) + rho * 1.3 - c * 0.7
    assert fields.lp_norm(res, np.inf) < 1e-10 * (1 + fields.lp_norm(rho, np.inf))


def test_poisson_meanzero_oracles():
    assert np.all(fields.solve_poisson_meanzero(fields.constant(16, 5.0), 1.0).data == 0.0)

    rho = fields.from_function(32, lambda x, y: 1.0 + np.cos(2 * np.pi * x))
    c = fields.solve_poisson_meanzero(rho, 1.0)
    exact = fields.from_function(32, lambda x, y: np.cos(2 * np.pi * x) / (4 * np.pi**2))
    assert fields.lp_norm(c - exact, np.inf) < 1e-13

    rho = fields.from_function(32, lambda x, y: np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y))
    c = fields.solve_poisson_meanzero(rho, 1.0)
    exact = rho * (1.0 / (8 * np.pi**2))
    assert fields.lp_norm(c - exact, np.inf) < 1e-13


def test_poisson_meanzero_gauge_and_residual():
    rng = np.random.default_rng(4)
    rho = Field2D(1.0 + 0.5 * rng.standard_normal((32, 32)))
    c = fields.solve_poisson_meanzero(rho, 2.0)
    assert abs(fields.mean(c)) < 1e-13
    source = (rho - fields.mean(rho)) * 2.0
    assert fields.lp_norm(fields.laplacian(c) + source, np.inf) < 1e-10


def test_sobolev_norm_values():
    assert abs(fields.sobolev_norm(fields.constant(16, 1.0), 3.0) - 1.0) < 1e-13
    f = fields.from_function(32, lambda x, y: np.sin(2 * np.pi * x))
    assert abs(fields.sobolev_norm(f, 0.0) - math.sqrt(0.5)) < 1e-12
    expect = math.sqrt((1 + 4 * np.pi**2) / 2)
    assert abs(fields.sobolev_norm(f, 1.0) - expect) < 1e-12
    with pytest.raises(ValueError):
        fields.sobolev_norm(f, -1.0)


def test_sobolev_norm_monotone_in_s():
    rng = np.random.default_rng(5)
    f = Field2D(rng.standard_normal((32, 32)))
    values = [fields.sobolev_norm(f, s) for s in (0.0, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_lp_norm_values():
    assert abs(fields.lp_norm(fields.constant(16, -2.5), 3.0) - 2.5) < 1e-13
    f = fields.from_function(64, lambda x, y: np.sin(2 * np.pi * x))
    assert abs(fields.lp_norm(f, 2) - math.sqrt(0.5)) < 1e-12
    # dense-quadrature oracle for p=1: int |sin(2 pi x)| = 2/pi; kinks sit on
    # grid nodes, so the grid quadrature is O(N^-2) accurate
    assert abs(fields.lp_norm(f, 1) - 2 / math.pi) < 1e-3
    assert abs(fields.lp_norm(f, np.inf) - 1.0) < 1e-13
    with pytest.raises(ValueError):
        fields.lp_norm(f, 0.5)


def test_lp1_quadrature_refines_at_second_order():
    errs = []
    for n in (32, 64, 128):
        f = fields.from_function(n, lambda x, y: np.sin(2 * np.pi * x))
        errs.append(abs(fields.lp_norm(f, 1) - 2 / math.pi))
    order = math.log2(errs[0] / errs[1])
    assert 1.7 < order < 2.3


def test_parseval():
    rng = np.random.default_rng(6)
    f = Field2D(rng.standard_normal((32, 32)))
    lhs = fields.lp_norm(f, 2) ** 2
    rhs = float(np.sum(np.abs(fields.transform(f).coeffs) ** 2))
    assert abs(lhs - rhs) < 1e-12 * lhs


def test_dealias_rule():
    n = 32
    sf = fields.transform(fields.constant(n, 2.0))
    assert np.max(np.abs(fields.dealias(sf).coeffs - sf.coeffs)) == 0.0

    low = fields.from_function(n, lambda x, y: np.cos(2 * np.pi * 3 * x))
    assert fields.lp_norm(fields.dealias_field(low) - low, np.inf) < 1e-13

    nyquist = fields.from_function(n, lambda x, y: np.cos(2 * np.pi * (n // 2) * x))
    assert fields.lp_norm(fields.dealias_field(nyquist), np.inf) < 1e-13

    above = fields.from_function(n, lambda x, y: np.cos(2 * np.pi * (n // 3 + 1) * x))
    assert fields.lp_norm(fields.dealias_field(above), np.inf) < 1e-13


def test_snapshot_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    f = Field2D(rng.standard_normal((16, 16)))
    path = tmp_path / "field.f2d"
    fields.write_snapshot(path, f, 0.125)
    g, t = fields.read_snapshot(path)
    assert t == 0.125
    assert np.array_equal(g.data, f.data)


def test_snapshot_rejects_garbage(tmp_path):
    path = tmp_path / "bad.f2d"
    path.write_bytes(b"NOT A SNAPSHOT\n")
    with pytest.raises(ValueError):
        fields.read_snapshot(path)
    path.write_bytes(b"F2D 16 0.0\n" + b"\x00" * 17)
    with pytest.raises(ValueError):
        fields.read_snapshot(path)
