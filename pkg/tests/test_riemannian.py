import numpy as np
import pytest

from sasakiverify.riemannian import (
    MetricError,
    MetricField,
    check_metric,
    christoffel,
    covariant_derivative_oneform,
    covariant_derivative_vector,
    euclidean_metric,
    nabla_02,
)
from sasakiverify.tensor_core import cos, fd_jacobian, sin


def polar(x):
    return [[1.0, 0.0], [0.0, x[0] * x[0]]]


def warped(x):
    a = 1.0 + 0.3 * sin(x[0]) * cos(x[1])
    return [[a, 0.2 * x[0]], [0.2 * x[0], 2.0 + x[1] * x[1]]]


def christoffel_fd(components, p):
    """Christoffel symbols from a finite-difference metric derivative."""
    g = np.array(components(list(p)), dtype=float)
    d = len(p)
    dg = fd_jacobian(lambda x: np.array(components(list(x)), dtype=float).ravel(), p).reshape(d, d, d)
    ginv = np.linalg.inv(g)
    out = np.zeros((d, d, d))
    for k in range(d):
        for i in range(d):
            for j in range(d):
                out[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[j, l, i] + dg[i, l, j] - dg[i, j, l]) for l in range(d)
                )
    return out


def test_polar_christoffel_closed_form():
    r = 1.7
    gam = christoffel(MetricField(2, polar), [r, 0.4]).entries
    assert gam[0, 1, 1] == pytest.approx(-r)
    assert gam[1, 0, 1] == pytest.approx(1 / r)
    assert gam[1, 1, 0] == pytest.approx(1 / r)
    assert gam[0, 0, 0] == 0.0


@pytest.mark.parametrize("p", [[0.3, -0.2], [1.1, 0.7], [-0.5, 1.4]])
def test_christoffel_matches_fd_oracle(p):
    gam = christoffel(MetricField(2, warped), p).entries
    np.testing.assert_allclose(gam, christoffel_fd(warped, np.array(p)), atol=1e-9)


def test_metric_compatibility():
    p = np.array([0.4, -0.9])
    m = MetricField(2, warped)
    g, dg = m.jet1(p)
    gam = christoffel(m, p).entries
    for Y in np.eye(2):
        np.testing.assert_allclose(nabla_02(g, dg, gam, Y), 0.0, atol=1e-13)


def test_euclidean_covariant_derivative_is_directional_derivative():
    m = euclidean_metric(3)
    X = lambda x: [x[0] * x[1], sin(x[2]), 1.0]  # noqa: E731
    p = np.array([0.3, 0.5, -0.2])
    Y = np.array([1.0, -2.0, 0.5])
    expect = [0.5 * 1.0 + 0.3 * -2.0, np.cos(-0.2) * 0.5, 0.0]
    np.testing.assert_allclose(covariant_derivative_vector(X, m, Y, p), expect, atol=1e-14)


def test_hessian_of_radius_in_polar_coordinates():
    # nabla dr = r dtheta^2, so (nabla_{d_theta} dr)_theta = r
    m = MetricField(2, polar)
    w = lambda x: [1.0, 0.0]  # noqa: E731
    out = covariant_derivative_oneform(w, m, [0.0, 1.0], [2.0, 0.0])
    np.testing.assert_allclose(out, [0.0, 2.0], atol=1e-14)


@pytest.mark.parametrize(
    "g",
    [np.array([[1.0, 0.5], [0.0, 1.0]]), np.array([[1.0, 0.0], [0.0, -1.0]]), np.zeros((2, 2))],
)
def test_invalid_metrics(g):
    with pytest.raises(MetricError):
        check_metric(g)


def test_christoffel_rejects_degenerate_metric():
    with pytest.raises(MetricError):
        christoffel(MetricField(2, polar), [0.0, 0.0])
