"""Explicit ambient Sasakian structures on R^{2n+1} and their axiom checks."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .report import ResidualReport
from .riemannian import MetricField, christoffel_from_derivatives, euclidean_metric
from .tensor_core import seed, split

__all__ = [
    "ContactMetricStructure",
    "check_axioms",
    "fundamental_form",
    "get_ambient",
    "perturb_phi",
    "probe_pairs",
    "standard_sasakian",
]


@dataclass(frozen=True)
class ContactMetricStructure:
    """(phi, xi, eta, g) as coordinate-component fields on R^{2n+1}.

    ``phi(x)`` returns the matrix ``phi[k][j]`` (image of ``d_j`` in row
    ``k``), ``xi(x)`` a vector, ``eta(x)`` a covector and ``metric`` the
    Riemannian metric.
    """

    n: int
    phi: Callable[[Sequence], object]
    xi: Callable[[Sequence], object]
    eta: Callable[[Sequence], object]
    metric: MetricField
    name: str = "custom"

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def at(self, p) -> "AmbientPoint":
        return AmbientPoint.evaluate(self, p)


def standard_sasakian(n: int) -> ContactMetricStructure:
    """The classical Sasakian structure on R^{2n+1}.

    Coordinates are ``(x^1..x^n, y^1..y^n, z)`` with
    ``eta = (dz - sum y^i dx^i) / 2``, ``xi = 2 d_z`` and
    ``g = eta (x) eta + (sum (dx^i)^2 + (dy^i)^2) / 4``.  On the coordinate
    frame ``phi(d_xi) = -d_yi``, ``phi(d_yi) = d_xi + y^i d_z``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    D = 2 * n + 1

    def eta(x):
        out = [0.0] * D
        for i in range(n):
            out[i] = -0.5 * x[n + i]
        out[D - 1] = 0.5
        return out

    def xi(x):
        out = [0.0] * D
        out[D - 1] = 2.0
        return out

    def metric(x):
        e = eta(x)
        g = [[e[i] * e[j] for j in range(D)] for i in range(D)]
        for i in range(2 * n):
            g[i][i] = g[i][i] + 0.25
        return g

    def phi(x):
        m = [[0.0] * D for _ in range(D)]
        for i in range(n):
            m[n + i][i] = -1.0
            m[i][n + i] = 1.0
            m[D - 1][n + i] = x[n + i]
        return m

    return ContactMetricStructure(n, phi, xi, eta, MetricField(D, metric), name="standard-sasakian")


def perturb_phi(S: ContactMetricStructure, row: int, col: int, delta: float) -> ContactMetricStructure:
    """Fault injection: add ``delta`` to one coordinate entry of phi."""
    base = S.phi

    def phi(x):
        m = [list(r) for r in base(x)]
        m[row][col] = m[row][col] + delta
        return m

    return replace(S, phi=phi, name=f"{S.name}+fault")


def with_flat_metric(S: ContactMetricStructure) -> ContactMetricStructure:
    return replace(S, metric=euclidean_metric(S.dim), name=f"{S.name}+flat")


_AMBIENTS = {"standard-sasakian": standard_sasakian}


def get_ambient(name: str, n: int) -> ContactMetricStructure:
    try:
        return _AMBIENTS[name](n)
    except KeyError:
        raise ValueError(f"unknown ambient model {name!r}") from None


@dataclass
class AmbientPoint:
    """Values and first partials of every structure field at one point."""

    p: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray
    eta: np.ndarray
    g: np.ndarray
    gamma: np.ndarray

    @classmethod
    def evaluate(cls, S: ContactMetricStructure, p) -> "AmbientPoint":
        p = np.asarray(p, dtype=float)
        x = seed(p, order=1)
        D = S.dim
        phi, dphi = split(S.phi(x), D)
        xi, dxi = split(S.xi(x), D)
        eta, _ = split(S.eta(x), D)
        g, dg = split(S.metric.components(x), D)
        return cls(p, phi, dphi, xi, dxi, eta, g, christoffel_from_derivatives(g, dg))

    def nabla_phi(self, X, Y):
        """(nabla_X phi) Y for batched X, Y."""
        term = (
            self.dphi
            + np.einsum("kil,lj->kji", self.gamma, self.phi)
            - np.einsum("lij,kl->kji", self.gamma, self.phi)
        )
        return np.einsum("kji,bi,bj->bk", term, X, Y)

    def nabla_xi(self, X):
        return np.einsum("bi,ki->bk", X, self.dxi) + np.einsum("kij,bi,j->bk", self.gamma, X, self.xi)


def probe_pairs(dim: int, rng: np.random.Generator, n_random: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Every coordinate basis pair plus ``n_random`` random pairs."""
    eye = np.eye(dim)
    X = np.repeat(eye, dim, axis=0)
    Y = np.tile(eye, (dim, 1))
    R = rng.standard_normal((2, n_random, dim))
    return np.vstack([X, R[0]]), np.vstack([Y, R[1]])


def fundamental_form(S: ContactMetricStructure, X, Y, p) -> float:
    """'F(X, Y) = g(phi X, Y)."""
    a = S.at(p)
    return float(np.asarray(Y, float) @ a.g @ (a.phi @ np.asarray(X, float)))


def check_axioms(
    S: ContactMetricStructure, p, seed: int = 0, tol: float = 1e-8, n_random: int = 10
) -> ResidualReport:
    a = S.at(p)
    rng = np.random.default_rng(seed)
    X, Y = probe_pairs(S.dim, rng, n_random)
    rep = ResidualReport("ambient", seed)
    phi, g, xi, eta = a.phi, a.g, a.xi, a.eta
    pX, pY = X @ phi.T, Y @ phi.T
    eX, eY = X @ eta, Y @ eta

    def gg(A, B):
        return np.einsum("bi,ij,bj->b", A, g, B)

    def F(A, B):
        return gg(A @ phi.T, B)

    rep.check("1.1", [eta @ xi - 1.0], tol)
    rep.check("1.2", pX @ phi.T + X - eX[:, None] * xi, tol)
    rep.check("1.3a", pX @ eta, tol)
    rep.check("1.3b", [phi @ xi], tol)
    sv = np.linalg.svd(phi, compute_uv=False)
    rank = int(np.sum(sv > 1e-8 * sv[0])) if sv[0] > 0 else 0
    rep.check("1.3c", [float(rank - 2 * S.n)], tol, note=f"rank={rank}")
    rep.check("1.4", gg(pX, pY) - gg(X, Y) + eX * eY, tol)
    rep.check("1.5", X @ g @ xi - eX, tol)
    rep.check("1.6", a.nabla_phi(X, Y) - gg(X, Y)[:, None] * xi + eY[:, None] * X, tol)
    rep.check("1.7", a.nabla_xi(X) + pX, tol)
    rep.check("1.8", F(X, Y) + F(Y, X), tol)
    rep.check("1.9", F(X, pY) - F(Y, pX), tol)
    rep.check("1.10", F(pX, pY) - F(X, Y), tol)
    return rep
