"""Levi-Civita connection and covariant derivatives from exact metric jets.

Fields are plain callables over coordinates.  They must be written with
ordinary arithmetic (and the jet-aware primitives of
:mod:`sasakiverify.tensor_core`) so the same code evaluates on floats and on
jets.  Index conventions:

* ``gamma[k, i, j]`` is the symbol with upper index ``k``.
* ``dT[..., i]`` is the partial derivative along coordinate ``i``.
* a (1,1) tensor ``T[k, j]`` maps ``X`` to ``T @ X``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor_core import seed, split

__all__ = [
    "ChristoffelSymbols",
    "MetricField",
    "christoffel",
    "christoffel_from_derivatives",
    "covariant_derivative_11",
    "covariant_derivative_oneform",
    "covariant_derivative_vector",
    "euclidean_metric",
    "nabla_02",
    "nabla_11",
    "nabla_covector",
    "nabla_vector",
]


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricField:
    dim: int
    components: Callable[[Sequence], object]

    def at(self, p) -> np.ndarray:
        g = np.asarray(self.components(list(np.asarray(p, dtype=float))), dtype=float)
        check_metric(g)
        return g

    def jet1(self, p) -> tuple[np.ndarray, np.ndarray]:
        """Metric components and their first partials at ``p``."""
        x = seed(p, order=1)
        return split(self.components(x), self.dim)


def check_metric(g: np.ndarray) -> None:
    if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise MetricError("metric is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise MetricError("metric is not positive definite") from exc


def euclidean_metric(dim: int) -> MetricField:
    eye = np.eye(dim)
    return MetricField(dim, lambda x: eye)


@dataclass(frozen=True)
class ChristoffelSymbols:
    dim: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", 0.5 * (e + e.transpose(0, 2, 1)))


def christoffel_from_derivatives(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Symbols from metric values and partials ``dg[i, j, l] = d_l g_ij``."""
    ginv = np.linalg.inv(g)
    # lowered[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = (
        np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    )
    gamma = 0.5 * np.einsum("kl,lij->kij", ginv, lowered)
    return 0.5 * (gamma + gamma.transpose(0, 2, 1))


def christoffel(g: MetricField, p) -> ChristoffelSymbols:
    val, der = g.jet1(p)
    check_metric(val)
    return ChristoffelSymbols(g.dim, christoffel_from_derivatives(val, der))


# Kernels on explicit values and partials.  ``Y`` may be a single direction
# or a batch of directions stacked along the first axis.

def nabla_vector(X, dX, gamma, Y):
    """(nabla_Y X)^k = Y^i d_i X^k + Gamma^k_ij Y^i X^j."""
    return np.einsum("...i,ki->...k", Y, dX) + np.einsum("kij,...i,j->...k", gamma, Y, X)


def nabla_covector(w, dw, gamma, Y):
    """(nabla_Y w)_j = Y^i (d_i w_j - Gamma^l_ij w_l)."""
    return np.einsum("...i,ji->...j", Y, dw) - np.einsum("lij,...i,l->...j", gamma, Y, w)


def nabla_11(T, dT, gamma, Y):
    """(nabla_Y T)^k_j as a matrix per direction."""
    term = dT + np.einsum("kil,lj->kji", gamma, T) - np.einsum("lij,kl->kji", gamma, T)
    return np.einsum("kji,...i->...kj", term, Y)


def nabla_02(A, dA, gamma, Y):
    """(nabla_Y A)_jl for a (0,2) tensor."""
    term = dA - np.einsum("mij,ml->jli", gamma, A) - np.einsum("mil,jm->jli", gamma, A)
    return np.einsum("jli,...i->...jl", term, Y)


def _field_jet(field: Callable, p, dim: int):
    return split(field(seed(p, order=1)), dim)


def covariant_derivative_vector(X: Callable, g: MetricField, Y, p) -> np.ndarray:
    val, der = _field_jet(X, p, g.dim)
    return nabla_vector(val, der, christoffel(g, p).entries, np.asarray(Y, dtype=float))


def covariant_derivative_oneform(w: Callable, g: MetricField, Y, p) -> np.ndarray:
    val, der = _field_jet(w, p, g.dim)
    return nabla_covector(val, der, christoffel(g, p).entries, np.asarray(Y, dtype=float))


def covariant_derivative_11(T: Callable, g: MetricField, Y, p) -> np.ndarray:
    val, der = _field_jet(T, p, g.dim)
    return nabla_11(val, der, christoffel(g, p).entries, np.asarray(Y, dtype=float))
