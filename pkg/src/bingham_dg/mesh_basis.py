"""1D mesh, normalized Legendre bases, Gauss quadrature and L2 projection.

Fields are stored modally: on element ``e`` a field reads

    f(x) = sum_i c[e, i] * psi_i(xi),    x = x_c + (w_e / 2) * xi,

with ``psi_i = sqrt((2 i + 1) / 2) * P_i`` orthonormal on the reference
interval [-1, 1]. The physical mass matrix of an element is therefore
``(w_e / 2) * I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Mesh1D:
    """Partition of [x_left, x_right] into ``n_el`` intervals."""

    element_edges: np.ndarray

    def __post_init__(self):
        edges = np.array(self.element_edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise InvalidArgumentError("mesh needs at least two edges")
        if not np.all(np.diff(edges) > 0):
            raise InvalidArgumentError("element edges must be strictly increasing")
        edges.setflags(write=False)
        object.__setattr__(self, "element_edges", edges)

    @property
    def x_left(self) -> float:
        return float(self.element_edges[0])

    @property
    def x_right(self) -> float:
        return float(self.element_edges[-1])

    @property
    def n_el(self) -> int:
        return self.element_edges.size - 1

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.element_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.element_edges[1:] + self.element_edges[:-1])

    @property
    def jacobians(self) -> np.ndarray:
        """dx/dxi per element."""
        return 0.5 * self.widths

    def physical_points(self, xi) -> np.ndarray:
        """Map reference coordinates to x for every element, shape (n_el, len(xi))."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return self.centers[:, None] + self.jacobians[:, None] * xi[None, :]

    def locate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Element index and reference coordinate of physical points."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x_left) or np.any(x > self.x_right):
            raise InvalidArgumentError("point outside the mesh")
        e = np.searchsorted(self.element_edges, x, side="right") - 1
        e = np.clip(e, 0, self.n_el - 1)
        xi = (x - self.centers[e]) / self.jacobians[e]
        return e, np.clip(xi, -1.0, 1.0)


def build_uniform_mesh(x_left: float, x_right: float, n_el: int) -> Mesh1D:
    if int(n_el) != n_el or n_el < 1:
        raise InvalidArgumentError(f"n_el must be a positive integer, got {n_el}")
    if not x_left < x_right:
        raise InvalidArgumentError(f"degenerate interval [{x_left}, {x_right}]")
    return Mesh1D(np.linspace(x_left, x_right, int(n_el) + 1))


def _normalized_legendre(order: int, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and reference derivatives, each of shape (len(xi), order + 1)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    vals = np.empty((xi.size, order + 1))
    ders = np.empty((xi.size, order + 1))
    for i in range(order + 1):
        c = np.zeros(i + 1)
        c[i] = np.sqrt((2 * i + 1) / 2.0)
        vals[:, i] = npleg.legval(xi, c)
        ders[:, i] = npleg.legval(xi, npleg.legder(c)) if i > 0 else 0.0
    return vals, ders


@dataclass(frozen=True)
class BasisSet:
    """Normalized Legendre basis of degree ``order`` tabulated on a Gauss rule.

    ``values[q, i]`` is psi_i at node q and ``derivs[q, i]`` its derivative
    with respect to the reference coordinate.
    """

    order: int
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    trace_left: np.ndarray = field(repr=False)
    trace_right: np.ndarray = field(repr=False)

    @property
    def n_basis(self) -> int:
        return self.order + 1

    @property
    def n_quad(self) -> int:
        return self.quad_nodes.size

    def eval(self, xi) -> np.ndarray:
        return _normalized_legendre(self.order, xi)[0]

    def eval_deriv(self, xi) -> np.ndarray:
        return _normalized_legendre(self.order, xi)[1]

    def gram(self) -> np.ndarray:
        return self.values.T @ (self.quad_weights[:, None] * self.values)


def legendre_basis(order: int, n_quad: int | None = None) -> BasisSet:
    """Tabulate the orthonormal Legendre basis on an ``n_quad``-point Gauss rule."""
    if int(order) != order or order < 0:
        raise InvalidArgumentError(f"order must be a non-negative integer, got {order}")
    order = int(order)
    if n_quad is None:
        n_quad = order + 2
    if n_quad < order + 1:
        raise InvalidArgumentError(
            f"{n_quad} Gauss points cannot integrate degree {2 * order} products exactly"
        )
    nodes, weights = npleg.leggauss(int(n_quad))
    vals, ders = _normalized_legendre(order, nodes)
    tl = _normalized_legendre(order, -1.0)[0][0]
    tr = _normalized_legendre(order, 1.0)[0][0]
    for a in (nodes, weights, vals, ders, tl, tr):
        a.setflags(write=False)
    return BasisSet(order, nodes, weights, vals, ders, tl, tr)


@dataclass(frozen=True)
class CoefficientField:
    """Per-element modal coefficients, shape (n_el, basis_order + 1)."""

    basis_order: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[1] != self.basis_order + 1:
            raise InvalidArgumentError(
                f"coefficient blocks must have length {self.basis_order + 1}, got shape {c.shape}"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def n_el(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, order: int, n_el: int) -> "CoefficientField":
        return cls(order, np.zeros((n_el, order + 1)))

    def with_order(self, order: int) -> "CoefficientField":
        """L2 re-projection onto another degree (truncate or zero-pad; the basis is hierarchical)."""
        out = np.zeros((self.n_el, order + 1))
        k = min(order, self.basis_order) + 1
        out[:, :k] = self.coeffs[:, :k]
        return CoefficientField(order, out)

    def at_quadrature(self, basis: BasisSet) -> np.ndarray:
        return self.coeffs @ basis.values.T

    def at_reference(self, xi) -> np.ndarray:
        """Values at reference points for every element, shape (n_el, len(xi))."""
        return self.coeffs @ _normalized_legendre(self.basis_order, xi)[0].T

    def __call__(self, mesh: Mesh1D, x) -> np.ndarray:
        """Evaluate at physical points (right-continuous at interior edges)."""
        x = np.asarray(x, dtype=float)
        e, xi = mesh.locate(x.ravel())
        psi = _normalized_legendre(self.basis_order, xi)[0]
        return np.einsum("ni,ni->n", self.coeffs[e], psi).reshape(x.shape)


def project_function(
    f: Callable[[np.ndarray], np.ndarray],
    order: int,
    mesh: Mesh1D,
    n_quad: int | None = None,
    breakpoints: Sequence[float] = (),
) -> CoefficientField:
    """Element-wise L2 projection of ``f`` onto degree-``order`` polynomials.

    Elements containing one of ``breakpoints`` in their interior are split
    there before integrating, so step data is projected exactly.
    """
    if n_quad is None:
        n_quad = order + 10
    nodes, weights = npleg.leggauss(int(n_quad))
    coeffs = np.zeros((mesh.n_el, order + 1))
    edges = mesh.element_edges
    bps = np.sort(np.asarray(breakpoints, dtype=float))
    for e in range(mesh.n_el):
        a, b = edges[e], edges[e + 1]
        inner = bps[(bps > a) & (bps < b)]
        cuts = np.concatenate(([a], inner, [b]))
        xc, jac = 0.5 * (a + b), 0.5 * (b - a)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes
            fx = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
            psi = _normalized_legendre(order, (x - xc) / jac)[0]
            # integral over the reference element: dxi = dx / jac
            coeffs[e] += (0.5 * (hi - lo) / jac) * (weights * fx) @ psi
    return CoefficientField(order, coeffs)


def evaluate_field(field_: CoefficientField, basis: BasisSet, element: int, xi: float) -> float:
    if not 0 <= element < field_.n_el:
        raise IndexError(f"element {element} out of range for {field_.n_el} elements")
    if field_.basis_order != basis.order:
        raise InvalidArgumentError("field and basis orders differ")
    return float(field_.coeffs[element] @ basis.eval(xi)[0])
