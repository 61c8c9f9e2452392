"""DG residuals of the implicit-Euler shallow-water/Bingham system and their Jacobian.

Unknowns are stored element by element as ``[h_e | u_e | E_e]`` blocks
(modal coefficients of depth, velocity and strain rate). For element e
and test functions psi_i the residual rows are

    R_h = 1/dt <psi, h - h_old> + [psi F1_hat n] - <psi', F1>
    R_u = 1/dt <psi, hu - hu_old> + [psi F2_hat n] - <psi', F2>
          - [psi Q_hat n] + <psi', Q> - <psi, S>
    R_E = <psi, E> - [psi u_hat n] + <psi', u>

with F = (hu, hu^2 + g_c h^2/2), Q = h sigma(E)/rho and
S = -g_s h - g_c h dH/dx. F_hat is the HLL flux; Q_hat and u_hat are
central. With ``well_balanced`` set, the HLL flux is evaluated on
hydrostatically reconstructed depths (see ``_interface_fluxes``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .constitutive import PhysicalParams, RegularizationConfig, total_stress_and_derivative
from .errors import InvalidArgumentError, StateValidityError
from .fluxes import hll_flux, hll_flux_derivative
from .mesh_basis import BasisSet, CoefficientField, Mesh1D, legendre_basis

DEPTH_FLOOR = 1e-12
VARIABLES = ("h", "u", "E")


@dataclass(frozen=True)
class Dirichlet:
    value: float


@dataclass(frozen=True)
class Neumann:
    """Homogeneous Neumann: the exterior trace copies the interior one."""


@dataclass(frozen=True)
class SideBC:
    h: Dirichlet | Neumann
    u: Dirichlet | Neumann
    E: Dirichlet | Neumann

    def __post_init__(self):
        for name in VARIABLES:
            if not isinstance(getattr(self, name), (Dirichlet, Neumann)):
                raise InvalidArgumentError(f"boundary condition for {name} must be Dirichlet or Neumann")

    def neumann_mask(self) -> np.ndarray:
        return np.array([isinstance(getattr(self, v), Neumann) for v in VARIABLES], dtype=float)

    def exterior(self, interior) -> np.ndarray:
        interior = np.asarray(interior, dtype=float)
        return np.array(
            [
                interior[k] if isinstance(c, Neumann) else float(c.value)
                for k, c in enumerate((self.h, self.u, self.E))
            ]
        )


@dataclass(frozen=True)
class BoundarySpec:
    left: SideBC
    right: SideBC


@dataclass(frozen=True)
class SolutionState:
    h: CoefficientField
    u: CoefficientField
    E: CoefficientField
    time: float = 0.0

    def __post_init__(self):
        n = {self.h.n_el, self.u.n_el, self.E.n_el}
        if len(n) != 1:
            raise InvalidArgumentError("h, u and E must live on the same mesh")

    @property
    def orders(self) -> tuple[int, int, int]:
        return self.h.basis_order, self.u.basis_order, self.E.basis_order

    @property
    def n_el(self) -> int:
        return self.h.n_el

    def to_blocks(self) -> np.ndarray:
        return np.hstack([self.h.coeffs, self.u.coeffs, self.E.coeffs])

    @classmethod
    def from_blocks(cls, X: np.ndarray, orders, time: float = 0.0) -> "SolutionState":
        m1, m2, m3 = orders
        X = np.asarray(X, dtype=float)
        a, b = m1 + 1, m1 + m2 + 2
        return cls(
            CoefficientField(m1, X[:, :a].copy()),
            CoefficientField(m2, X[:, a:b].copy()),
            CoefficientField(m3, X[:, b:].copy()),
            time,
        )

    def frozen_copy(self) -> "SolutionState":
        fields = [CoefficientField(f.basis_order, f.coeffs) for f in (self.h, self.u, self.E)]
        for f in fields:
            f.coeffs.setflags(write=False)
        return SolutionState(*fields, time=self.time)


@dataclass(frozen=True)
class ProblemSetup:
    """Everything the residual needs besides the unknowns.

    ``orders`` = (m0, m1, m2, m3): bottom, depth, velocity, strain rate.
    ``bottom_exterior`` gives the bottom height paired with the exterior
    state at (left, right); ``None`` on a side reuses the interior trace.
    """

    mesh: Mesh1D
    orders: tuple[int, int, int, int]
    bottom: CoefficientField
    params: PhysicalParams
    reg: RegularizationConfig
    bc: BoundarySpec
    bottom_exterior: tuple[float | None, float | None] = (None, None)
    well_balanced: bool = True
    wave_gravity: str = "g"
    n_quad: int | None = None

    def __post_init__(self):
        if len(self.orders) != 4 or min(self.orders) < 0:
            raise InvalidArgumentError("orders must be four non-negative integers (m0, m1, m2, m3)")
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))
        if self.bottom.basis_order != self.orders[0] or self.bottom.n_el != self.mesh.n_el:
            raise InvalidArgumentError("bottom must be projected with order m0 on the same mesh")
        if self.wave_gravity not in ("g", "g_c"):
            raise InvalidArgumentError("wave_gravity must be 'g' or 'g_c'")

    @cached_property
    def quad_points(self) -> int:
        return self.n_quad if self.n_quad is not None else max(self.orders) + 2

    @cached_property
    def bases(self) -> dict[str, BasisSet]:
        nq = self.quad_points
        return {
            name: legendre_basis(m, nq) for name, m in zip(("H", "h", "u", "E"), self.orders)
        }

    @property
    def state_orders(self) -> tuple[int, int, int]:
        return self.orders[1:]

    @cached_property
    def block_size(self) -> int:
        return sum(self.state_orders) + 3

    @cached_property
    def slices(self) -> dict[str, slice]:
        m1, m2, m3 = self.state_orders
        return {"h": slice(0, m1 + 1), "u": slice(m1 + 1, m1 + m2 + 2), "E": slice(m1 + m2 + 2, m1 + m2 + m3 + 3)}

    def with_reg(self, reg: RegularizationConfig) -> "ProblemSetup":
        return replace(self, reg=reg)

    @cached_property
    def _trace_tables(self):
        nb, sl, B = self.block_size, self.slices, self.bases
        P = {}
        W = {}
        for side, n, key in ((+1, 1.0, "trace_right"), (-1, -1.0, "trace_left")):
            p = np.zeros((3, nb))
            w = np.zeros((nb, 4))
            for k, v in enumerate(VARIABLES):
                p[k, sl[v]] = getattr(B[v], key)
            w[sl["h"], 0] = n * getattr(B["h"], key)
            w[sl["u"], 1] = n * getattr(B["u"], key)
            w[sl["u"], 2] = -n * getattr(B["u"], key)
            w[sl["E"], 3] = -n * getattr(B["E"], key)
            P[side], W[side] = p, w
        return P, W

    def new_state(self, h, u, E, time=0.0) -> SolutionState:
        return SolutionState(h, u, E, time)


@dataclass
class BlockTridiagonal:
    """Square block-tridiagonal matrix: ``lower[k]`` sits at (k+1, k), ``upper[k]`` at (k, k+1)."""

    diag: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def n_blocks(self) -> int:
        return self.diag.shape[0]

    @property
    def block_size(self) -> int:
        return self.diag.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        n = self.n_blocks * self.block_size
        return n, n

    def to_dense(self) -> np.ndarray:
        n, b = self.n_blocks, self.block_size
        A = np.zeros((n * b, n * b))
        for k in range(n):
            A[k * b:(k + 1) * b, k * b:(k + 1) * b] = self.diag[k]
        for k in range(n - 1):
            A[(k + 1) * b:(k + 2) * b, k * b:(k + 1) * b] = self.lower[k]
            A[k * b:(k + 1) * b, (k + 1) * b:(k + 2) * b] = self.upper[k]
        return A

    def to_banded(self) -> tuple[np.ndarray, int]:
        """LAPACK band storage ``ab[bw + i - j, j] = A[i, j]`` with bw = 2 b - 1."""
        n, b = self.n_blocks, self.block_size
        bw = 2 * b - 1
        N = n * b
        ab = np.zeros((2 * bw + 1, N))
        r = np.arange(b)
        ii, jj = np.meshgrid(r, r, indexing="ij")
        for blocks, roff, coff in ((self.diag, 0, 0), (self.lower, 1, 0), (self.upper, 0, 1)):
            k = np.arange(blocks.shape[0])
            I = (k[:, None, None] + roff) * b + ii[None]
            J = (k[:, None, None] + coff) * b + jj[None]
            ab[bw + I - J, J] = blocks
        return ab, bw

    def matvec(self, x: np.ndarray) -> np.ndarray:
        n, b = self.n_blocks, self.block_size
        X = x.reshape(n, b)
        y = np.einsum("kij,kj->ki", self.diag, X)
        y[1:] += np.einsum("kij,kj->ki", self.lower, X[:-1])
        y[:-1] += np.einsum("kij,kj->ki", self.upper, X[1:])
        return y.ravel()


def _check_depth(h: np.ndarray, where: str):
    if not np.all(h > DEPTH_FLOOR):
        bad = np.argwhere(~(h > DEPTH_FLOOR))[0]
        raise StateValidityError(f"non-positive depth {h[tuple(bad)]:.3e} at {where} {tuple(bad)}")


def element_traces(X: np.ndarray, setup: ProblemSetup, side: int) -> np.ndarray:
    """Traces (h, u, E) of every element at xi = side, shape (n_el, 3)."""
    P = setup._trace_tables[0][side]
    return X @ P.T


def boundary_traces(state: SolutionState, bc: BoundarySpec) -> dict[str, dict[str, np.ndarray]]:
    """Interior and exterior (h, u, E) traces at both domain ends."""
    inner_left = np.array([f.at_reference(-1.0)[0, 0] for f in (state.h, state.u, state.E)])
    inner_right = np.array([f.at_reference(1.0)[-1, 0] for f in (state.h, state.u, state.E)])
    return {
        "left": {"interior": inner_left, "exterior": bc.left.exterior(inner_left)},
        "right": {"interior": inner_right, "exterior": bc.right.exterior(inner_right)},
    }


def _interface_fluxes(X: np.ndarray, setup: ProblemSetup, want_jac: bool):
    """Numerical fluxes at all n_el + 1 interfaces as seen from each side.

    Returns the 4-component flux vectors (F1, F2, Q, u) used by the element
    to the left (``view_l``) and to the right (``view_r``) of each
    interface, and their derivatives with respect to the (h, u, E) traces
    of the element on each side (boundary exteriors folded in).
    """
    p = setup.params
    n = setup.mesh.n_el
    g_wave = p.g if setup.wave_gravity == "g" else p.g_c

    tr_plus = element_traces(X, setup, +1)
    tr_minus = element_traces(X, setup, -1)
    TL = np.empty((n + 1, 3))
    TR = np.empty((n + 1, 3))
    TL[1:] = tr_plus
    TR[:-1] = tr_minus
    TL[0] = setup.bc.left.exterior(TR[0])
    TR[n] = setup.bc.right.exterior(TL[n])

    Hb = setup.bottom
    HL = np.empty(n + 1)
    HR = np.empty(n + 1)
    HL[1:] = Hb.coeffs @ setup.bases["H"].trace_right
    HR[:-1] = Hb.coeffs @ setup.bases["H"].trace_left
    ext_l, ext_r = setup.bottom_exterior
    HL[0] = HR[0] if ext_l is None else ext_l
    HR[n] = HL[n] if ext_r is None else ext_r

    hL, uL, EL = TL.T
    hR, uR, ER = TR.T
    _check_depth(hL, "interface (left state)")
    _check_depth(hR, "interface (right state)")
    if setup.well_balanced:
        # hydrostatic reconstruction: compare depths against the higher bottom
        Hmax = np.maximum(HL, HR)
        hsL = hL + HL - Hmax
        hsR = hR + HR - Hmax
        _check_depth(hsL, "reconstructed interface (left)")
        _check_depth(hsR, "reconstructed interface (right)")
    else:
        hsL, hsR = hL, hR

    Fhat = hll_flux(hsL, uL, hsR, uR, g_wave, p.g_c)
    corrL = 0.5 * p.g_c * (hL**2 - hsL**2)
    corrR = 0.5 * p.g_c * (hR**2 - hsR**2)
    sL, dsL = total_stress_and_derivative(EL, p, setup.reg)
    sR, dsR = total_stress_and_derivative(ER, p, setup.reg)
    Qhat = 0.5 * (hL * sL + hR * sR) / p.rho
    uhat = 0.5 * (uL + uR)

    base = np.column_stack([Fhat[:, 0], Fhat[:, 1], Qhat, uhat])
    view_l = base.copy()
    view_l[:, 1] += corrL
    view_r = base.copy()
    view_r[:, 1] += corrR
    if not want_jac:
        return view_l, view_r, None

    dFL, dFR = hll_flux_derivative(hsL, uL, hsR, uR, g_wave, p.g_c)
    DL = np.zeros((n + 1, 4, 3))
    DR = np.zeros((n + 1, 4, 3))
    DL[:, 0:2, 0:2] = dFL
    DR[:, 0:2, 0:2] = dFR
    DL[:, 2, 0] = 0.5 * sL / p.rho
    DL[:, 2, 2] = 0.5 * hL * dsL / p.rho
    DR[:, 2, 0] = 0.5 * sR / p.rho
    DR[:, 2, 2] = 0.5 * hR * dsR / p.rho
    DL[:, 3, 1] = 0.5
    DR[:, 3, 1] = 0.5

    vl_dL, vl_dR = DL.copy(), DR.copy()
    vl_dL[:, 1, 0] += p.g_c * (hL - hsL)
    vr_dL, vr_dR = DL.copy(), DR.copy()
    vr_dR[:, 1, 0] += p.g_c * (hR - hsR)

    # exterior states are functions of the interior trace (Neumann) or constant
    mask_l = np.diag(setup.bc.left.neumann_mask())
    mask_r = np.diag(setup.bc.right.neumann_mask())
    vr_dR[0] = vr_dR[0] + vr_dL[0] @ mask_l
    vl_dL[n] = vl_dL[n] + vl_dR[n] @ mask_r
    return view_l, view_r, (vl_dL, vl_dR, vr_dL, vr_dR)


def assemble(
    X: np.ndarray,
    X_old: np.ndarray | None,
    dt: float | None,
    setup: ProblemSetup,
    want_jac: bool = False,
):
    """Residual blocks (n_el, nb) and, optionally, the block-tridiagonal Jacobian.

    ``X_old = None`` drops the time-derivative terms (steady residual).
    """
    X = np.asarray(X, dtype=float)
    mesh, p, B, sl = setup.mesh, setup.params, setup.bases, setup.slices
    n, nb = mesh.n_el, setup.block_size
    if X.shape != (n, nb):
        raise InvalidArgumentError(f"unknown blocks must have shape {(n, nb)}, got {X.shape}")
    if X_old is not None and not dt > 0:
        raise InvalidArgumentError("dt must be positive")
    bh, bu, bE, bH = B["h"], B["u"], B["E"], B["H"]
    w = bh.quad_weights
    jac = mesh.jacobians
    wJ = w[None, :] * jac[:, None]

    h = X[:, sl["h"]] @ bh.values.T
    u = X[:, sl["u"]] @ bu.values.T
    E = X[:, sl["E"]] @ bE.values.T
    _check_depth(h, "quadrature point")
    Hx = (setup.bottom.coeffs @ bH.derivs.T) / jac[:, None]
    sig, dsig = total_stress_and_derivative(E, p, setup.reg)

    F1 = h * u
    F2 = h * u * u + 0.5 * p.g_c * h * h
    Q = h * sig / p.rho
    S2 = -p.g_s * h - p.g_c * h * Hx

    R = np.zeros((n, nb))
    R[:, sl["h"]] = -(w * F1) @ bh.derivs
    R[:, sl["u"]] = -(w * (F2 - Q)) @ bu.derivs - (wJ * S2) @ bu.values
    R[:, sl["E"]] = (wJ * E) @ bE.values + (w * u) @ bE.derivs
    if X_old is not None:
        ho = X_old[:, sl["h"]] @ bh.values.T
        uo = X_old[:, sl["u"]] @ bu.values.T
        R[:, sl["h"]] += (wJ * (h - ho) / dt) @ bh.values
        R[:, sl["u"]] += (wJ * (h * u - ho * uo) / dt) @ bu.values

    view_l, view_r, dviews = _interface_fluxes(X, setup, want_jac)
    P, W = setup._trace_tables
    R += view_l[1:] @ W[+1].T
    R += view_r[:-1] @ W[-1].T
    if not want_jac:
        return R, None

    D = np.zeros((n, nb, nb))
    ih, iu, iE = sl["h"], sl["u"], sl["E"]
    Vh, Vu, VE = bh.values, bu.values, bE.values
    dVh, dVu, dVE = bh.derivs, bu.derivs, bE.derivs
    vol = lambda wt, A, Bm: np.einsum("eq,qi,qj->eij", wt, A, Bm)  # noqa: E731

    D[:, ih, ih] -= vol(w * u, dVh, Vh)
    D[:, ih, iu] -= vol(w * h, dVh, Vu)
    D[:, iu, ih] -= vol(w * (u * u + p.g_c * h - sig / p.rho), dVu, Vh)
    D[:, iu, ih] -= vol(wJ * (-p.g_s - p.g_c * Hx), Vu, Vh)
    D[:, iu, iu] -= vol(w * 2.0 * h * u, dVu, Vu)
    D[:, iu, iE] += vol(w * h * dsig / p.rho, dVu, VE)
    D[:, iE, iu] += vol(np.broadcast_to(w, h.shape), dVE, Vu)
    D[:, iE, iE] += vol(wJ, VE, VE)
    if X_old is not None:
        D[:, ih, ih] += vol(wJ / dt, Vh, Vh)
        D[:, iu, ih] += vol(wJ * u / dt, Vu, Vh)
        D[:, iu, iu] += vol(wJ * h / dt, Vu, Vu)

    vl_dL, vl_dR, vr_dL, vr_dR = dviews
    Wp, Wm, Pp, Pm = W[+1], W[-1], P[+1], P[-1]
    # element e is left of interface e+1 (face xi=+1) and right of interface e (xi=-1)
    D += np.einsum("ik,ekl,lj->eij", Wp, vl_dL[1:], Pp)
    D += np.einsum("ik,ekl,lj->eij", Wm, vr_dR[:-1], Pm)
    upper = np.einsum("ik,ekl,lj->eij", Wp, vl_dR[1:n], Pm)
    lower = np.einsum("ik,ekl,lj->eij", Wm, vr_dL[1:n], Pp)
    return R, BlockTridiagonal(D, lower, upper)


def _blocks_pair(state_new: SolutionState, state_old: SolutionState | None, setup: ProblemSetup):
    if state_new.orders != setup.state_orders:
        raise InvalidArgumentError("state orders do not match the setup")
    X = state_new.to_blocks()
    Xo = None if state_old is None else state_old.to_blocks()
    return X, Xo


def residual(state_new, state_old, dt, setup) -> np.ndarray:
    X, Xo = _blocks_pair(state_new, state_old, setup)
    return assemble(X, Xo, dt, setup)[0]


def residual_V(state_new, state_old, dt, setup) -> np.ndarray:
    """Mass/momentum residual blocks, shape (n_el, (m1+1) + (m2+1))."""
    R = residual(state_new, state_old, dt, setup)
    return R[:, : setup.slices["u"].stop]


def residual_E(state, setup) -> np.ndarray:
    """Strain-rate residual blocks, shape (n_el, m3+1)."""
    X, _ = _blocks_pair(state, None, setup)
    return assemble(X, None, None, setup)[0][:, setup.slices["E"]]


def jacobian_blocks(state_new, state_old, dt, setup) -> BlockTridiagonal:
    X, Xo = _blocks_pair(state_new, state_old, setup)
    return assemble(X, Xo, dt, setup, want_jac=True)[1]
