"""The three test problems, the wet-bed dam-break reference and error norms.

Norm convention: ``L2`` is the squared integral of the error over the
domain (no square root), ``Linf`` the largest error at any quadrature point.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .assembly import BoundarySpec, Dirichlet, Neumann, ProblemSetup, SideBC, SolutionState
from .constitutive import PhysicalParams, Regularization, RegularizationConfig, active_fraction
from .errors import InvalidArgumentError, SolverError
from .mesh_basis import CoefficientField, build_uniform_mesh, project_function

BENCHMARKS = ("constant-free-surface", "parallel-free-surface", "dam-break")


@dataclass(frozen=True)
class SlopeGeometry:
    length: float = 10.0
    h0: float = 3.0


SLOPE_ALPHA = math.pi / 18


@dataclass(frozen=True)
class DamGeometry:
    length: float = 3.0
    wall: float = 1.5
    h1: float = 1.5
    h2: float = 0.5


@dataclass(frozen=True)
class BenchmarkSpec:
    """Run parameters for one named benchmark."""

    name: str
    n_el: int
    orders: tuple[int, int, int, int]
    dt: float
    t_final: float
    params: PhysicalParams
    reg: RegularizationConfig

    def __post_init__(self):
        if self.name not in BENCHMARKS:
            raise InvalidArgumentError(f"unknown benchmark {self.name!r}")
        if int(self.n_el) != self.n_el or self.n_el < 1:
            raise InvalidArgumentError("n_el must be a positive integer")
        if len(self.orders) != 4:
            raise InvalidArgumentError("orders must be m0,m1,m2,m3")
        if not self.dt > 0 or self.t_final < 0:
            raise InvalidArgumentError("need dt > 0 and t_final >= 0")


def default_spec(name: str) -> BenchmarkSpec:
    if name == "constant-free-surface":
        return BenchmarkSpec(
            name, 100, (1, 1, 1, 1), 1e-2, 1.0,
            PhysicalParams(alpha=SLOPE_ALPHA),
            RegularizationConfig(Regularization.REG1, 1e3, 1e3),
        )
    if name == "parallel-free-surface":
        return BenchmarkSpec(
            name, 100, (1, 1, 1, 1), 1e-6, 1e-3,
            PhysicalParams(alpha=SLOPE_ALPHA, eta=1.0, sigma0=9.035),
            RegularizationConfig(Regularization.REG1, 1e4, 1e4),
        )
    if name == "dam-break":
        return BenchmarkSpec(
            name, 100, (1, 1, 1, 0), 1e-5, 0.05,
            PhysicalParams(eta=0.02, sigma0=0.2),
            RegularizationConfig(Regularization.REG1, 1e2, 1e2),
        )
    raise InvalidArgumentError(f"unknown benchmark {name!r}")


def _cos_bottom(x):
    return np.cos(np.pi * x)


def _depth_over_bottom(surface, bottom: CoefficientField, m1: int, mesh) -> CoefficientField:
    # h = P(surface) - H_h, so h + H_h is the projected surface exactly
    return CoefficientField(m1, project_function(surface, m1, mesh).coeffs - bottom.with_order(m1).coeffs)


def constant_free_surface_level(alpha: float, geom: SlopeGeometry = SlopeGeometry()) -> float:
    return geom.h0 / math.cos(alpha)


def setup_constant_free_surface(
    n_el: int,
    orders=(1, 1, 1, 1),
    params: PhysicalParams | None = None,
    reg: RegularizationConfig | None = None,
    geom: SlopeGeometry = SlopeGeometry(),
    well_balanced: bool = True,
) -> tuple[ProblemSetup, SolutionState]:
    """Lake at rest on an incline: h + H + x tan(alpha) = h0 / cos(alpha), u = 0."""
    params = params or PhysicalParams(alpha=SLOPE_ALPHA)
    reg = reg or RegularizationConfig()
    m0, m1, m2, m3 = orders
    mesh = build_uniform_mesh(0.0, geom.length, n_el)
    bottom = project_function(_cos_bottom, m0, mesh)
    C, t = constant_free_surface_level(params.alpha, geom), math.tan(params.alpha)
    H0, HL = 1.0, float(_cos_bottom(geom.length))
    bc = BoundarySpec(
        SideBC(Dirichlet(C - H0), Dirichlet(0.0), Dirichlet(0.0)),
        SideBC(Dirichlet(C - t * geom.length - HL), Dirichlet(0.0), Dirichlet(0.0)),
    )
    setup = ProblemSetup(
        mesh, tuple(orders), bottom, params, reg, bc,
        bottom_exterior=(H0, HL), well_balanced=well_balanced,
    )
    h = _depth_over_bottom(lambda x: C - t * x, bottom, m1, mesh)
    state = SolutionState(h, CoefficientField.zeros(m2, n_el), CoefficientField.zeros(m3, n_el))
    return setup, state


def constant_free_surface_reference(setup: ProblemSetup, geom: SlopeGeometry = SlopeGeometry()):
    """Equilibrium depth against the discrete bottom: C - x tan(alpha) - H_h(x)."""
    alpha = setup.params.alpha
    C, t = constant_free_surface_level(alpha, geom), math.tan(alpha)

    def ref(x, bottom=setup.bottom, mesh=setup.mesh):
        return C - t * x - bottom(mesh, x), np.zeros_like(x)

    return ref


def yield_threshold(params: PhysicalParams, geom: SlopeGeometry = SlopeGeometry()) -> float:
    """Smallest yield stress that keeps the parallel-surface state rigid."""
    return (
        params.rho * params.g * math.sin(params.alpha) * geom.h0 * geom.length
        / (2.0 * math.sqrt(2.0) * (geom.h0 - 1.0))
    )


def setup_parallel_free_surface(
    n_el: int,
    orders=(1, 1, 1, 1),
    params: PhysicalParams | None = None,
    reg: RegularizationConfig | None = None,
    geom: SlopeGeometry = SlopeGeometry(),
    well_balanced: bool = True,
) -> tuple[ProblemSetup, SolutionState]:
    """Free surface parallel to the incline, h = h0 - H, held by the yield stress."""
    params = params or PhysicalParams(alpha=SLOPE_ALPHA, eta=1.0, sigma0=9.035)
    reg = reg or RegularizationConfig(Regularization.REG1, 1e4, 1e4)
    m0, m1, m2, m3 = orders
    mesh = build_uniform_mesh(0.0, geom.length, n_el)
    bottom = project_function(_cos_bottom, m0, mesh)
    bc = BoundarySpec(
        SideBC(Neumann(), Neumann(), Neumann()),
        SideBC(Neumann(), Dirichlet(0.0), Neumann()),
    )
    setup = ProblemSetup(mesh, tuple(orders), bottom, params, reg, bc, well_balanced=well_balanced)
    h = _depth_over_bottom(lambda x: np.full_like(x, geom.h0), bottom, m1, mesh)
    state = SolutionState(h, CoefficientField.zeros(m2, n_el), CoefficientField.zeros(m3, n_el))
    return setup, state


def parallel_free_surface_reference(setup: ProblemSetup, geom: SlopeGeometry = SlopeGeometry()):
    def ref(x, bottom=setup.bottom, mesh=setup.mesh):
        return geom.h0 - bottom(mesh, x), np.zeros_like(x)

    return ref


def setup_dam_break(
    n_el: int,
    orders=(1, 1, 1, 0),
    params: PhysicalParams | None = None,
    reg: RegularizationConfig | None = None,
    geom: DamGeometry = DamGeometry(),
) -> tuple[ProblemSetup, SolutionState]:
    """Wet-bed dam break on a flat horizontal channel."""
    params = params or PhysicalParams(eta=0.02, sigma0=0.2)
    reg = reg or RegularizationConfig(Regularization.REG1, 1e2, 1e2)
    m0, m1, m2, m3 = orders
    mesh = build_uniform_mesh(0.0, geom.length, n_el)
    bottom = CoefficientField.zeros(m0, n_el)
    bc = BoundarySpec(
        SideBC(Dirichlet(geom.h1), Neumann(), Dirichlet(0.0)),
        SideBC(Dirichlet(geom.h2), Neumann(), Dirichlet(0.0)),
    )
    setup = ProblemSetup(mesh, tuple(orders), bottom, params, reg, bc)
    h = project_function(
        lambda x: np.where(x < geom.wall, geom.h1, geom.h2), m1, mesh, breakpoints=[geom.wall]
    )
    state = SolutionState(h, CoefficientField.zeros(m2, n_el), CoefficientField.zeros(m3, n_el))
    return setup, state


def stoker_middle_state(h1: float, h2: float, g: float) -> tuple[float, float]:
    """Depth and velocity between the rarefaction and the shock."""
    if not h1 > h2 > 0:
        raise InvalidArgumentError("need h1 > h2 > 0")
    c1 = math.sqrt(g * h1)

    def mismatch(hm):
        # rarefaction (left) vs shock (right) velocity of the middle state
        return 2.0 * (c1 - math.sqrt(g * hm)) - (hm - h2) * math.sqrt(g * (hm + h2) / (2.0 * hm * h2))

    try:
        hm = brentq(mismatch, h2, h1, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise SolverError(f"middle state root not found: {exc}") from exc
    return hm, 2.0 * (c1 - math.sqrt(g * hm))


def stoker_solution(x, t: float, h1: float, h2: float, g: float = 9.81, x0: float = 0.0):
    """Inviscid wet-bed dam-break solution (h, u) at time t, wall at x0."""
    if not t > 0:
        raise InvalidArgumentError("t must be positive")
    x = np.asarray(x, dtype=float)
    hm, um = stoker_middle_state(h1, h2, g)
    c1, cm = math.sqrt(g * h1), math.sqrt(g * hm)
    s = hm * um / (hm - h2)
    xi = (x - x0) / t
    h = np.where(xi <= -c1, h1, np.where(xi <= um - cm, (2 * c1 - xi) ** 2 / (9 * g), np.where(xi < s, hm, h2)))
    u = np.where(xi <= -c1, 0.0, np.where(xi <= um - cm, 2.0 * (c1 + xi) / 3.0, np.where(xi < s, um, 0.0)))
    return h, u


def stoker_features(t: float, h1: float, h2: float, g: float = 9.81, x0: float = 0.0) -> dict[str, float]:
    """Positions of the fan head, fan tail and shock at time t."""
    hm, um = stoker_middle_state(h1, h2, g)
    s = hm * um / (hm - h2)
    return {
        "fan_head": x0 - math.sqrt(g * h1) * t,
        "fan_tail": x0 + (um - math.sqrt(g * hm)) * t,
        "shock": x0 + s * t,
    }


@dataclass
class ErrorReport:
    L2_h: float
    L2_u: float
    Linf_h: float
    Linf_u: float
    active_pct: float
    nr_per_step: float = 0.0
    cpu_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


Reference = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def error_norms(
    state: SolutionState,
    reference: Reference,
    setup: ProblemSetup,
    stats=None,
    mask: Callable[[np.ndarray], np.ndarray] | None = None,
) -> ErrorReport:
    """Compare a state with reference fields at the quadrature points.

    ``mask(x)`` may exclude points (False) from both norms.
    """
    mesh, B = setup.mesh, setup.bases
    xq = mesh.physical_points(B["h"].quad_nodes)
    wJ = B["h"].quad_weights[None, :] * mesh.jacobians[:, None]
    h = state.h.at_quadrature(B["h"])
    u = state.u.at_quadrature(B["u"])
    h_ref, u_ref = reference(xq)
    keep = np.ones_like(xq, dtype=bool) if mask is None else np.asarray(mask(xq), dtype=bool)
    eh = np.where(keep, h - h_ref, 0.0)
    eu = np.where(keep, u - u_ref, 0.0)
    return ErrorReport(
        L2_h=float(np.sum(wJ * eh**2)),
        L2_u=float(np.sum(wJ * eu**2)),
        Linf_h=float(np.max(np.abs(eh))),
        Linf_u=float(np.max(np.abs(eu))),
        active_pct=active_fraction(state.E, mesh, B["E"], setup.params.sigma0, setup.reg.gamma),
        nr_per_step=float(stats.mean_newton_iters) if stats is not None else 0.0,
        cpu_seconds=float(stats.wall_time) if stats is not None else 0.0,
    )


def build(spec: BenchmarkSpec) -> tuple[ProblemSetup, SolutionState, Reference]:
    """Setup, initial state and error reference for a spec."""
    if spec.name == "constant-free-surface":
        setup, state = setup_constant_free_surface(spec.n_el, spec.orders, spec.params, spec.reg)
        return setup, state, constant_free_surface_reference(setup)
    if spec.name == "parallel-free-surface":
        setup, state = setup_parallel_free_surface(spec.n_el, spec.orders, spec.params, spec.reg)
        return setup, state, parallel_free_surface_reference(setup)
    setup, state = setup_dam_break(spec.n_el, spec.orders, spec.params, spec.reg)
    geom = DamGeometry()

    def ref(x):
        if spec.t_final > 0:
            return stoker_solution(x, spec.t_final, geom.h1, geom.h2, spec.params.g, geom.wall)
        return np.where(x < geom.wall, geom.h1, geom.h2), np.zeros_like(x)

    return setup, state, ref
