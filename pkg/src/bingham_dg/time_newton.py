"""Backward Euler in time, full Newton on the coupled (h, u, E) system per step."""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .assembly import BlockTridiagonal, ProblemSetup, SolutionState, assemble
from .errors import InvalidArgumentError, SimulationAborted, SolverError

Observer = Callable[[float, SolutionState, "StepStats"], None]


@dataclass(frozen=True)
class NewtonConfig:
    dt: float
    max_iters: int = 10
    abs_tol: float = 1e-10
    rel_tol: float = 1e-12

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidArgumentError("dt must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be a positive integer")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidArgumentError("tolerances must be positive")


@dataclass
class StepStats:
    """Per-step Newton record.

    ``newton_iters`` counts linear solves. Under continuation it is summed
    over the inner solves, so it may exceed ``max_iters``; ``max_iter_hits``
    counts inner solves that stopped at the limit.
    """

    newton_iters: int = 0
    final_residual: float = math.nan
    converged: bool = False
    wall_time: float = 0.0
    residual_history: list[float] = field(default_factory=list)
    max_iter_hits: int = 0


@dataclass
class RunStats:
    steps: list[StepStats] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def total_newton_iters(self) -> int:
        return sum(s.newton_iters for s in self.steps)

    @property
    def mean_newton_iters(self) -> float:
        return self.total_newton_iters / self.n_steps if self.steps else 0.0

    @property
    def n_unconverged(self) -> int:
        return sum(not s.converged for s in self.steps)

    @property
    def max_iter_hits(self) -> int:
        return sum(s.max_iter_hits for s in self.steps)


def linear_solve(jacobian: BlockTridiagonal, rhs: np.ndarray) -> np.ndarray:
    """Direct banded LU solve of the block-tridiagonal system."""
    rhs = np.asarray(rhs, dtype=float).ravel()
    if rhs.size != jacobian.shape[0]:
        raise InvalidArgumentError(f"rhs has length {rhs.size}, system has {jacobian.shape[0]} rows")
    ab, bw = jacobian.to_banded()
    try:
        x = solve_banded((bw, bw), ab, rhs, check_finite=True)
    except LinAlgError as exc:
        raise SolverError(f"singular Newton matrix: {exc}") from exc
    except ValueError as exc:
        raise SolverError(f"non-finite Newton system: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("linear solve produced non-finite values")
    return x


def residual_norm(R: np.ndarray, setup: ProblemSetup, dt: float) -> float:
    """Newton convergence measure || [dt R_V ; R_E] ||_2 of residual blocks R."""
    # V rows carry a 1/dt mass term; scale them back so the tolerance is dt-independent
    nv = setup.slices["u"].stop
    Rs = R.copy()
    Rs[:, :nv] *= dt
    return float(np.linalg.norm(Rs))


def newton_solve(
    state_guess: SolutionState,
    state_old: SolutionState,
    setup: ProblemSetup,
    config: NewtonConfig,
    dt: float | None = None,
) -> tuple[SolutionState, StepStats]:
    """Newton iterations on R(V, E) = 0 for one backward Euler step.

    Convergence is tested on ``|| [dt R_V ; R_E] ||_2`` before every solve,
    so an exact root is returned untouched with zero iterations.
    """
    t0 = _time.perf_counter()
    dt = config.dt if dt is None else dt
    X = state_guess.to_blocks()
    X_old = state_old.to_blocks()
    stats = StepStats()
    r0 = None
    for it in range(config.max_iters + 1):
        R, J = assemble(X, X_old, dt, setup, want_jac=True)
        r = residual_norm(R, setup, dt)
        stats.residual_history.append(r)
        if r0 is None:
            r0 = r
        if not math.isfinite(r):
            raise SolverError("Newton residual is not finite")
        if r <= config.abs_tol or r <= config.rel_tol * r0:
            stats.converged = True
            break
        if it == config.max_iters:
            stats.max_iter_hits = 1
            break
        X = X - linear_solve(J, R.ravel()).reshape(X.shape)
        stats.newton_iters += 1
    stats.final_residual = stats.residual_history[-1]
    stats.wall_time = _time.perf_counter() - t0
    return SolutionState.from_blocks(X, setup.state_orders, state_old.time + dt), stats


def step(state_old: SolutionState, dt: float, setup: ProblemSetup, config: NewtonConfig):
    """One backward Euler step, Newton started from the old state."""
    return newton_solve(state_old, state_old, setup, config, dt=dt)


def gamma_schedule(gamma0: float, gamma: float, n_gamma: int) -> np.ndarray:
    if int(n_gamma) != n_gamma or n_gamma < 2:
        raise InvalidArgumentError("continuation needs n_gamma >= 2")
    i = np.arange(int(n_gamma))
    return gamma0 + i * (gamma - gamma0) / (n_gamma - 1)


def continuation_step(
    state_old: SolutionState,
    dt: float,
    setup: ProblemSetup,
    config: NewtonConfig,
    schedule: tuple[float, float, int],
):
    """Solve the step for gamma_1 .. gamma_n in turn, warm-starting each from the last."""
    gamma0, gamma, n_gamma = schedule
    t0 = _time.perf_counter()
    agg = StepStats(converged=True)
    guess = state_old
    for g in gamma_schedule(gamma0, gamma, n_gamma):
        inner = setup.with_reg(replace(setup.reg, gamma=float(g), continuation=None))
        guess, s = newton_solve(guess, state_old, inner, config, dt=dt)
        agg.newton_iters += s.newton_iters
        agg.residual_history.extend(s.residual_history)
        agg.max_iter_hits += s.max_iter_hits
        agg.converged = agg.converged and s.converged
        agg.final_residual = s.final_residual
    agg.wall_time = _time.perf_counter() - t0
    return guess, agg


def run_simulation(
    initial: SolutionState,
    t_final: float,
    setup: ProblemSetup,
    config: NewtonConfig,
    observers: Iterable[Observer] = (),
    stride: int = 1,
) -> tuple[SolutionState, RunStats]:
    """March from ``initial.time`` to ``t_final`` with step ``config.dt``.

    The last step is shortened to land on ``t_final``. Observers get
    ``(time, frozen state, step stats)`` every ``stride`` steps and after the
    final step. Continuation is used whenever ``setup.reg.continuation`` is set.
    On failure a :class:`SimulationAborted` carries the last good state and
    the stats so far.
    """
    if t_final < initial.time:
        raise InvalidArgumentError("t_final precedes the initial time")
    if int(stride) != stride or stride < 1:
        raise InvalidArgumentError("stride must be a positive integer")
    observers = list(observers)
    run = RunStats()
    t_start = _time.perf_counter()
    state = initial
    span = t_final - initial.time
    # tolerate float drift so t_final = k*dt gives exactly k steps
    n_steps = max(int(math.ceil(span / config.dt - 1e-9)), 0) if span > 0 else 0
    cont = setup.reg.continuation
    for k in range(n_steps):
        dt = min(config.dt, t_final - state.time) if k == n_steps - 1 else config.dt
        try:
            if cont is None:
                new, s = step(state, dt, setup, config)
            else:
                new, s = continuation_step(state, dt, setup, config, (cont[0], setup.reg.gamma, cont[1]))
        except Exception as exc:
            run.wall_time = _time.perf_counter() - t_start
            raise SimulationAborted(
                f"step {k + 1} at t={state.time:.6g} failed: {exc}", state=state, stats=run
            ) from exc
        if k == n_steps - 1:
            new = replace(new, time=t_final)
        state = new
        run.steps.append(s)
        if observers and ((k + 1) % stride == 0 or k == n_steps - 1):
            snap = state.frozen_copy()
            for obs in observers:
                obs(state.time, snap, s)
    run.wall_time = _time.perf_counter() - t_start
    return state, run
