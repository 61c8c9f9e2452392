"""Depth-integrated Bingham stress in 1D and its regularizations.

The stress splits into a Newtonian part ``4 eta E`` and a plastic part
that saturates at ``2 sigma0``. The plastic part is non-smooth at E = 0,
so it is replaced by one of three regularized functions:

* ``REG1``  ``2 s0 gE / (max_b(g|E| - s0, 0) + s0)`` with a C1 smooth max,
* ``REG2``  piecewise quadratic blend between ``2 g E`` and ``2 s0 sign(E)``,
* ``REG3``  ``2 s0 tanh(g E)``.

All functions accept scalars or numpy arrays and treat sign(0) as 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


class Regularization(enum.IntEnum):
    REG1 = 1
    REG2 = 2
    REG3 = 3


@dataclass(frozen=True)
class PhysicalParams:
    rho: float = 1.0
    g: float = 9.81
    alpha: float = 0.0
    eta: float = 0.0
    sigma0: float = 0.0

    def __post_init__(self):
        if not self.rho > 0:
            raise InvalidArgumentError("rho must be positive")
        if not self.g > 0:
            raise InvalidArgumentError("g must be positive")
        if self.eta < 0 or self.sigma0 < 0:
            raise InvalidArgumentError("eta and sigma0 must be non-negative")

    @property
    def g_c(self) -> float:
        return self.g * math.cos(self.alpha)

    @property
    def g_s(self) -> float:
        return self.g * math.sin(self.alpha)


@dataclass(frozen=True)
class RegularizationConfig:
    variant: Regularization = Regularization.REG1
    gamma: float = 1e2
    beta: float = 1e2
    # (gamma0, n_gamma) for continuation in gamma within each time step
    continuation: tuple[float, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Regularization(self.variant))
        if not self.gamma > 0:
            raise InvalidArgumentError("gamma must be positive")
        if self.variant != Regularization.REG3 and not self.beta > 0:
            raise InvalidArgumentError("beta must be positive for Reg1/Reg2")
        if self.continuation is not None:
            g0, n = self.continuation
            if int(n) != n or n < 2:
                raise InvalidArgumentError("continuation needs n_gamma >= 2")
            if not g0 > 0:
                raise InvalidArgumentError("continuation gamma0 must be positive")
            object.__setattr__(self, "continuation", (float(g0), int(n)))


def newtonian_stress(E, params: PhysicalParams):
    return 4.0 * params.eta * np.asarray(E, dtype=float)


def _check_beta(beta):
    if not beta > 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")


def smooth_max(x, beta: float):
    """C1 approximation of max(x, 0) with a quadratic blend of half-width 1/(2 beta)."""
    _check_beta(beta)
    x = np.asarray(x, dtype=float)
    d = 0.5 / beta
    return np.where(x >= d, x, np.where(x <= -d, 0.0, 0.5 * beta * (x + d) ** 2))


def smooth_max_derivative(x, beta: float):
    _check_beta(beta)
    x = np.asarray(x, dtype=float)
    d = 0.5 / beta
    return np.where(x >= d, 1.0, np.where(x <= -d, 0.0, beta * (x + d)))


def _reg1(E, s0, gamma, beta):
    a = gamma * np.abs(E) - s0
    den = smooth_max(a, beta) + s0
    val = 2.0 * s0 * gamma * E / den
    dval = 2.0 * s0 * gamma / den - 2.0 * s0 * gamma**2 * np.abs(E) / den**2 * smooth_max_derivative(a, beta)
    return val, dval


def _reg2(E, s0, gamma, beta):
    gE = gamma * np.abs(E)
    d = 0.5 / beta
    sgn = np.sign(E)
    gap = s0 - gE + d
    outer = gE >= s0 + d
    inner = gE <= s0 - d
    val = np.where(outer, 2.0 * s0 * sgn, np.where(inner, 2.0 * gamma * E, sgn * (2.0 * s0 - beta * gap**2)))
    dval = np.where(outer, 0.0, np.where(inner, 2.0 * gamma, 2.0 * beta * gamma * gap))
    return val, dval


def _reg3(E, s0, gamma):
    z = gamma * E
    # sech^2 written with exp(-2|z|) so it underflows to 0 instead of overflowing
    q = np.exp(-2.0 * np.abs(z))
    sech2 = 4.0 * q / (1.0 + q) ** 2
    return 2.0 * s0 * np.tanh(z), 2.0 * s0 * gamma * sech2


def plastic_stress_and_derivative(E, params: PhysicalParams, reg: RegularizationConfig):
    E = np.asarray(E, dtype=float)
    s0 = params.sigma0
    if s0 == 0.0:
        # no yield stress: the plastic term vanishes identically
        z = np.zeros_like(E)
        return z, z.copy()
    if reg.variant == Regularization.REG1:
        return _reg1(E, s0, reg.gamma, reg.beta)
    if reg.variant == Regularization.REG2:
        return _reg2(E, s0, reg.gamma, reg.beta)
    return _reg3(E, s0, reg.gamma)


def plastic_stress(E, params: PhysicalParams, reg: RegularizationConfig):
    return plastic_stress_and_derivative(E, params, reg)[0]


def plastic_stress_derivative(E, params: PhysicalParams, reg: RegularizationConfig):
    return plastic_stress_and_derivative(E, params, reg)[1]


def total_stress_and_derivative(E, params: PhysicalParams, reg: RegularizationConfig):
    """Regularized total stress sigma(E) and d sigma / dE."""
    p, dp = plastic_stress_and_derivative(E, params, reg)
    return newtonian_stress(E, params) + p, 4.0 * params.eta + dp


def active_fraction(E_field, mesh, basis, sigma0: float, gamma: float) -> float:
    """Percentage of the domain where |E| >= sigma0 / gamma, by quadrature.

    ``basis`` must have the same order as ``E_field``; its Gauss rule is
    used to integrate the indicator.
    """
    if not gamma > 0:
        raise InvalidArgumentError("gamma must be positive")
    Eq = E_field.at_quadrature(basis)
    indicator = (np.abs(Eq) - sigma0 / gamma >= 0.0).astype(float)
    area = (indicator @ basis.quad_weights) @ mesh.jacobians
    return float(100.0 * area / mesh.length)
