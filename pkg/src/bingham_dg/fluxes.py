"""Shallow-water fluxes in primitive variables V = (h, u).

Everything is vectorized: ``h`` and ``u`` may be arrays of interface
states. Flux pairs are returned stacked on the last axis, Jacobians as
(..., 2, 2) arrays with rows = flux component and columns = (h, u).
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, SolverError, StateValidityError


def conserved(h, u) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    return np.stack([h, h * np.asarray(u, dtype=float)], axis=-1)


def conserved_jacobian(h, u) -> np.ndarray:
    """dU/dV = [[1, 0], [u, h]]."""
    h, u = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(u, dtype=float))
    J = np.zeros(h.shape + (2, 2))
    J[..., 0, 0] = 1.0
    J[..., 1, 0] = u
    J[..., 1, 1] = h
    return J


def physical_flux(h, u, g_c: float) -> np.ndarray:
    """F = (h u, h u^2 + g_c h^2 / 2)."""
    h = np.asarray(h, dtype=float)
    u = np.asarray(u, dtype=float)
    return np.stack([h * u, h * u * u + 0.5 * g_c * h * h], axis=-1)


def physical_flux_jacobian(h, u, g_c: float) -> np.ndarray:
    h, u = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(u, dtype=float))
    J = np.empty(h.shape + (2, 2))
    J[..., 0, 0] = u
    J[..., 0, 1] = h
    J[..., 1, 0] = u * u + g_c * h
    J[..., 1, 1] = 2.0 * h * u
    return J


def wave_speeds(h_left, u_left, h_right, u_right, g: float):
    """Two-wave speed estimates (S_L, S_R) of the HLL solver."""
    hl = np.asarray(h_left, dtype=float)
    hr = np.asarray(h_right, dtype=float)
    if np.any(hl < 0) or np.any(hr < 0):
        raise StateValidityError("negative depth passed to wave_speeds")
    cl, cr = np.sqrt(g * hl), np.sqrt(g * hr)
    s_l = np.minimum(u_left - cl, u_right - cr)
    s_r = np.maximum(u_left + cl, u_right + cr)
    return s_l, s_r


def _branches(s_l, s_r):
    left = s_l >= 0.0
    right = (s_r <= 0.0) & ~left
    mid = ~(left | right)
    if np.any(mid & (s_r == s_l)):
        raise SolverError("coincident HLL wave speeds in the star region")
    return left, right, mid


def hll_flux(h_left, u_left, h_right, u_right, g: float, g_c: float) -> np.ndarray:
    s_l, s_r = wave_speeds(h_left, u_left, h_right, u_right, g)
    f_l = physical_flux(h_left, u_left, g_c)
    f_r = physical_flux(h_right, u_right, g_c)
    left, right, mid = _branches(s_l, s_r)
    denom = np.where(mid, s_r - s_l, 1.0)[..., None]
    sl, sr = s_l[..., None], s_r[..., None]
    jump = conserved(h_right, u_right) - conserved(h_left, u_left)
    f_mid = (sr * f_l - sl * f_r + sl * sr * jump) / denom
    return np.where(left[..., None], f_l, np.where(right[..., None], f_r, f_mid))


def hll_flux_derivative(h_left, u_left, h_right, u_right, g: float, g_c: float):
    """(dF/dV_left, dF/dV_right) with the wave speeds held fixed."""
    s_l, s_r = wave_speeds(h_left, u_left, h_right, u_right, g)
    left, right, mid = _branches(s_l, s_r)
    a_l = physical_flux_jacobian(h_left, u_left, g_c)
    a_r = physical_flux_jacobian(h_right, u_right, g_c)
    b_l = conserved_jacobian(h_left, u_left)
    b_r = conserved_jacobian(h_right, u_right)
    denom = np.where(mid, s_r - s_l, 1.0)[..., None, None]
    sl, sr = s_l[..., None, None], s_r[..., None, None]
    d_l_mid = (sr * a_l - sl * sr * b_l) / denom
    d_r_mid = (-sl * a_r + sl * sr * b_r) / denom
    zero = np.zeros_like(a_l)
    lm, rm = left[..., None, None], right[..., None, None]
    d_l = np.where(lm, a_l, np.where(rm, zero, d_l_mid))
    d_r = np.where(lm, zero, np.where(rm, a_r, d_r_mid))
    return d_l, d_r


def central_flux(a_left, a_right) -> np.ndarray:
    a_left = np.asarray(a_left, dtype=float)
    a_right = np.asarray(a_right, dtype=float)
    if a_left.shape != a_right.shape:
        raise InvalidArgumentError(f"shape mismatch {a_left.shape} vs {a_right.shape}")
    return 0.5 * (a_left + a_right)
