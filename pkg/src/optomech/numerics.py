"""Shared numerical kernels for small dense systems.

Provides an adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)),
dense eigenvalue computation, and a direct Lyapunov solver. Everything here
is deterministic: no parallelism inside a single solve, no global state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import IntegrationError, ParameterError

# Dormand-Prince 5(4) tableau. The propagated solution is 5th order; the
# embedded 4th-order solution supplies the local error estimate. FSAL: the
# last stage of an accepted step is the first stage of the next.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_ORDER = 5
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class OdeSpec:
    """Right-hand side and accuracy contract for an initial-value problem."""

    dim: int
    rhs: Callable[[float, NDArray[np.float64]], NDArray[np.float64]]
    rtol: float = 1e-10
    atol: float = 1e-10
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ParameterError("ODE tolerances must be positive")
        if self.dim <= 0:
            raise ParameterError("ODE dimension must be positive")


@dataclass
class SolveReport:
    steps: int = 0
    rejected: int = 0
    max_error: float = 0.0  # largest accepted local-error estimate, in tolerance units

    def __post_init__(self):
        if self.steps < 0 or self.rejected < 0:
            raise ParameterError("step counters must be nonnegative")


def _scaled_error(delta, y_old, y_new, atol, rtol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(delta) / scale))


def _initial_step(rhs, t0, y0, f0, atol, rtol, t_span):
    # Hairer-style startup estimate, clipped to the integration span.
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = float(np.max(np.abs(f1 - f0) / scale)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
    return min(100 * h0, h1, t_span)


def integrate(spec: OdeSpec, y0, t_grid) -> tuple[NDArray[np.float64], SolveReport]:
    """Integrate dy/dt = rhs(t, y) and return the solution at the grid times.

    The integration starts at t_grid[0] with state y0; the first output row
    is y0 itself. Steps are shortened to land exactly on grid times, so no
    interpolation error enters the output.

    Raises IntegrationError on step-size underflow or step-budget exhaustion.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise ParameterError("t_grid must be a one-dimensional sequence of times")
    if len(t_grid) > 1 and not np.all(np.diff(t_grid) > 0):
        raise ParameterError("t_grid must be strictly ascending")
    y = np.array(y0, dtype=float)
    if y.shape != (spec.dim,):
        raise ParameterError(f"y0 must have shape ({spec.dim},)")

    out = np.empty((len(t_grid), spec.dim))
    out[0] = y
    report = SolveReport()
    if len(t_grid) == 1:
        return out, report

    rhs, atol, rtol = spec.rhs, spec.atol, spec.rtol
    t = float(t_grid[0])
    t_end = float(t_grid[-1])
    f = rhs(t, y)
    h = _initial_step(rhs, t, y, f, atol, rtol, t_end - t)
    k = np.empty((7, spec.dim))
    k[0] = f
    next_out = 1

    while next_out < len(t_grid):
        if report.steps + report.rejected >= spec.max_steps:
            raise IntegrationError(f"exceeded {spec.max_steps} steps at t={t:.6g}")
        h = min(h, t_end - t, float(t_grid[next_out]) - t)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}")

        for i in range(1, 7):
            k[i] = rhs(t + _C[i] * h, y + h * (_A[i] @ k[:i]))
        y_new = y + h * (_B5 @ k)
        err = _scaled_error(h * (_E @ k), y, y_new, atol, rtol)

        if err <= 1.0:
            t += h
            y = y_new
            k[0] = k[6]  # FSAL
            report.steps += 1
            report.max_error = max(report.max_error, err)
            while next_out < len(t_grid) and abs(t - t_grid[next_out]) <= 1e-12 * max(
                1.0, abs(t)
            ):
                out[next_out] = y
                next_out += 1
            factor = _MAX_FACTOR if err == 0 else min(
                _MAX_FACTOR, _SAFETY * err ** (-1.0 / _ORDER)
            )
            h *= factor
        else:
            report.rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-1.0 / _ORDER))

    return out, report


def eigenvalues(a) -> NDArray[np.complex128]:
    """Full complex spectrum of a real square matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("eigenvalues expects a square matrix")
    if not np.all(np.isfinite(a)):
        raise ParameterError("matrix entries must be finite")
    return np.linalg.eigvals(a)


def lyapunov_solve(z, q) -> NDArray[np.float64]:
    """Solve Z X + X Z^T = -Q for X by the dense Kronecker-sum linear system.

    The caller is responsible for checking that Z is stable; a marginal
    spectrum makes the Kronecker system singular.
    """
    z = np.asarray(z, dtype=float)
    q = np.asarray(q, dtype=float)
    n = z.shape[0]
    if z.shape != (n, n) or q.shape != (n, n):
        raise ParameterError("lyapunov_solve expects square matrices of equal size")
    eye = np.eye(n)
    # row-major vec: vec(ZX) = (Z (x) I) vec X, vec(X Z^T) = (I (x) Z) vec X
    kron = np.kron(z, eye) + np.kron(eye, z)
    try:
        x = np.linalg.solve(kron, -q.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise IntegrationError(f"singular Lyapunov system: {exc}") from exc
    x = x.reshape(n, n)
    return 0.5 * (x + x.T)
