"""Steady states of the driven, lossy pair of optomechanical cavities.

Strong driving justifies linearizing the quantum Langevin equations around
the classical steady state. The fluctuations then obey dR/dt = Z R + noise
with a constant drift matrix Z; when Z is stable the stationary covariance
solves the Lyapunov equation Z V + V Z^T = −N. Pairwise logarithmic
negativities are read off the 8x8 covariance in the mode order
(mirror 1, mirror 2, cavity a, cavity b).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from .errors import ConvergenceError, ParameterError, StabilityError
from .gaussian import CovarianceMatrix, TwoModeCM, extract_pair, log_negativity
from .numerics import eigenvalues, lyapunov_solve

#: spectral abscissa must lie below this margin for a point to count as stable
STABILITY_MARGIN = -1e-12

#: uncertainty-bound slack for steady covariances. The delta-correlated
#: mirror-noise limit drops the antisymmetric part of the Brownian kernel,
#: so the model's own steady state can dip below the vacuum bound by
#: O(gamma_m), amplified near stability edges (about 1e-2 at the default
#: sweep parameters). The slack still catches sign- or scale-level solver
#: bugs, which miss by O(1).
NOISE_MODEL_ATOL = 0.05

PAIRINGS = {
    "mirror1-mirror2": (0, 1),
    "mirror1-cavityA": (0, 2),
    "mirror1-cavityB": (0, 3),
}


@dataclass(frozen=True)
class BareDrive:
    """Laser drive in bare form: amplitude eta, detuning delta_tilde, coupling g."""

    eta: float
    delta_tilde: float
    g: float


@dataclass(frozen=True)
class EffectiveDrive:
    """Post-linearization inputs: effective couplings and detunings."""

    g_a_s: float
    g_b_s: float
    delta_a: float
    delta_b: float


@dataclass(frozen=True)
class DriveParams:
    """System rates plus one of the two drive descriptions."""

    omega: float
    lam: float
    kappa: float
    gamma_m: float
    n1: float
    n2: float
    drive: Union[BareDrive, EffectiveDrive]

    def __post_init__(self):
        if self.kappa <= 0:
            raise ParameterError("cavity decay must be positive")
        if self.gamma_m < 0:
            raise ParameterError("mirror damping must be nonnegative")
        if self.n1 < 0 or self.n2 < 0:
            raise ParameterError("bath occupancies must be nonnegative")


@dataclass(frozen=True)
class SteadyState:
    """Classical operating point of the driven system."""

    a_s: complex
    b_s: complex
    q1_s: float
    q2_s: float
    delta_a: float
    delta_b: float
    p1_s: float = 0.0
    p2_s: float = 0.0


def _field_amplitudes(eta, kappa, delta_a, delta_b, lam):
    denom = lam**2 + kappa**2 + 1j * kappa * (delta_a + delta_b) - delta_a * delta_b
    a_s = (-1j * lam * eta + eta * (kappa + 1j * delta_b)) / denom
    b_s = (-1j * lam * eta + eta * (kappa + 1j * delta_a)) / denom
    return a_s, b_s


def steady_state_residual(params: DriveParams, ss: SteadyState) -> float:
    """Max-norm residual of the fixed-point equations at a candidate point."""
    drive = params.drive
    a_ref, b_ref = _field_amplitudes(
        drive.eta, params.kappa, ss.delta_a, ss.delta_b, params.lam
    )
    return max(
        abs(ss.a_s - a_ref),
        abs(ss.b_s - b_ref),
        abs(ss.q1_s - drive.g * abs(ss.a_s) ** 2 / params.omega),
        abs(ss.q2_s - drive.g * abs(ss.b_s) ** 2 / params.omega),
        abs(ss.delta_a - (drive.delta_tilde - drive.g * ss.q1_s)),
        abs(ss.delta_b - (drive.delta_tilde - drive.g * ss.q2_s)),
    )


def solve_steady_state(
    params: DriveParams,
    damping: float = 0.5,
    max_iterations: int = 10_000,
    tol: float = 1e-12,
) -> SteadyState:
    """Damped fixed-point solve of the classical steady state.

    Requires the bare drive description. Raises ConvergenceError (carrying
    the last iterate and residual) when the iteration stalls, e.g. at a
    bistable operating point.
    """
    drive = params.drive
    if not isinstance(drive, BareDrive):
        raise ParameterError("solve_steady_state needs the bare drive form")

    a_s, b_s = 0.0 + 0.0j, 0.0 + 0.0j
    for _ in range(max_iterations):
        q1 = drive.g * abs(a_s) ** 2 / params.omega
        q2 = drive.g * abs(b_s) ** 2 / params.omega
        delta_a = drive.delta_tilde - drive.g * q1
        delta_b = drive.delta_tilde - drive.g * q2
        a_new, b_new = _field_amplitudes(
            drive.eta, params.kappa, delta_a, delta_b, params.lam
        )
        step = max(abs(a_new - a_s), abs(b_new - b_s))
        a_s = (1.0 - damping) * a_s + damping * a_new
        b_s = (1.0 - damping) * b_s + damping * b_new
        if step < tol:
            q1 = drive.g * abs(a_s) ** 2 / params.omega
            q2 = drive.g * abs(b_s) ** 2 / params.omega
            ss = SteadyState(
                a_s,
                b_s,
                q1,
                q2,
                drive.delta_tilde - drive.g * q1,
                drive.delta_tilde - drive.g * q2,
            )
            residual = steady_state_residual(params, ss)
            if residual > 1e-10:
                raise ConvergenceError(
                    f"steady state residual {residual:.3e} above 1e-10",
                    last_iterate=ss,
                    residual=residual,
                )
            return ss
    ss = SteadyState(a_s, b_s, 0.0, 0.0, drive.delta_tilde, drive.delta_tilde)
    raise ConvergenceError(
        f"steady state did not converge in {max_iterations} iterations",
        last_iterate=ss,
        residual=steady_state_residual(params, ss),
    )


def rotate_to_real(ss: SteadyState) -> SteadyState:
    """Fix each cavity's phase reference so its amplitude is real and >= 0."""
    return replace(ss, a_s=abs(ss.a_s) + 0.0j, b_s=abs(ss.b_s) + 0.0j)


@dataclass(frozen=True)
class DriftModel:
    """Drift matrix Z and diagonal noise matrix for the linearized dynamics.

    Quadrature order: (q1, p1, q2, p2, X_a, P_a, X_b, P_b), with the
    X = (a + a†)/√2 normalization so the cavity noise floor is kappa.
    """

    z: NDArray[np.float64]
    noise: NDArray[np.float64]


def build_drift(params: DriveParams, ss: Optional[SteadyState] = None) -> DriftModel:
    """Assemble the drift and noise matrices at an operating point.

    With an EffectiveDrive the couplings and detunings are taken as given;
    with a BareDrive the steady state must be supplied and its amplitudes
    must already be real (rotate_to_real), otherwise an error demands the
    phase rotation.
    """
    drive = params.drive
    if isinstance(drive, EffectiveDrive):
        g_a, g_b = drive.g_a_s, drive.g_b_s
        delta_a, delta_b = drive.delta_a, drive.delta_b
    else:
        if ss is None:
            raise ParameterError("bare drive form needs a solved steady state")
        if abs(ss.a_s.imag) > 1e-12 * max(1.0, abs(ss.a_s)) or abs(
            ss.b_s.imag
        ) > 1e-12 * max(1.0, abs(ss.b_s)):
            raise ParameterError(
                "steady-state amplitudes must be rotated real before linearization"
            )
        g_a = np.sqrt(2.0) * drive.g * ss.a_s.real
        g_b = np.sqrt(2.0) * drive.g * ss.b_s.real
        delta_a, delta_b = ss.delta_a, ss.delta_b

    omega, lam, kappa, gamma = params.omega, params.lam, params.kappa, params.gamma_m
    z1 = np.array(
        [
            [0.0, omega, 0.0, 0.0],
            [-omega, -gamma, 0.0, 0.0],
            [0.0, 0.0, 0.0, omega],
            [0.0, 0.0, -omega, -gamma],
        ]
    )
    z2 = np.zeros((4, 4))
    z2[1, 0] = g_a
    z2[3, 2] = g_b
    z3 = np.array(
        [
            [-kappa, delta_a, 0.0, lam],
            [-delta_a, -kappa, -lam, 0.0],
            [0.0, lam, -kappa, delta_b],
            [-lam, 0.0, -delta_b, -kappa],
        ]
    )
    z = np.block([[z1, z2], [z2, z3]])
    noise = np.diag(
        [
            0.0,
            gamma * (2.0 * params.n1 + 1.0),
            0.0,
            gamma * (2.0 * params.n2 + 1.0),
            kappa,
            kappa,
            kappa,
            kappa,
        ]
    )
    return DriftModel(z, noise)


def is_stable(z) -> tuple[bool, float]:
    """Whether all drift eigenvalues sit strictly in the left half plane.

    Returns (stable, spectral abscissa); marginal spectra are not stable.
    """
    abscissa = float(np.max(eigenvalues(z).real))
    return abscissa < STABILITY_MARGIN, abscissa


def solve_lyapunov(z, noise, atol: float = NOISE_MODEL_ATOL) -> CovarianceMatrix:
    """Steady-state covariance from Z V + V Z^T = −N, for stable Z only.

    The residual is held to 1e-10 relative; the uncertainty bound is
    enforced only up to NOISE_MODEL_ATOL (see its note on the Markovian
    noise artifact).
    """
    stable, abscissa = is_stable(z)
    if not stable:
        raise StabilityError(
            f"drift matrix is not stable (spectral abscissa {abscissa:.3e}); "
            "check is_stable before solving"
        )
    v = lyapunov_solve(z, noise)
    residual = float(np.max(np.abs(z @ v + v @ z.T + noise)))
    scale = float(np.max(np.abs(noise)))
    if residual > 1e-10 * max(scale, 1.0):
        raise StabilityError(
            f"Lyapunov residual {residual:.3e} exceeds tolerance for scale {scale:.3e}"
        )
    return CovarianceMatrix(4, v, atol=atol)


def pair_negativity(cm: CovarianceMatrix, pair: str) -> float:
    """Logarithmic negativity of one of the named mode pairings."""
    if pair not in PAIRINGS:
        raise ParameterError(f"unknown pairing {pair!r}; choose from {sorted(PAIRINGS)}")
    i, j = PAIRINGS[pair]
    return log_negativity(extract_pair(cm, i, j))


@dataclass(frozen=True)
class SweepResult:
    """One grid point of a detuning/occupancy sweep."""

    delta: float
    nbar: float
    stable: bool
    abscissa: float
    neg_m1m2: Optional[float] = None
    neg_m1ca: Optional[float] = None
    neg_m1cb: Optional[float] = None
    note: str = ""


def _sweep_point(params: DriveParams, delta: float, nbar: float) -> SweepResult:
    point = replace(params, n1=nbar, n2=nbar)
    drive = params.drive
    try:
        if isinstance(drive, EffectiveDrive):
            point = replace(point, drive=replace(drive, delta_a=delta, delta_b=delta))
            model = build_drift(point)
        else:
            point = replace(point, drive=replace(drive, delta_tilde=delta))
            model = build_drift(point, rotate_to_real(solve_steady_state(point)))
    except ConvergenceError as exc:
        return SweepResult(delta, nbar, False, np.nan, note=f"no steady state: {exc}")
    stable, abscissa = is_stable(model.z)
    if not stable:
        return SweepResult(delta, nbar, False, abscissa, note="unstable drift")
    cm = solve_lyapunov(model.z, model.noise)
    return SweepResult(
        delta,
        nbar,
        True,
        abscissa,
        pair_negativity(cm, "mirror1-mirror2"),
        pair_negativity(cm, "mirror1-cavityA"),
        pair_negativity(cm, "mirror1-cavityB"),
    )


def sweep(params: DriveParams, delta_grid, nbar_grid, workers: int = 1) -> list[SweepResult]:
    """Stability and pairwise negativities over a (detuning x occupancy) grid.

    Unstable or non-convergent points yield flagged records instead of
    aborting. Points are independent; with workers > 1 they run in a
    process pool. Output order is always grid order (delta-major).
    """
    deltas = [float(d) for d in delta_grid]
    nbars = [float(n) for n in nbar_grid]
    if not deltas or not nbars:
        raise ParameterError("sweep grids must be non-empty")
    jobs = [(params, d, n) for d in deltas for n in nbars]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point_task, jobs))
    return [_sweep_point_task(job) for job in jobs]


def _sweep_point_task(job):
    params, delta, nbar = job
    return _sweep_point(params, delta, nbar)
