"""Open-system adiabatic dynamics via the normal-ordered characteristic function.

Each photon-difference branch evolves the two mirrors under a Lindblad
master equation (thermal damping at rate gamma into a bath of occupancy
n_bath). For Gaussian states the normal-ordered characteristic function
keeps the form exp(−zᵀ L z + i zᵀ q) in the real coordinates
z = (Re ε, Im ε, Re η, Im η) of the center-of-mass and relative modes,
so the dynamics reduces to matrix ODEs for L and q. Cavity photon decay
enters only through the branch weights, whose coherent amplitudes decay
exponentially.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .bo_unitary import (
    DEFAULT_CUTOFF_SIGMAS,
    MIXTURE_MODES,
    BOBranch,
    BOParams,
    BranchWeights,
    _batched_log_negativity,
    branch_weights,
    make_branch,
)
from .errors import ParameterError, UnphysicalCovarianceError
from .gaussian import TwoModeCM, VACUUM_VARIANCE
from .numerics import OdeSpec, integrate

# rotation from (x_C, p_C, x_D, p_D) to the mirror quadratures (x1, p1, x2, p2)
_CD_TO_MIRRORS = np.array(
    [
        [1, 0, 1, 0],
        [0, 1, 0, 1],
        [1, 0, -1, 0],
        [0, 1, 0, -1],
    ]
) / np.sqrt(2.0)

_TRIU = np.triu_indices(4)


@dataclass(frozen=True)
class DissipativeParams(BOParams):
    """BOParams plus loss channels, all rates in units of omega.

    kappa is the cavity amplitude decay rate, gamma the mirror thermal
    decay rate, n_bath the mirror bath occupancy.
    """

    kappa: float = 0.0
    gamma: float = 0.0
    n_bath: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.kappa < 0 or self.gamma < 0 or self.n_bath < 0:
            raise ParameterError("decay rates and bath occupancy must be nonnegative")


@dataclass(frozen=True)
class CharState:
    """Gaussian characteristic-function data: quadratic form L, linear term q."""

    l_mat: NDArray[np.float64]
    q_vec: NDArray[np.float64]

    def __post_init__(self):
        l_mat = np.asarray(self.l_mat, dtype=float)
        q_vec = np.asarray(self.q_vec, dtype=float)
        object.__setattr__(self, "l_mat", l_mat)
        object.__setattr__(self, "q_vec", q_vec)
        if l_mat.shape != (4, 4) or q_vec.shape != (4,):
            raise ParameterError("CharState needs a 4x4 matrix and a 4-vector")
        scale = max(1.0, float(np.max(np.abs(l_mat))))
        if float(np.max(np.abs(l_mat - l_mat.T))) > 1e-12 * scale:
            raise UnphysicalCovarianceError("characteristic form L must be symmetric")


@dataclass(frozen=True)
class CharSystem:
    """Coefficients of the characteristic-function PDE for one branch.

    drift and source are the block-diagonal 4x4 matrices of the L/q
    equations; lam4 = 4λ scales the source term.
    """

    drift: NDArray[np.float64]
    source: NDArray[np.float64]
    lam4: float


def build_char_system(params: DissipativeParams, branch: BOBranch) -> CharSystem:
    """Drift and source blocks for the given branch."""
    if params.lam == 0:
        raise ParameterError("inter-cavity coupling must be nonzero")
    omega, gamma = params.omega, params.gamma
    strength = branch.squeeze_strength
    bath = -gamma * params.n_bath / (4.0 * params.lam)
    m1 = np.array([[-gamma / 2, omega], [-omega, -gamma / 2]])
    m2 = np.array([[-gamma / 2, omega - 8.0 * strength * params.lam], [-omega, -gamma / 2]])
    k1 = np.array([[bath, 0.0], [0.0, bath]])
    k2 = np.array([[bath, strength], [strength, bath]])
    zeros = np.zeros((2, 2))
    drift = np.block([[m1, zeros], [zeros, m2]])
    source = np.block([[k1, zeros], [zeros, k2]])
    return CharSystem(drift, source, 4.0 * params.lam)


def char_rhs(state: CharState, system: CharSystem):
    """Time derivatives (dL, dq); dL is symmetrized explicitly."""
    m = system.drift
    dl = m @ state.l_mat + state.l_mat @ m.T - system.lam4 * system.source
    dq = m @ state.q_vec
    return 0.5 * (dl + dl.T), dq


def initial_char_state(n_thermal: float) -> CharState:
    """Characteristic data of a product thermal state of the two mirrors.

    A thermal occupancy n̄ per mirror gives the normal-ordered function
    exp(−n̄(|ε|² + |η|²)), i.e. L = n̄·identity in the real coordinates.
    """
    if n_thermal < 0:
        raise ParameterError("initial occupancy must be nonnegative")
    return CharState(n_thermal * np.eye(4), np.zeros(4))


def _pack(state: CharState) -> NDArray[np.float64]:
    return np.concatenate([state.l_mat[_TRIU], state.q_vec])


def _unpack(y: NDArray[np.float64]) -> CharState:
    l_mat = np.zeros((4, 4))
    l_mat[_TRIU] = y[:10]
    l_mat = l_mat + l_mat.T - np.diag(np.diag(l_mat))
    return CharState(l_mat, y[10:])


def integrate_char(
    params: DissipativeParams,
    branch: BOBranch,
    t_grid,
    rtol: float = 1e-10,
    atol: float = 1e-10,
) -> list[CharState]:
    """Integrate the L/q equations over the grid from the thermal start.

    The equations are linear with constant coefficients, so the right-hand
    side is assembled once as an affine map on the 14 packed unknowns
    (10 entries of L, 4 of q) by probing char_rhs on basis states.
    """
    system = build_char_system(params, branch)

    def full_rhs(y):
        dl, dq = char_rhs(_unpack(y), system)
        return np.concatenate([dl[_TRIU], dq])

    offset = full_rhs(np.zeros(14))
    columns = np.empty((14, 14))
    basis = np.eye(14)
    for j in range(14):
        columns[:, j] = full_rhs(basis[j]) - offset

    spec = OdeSpec(
        dim=14, rhs=lambda t, y: columns @ y + offset, rtol=rtol, atol=atol
    )
    states, _report = integrate(spec, _pack(initial_char_state(params.n_thermal)), t_grid)
    return [_unpack(row) for row in states]


def _covariance_data(l_mat: NDArray[np.float64]) -> NDArray[np.float64]:
    # second moments from the quadratic form; the ½ restores the vacuum
    # (commutator) contribution that normal ordering removes
    l = l_mat
    v_cd = np.array(
        [
            [l[1, 1] + 0.5, -l[0, 1], l[1, 3], -l[1, 2]],
            [-l[0, 1], l[0, 0] + 0.5, -l[0, 3], l[0, 2]],
            [l[1, 3], -l[0, 3], l[3, 3] + 0.5, -l[2, 3]],
            [-l[1, 2], l[0, 2], -l[2, 3], l[2, 2] + 0.5],
        ]
    )
    return _CD_TO_MIRRORS @ v_cd @ _CD_TO_MIRRORS.T


def covariance_from_char(state: CharState) -> TwoModeCM:
    """Mirror covariance encoded by a characteristic-function state.

    Raises UnphysicalCovarianceError when the implied state violates the
    uncertainty bound by more than 1e-6 (an integration-integrity check).
    """
    try:
        return TwoModeCM.from_matrix(_covariance_data(state.l_mat), atol=1e-6)
    except UnphysicalCovarianceError as exc:
        raise UnphysicalCovarianceError(
            f"characteristic state decodes to an unphysical covariance: {exc}"
        ) from exc


def decayed_weights(params: DissipativeParams, t: float, cutoff_sigmas: float = DEFAULT_CUTOFF_SIGMAS) -> BranchWeights:
    """Branch weights at time t, with coherent amplitudes decayed by e^(−κt)."""
    if t < 0:
        raise ParameterError("time must be nonnegative")
    decay = np.exp(-params.kappa * t)
    return branch_weights(params.alpha_a * decay, params.alpha_b * decay, cutoff_sigmas)


def _branch_covariances(params, n, t_grid, rtol, atol) -> NDArray[np.float64]:
    states = integrate_char(params, make_branch(params, n), t_grid, rtol, atol)
    out = np.empty((len(states), 4, 4))
    for k, state in enumerate(states):
        data = _covariance_data(state.l_mat)
        nu = _min_symplectic(data)
        if nu < VACUUM_VARIANCE - 1e-6:
            raise UnphysicalCovarianceError(
                f"branch n={n} decoded an unphysical covariance at "
                f"t={t_grid[k]:.6g} (nu={nu:.9g})"
            )
        out[k] = data
    return out


def _min_symplectic(data: NDArray[np.float64]) -> float:
    # two-mode closed form with +2 det C, cheap enough to run per grid point
    det_a = np.linalg.det(data[:2, :2])
    det_b = np.linalg.det(data[2:, 2:])
    det_c = np.linalg.det(data[:2, 2:])
    sigma = det_a + det_b + 2.0 * det_c
    disc = max(sigma * sigma - 4.0 * np.linalg.det(data), 0.0)
    return float(np.sqrt(max(0.5 * (sigma - np.sqrt(disc)), 0.0)))


def dissipative_negativity(
    params: DissipativeParams,
    t_grid,
    mixture: str = "per-branch",
    cutoff_sigmas: float = DEFAULT_CUTOFF_SIGMAS,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    workers: int = 1,
) -> NDArray[np.float64]:
    """Weighted negativity of the lossy mirrors over a time grid.

    Branch states evolve under mirror damping; the weights are evaluated
    at every grid time with the decayed cavity amplitudes and renormalized
    over the retained branches. Branch integrations are independent; with
    workers > 1 they run in a process pool, reduced in branch order.
    """
    if mixture not in MIXTURE_MODES:
        raise ParameterError(f"unknown mixture mode {mixture!r}")
    ts = np.asarray(t_grid, dtype=float)
    base = branch_weights(params.alpha_a, params.alpha_b, cutoff_sigmas)
    branches = [n for n, _w in base.items()]
    if mixture == "per-branch":
        branches = [n for n in branches if n != 0]

    weight_rows = np.empty((len(ts), len(branches)))
    for k, t in enumerate(ts):
        table = decayed_weights(params, float(t), cutoff_sigmas).table
        for col, n in enumerate(branches):
            weight_rows[k, col] = table.get(n, 0.0)

    jobs = [(params, n, ts, rtol, atol) for n in branches]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            covs = list(pool.map(_branch_covariance_task, jobs))
    else:
        covs = [_branch_covariance_task(job) for job in jobs]

    if mixture == "per-branch":
        total = np.zeros(len(ts))
        for col, cov in enumerate(covs):
            total += weight_rows[:, col] * _batched_log_negativity(cov)
        return total
    v_mean = np.zeros((len(ts), 4, 4))
    for col, cov in enumerate(covs):
        v_mean += weight_rows[:, col, None, None] * cov
    return _batched_log_negativity(v_mean)


def _branch_covariance_task(job):
    params, n, ts, rtol, atol = job
    return _branch_covariances(params, n, ts, rtol, atol)
