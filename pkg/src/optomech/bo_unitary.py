"""Closed-system adiabatic dynamics of two fiber-coupled cavity mirrors.

With the collective cavity populations frozen, each photon-difference
branch n = n_A − n_B evolves the two mirrors under a quadratic Hamiltonian:
the center-of-mass mode rotates freely while the relative mode picks up
two-mode squeezing of strength set by n. The Heisenberg propagation is
closed form, so the mirror covariance, and from it the logarithmic
negativity, is exact at any time. Physical curves weight the per-branch
negativities by the coherent-state photon statistics of the cavities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import BODomainError, ParameterError, UnphysicalCovarianceError
from .gaussian import TwoModeCM, VACUUM_VARIANCE

MIXTURE_MODES = ("per-branch", "averaged-state")

#: default truncation of the photon-number tables, in standard deviations
DEFAULT_CUTOFF_SIGMAS = 8.0

# quadrature map r = Q xi for xi = (c, d, c†, d†), r = (x1, p1, x2, p2)
_Q = np.array(
    [
        [1, 0, 1, 0],
        [-1j, 0, 1j, 0],
        [0, 1, 0, 1],
        [0, -1j, 0, 1j],
    ]
) / np.sqrt(2.0)
_QH = _Q.conj().T


@dataclass(frozen=True)
class BOParams:
    """Inputs of the adiabatic pipelines; all rates in units of omega.

    alpha_a and alpha_b are the coherent amplitudes of the collective
    cavity modes, n_thermal the initial occupancy of each mirror.
    """

    omega: float = 1.0
    g: float = 1e-2
    lam: float = 1e-1
    alpha_a: complex = 0.0
    alpha_b: complex = 0.0
    n_thermal: float = 0.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ParameterError("mechanical frequency must be positive")
        if self.lam == 0:
            raise ParameterError("inter-cavity coupling must be nonzero")
        if self.g < 0:
            raise ParameterError("radiation-pressure coupling must be nonnegative")
        if self.n_thermal < 0:
            raise ParameterError("initial occupancy must be nonnegative")


@dataclass(frozen=True)
class BOBranch:
    """Bogoliubov data of one photon-difference branch.

    squeeze_strength is n·(g/4λ)²; squeeze_ratio the dimensionless ratio
    controlling the squeezing expansion, valid only for |ratio| < ½.
    u and v diagonalize the relative mode, with u² − v² = 1 and the sign
    of v following the sign of the ratio; omega0 is half the eigenfrequency
    of the squeezed mode.
    """

    n: int
    squeeze_strength: float
    squeeze_ratio: float
    u: float
    v: float
    omega0: float

    def __post_init__(self):
        if abs(self.squeeze_ratio) >= 0.5:
            raise BODomainError(
                f"branch n={self.n}: squeeze ratio {self.squeeze_ratio:.6g} "
                "outside (-1/2, 1/2)"
            )
        if abs(self.u**2 - self.v**2 - 1.0) > 1e-12:
            raise BODomainError("Bogoliubov normalization u² − v² = 1 violated")


def make_branch(params: BOParams, n: int) -> BOBranch:
    """Bogoliubov coefficients and effective frequency for branch n."""
    strength = n * (params.g / (4.0 * params.lam)) ** 2
    if n == 0:
        return BOBranch(0, 0.0, 0.0, 1.0, 0.0, 0.5 * params.omega)
    denom = params.omega - 4.0 * strength * params.lam
    if denom == 0.0:
        raise BODomainError(
            f"branch n={n}: relative-mode frequency vanishes, squeezing "
            "expansion invalid"
        )
    ratio = 2.0 * strength * params.lam / denom
    if abs(ratio) >= 0.5:
        raise BODomainError(
            f"branch n={n}: squeeze ratio {ratio:.6g} outside (-1/2, 1/2)"
        )
    root = 1.0 / math.sqrt(1.0 - 4.0 * ratio * ratio)
    u = math.sqrt(0.5 * (1.0 + root))
    v = math.copysign(math.sqrt(max(0.5 * (root - 1.0), 0.0)), ratio)
    omega0 = (
        (params.omega - 8.0 * params.lam * strength)
        * params.omega
        / (2.0 * math.sqrt(1.0 - 4.0 * ratio * ratio) * denom)
    )
    return BOBranch(n, strength, ratio, u, v, omega0)


@dataclass(frozen=True)
class MirrorPropagator:
    """Closed-form Heisenberg coefficients at one time.

    same multiplies the mirror's own initial operator, cross the other
    mirror's, and conj_coeff (real) the conjugate operators. Preservation
    of the commutators requires |same|² + |cross|² − 2·conj_coeff² = 4.
    """

    t: float
    same: complex
    cross: complex
    conj_coeff: float

    def __post_init__(self):
        defect = (
            abs(self.same) ** 2 + abs(self.cross) ** 2 - 2.0 * self.conj_coeff**2 - 4.0
        )
        if abs(defect) > 1e-10:
            raise UnphysicalCovarianceError(
                f"propagator violates commutator preservation by {defect:.3e}"
            )

    def transfer_matrix(self) -> NDArray[np.float64]:
        """Real symplectic map acting on (x1, p1, x2, p2)."""
        return _quadrature_transfer(
            np.array([self.same]), np.array([self.cross]), np.array([self.conj_coeff])
        )[0]


def _fg_coefficients(branch: BOBranch, omega: float, ts: NDArray):
    rot = np.exp(-1j * omega * ts)
    fwd = np.exp(-2j * branch.omega0 * ts)
    u2, v2 = branch.u**2, branch.v**2
    squeeze = u2 * fwd - v2 / fwd
    same = rot + squeeze
    cross = rot - squeeze
    conj = 2.0 * branch.u * branch.v * np.sin(2.0 * branch.omega0 * ts)
    return same, cross, conj


def _quadrature_transfer(same, cross, conj) -> NDArray[np.float64]:
    """Batch of real 4x4 transfer matrices from the complex coefficients."""
    npts = len(same)
    tmat = np.zeros((npts, 4, 4), dtype=complex)
    tmat[:, 0, 0] = tmat[:, 1, 1] = same
    tmat[:, 0, 1] = tmat[:, 1, 0] = cross
    tmat[:, 0, 2] = tmat[:, 1, 3] = 1j * conj
    tmat[:, 0, 3] = tmat[:, 1, 2] = -1j * conj
    tmat[:, 2:, 2:] = tmat[:, :2, :2].conj()
    tmat[:, 2:, :2] = tmat[:, :2, 2:].conj()
    tmat *= 0.5
    smat = np.einsum("ij,tjk,kl->til", _Q, tmat, _QH)
    if np.max(np.abs(smat.imag)) > 1e-10:
        raise UnphysicalCovarianceError("transfer matrix has a complex residue")
    return smat.real


def propagator(branch: BOBranch, omega: float, t: float) -> MirrorPropagator:
    """Heisenberg propagation coefficients of branch at time t >= 0."""
    if t < 0:
        raise ParameterError("time must be nonnegative")
    same, cross, conj = _fg_coefficients(branch, omega, np.array([float(t)]))
    return MirrorPropagator(float(t), complex(same[0]), complex(cross[0]), float(conj[0]))


def _covariances(branch: BOBranch, params: BOParams, ts: NDArray) -> NDArray:
    same, cross, conj = _fg_coefficients(branch, params.omega, np.asarray(ts, float))
    smat = _quadrature_transfer(same, cross, conj)
    variance = params.n_thermal + VACUUM_VARIANCE
    return variance * np.einsum("tij,tkj->tik", smat, smat)


def evolve_covariance(branch: BOBranch, params: BOParams, t: float) -> TwoModeCM:
    """Mirror covariance at time t from identical uncorrelated thermal starts."""
    if t < 0:
        raise ParameterError("time must be nonnegative")
    return TwoModeCM.from_matrix(_covariances(branch, params, [float(t)])[0])


def _poisson_pmf(mean: float, n_max: int) -> NDArray[np.float64]:
    out = np.empty(n_max + 1)
    out[0] = math.exp(-mean)
    for k in range(1, n_max + 1):
        out[k] = out[k - 1] * mean / k
    return out


@dataclass(frozen=True)
class BranchWeights:
    """Probability of each photon-difference branch n = n_A − n_B.

    The table is a double-Poisson distribution marginalized over n (the
    branch dynamics depends only on the difference), truncated at
    mean + cutoff·sqrt(mean) photons per cavity and normalized.
    """

    table: dict[int, float]
    na_max: int
    nb_max: int

    def __post_init__(self):
        total = math.fsum(self.table.values())
        if any(w < 0 for w in self.table.values()):
            raise ParameterError("branch weights must be nonnegative")
        if not (1.0 - 1e-6 <= total <= 1.0 + 1e-9):
            raise ParameterError(f"branch weights sum to {total!r}, expected 1")

    def items(self):
        return sorted(self.table.items())


def branch_weights(
    alpha_a: complex, alpha_b: complex, cutoff_sigmas: float = DEFAULT_CUTOFF_SIGMAS
) -> BranchWeights:
    """Photon-difference distribution of two independent coherent states."""
    if cutoff_sigmas < 6:
        raise ParameterError("cutoff_sigmas below 6 would truncate visible weight")
    mean_a = abs(alpha_a) ** 2
    mean_b = abs(alpha_b) ** 2
    na_max = int(math.ceil(mean_a + cutoff_sigmas * math.sqrt(mean_a)))
    nb_max = int(math.ceil(mean_b + cutoff_sigmas * math.sqrt(mean_b)))
    pa = _poisson_pmf(mean_a, na_max)
    pb = _poisson_pmf(mean_b, nb_max)
    table: dict[int, list[float]] = {}
    for nb, wb in enumerate(pb):
        for na, wa in enumerate(pa):
            table.setdefault(na - nb, []).append(wa * wb)
    sums = {n: math.fsum(terms) for n, terms in table.items()}
    total = math.fsum(sums.values())
    return BranchWeights({n: w / total for n, w in sums.items()}, na_max, nb_max)


def _batched_log_negativity(v_batch: NDArray) -> NDArray[np.float64]:
    """log_negativity evaluated on a (T, 4, 4) stack of covariances."""
    a, b, c = v_batch[:, :2, :2], v_batch[:, 2:, 2:], v_batch[:, :2, 2:]

    def det2(m):
        return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]

    sigma = det2(a) + det2(b) - 2.0 * det2(c)
    disc = sigma * sigma - 4.0 * np.linalg.det(v_batch)
    floor = -1e-12 * np.maximum(1.0, sigma * sigma)
    if np.any(disc < floor):
        raise UnphysicalCovarianceError("negative discriminant beyond roundoff")
    nu_sq = 0.5 * (sigma - np.sqrt(np.clip(disc, 0.0, None)))
    if np.any(nu_sq < -1e-12 * np.maximum(1.0, np.abs(sigma))):
        raise UnphysicalCovarianceError("negative squared symplectic eigenvalue")
    nu = np.sqrt(np.clip(nu_sq, 0.0, None))
    if np.any(nu == 0.0):
        raise UnphysicalCovarianceError("degenerate partially transposed state")
    return np.where(nu >= VACUUM_VARIANCE, 0.0, -np.log(2.0 * nu))


def negativity_curve(
    params: BOParams,
    t_grid,
    mixture: str = "per-branch",
    cutoff_sigmas: float = DEFAULT_CUTOFF_SIGMAS,
) -> NDArray[np.float64]:
    """Weighted logarithmic negativity of the two mirrors over a time grid.

    mixture selects how the branch ensemble is reduced: "per-branch"
    averages the branch negativities (the default), "averaged-state" takes
    the negativity of the weight-averaged covariance.
    """
    if mixture not in MIXTURE_MODES:
        raise ParameterError(f"unknown mixture mode {mixture!r}")
    ts = np.asarray(t_grid, dtype=float)
    weights = branch_weights(params.alpha_a, params.alpha_b, cutoff_sigmas)
    if mixture == "per-branch":
        total = np.zeros(len(ts))
        for n, w in weights.items():
            if n == 0:
                continue  # free rotation keeps the thermal product separable
            total += w * _batched_log_negativity(
                _covariances(make_branch(params, n), params, ts)
            )
        return total
    v_mean = np.zeros((len(ts), 4, 4))
    for n, w in weights.items():
        v_mean += w * _covariances(make_branch(params, n), params, ts)
    return _batched_log_negativity(v_mean)


def weighted_negativity(
    params: BOParams,
    t: float,
    mixture: str = "per-branch",
    cutoff_sigmas: float = DEFAULT_CUTOFF_SIGMAS,
) -> float:
    """Weighted negativity at a single time."""
    return float(negativity_curve(params, [float(t)], mixture, cutoff_sigmas)[0])
