"""Gaussian continuous-variable states and logarithmic negativity.

Quadrature convention throughout the package: x = (c + c†)/√2 and
p = i(c† − c)/√2, with ordering (x1, p1, x2, p2, ...). The vacuum
covariance is ½·identity and the uncertainty principle reads: every
symplectic eigenvalue of a physical covariance matrix is at least ½.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ParameterError, UnphysicalCovarianceError

VACUUM_VARIANCE = 0.5

#: relative tolerance for symmetry of covariance data
SYMMETRY_RTOL = 1e-12
#: absolute slack below ½ allowed for the smallest symplectic eigenvalue
PHYSICALITY_ATOL = 1e-9


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal symplectic form for (x1, p1, x2, p2, ...) ordering."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(data) -> NDArray[np.float64]:
    """Symplectic spectrum of a symmetric 2n x 2n matrix.

    Returns the n nonnegative invariants, sorted ascending. They are the
    moduli of the eigenvalues of i*Omega*V, each of which occurs twice.
    """
    data = np.asarray(data, dtype=float)
    n = data.shape[0] // 2
    evs = np.linalg.eigvals(1j * symplectic_form(n) @ data)
    return np.sort(np.abs(evs))[::2]


def _check_symmetric(data, what: str):
    scale = max(1.0, float(np.max(np.abs(data))))
    asym = float(np.max(np.abs(data - data.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise UnphysicalCovarianceError(
            f"{what} is not symmetric (max asymmetry {asym:.3e}, scale {scale:.3e})"
        )


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Second moments of n bosonic modes, validated on construction.

    dim_modes declares the mode count; data must be the matching real
    symmetric 2n x 2n matrix whose symplectic eigenvalues all exceed
    ½ − atol.
    """

    dim_modes: int
    data: NDArray[np.float64]
    atol: float = PHYSICALITY_ATOL

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        if self.dim_modes < 1:
            raise ParameterError("mode count must be positive")
        expected = 2 * self.dim_modes
        if data.shape != (expected, expected):
            raise UnphysicalCovarianceError(
                f"covariance shape {data.shape} does not match {self.dim_modes} modes"
            )
        _check_symmetric(data, "covariance matrix")
        nu_min = float(symplectic_eigenvalues(data)[0])
        if nu_min < VACUUM_VARIANCE - self.atol:
            raise UnphysicalCovarianceError(
                f"smallest symplectic eigenvalue {nu_min:.12g} violates the "
                f"uncertainty bound ½ - {self.atol:g}"
            )

    @classmethod
    def from_data(cls, data, atol: float = PHYSICALITY_ATOL) -> "CovarianceMatrix":
        data = np.asarray(data, dtype=float)
        return cls(data.shape[0] // 2, data, atol)

    def symplectic_spectrum(self) -> NDArray[np.float64]:
        return symplectic_eigenvalues(self.data)


@dataclass(frozen=True, eq=False)
class TwoModeCM:
    """Two-mode covariance in block form [[A, C], [C^T, B]].

    a and b are the single-mode blocks, c the cross-correlation block.
    """

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    c: NDArray[np.float64]
    atol: float = PHYSICALITY_ATOL

    def __post_init__(self):
        for name in ("a", "b", "c"):
            block = np.asarray(getattr(self, name), dtype=float)
            if block.shape != (2, 2):
                raise UnphysicalCovarianceError(f"block {name} must be 2x2")
            object.__setattr__(self, name, block)
        _check_symmetric(self.a, "block A")
        _check_symmetric(self.b, "block B")
        # assembling validates symmetry and physicality of the whole state
        CovarianceMatrix(2, self.matrix, self.atol)

    @property
    def matrix(self) -> NDArray[np.float64]:
        return np.block([[self.a, self.c], [self.c.T, self.b]])

    @classmethod
    def from_matrix(cls, data, atol: float = PHYSICALITY_ATOL) -> "TwoModeCM":
        data = np.asarray(data, dtype=float)
        if data.shape != (4, 4):
            raise UnphysicalCovarianceError("a two-mode covariance must be 4x4")
        return cls(data[:2, :2], data[2:, 2:], data[:2, 2:], atol)


def extract_pair(cm: CovarianceMatrix, i: int, j: int) -> TwoModeCM:
    """Reduced two-mode covariance of modes i and j, preserving (x, p) order."""
    n = cm.dim_modes
    if not (0 <= i < n and 0 <= j < n):
        raise ParameterError(f"mode indices ({i}, {j}) out of range for {n} modes")
    if i == j:
        raise ParameterError("extract_pair needs two distinct modes")
    idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    return TwoModeCM.from_matrix(cm.data[np.ix_(idx, idx)], cm.atol)


def symplectic_min_pt(cm: TwoModeCM) -> float:
    """Smallest symplectic eigenvalue of the partially transposed state.

    Uses the two-mode invariant form: with sigma = det A + det B − 2 det C,
    the partial transpose flips the sign of det C, and

        nu = sqrt(sigma/2 − sqrt(sigma² − 4 det V)/2).

    Tiny negative radicands (roundoff) are clamped to zero; genuine
    violations raise UnphysicalCovarianceError.
    """
    det_a = float(np.linalg.det(cm.a))
    det_b = float(np.linalg.det(cm.b))
    det_c = float(np.linalg.det(cm.c))
    det_v = float(np.linalg.det(cm.matrix))
    sigma = det_a + det_b - 2.0 * det_c

    def _clamped_sqrt(value, scale, what):
        tol = 1e-12 * max(1.0, scale)
        if value < -tol:
            raise UnphysicalCovarianceError(
                f"unphysical covariance: negative {what} ({value:.3e})"
            )
        return np.sqrt(max(value, 0.0))

    disc = _clamped_sqrt(sigma * sigma - 4.0 * det_v, sigma * sigma, "discriminant")
    nu_sq = 0.5 * (sigma - disc)
    return float(_clamped_sqrt(nu_sq, abs(sigma), "squared eigenvalue"))


def log_negativity(cm: TwoModeCM) -> float:
    """Logarithmic negativity E_N = max(0, −ln 2ν̃₋), in nats.

    Zero exactly when the partially transposed state stays physical
    (ν̃₋ ≥ ½), which certifies separability for two-mode Gaussian states.
    """
    nu = symplectic_min_pt(cm)
    if nu >= VACUUM_VARIANCE:
        return 0.0
    return float(-np.log(2.0 * nu))
