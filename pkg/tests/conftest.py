import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from optomech import BOParams, CovarianceMatrix
from optomech.bo_dissipative import DissipativeParams
from optomech.langevin import DriveParams, EffectiveDrive

# caption parameter sets used throughout the suite
UNITARY_PARAMS = dict(omega=1.0, g=1e-2, lam=1e-1, alpha_a=4.0, alpha_b=1.0)
LOSSY_PARAMS = dict(
    omega=1.0, g=1e-2, lam=1e-1, alpha_a=4.0, alpha_b=1.0,
    kappa=1e-3, gamma=1e-4, n_bath=0.0,
)
DRIVEN_PARAMS = dict(omega=1.0, lam=20.0, kappa=0.08, gamma_m=0.01)


@pytest.fixture
def unitary_params():
    return BOParams(**UNITARY_PARAMS)


@pytest.fixture
def lossy_params():
    return DissipativeParams(**LOSSY_PARAMS)


def driven_params(delta=0.0, nbar=0.0, g_s=2.5):
    return DriveParams(
        n1=nbar,
        n2=nbar,
        drive=EffectiveDrive(g_a_s=g_s, g_b_s=g_s, delta_a=delta, delta_b=delta),
        **DRIVEN_PARAMS,
    )


def random_physical_cm(rng, n_modes=2, spread=1.0):
    """A generic mixed physical covariance: A Aᵀ plus the vacuum floor."""
    dim = 2 * n_modes
    a = spread * rng.standard_normal((dim, dim))
    return CovarianceMatrix(n_modes, a @ a.T + 0.5 * np.eye(dim))


def single_mode_rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])
