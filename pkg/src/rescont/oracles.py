"""Reference results computed independently of the Numerov/S-matrix pipeline."""

import cmath
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from rescont.potentials import PotentialModel

FD_N_GRID = 4000
FD_R_MAX = 20.0
FD_MIN_GRID = 200


@dataclass(frozen=True)
class FDSpectrum:
    bound_k: tuple[complex, ...]
    energies: tuple[float, ...]
    n_grid: int
    r_max: float

    @property
    def h(self) -> float:
        return self.r_max / (self.n_grid + 1)


def square_well_smatrix(l: int, depth: float, radius: float, mu: float, k: complex) -> complex:
    """Closed-form s-wave S(k) for V = -depth on r < radius.

    Written with sin(κR)/κ so that κ → 0 and the poles of cot(κR) need no special care.
    """
    if l != 0:
        raise ValueError(f"only l = 0 is available in closed form, got l = {l}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    k = complex(k)
    if k == 0:
        raise ValueError("k must be non-zero")

    kappa = cmath.sqrt(k * k + 2.0 * mu * depth)
    x = kappa * radius
    cos_x = cmath.cos(x)
    sin_over_kappa = radius * complex(np.sinc(x / np.pi))
    numerator = cos_x + 1j * k * sin_over_kappa
    denominator = cos_x - 1j * k * sin_over_kappa
    return complex(cmath.exp(-2j * k * radius) * numerator / denominator)


def square_well_threshold_depth(radius: float, mu: float) -> float:
    """Smallest depth binding an s-wave state: sqrt(2μ·depth)·R = π/2."""
    return float((np.pi / (2.0 * radius)) ** 2 / (2.0 * mu))


def fd_bound_states(
    model: PotentialModel,
    lam: float,
    n_grid: int = FD_N_GRID,
    r_max: float = FD_R_MAX,
) -> FDSpectrum:
    """Negative eigenvalues of the second-order finite-difference Hamiltonian.

    Nodes r_j = j h, j = 1..n_grid with Dirichlet ends at 0 and r_max. Unknowns
    are interleaved node-major, so the matrix is banded with half-bandwidth n.
    """
    if n_grid < FD_MIN_GRID:
        raise ValueError(f"n_grid must be at least {FD_MIN_GRID}, got {n_grid}")
    channels = model.channels
    n = channels.n
    h = r_max / (n_grid + 1)
    r = np.arange(1, n_grid + 1, dtype=np.float64) * h

    u = 2.0 * channels.mu * model.evaluate_grid(r, lam)
    ls = np.asarray(channels.l_values, dtype=np.float64)
    diag = np.arange(n)
    u[:, diag, diag] += (ls * (ls + 1.0))[np.newaxis, :] / (r[:, np.newaxis] ** 2)

    # Upper banded storage: band[n + i - j, j] = A[i, j].
    size = n_grid * n
    band = np.zeros((n + 1, size))
    band[n] = (u[:, diag, diag] + 2.0 / (h * h)).reshape(-1)
    for offset in range(1, n):
        block = np.zeros((n_grid, n))
        for c in range(n - offset):
            block[:, c + offset] = u[:, c, c + offset]
        band[n - offset] = block.reshape(-1)
    band[0, n:] = -1.0 / (h * h)

    lower = -float(np.abs(band).sum(axis=0).max()) * 2.0 - 1.0
    eigenvalues = scipy.linalg.eig_banded(
        band,
        lower=False,
        eigvals_only=True,
        select="v",
        select_range=(lower, 0.0),
    )
    eigenvalues = np.sort(eigenvalues[eigenvalues < 0])

    return FDSpectrum(
        bound_k=tuple(complex(0.0, float(np.sqrt(-eps))) for eps in eigenvalues),
        energies=tuple(float(eps / (2.0 * channels.mu)) for eps in eigenvalues),
        n_grid=n_grid,
        r_max=r_max,
    )
