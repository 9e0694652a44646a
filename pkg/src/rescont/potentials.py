import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

PotentialFamily = Literal["gaussian", "square_well"]

FAMILIES: tuple[str, ...] = ("gaussian", "square_well")
RANGE_TOL = 1e-12


@dataclass(frozen=True)
class ChannelSet:
    """Angular momenta of the coupled channels and the reduced mass (ħ = 1)."""

    l_values: tuple[int, ...]
    mu: float = 1.0

    def __post_init__(self) -> None:
        l_values = tuple(int(l) for l in self.l_values)
        if not l_values:
            raise ValueError("l_values must contain at least one channel")
        if any(l < 0 for l in l_values):
            raise ValueError(f"l_values must be non-negative, got {l_values}")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        object.__setattr__(self, "l_values", l_values)

    @property
    def n(self) -> int:
        return len(self.l_values)

    @property
    def k_exponents(self) -> NDArray[np.int64]:
        """2l+1 per channel, the powers entering the regularized determinant."""
        return 2 * np.asarray(self.l_values, dtype=np.int64) + 1

    def centrifugal(self, r: float) -> NDArray[np.float64]:
        """Diagonal of l(l+1)/r² (already multiplied through by 2μ)."""
        ls = np.asarray(self.l_values, dtype=np.float64)
        return ls * (ls + 1.0) / (r * r)


@dataclass(frozen=True, eq=False)
class PotentialModel:
    """Symmetric channel-potential matrix V_ij(r, λ) with one free strength λ.

    The entry at ``continuation_index`` (0-based) and its mirror are replaced
    by the supplied λ on every evaluation; all other strengths are frozen.
    """

    channels: ChannelSet
    strengths: NDArray[np.float64]
    family: PotentialFamily = "gaussian"
    continuation_index: tuple[int, int] = (0, 0)
    well_radius: float = 1.0

    def __post_init__(self) -> None:
        n = self.channels.n
        strengths = np.array(self.strengths, dtype=np.float64)
        if strengths.shape != (n, n):
            raise ValueError(f"strengths must be {n}x{n}, got shape {strengths.shape}")
        if not np.allclose(strengths, strengths.T, rtol=1e-12, atol=0.0):
            raise ValueError("strengths must be symmetric (λ_ij = λ_ji)")
        strengths.setflags(write=False)
        object.__setattr__(self, "strengths", strengths)

        if self.family not in FAMILIES:
            raise ValueError(f"Invalid family: {self.family}. Must be one of {FAMILIES}")

        i, j = (int(v) for v in self.continuation_index)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"continuation_index {self.continuation_index} outside {n}x{n}")
        object.__setattr__(self, "continuation_index", (i, j))

        if self.family == "square_well" and not self.well_radius > 0:
            raise ValueError("well_radius must be positive")

    @property
    def lambda0(self) -> float:
        """Strength stored at the continuation index."""
        i, j = self.continuation_index
        return float(self.strengths[i, j])

    @property
    def range_radius(self) -> float:
        return effective_range(self, RANGE_TOL)

    def strength_matrix(self, lam: float | None = None) -> NDArray[np.float64]:
        s = np.array(self.strengths)
        if lam is not None:
            i, j = self.continuation_index
            s[i, j] = lam
            s[j, i] = lam
        return s

    def evaluate(self, r: float, lam: float) -> NDArray[np.float64]:
        return self.evaluate_grid(np.array([r], dtype=np.float64), lam)[0]

    def evaluate_grid(self, r: ArrayLike, lam: float) -> NDArray[np.float64]:
        """V on every node of ``r``; shape (len(r), n, n)."""
        radii = np.asarray(r, dtype=np.float64)
        s = self.strength_matrix(lam)
        if self.family == "gaussian":
            profile = np.exp(-radii * radii)
        else:
            profile = (radii < self.well_radius).astype(np.float64)
        return -s[np.newaxis, :, :] * profile[:, np.newaxis, np.newaxis]

    def jumps(self, lam: float) -> tuple[tuple[float, NDArray[np.float64]], ...]:
        """Discontinuities as (radius, V(R+) - V(R-)) pairs."""
        if self.family == "square_well":
            return ((self.well_radius, self.strength_matrix(lam)),)
        return ()


def evaluate(model: PotentialModel, r: float, lam: float) -> NDArray[np.float64]:
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r}")
    return model.evaluate(r, lam)


def effective_range(model: PotentialModel, tol: float, lam: float | None = None) -> float:
    """Smallest R with max_ij |V_ij(r)| < tol for every r >= R.

    A potential that never exceeds ``tol`` has range 0.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    strength = float(np.max(np.abs(model.strength_matrix(lam))))
    if model.family == "square_well":
        return model.well_radius if strength >= tol else 0.0
    if strength < tol:
        return 0.0
    return math.sqrt(math.log(strength / tol))
