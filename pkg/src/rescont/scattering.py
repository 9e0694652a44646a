"""S-matrix extraction and the regularized continuation function det F.

Outside the potential the regular solution behaves as

    Ψ(r) C⁻¹ → (i/2) (H⁻(kr) - H⁺(kr) S),

so with M = Ψ(r2) Ψ(r1)⁻¹ the unknown right factor C drops out of

    S = (H⁺(r2) - M H⁺(r1))⁻¹ (H⁻(r2) - M H⁻(r1)).

det F = ∏ k^{2l+1} / det(S - I) has zeros exactly where S has poles and,
unlike det S, never has a pole and a zero meeting at k = 0.
"""

import logging
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from rescont.exceptions import (
    DivisionDegenerateError,
    DomainError,
    NumericalError,
    SingularMatchingError,
)
from rescont.potentials import ChannelSet, PotentialModel
from rescont.radial_solver import AsymptoticSample, ComplexMatrix, RadialGrid, propagate
from rescont.special_functions import riccati_h, riccati_j

logger = logging.getLogger(__name__)

DEGENERATE_DET = 1e-300
MATCHING_RCOND = 1e-14


@dataclass(frozen=True, eq=False)
class SMatrix:
    k: complex
    lam: float
    s: ComplexMatrix
    s_minus_identity: ComplexMatrix

    @property
    def n(self) -> int:
        return int(self.s.shape[0])


@dataclass(frozen=True)
class ResidualValue:
    """det F together with the two factors it is assembled from."""

    det_f: complex
    det_s_minus_i: complex
    k_power_product: complex

    @property
    def norm(self) -> float:
        return abs(self.det_f)

    def as_real(self) -> NDArray[np.float64]:
        return np.array([self.det_f.real, self.det_f.imag])


def _free_waves(
    channels: ChannelSet, k: complex, r: float
) -> tuple[NDArray[np.complex128], NDArray[np.complex128], NDArray[np.complex128]]:
    z = k * r
    h_plus = np.array([riccati_h(l, 1, z).value for l in channels.l_values])
    h_minus = np.array([riccati_h(l, -1, z).value for l in channels.l_values])
    j_hat = np.array([riccati_j(l, z).value for l in channels.l_values])
    return h_plus, h_minus, j_hat


def extract_smatrix(
    sample: AsymptoticSample, k: complex, channels: ChannelSet, lam: float = float("nan")
) -> SMatrix:
    k = complex(k)
    if k == 0:
        raise DomainError("S-matrix extraction requires k != 0", "extract_smatrix", k)

    m = sample.matching_ratio()
    hp1, hm1, j1 = _free_waves(channels, k, sample.r1)
    hp2, hm2, j2 = _free_waves(channels, k, sample.r2)

    # M · diag(x) scales the columns of M.
    outgoing = np.diag(hp2) - m * hp1[np.newaxis, :]
    incoming = np.diag(hm2) - m * hm1[np.newaxis, :]
    regular = np.diag(j2) - m * j1[np.newaxis, :]

    # Closed channels make column magnitudes differ by orders; equilibrate first.
    column_scale = np.abs(outgoing).max(axis=0)
    if not np.all(column_scale > 0):
        raise SingularMatchingError("Matching matrix has a zero column", k)
    try:
        lu, piv = scipy.linalg.lu_factor(outgoing / column_scale, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise SingularMatchingError(f"Matching matrix could not be factorized: {e}", k) from e
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= MATCHING_RCOND * pivots.max():
        raise SingularMatchingError(
            f"Matching matrix H+(r2) - M H+(r1) is singular (pivot ratio "
            f"{pivots.min() / pivots.max():.2e})",
            k,
        )

    unscale = column_scale[:, np.newaxis]
    s = scipy.linalg.lu_solve((lu, piv), incoming) / unscale
    # H⁻ - H⁺ = -2i Ĵ, so S - I never subtracts two nearly equal matrices.
    s_minus_identity = -2j * scipy.linalg.lu_solve((lu, piv), regular) / unscale
    return SMatrix(k=k, lam=lam, s=s, s_minus_identity=s_minus_identity)


def regularized_det(s: SMatrix, channels: ChannelSet) -> ResidualValue:
    """det F = ∏ k^{2l+1} / det(S - I), taken factor by factor from an LU of S - I."""
    lu, piv = scipy.linalg.lu_factor(s.s_minus_identity, check_finite=False)
    pivots = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    parity = -1.0 if swaps % 2 else 1.0

    det_s_minus_i = complex(parity * np.prod(pivots))
    k_factors = np.array([s.k**e for e in channels.k_exponents.tolist()], dtype=np.complex128)
    k_power_product = complex(np.prod(k_factors))

    if np.any(pivots == 0) or abs(det_s_minus_i) < DEGENERATE_DET:
        raise DivisionDegenerateError(
            f"det(S - I) = {abs(det_s_minus_i):.3e} at k = {s.k:.6g}: det F is at a pole",
            s.k,
            abs(det_s_minus_i),
        )

    det_f = complex(parity * np.prod(k_factors / pivots))
    return ResidualValue(det_f, det_s_minus_i, k_power_product)


def residual(model: PotentialModel, k: complex, lam: float, grid: RadialGrid) -> ResidualValue:
    sample = propagate(model, k, lam, grid)
    smat = extract_smatrix(sample, k, model.channels, lam)
    return regularized_det(smat, model.channels)


def smatrix(model: PotentialModel, k: complex, lam: float, grid: RadialGrid) -> SMatrix:
    return extract_smatrix(propagate(model, k, lam, grid), k, model.channels, lam)


def matching_determinant(sample: AsymptoticSample, k: complex, channels: ChannelSet) -> complex:
    """det(D Ψ(r1) - Ψ(r2)) with D = diag(ĥ⁺(kr2) / ĥ⁺(kr1)).

    H⁺(r2) - M H⁺(r1) = (D Ψ(r1) - Ψ(r2)) Ψ(r1)⁻¹ H⁺(r1), so this vanishes
    exactly at the poles of S but, unlike det F, has no poles itself. Columns
    are scaled to unit maximum, which keeps the sign.
    """
    k = complex(k)
    if k == 0:
        raise DomainError("Matching determinant requires k != 0", "matching_determinant", k)
    hp1, _, _ = _free_waves(channels, k, sample.r1)
    hp2, _, _ = _free_waves(channels, k, sample.r2)
    mismatch = (hp2 / hp1)[:, np.newaxis] * sample.psi1 - sample.psi2
    column_scale = np.abs(mismatch).max(axis=0)
    if not np.all(column_scale > 0):
        return 0j
    return complex(scipy.linalg.det(mismatch / column_scale))


def outgoing_determinant(
    model: PotentialModel, k: complex, lam: float, grid: RadialGrid
) -> complex:
    """Matching determinant of the propagated solution; real for k on the imaginary axis."""
    return matching_determinant(propagate(model, k, lam, grid), k, model.channels)


def det_s(s: SMatrix) -> complex:
    return complex(np.linalg.det(s.s))


def wronskian_smatrix(
    psi: ComplexMatrix,
    dpsi: ComplexMatrix,
    k: complex,
    r: float,
    channels: ChannelSet,
) -> ComplexMatrix:
    """S from a solution and its r-derivative at one radius outside the potential.

    With W± = H± Ψ' - k H±' Ψ, S = w⁻¹ W⁻ (W⁺)⁻¹ w, where w = diag(W[ĥ⁺, ĥ⁻]).
    """
    k = complex(k)
    z = k * r
    plus = [riccati_h(l, 1, z) for l in channels.l_values]
    minus = [riccati_h(l, -1, z) for l in channels.l_values]
    hp = np.array([v.value for v in plus])
    dhp = np.array([v.derivative for v in plus])
    hm = np.array([v.value for v in minus])
    dhm = np.array([v.derivative for v in minus])

    w_plus = hp[:, np.newaxis] * dpsi - k * dhp[:, np.newaxis] * psi
    w_minus = hm[:, np.newaxis] * dpsi - k * dhm[:, np.newaxis] * psi
    w = hp * dhm - dhp * hm

    ratio = np.linalg.solve(w_plus.T, w_minus.T).T
    return np.asarray((ratio * w[np.newaxis, :]) / w[:, np.newaxis], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class DeterminantMap:
    """|det S| and |det F| on a rectangle of the k-plane, indexed [im, re]; NaN where undefined."""

    lam: float
    re_k: NDArray[np.float64]
    im_k: NDArray[np.float64]
    abs_det_s: NDArray[np.float64]
    abs_det_f: NDArray[np.float64]

    def rows(self) -> Iterator[tuple[float, float, float, float]]:
        for i, y in enumerate(self.im_k):
            for j, x in enumerate(self.re_k):
                yield float(x), float(y), float(self.abs_det_s[i, j]), float(self.abs_det_f[i, j])


def determinant_map(
    model: PotentialModel,
    lam: float,
    re_k: Sequence[float],
    im_k: Sequence[float],
    grid: RadialGrid,
    workers: int = 1,
) -> DeterminantMap:
    re_values = np.asarray(re_k, dtype=np.float64)
    im_values = np.asarray(im_k, dtype=np.float64)

    def sample(k: complex) -> tuple[float, float]:
        try:
            smat = smatrix(model, k, lam, grid)
        except NumericalError as e:
            logger.debug(f"No S-matrix at k={k:.6g}: {e}")
            return float("nan"), float("nan")
        try:
            abs_f = regularized_det(smat, model.channels).norm
        except NumericalError:
            # det(S - I) = 0 puts det F at a pole
            abs_f = float("nan")
        return abs(det_s(smat)), abs_f

    ks = [complex(x, y) for y in im_values for x in re_values]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(sample, ks))
    else:
        values = [sample(k) for k in ks]

    table = np.array(values, dtype=np.float64).reshape(im_values.size, re_values.size, 2)
    undefined = int(np.count_nonzero(np.isnan(table[..., 1])))
    if undefined:
        logger.info(f"det F undefined at {undefined} of {len(ks)} map point(s)")
    return DeterminantMap(lam, re_values, im_values, table[..., 0], table[..., 1])

class ScatteringResidual:
    """det F of one model on one grid, viewed as a map (Re k, Im k, λ) → (Re, Im)."""

    def __init__(self, model: PotentialModel, grid: RadialGrid) -> None:
        self.model = model
        self.grid = grid

    def value(self, k: complex, lam: float) -> ResidualValue:
        return residual(self.model, k, lam, self.grid)

    def det_f(self, k: complex, lam: float) -> complex:
        return self.value(k, lam).det_f

    def __call__(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.value(complex(x[0], x[1]), float(x[2])).as_real()

    def __repr__(self) -> str:
        return (
            f"ScatteringResidual(l={self.model.channels.l_values}, "
            f"family={self.model.family}, n_points={self.grid.n_points})"
        )
