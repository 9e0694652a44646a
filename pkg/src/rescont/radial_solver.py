"""Renormalized Numerov propagation of the coupled-channel radial equation.

Solves Ψ''(r) = W(r) Ψ(r) with

    W(r) = 2μ V(r, λ) + diag(l_i (l_i + 1) / r²) - k² I,    Ψ(0) = 0,

on the uniform grid r_n = n h. Written as a three-term recurrence
a_n Ψ_{n+1} = b_n Ψ_n - c_n Ψ_{n-1}, only the ratio Q_n = Ψ_{n+1} Ψ_n⁻¹ is
carried from node to node, Q_n = a_n⁻¹ (b_n - c_n Q_{n-1}⁻¹), so exponentially
growing components never have to be represented next to decaying ones.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.typing import NDArray

from rescont.exceptions import ArgumentOverflowError, DomainError, SingularPropagationError
from rescont.potentials import PotentialModel, effective_range
from rescont.special_functions import EXP_LIMIT

logger = logging.getLogger(__name__)

DEFAULT_R_MAX = 4.6
DEFAULT_N_POINTS = 4096
MIN_N_POINTS = 16
JUMP_NODE_TOL = 1e-9

ComplexMatrix = NDArray[np.complex128]


@dataclass(frozen=True)
class RadialGrid:
    r_max: float = DEFAULT_R_MAX
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self) -> None:
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.n_points < MIN_N_POINTS:
            raise ValueError(f"n_points must be at least {MIN_N_POINTS}, got {self.n_points}")

    @property
    def h(self) -> float:
        return self.r_max / self.n_points

    @property
    def nodes(self) -> NDArray[np.float64]:
        return np.arange(self.n_points + 1, dtype=np.float64) * self.h

    def refined(self, factor: int) -> "RadialGrid":
        return RadialGrid(self.r_max, self.n_points * factor)


@dataclass(frozen=True, eq=False)
class AsymptoticSample:
    """Ψ at the last two grid nodes; columns are independent regular solutions."""

    r1: float
    r2: float
    psi1: ComplexMatrix
    psi2: ComplexMatrix
    ratio: ComplexMatrix | None = None

    def matching_ratio(self) -> ComplexMatrix:
        """M = psi2 · psi1⁻¹, taken from the propagator when it supplied one."""
        if self.ratio is not None:
            return self.ratio
        return np.asarray(np.linalg.solve(self.psi1.T, self.psi2.T).T, dtype=np.complex128)


def covers(model: PotentialModel, grid: RadialGrid, lam: float, tol: float) -> bool:
    """True when the grid reaches past the effective range of the potential at λ."""
    return grid.r_max >= effective_range(model, tol, lam)


# Channel counts are tiny, so the kernel works on explicit loops; per-node
# LAPACK/BLAS calls would cost more than the arithmetic.


@njit(cache=True, nogil=True)
def _matmul_into(a, b, out):  # type: ignore[no-untyped-def]
    n = a.shape[0]
    m = b.shape[1]
    for i in range(n):
        for j in range(m):
            acc = 0j
            for p in range(a.shape[1]):
                acc += a[i, p] * b[p, j]
            out[i, j] = acc


@njit(cache=True, nogil=True)
def _invert_into(m, work, out):  # type: ignore[no-untyped-def]
    """Gauss-Jordan with partial pivoting; False when ``m`` is singular."""
    n = m.shape[0]
    for i in range(n):
        for j in range(n):
            work[i, j] = m[i, j]
            out[i, j] = 1.0 if i == j else 0.0
    for col in range(n):
        pivot = col
        best = abs(work[col, col])
        for row in range(col + 1, n):
            if abs(work[row, col]) > best:
                best = abs(work[row, col])
                pivot = row
        if best == 0.0:
            return False
        if pivot != col:
            for j in range(n):
                work[col, j], work[pivot, j] = work[pivot, j], work[col, j]
                out[col, j], out[pivot, j] = out[pivot, j], out[col, j]
        scale = 1.0 / work[col, col]
        for j in range(n):
            work[col, j] *= scale
            out[col, j] *= scale
        for row in range(n):
            if row != col:
                factor = work[row, col]
                if factor != 0:
                    for j in range(n):
                        work[row, j] -= factor * work[col, j]
                        out[row, j] -= factor * out[col, j]
    return True


@njit(cache=True, nogil=True)
def _ratio_kernel(a_inv, b, c, psi_start):  # type: ignore[no-untyped-def]
    """Returns (Ψ_{N-1}, Q_{N-1}, failed node or -1)."""
    n_nodes = b.shape[0] - 1
    n = b.shape[1]
    psi = psi_start.copy()
    q = np.empty((n, n), dtype=np.complex128)
    q_inv = np.empty((n, n), dtype=np.complex128)
    work = np.empty((n, n), dtype=np.complex128)
    tmp = np.empty((n, n), dtype=np.complex128)
    rhs = np.empty((n, n), dtype=np.complex128)

    _matmul_into(a_inv[1], b[1], q)
    for node in range(2, n_nodes):
        _matmul_into(q, psi, tmp)
        psi[:, :] = tmp
        if not _invert_into(q, work, q_inv):
            return psi, q, node
        _matmul_into(c[node], q_inv, tmp)
        for i in range(n):
            for j in range(n):
                rhs[i, j] = b[node, i, j] - tmp[i, j]
        _matmul_into(a_inv[node], rhs, q)
    return psi, q, -1


def _coefficients(
    model: PotentialModel, k: complex, lam: float, grid: RadialGrid
) -> tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    channels = model.channels
    n = channels.n
    n_nodes = grid.n_points
    h = grid.h
    r = grid.nodes
    eye = np.eye(n, dtype=np.complex128)
    diag = np.arange(n)

    w = np.zeros((n_nodes + 1, n, n), dtype=np.complex128)
    w[1:] = 2.0 * channels.mu * model.evaluate_grid(r[1:], lam)
    ls = np.asarray(channels.l_values, dtype=np.float64)
    w[1:, diag, diag] += (ls * (ls + 1.0))[np.newaxis, :] / (r[1:, np.newaxis] ** 2)
    w[1:, diag, diag] -= k * k
    t = (h * h / 12.0) * w

    a = np.broadcast_to(eye, w.shape).copy()
    b = np.broadcast_to(eye, w.shape).copy()
    c = np.broadcast_to(eye, w.shape).copy()
    a[1:n_nodes] = eye - t[2:]
    b[1:n_nodes] = 2.0 * eye + 10.0 * t[1:n_nodes]
    c[2:n_nodes] = eye - t[1 : n_nodes - 1]

    # Ψ_0 = 0, but lim_{r→0} l(l+1)ψ/r² = 2C is finite for l = 1, where
    # ψ = r² (C + r² W(0) C / 10 + ...) with W(0) = 2μV(0) - k².
    p_wave = np.diag([1.0 if l == 1 else 0.0 for l in channels.l_values]).astype(np.complex128)
    if p_wave.any():
        w_origin = 2.0 * channels.mu * model.evaluate(0.0, lam) - k * k * eye
        b[1] += (p_wave - (h * h / 10.0) * (p_wave @ w_origin @ p_wave)) / 6.0

    for radius, jump in model.jumps(lam):
        node = int(round(radius / h))
        if abs(node * h - radius) > JUMP_NODE_TOL * max(1.0, radius):
            logger.warning(
                f"Potential jump at r={radius} is not on a grid node; "
                f"accuracy drops to second order"
            )
            continue
        if not 1 <= node <= n_nodes - 1:
            continue
        d = 2.0 * channels.mu * jump.astype(np.complex128)
        t_right = t[node]
        t_left = t_right - (h * h / 12.0) * d
        a[node - 1] = eye - t_left
        a[node] = eye - t[node + 1] - (h * h / 24.0) * d
        b[node] = 2.0 * eye + 5.0 * (t_left + t_right) - (h**4 / 48.0) * (d @ d)
        c[node] = eye - t[node - 1] + (h * h / 24.0) * d

    return a, b, c


def propagate(
    model: PotentialModel,
    k: complex,
    lam: float,
    grid: RadialGrid,
    initial: ComplexMatrix | None = None,
) -> AsymptoticSample:
    """Propagate the regular solution matrix from r = 0 to the end of the grid.

    ``initial`` overrides Ψ(h), which defaults to diag(h^{l_i+1}).
    """
    k = complex(k)
    if k == 0:
        raise DomainError("propagate requires k != 0", "propagate", k)
    if abs(k.imag) * grid.r_max >= EXP_LIMIT:
        raise ArgumentOverflowError(
            f"Growth e^(|Im k| r_max) = e^{abs(k.imag) * grid.r_max:.1f} is not representable",
            k,
            EXP_LIMIT,
        )

    h = grid.h
    if initial is None:
        initial = np.diag([h ** (l + 1) for l in model.channels.l_values]).astype(np.complex128)
    else:
        initial = np.ascontiguousarray(initial, dtype=np.complex128)

    a, b, c = _coefficients(model, k, lam, grid)
    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as e:
        raise SingularPropagationError(f"Numerov coefficient I - T is singular: {e}", k) from e
    psi1, ratio, failed = _ratio_kernel(a_inv, b, c, initial)
    if failed >= 0:
        raise SingularPropagationError(
            f"Solution ratio is singular at node {failed}", k, node=int(failed)
        )

    psi2 = ratio @ psi1
    if not (np.all(np.isfinite(ratio)) and np.all(np.isfinite(psi1))):
        raise SingularPropagationError("Propagation produced non-finite ratios", k)

    return AsymptoticSample(
        r1=(grid.n_points - 1) * h,
        r2=grid.n_points * h,
        psi1=psi1,
        psi2=psi2,
        ratio=ratio,
    )
