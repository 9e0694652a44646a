"""Zeros of det F in the complex k-plane at fixed λ."""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from rescont.exceptions import (
    DerivativeDegenerateError,
    DivisionDegenerateError,
    NoConvergenceError,
    NumericalError,
    SingularMatchingError,
)
from rescont.potentials import PotentialModel
from rescont.radial_solver import RadialGrid
from rescont.scattering import outgoing_determinant, residual

logger = logging.getLogger(__name__)

RootClass = Literal["bound", "virtual", "resonance", "unphysical_mirror"]

NEWTON_TOL = 1e-6
NEWTON_MAX_ITER = 50
MAX_HALVINGS = 8
DERIVATIVE_STEP = 1e-6
DEGENERATE_DERIVATIVE = 1e-14
STEP_TOL = 1e-9
NOISE_STEP_TOL = 1e-7
CLASSIFY_TOL = 1e-6

SCAN_Y_MIN = 0.05
SCAN_STEP = 0.02
DEDUPE_TOL = 1e-6
SEED_DISTANCE = SCAN_STEP


@dataclass(frozen=True)
class RootResult:
    k: complex
    residual_norm: float
    iterations: int
    classification: RootClass

    def to_dict(self) -> dict[str, object]:
        return {
            "re_k": self.k.real,
            "im_k": self.k.imag,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "classification": self.classification,
        }


def classify_root(k: complex, tol: float = CLASSIFY_TOL) -> RootClass:
    """Imaginary-axis states by the sign of Im k, off-axis states by the sign of Re k.

    A zero with Re k < 0 is the mirror partner -conj(k) of a zero with Re k > 0.
    """
    if abs(k.real) < tol:
        return "bound" if k.imag > 0 else "virtual"
    return "resonance" if k.real > 0 else "unphysical_mirror"


def mirror(k: complex) -> complex:
    return -k.conjugate()


def _derivative(f: Callable[[complex], complex], k: complex) -> complex:
    step = DERIVATIVE_STEP * max(1.0, abs(k))
    return (f(k + step) - f(k - step)) / (2.0 * step)


def newton_zero(
    f: Callable[[complex], complex],
    k0: complex,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> RootResult:
    """Damped Newton iteration on an analytic function of one complex variable.

    Converged means a small |f| and a small last correction together; det F
    decays exponentially with Im k, so a small |f| alone proves nothing.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    k = complex(k0)
    if k == 0:
        raise ValueError("k0 must be non-zero")

    value = f(k)
    for iteration in range(1, max_iter + 1):
        slope = _derivative(f, k)
        if abs(slope) < DEGENERATE_DERIVATIVE * abs(value):
            raise DerivativeDegenerateError(
                f"d(det F)/dk = {abs(slope):.3e} vanishes relative to |det F| = {abs(value):.3e}",
                k,
                slope,
            )
        delta = -value / slope
        scale = max(1.0, abs(k))
        if abs(value) <= tol and abs(delta) <= STEP_TOL * scale:
            k += delta
            return RootResult(k, abs(value), iteration, classify_root(k))

        step = delta
        candidate, candidate_value = k, value
        for _ in range(MAX_HALVINGS + 1):
            trial = k + step
            try:
                trial_value = f(trial)
            except DivisionDegenerateError:
                step /= 2.0
                continue
            candidate, candidate_value = trial, trial_value
            if abs(trial_value) < abs(value):
                break
            step /= 2.0
        else:
            if abs(value) <= tol and abs(delta) <= NOISE_STEP_TOL * scale:
                # at the noise floor of det F
                return RootResult(k, abs(value), iteration, classify_root(k))
            logger.debug(f"Newton step at k={k:.8g} not reduced after {MAX_HALVINGS} halvings")

        k, value = candidate, candidate_value

    raise NoConvergenceError("Newton iteration did not converge", k, max_iter, abs(value))


def newton_complex(
    model: PotentialModel,
    lam: float,
    k0: complex,
    grid: RadialGrid,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> RootResult:
    return newton_zero(lambda k: residual(model, k, lam, grid).det_f, k0, tol, max_iter)


def _polish(
    model: PotentialModel,
    lam: float,
    y: float,
    grid: RadialGrid,
    tol: float,
    max_iter: int,
) -> RootResult | None:
    try:
        root = newton_complex(model, lam, 1j * y, grid, tol, max_iter)
    except NumericalError as e:
        logger.debug(f"Candidate k={y:.6f}i not polished: {e}")
        return None
    if root.classification != "bound" or abs(root.k - 1j * y) > SEED_DISTANCE:
        logger.debug(f"Candidate k={y:.6f}i moved to {root.k:.6g}")
        return None
    return root


def _bracketed(model: PotentialModel, lam: float, y: float, grid: RadialGrid) -> RootResult:
    """A sign change of the matching determinant is a pole of S, i.e. a zero of det F."""
    try:
        norm = residual(model, 1j * y, lam, grid).norm
    except SingularMatchingError:
        norm = 0.0
    return RootResult(1j * y, norm, 0, "bound")


def scan_bound_states(
    model: PotentialModel,
    lam: float,
    k_max: float,
    grid: RadialGrid,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    workers: int = 1,
) -> list[RootResult]:
    """Bound states on the positive imaginary axis up to Im k = k_max.

    The axis is sampled with the matching determinant, which is real there,
    vanishes exactly at the poles of S and has no poles of its own. det F
    cannot be bracketed directly: deep states sit next to a pole of det F
    (where S = 1) closer than any affordable sampling step.

    Sign changes are refined with Brent's method, magnitude minima without a
    sign change with a bounded minimization; every candidate is then polished
    by Newton on det F.
    """
    if not k_max > 0:
        raise ValueError("k_max must be positive")

    def along_axis(y: float) -> float:
        try:
            return float(outgoing_determinant(model, 1j * y, lam, grid).real)
        except NumericalError as e:
            logger.debug(f"Scan sample at y={y:.4f} skipped: {e}")
            return float("nan")

    ys = np.arange(SCAN_Y_MIN, k_max + 0.5 * SCAN_STEP, SCAN_STEP)
    ys = ys[ys <= k_max]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.array(list(pool.map(along_axis, ys)))
    else:
        values = np.array([along_axis(y) for y in ys])

    bracketed: list[float] = []
    for i in range(len(ys) - 1):
        a, b = values[i], values[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            bracketed.append(float(ys[i]))
        elif a * b < 0:
            try:
                bracketed.append(float(brentq(along_axis, ys[i], ys[i + 1], xtol=1e-12)))
            except (ValueError, RuntimeError) as e:
                logger.debug(f"Bracket [{ys[i]:.4f}, {ys[i + 1]:.4f}] rejected: {e}")

    touching: list[float] = []
    magnitudes = np.abs(values)
    for i in range(1, len(ys) - 1):
        window = magnitudes[i - 1 : i + 2]
        if not (np.all(np.isfinite(window)) and window[1] < window[0] and window[1] < window[2]):
            continue
        if values[i - 1] * values[i] > 0 and values[i] * values[i + 1] > 0:
            found = minimize_scalar(
                lambda y: abs(along_axis(y)),
                bounds=(float(ys[i - 1]), float(ys[i + 1])),
                method="bounded",
                options={"xatol": 1e-10},
            )
            touching.append(float(found.x))

    candidates: list[RootResult] = []
    for y in bracketed:
        root = _polish(model, lam, y, grid, tol, max_iter)
        candidates.append(root if root is not None else _bracketed(model, lam, y, grid))
    for y in touching:
        root = _polish(model, lam, y, grid, tol, max_iter)
        if root is not None:
            candidates.append(root)

    roots: list[RootResult] = []
    for root in candidates:
        if not SCAN_Y_MIN <= root.k.imag <= k_max:
            logger.debug(f"Root {root.k:.6g} outside the scanned interval")
            continue
        if any(abs(root.k - kept.k) < DEDUPE_TOL for kept in roots):
            continue
        roots.append(root)

    roots.sort(key=lambda root: root.k.imag, reverse=True)
    logger.info(f"Scan at lambda={lam} found {len(roots)} bound state(s) below {k_max}i")
    return roots
