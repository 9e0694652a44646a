"""Pseudo-arclength continuation of G(x) = 0 for G: R³ → R².

For the scattering problem x = (Re k, Im k, λ) and G = (Re det F, Im det F),
but everything here works on any ``ResidualMap``. Simple branch points are
detected through a sign change of τ = det [J; tᵀ] between consecutive points.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import Executor
from dataclasses import dataclass, replace
from typing import Protocol

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from rescont.branch import Branch, BranchCollector, ContinuationPoint
from rescont.budget import PointBudget
from rescont.exceptions import (
    CorrectorDivergenceError,
    DivisionDegenerateError,
    NullSpaceRankError,
    NumericalError,
    PointBudgetExceededError,
    RefinementFailureError,
    StepUnderflowError,
)
from rescont.potentials import PotentialModel
from rescont.radial_solver import RadialGrid
from rescont.rootfinding import RootResult
from rescont.scattering import ScatteringResidual

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]

FD_STEP = 1e-6
ORIGIN_GUARD = 1e-9
NULL_RANK_RATIO = 1e-3
CONTRACTION = 0.5
MAX_PERTURBATIONS = 3


class ResidualMap(Protocol):
    def __call__(self, x: Vector) -> Vector: ...


@dataclass(frozen=True)
class ContinuationOptions:
    h_min: float = 1e-4
    h_max: float = 1e-2
    h_init: float = 1e-3
    tol: float = 1e-6
    max_corrector_iter: int = 8
    fast_iterations: int = 2
    fast_streak: int = 3
    max_points: int = 20000
    lambda_bounds: tuple[float, float] = (-math.inf, math.inf)
    detect_branch_points: bool = True
    refine_max_iter: int = 20
    refine_tol: float = 1e-4
    switch_branches: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.h_min <= self.h_max:
            raise ValueError("step bounds must satisfy 0 < h_min <= h_max")
        if not self.h_min <= self.h_init <= self.h_max:
            raise ValueError("h_init must lie in [h_min, h_max]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_corrector_iter < 1:
            raise ValueError("max_corrector_iter must be at least 1")
        if self.max_points < 1:
            raise ValueError("max_points must be at least 1")
        lo, hi = self.lambda_bounds
        if lo > hi:
            raise ValueError(f"lambda_bounds must be ordered, got {self.lambda_bounds}")


def jacobian(residual_map: ResidualMap, x: ArrayLike, executor: Executor | None = None) -> Vector:
    """2x3 central-difference Jacobian, step 1e-6·max(1, |x_i|) per coordinate."""
    x = np.asarray(x, dtype=np.float64)
    steps = FD_STEP * np.maximum(1.0, np.abs(x))
    stencil = []
    for i in range(3):
        offset = np.zeros(3)
        offset[i] = steps[i]
        stencil.extend([x + offset, x - offset])
    if executor is not None:
        values = list(executor.map(residual_map, stencil))
    else:
        values = [residual_map(p) for p in stencil]
    jac = np.empty((2, 3))
    for i in range(3):
        jac[:, i] = (np.asarray(values[2 * i]) - np.asarray(values[2 * i + 1])) / (2.0 * steps[i])
    return jac


def bordered(jac: Vector, tangent: Vector) -> Vector:
    return np.vstack([jac, tangent])


def bordered_determinant(jac: Vector, tangent: Vector) -> float:
    return float(np.linalg.det(bordered(jac, tangent)))


def null_vector(jac: Vector) -> Vector:
    _, _, vh = scipy.linalg.svd(jac)
    return np.asarray(vh[-1], dtype=np.float64)


def tangent_vector(jac: Vector, previous: Vector) -> Vector:
    """Unit null vector of J with positive projection on ``previous``."""
    try:
        t = scipy.linalg.solve(bordered(jac, previous), np.array([0.0, 0.0, 1.0]))
    except (np.linalg.LinAlgError, ValueError):
        t = null_vector(jac)
        if np.dot(t, previous) < 0:
            t = -t
    return np.asarray(t / np.linalg.norm(t), dtype=np.float64)


class _Stepper:
    """One residual map, its Jacobian and the corrector shared by all steps of a run."""

    def __init__(
        self,
        residual_map: ResidualMap,
        options: ContinuationOptions,
        executor: Executor | None = None,
        on_evaluation: Callable[[int], None] | None = None,
    ) -> None:
        self.residual_map = residual_map
        self.options = options
        self.executor = executor
        self.on_evaluation = on_evaluation

    def evaluate(self, x: Vector, direction: Vector) -> tuple[Vector, Vector]:
        if math.hypot(x[0], x[1]) < ORIGIN_GUARD:
            x = x + ORIGIN_GUARD * direction
        for attempt in range(MAX_PERTURBATIONS):
            if self.on_evaluation:
                self.on_evaluation(1)
            try:
                return x, np.asarray(self.residual_map(x), dtype=np.float64)
            except DivisionDegenerateError:
                x = x + ORIGIN_GUARD * 10**attempt * direction
        raise CorrectorDivergenceError(
            "Residual stays at a pole of det F after perturbation", 0.0, math.inf
        )

    def jacobian(self, x: Vector) -> Vector:
        if self.on_evaluation:
            self.on_evaluation(6)
        return jacobian(self.residual_map, x, self.executor)

    def correct(
        self, x_pred: Vector, border: Vector, jac: Vector | None, step: float = 0.0
    ) -> tuple[Vector, float, int]:
        """Newton in the hyperplane through x_pred orthogonal to ``border``.

        Starts as a chord iteration on ``jac`` and refreshes the Jacobian once
        when the residual does not contract.
        """
        opts = self.options
        x, g = self.evaluate(x_pred, border)
        norm = float(np.linalg.norm(g))
        fresh = False
        iterations = 0
        while norm > opts.tol:
            if jac is None:
                jac, fresh = self.jacobian(x), True
            if iterations >= opts.max_corrector_iter:
                raise CorrectorDivergenceError(
                    f"Corrector stopped at |G| = {norm:.3e} after {iterations} iterations",
                    step,
                    norm,
                )
            iterations += 1
            try:
                delta = scipy.linalg.solve(bordered(jac, border), np.append(-g, 0.0))
            except (np.linalg.LinAlgError, ValueError) as e:
                if fresh:
                    raise CorrectorDivergenceError(
                        f"Bordered system is singular: {e}", step, norm
                    ) from e
                jac, fresh = self.jacobian(x), True
                continue

            x_new, g_new = self.evaluate(x + delta, border)
            norm_new = float(np.linalg.norm(g_new))
            if norm_new > CONTRACTION * norm and not fresh:
                jac, fresh = self.jacobian(x), True
                continue
            if norm_new >= norm:
                raise CorrectorDivergenceError(
                    f"Corrector diverging: |G| {norm:.3e} -> {norm_new:.3e}", step, norm_new
                )
            x, g, norm = x_new, g_new, norm_new

        return x, norm, iterations

    def finish(
        self, x: Vector, previous_tangent: Vector, norm: float, iterations: int
    ) -> ContinuationPoint:
        jac = self.jacobian(x)
        t = tangent_vector(jac, previous_tangent)
        return ContinuationPoint(
            x=x,
            tangent=t,
            residual_norm=norm,
            flag="regular",
            test_value=bordered_determinant(jac, t),
            corrector_iterations=iterations,
            jacobian=jac,
        )

    def step(self, current: ContinuationPoint, h: float) -> ContinuationPoint:
        t = current.tangent
        x, norm, iterations = self.correct(current.x + h * t, t, current.jacobian, h)
        distance = float(np.linalg.norm(x - current.x))
        if not 0.5 * h <= distance <= 1.5 * h:
            raise CorrectorDivergenceError(
                f"Corrected point lies {distance:.3e} away for step {h:.3e}", h, norm
            )
        return self.finish(x, t, norm, iterations)


def start_point(
    residual_map: ResidualMap,
    x0: ArrayLike,
    direction: int,
    options: ContinuationOptions | None = None,
    executor: Executor | None = None,
) -> ContinuationPoint:
    """Converged start with its tangent oriented so that λ moves along ``direction``."""
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    stepper = _Stepper(residual_map, options or ContinuationOptions(), executor)
    fixed_lambda = np.array([0.0, 0.0, 1.0])
    x, norm, _ = stepper.correct(np.asarray(x0, dtype=np.float64), fixed_lambda, None)
    jac = stepper.jacobian(x)
    t = null_vector(jac)
    if t[2] * direction < 0:
        t = -t
    return ContinuationPoint(
        x=x,
        tangent=t,
        residual_norm=norm,
        flag="start",
        test_value=bordered_determinant(jac, t),
        jacobian=jac,
    )


def predict_correct(
    residual_map: ResidualMap,
    current: ContinuationPoint,
    h: float,
    options: ContinuationOptions | None = None,
    executor: Executor | None = None,
) -> ContinuationPoint:
    opts = options or ContinuationOptions()
    if h < opts.h_min:
        raise StepUnderflowError("Step below h_min", h, opts.h_min)
    if h > opts.h_max:
        raise ValueError(f"h = {h} exceeds h_max = {opts.h_max}")
    return _Stepper(residual_map, opts, executor).step(current, h)


def _refine(
    stepper: _Stepper, prev: ContinuationPoint, nxt: ContinuationPoint
) -> ContinuationPoint:
    opts = stepper.options
    x1, t1, tau1 = prev.x, prev.tangent, float(prev.test_value or 0.0)
    x2, t2, tau2 = nxt.x, nxt.tangent, float(nxt.test_value or 0.0)
    best: ContinuationPoint | None = None
    retained = 0

    for _ in range(opts.refine_max_iter):
        r = tau1 / (tau1 - tau2) if tau1 != tau2 else 0.5
        if not 0.0 < r < 1.0:
            r = 0.5
        x_guess = x1 + r * (x2 - x1)
        border = t1 + r * (t2 - t1)
        border /= np.linalg.norm(border)

        x, norm, iterations = stepper.correct(x_guess, border, None)
        point = stepper.finish(x, border, norm, iterations)
        point.flag = "branch_point"
        tau = float(point.test_value or 0.0)
        if best is None or abs(tau) < abs(best.test_value or 0.0):
            best = point

        near_end = min(np.linalg.norm(x - x1), np.linalg.norm(x - x2)) < opts.refine_tol
        if tau == 0.0 or near_end:
            return best

        # Illinois: halve the value kept at an endpoint that survives twice.
        if math.copysign(1.0, tau) == math.copysign(1.0, tau2):
            x2, t2, tau2 = x, point.tangent, tau
            retained = retained + 1 if retained > 0 else 1
            if retained > 1:
                tau1 /= 2.0
        else:
            x1, t1, tau1 = x, point.tangent, tau
            retained = retained - 1 if retained < 0 else -1
            if retained < -1:
                tau2 /= 2.0

        if np.linalg.norm(x2 - x1) < opts.refine_tol:
            return best

    raise RefinementFailureError(
        f"Branch point not bracketed to {opts.refine_tol} in {opts.refine_max_iter} steps",
        (float(x1[2]), float(x2[2])),
    )


def detect_branch_point(
    residual_map: ResidualMap,
    prev: ContinuationPoint,
    nxt: ContinuationPoint,
    options: ContinuationOptions | None = None,
    executor: Executor | None = None,
) -> ContinuationPoint | None:
    """Locate a simple branch point between two converged points, if τ changes sign."""
    if prev.test_value is None or nxt.test_value is None:
        return None
    if prev.test_value * nxt.test_value > 0:
        return None
    stepper = _Stepper(residual_map, options or ContinuationOptions(), executor)
    return _refine(stepper, prev, nxt)


def switch_branch(
    residual_map: ResidualMap,
    bp: ContinuationPoint,
    executor: Executor | None = None,
) -> list[Vector]:
    """Tangents of the crossing branch at a simple branch point, both orientations.

    The orientation with non-negative Re k component comes first.
    """
    jac = bp.jacobian if bp.jacobian is not None else jacobian(residual_map, bp.x, executor)
    _, s, vh = scipy.linalg.svd(jac)
    if s[1] >= NULL_RANK_RATIO * s[0]:
        raise NullSpaceRankError(
            f"Null space is one-dimensional (singular values {s[0]:.3e}, {s[1]:.3e})",
            tuple(float(v) for v in s),
        )
    basis = vh[1:]
    incoming = basis @ bp.tangent
    crossing = basis.T @ np.array([-incoming[1], incoming[0]])
    crossing /= np.linalg.norm(crossing)
    if crossing[0] < 0 or (crossing[0] == 0 and crossing[1] < 0):
        crossing = -crossing
    return [crossing, -crossing]


def trace(
    residual_map: ResidualMap,
    start: ContinuationPoint,
    options: ContinuationOptions,
    branch: Branch | None = None,
    budget: PointBudget | None = None,
    executor: Executor | None = None,
) -> Branch:
    """Follow the curve from ``start`` along its tangent until a stop condition."""
    branch = branch if branch is not None else Branch(branch_id=0)
    counter = budget if budget is not None else PointBudget(options.max_points)
    branch_id = branch.branch_id
    stepper = _Stepper(
        residual_map,
        options,
        executor,
        on_evaluation=lambda n: counter.record_evaluations(branch_id, n),
    )
    lo, hi = options.lambda_bounds

    counter.record_point(branch_id)
    branch.add_point(start)
    current = start
    h = options.h_init
    streak = 0
    reason: str | None = None

    while reason is None:
        try:
            point = stepper.step(current, h)
        except NumericalError as e:
            h /= 2.0
            streak = 0
            logger.debug(f"Branch {branch_id}: step rejected ({e}); h -> {h:.3e}")
            if h < options.h_min:
                reason = "step_underflow"
            continue

        if not lo <= point.lam <= hi:
            if h > options.h_min:
                h = max(options.h_min, h / 2.0)
                streak = 0
                continue
            reason = "lambda_bound"
            break

        try:
            counter.record_point(branch_id)
        except PointBudgetExceededError as e:
            logger.info(str(e))
            reason = "point_budget"
            break

        if options.detect_branch_points:
            located = _locate_between(stepper, current, point)
            if located is not None:
                branch.add_point(located)
                logger.info(
                    f"Branch {branch_id}: branch point at lambda={located.lam:.7g}, "
                    f"k={located.k:.7g}"
                )

        branch.add_point(point)
        current = point
        if point.corrector_iterations <= options.fast_iterations:
            streak += 1
            if streak >= options.fast_streak and h < options.h_max:
                h = min(2.0 * h, options.h_max)
                streak = 0
                logger.debug(f"Branch {branch_id}: h -> {h:.3e}")
        else:
            streak = 0

    branch.stop_reason = reason
    if branch.last.flag == "regular":
        branch.last.flag = "boundary"
    logger.info(
        f"Branch {branch_id} stopped ({reason}) after {len(branch)} points, "
        f"lambda in [{branch.lambda_range[0]:.6g}, {branch.lambda_range[1]:.6g}], "
        f"{counter.remaining(branch_id)} point(s) of budget left"
    )
    return branch


def _locate_between(
    stepper: _Stepper, prev: ContinuationPoint, nxt: ContinuationPoint
) -> ContinuationPoint | None:
    if prev.test_value is None or nxt.test_value is None:
        return None
    if prev.test_value * nxt.test_value > 0:
        return None
    try:
        return _refine(stepper, prev, nxt)
    except NumericalError as e:
        closer = prev if abs(prev.test_value) < abs(nxt.test_value) else nxt
        logger.warning(f"Branch point refinement failed ({e}); flagging endpoint")
        if closer.flag == "regular":
            closer.flag = "branch_point"
        return None


def continue_curve(
    residual_map: ResidualMap,
    x0: ArrayLike,
    direction: int,
    options: ContinuationOptions,
    collector: BranchCollector | None = None,
    executor: Executor | None = None,
) -> BranchCollector:
    """Trace from x0 and, if requested, both orientations of every crossing branch."""
    collector = collector if collector is not None else BranchCollector()
    budget = PointBudget(options.max_points)
    start = start_point(residual_map, x0, direction, options, executor)
    main = trace(residual_map, start, options, collector.new_branch(), budget, executor)

    child_options = replace(options, switch_branches=False)
    for index, bp in enumerate(main.points):
        if not options.switch_branches or bp.flag != "branch_point":
            continue
        try:
            tangents = switch_branch(residual_map, bp, executor)
        except NullSpaceRankError as e:
            logger.warning(f"Branch switching at lambda={bp.lam:.7g} skipped: {e}")
            continue
        for tangent in tangents:
            child = collector.new_branch(parent=(main.branch_id, index))
            seed = ContinuationPoint(
                x=bp.x.copy(),
                tangent=tangent,
                residual_norm=bp.residual_norm,
                flag="branch_point",
            )
            trace(residual_map, seed, child_options, child, budget, executor)
    logger.debug(f"Point budget: {budget.get_summary()}")
    return collector


def trace_branch(
    model: PotentialModel,
    start: RootResult,
    lambda0: float,
    direction: int,
    lambda_bounds: Sequence[float],
    grid: RadialGrid,
    options: ContinuationOptions | None = None,
    collector: BranchCollector | None = None,
    executor: Executor | None = None,
) -> Branch:
    """Continue a converged root of det F in λ; switched branches land in ``collector``."""
    lo, hi = float(lambda_bounds[0]), float(lambda_bounds[1])
    if not lo <= lambda0 <= hi:
        raise ValueError(f"lambda0 = {lambda0} outside bounds [{lo}, {hi}]")
    opts = replace(options or ContinuationOptions(), lambda_bounds=(lo, hi))
    collector = collector if collector is not None else BranchCollector()
    first = len(collector.branches)
    residual_map = ScatteringResidual(model, grid)
    continue_curve(
        residual_map, [start.k.real, start.k.imag, lambda0], direction, opts, collector, executor
    )
    return collector.branches[first]
