"""Property suites run by ``rescont check``.

Each check returns a CheckResult instead of raising, so one failing property
never hides the others.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from rescont.config import RunConfig
from rescont.exceptions import NumericalError
from rescont.oracles import fd_bound_states, square_well_smatrix
from rescont.potentials import ChannelSet, PotentialModel
from rescont.radial_solver import RadialGrid
from rescont.rootfinding import RootResult, newton_complex
from rescont.scattering import residual, smatrix

logger = logging.getLogger(__name__)

UNITARITY_TOL = 1e-7
INVERSION_TOL = 1e-5
FREE_TOL = 1e-8
MIRROR_TOL = 1e-6
SQUARE_WELL_TOL = 1e-8
FD_TOL = 2e-3
ORDER_RATIO = 16.0
ORDER_SLACK = 0.5
SEED = 20240917

# 1 is a node of this grid on every level of the order check as well
SQUARE_WELL_GRID = RadialGrid(4.0, 4000)
SQUARE_WELL_DEPTH = 2.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


def _max_entry(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def check_unitarity(
    model: PotentialModel, grid: RadialGrid, lam: float, samples: int = 50, seed: int = SEED
) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    eye = np.eye(model.channels.n)
    for k in rng.uniform(0.1, 5.0, samples):
        s = smatrix(model, k, lam, grid).s
        worst = max(worst, _max_entry(s @ s.conj().T - eye))
    return CheckResult(
        "unitarity", worst <= UNITARITY_TOL, f"max |S S^+ - I| = {worst:.2e} on {samples} real k"
    )


def check_inversion_symmetry(
    model: PotentialModel, grid: RadialGrid, lam: float, samples: int = 20, seed: int = SEED
) -> CheckResult:
    """S(k*) = conj(S(k)⁻¹) for 0.1 <= |k| <= 3, |Im k| <= 1."""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    drawn = 0
    while drawn < samples:
        k = complex(rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 1.0))
        if not 0.1 <= abs(k) <= 3.0:
            continue
        drawn += 1
        s = smatrix(model, k, lam, grid).s
        s_conj = smatrix(model, k.conjugate(), lam, grid).s
        worst = max(worst, _max_entry(s_conj - np.linalg.inv(s).conj()))
    return CheckResult(
        "inversion_symmetry",
        worst <= INVERSION_TOL,
        f"max |S(k*) - conj(S(k)^-1)| = {worst:.2e} on {samples} complex k",
    )


def check_free_identity(
    channels: ChannelSet, grid: RadialGrid, samples: int = 10, seed: int = SEED
) -> CheckResult:
    free = PotentialModel(channels, np.zeros((channels.n, channels.n)))
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    for k in rng.uniform(0.1, 5.0, samples):
        s = smatrix(free, k, 0.0, grid).s
        worst = max(worst, _max_entry(s - np.eye(channels.n)))
    return CheckResult(
        "free_identity", worst <= FREE_TOL, f"max |S - I| = {worst:.2e} without potential"
    )


def check_mirror_symmetry(
    model: PotentialModel, grid: RadialGrid, lam: float, samples: int = 10, seed: int = SEED
) -> CheckResult:
    """det F(-k*) = (-1)^n conj(det F(k)), the source of mirrored resonance pairs."""
    rng = np.random.default_rng(seed + 3)
    sign = (-1) ** model.channels.n
    worst = 0.0
    for _ in range(samples):
        k = complex(rng.uniform(0.2, 3.0), rng.uniform(-1.0, 1.0))
        f = residual(model, k, lam, grid).det_f
        f_mirror = residual(model, -k.conjugate(), lam, grid).det_f
        worst = max(worst, abs(f_mirror - sign * f.conjugate()) / max(1.0, abs(f)))
    return CheckResult(
        "mirror_symmetry", worst <= MIRROR_TOL, f"max relative deviation {worst:.2e}"
    )


def check_square_well_oracle(
    model: PotentialModel | None = None,
    grid: RadialGrid | None = None,
    samples: int = 20,
    seed: int = SEED,
) -> CheckResult:
    """Pipeline S against the closed form for a single s-wave square well."""
    if model is None or model.family != "square_well" or model.channels.l_values != (0,):
        model = PotentialModel(
            ChannelSet((0,)), np.array([[SQUARE_WELL_DEPTH]]), family="square_well"
        )
        grid = SQUARE_WELL_GRID
    grid = grid or SQUARE_WELL_GRID
    depth = model.lambda0
    rng = np.random.default_rng(seed + 4)
    worst = 0.0
    for k in rng.uniform(0.1, 3.0, samples):
        s = smatrix(model, k, depth, grid).s[0, 0]
        exact = square_well_smatrix(0, depth, model.well_radius, model.channels.mu, k)
        worst = max(worst, abs(s - exact))
    return CheckResult(
        "square_well_oracle", worst <= SQUARE_WELL_TOL, f"max |S - S_exact| = {worst:.2e}"
    )


def check_fd_oracle(model: PotentialModel, lam: float, roots: list[RootResult]) -> CheckResult:
    spectrum = fd_bound_states(model, lam)
    if len(spectrum.bound_k) != len(roots):
        return CheckResult(
            "fd_oracle",
            False,
            f"{len(roots)} bound state(s) found, finite differences give {len(spectrum.bound_k)}",
        )
    worst = max((abs(r.k - fd) for r, fd in zip(roots, spectrum.bound_k)), default=0.0)
    return CheckResult(
        "fd_oracle", worst <= FD_TOL, f"max |k - k_fd| = {worst:.2e} over {len(roots)} state(s)"
    )


def check_numerov_order(
    model: PotentialModel, grid: RadialGrid, lam: float, root: RootResult | None
) -> CheckResult:
    """Error ratio of k (or S at k = 1 without a bound state) on N/4, N/2 and N points."""
    try:
        coarse = RadialGrid(grid.r_max, grid.n_points // 4)
        grids = [coarse, coarse.refined(2), coarse.refined(4)]
    except ValueError as e:
        return CheckResult("numerov_order", False, f"grid too coarse to refine: {e}")

    observe: Callable[[RadialGrid], complex]
    if root is not None:
        start = root.k

        def observe(g: RadialGrid) -> complex:
            return newton_complex(model, lam, start, g).k

    else:

        def observe(g: RadialGrid) -> complex:
            return complex(smatrix(model, 1.0, lam, g).s[0, 0])

    values = [observe(g) for g in grids]
    coarse, fine = abs(values[0] - values[1]), abs(values[1] - values[2])
    if fine == 0.0:
        return CheckResult("numerov_order", False, "no change between the two finest grids")
    ratio = coarse / fine
    lo, hi = ORDER_RATIO * (1 - ORDER_SLACK), ORDER_RATIO * (1 + ORDER_SLACK)
    return CheckResult(
        "numerov_order",
        lo <= ratio <= hi,
        f"error ratio {ratio:.2f} on n_points {[g.n_points for g in grids]}",
    )


def run_checks(config: RunConfig, roots: list[RootResult]) -> list[CheckResult]:
    model = config.model()
    grid = config.grid()
    lam = config.lambda0

    suites: list[tuple[str, Callable[[], CheckResult]]] = [
        ("unitarity", lambda: check_unitarity(model, grid, lam)),
        ("inversion_symmetry", lambda: check_inversion_symmetry(model, grid, lam)),
        ("free_identity", lambda: check_free_identity(model.channels, grid)),
        ("mirror_symmetry", lambda: check_mirror_symmetry(model, grid, lam)),
        ("square_well_oracle", lambda: check_square_well_oracle(model, grid)),
        ("fd_oracle", lambda: check_fd_oracle(model, lam, roots)),
        (
            "numerov_order",
            lambda: check_numerov_order(model, grid, lam, roots[0] if roots else None),
        ),
    ]
    results = []
    for name, suite in suites:
        try:
            result = suite()
        except (NumericalError, ValueError) as e:
            result = CheckResult(name, False, f"{type(e).__name__}: {e}")
        logger.info(str(result))
        results.append(result)
    return results
