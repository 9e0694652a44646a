import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, cast

import numpy as np
from numpy.typing import NDArray

from rescont.continuation import ContinuationOptions
from rescont.exceptions import ConfigError
from rescont.potentials import FAMILIES, ChannelSet, PotentialFamily, PotentialModel
from rescont.potentials import effective_range as potential_range
from rescont.radial_solver import MIN_N_POINTS, RadialGrid, covers
from rescont.special_functions import EXP_LIMIT

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

OutputFormat = Literal["csv", "console", "none"]

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
OUTPUT_FORMATS = ("csv", "console", "none")


@dataclass(frozen=True)
class SolverConfig:
    log_level: str = "WARNING"
    workers: int = 1
    range_tol: float = 1e-7
    csv_digits: int = 9
    output_format: OutputFormat = "csv"

    def __post_init__(self) -> None:
        if self.log_level.upper() not in LOG_LEVELS:
            raise ValueError(f"Invalid log_level: {self.log_level}. Must be one of {LOG_LEVELS}")

        if self.workers < 1:
            raise ValueError("workers must be at least 1")

        if not self.range_tol > 0:
            raise ValueError("range_tol must be positive")

        if not 1 <= self.csv_digits <= 17:
            raise ValueError("csv_digits must be between 1 and 17")

        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(
                f"Invalid output_format: {self.output_format}. Must be one of {OUTPUT_FORMATS}"
            )

    @classmethod
    def from_env(cls) -> "SolverConfig":
        return cls(
            log_level=os.getenv("RESCONT_LOG_LEVEL", "WARNING"),
            workers=int(os.getenv("RESCONT_WORKERS", "1")),
            range_tol=float(os.getenv("RESCONT_RANGE_TOL", "1e-7")),
            csv_digits=int(os.getenv("RESCONT_CSV_DIGITS", "9")),
            output_format=cast(
                OutputFormat, os.getenv("RESCONT_OUTPUT_FORMAT", "csv") or "csv"
            ),
        )


def load_solver_config(**kwargs: Any) -> SolverConfig:
    env_config = SolverConfig.from_env()

    config_dict = {}
    for field_name in SolverConfig.__dataclass_fields__:
        if field_name in kwargs:
            config_dict[field_name] = kwargs[field_name]
        else:
            config_dict[field_name] = getattr(env_config, field_name)

    return SolverConfig(**config_dict)


ALLOWED_KEYS: dict[str, tuple[str, ...]] = {
    "channels": ("l", "mu"),
    "potential": ("family", "strengths", "continuation_index", "well_radius"),
    "grid": ("r_max", "n_points"),
    "newton": ("tol", "max_iter"),
    "continuation": (
        "h_min",
        "h_max",
        "h_init",
        "lambda_min",
        "lambda_max",
        "max_points",
        "directions",
        "switch_branches",
    ),
    "scan": ("k_max",),
    "map": ("re_min", "re_max", "im_min", "im_max", "n_re", "n_im"),
    "starts": ("k",),
}


@dataclass(frozen=True, eq=False)
class RunConfig:
    """One experiment. ``continuation_index`` is 0-based here, 1-based in files."""

    l_values: tuple[int, ...]
    strengths: tuple[tuple[float, ...], ...]
    mu: float = 1.0
    family: PotentialFamily = "gaussian"
    continuation_index: tuple[int, int] = (0, 0)
    well_radius: float = 1.0
    r_max: float = 4.6
    n_points: int = 4096
    newton_tol: float = 1e-6
    newton_max_iter: int = 50
    h_min: float = 1e-4
    h_max: float = 1e-2
    h_init: float = 1e-3
    lambda_min: float | None = None
    lambda_max: float | None = None
    max_points: int = 20000
    directions: tuple[int, ...] = (-1, 1)
    switch_branches: bool = False
    k_max: float = 5.0
    starts: tuple[complex, ...] | None = None
    map_re: tuple[float, float] = (-2.0, 2.0)
    map_im: tuple[float, float] = (-1.0, 4.0)
    map_n_re: int = 41
    map_n_im: int = 51

    def model(self) -> PotentialModel:
        return PotentialModel(
            channels=ChannelSet(self.l_values, self.mu),
            strengths=np.array(self.strengths, dtype=np.float64),
            family=self.family,
            continuation_index=self.continuation_index,
            well_radius=self.well_radius,
        )

    def grid(self) -> RadialGrid:
        return RadialGrid(self.r_max, self.n_points)

    @property
    def lambda0(self) -> float:
        i, j = self.continuation_index
        return float(self.strengths[i][j])

    @property
    def lambda_bounds(self) -> tuple[float, float]:
        lo = self.lambda_min if self.lambda_min is not None else self.lambda0
        hi = self.lambda_max if self.lambda_max is not None else self.lambda0
        return (lo, hi)

    def map_axes(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Re k and Im k sample points of the determinant map, endpoints included."""
        return (
            np.linspace(self.map_re[0], self.map_re[1], self.map_n_re),
            np.linspace(self.map_im[0], self.map_im[1], self.map_n_im),
        )

    def continuation_options(self) -> ContinuationOptions:
        return ContinuationOptions(
            h_min=self.h_min,
            h_max=self.h_max,
            h_init=self.h_init,
            tol=self.newton_tol,
            max_points=self.max_points,
            lambda_bounds=self.lambda_bounds,
            switch_branches=self.switch_branches,
        )

    def validate(self, range_tol: float = 1e-7) -> None:
        """Check every model and solver precondition, naming the offending key."""
        try:
            ChannelSet(self.l_values, self.mu)
        except ValueError as e:
            field = "channels.mu" if str(e).startswith("mu") else "channels.l"
            raise ConfigError(str(e), field) from e
        try:
            model = self.model()
        except ValueError as e:
            raise ConfigError(str(e), "potential") from e

        if not self.r_max > 0:
            raise ConfigError("must be positive", "grid.r_max")
        if self.n_points < MIN_N_POINTS:
            raise ConfigError(f"must be at least {MIN_N_POINTS}", "grid.n_points")
        if not self.newton_tol > 0:
            raise ConfigError("must be positive", "newton.tol")
        if self.newton_max_iter < 1:
            raise ConfigError("must be at least 1", "newton.max_iter")
        if not self.k_max > 0:
            raise ConfigError("must be positive", "scan.k_max")
        if self.k_max * self.r_max >= EXP_LIMIT:
            raise ConfigError(
                f"k_max * r_max = {self.k_max * self.r_max:.1f} overflows e^(|Im k| r)",
                "scan.k_max",
            )
        if any(d not in (1, -1) for d in self.directions) or not self.directions:
            raise ConfigError("must be a non-empty list of +1/-1", "continuation.directions")

        lo, hi = self.lambda_bounds
        if not lo <= self.lambda0 <= hi:
            raise ConfigError(
                f"[{lo}, {hi}] does not contain the start strength {self.lambda0}",
                "continuation.lambda_min",
            )
        try:
            self.continuation_options()
        except ValueError as e:
            raise ConfigError(str(e), "continuation") from e

        grid = self.grid()
        for lam in (lo, hi, self.lambda0):
            if not covers(model, grid, lam, range_tol):
                reach = potential_range(model, range_tol, lam)
                raise ConfigError(
                    f"{self.r_max} is inside the potential range {reach:.4f} at lambda={lam}",
                    "grid.r_max",
                )

        for axis, (low, high), n in (
            ("re", self.map_re, self.map_n_re),
            ("im", self.map_im, self.map_n_im),
        ):
            if not low < high:
                raise ConfigError(f"must be below map.{axis}_max", f"map.{axis}_min")
            if n < 2:
                raise ConfigError("must be at least 2", f"map.n_{axis}")
        if max(abs(v) for v in self.map_im) * self.r_max >= EXP_LIMIT:
            raise ConfigError("Im k range overflows e^(|Im k| r)", "map.im_max")

        if self.starts is not None:
            for k in self.starts:
                if k == 0:
                    raise ConfigError("start wavenumbers must be non-zero", "starts.k")
                if abs(k.imag) * self.r_max >= EXP_LIMIT:
                    raise ConfigError(f"start {k} overflows e^(|Im k| r)", "starts.k")


def _require(table: dict[str, Any], key: str, section: str) -> Any:
    if key not in table:
        raise ConfigError("is required", f"{section}.{key}")
    return table[key]


def _number(value: Any, field: str, kind: type = float) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field)
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"expected an integer, got {value!r}", field)
        return int(value)
    if not math.isfinite(float(value)):
        raise ConfigError("must be finite", field)
    return float(value)


def _parse_starts(value: Any) -> tuple[complex, ...] | None:
    if value == "scan":
        return None
    if not isinstance(value, list):
        raise ConfigError('expected "scan" or a list of [re, im] pairs', "starts.k")
    starts = []
    for item in value:
        if not (isinstance(item, list) and len(item) == 2):
            raise ConfigError(f"expected a [re, im] pair, got {item!r}", "starts.k")
        starts.append(complex(_number(item[0], "starts.k"), _number(item[1], "starts.k")))
    return tuple(starts)


def parse_run_config(data: dict[str, Any]) -> RunConfig:
    for section, table in data.items():
        if section not in ALLOWED_KEYS:
            raise ConfigError("unknown section", section)
        if not isinstance(table, dict):
            raise ConfigError("expected a table of dotted keys", section)
        for key in table:
            if key not in ALLOWED_KEYS[section]:
                raise ConfigError("unknown key", f"{section}.{key}")

    channels = data.get("channels", {})
    potential = data.get("potential", {})
    grid = data.get("grid", {})
    newton = data.get("newton", {})
    cont = data.get("continuation", {})
    scan = data.get("scan", {})
    starts = data.get("starts", {})
    sampling = data.get("map", {})

    l_values = _require(channels, "l", "channels")
    if not isinstance(l_values, list) or not l_values:
        raise ConfigError("expected a non-empty list of angular momenta", "channels.l")
    strengths = _require(potential, "strengths", "potential")
    if not isinstance(strengths, list) or not all(isinstance(row, list) for row in strengths):
        raise ConfigError("expected a nested list (matrix)", "potential.strengths")

    family = potential.get("family", "gaussian")
    if family not in FAMILIES:
        raise ConfigError(f"must be one of {FAMILIES}", "potential.family")

    index = potential.get("continuation_index", [1, 1])
    if not (isinstance(index, list) and len(index) == 2):
        raise ConfigError(
            "expected a pair of 1-based channel labels", "potential.continuation_index"
        )
    i, j = (_number(v, "potential.continuation_index", int) for v in index)
    if i < 1 or j < 1:
        raise ConfigError("channel labels start at 1", "potential.continuation_index")

    def optional(table: dict[str, Any], key: str, field: str) -> float | None:
        return _number(table[key], field) if key in table else None

    switch_branches = cont.get("switch_branches", False)
    if not isinstance(switch_branches, bool):
        raise ConfigError(
            f"expected true or false, got {switch_branches!r}", "continuation.switch_branches"
        )

    directions = cont.get("directions", [-1, 1])
    if not isinstance(directions, list):
        raise ConfigError("expected a list of +1/-1", "continuation.directions")

    return RunConfig(
        l_values=tuple(_number(l, "channels.l", int) for l in l_values),
        mu=_number(channels.get("mu", 1.0), "channels.mu"),
        family=cast(PotentialFamily, family),
        strengths=tuple(
            tuple(_number(v, "potential.strengths") for v in row) for row in strengths
        ),
        continuation_index=(i - 1, j - 1),
        well_radius=_number(potential.get("well_radius", 1.0), "potential.well_radius"),
        r_max=_number(grid.get("r_max", 4.6), "grid.r_max"),
        n_points=_number(grid.get("n_points", 4096), "grid.n_points", int),
        newton_tol=_number(newton.get("tol", 1e-6), "newton.tol"),
        newton_max_iter=_number(newton.get("max_iter", 50), "newton.max_iter", int),
        h_min=_number(cont.get("h_min", 1e-4), "continuation.h_min"),
        h_max=_number(cont.get("h_max", 1e-2), "continuation.h_max"),
        h_init=_number(cont.get("h_init", 1e-3), "continuation.h_init"),
        lambda_min=optional(cont, "lambda_min", "continuation.lambda_min"),
        lambda_max=optional(cont, "lambda_max", "continuation.lambda_max"),
        max_points=_number(cont.get("max_points", 20000), "continuation.max_points", int),
        directions=tuple(_number(d, "continuation.directions", int) for d in directions),
        switch_branches=switch_branches,
        k_max=_number(scan.get("k_max", 5.0), "scan.k_max"),
        starts=_parse_starts(starts.get("k", "scan")),
        map_re=(
            _number(sampling.get("re_min", -2.0), "map.re_min"),
            _number(sampling.get("re_max", 2.0), "map.re_max"),
        ),
        map_im=(
            _number(sampling.get("im_min", -1.0), "map.im_min"),
            _number(sampling.get("im_max", 4.0), "map.im_max"),
        ),
        map_n_re=_number(sampling.get("n_re", 41), "map.n_re", int),
        map_n_im=_number(sampling.get("n_im", 51), "map.n_im", int),
    )


def load_run_config(path: str | Path, range_tol: float = 1e-7) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}", "config") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}", "config") from e

    config = parse_run_config(data)
    config.validate(range_tol)
    return config
