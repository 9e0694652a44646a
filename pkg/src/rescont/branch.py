from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray

PointFlag = Literal["regular", "start", "branch_point", "boundary"]

CSV_COLUMNS = ("branch_id", "point_index", "lambda", "re_k", "im_k", "residual_norm", "flag")


@dataclass
class ContinuationPoint:
    x: NDArray[np.float64]
    tangent: NDArray[np.float64]
    residual_norm: float
    flag: PointFlag = "regular"
    test_value: float | None = None
    corrector_iterations: int = 0
    jacobian: NDArray[np.float64] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=np.float64).reshape(3)
        tangent = np.asarray(self.tangent, dtype=np.float64).reshape(3)
        norm = float(np.linalg.norm(tangent))
        if norm == 0.0:
            raise ValueError("tangent must be non-zero")
        self.tangent = tangent / norm

    @property
    def k(self) -> complex:
        return complex(self.x[0], self.x[1])

    @property
    def lam(self) -> float:
        return float(self.x[2])

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "re_k": float(self.x[0]),
            "im_k": float(self.x[1]),
            "residual_norm": self.residual_norm,
            "flag": self.flag,
            "tangent": self.tangent.tolist(),
            "test_value": self.test_value,
        }


@dataclass
class Branch:
    branch_id: int
    points: list[ContinuationPoint] = field(default_factory=list)
    parent: tuple[int, int] | None = None
    stop_reason: str | None = None

    def add_point(self, point: ContinuationPoint) -> None:
        self.points.append(point)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def last(self) -> ContinuationPoint:
        return self.points[-1]

    @property
    def branch_points(self) -> list[ContinuationPoint]:
        return [p for p in self.points if p.flag == "branch_point"]

    @property
    def lambda_range(self) -> tuple[float, float]:
        lams = [p.lam for p in self.points]
        return (min(lams), max(lams)) if lams else (float("nan"), float("nan"))

    def rows(self) -> list[tuple[int, int, float, float, float, float, str]]:
        """One CSV row per point, columns as in CSV_COLUMNS."""
        return [
            (
                self.branch_id,
                i,
                p.lam,
                float(p.x[0]),
                float(p.x[1]),
                p.residual_norm,
                p.flag,
            )
            for i, p in enumerate(self.points)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "branch_id": self.branch_id,
            "parent": list(self.parent) if self.parent else None,
            "stop_reason": self.stop_reason,
            "points": [p.to_dict() for p in self.points],
        }


class BranchCollector:
    """Hands out branch ids for one run and keeps the branches in creation order."""

    def __init__(self) -> None:
        self._branches: list[Branch] = []

    def new_branch(self, parent: tuple[int, int] | None = None) -> Branch:
        branch = Branch(branch_id=len(self._branches), parent=parent)
        self._branches.append(branch)
        return branch

    def absorb(self, other: "BranchCollector") -> None:
        """Append another run's branches, renumbering ids and parent links."""
        offset = len(self._branches)
        for branch in other.branches:
            branch.branch_id += offset
            if branch.parent is not None:
                branch.parent = (branch.parent[0] + offset, branch.parent[1])
            self._branches.append(branch)

    def children(self, branch_id: int) -> list[Branch]:
        return [b for b in self._branches if b.parent and b.parent[0] == branch_id]

    @property
    def branches(self) -> list[Branch]:
        return list(self._branches)

    @property
    def total_points(self) -> int:
        return sum(len(b) for b in self._branches)

    def rows(self) -> list[tuple[int, int, float, float, float, float, str]]:
        return [row for b in self._branches for row in b.rows()]
