import threading
from typing import Any

from rescont.exceptions import PointBudgetExceededError


class PointBudget:
    """Counts accepted points and residual evaluations of the branches in one run."""

    def __init__(self, max_points: int):
        if max_points < 1:
            raise ValueError("max_points must be at least 1")
        self.max_points = max_points
        self._points: dict[int, int] = {}
        self._evaluations: dict[int, int] = {}
        self._lock = threading.Lock()

    def points(self, branch_id: int) -> int:
        with self._lock:
            return self._points.get(branch_id, 0)

    def evaluations(self, branch_id: int) -> int:
        with self._lock:
            return self._evaluations.get(branch_id, 0)

    def remaining(self, branch_id: int) -> int:
        with self._lock:
            return max(0, self.max_points - self._points.get(branch_id, 0))

    def record_point(self, branch_id: int) -> None:
        with self._lock:
            current = self._points.get(branch_id, 0)
            if current >= self.max_points:
                raise PointBudgetExceededError(
                    message=f"Point budget exceeded: {current + 1} > {self.max_points}",
                    branch_id=branch_id,
                    max_points=self.max_points,
                    current_point=current + 1,
                )
            self._points[branch_id] = current + 1

    def record_evaluations(self, branch_id: int, count: int = 1) -> None:
        if count < 0:
            raise ValueError("count must be non-negative")
        with self._lock:
            self._evaluations[branch_id] = self._evaluations.get(branch_id, 0) + count

    def get_summary(self) -> dict[str, Any]:
        with self._lock:
            return {
                "max_points": self.max_points,
                "branches": {
                    branch_id: {
                        "points": count,
                        "evaluations": self._evaluations.get(branch_id, 0),
                    }
                    for branch_id, count in sorted(self._points.items())
                },
            }
