import csv
import sys
from pathlib import Path
from typing import IO, Protocol, runtime_checkable

from rescont.branch import CSV_COLUMNS, Branch
from rescont.rootfinding import RootResult
from rescont.scattering import DeterminantMap

ROOT_COLUMNS = ("index", "re_k", "im_k", "residual_norm", "iterations", "classification")
MAP_COLUMNS = ("re_k", "im_k", "abs_det_s", "abs_det_f")


def format_number(value: float, digits: int = 9) -> str:
    """Scientific notation with ``digits`` significant digits, '.' as decimal point."""
    return f"{value:.{digits - 1}e}"


def format_root(k: complex) -> str:
    """7 significant digits, purely imaginary states written as e.g. 2.185562e+00i."""
    if k.real == 0.0 or abs(k.real) < 1e-6 * max(1.0, abs(k.imag)):
        return f"{k.imag:.6e}i"
    sign = "+" if k.imag >= 0 else "-"
    return f"{k.real:.6e}{sign}{abs(k.imag):.6e}i"


@runtime_checkable
class BranchExporter(Protocol):
    def export_branches(self, branches: list[Branch]) -> None: ...


@runtime_checkable
class RootExporter(Protocol):
    def export_roots(self, roots: list[RootResult]) -> None: ...


@runtime_checkable
class Exporter(BranchExporter, RootExporter, Protocol):
    pass


class CSVExporter:
    """Writes CSV to ``path``, or to standard output when no path is given."""

    def __init__(self, path: str | Path | None = None, digits: int = 9):
        self.path = Path(path) if path is not None else None
        self.digits = digits

    def _open(self) -> IO[str]:
        if self.path is None:
            return sys.stdout
        self.path.parent.mkdir(parents=True, exist_ok=True)
        return open(self.path, "w", newline="", encoding="utf-8")

    def _write(self, header: tuple[str, ...], rows: list[list[str]]) -> None:
        stream = self._open()
        try:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        finally:
            if stream is not sys.stdout:
                stream.close()

    def export_branches(self, branches: list[Branch]) -> None:
        rows = []
        for branch in branches:
            for branch_id, index, lam, re_k, im_k, norm, flag in branch.rows():
                rows.append(
                    [
                        str(branch_id),
                        str(index),
                        format_number(lam, self.digits),
                        format_number(re_k, self.digits),
                        format_number(im_k, self.digits),
                        format_number(norm, self.digits),
                        flag,
                    ]
                )
        self._write(CSV_COLUMNS, rows)

    def export_roots(self, roots: list[RootResult]) -> None:
        rows = [
            [
                str(i),
                format_number(root.k.real, self.digits),
                format_number(root.k.imag, self.digits),
                format_number(root.residual_norm, self.digits),
                str(root.iterations),
                root.classification,
            ]
            for i, root in enumerate(roots)
        ]
        self._write(ROOT_COLUMNS, rows)

    def export_map(self, values: DeterminantMap) -> None:
        rows = [[format_number(v, self.digits) for v in row] for row in values.rows()]
        self._write(MAP_COLUMNS, rows)


class ConsoleExporter:
    def export_branches(self, branches: list[Branch]) -> None:
        print(f"=== rescont: {len(branches)} branch(es) ===", file=sys.stderr)
        for branch in branches:
            lo, hi = branch.lambda_range
            parent = f" from branch {branch.parent[0]}" if branch.parent else ""
            print(
                f"  [{branch.branch_id}]{parent}: {len(branch)} points, "
                f"lambda in [{lo:.6g}, {hi:.6g}], stop: {branch.stop_reason}",
                file=sys.stderr,
            )
            for bp in branch.branch_points:
                print(
                    f"      branch point: lambda = {bp.lam:.7g}, k = {format_root(bp.k)}",
                    file=sys.stderr,
                )

    def export_roots(self, roots: list[RootResult]) -> None:
        print(f"=== rescont: {len(roots)} root(s) ===", file=sys.stderr)
        for root in roots:
            print(f"  {format_root(root.k)}  ({root.classification})", file=sys.stderr)


class NoopExporter:
    def export_branches(self, branches: list[Branch]) -> None:
        pass

    def export_roots(self, roots: list[RootResult]) -> None:
        pass


def get_exporter(
    exporter_type: str, path: str | Path | None = None, digits: int = 9
) -> Exporter:
    if exporter_type == "csv":
        return CSVExporter(path=path, digits=digits)
    elif exporter_type == "console":
        return ConsoleExporter()
    elif exporter_type == "none" or exporter_type == "noop":
        return NoopExporter()
    else:
        raise ValueError(f"Unknown exporter type: {exporter_type}")
