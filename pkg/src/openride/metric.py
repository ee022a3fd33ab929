"""Metric spaces the server moves in.

Three kinds are supported: the real line, the half-line (nonnegative
reals), and finite symmetric distance matrices standing in for general
metric spaces.  Points on the line variants are floats; points of a
matrix space are integer node indices.  The origin is 0 in every kind.
"""

from __future__ import annotations

from dataclasses import dataclass

from .numeric import tolerance

LINE = "line"
HALF_LINE = "halfline"
MATRIX = "matrix"

KINDS = (LINE, HALF_LINE, MATRIX)

Point = float | int


class InvalidPointError(ValueError):
    """Point is not a member of the metric space."""


@dataclass(frozen=True)
class MetricViolation:
    """First metric axiom broken by a distance matrix."""

    reason: str  # "shape" | "diagonal" | "symmetry" | "negative" | "triangle"
    where: tuple[int, ...]
    detail: str


@dataclass(frozen=True)
class MetricSpace:
    kind: str
    matrix: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if (self.kind == MATRIX) != (self.matrix is not None):
            raise ValueError("matrix entries required exactly for matrix spaces")

    @property
    def origin(self) -> Point:
        return 0 if self.kind == MATRIX else 0.0

    @property
    def size(self) -> int | None:
        """Number of nodes for matrix spaces, None otherwise."""
        return len(self.matrix) if self.matrix is not None else None

    def is_point(self, p: Point) -> bool:
        if self.kind == MATRIX:
            return isinstance(p, int) and not isinstance(p, bool) and 0 <= p < len(self.matrix)
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            return False
        if self.kind == HALF_LINE:
            return p >= -tolerance()
        return True

    def check_point(self, p: Point) -> None:
        if not self.is_point(p):
            raise InvalidPointError(f"{p!r} is not a point of the {self.kind} space")

    def distance(self, x: Point, y: Point) -> float:
        self.check_point(x)
        self.check_point(y)
        if self.kind == MATRIX:
            return float(self.matrix[x][y])
        return abs(float(x) - float(y))

    def same_point(self, x: Point, y: Point) -> bool:
        if self.kind == MATRIX:
            return x == y
        return abs(float(x) - float(y)) <= tolerance()

    def validate(self) -> MetricViolation | None:
        """Check the metric axioms; report the first violation found.

        Line kinds are valid by construction.  For matrices the checks
        run in order: shape, zero diagonal, symmetry, nonnegativity,
        triangle inequality (all up to the global tolerance).
        """
        if self.kind != MATRIX:
            return None
        d = self.matrix
        n = len(d)
        tol = tolerance()
        for i, row in enumerate(d):
            if len(row) != n:
                return MetricViolation("shape", (i,), f"row {i} has length {len(row)}, expected {n}")
        for i in range(n):
            if abs(d[i][i]) > tol:
                return MetricViolation("diagonal", (i,), f"d[{i}][{i}] = {d[i][i]} is not 0")
        for i in range(n):
            for j in range(i + 1, n):
                if abs(d[i][j] - d[j][i]) > tol:
                    return MetricViolation(
                        "symmetry", (i, j), f"d[{i}][{j}] = {d[i][j]} but d[{j}][{i}] = {d[j][i]}"
                    )
        for i in range(n):
            for j in range(n):
                if d[i][j] < -tol:
                    return MetricViolation("negative", (i, j), f"d[{i}][{j}] = {d[i][j]} < 0")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if d[i][k] > d[i][j] + d[j][k] + tol:
                        return MetricViolation(
                            "triangle",
                            (i, j, k),
                            f"d[{i}][{k}] = {d[i][k]} > d[{i}][{j}] + d[{j}][{k}] = {d[i][j] + d[j][k]}",
                        )
        return None


def line() -> MetricSpace:
    return MetricSpace(LINE)


def half_line() -> MetricSpace:
    return MetricSpace(HALF_LINE)


def matrix_space(entries) -> MetricSpace:
    rows = tuple(tuple(float(v) for v in row) for row in entries)
    return MetricSpace(MATRIX, rows)
