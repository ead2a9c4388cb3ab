"""Symmetric TSP instances: explicit cost matrices, random points and TSPLIB files.

Nodes are labelled ``0 .. n-1``.  Random generators draw from numpy's PCG64
``Generator`` (``numpy.random.default_rng``) seeded with an integer or a
sequence of integers, so every instance is a pure function of ``(n, seed)``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from . import _kernels

MIN_NODES = 4

#: Point instances with more nodes than this compute costs on the fly.
MATERIALIZE_MAX_NODES = 3000

SeedLike = int | Sequence[int] | np.random.SeedSequence


class InstanceKind(str, enum.Enum):
    EXPLICIT_MATRIX = "explicit"
    EUCLIDEAN = "euclidean"
    TSPLIB_EUC_2D = "euc2d"
    TSPLIB_CEIL_2D = "ceil2d"


_MODES = {
    InstanceKind.EUCLIDEAN: _kernels.MODE_EUCLIDEAN,
    InstanceKind.TSPLIB_EUC_2D: _kernels.MODE_EUC_2D,
    InstanceKind.TSPLIB_CEIL_2D: _kernels.MODE_CEIL_2D,
}

_NO_MATRIX = np.zeros((1, 1))
_NO_POINTS = np.zeros((1, 2))


class InvalidInstanceError(ValueError):
    pass


class TsplibParseError(ValueError):
    def __init__(self, message: str, line_no: int | None = None, line: str | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}: {line!r}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable symmetric cost oracle over ``n`` nodes.

    ``matrix`` is always present for explicit instances and, for point
    instances, only when they were materialized.  Costs from the matrix and
    from the points are produced by the same arithmetic, so both paths agree
    exactly.
    """

    n: int
    kind: InstanceKind
    matrix: np.ndarray | None = None
    points: np.ndarray | None = None
    name: str = ""

    def cost(self, u: int, v: int) -> float:
        return cost(self, u, v)

    @property
    def is_geometric(self) -> bool:
        return self.kind is not InstanceKind.EXPLICIT_MATRIX

    def kernel_args(self) -> tuple[int, np.ndarray, np.ndarray]:
        """``(mode, matrix, points)`` triple consumed by the compiled kernels."""
        if self.matrix is not None:
            pts = self.points if self.points is not None else _NO_POINTS
            return _kernels.MODE_MATRIX, self.matrix, pts
        return _MODES[self.kind], _NO_MATRIX, self.points

    def materialized(self) -> Instance:
        """Copy of a point instance with its full cost matrix precomputed."""
        if self.matrix is not None:
            return self
        mat = _kernels.materialize(_MODES[self.kind], self.points)
        mat.setflags(write=False)
        return Instance(self.n, self.kind, mat, self.points, self.name)


def _check_size(n: int) -> None:
    if n < MIN_NODES:
        raise InvalidInstanceError(f"instance needs at least {MIN_NODES} nodes, got {n}")


def cost(inst: Instance, u: int, v: int) -> float:
    if not (0 <= u < inst.n and 0 <= v < inst.n):
        raise IndexError(f"node out of range for n={inst.n}: ({u}, {v})")
    if inst.matrix is not None:
        return float(inst.matrix[u, v])
    p, q = inst.points[u], inst.points[v]
    dx = float(p[0] - q[0])
    dy = float(p[1] - q[1])
    d = math.sqrt(dx * dx + dy * dy)
    if inst.kind is InstanceKind.TSPLIB_EUC_2D:
        return float(math.floor(d + 0.5))
    if inst.kind is InstanceKind.TSPLIB_CEIL_2D:
        return float(math.ceil(d))
    return d


def costs_between(inst: Instance, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Vectorized ``cost`` over paired node arrays."""
    if inst.matrix is not None:
        return inst.matrix[us, vs]
    delta = inst.points[us] - inst.points[vs]
    d = np.sqrt(delta[:, 0] * delta[:, 0] + delta[:, 1] * delta[:, 1])
    if inst.kind is InstanceKind.TSPLIB_EUC_2D:
        return np.floor(d + 0.5)
    if inst.kind is InstanceKind.TSPLIB_CEIL_2D:
        return np.ceil(d)
    return d


def from_matrix(costs, name: str = "") -> Instance:
    mat = np.array(costs, dtype=np.float64, order="C")
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidInstanceError(f"cost matrix must be square, got shape {mat.shape}")
    _check_size(mat.shape[0])
    if not np.all(np.isfinite(mat)) or np.any(mat < 0):
        raise InvalidInstanceError("costs must be finite and non-negative")
    if np.any(np.diag(mat) != 0):
        raise InvalidInstanceError("diagonal must be zero")
    if not np.array_equal(mat, mat.T):
        raise InvalidInstanceError("cost matrix must be symmetric")
    mat.setflags(write=False)
    return Instance(mat.shape[0], InstanceKind.EXPLICIT_MATRIX, matrix=mat, name=name)


def from_points(points, kind: InstanceKind = InstanceKind.EUCLIDEAN, name: str = "",
                materialize: bool | None = None) -> Instance:
    """Point instance; ``materialize=None`` precomputes the matrix for small ``n``."""
    kind = InstanceKind(kind)
    if kind is InstanceKind.EXPLICIT_MATRIX:
        raise InvalidInstanceError("point instances need a geometric kind")
    pts = np.array(points, dtype=np.float64, order="C")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInstanceError(f"points must have shape (n, 2), got {pts.shape}")
    _check_size(pts.shape[0])
    if not np.all(np.isfinite(pts)):
        raise InvalidInstanceError("coordinates must be finite")
    pts.setflags(write=False)
    inst = Instance(pts.shape[0], kind, points=pts, name=name)
    if materialize is None:
        materialize = inst.n <= MATERIALIZE_MAX_NODES
    return inst.materialized() if materialize else inst


def gen_uniform(n: int, seed: SeedLike) -> Instance:
    """Explicit instance with i.i.d. U[0, 1] edge costs.

    Draws are consumed row by row over the strict upper triangle
    ``(0,1), (0,2), ..., (0,n-1), (1,2), ...`` and mirrored.
    """
    _check_size(n)
    rng = np.random.default_rng(seed)
    mat = np.zeros((n, n))
    for u in range(n - 1):
        row = rng.random(n - 1 - u)
        mat[u, u + 1:] = row
        mat[u + 1:, u] = row
    mat.setflags(write=False)
    return Instance(n, InstanceKind.EXPLICIT_MATRIX, matrix=mat, name=f"uniform-{n}")


def gen_euclidean(n: int, seed: SeedLike, materialize: bool | None = None) -> Instance:
    """``n`` points uniform in the unit square, drawn as ``rng.random((n, 2))``."""
    _check_size(n)
    rng = np.random.default_rng(seed)
    return from_points(rng.random((n, 2)), InstanceKind.EUCLIDEAN,
                       name=f"euclidean-{n}", materialize=materialize)


_TSPLIB_KINDS = {"EUC_2D": InstanceKind.TSPLIB_EUC_2D, "CEIL_2D": InstanceKind.TSPLIB_CEIL_2D}


def parse_tsplib(text: str | IO[str], materialize: bool | None = None) -> Instance:
    """Parse a TSPLIB ``.tsp`` file with EUC_2D or CEIL_2D weights.

    Coordinates are taken in the order they are listed; node ids must run
    ``1 .. DIMENSION``.
    """
    lines = text.splitlines() if isinstance(text, str) else text.read().splitlines()
    header: dict[str, str] = {}
    coords: list[tuple[float, float]] = []
    in_coords = False
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if in_coords:
            parts = line.split()
            if len(parts) != 3:
                raise TsplibParseError("malformed coordinate line", line_no, raw)
            try:
                node = int(parts[0])
                x, y = float(parts[1]), float(parts[2])
            except ValueError:
                raise TsplibParseError("malformed coordinate line", line_no, raw) from None
            if node != len(coords) + 1:
                raise TsplibParseError(f"expected node id {len(coords) + 1}", line_no, raw)
            coords.append((x, y))
            continue
        if line.startswith("NODE_COORD_SECTION"):
            if "DIMENSION" not in header:
                raise TsplibParseError("missing DIMENSION before NODE_COORD_SECTION", line_no, raw)
            wtype = header.get("EDGE_WEIGHT_TYPE")
            if wtype not in _TSPLIB_KINDS:
                raise TsplibParseError(f"unsupported EDGE_WEIGHT_TYPE {wtype!r}", line_no, raw)
            in_coords = True
            continue
        if ":" not in line:
            raise TsplibParseError("expected 'KEY : VALUE'", line_no, raw)
        key, value = (s.strip() for s in line.split(":", 1))
        key = key.upper()
        if key == "EDGE_WEIGHT_TYPE" and value not in _TSPLIB_KINDS:
            raise TsplibParseError(f"unsupported EDGE_WEIGHT_TYPE {value!r}", line_no, raw)
        if key == "DIMENSION":
            try:
                int(value)
            except ValueError:
                raise TsplibParseError("DIMENSION is not an integer", line_no, raw) from None
        header[key] = value
    if "DIMENSION" not in header:
        raise TsplibParseError("missing DIMENSION")
    if not in_coords:
        raise TsplibParseError("missing NODE_COORD_SECTION")
    dim = int(header["DIMENSION"])
    if len(coords) != dim:
        raise TsplibParseError(f"DIMENSION is {dim} but {len(coords)} coordinates were read")
    return from_points(coords, _TSPLIB_KINDS[header["EDGE_WEIGHT_TYPE"]],
                       name=header.get("NAME", ""), materialize=materialize)


def read_tsplib(path: str | Path, materialize: bool | None = None) -> Instance:
    with open(path, encoding="ascii", errors="replace") as fh:
        return parse_tsplib(fh, materialize=materialize)


@dataclass(frozen=True, eq=False)
class CminTable:
    """Per-node minimum incident cost."""

    values: np.ndarray


def cmin_table(inst: Instance) -> CminTable:
    mode, mat, pts = inst.kernel_args()
    values = _kernels.row_minima(mode, mat, pts, inst.n)
    values.setflags(write=False)
    return CminTable(values)


# -- snapshots ---------------------------------------------------------------

def write_snapshot(inst: Instance, fh: IO[str]) -> None:
    """Write every unordered pair as a ``u,v,cost`` row (``u < v``)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["u", "v", "cost"])
    for u in range(inst.n):
        for v in range(u + 1, inst.n):
            writer.writerow([u, v, repr(cost(inst, u, v))])


def read_snapshot(fh: IO[str] | Iterable[str]) -> Instance:
    reader = csv.reader(fh)
    head = next(reader, None)
    if head != ["u", "v", "cost"]:
        raise InvalidInstanceError(f"bad snapshot header: {head}")
    rows = [(int(u), int(v), float(c)) for u, v, c in reader]
    n = max(max(u, v) for u, v, _ in rows) + 1
    mat = np.zeros((n, n))
    for u, v, c in rows:
        mat[u, v] = mat[v, u] = c
    return from_matrix(mat)


def snapshot_text(inst: Instance) -> str:
    buf = io.StringIO()
    write_snapshot(inst, buf)
    return buf.getvalue()
