"""Spatial graphs for budget-constrained path planning.

A graph lives in the plane: every vertex has an id and a 2-D position in
meters, every undirected edge a strictly positive traversal cost.  Planning
works on walks (vertex revisits allowed), so "path" here always means a
sequence of pairwise-adjacent vertices, not a simple path.

Graph files are plain UTF-8 text, one record per line::

    # comment
    V <id> <x> <y>
    E <u> <v> <cost>

Blank lines and ``#`` comments are ignored.  The graph must be connected and
free of duplicate vertices, duplicate edges and self-loops.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path as _csgraph_shortest_path

__all__ = [
    "GraphLoadError",
    "InvalidPathError",
    "SpatialGraph",
    "build_grid_graph",
    "load_graph",
    "save_graph",
    "path_cost",
    "sample_points_along_path",
]

# Slack applied to arc-length and budget comparisons so exact-boundary cases
# (budget equal to the shortest-path cost, sample landing on the final vertex)
# are not lost to float rounding.
LENGTH_TOL = 1e-9


class GraphLoadError(ValueError):
    """Raised when a graph description is malformed or inconsistent."""


class InvalidPathError(ValueError):
    """Raised when a vertex sequence is not a walk in the graph."""


@dataclass(frozen=True, eq=False)
class SpatialGraph:
    """Connected undirected graph embedded in the plane.

    Parameters
    ----------
    ids : tuple[int, ...]
        Vertex ids in ascending order.
    positions : np.ndarray
        Array of shape ``(n, 2)``; row ``i`` is the position of ``ids[i]``.
    edges : tuple[tuple[int, int, float], ...]
        Undirected edges ``(u, v, cost)`` with ``u < v``.

    All-pairs shortest path distances and routes are computed eagerly at
    construction; instances are immutable after that.
    """

    ids: tuple[int, ...]
    positions: np.ndarray
    edges: tuple[tuple[int, int, float], ...]
    _index: dict[int, int] = field(init=False, repr=False)
    _adj: dict[int, tuple[tuple[int, float], ...]] = field(init=False, repr=False)
    _dist: np.ndarray = field(init=False, repr=False)
    _pred: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.ids)
        if n == 0:
            raise GraphLoadError("graph needs at least one vertex")
        if list(self.ids) != sorted(set(self.ids)):
            raise GraphLoadError("vertex ids must be unique")
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (n, 2) or not np.all(np.isfinite(pos)):
            raise GraphLoadError("positions must be a finite (n, 2) array")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.ids)})

        seen: set[tuple[int, int]] = set()
        adj: dict[int, list[tuple[int, float]]] = {v: [] for v in self.ids}
        for u, v, c in self.edges:
            if u not in self._index or v not in self._index:
                raise GraphLoadError(f"edge ({u}, {v}) references an unknown vertex")
            if u == v:
                raise GraphLoadError(f"self-loop on vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphLoadError(f"duplicate edge ({u}, {v})")
            seen.add(key)
            if not (math.isfinite(c) and c > 0.0):
                raise GraphLoadError(f"edge ({u}, {v}) must have a positive cost, got {c}")
            adj[u].append((v, float(c)))
            adj[v].append((u, float(c)))
        object.__setattr__(
            self, "_adj", {v: tuple(sorted(nbrs)) for v, nbrs in adj.items()}
        )

        dist, pred = self._solve_apsp()
        if np.any(np.isinf(dist)):
            raise GraphLoadError("graph is not connected")
        object.__setattr__(self, "_dist", dist)
        object.__setattr__(self, "_pred", pred)

    def _solve_apsp(self) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.ids)
        rows, cols, vals = [], [], []
        for u, v, c in self.edges:
            rows.append(self._index[u])
            cols.append(self._index[v])
            vals.append(c)
        mat = csr_matrix((vals, (rows, cols)), shape=(n, n))
        dist, pred = _csgraph_shortest_path(
            mat, method="D", directed=False, return_predecessors=True
        )
        # Dijkstra on an undirected graph is symmetric up to summation order;
        # force exact symmetry so downstream equality checks hold.
        dist = np.minimum(dist, dist.T)
        np.fill_diagonal(dist, 0.0)
        return dist, pred

    # ---- basic queries ----

    @property
    def n_vertices(self) -> int:
        return len(self.ids)

    def index_of(self, v: int) -> int:
        """Dense index of vertex id ``v`` (ids sorted ascending)."""
        try:
            return self._index[v]
        except KeyError:
            raise InvalidPathError(f"unknown vertex id {v}") from None

    def position(self, v: int) -> np.ndarray:
        return self.positions[self.index_of(v)]

    def neighbors(self, v: int) -> tuple[int, ...]:
        self.index_of(v)
        return tuple(u for u, _ in self._adj[v])

    def edge_cost(self, u: int, v: int) -> float:
        for w, c in self._adj.get(u, ()):
            if w == v:
                return c
        raise InvalidPathError(f"vertices {u} and {v} are not adjacent")

    def bounding_box(self) -> tuple[float, float, float, float]:
        """``(xmin, ymin, xmax, ymax)`` over all vertex positions."""
        lo = self.positions.min(axis=0)
        hi = self.positions.max(axis=0)
        return (lo[0], lo[1], hi[0], hi[1])

    # ---- shortest paths ----

    def shortest_path_cost(self, u: int, v: int) -> float:
        return float(self._dist[self.index_of(u), self.index_of(v)])

    def shortest_path_route(self, u: int, v: int) -> list[int]:
        """One minimum-cost route from ``u`` to ``v`` as a vertex sequence."""
        i, j = self.index_of(u), self.index_of(v)
        if i == j:
            return [u]
        route = [j]
        while route[-1] != i:
            p = self._pred[i, route[-1]]
            if p < 0:
                raise InvalidPathError(f"no route from {u} to {v}")
            route.append(int(p))
        return [self.ids[k] for k in reversed(route)]

    def apsp(self) -> np.ndarray:
        """All-pairs shortest path distances, indexed by dense vertex index."""
        return self._dist

    def fingerprint(self) -> str:
        """Stable content hash of vertices and edges, for checkpoint metadata."""
        h = hashlib.sha256()
        for v in self.ids:
            p = self.position(v)
            h.update(f"V {v} {float(p[0])!r} {float(p[1])!r}\n".encode())
        for u, v, c in sorted(self.edges):
            h.update(f"E {u} {v} {float(c)!r}\n".encode())
        return h.hexdigest()


def build_grid_graph(width_m: float, height_m: float, spacing: float) -> SpatialGraph:
    """Regular 4-connected grid covering ``width_m`` by ``height_m`` meters.

    Vertices sit at integer multiples of ``spacing`` starting from the origin,
    ids assigned row-major from 0.  Every edge cost equals ``spacing``.
    """
    if not (width_m > 0 and height_m > 0 and spacing > 0):
        raise GraphLoadError("grid dimensions and spacing must be positive")
    nx = int(math.floor(width_m / spacing + LENGTH_TOL)) + 1
    ny = int(math.floor(height_m / spacing + LENGTH_TOL)) + 1
    ids = []
    pos = []
    edges = []
    for j in range(ny):
        for i in range(nx):
            vid = j * nx + i
            ids.append(vid)
            pos.append((i * spacing, j * spacing))
            if i > 0:
                edges.append((vid - 1, vid, float(spacing)))
            if j > 0:
                edges.append((vid - nx, vid, float(spacing)))
    return SpatialGraph(tuple(ids), np.asarray(pos, dtype=float), tuple(edges))


def _parse_graph_lines(lines: list[str], source: str) -> SpatialGraph:
    verts: dict[int, tuple[float, float]] = {}
    edges: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        where = f"{source}:{lineno}"
        if fields[0] == "V":
            if len(fields) != 4:
                raise GraphLoadError(f"{where}: vertex line needs 'V <id> <x> <y>', got {raw.rstrip()!r}")
            try:
                vid, x, y = int(fields[1]), float(fields[2]), float(fields[3])
            except ValueError:
                raise GraphLoadError(f"{where}: cannot parse vertex line {raw.rstrip()!r}") from None
            if vid in verts:
                raise GraphLoadError(f"{where}: duplicate vertex id {vid}")
            verts[vid] = (x, y)
        elif fields[0] == "E":
            if len(fields) != 4:
                raise GraphLoadError(f"{where}: edge line needs 'E <u> <v> <cost>', got {raw.rstrip()!r}")
            try:
                u, v, c = int(fields[1]), int(fields[2]), float(fields[3])
            except ValueError:
                raise GraphLoadError(f"{where}: cannot parse edge line {raw.rstrip()!r}") from None
            if c <= 0:
                raise GraphLoadError(f"{where}: edge cost must be positive, got {c}")
            edges.append((min(u, v), max(u, v), c))
        else:
            raise GraphLoadError(f"{where}: unknown record type {fields[0]!r}")
    if not verts:
        raise GraphLoadError(f"{source}: no vertices defined")
    ids = tuple(sorted(verts))
    pos = np.asarray([verts[v] for v in ids], dtype=float)
    try:
        return SpatialGraph(ids, pos, tuple(edges))
    except GraphLoadError as e:
        raise GraphLoadError(f"{source}: {e}") from None


def load_graph(path) -> SpatialGraph:
    """Read a graph file (see the module docstring for the format)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    return _parse_graph_lines(lines, str(path))


def save_graph(g: SpatialGraph, path) -> None:
    """Write ``g`` in the graph file format; inverse of :func:`load_graph`."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in g.ids:
            p = g.position(v)
            fh.write(f"V {v} {float(p[0])!r} {float(p[1])!r}\n")
        for u, v, c in g.edges:
            fh.write(f"E {u} {v} {float(c)!r}\n")


def path_cost(g: SpatialGraph, path: list[int]) -> float:
    """Total edge cost of a walk; 0 for a single-vertex path.

    Raises :class:`InvalidPathError` naming the offending pair if two
    consecutive vertices are not adjacent.
    """
    if len(path) == 0:
        raise InvalidPathError("path must contain at least one vertex")
    g.index_of(path[0])
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += g.edge_cost(a, b)
    return total


def sample_points_along_path(g: SpatialGraph, path: list[int], d: float) -> np.ndarray:
    """Measurement points spaced every ``d`` meters of arc length.

    Points sit at arc lengths ``0, d, 2d, ...`` from the start of the walk, up
    to and including the total length when it is an exact multiple of ``d``
    (checked with a small tolerance).  The start vertex is always included; a
    single-vertex path yields exactly its own position.

    Returns an array of shape ``(m, 2)``.
    """
    if d <= 0:
        raise InvalidPathError(f"sample interval must be positive, got {d}")
    total = path_cost(g, path)
    n_pts = int(math.floor(total / d + LENGTH_TOL)) + 1
    pts = np.empty((n_pts, 2))
    pts[0] = g.position(path[0])
    k = 1
    consumed = 0.0
    for a, b in zip(path, path[1:]):
        c = g.edge_cost(a, b)
        pa, pb = g.position(a), g.position(b)
        while k < n_pts and k * d <= consumed + c + LENGTH_TOL:
            t = min(max((k * d - consumed) / c, 0.0), 1.0)
            pts[k] = pa + t * (pb - pa)
            k += 1
        consumed += c
    # Numerical guard: every requested multiple must have been placed.
    if k != n_pts:
        raise InvalidPathError("internal arc-length bookkeeping failed")
    return pts
