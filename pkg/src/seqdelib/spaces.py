# src/seqdelib/spaces.py
"""
Decision spaces for sequential deliberation.

A space is a finite set of alternatives with a metric. Four kinds are built in:

- ``line``: the uniform grid {i/n : 0 <= i < n} on [0, 1) with d(u, v) = |u - v|
- ``hypercube``: the 2^k bit vectors of length k with Hamming distance
- ``star``: a center (id 0) joined to k leaves (ids 1..k)
- ``graph``: any connected undirected graph with unit edge weights

Every metric is stored as a dense all-pairs table, which is exact and cheap at
the sizes this package simulates (a few hundred up to ~1000 alternatives).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from seqdelib.errors import InputError, StructuralError

logger = logging.getLogger(__name__)

# -------------------------------
# Configuration
# -------------------------------

LINE_UPPER = 1.0 - 1e-9  # continuous points are clamped into [0, LINE_UPPER]
TOLERANCE = 1e-9  # slack when comparing sums of floating point distances


class SpaceKind(StrEnum):
    LINE = "line"
    HYPERCUBE = "hypercube"
    STAR = "star"
    GRAPH = "graph"


@dataclass(frozen=True)
class Alternative:
    """One element of a decision space.

    ``coordinate`` is a float in [0, 1) on the line, a tuple of k bits on the
    hypercube and the vertex id on star and general graphs.
    """

    id: int
    coordinate: float | tuple[int, ...] | int


# A bliss point: continuous on the line, an alternative elsewhere.
Point = float | Alternative


class DecisionSpace:
    """A finite metric space of alternatives. Immutable after construction."""

    def __init__(
        self,
        kind: SpaceKind,
        alternatives: Sequence[Alternative],
        distances: np.ndarray,
        graph: nx.Graph | None = None,
    ):
        self.kind = SpaceKind(kind)
        self.alternatives: tuple[Alternative, ...] = tuple(alternatives)
        self._distances = np.asarray(distances, dtype=float)
        self._distances.setflags(write=False)
        self.graph = graph

    # ---------- constructors ----------

    @classmethod
    def line(cls, n: int) -> "DecisionSpace":
        if n < 1:
            raise InputError(f"line needs at least one alternative, got {n}")
        coords = np.arange(n) / n
        alternatives = [Alternative(i, float(c)) for i, c in enumerate(coords)]
        distances = np.abs(coords[:, None] - coords[None, :])
        return cls(SpaceKind.LINE, alternatives, distances)

    @classmethod
    def hypercube(cls, k: int) -> "DecisionSpace":
        if k < 1:
            raise InputError(f"hypercube dimension must be positive, got {k}")
        ids = np.arange(2**k)
        alternatives = [
            Alternative(int(i), tuple((int(i) >> (k - 1 - j)) & 1 for j in range(k)))
            for i in ids
        ]
        distances = np.bitwise_count(np.bitwise_xor.outer(ids, ids))
        return cls(SpaceKind.HYPERCUBE, alternatives, distances)

    @classmethod
    def star(cls, k: int) -> "DecisionSpace":
        if k < 1:
            raise InputError(f"star needs at least one leaf, got {k}")
        return cls._from_graph(nx.star_graph(k), SpaceKind.STAR)

    @classmethod
    def graph(cls, edges: Iterable[tuple[int, int]], n: int | None = None) -> "DecisionSpace":
        g = nx.Graph()
        if n is not None:
            g.add_nodes_from(range(n))
        for u, v in edges:
            if u == v:
                raise InputError(f"self loop on vertex {u}")
            g.add_edge(int(u), int(v))
        return cls._from_graph(g, SpaceKind.GRAPH)

    @classmethod
    def from_edge_list(cls, path: str | Path) -> "DecisionSpace":
        """Read an undirected edge list, one ``u v`` pair of 0-based ids per line."""
        try:
            g = nx.read_edgelist(path, nodetype=int, comments="#", data=False)
        except (TypeError, ValueError, IndexError) as exc:
            raise InputError(f"cannot parse edge list {path}: {exc}") from exc
        logger.info("Read %d vertices, %d edges from %s", g.number_of_nodes(), g.number_of_edges(), path)
        return cls.graph(g.edges())

    @classmethod
    def _from_graph(cls, g: nx.Graph, kind: SpaceKind) -> "DecisionSpace":
        n = g.number_of_nodes()
        if n == 0:
            raise InputError("graph has no vertices")
        if sorted(g.nodes) != list(range(n)):
            raise InputError("vertex ids must be exactly 0..n-1")
        if not nx.is_connected(g):
            raise StructuralError("graph is disconnected")
        distances = nx.floyd_warshall_numpy(g, nodelist=range(n))
        alternatives = [Alternative(i, i) for i in range(n)]
        return cls(kind, alternatives, distances, graph=g)

    # ---------- accessors ----------

    def __len__(self) -> int:
        return len(self.alternatives)

    def __repr__(self) -> str:
        return f"DecisionSpace(kind={self.kind.value!r}, size={len(self)})"

    @property
    def size(self) -> int:
        return len(self.alternatives)

    @property
    def distance_matrix(self) -> np.ndarray:
        return self._distances

    @cached_property
    def coordinates(self) -> np.ndarray:
        if self.kind is not SpaceKind.LINE:
            raise InputError(f"{self.kind.value} space has no scalar coordinates")
        return np.array([a.coordinate for a in self.alternatives])

    @property
    def dimension(self) -> int:
        if self.kind is not SpaceKind.HYPERCUBE:
            raise InputError(f"{self.kind.value} space has no dimension")
        return len(self.alternatives[0].coordinate)

    @cached_property
    def is_median_graph(self) -> bool:
        # line, hypercube and star (a tree) are median graphs by construction
        if self.kind is SpaceKind.GRAPH:
            return validate_median_graph(self)
        return True

    def alternative(self, id: int) -> Alternative:
        if not 0 <= id < self.size:
            raise InputError(f"alternative id {id} outside [0, {self.size})")
        return self.alternatives[id]

    def from_bits(self, bits: str | Sequence[int]) -> Alternative:
        """Hypercube vertex from its bit string, most significant bit first."""
        if isinstance(bits, str):
            bits = [int(b) for b in bits]
        if len(bits) != self.dimension or any(b not in (0, 1) for b in bits):
            raise InputError(f"expected {self.dimension} bits, got {bits!r}")
        return self.alternatives[int("".join(str(b) for b in bits), 2)]


# -------------------------------
# Operations
# -------------------------------


def require_member(space: DecisionSpace, x: Alternative) -> None:
    if not 0 <= x.id < space.size or space.alternatives[x.id] != x:
        raise InputError(f"{x!r} does not belong to {space!r}")


def distance(space: DecisionSpace, x: Alternative, y: Alternative) -> float:
    require_member(space, x)
    require_member(space, y)
    return float(space.distance_matrix[x.id, y.id])


def point_distances(space: DecisionSpace, point: Point) -> np.ndarray:
    """Distance from a bliss point to every alternative, indexed by id."""
    if isinstance(point, Alternative):
        require_member(space, point)
        return space.distance_matrix[point.id]
    if space.kind is not SpaceKind.LINE:
        raise InputError(f"continuous point {point!r} on a {space.kind.value} space")
    return np.abs(space.coordinates - float(point))


def point_distance_matrix(space: DecisionSpace, points: np.ndarray) -> np.ndarray:
    """Rows of point_distances for many points at once.

    ``points`` holds float coordinates on the line or integer alternative ids.
    """
    points = np.asarray(points)
    if space.kind is SpaceKind.LINE and points.dtype.kind == "f":
        return np.abs(points[:, None] - space.coordinates[None, :])
    ids = points.astype(int)
    if ids.size and (ids.min() < 0 or ids.max() >= space.size):
        raise InputError("alternative id outside the space")
    return space.distance_matrix[ids]


def interval(space: DecisionSpace, x: Alternative, y: Alternative) -> set[int]:
    """Ids of every alternative on some shortest path between x and y."""
    return set(np.flatnonzero(_interval_mask(space, x, y)).tolist())


def _interval_mask(space: DecisionSpace, x: Alternative, y: Alternative) -> np.ndarray:
    require_member(space, x)
    require_member(space, y)
    d = space.distance_matrix
    return np.abs(d[x.id] + d[:, y.id] - d[x.id, y.id]) <= TOLERANCE


def median3(space: DecisionSpace, u: Alternative, v: Alternative, w: Alternative) -> Alternative:
    """The unique alternative lying on shortest paths between all three pairs."""
    for x in (u, v, w):
        require_member(space, x)

    if space.kind is SpaceKind.LINE:
        # coordinates increase with id
        return space.alternatives[sorted((u.id, v.id, w.id))[1]]

    if space.kind is SpaceKind.HYPERCUBE:
        a, b, c = u.id, v.id, w.id
        return space.alternatives[(a & b) | (b & c) | (a & c)]

    common = _interval_mask(space, u, v) & _interval_mask(space, v, w) & _interval_mask(space, u, w)
    found = np.flatnonzero(common)
    if len(found) != 1:
        raise StructuralError(
            f"no unique median for ({u.id}, {v.id}, {w.id}): {len(found)} common vertices"
        )
    return space.alternatives[int(found[0])]


def validate_median_graph(space: DecisionSpace) -> bool:
    """True iff every vertex triple has exactly one common shortest-path vertex.

    Brute force over all triples, O(n^4); meant for graphs of at most a few
    hundred vertices.
    """
    d = space.distance_matrix
    if not np.isfinite(d).all():
        raise StructuralError("graph is disconnected")

    # between[x, y, z]: z lies on a shortest x-y path
    between = np.abs(d[:, None, :] + d[None, :, :] - d[:, :, None]) <= TOLERANCE
    for x in range(len(d)):
        row = between[x]
        counts = (row[:, None, :] & row[None, :, :] & between).sum(axis=2)
        if (counts != 1).any():
            y, z = np.argwhere(counts != 1)[0]
            logger.debug("Triple (%d, %d, %d) has %d common vertices", x, y, z, counts[y, z])
            return False
    return True


def nearest_alternative(space: DecisionSpace, p: float) -> Alternative:
    """Grid alternative closest to p; exact midpoints go to the lower index."""
    if space.kind is not SpaceKind.LINE:
        raise InputError(f"nearest_alternative needs a line space, got {space.kind.value}")
    if not 0.0 <= p < 1.0:
        raise InputError(f"point {p} outside [0, 1)")
    coords = space.coordinates
    low = min(int(np.floor(p * space.size)), space.size - 1)
    high = min(low + 1, space.size - 1)
    if abs(coords[high] - p) < abs(p - coords[low]) - TOLERANCE:
        return space.alternatives[high]
    return space.alternatives[low]


def clamp_to_line(p: float) -> float:
    return min(max(float(p), 0.0), LINE_UPPER)


def snap(space: DecisionSpace, point: Point) -> Alternative:
    """The alternative standing in for a bliss point."""
    if isinstance(point, Alternative):
        require_member(space, point)
        return point
    return nearest_alternative(space, clamp_to_line(point))


def alternative_value(space: DecisionSpace, x: Alternative) -> float | int:
    """Plain value for tables: the coordinate on the line, the id elsewhere."""
    if space.kind is SpaceKind.LINE:
        return float(x.coordinate)
    return x.id
