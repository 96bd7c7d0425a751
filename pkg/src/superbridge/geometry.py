"""Height-function analysis of closed polygonal space curves.

A `SpaceCurve` is a closed polygon whose segments are tagged J (knot
strands) or L (added return strands); vertices where the tag flips are the
singular attachment points.  For a direction v the height function is the
dot product with v along the cyclic vertex sequence; counting its strict
local maxima per direction, sweeping directions over the sphere, and
sweeping planes per direction give the three certified quantities:

  * max over directions of maxima  -- lower-bound witness for the
    conformation's superbridge number,
  * min over directions of maxima  -- upper-bound witness for the bridge
    number of the knot type,
  * max plane-crossing count       -- the conformation's geometric degree.

Directions where some vertex pair ties in height (a segment perpendicular
to v) are non-generic: counting raises and the sweep retries with seeded
jitter.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import CurveParseError, GenericityFailure

__all__ = [
    "Direction",
    "SpaceCurve",
    "SweepReport",
    "InequalityCertificate",
    "TraceStep",
    "ALL",
    "J_ONLY",
    "count_extrema",
    "sweep_directions",
    "geometric_degree",
    "direction_grid",
    "certify_inequalities",
    "maxima_transition_trace",
    "fibonacci_directions",
    "read_curve_csv",
    "write_curve_csv",
]

ALL = "all"
J_ONLY = "j"

_GENERICITY_RTOL = 1e-9   # adjacent height ties below this fraction of span
_MAX_PERTURB = 5
_JITTER = 1e-6


@dataclass(frozen=True)
class Direction:
    """A unit vector in 3-space (norm within 1e-12)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction norm {norm!r} is not 1")

    @classmethod
    def from_vector(cls, v) -> "Direction":
        arr = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(*(arr / norm))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


class SpaceCurve:
    """Closed polygonal curve with per-segment J/L tags and singular flags.

    `segment_tags[i]` labels the segment leaving vertex i.  Singular
    vertices are exactly the tag-change vertices; a physical attachment
    point appears as two coincident singular vertices (the closed traversal
    passes through it twice).
    """

    def __init__(self, vertices, segment_tags=None, singular_vertices=()):
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 3 or len(verts) < 3:
            raise ValueError("need at least 3 vertices of dimension 3")
        nxt = np.roll(verts, -1, axis=0)
        if np.any(np.all(verts == nxt, axis=1)):
            raise ValueError("consecutive vertices must be distinct")
        if segment_tags is None:
            tags = np.full(len(verts), "J", dtype="<U1")
        else:
            tags = np.asarray(list(segment_tags), dtype="<U1")
        if len(tags) != len(verts):
            raise ValueError("one tag per segment (= per vertex) required")
        if not set(np.unique(tags)) <= {"J", "L"}:
            raise ValueError("segment tags must be 'J' or 'L'")
        singular = frozenset(int(i) for i in singular_vertices)
        if singular and not all(0 <= i < len(verts) for i in singular):
            raise ValueError("singular vertex index out of range")
        changes = {i for i in range(len(verts)) if tags[i - 1] != tags[i]}
        if changes != singular:
            raise ValueError(
                "singular vertices must be exactly the J/L tag changes")
        self.vertices = verts
        self.segment_tags = tags
        self.singular_vertices = singular
        self._arcs: list[np.ndarray] | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def stick_count(self) -> int:
        return len(self.vertices)

    @property
    def has_return_strands(self) -> bool:
        return bool(self.singular_vertices)

    def knot_arcs(self) -> list[np.ndarray]:
        """Maximal J-tagged arcs as vertex index paths (endpoints singular)."""
        if self._arcs is not None:
            return self._arcs
        n = self.n_vertices
        if not self.singular_vertices:
            self._arcs = []
            return self._arcs
        starts = sorted(i for i in self.singular_vertices
                        if self.segment_tags[i] == "J")
        arcs = []
        for s in starts:
            path = [s]
            i = s
            while True:
                i = (i + 1) % n
                path.append(i)
                if self.segment_tags[i] != "J":
                    break
            arcs.append(np.array(path))
        self._arcs = arcs
        return arcs

    def singular_groups(self) -> list[list[int]]:
        """Singular vertices grouped by exact coordinate coincidence."""
        groups: dict[tuple[float, float, float], list[int]] = {}
        for i in sorted(self.singular_vertices):
            groups.setdefault(tuple(self.vertices[i]), []).append(i)
        return list(groups.values())

    def transformed(self, rotation, translation=(0.0, 0.0, 0.0)) -> "SpaceCurve":
        rot = np.asarray(rotation, dtype=float)
        verts = self.vertices @ rot.T + np.asarray(translation, dtype=float)
        return SpaceCurve(verts, self.segment_tags, self.singular_vertices)


@dataclass(frozen=True)
class SweepReport:
    direction_count: int
    max_maxima: int
    argmax_direction: Direction
    min_maxima: int
    argmin_direction: Direction
    parity_violations: int

    def __post_init__(self):
        if not self.max_maxima >= self.min_maxima >= 1:
            raise ValueError("sweep of a closed curve needs max >= min >= 1")


@dataclass(frozen=True)
class InequalityCertificate:
    """Per-conformation inequality flags; both must hold for every input."""

    max_maxima: int
    degree: int
    stick_count: int
    degree_le_twice_maxima: bool
    maxima_le_half_sticks: bool


@dataclass(frozen=True)
class TraceStep:
    direction: Direction
    maxima: int | None
    skipped: bool


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


def _heights(curve: SpaceCurve, dirs: np.ndarray) -> np.ndarray:
    return curve.vertices @ dirs.T  # (n_vertices, n_dirs)


def _generic_mask(h: np.ndarray) -> np.ndarray:
    span = h.max(axis=0) - h.min(axis=0)
    tol = _GENERICITY_RTOL * np.where(span > 0, span, 1.0)
    dh = np.abs(h - np.roll(h, 1, axis=0))
    return (span > 0) & (dh > tol).all(axis=0)


def _counts_all(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    up = h > np.roll(h, 1, axis=0)
    dn = h > np.roll(h, -1, axis=0)
    maxima = (up & dn).sum(axis=0)
    minima = (~up & ~dn).sum(axis=0)
    return maxima, minima


def _counts_restricted(curve: SpaceCurve, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Maxima/minima of the height restricted to the J part.

    Interior vertices of each maximal J-arc are counted as usual.  An arc
    endpoint counts one-sidedly: it is a maximum of its arc when the height
    strictly decreases into the arc.  A physical attachment point (two
    coincident flagged vertices) contributes at most one maximum and one
    minimum in total, however many of its arc-ends qualify.
    """
    m = h.shape[1]
    maxima = np.zeros(m, dtype=int)
    minima = np.zeros(m, dtype=int)
    for arc in curve.knot_arcs():
        if len(arc) > 2:
            inner = h[arc[1:-1]]
            before = h[arc[:-2]]
            after = h[arc[2:]]
            maxima += ((inner > before) & (inner > after)).sum(axis=0)
            minima += ((inner < before) & (inner < after)).sum(axis=0)
    n = curve.n_vertices
    for group in curve.singular_groups():
        group_max = np.zeros(m, dtype=bool)
        group_min = np.zeros(m, dtype=bool)
        for i in group:
            # each flagged vertex has exactly one incident J germ
            neighbor = (i + 1) % n if curve.segment_tags[i] == "J" else (i - 1) % n
            group_max |= h[i] > h[neighbor]
            group_min |= h[i] < h[neighbor]
        maxima += group_max
        minima += group_min
    return maxima, minima


def _bulk_counts(curve: SpaceCurve, dirs: np.ndarray, restrict: str):
    h = _heights(curve, dirs)
    generic = _generic_mask(h)
    if restrict == ALL or not curve.has_return_strands:
        maxima, minima = _counts_all(h)
        parity_bad = generic & (maxima != minima)
        if parity_bad.any():
            raise AssertionError(
                "closed-curve height function with unequal maxima/minima "
                "counts on a generic direction")
    elif restrict == J_ONLY:
        maxima, minima = _counts_restricted(curve, h)
    else:
        raise ValueError(f"restrict must be {ALL!r} or {J_ONLY!r}")
    return maxima, minima, generic


def count_extrema(curve: SpaceCurve, direction: Direction,
                  restrict: str = ALL) -> tuple[int, int]:
    """Strict local maxima and minima of the height along `direction`.

    Raises GenericityFailure when two cyclically adjacent vertices tie in
    height within 1e-9 of the height span (a segment essentially
    perpendicular to the direction); callers perturb and retry.  With
    restrict=J_ONLY the height is restricted to the maximal J-arcs, with
    the one-sided endpoint convention described in `_counts_restricted`.
    """
    dirs = direction.array.reshape(1, 3)
    maxima, minima, generic = _bulk_counts(curve, dirs, restrict)
    if not generic[0]:
        raise GenericityFailure(
            "direction has a flat vertex pair on this curve")
    return int(maxima[0]), int(minima[0])


# ---------------------------------------------------------------------------
# direction grids
# ---------------------------------------------------------------------------


def fibonacci_directions(count: int) -> np.ndarray:
    """Deterministic near-uniform sphere lattice."""
    if count < 1:
        raise ValueError("need at least one direction")
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


_AXES = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0],
                  [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)


def direction_grid(count: int, seed: int = 0) -> np.ndarray:
    """The sweep grid: Fibonacci lattice plus the 6 axes, all jittered by a
    seeded 1e-6 nudge (exact axis directions are rarely generic)."""
    rng = np.random.default_rng([seed, 0])
    grid = np.vstack([fibonacci_directions(count), _AXES])
    grid = grid + rng.normal(scale=_JITTER, size=grid.shape)
    return grid / np.linalg.norm(grid, axis=1, keepdims=True)


def _counts_with_retry(curve, dirs, restrict, rng):
    """Per-direction counts, re-jittering non-generic directions up to 5 times."""
    dirs = dirs.copy()
    maxima, minima, generic = _bulk_counts(curve, dirs, restrict)
    bad = np.flatnonzero(~generic)
    for idx in bad:
        ok = False
        for _ in range(_MAX_PERTURB):
            v = dirs[idx] + rng.normal(scale=_JITTER, size=3)
            v /= np.linalg.norm(v)
            mx, mn, gen = _bulk_counts(curve, v.reshape(1, 3), restrict)
            if gen[0]:
                dirs[idx] = v
                maxima[idx], minima[idx] = mx[0], mn[0]
                ok = True
                break
        if not ok:
            raise GenericityFailure(
                f"direction {tuple(dirs[idx])} stayed non-generic after "
                f"{_MAX_PERTURB} perturbations")
    return dirs, maxima, minima


def _lex_pick(dirs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Lexicographically smallest direction among the masked rows."""
    cand = dirs[mask]
    order = np.lexsort((cand[:, 2], cand[:, 1], cand[:, 0]))
    return cand[order[0]]


def sweep_directions(curve: SpaceCurve, directions: int = 1000, seed: int = 0,
                     restrict: str = ALL, refine: bool = True) -> SweepReport:
    """Count extrema over a jittered Fibonacci grid plus the 6 axes.

    max_maxima over the grid is a certified lower bound for the
    conformation's superbridge number; min_maxima witnesses an upper bound
    for the bridge number of the knot type.  The arg-max direction is
    refined by 3 rounds of local descent at half the lattice spacing.  The
    reduction is order-independent (lexicographic tie-breaks), so reports

    are reproducible for a fixed (curve, directions, seed).
    """
    rng = np.random.default_rng([seed, 1])
    dirs, maxima, minima = _counts_with_retry(
        curve, direction_grid(directions, seed), restrict, rng)

    max_count = int(maxima.max())
    min_count = int(maxima.min())
    argmax = _lex_pick(dirs, maxima == max_count)
    argmin = _lex_pick(dirs, maxima == min_count)
    parity = int((maxima != minima).sum())

    if refine:
        spacing = math.sqrt(4 * math.pi / max(directions, 1))
        argmax, max_count = _refine_argmax(
            curve, restrict, rng, argmax, max_count, spacing)

    return SweepReport(
        direction_count=len(dirs),
        max_maxima=max_count,
        argmax_direction=Direction.from_vector(argmax),
        min_maxima=min_count,
        argmin_direction=Direction.from_vector(argmin),
        parity_violations=parity,
    )


def _refine_argmax(curve, restrict, rng, center, best, spacing, rounds=3, ring=8):
    for round_idx in range(rounds):
        radius = spacing / 2 ** (round_idx + 1)
        u = np.array([1.0, 0.0, 0.0])
        if abs(center @ u) > 0.9:
            u = np.array([0.0, 1.0, 0.0])
        e1 = np.cross(center, u)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(center, e1)
        angles = 2 * math.pi * np.arange(ring) / ring
        cand = (math.cos(radius) * center[None, :]
                + math.sin(radius) * (np.cos(angles)[:, None] * e1
                                      + np.sin(angles)[:, None] * e2))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        try:
            cand, maxima, _ = _counts_with_retry(curve, cand, restrict, rng)
        except GenericityFailure:
            continue
        top = int(maxima.max())
        if top > best:
            best = top
            center = _lex_pick(cand, maxima == top)
    return center, best


# ---------------------------------------------------------------------------
# plane sweeps / geometric degree
# ---------------------------------------------------------------------------


def _degree_for_heights(h: np.ndarray) -> int:
    """Max count of segments crossing a level, for one direction's heights."""
    nxt = np.roll(h, -1)
    lo = np.minimum(h, nxt)
    hi = np.maximum(h, nxt)
    hs = np.sort(h)
    gaps = np.diff(hs)
    span = hs[-1] - hs[0]
    levels = (hs[:-1] + hs[1:])[gaps > 1e-12 * span] / 2
    lo_sorted = np.sort(lo)
    hi_sorted = np.sort(hi)
    crossings = (np.searchsorted(lo_sorted, levels, side="left")
                 - np.searchsorted(hi_sorted, levels, side="left"))
    return int(crossings.max()) if len(levels) else 0


def geometric_degree(curve: SpaceCurve, directions: int = 1000,
                     seed: int = 0) -> int:
    """Greatest number of times a sampled plane meets the curve.

    For each grid direction, sweeps a plane through the sorted vertex
    heights (the crossing count is constant between consecutive critical
    heights) and maximizes over levels, then over directions.  Always even
    for a closed curve.
    """
    rng = np.random.default_rng([seed, 1])
    dirs = direction_grid(directions, seed)
    h = _heights(curve, dirs)
    generic = _generic_mask(h)
    degree = 0
    for idx in range(dirs.shape[0]):
        col = h[:, idx]
        if not generic[idx]:
            col = None
            for _ in range(_MAX_PERTURB):
                v = dirs[idx] + rng.normal(scale=_JITTER, size=3)
                v /= np.linalg.norm(v)
                hcol = _heights(curve, v.reshape(1, 3))[:, 0]
                if _generic_mask(hcol.reshape(-1, 1))[0]:
                    col = hcol
                    break
            if col is None:
                raise GenericityFailure(
                    "plane sweep direction stayed non-generic after "
                    f"{_MAX_PERTURB} perturbations")
        degree = max(degree, _degree_for_heights(col))
    assert degree % 2 == 0, "closed-curve plane crossings must pair up"
    return degree


def certify_inequalities(curve: SpaceCurve, directions: int = 1000,
                         seed: int = 0) -> InequalityCertificate:
    """Check degree <= 2 * max_maxima and max_maxima <= sticks/2 on one curve.

    Both flags hold for every valid closed polygon; a False flag indicates
    an implementation bug rather than a mathematical discovery.
    """
    report = sweep_directions(curve, directions, seed, restrict=ALL)
    degree = geometric_degree(curve, directions, seed)
    return InequalityCertificate(
        max_maxima=report.max_maxima,
        degree=degree,
        stick_count=curve.stick_count,
        degree_le_twice_maxima=degree <= 2 * report.max_maxima,
        maxima_le_half_sticks=report.max_maxima <= curve.stick_count / 2,
    )


# ---------------------------------------------------------------------------
# rotating-direction trace
# ---------------------------------------------------------------------------


def maxima_transition_trace(curve: SpaceCurve, v_start: Direction,
                            v_end: Direction, steps: int,
                            seed: int = 0) -> list[TraceStep]:
    """J-restricted maxima along the great-circle arc from v_start to v_end.

    Used to watch interior maxima hand over to attachment points as the
    direction rotates: the count must never exceed the certified bound.
    Non-perturbable steps are skipped and flagged.
    """
    if not curve.singular_vertices:
        raise ValueError("trace needs a curve with attachment points")
    if steps < 2:
        raise ValueError("need at least 2 steps")
    rng = np.random.default_rng(seed)
    a, b = v_start.array, v_end.array
    dot = float(np.clip(a @ b, -1.0, 1.0))
    omega = math.acos(dot)
    out: list[TraceStep] = []
    for k in range(steps):
        s = k / (steps - 1)
        if omega < 1e-12:
            v = a
        else:
            v = (math.sin((1 - s) * omega) * a + math.sin(s * omega) * b) \
                / math.sin(omega)
        v = v / np.linalg.norm(v)
        try:
            dirs, maxima, _ = _counts_with_retry(
                curve, v.reshape(1, 3), J_ONLY, rng)
            out.append(TraceStep(Direction.from_vector(dirs[0]),
                                 int(maxima[0]), False))
        except GenericityFailure:
            out.append(TraceStep(Direction.from_vector(v), None, True))
    return out


# ---------------------------------------------------------------------------
# curve files
# ---------------------------------------------------------------------------


def write_curve_csv(curve: SpaceCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "tag", "singular"])
        for i, (x, y, z) in enumerate(curve.vertices):
            writer.writerow([
                format(x, ".17g"), format(y, ".17g"), format(z, ".17g"),
                curve.segment_tags[i],
                1 if i in curve.singular_vertices else 0,
            ])


def read_curve_csv(path) -> SpaceCurve:
    vertices, tags, singular = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != \
                ["x", "y", "z", "tag", "singular"]:
            raise CurveParseError("line 1: expected header x,y,z,tag,singular")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise CurveParseError(f"line {lineno}: expected 5 columns")
            try:
                xyz = [float(c) for c in row[:3]]
            except ValueError:
                raise CurveParseError(f"line {lineno}: bad coordinate")
            tag = row[3].strip()
            if tag not in ("J", "L"):
                raise CurveParseError(f"line {lineno}: tag must be J or L")
            flag = row[4].strip()
            if flag not in ("0", "1"):
                raise CurveParseError(f"line {lineno}: singular must be 0 or 1")
            vertices.append(xyz)
            tags.append(tag)
            if flag == "1":
                singular.append(lineno - 2)
    try:
        return SpaceCurve(vertices, tags, singular)
    except ValueError as exc:
        raise CurveParseError(str(exc))
