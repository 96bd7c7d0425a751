"""Builds the superbridge-bounding conformation of an n-plat.

The knot is laid out along the base space curve eta(t) = (cos t, sin t,
cos^2 t): the plat diagram (minus its freed leftmost strand) is drawn inside
a thin slab around the sub-arc 0.1 < t < pi/2 - 0.1 of the unit circle, the
freed strand travels around the far side of the circle, and each of the
remaining n-1 top caps is joined to its bottom cap by two return strands
winding around the far side at staggered radii, attached at the cap apexes.
The resulting closed curve crosses every radial half-plane exactly 2n-1
times, so a direction sweep restricted to the knot part certifies

    (restricted) max maxima  <=  3n - 1,

which together with the strict bridge-number lower bound sandwiches the
superbridge number of the knot type between n+1 and 3n-1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import geometry
from .braid import (PlatDiagram, free_leftmost_strand, permutation_of,
                    plat_components, route_leftmost_home)
from .errors import (BoundViolation, CrossingViolation, FreeStrandRequired,
                     GenericityFailure, InvalidTorusParams, NotAKnot)
from .geometry import ALL, J_ONLY, Direction, SpaceCurve, SweepReport
from .realroots import TrigPoly, base_curve_critical_count, check_perturbation_norm

__all__ = [
    "ConstructionParams",
    "ConstructedConformation",
    "BoundCertificate",
    "build_conformation",
    "certify_bound",
    "certify_plat",
    "braided_base_curve",
    "base_curve",
    "torus_knot_curve",
    "six_stick_trefoil",
    "TREFOIL_PLAT",
    "FIGURE_EIGHT_PLAT",
    "GRANNY_PLAT",
]

# plat presentations with a free leftmost strand (no generator touches
# position 1) whose closures are single components
TREFOIL_PLAT = PlatDiagram.from_letters(2, (2, 2, 2))
FIGURE_EIGHT_PLAT = PlatDiagram.from_letters(2, (2, 2, -3, 2))
GRANNY_PLAT = PlatDiagram.from_letters(3, (2, 2, 2, 4, 4, 4))


@dataclass(frozen=True)
class ConstructionParams:
    """Tube parameters: the plat lives within `delta` of the circle, return
    strands within `epsilon`; both are "small enough" knobs with concrete
    defaults for reproducibility."""

    delta: float = 0.01
    epsilon: float = 0.05
    samples_per_strand: int = 64
    arc_margin: float = 0.1

    def __post_init__(self):
        if not 0 < self.epsilon < 0.2:
            raise ValueError("need 0 < epsilon < 0.2")
        if not 0 < self.delta < self.epsilon / 2:
            raise ValueError("need 0 < delta < epsilon/2")
        if self.samples_per_strand < 16:
            raise ValueError("need samples_per_strand >= 16")
        if not 0 < self.arc_margin < math.pi / 4 - 0.05:
            raise ValueError("arc margin leaves no window")

    def halved(self) -> "ConstructionParams":
        return replace(self, delta=self.delta / 2, epsilon=self.epsilon / 2)


@dataclass(frozen=True)
class ConstructedConformation:
    curve: SpaceCurve
    n: int
    loose_strand_segments: tuple[int, int]
    attachment_points: tuple[int, ...]
    params: ConstructionParams
    source: PlatDiagram

    def knot_polygon(self) -> np.ndarray:
        """The knot part alone: J-arcs re-joined across the attachment
        points (cap side to cap side), dropping the return strands."""
        curve = self.curve
        arcs = curve.knot_arcs()
        if not arcs:
            return curve.vertices.copy()
        groups = curve.singular_groups()
        group_of = {}
        for gi, group in enumerate(groups):
            for idx in group:
                group_of[idx] = gi
        # arc ends: (arc_index, end) with end 0 = first vertex, 1 = last
        ends_at_group: dict[int, list[tuple[int, int]]] = {}
        for ai, arc in enumerate(arcs):
            ends_at_group.setdefault(group_of[int(arc[0])], []).append((ai, 0))
            ends_at_group.setdefault(group_of[int(arc[-1])], []).append((ai, 1))
        for gi, ends in ends_at_group.items():
            if len(ends) != 2:
                raise AssertionError("attachment point without two knot germs")
        points: list[np.ndarray] = []
        used = set()
        ai, end = 0, 0
        while True:
            used.add(ai)
            arc = arcs[ai]
            path = arc if end == 0 else arc[::-1]
            points.extend(curve.vertices[path[:-1]])
            exit_group = group_of[int(path[-1])]
            nxt = [e for e in ends_at_group[exit_group] if e[0] != ai]
            if not nxt:
                raise AssertionError("knot part is not a single cycle")
            ai, other_end = nxt[0]
            if ai in used:
                break
            end = other_end  # continue *into* the arc from this end
        if len(used) != len(arcs):
            raise AssertionError("knot part is not a single cycle")
        return np.array(points)


@dataclass(frozen=True)
class BoundCertificate:
    n: int
    bound: int
    max_maxima: int
    argmax_direction: Direction
    report: SweepReport
    case_tallies: dict[str, int]
    params: ConstructionParams


# ---------------------------------------------------------------------------
# layout helpers
# ---------------------------------------------------------------------------


def _embed(theta: float, radius: float, z_local: float) -> tuple[float, float, float]:
    return (radius * math.cos(theta), radius * math.sin(theta),
            math.cos(theta) ** 2 + z_local)


def _sample_path(control: list[tuple[float, float, float]], density: float):
    """Subdivide a (theta, radius, z_local) control path; keeps corners exact."""
    pts = [control[0]]
    for (ta, ra, za), (tb, rb, zb) in zip(control, control[1:]):
        pieces = max(1, math.ceil(abs(tb - ta) * density))
        for k in range(1, pieces + 1):
            s = k / pieces
            pts.append((ta + s * (tb - ta), ra + s * (rb - ra), za + s * (zb - za)))
    return pts


def _string_controls(plat: PlatDiagram, radii, body_lo, body_hi, bump):
    """Control paths of the window strings, keyed by top position, running
    from the braid top (high angle) down to the bottom (low angle).

    Position 1 is vacant (the freed strand travels the far side), so
    generators never touch it and every path key is >= 2.
    """
    width = plat.word.width
    letters = plat.letters
    m = max(len(letters), 1)
    step = (body_hi - body_lo) / m
    at = list(range(width + 1))  # at[p] = strand currently at position p
    paths = {p: [(body_hi, radii[p], 0.0)] for p in range(2, width + 1)}
    for k, g in enumerate(letters):
        j = abs(g)
        theta_mid = body_hi - (k + 0.5) * step
        theta_bot = body_hi - (k + 1) * step
        a, b = at[j], at[j + 1]
        # positive letter: the strand entering from position j passes over
        mid_r = (radii[j] + radii[j + 1]) / 2
        paths[a].append((theta_mid, mid_r, bump if g > 0 else -bump))
        paths[b].append((theta_mid, mid_r, -bump if g > 0 else bump))
        at[j], at[j + 1] = b, a
        for p in range(2, width + 1):
            paths[at[p]].append((theta_bot, radii[p], 0.0))
    for path in paths.values():
        if abs(path[-1][0] - body_lo) > 1e-15:  # empty word
            path.append((body_lo, path[-1][1], 0.0))
    return paths


def _find_matching(n: int, bottom_to_top: dict[int, int]) -> tuple[bool, ...]:
    """Choice of in/out pairing at each non-loose cap making the traversal a
    single closed circuit.  Exists whenever the plat closure is a knot (the
    cap digraph is then connected and balanced)."""
    width = 2 * n

    def partner(p):
        return p + 1 if p % 2 == 1 else p - 1

    for choice in itertools.product((False, True), repeat=n - 1):
        b = 2
        visited = 0
        seen = set()
        while True:
            if b in seen:
                visited = -1
                break
            seen.add(b)
            visited += 1
            q = bottom_to_top[b]
            if q == 2:
                break
            cap = (q + 1) // 2
            b = partner(q) if choice[cap - 2] else q
        if visited == width - 1:
            return choice
    raise AssertionError("no single-circuit cap pairing; input is not a knot")


# ---------------------------------------------------------------------------
# the construction
# ---------------------------------------------------------------------------


def build_conformation(plat: PlatDiagram,
                       params: ConstructionParams | None = None
                       ) -> ConstructedConformation:
    """Assemble the tagged closed curve for a freed plat.

    Requires n >= 2 and a word in which no generator touches position 1
    (the leftmost strand is free); raises FreeStrandRequired otherwise and
    NotAKnot when the plat closure has several components.  Return strands
    are staggered at distinct radii strictly outside the plat slab, all
    within the epsilon tube, so no added strand crosses anything in the
    plane projection; CrossingViolation reports parameter combinations too
    tight to separate them.
    """
    if params is None:
        params = ConstructionParams()
    n = plat.n
    if n < 2:
        raise ValueError("construction needs a plat with n >= 2")
    if any(abs(g) == 1 for g in plat.letters):
        raise FreeStrandRequired(
            "word still crosses position 1; run free_leftmost_strand first")
    if plat_components(plat) != 1:
        raise NotAKnot("plat closure is a link, not a knot")

    width = 2 * n
    delta, eps = params.delta, params.epsilon
    t0 = params.arc_margin
    t1 = math.pi / 2 - params.arc_margin
    cap_span = 0.15 * (t1 - t0)
    body_lo, body_hi = t0 + cap_span, t1 - cap_span
    far_span = 2 * math.pi + t0 - t1
    fan = 0.1 * far_span
    density = params.samples_per_strand / (body_hi - body_lo)

    radii = {p: 1.0 + 0.9 * delta * (p - 1) / (width - 1)
             for p in range(1, width + 1)}
    apex_radius = {i: (radii[2 * i - 1] + radii[2 * i]) / 2
                   for i in range(1, n + 1)}
    n_return = width - 2
    stagger_step = (0.9 * eps - delta) / (width - 1)
    if stagger_step <= 1e-12:
        raise CrossingViolation(
            "epsilon too small relative to delta to separate return strands")
    return_radius = {rank: 1.0 + delta + stagger_step * (rank + 1)
                     for rank in range(n_return)}
    loose_radius = 1.0

    perm = permutation_of(plat.word)
    bottom_to_top = {perm[q - 1]: q for q in range(1, width + 1)}
    matching = _find_matching(n, bottom_to_top)

    string_paths = _string_controls(plat, radii, body_lo, body_hi, 0.4 * delta)

    def far_controls(r_target: float, apex_top_r: float, apex_bot_r: float):
        return [(t1, apex_top_r, 0.0),
                (t1 + fan, r_target, 0.0),
                (2 * math.pi + t0 - fan, r_target, 0.0),
                (2 * math.pi + t0, apex_bot_r, 0.0)]

    def cap_side_bottom(cap: int, p: int):
        return [(t0, apex_radius[cap], 0.0), (body_lo, radii[p], 0.0)]

    def cap_side_top(p: int, cap: int):
        return [(body_hi, radii[p], 0.0), (t1, apex_radius[cap], 0.0)]

    points: list[tuple[float, float, float]] = []
    tags: list[str] = []
    singular: set[int] = set()

    def append_pass(control, tag, first_singular=False, presampled=False):
        pts = control if presampled else _sample_path(control, density)
        if first_singular:
            singular.add(len(points))
        for theta, radius, z_local in pts[:-1]:
            points.append(_embed(theta, radius, z_local))
            tags.append(tag)

    # loose strand around the far side, tagged as knot
    loose_pts = _sample_path(
        far_controls(loose_radius, apex_radius[1], apex_radius[1]), density)
    loose_range = (0, len(loose_pts) - 2)
    append_pass(loose_pts, "J", presampled=True)

    def partner(p):
        return p + 1 if p % 2 == 1 else p - 1

    b = 2
    strings_done = 0
    while True:
        cap_b = (b + 1) // 2
        append_pass(cap_side_bottom(cap_b, b), "J", first_singular=cap_b != 1)
        q = bottom_to_top[b]
        ascent = list(reversed(string_paths[q]))
        append_pass(_sample_path(ascent, density), "J", presampled=True)
        strings_done += 1
        cap_q = (q + 1) // 2
        append_pass(cap_side_top(q, cap_q), "J")
        if cap_q == 1:
            break
        rank = 2 * (cap_q - 2) + (0 if q % 2 == 1 else 1)
        append_pass(
            far_controls(return_radius[rank], apex_radius[cap_q], apex_radius[cap_q]),
            "L", first_singular=True)
        b = partner(q) if matching[cap_q - 2] else q
    if strings_done != width - 1:
        raise AssertionError("traversal closed early despite knot check")

    curve = SpaceCurve(np.array(points), tags, singular)
    reps = tuple(sorted(group[0] for group in curve.singular_groups()))
    if len(reps) != 2 * n - 2:
        raise AssertionError("expected 2n-2 attachment points")
    return ConstructedConformation(
        curve=curve, n=n, loose_strand_segments=loose_range,
        attachment_points=reps, params=params, source=plat)


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


def certify_bound(conf: ConstructedConformation, directions: int = 5000,
                  seed: int = 0) -> BoundCertificate:
    """Sweep the knot-restricted maxima and assert max <= 3n - 1.

    The bound holds for every correctly constructed conformation, so a
    BoundViolation is a construction bug.  Directions are also classified
    by the exact critical-point count of the base curve on (0, pi/2) and by
    whether the base curve's maximum falls inside the plat sub-arc,
    mirroring the case analysis behind the bound.
    """
    n = conf.n
    bound = 3 * n - 1
    report = geometry.sweep_directions(
        conf.curve, directions, seed, restrict=J_ONLY)
    if report.max_maxima > bound:
        raise BoundViolation(
            f"restricted maxima {report.max_maxima} exceed the bound {bound}; "
            "this indicates a construction bug")
    tallies = _case_tallies(directions, seed, conf.params.arc_margin)
    return BoundCertificate(
        n=n, bound=bound, max_maxima=report.max_maxima,
        argmax_direction=report.argmax_direction, report=report,
        case_tallies=tallies, params=conf.params)


def _case_tallies(directions: int, seed: int, margin: float) -> dict[str, int]:
    dirs = geometry.direction_grid(directions, seed)
    tgrid = np.linspace(0.0, 2 * math.pi, 4096, endpoint=False)
    eta = np.column_stack([np.cos(tgrid), np.sin(tgrid), np.cos(tgrid) ** 2])
    tallies = {
        "eta_max_in_subarc": 0,
        "eta_max_outside": 0,
        "window_critical_points_0": 0,
        "window_critical_points_1": 0,
        "window_critical_points_2": 0,
    }
    for chunk in range(0, len(dirs), 512):
        block = dirs[chunk:chunk + 512]
        argmax_t = tgrid[np.argmax(eta @ block.T, axis=0)]
        inside = (argmax_t > margin) & (argmax_t < math.pi / 2 - margin)
        tallies["eta_max_in_subarc"] += int(inside.sum())
        tallies["eta_max_outside"] += int((~inside).sum())
    for v in dirs:
        crit = base_curve_critical_count(tuple(v), 0.0, math.pi / 2)
        assert crit <= 2, "quarter-arc critical count exceeded two"
        tallies[f"window_critical_points_{crit}"] += 1
    return tallies


def certify_plat(plat: PlatDiagram, params: ConstructionParams | None = None,
                 directions: int = 5000, seed: int = 0,
                 max_steps: int | None = None
                 ) -> tuple[ConstructedConformation, BoundCertificate]:
    """Full pipeline: route the leftmost strand home, free it, build the
    conformation, certify.  Retries once at halved tube parameters if the
    sweep hits a non-perturbable direction."""
    if params is None:
        params = ConstructionParams()
    routed = route_leftmost_home(plat)
    freed = free_leftmost_strand(routed, max_steps)
    try:
        conf = build_conformation(freed, params)
        return conf, certify_bound(conf, directions, seed)
    except GenericityFailure:
        conf = build_conformation(freed, params.halved())
        return conf, certify_bound(conf, directions, seed)


# ---------------------------------------------------------------------------
# reference curves
# ---------------------------------------------------------------------------


def braided_base_curve(n: int, radial: TrigPoly | None = None,
                       vertical: TrigPoly | None = None,
                       epsilon=0, samples: int = 1024) -> SpaceCurve:
    """Sample the closed (2n-1)-times-winding curve

        ( cos(rt)(1+e*radial), sin(rt)(1+e*radial), cos^2(rt)+e*vertical )

    with r = 2n-1.  The smooth companion of the plat construction: its
    extrema counts cross-check the half-angle polynomial root counts."""
    if n < 1:
        raise ValueError("n must be positive")
    r = 2 * n - 1
    if samples < 64 * r:
        raise ValueError(f"need at least {64 * r} samples for winding {r}")
    radial = radial or TrigPoly.zero()
    vertical = vertical or TrigPoly.zero()
    check_perturbation_norm(radial, vertical)
    eps = float(epsilon)
    ts = 2 * math.pi * np.arange(samples) / samples
    rad = np.array([1.0 + eps * radial(t) for t in ts])
    vert = np.array([eps * vertical(t) for t in ts])
    verts = np.column_stack([
        np.cos(r * ts) * rad,
        np.sin(r * ts) * rad,
        np.cos(r * ts) ** 2 + vert,
    ])
    return SpaceCurve(verts)


def base_curve(samples: int = 720) -> SpaceCurve:
    """The base space curve (cos t, sin t, cos^2 t) itself."""
    return braided_base_curve(1, samples=samples)


def torus_knot_curve(p: int, q: int, ring_radius: float = 2.0,
                     tube_radius: float = 0.5,
                     samples: int = 2000) -> SpaceCurve:
    """Standard torus embedding ((R + r cos qt) cos pt, ..., r sin qt)."""
    if math.gcd(p, q) != 1 or not 2 <= p < q:
        raise InvalidTorusParams("need coprime 2 <= p < q")
    if not 0 < tube_radius < ring_radius:
        raise InvalidTorusParams("need 0 < tube radius < ring radius")
    if samples < 16 * q:
        raise InvalidTorusParams(f"need at least {16 * q} samples")
    ts = 2 * math.pi * np.arange(samples) / samples
    rad = ring_radius + tube_radius * np.cos(q * ts)
    verts = np.column_stack([
        rad * np.cos(p * ts),
        rad * np.sin(p * ts),
        tube_radius * np.sin(q * ts),
    ])
    return SpaceCurve(verts)


def six_stick_trefoil() -> SpaceCurve:
    """A 6-vertex polygonal trefoil (the minimal stick count)."""
    top = [(math.cos(a), math.sin(a), 1.0)
           for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    bot = [(1.2 * math.cos(a), 1.2 * math.sin(a), -1.0)
           for a in (math.pi / 3, math.pi, 5 * math.pi / 3)]
    order = [top[0], bot[1], top[2], bot[0], top[1], bot[2]]
    return SpaceCurve(np.array(order))
