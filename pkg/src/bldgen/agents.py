"""Constraint-driven building (micro) and block (meso) agents.

Each agent scores its constraints in [0, 1], proposes actions for the
unsatisfied ones, and runs a best-first search over the resulting states:
a child state is kept only if its aggregate satisfaction strictly improves,
otherwise the search backtracks to the parent and applies its next untried
proposal. The best state visited is returned.

Blocks drive their members in two phases (every member alone, then the
block over the members). Members of the same block never see each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional

import numpy as np
from shapely import affinity
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient

from .enrichment import Block
from .geom import (
    Building,
    GeometryError,
    area,
    boolean_union,
    convex_hull,
    id_key,
    min_bounding_rectangle,
    ring_coords,
    shortest_edge,
)
from .morphology import remove_short_edges

EPS = 1e-12
AREA_TOL = 1e-6

MICRO_CONSTRAINTS = ("size", "granularity", "squareness", "convexity", "elongation")
MESO_CONSTRAINTS = ("density", "preservation", "proximity")
IMPORTANCE = {
    "size": 3.0,
    "granularity": 2.0,
    "squareness": 1.0,
    "convexity": 1.0,
    "elongation": 1.0,
    "density": 2.0,
    "preservation": 3.0,
    "proximity": 3.0,
}

# squareness is only scored for buildings that start out near-rectilinear
SQUARENESS_SPAN_DEG = 15.0
NEAR_RECTILINEAR_DEG = 25.0
DEFAULT_SQUARE_TOL_DEG = 15.0


@dataclass(frozen=True)
class ScaleSpec:
    scale_denominator: int
    min_area_mm2: float = 0.4
    min_edge_mm: float = 0.3
    min_separation_mm: float = 0.2
    elimination_ratio: float = 0.4
    big_factor: float = 5.0

    def __post_init__(self):
        values = (self.scale_denominator, self.min_area_mm2, self.min_edge_mm, self.min_separation_mm, self.elimination_ratio)
        if not all(v > 0 for v in values):
            raise ValueError("scale thresholds must be positive")
        if self.elimination_ratio >= 1:
            raise ValueError("elimination_ratio must be < 1")
        if self.big_factor <= 0:
            raise ValueError("big_factor must be positive")

    def ground(self, mm: float) -> float:
        """Ground length in meters of ``mm`` map millimeters."""
        return mm * self.scale_denominator / 1000.0

    @property
    def min_area(self) -> float:
        return self.min_area_mm2 * (self.scale_denominator / 1000.0) ** 2

    @property
    def min_edge(self) -> float:
        return self.ground(self.min_edge_mm)

    @property
    def min_separation(self) -> float:
        return self.ground(self.min_separation_mm)

    @property
    def elimination_area(self) -> float:
        return self.elimination_ratio * self.min_area

    @property
    def big_area(self) -> float:
        return self.big_factor * self.min_area


class ActionKind(str, Enum):
    ENLARGE = "Enlarge"
    SIMPLIFY_GRANULARITY = "SimplifyGranularity"
    SQUARE = "Square"
    ELIMINATE = "Eliminate"
    DISPLACE_MEMBERS = "DisplaceMembers"
    ELIMINATE_SMALLEST = "EliminateSmallest"
    MERGE_OVERLAPPING = "MergeOverlapping"


MICRO_ACTIONS = frozenset({ActionKind.ENLARGE, ActionKind.SIMPLIFY_GRANULARITY, ActionKind.SQUARE, ActionKind.ELIMINATE})
MESO_ACTIONS = frozenset({ActionKind.DISPLACE_MEMBERS, ActionKind.ELIMINATE_SMALLEST, ActionKind.MERGE_OVERLAPPING})


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    params: tuple = ()

    def param(self, name, default=None):
        return dict(self.params).get(name, default)


@dataclass(frozen=True)
class ShapeMeasures:
    area: float
    shortest_edge: float
    squareness_dev: float
    convexity: float
    elongation: float


@dataclass
class ConstraintReport:
    satisfaction: dict[str, float]
    proposals: list[Action] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    measures: Optional[ShapeMeasures] = None

    @property
    def importance(self) -> dict[str, float]:
        return {k: IMPORTANCE[k] for k in self.satisfaction}

    @property
    def aggregate(self) -> float:
        w = self.importance
        total = sum(w.values())
        return sum(w[k] * v for k, v in self.satisfaction.items()) / total


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _rank(satisfaction: dict[str, float], order: tuple, proposals_for: Mapping[str, list[Action]]) -> list[Action]:
    ranked = sorted(
        (c for c in order if satisfaction[c] < 1.0 and proposals_for.get(c)),
        key=lambda c: (-IMPORTANCE[c], -(1.0 - satisfaction[c]), order.index(c)),
    )
    out: list[Action] = []
    for c in ranked:
        for a in proposals_for[c]:
            if a not in out:
                out.append(a)
    return out


# ---------------------------------------------------------------------------
# micro agents
# ---------------------------------------------------------------------------


def squareness_deviation(p: Polygon) -> float:
    """Mean deviation (degrees) of each vertex's line angle from 90 or 45.

    The line angle is the undirected angle between a vertex's two edges,
    folded into [0, 90], so 90 and 270 degree corners both read 90 and a
    135 degree chamfer corner reads 45.
    """
    devs = []
    for ring in (p.exterior, *p.interiors):
        pts = np.asarray(ring_coords(ring))
        d_in = pts - np.roll(pts, 1, axis=0)
        d_out = np.roll(pts, -1, axis=0) - pts
        cosang = np.einsum("ij,ij->i", d_in, d_out) / (np.hypot(*d_in.T) * np.hypot(*d_out.T))
        turn = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
        line = np.minimum(turn, 180.0 - turn)
        devs.append(np.minimum(np.abs(line - 90.0), np.abs(line - 45.0)))
    return float(np.concatenate(devs).mean())


def measure_shape(p: Polygon) -> ShapeMeasures:
    a = area(p)
    mbr = min_bounding_rectangle(p)
    return ShapeMeasures(
        area=a,
        shortest_edge=shortest_edge(p),
        squareness_dev=squareness_deviation(p),
        convexity=min(1.0, a / convex_hull(p).area),
        elongation=mbr.height / mbr.width,
    )


def _geom(b) -> Polygon:
    return b.geometry if isinstance(b, Building) else b


def evaluate_building(b, initial: ShapeMeasures, s: ScaleSpec, square_tol: float = DEFAULT_SQUARE_TOL_DEG) -> ConstraintReport:
    m = measure_shape(_geom(b))
    sat = {
        "size": 1.0 if m.area >= s.min_area - AREA_TOL else _clamp01(m.area / s.min_area),
        "granularity": 1.0 if m.shortest_edge >= s.min_edge - 1e-9 else _clamp01(m.shortest_edge / s.min_edge),
        "squareness": 1.0,
        "convexity": _clamp01(1.0 - abs(m.convexity - initial.convexity)),
        "elongation": _clamp01(1.0 - abs(m.elongation - initial.elongation)),
    }
    if initial.squareness_dev < NEAR_RECTILINEAR_DEG:
        sat["squareness"] = 1.0 - _clamp01(m.squareness_dev / SQUARENESS_SPAN_DEG)
    if m.area < s.elimination_area:
        size_action = Action(ActionKind.ELIMINATE)
    else:
        size_action = Action(ActionKind.ENLARGE, (("min_area", s.min_area),))
    proposals = {
        "size": [size_action],
        "granularity": [Action(ActionKind.SIMPLIFY_GRANULARITY, (("min_edge", s.min_edge),))],
        "squareness": [Action(ActionKind.SQUARE, (("tol_deg", square_tol),))],
    }
    return ConstraintReport(sat, _rank(sat, MICRO_CONSTRAINTS, proposals), measures=m)


def action_enlarge(b: Building, min_area: float) -> Building:
    a = area(b.geometry)
    if a <= 0:
        raise GeometryError("cannot enlarge a zero-area building")
    if a >= min_area:
        return b
    k = math.sqrt(min_area / a)
    return b.with_geometry(affinity.scale(b.geometry, k, k, origin="centroid"))


def _snap(theta: float, tol: float) -> float:
    for target in (0.0, 45.0, 90.0, 135.0, 180.0):
        if abs(theta - target) <= tol:
            return target % 180.0
    return theta


def _square_ring(pts: list, tol: float) -> Optional[list]:
    arr = np.asarray(pts, dtype=float)
    nxt = np.roll(arr, -1, axis=0)
    d = nxt - arr
    lengths = np.hypot(*d.T)
    thetas = [_snap(math.degrees(math.atan2(dy, dx)) % 180.0, tol) for dx, dy in d]
    mids = (arr + nxt) / 2
    n = len(pts)
    start = next((i for i in range(n) if abs(thetas[i] - thetas[i - 1]) > 1e-9), None)
    if start is None:
        return None
    lines = []  # (point, theta)
    i = 0
    while i < n:
        k = (start + i) % n
        run = [k]
        while i + len(run) < n and abs(thetas[(start + i + len(run)) % n] - thetas[k]) <= 1e-9:
            run.append((start + i + len(run)) % n)
        w = lengths[run]
        pt = (mids[run] * w[:, None]).sum(axis=0) / w.sum()
        lines.append((pt, thetas[k]))
        i += len(run)
    if len(lines) < 3:
        return None
    out = []
    for j in range(len(lines)):
        (p1, t1), (p2, t2) = lines[j - 1], lines[j]
        u1 = np.array([math.cos(math.radians(t1)), math.sin(math.radians(t1))])
        u2 = np.array([math.cos(math.radians(t2)), math.sin(math.radians(t2))])
        den = u1[0] * u2[1] - u1[1] * u2[0]
        if abs(den) < 1e-12:
            return None
        diff = p2 - p1
        t = (diff[0] * u2[1] - diff[1] * u2[0]) / den
        q = p1 + t * u1
        out.append((float(q[0]), float(q[1])))
    return out


def action_square(b: Building, tol_deg: float = DEFAULT_SQUARE_TOL_DEG) -> Building:
    """Snap edge orientations (in the MBR frame) to multiples of 45 degrees.

    Falls back to the input when the rebuilt outline is invalid. The result
    is rescaled about its centroid to keep the original area.
    """
    p = b.geometry
    angle = min_bounding_rectangle(p).angle
    origin = p.centroid
    rot = affinity.rotate(p, -angle, origin=origin)
    rings = []
    for r in (rot.exterior, *rot.interiors):
        sq = _square_ring(ring_coords(r), tol_deg)
        if sq is None:
            return b
        rings.append(sq)
    cand = Polygon(rings[0], rings[1:])
    if not cand.is_valid or cand.area <= 0:
        return b
    cand = affinity.rotate(cand, angle, origin=origin)
    k = math.sqrt(p.area / cand.area)
    cand = orient(affinity.scale(cand, k, k, origin="centroid"), sign=1.0)
    if not cand.is_valid:
        return b
    return b.with_geometry(cand)


def action_simplify_granularity(b: Building, min_edge: float) -> Building:
    return b.with_geometry(remove_short_edges(b.geometry, min_edge))


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class AgentState:
    geometry: object
    report: ConstraintReport
    parent: Optional["AgentState"] = None
    tried: set = field(default_factory=set)
    action: Optional[Action] = None

    @property
    def aggregate(self) -> float:
        return self.report.aggregate


@dataclass
class SearchResult:
    initial: AgentState
    best: AgentState
    visited: int
    terminal_action: Optional[Action] = None


def best_first_search(
    geometry,
    evaluate: Callable[[object], ConstraintReport],
    apply: Callable[[object, Action], object],
    budget: int,
    terminal: frozenset = frozenset(),
) -> SearchResult:
    """Hill-climbing lifecycle with backtracking and a node budget.

    A child that does not strictly improve on its parent is dropped and the
    parent's next proposal is tried. The search ends on full satisfaction,
    when the current state has no untried proposal left, or on the budget.

    ``apply`` returns the successor geometry, or None when the action does
    not change anything. Executing an action whose kind is in ``terminal``
    ends the search immediately.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    root = AgentState(geometry, evaluate(geometry))
    best = current = root
    visited = 1
    while current.aggregate < 1.0 - EPS:
        untried = [a for a in current.report.proposals if a not in current.tried]
        if not untried:
            break
        action = untried[0]
        current.tried.add(action)
        if action.kind in terminal:
            return SearchResult(root, current, visited, terminal_action=action)
        if visited >= budget:
            break
        nxt = apply(current.geometry, action)
        if nxt is None:
            continue
        child = AgentState(nxt, evaluate(nxt), parent=current, action=action)
        visited += 1
        if child.aggregate > current.aggregate + EPS:
            current = child
            if child.aggregate > best.aggregate:
                best = child
    return SearchResult(root, best, visited)


@dataclass
class BuildingOutcome:
    id: object
    building: Optional[Building]
    eliminated: bool
    initial: ShapeMeasures
    initial_report: ConstraintReport
    report: ConstraintReport
    states_visited: int
    actions: list[Action] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def kept(self) -> bool:
        return not self.eliminated


def _apply_micro(b: Building, action: Action) -> Optional[Building]:
    try:
        if action.kind is ActionKind.ENLARGE:
            out = action_enlarge(b, action.param("min_area"))
        elif action.kind is ActionKind.SQUARE:
            out = action_square(b, action.param("tol_deg"))
        elif action.kind is ActionKind.SIMPLIFY_GRANULARITY:
            out = action_simplify_granularity(b, action.param("min_edge"))
        else:
            raise ValueError(f"not a micro action: {action.kind}")
    except GeometryError:
        return None
    if out is b or out.geometry.equals_exact(b.geometry, 0.0):
        return None
    if not out.geometry.is_valid or out.geometry.area <= 0:
        return None
    return out


def building_lifecycle(b: Building, s: ScaleSpec, budget: int = 30, square_tol: float = DEFAULT_SQUARE_TOL_DEG) -> BuildingOutcome:
    initial = measure_shape(b.geometry)

    def evaluate(x: Building) -> ConstraintReport:
        return evaluate_building(x, initial, s, square_tol)

    if initial.area < s.elimination_area:
        rep = evaluate(b)
        return BuildingOutcome(b.id, None, True, initial, rep, rep, 1, [Action(ActionKind.ELIMINATE)], ["below elimination area"])

    res = best_first_search(b, evaluate, _apply_micro, budget, terminal=frozenset({ActionKind.ELIMINATE}))
    trail = _trail(res.best)
    if res.terminal_action is not None:
        return BuildingOutcome(
            b.id, None, True, initial, res.initial.report, res.best.report, res.visited,
            trail + [res.terminal_action], ["eliminate action executed"],
        )
    report = res.best.report
    notes = []
    if report.satisfaction["size"] < 1.0:
        notes.append("size unresolved: no improving action available")
        report.notes.append(notes[-1])
    return BuildingOutcome(b.id, res.best.geometry, False, initial, res.initial.report, report, res.visited, trail, notes)


def _trail(state: AgentState) -> list[Action]:
    out = []
    while state is not None and state.action is not None:
        out.append(state.action)
        state = state.parent
    return out[::-1]


# ---------------------------------------------------------------------------
# meso agents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MesoState:
    members: tuple  # ((id, Polygon), ...) sorted by id
    eliminated: tuple = ()
    merged: tuple = ()  # ((new_id, (source ids...)), ...)

    @property
    def geoms(self) -> dict:
        return dict(self.members)

    @classmethod
    def of(cls, members: Mapping, eliminated=(), merged=()) -> "MesoState":
        return cls(tuple(sorted(members.items(), key=lambda kv: id_key(kv[0]))), tuple(eliminated), tuple(merged))


def violating_pairs(members: Mapping, sep: float, tol: float = 1e-9) -> list[tuple]:
    """Member id pairs closer than ``sep`` (overlaps included), in id order."""
    ids = sorted(members, key=id_key)
    boxes = {i: members[i].bounds for i in ids}
    out = []
    for n, i in enumerate(ids):
        bi = boxes[i]
        for j in ids[n + 1 :]:
            bj = boxes[j]
            gap = max(bi[0] - bj[2], bj[0] - bi[2], bi[1] - bj[3], bj[1] - bi[3])
            if gap >= sep:
                continue
            if members[i].distance(members[j]) < sep - tol:
                out.append((i, j))
    return out


def _pair_count(n: int) -> int:
    return n * (n - 1) // 2


def evaluate_block(
    blk: Block,
    state: MesoState,
    initial_density: float,
    s: ScaleSpec,
    big_ids: Iterable = (),
    density_tolerance: float = 0.5,
) -> ConstraintReport:
    """Score block density, big-building preservation and proximity.

    Density only proposes elimination once it exceeds the initial density
    by more than ``density_tolerance`` (relative); below that the
    shortfall is still scored.
    """
    members = state.geoms
    sep = s.min_separation
    density = sum(g.area for g in members.values()) / blk.footprint.area
    rel = (density - initial_density) / initial_density if initial_density > 0 else 0.0
    viol = violating_pairs(members, sep)
    pairs = _pair_count(len(members))
    big = set(big_ids)
    sat = {
        "density": 1.0 - _clamp01(rel),
        "preservation": 0.0 if big & set(state.eliminated) else 1.0,
        "proximity": 1.0 - len(viol) / pairs if pairs else 1.0,
    }
    proximity_actions = [Action(ActionKind.DISPLACE_MEMBERS), Action(ActionKind.ELIMINATE_SMALLEST, (("scope", "conflict"),))]
    if any(_overlap_area(members[i], members[j]) > 1e-9 for i, j in viol):
        proximity_actions.append(Action(ActionKind.MERGE_OVERLAPPING))
    proposals = {"proximity": proximity_actions}
    if rel > density_tolerance:
        proposals["density"] = [Action(ActionKind.ELIMINATE_SMALLEST, (("scope", "all"),))]
    rep = ConstraintReport(sat, _rank(sat, MESO_CONSTRAINTS, proposals))
    if viol:
        rep.notes.append(f"{len(viol)} pair(s) closer than {sep:g} m")
    return rep


def _overlap_area(a: Polygon, b: Polygon) -> float:
    if not a.intersects(b):
        return 0.0
    return a.intersection(b).area


def _outside(g: Polygon, region) -> float:
    return g.difference(region).area


def displace_members(
    blk: Block,
    members: Mapping,
    sep: float,
    max_iters: int = 20,
    margin: Optional[float] = None,
) -> tuple[dict, list[tuple]]:
    """Push apart members closer than ``sep``.

    For each violating pair the smaller building (ties: the later id) moves
    away from the larger one along the centroid direction by the missing
    separation plus the overlap depth. A move may not push a building
    further out of the block footprint grown by ``margin`` (default
    ``2 * sep``); such moves are shortened by bisection.
    """
    margin = 2 * sep if margin is None else margin
    region = blk.footprint.buffer(margin) if margin > 0 else blk.footprint
    geoms = dict(members)
    for _ in range(max_iters):
        viol = violating_pairs(geoms, sep)
        if not viol:
            break
        moved = False
        for i, j in viol:
            a, b = geoms[i], geoms[j]
            gap = a.distance(b)
            if gap >= sep - 1e-9:
                continue
            big, small = (i, j) if a.area >= b.area else (j, i)
            g_big, g_small = geoms[big], geoms[small]
            d = np.array([g_small.centroid.x - g_big.centroid.x, g_small.centroid.y - g_big.centroid.y])
            norm = float(np.hypot(*d))
            u = d / norm if norm > 1e-12 else np.array([1.0, 0.0])
            depth = 0.0
            if gap == 0.0:
                inter = g_big.intersection(g_small)
                if not inter.is_empty:
                    proj = np.asarray(_all_coords(inter)) @ u
                    depth = float(proj.max() - proj.min()) if len(proj) else 0.0
            shift = (sep - gap) + depth + 1e-7
            base_out = _outside(g_small, region)

            def fits(t: float) -> bool:
                return _outside(affinity.translate(g_small, *(u * shift * t)), region) <= base_out + 1e-9

            t = 1.0
            if not fits(1.0):
                lo, hi = 0.0, 1.0
                for _ in range(30):
                    mid = (lo + hi) / 2
                    lo, hi = (mid, hi) if fits(mid) else (lo, mid)
                t = lo
            if t > 1e-9:
                geoms[small] = affinity.translate(g_small, *(u * shift * t))
                moved = True
        if not moved:
            break
    return geoms, violating_pairs(geoms, sep)


def _all_coords(g) -> list:
    if hasattr(g, "geoms"):
        return [c for part in g.geoms for c in _all_coords(part)]
    if isinstance(g, Polygon):
        return list(g.exterior.coords) + [c for h in g.interiors for c in h.coords]
    return list(g.coords)


def _merge_overlapping(state: MesoState) -> Optional[MesoState]:
    members = state.geoms
    ids = sorted(members, key=id_key)
    parent = {i: i for i in ids}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for n, i in enumerate(ids):
        for j in ids[n + 1 :]:
            if _overlap_area(members[i], members[j]) > 1e-9:
                parent[find(j)] = find(i)
    groups: dict = {}
    for i in ids:
        groups.setdefault(find(i), []).append(i)
    merged = list(state.merged)
    changed = False
    for root, grp in groups.items():
        if len(grp) < 2:
            continue
        u = boolean_union([members[i] for i in grp])
        if len(u.geoms) != 1:
            continue
        for i in grp:
            del members[i]
        new_id = min(grp, key=id_key)
        members[new_id] = u.geoms[0]
        merged.append((new_id, tuple(grp)))
        changed = True
    if not changed:
        return None
    return MesoState.of(members, state.eliminated, merged)


@dataclass
class GeneralizedBlock:
    block_id: int
    members: dict  # id -> Polygon, survivors after both phases
    eliminated: list
    merged: list
    unresolved: list
    micro: dict  # id -> BuildingOutcome
    phase1_aggregate: float
    aggregate: float
    meso_states: int
    report: ConstraintReport


def block_lifecycle(
    blk: Block,
    buildings: Mapping,
    s: ScaleSpec,
    micro_budget: int = 30,
    meso_budget: int = 50,
    density_tolerance: float = 0.5,
    displace_iters: int = 20,
) -> GeneralizedBlock:
    """Generalise one block: independent member lifecycles, then the block."""
    originals = {i: buildings[i] for i in blk.building_ids}
    initial_density = sum(b.area for b in originals.values()) / blk.footprint.area
    big_ids = frozenset(i for i, b in originals.items() if b.area >= s.big_area)

    micro = {i: building_lifecycle(b, s, micro_budget) for i, b in originals.items()}
    kept = {i: o.building.geometry for i, o in micro.items() if o.kept}
    dropped = tuple(sorted((i for i, o in micro.items() if o.eliminated), key=id_key))
    start = MesoState.of(kept, dropped)
    sep = s.min_separation

    def evaluate(st: MesoState) -> ConstraintReport:
        return evaluate_block(blk, st, initial_density, s, big_ids, density_tolerance)

    def apply(st: MesoState, action: Action) -> Optional[MesoState]:
        members = st.geoms
        if action.kind is ActionKind.DISPLACE_MEMBERS:
            moved, _ = displace_members(blk, members, sep, displace_iters)
            if all(moved[i].equals_exact(members[i], 0.0) for i in members):
                return None
            return MesoState.of(moved, st.eliminated, st.merged)
        if action.kind is ActionKind.ELIMINATE_SMALLEST:
            protected = set(big_ids)
            for new_id, src in st.merged:
                if protected & set(src):
                    protected.add(new_id)
            pool = members.keys()
            if action.param("scope") == "conflict":
                pool = {i for pair in violating_pairs(members, sep) for i in pair}
            cands = [i for i in pool if i not in protected]
            if not cands:
                return None
            victim = min(cands, key=lambda i: (members[i].area, id_key(i)))
            del members[victim]
            return MesoState.of(members, st.eliminated + (victim,), st.merged)
        if action.kind is ActionKind.MERGE_OVERLAPPING:
            return _merge_overlapping(st)
        raise ValueError(f"not a meso action: {action.kind}")

    res = best_first_search(start, evaluate, apply, meso_budget)
    final: MesoState = res.best.geometry
    members = final.geoms
    return GeneralizedBlock(
        block_id=blk.id,
        members=members,
        eliminated=list(final.eliminated),
        merged=list(final.merged),
        unresolved=violating_pairs(members, sep),
        micro=micro,
        phase1_aggregate=res.initial.aggregate,
        aggregate=res.best.aggregate,
        meso_states=res.visited,
        report=res.best.report,
    )
