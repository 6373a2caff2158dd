"""Decision variables, objectives, feasibility and the inner coverage assignment.

Base stations share one index space: SCBS candidate i is index i and BAN
candidate k is index n_sc + k, both in site-id order.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from app.backhaul import LinkTable, blocking_probability, build_links
from app.errors import DeploymentSizeError
from app.instance import ordered_sites, subarea_centers
from app.radio import CoverageThresholds, outage_probability
from models import Instance, Site

logger = logging.getLogger(__name__)

NONE = -1
COST_TOLERANCE = 1e-9
DISTANCE_TOLERANCE = 1e-9
RETAINED_CONSTRAINTS = frozenset({"size", "3", "4", "5", "6", "7", "9", "14", "15"})


class ObjectiveVector(NamedTuple):
    cost: float
    uncovered: int


@dataclass(frozen=True)
class Deployment:
    """Open flags y (SCBS) and z (BAN), SCBS -> BAN backhaul and subarea coverage."""

    y: Tuple[bool, ...]
    z: Tuple[bool, ...]
    sc_to_ban: Tuple[int, ...]
    coverage: Tuple[int, ...]

    @property
    def key(self) -> Tuple[Tuple[bool, ...], Tuple[bool, ...]]:
        return (self.y, self.z)

    def open_sc(self) -> List[int]:
        return [i for i, is_open in enumerate(self.y) if is_open]

    def open_ban(self) -> List[int]:
        return [k for k, is_open in enumerate(self.z) if is_open]


@dataclass(frozen=True)
class Violation:
    constraint: str
    ids: Tuple[str, ...]
    detail: str = ""


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: Tuple[Violation, ...]

    def constraints(self) -> set:
        return {violation.constraint for violation in self.violations}


@dataclass(frozen=True)
class Problem:
    """Immutable, precomputed view of an instance shared by every solver component."""

    instance: Instance
    sc_sites: Tuple[Site, ...]
    ban_sites: Tuple[Site, ...]
    centers: np.ndarray
    distances: np.ndarray
    in_range: np.ndarray
    reach: Tuple[Tuple[int, ...], ...]
    access_limits: Tuple[float, ...]
    costs: Tuple[float, ...]
    thresholds: CoverageThresholds
    links: LinkTable
    ban_options: Tuple[Tuple[int, ...], ...]

    @property
    def n_sc(self) -> int:
        return len(self.sc_sites)

    @property
    def n_ban(self) -> int:
        return len(self.ban_sites)

    @property
    def n_bs(self) -> int:
        return self.n_sc + self.n_ban

    @property
    def subarea_count(self) -> int:
        return len(self.centers)

    @property
    def nb_max(self) -> int:
        return self.instance.nb_max

    def ban_bs(self, k: int) -> int:
        return self.n_sc + k

    def is_ban(self, bs: int) -> bool:
        return bs >= self.n_sc

    def site(self, bs: int) -> Site:
        return self.sc_sites[bs] if bs < self.n_sc else self.ban_sites[bs - self.n_sc]

    def site_id(self, bs: int) -> str:
        return self.site(bs).id

    def total_cost(self) -> float:
        return math.fsum(self.costs)

    def min_site_cost(self, positive: bool = True) -> Optional[float]:
        values = [c for c in self.costs if c > 0 or not positive]
        return min(values) if values else None


def prepare(instance: Instance) -> Problem:
    """Sort sites, compute distances, access reach and the backhaul link table."""
    sc_sites, ban_sites = ordered_sites(instance)
    sites = sc_sites + ban_sites
    centers = np.asarray(subarea_centers(instance.area), dtype=float).reshape(-1, 2)
    positions = np.asarray([(site.x, site.y) for site in sites], dtype=float).reshape(-1, 2)
    distances = np.hypot(
        positions[:, None, 0] - centers[None, :, 0], positions[:, None, 1] - centers[None, :, 1]
    )

    links = build_links(instance)
    limits = tuple(
        site.coverage_distance_m if site.coverage_distance_m is not None else links.thresholds.d_max_access_m
        for site in sites
    )
    in_range = np.zeros(distances.shape, dtype=bool)
    reach = []
    for bs, limit in enumerate(limits):
        if limit > 0:
            in_range[bs] = distances[bs] <= limit + DISTANCE_TOLERANCE
        members = np.flatnonzero(in_range[bs])
        order = np.lexsort((members, distances[bs, members]))
        reach.append(tuple(int(j) for j in members[order]))

    ban_options = tuple(tuple(links.bans_for(i)) for i in range(len(sc_sites)))
    logger.info(
        f"Prepared problem: {len(centers)} subareas, {len(sc_sites)} SCBS and "
        f"{len(ban_sites)} BAN candidates, access reach {links.thresholds.d_max_access_m} m"
    )
    return Problem(
        instance=instance,
        sc_sites=tuple(sc_sites),
        ban_sites=tuple(ban_sites),
        centers=centers,
        distances=distances,
        in_range=in_range,
        reach=tuple(reach),
        access_limits=limits,
        costs=tuple(site.cost for site in sites),
        thresholds=links.thresholds,
        links=links,
        ban_options=ban_options,
    )


def empty_deployment(problem: Problem) -> Deployment:
    return Deployment(
        y=(False,) * problem.n_sc,
        z=(False,) * problem.n_ban,
        sc_to_ban=(NONE,) * problem.n_sc,
        coverage=(NONE,) * problem.subarea_count,
    )


def _sized(deployment: Deployment, problem: Problem) -> bool:
    return (
        len(deployment.y) == problem.n_sc
        and len(deployment.z) == problem.n_ban
        and len(deployment.sc_to_ban) == problem.n_sc
        and len(deployment.coverage) == problem.subarea_count
    )


def deployment_cost(y: Sequence[bool], z: Sequence[bool], problem: Problem) -> float:
    opened = [problem.costs[i] for i, is_open in enumerate(y) if is_open]
    opened += [problem.costs[problem.n_sc + k] for k, is_open in enumerate(z) if is_open]
    return math.fsum(opened)


def evaluate(deployment: Deployment, problem: Problem) -> ObjectiveVector:
    """Deployment cost f1 and uncovered-subarea count f2."""
    if not _sized(deployment, problem):
        raise DeploymentSizeError(
            f"deployment sized ({len(deployment.y)}, {len(deployment.z)}, {len(deployment.coverage)}) "
            f"but problem has ({problem.n_sc}, {problem.n_ban}, {problem.subarea_count})"
        )
    covered = sum(1 for bs in deployment.coverage if bs != NONE)
    return ObjectiveVector(
        cost=deployment_cost(deployment.y, deployment.z, problem),
        uncovered=problem.subarea_count - covered,
    )


def coverage_counts(deployment: Deployment, problem: Problem) -> List[int]:
    counts = [0] * problem.n_bs
    for bs in deployment.coverage:
        if 0 <= bs < problem.n_bs:
            counts[bs] += 1
    return counts


def fan_out(deployment: Deployment, problem: Problem) -> List[int]:
    counts = [0] * problem.n_ban
    for k in deployment.sc_to_ban:
        if 0 <= k < problem.n_ban:
            counts[k] += 1
    return counts


def check_feasible(
    deployment: Deployment, problem: Problem, cost_cap: Optional[float] = None
) -> FeasibilityReport:
    """Check every constraint of the deployment problem and list the violations.

    Constraint ids: 3/4 coverage by closed sites, 5 backhaul from a closed BAN,
    6 one BS per subarea, 7 outage, 8 BAN fan-out, 9 backhaul for every open SCBS,
    10 blocking (or no link), 12 coverage budget, 14 coverage distance, 15 cost cap.
    """
    if not _sized(deployment, problem):
        return FeasibilityReport(False, (Violation("size", (), "deployment does not match instance"),))

    violations: List[Violation] = []
    instance = problem.instance

    for i, ban in enumerate(deployment.sc_to_ban):
        sc_id = problem.sc_sites[i].id
        if ban == NONE:
            if deployment.y[i]:
                violations.append(Violation("9", (sc_id,), "deployed SCBS has no backhaul BAN"))
            continue
        if not 0 <= ban < problem.n_ban:
            violations.append(Violation("5", (sc_id, str(ban)), "unknown BAN index"))
            continue
        ban_id = problem.ban_sites[ban].id
        if not deployment.y[i]:
            violations.append(Violation("9", (sc_id, ban_id), "closed SCBS holds a backhaul link"))
        if not deployment.z[ban]:
            violations.append(Violation("5", (sc_id, ban_id), "backhaul from a closed BAN"))
        if problem.links.link(i, ban) is None:
            violations.append(Violation("10", (sc_id, ban_id), "no backhaul link"))

    for k, count in enumerate(fan_out(deployment, problem)):
        if count > problem.nb_max:
            violations.append(
                Violation("8", (problem.ban_sites[k].id,), f"serves {count} > {problem.nb_max} SCBSs")
            )

    for j, bs in enumerate(deployment.coverage):
        if bs == NONE:
            continue
        if not 0 <= bs < problem.n_bs:
            violations.append(Violation("6", (str(j),), f"unknown covering BS {bs}"))
            continue
        site_id = problem.site_id(bs)
        if problem.is_ban(bs):
            if not deployment.z[bs - problem.n_sc]:
                violations.append(Violation("4", (site_id, str(j)), "coverage by a closed BAN"))
        elif not deployment.y[bs]:
            violations.append(Violation("3", (site_id, str(j)), "coverage by a closed SCBS"))
        if not problem.in_range[bs, j]:
            distance = float(problem.distances[bs, j])
            violations.append(
                Violation("14", (site_id, str(j)), f"distance {distance:.2f} m > {problem.access_limits[bs]} m")
            )
            p_out = outage_probability(
                max(distance, instance.access_channel.ref_dist_m), instance.access_channel, instance.radio
            )
            if p_out > instance.radio.outage_max:
                violations.append(Violation("7", (site_id, str(j)), f"outage {p_out:.4f}"))

    counts = coverage_counts(deployment, problem)
    mean_per_subarea = instance.users.density_per_m2 * instance.area.subarea_area
    for i in range(problem.n_sc):
        ban = deployment.sc_to_ban[i]
        covered = counts[i]
        if covered == 0:
            continue
        link = problem.links.link(i, ban) if 0 <= ban < problem.n_ban else None
        budget = link.n_ki if link else 0
        sc_id = problem.sc_sites[i].id
        if covered > budget:
            violations.append(Violation("12", (sc_id,), f"covers {covered} > N_ki {budget}"))
        if link is not None:
            blocking = blocking_probability(
                mean_per_subarea * covered, link.capacity_bps, instance.users.rate_demand_bps
            )
            if blocking > instance.users.block_prob_max:
                violations.append(Violation("10", (sc_id, link.ban_id), f"blocking {blocking:.4f}"))

    if cost_cap is not None:
        cost = deployment_cost(deployment.y, deployment.z, problem)
        if cost > cost_cap + COST_TOLERANCE:
            violations.append(Violation("15", (), f"cost {cost} > cap {cost_cap}"))

    return FeasibilityReport(not violations, tuple(violations))


def retained_violations(
    deployment: Deployment, problem: Problem, cost_cap: Optional[float] = None
) -> List[str]:
    """Ids of violated constraints that no relaxation drops, plus "10" for an assignment without a link.

    Fan-out (8), blocking (10) and the coverage budget (12) are left out.
    """
    report = check_feasible(deployment, problem, cost_cap)
    broken = sorted({v.constraint for v in report.violations if v.constraint in RETAINED_CONSTRAINTS})
    if "size" in broken:
        return broken
    for i, k in enumerate(deployment.sc_to_ban):
        if 0 <= k < problem.n_ban and problem.links.link(i, k) is None:
            broken.append("10")
            break
    return broken


def assign_coverage(
    open_y: Sequence[bool],
    open_z: Sequence[bool],
    sc_to_ban: Sequence[int],
    problem: Problem,
    budgets: Optional[Sequence[int]] = None,
) -> Tuple[int, ...]:
    """Maximum coverage for fixed open sites, seeded by a deterministic greedy.

    BANs claim every in-range uncovered subarea first. SCBSs then claim in-range
    uncovered subareas nearest-first up to their N_ki budget, the SCBS with the
    most uncovered subareas in range going first (ties by index). When the
    greedy leaves a reachable subarea uncovered and a maximum flow covers
    strictly more, the flow assignment is used instead, so the covered count
    is optimal for the given budgets.
    """
    coverage = [NONE] * problem.subarea_count
    for k, is_open in enumerate(open_z):
        if not is_open:
            continue
        bs = problem.ban_bs(k)
        for j in problem.reach[bs]:
            if coverage[j] == NONE:
                coverage[j] = bs

    remaining: Dict[int, int] = {}
    for i, is_open in enumerate(open_y):
        if not is_open or sc_to_ban[i] == NONE:
            continue
        budget = budgets[i] if budgets is not None else problem.links.budget(i, sc_to_ban[i])
        if budget > 0:
            remaining[i] = budget
    capacities = dict(remaining)

    while remaining:
        residual = {i: sum(1 for j in problem.reach[i] if coverage[j] == NONE) for i in remaining}
        chosen = max(remaining, key=lambda i: (residual[i], -i))
        if residual[chosen] == 0:
            break
        budget = remaining.pop(chosen)
        for j in problem.reach[chosen]:
            if budget == 0:
                break
            if coverage[j] == NONE:
                coverage[j] = chosen
                budget -= 1

    reachable = {j for i in capacities for j in problem.reach[i]}
    if any(coverage[j] == NONE for j in reachable):
        open_bs = sorted(capacities) + [problem.ban_bs(k) for k, is_open in enumerate(open_z) if is_open]
        covered, optimal = max_coverage(open_bs, capacities, problem)
        if covered > sum(1 for bs in coverage if bs != NONE):
            return optimal
    return tuple(coverage)


def max_coverage(
    open_bs: Sequence[int], budgets: Dict[int, int], problem: Problem
) -> Tuple[int, Tuple[int, ...]]:
    """Largest number of subareas the open sites can cover, and one coverage achieving it.

    budgets maps SCBS index -> N_ki; BANs are uncapped. Solved as a maximum
    flow source -> site -> subarea -> sink.
    """
    S = problem.subarea_count
    coverage = [NONE] * S
    if not open_bs or S == 0:
        return 0, tuple(coverage)
    n_open = len(open_bs)
    source, sink = 0, 1 + n_open + S
    rows, cols, caps = [], [], []
    for n, bs in enumerate(open_bs):
        cap = S if problem.is_ban(bs) else min(budgets.get(bs, 0), S)
        if cap <= 0:
            continue
        rows.append(source)
        cols.append(1 + n)
        caps.append(cap)
        for j in np.flatnonzero(problem.in_range[bs]):
            rows.append(1 + n)
            cols.append(1 + n_open + int(j))
            caps.append(1)
    for j in range(S):
        rows.append(1 + n_open + j)
        cols.append(sink)
        caps.append(1)
    graph = csr_matrix(
        (np.asarray(caps, dtype=np.int32), (np.asarray(rows), np.asarray(cols))),
        shape=(sink + 1, sink + 1),
    )
    result = maximum_flow(graph, source, sink)
    flow = result.flow.tocoo()
    for r, c, f in zip(flow.row, flow.col, flow.data):
        if f > 0 and 1 <= r <= n_open and c > n_open:
            coverage[c - 1 - n_open] = open_bs[r - 1]
    return int(result.flow_value), tuple(coverage)


def assign_backhaul(
    y: Sequence[bool],
    z: Sequence[bool],
    problem: Problem,
    priority: Optional[Sequence[float]] = None,
) -> Tuple[Tuple[bool, ...], Tuple[int, ...]]:
    """Connect open SCBSs to open BANs within the N_b fan-out, closing the ones that cannot fit.

    SCBSs without any in-range open BAN close first. While the open BANs offer
    fewer slots than there are open SCBSs, the SCBS with the lowest priority
    closes. The rest are assigned, fewest options first, to the in-range BAN
    with the largest N_ki that still has a free slot.
    """
    if priority is None:
        priority = [len(problem.reach[i]) for i in range(problem.n_sc)]
    y = list(y)
    options = {}
    for i in range(problem.n_sc):
        if y[i]:
            choices = [k for k in problem.ban_options[i] if z[k]]
            if choices:
                options[i] = choices
            else:
                y[i] = False

    slots = problem.nb_max * sum(1 for is_open in z if is_open)
    while len(options) > slots:
        weakest = min(options, key=lambda i: (priority[i], i))
        del options[weakest]
        y[weakest] = False

    load = [0] * problem.n_ban
    sc_to_ban = [NONE] * problem.n_sc
    for i in sorted(options, key=lambda i: (len(options[i]), i)):
        free = [k for k in options[i] if load[k] < problem.nb_max]
        if not free:
            y[i] = False
            continue
        ban = max(free, key=lambda k: (problem.links.budget(i, k), -k))
        sc_to_ban[i] = ban
        load[ban] += 1
    return tuple(y), tuple(sc_to_ban)


def complete_deployment(
    y: Sequence[bool],
    z: Sequence[bool],
    problem: Problem,
    priority: Optional[Sequence[float]] = None,
) -> Deployment:
    """Feasible deployment for the given open flags: backhaul assignment then greedy coverage."""
    y2, sc_to_ban = assign_backhaul(y, z, problem, priority)
    z2 = tuple(bool(v) for v in z)
    return Deployment(y=y2, z=z2, sc_to_ban=sc_to_ban, coverage=assign_coverage(y2, z2, sc_to_ban, problem))
