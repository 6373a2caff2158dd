"""Nondominated archive and the two-level (BAN / SCBS) tabu search."""

import logging
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.errors import InfeasibleStartError
from app.model import (
    COST_TOLERANCE,
    Deployment,
    ObjectiveVector,
    Problem,
    check_feasible,
    complete_deployment,
    evaluate,
)
from app.tabu import SCOPE_BAN, SCOPE_SC, Candidate, default_tenure, flipped_sites, memoize_builder, moves
from models import TabuLimits

logger = logging.getLogger(__name__)


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    return a.cost <= b.cost and a.uncovered <= b.uncovered and (a.cost < b.cost or a.uncovered < b.uncovered)


@dataclass
class ParetoArchive:
    """Mutually nondominated (objective, deployment) pairs in ascending cost order."""

    entries: List[Tuple[ObjectiveVector, Deployment]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def insert(self, objective: ObjectiveVector, deployment: Deployment) -> bool:
        objective = ObjectiveVector(float(objective.cost), int(objective.uncovered))
        for existing, _ in self.entries:
            if existing == objective or dominates(existing, objective):
                return False
        self.entries = [(o, d) for o, d in self.entries if not dominates(objective, o)]
        self.entries.append((objective, deployment))
        self.entries.sort(key=lambda entry: (entry[0].cost, entry[0].uncovered))
        return True

    def merge(self, other: "ParetoArchive") -> int:
        """Insert every entry of another archive; returns how many were accepted."""
        return sum(1 for objective, deployment in other.entries if self.insert(objective, deployment))

    def vectors(self) -> List[ObjectiveVector]:
        return [objective for objective, _ in self.entries]

    def deployments(self) -> List[Deployment]:
        return [deployment for _, deployment in self.entries]

    def min_uncovered_within(self, cost_cap: float) -> Optional[int]:
        values = [o.uncovered for o, _ in self.entries if o.cost <= cost_cap + COST_TOLERANCE]
        return min(values) if values else None

    def best_within(self, cost_cap: float) -> Optional[Tuple[ObjectiveVector, Deployment]]:
        within = [entry for entry in self.entries if entry[0].cost <= cost_cap + COST_TOLERANCE]
        return min(within, key=lambda entry: (entry[0].uncovered, entry[0].cost)) if within else None

    def max_cost_entry(self) -> Optional[Tuple[ObjectiveVector, Deployment]]:
        return self.entries[-1] if self.entries else None


def nondominated(vectors: Iterable[ObjectiveVector]) -> List[ObjectiveVector]:
    archive = ParetoArchive()
    for vector in vectors:
        archive.insert(vector, None)
    return archive.vectors()


def hypervolume(vectors: Sequence[ObjectiveVector], reference: Tuple[float, float]) -> float:
    """Area dominated by the vectors and bounded by the reference point (both objectives minimised)."""
    ref_cost, ref_uncovered = reference
    points = [v for v in nondominated(vectors) if v.cost <= ref_cost and v.uncovered <= ref_uncovered]
    area = 0.0
    for n, point in enumerate(points):
        next_cost = points[n + 1].cost if n + 1 < len(points) else ref_cost
        area += (next_cost - point.cost) * (ref_uncovered - point.uncovered)
    return area


@dataclass
class _Level:
    tenure: int
    tabu_list: Dict[int, int] = field(default_factory=dict)
    iteration: int = 0

    def is_tabu(self, site: int) -> bool:
        return self.tabu_list.get(site, 0) > self.iteration

    def record(self, before: Deployment, after: Deployment) -> None:
        self.iteration += 1
        for b in flipped_sites(before, after):
            self.tabu_list[b] = self.iteration + self.tenure


def _in_window(objective: ObjectiveVector, eps: float, delta_eps: float) -> bool:
    return eps - delta_eps - COST_TOLERANCE <= objective.cost <= eps + COST_TOLERANCE


def _next_pivot(
    pivot: Deployment,
    candidates: Sequence[Candidate],
    objectives: Sequence[ObjectiveVector],
    level: _Level,
    eps: float,
    delta_eps: float,
) -> Deployment:
    allowed = [
        n for n, candidate in enumerate(candidates)
        if not any(level.is_tabu(b) for b in flipped_sites(pivot, candidate.deployment))
    ]
    if not allowed:
        return pivot
    windowed = [n for n in allowed if _in_window(objectives[n], eps, delta_eps)]
    pool = windowed or allowed
    n = min(pool, key=lambda n: (objectives[n].uncovered, objectives[n].cost, n))
    return candidates[n].deployment


def two_level_search(
    start: Deployment,
    problem: Problem,
    eps: float,
    delta_eps: float,
    limits: TabuLimits,
    rng: random.Random,
) -> ParetoArchive:
    """Harvest nondominated deployments with cost in [eps - delta_eps, eps].

    The outer level flips BANs with the SCBS vector fixed; after every outer
    move the inner level runs N_t2 SCBS moves with the BAN vector fixed and its
    final pivot becomes the next outer pivot. Every candidate is completed to a
    feasible deployment. The start is always archived.

    Raises:
        InfeasibleStartError: the start fails the feasibility check under eps.
    """
    report = check_feasible(start, problem, eps)
    if not report.feasible:
        raise InfeasibleStartError(f"two-level search start violates constraints {sorted(report.constraints())}")

    tenure = limits.tenure if limits.tenure is not None else default_tenure(problem)
    builder = memoize_builder(lambda y, z: complete_deployment(y, z, problem))
    harvest = ParetoArchive()
    harvest.insert(evaluate(start, problem), start)
    outer, inner = _Level(tenure), _Level(tenure)

    def step(pivot: Deployment, scope: str, level: _Level) -> Deployment:
        candidates = moves(pivot, problem, eps, builder, rng, limits.n_swap, scope=scope)
        objectives = [evaluate(candidate.deployment, problem) for candidate in candidates]
        for candidate, objective in zip(candidates, objectives):
            if _in_window(objective, eps, delta_eps):
                harvest.insert(objective, candidate.deployment)
        chosen = _next_pivot(pivot, candidates, objectives, level, eps, delta_eps)
        level.record(pivot, chosen)
        return chosen

    pivot = start
    for _ in range(limits.n_t1):
        pivot = step(pivot, SCOPE_BAN, outer)
        for _ in range(limits.n_t2):
            pivot = step(pivot, SCOPE_SC, inner)

    logger.debug(f"Two-level search at eps={eps}: harvested {len(harvest)} nondominated points")
    return harvest
