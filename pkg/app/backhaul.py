"""Wireless backhaul capacity, blocking probability and coverage budgets."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.errors import DomainError
from app.instance import ordered_sites
from app.radio import CoverageThresholds, compute_thresholds, mean_path_loss, p_los
from models import ChannelParams, Instance, RadioParams, UserParams

logger = logging.getLogger(__name__)

TAIL_RESIDUAL = 1e-12
MAX_SUBAREAS_SEARCH = 1_000_000


@dataclass(frozen=True)
class BackhaulLink:
    ban_id: str
    sc_id: str
    ban_index: int
    sc_index: int
    distance_m: float
    capacity_bps: float
    n_ki: int


@dataclass(frozen=True)
class LinkTable:
    """All usable BAN -> SCBS links of an instance, keyed by solver indices."""

    links: Tuple[BackhaulLink, ...]
    thresholds: CoverageThresholds
    by_pair: Dict[Tuple[int, int], BackhaulLink] = field(default_factory=dict)

    def link(self, sc_index: int, ban_index: int) -> Optional[BackhaulLink]:
        return self.by_pair.get((sc_index, ban_index))

    def budget(self, sc_index: int, ban_index: int) -> int:
        link = self.by_pair.get((sc_index, ban_index))
        return link.n_ki if link else 0

    def bans_for(self, sc_index: int) -> List[int]:
        return sorted(k for (i, k) in self.by_pair if i == sc_index)


def shannon_capacity(snr_db: float, bandwidth_hz: float) -> float:
    return bandwidth_hz * math.log2(1.0 + 10.0 ** (snr_db / 10.0))


def link_capacity(
    d: float,
    backhaul_channel: ChannelParams,
    radio: RadioParams,
    max_distance_m: Optional[float] = None,
) -> Optional[float]:
    """Shannon capacity on the LOS-probability-weighted mean path loss.

    Returns None (no link) when d exceeds max_distance_m.
    """
    if d <= 0:
        raise DomainError(f"link distance must be positive, got {d}")
    if max_distance_m is not None and d > max_distance_m:
        return None
    los = p_los(d, backhaul_channel)
    expected_loss = los * mean_path_loss(d, backhaul_channel, los=True) + (1.0 - los) * mean_path_loss(
        d, backhaul_channel, los=False
    )
    snr_db = radio.tx_power_dbm + radio.backhaul_antenna_gain_db - expected_loss - radio.noise_dbm
    return shannon_capacity(snr_db, radio.backhaul_bandwidth_hz)


def _poisson_log_pmf(q: int, lam: float) -> float:
    return q * math.log(lam) - lam - math.lgamma(q + 1)


def poisson_tail(lam: float, k: int) -> float:
    """P(Q >= k) for Q ~ Poisson(lam), by direct summation."""
    if k <= 0:
        return 1.0
    if lam == 0:
        return 0.0
    if k <= lam:
        head = math.fsum(math.exp(_poisson_log_pmf(q, lam)) for q in range(k))
        return min(1.0, max(0.0, 1.0 - head))
    # Terms decrease past the mode; stop once the geometric bound on the rest is negligible.
    term = math.exp(_poisson_log_pmf(k, lam))
    terms = [term]
    total = term
    q = k
    while True:
        q += 1
        term *= lam / q
        terms.append(term)
        total += term
        ratio = lam / (q + 1)
        if term * ratio / (1.0 - ratio) <= TAIL_RESIDUAL * total:
            break
    return min(1.0, math.fsum(terms))


def blocking_probability(mean_users: float, capacity_bps: float, rate_demand_bps: float) -> float:
    """Probability that the aggregate constant-rate demand reaches the link capacity."""
    if mean_users < 0 or capacity_bps < 0 or rate_demand_bps <= 0:
        raise DomainError(
            f"invalid blocking inputs: mean_users={mean_users}, capacity={capacity_bps}, "
            f"rate={rate_demand_bps}"
        )
    if mean_users == 0:
        return 0.0
    users_to_block = max(1, math.ceil(capacity_bps / rate_demand_bps - 1e-9))
    return poisson_tail(mean_users, users_to_block)


def max_subareas(
    capacity_bps: float,
    users: UserParams,
    subarea_area_m2: float,
    limit: Optional[int] = None,
) -> int:
    """Largest subarea count whose user load keeps blocking within p_bb (N_ki)."""
    if subarea_area_m2 <= 0:
        raise DomainError(f"subarea area must be positive, got {subarea_area_m2}")
    ceiling = MAX_SUBAREAS_SEARCH if limit is None else limit
    per_subarea = users.density_per_m2 * subarea_area_m2

    def fits(n: int) -> bool:
        return blocking_probability(per_subarea * n, capacity_bps, users.rate_demand_bps) <= users.block_prob_max

    if per_subarea == 0 or fits(ceiling):
        return ceiling
    # Blocking is nondecreasing in n: gallop to a failing count, then bisect.
    low, high = 0, 1
    while fits(high):
        low, high = high, min(high * 2, ceiling)
    while high - low > 1:
        mid = (low + high) // 2
        if fits(mid):
            low = mid
        else:
            high = mid
    return low


def build_links(instance: Instance) -> LinkTable:
    """Precompute every BAN -> SCBS link within backhaul range, with capacity and N_ki."""
    thresholds = compute_thresholds(instance)
    sc_sites, ban_sites = ordered_sites(instance)
    overrides = {(o.ban_id, o.sc_id): o.capacity_bps for o in instance.capacity_overrides}
    subarea_area = instance.area.subarea_area
    total = instance.area.subarea_count

    links = []
    for k, ban in enumerate(ban_sites):
        for i, sc in enumerate(sc_sites):
            distance = math.hypot(ban.x - sc.x, ban.y - sc.y)
            if (ban.id, sc.id) in overrides:
                capacity = overrides[(ban.id, sc.id)]
            elif 0 < thresholds.d_max_backhaul_m and distance <= thresholds.d_max_backhaul_m:
                capacity = link_capacity(
                    max(distance, instance.backhaul_channel.ref_dist_m),
                    instance.backhaul_channel,
                    instance.radio,
                )
            else:
                capacity = None
            if capacity is None:
                continue
            links.append(
                BackhaulLink(
                    ban_id=ban.id,
                    sc_id=sc.id,
                    ban_index=k,
                    sc_index=i,
                    distance_m=distance,
                    capacity_bps=capacity,
                    n_ki=max_subareas(capacity, instance.users, subarea_area, limit=total),
                )
            )
    logger.info(
        f"Built {len(links)} backhaul links for {len(sc_sites)} SCBS and {len(ban_sites)} BAN candidates"
    )
    return LinkTable(
        links=tuple(links),
        thresholds=thresholds,
        by_pair={(link.sc_index, link.ban_index): link for link in links},
    )
