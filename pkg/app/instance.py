"""Instance generation, geometry and (de)serialization."""

import hashlib
import json
import logging
import random
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import ValidationError

from app.errors import InstanceValidationError
from models import AreaSpec, Instance, InstanceDefaults, Site, SiteKind

logger = logging.getLogger(__name__)


def subarea_centers(area: AreaSpec) -> List[Tuple[float, float]]:
    """Centers of all subareas in row-major order (x varies fastest)."""
    side = area.subarea_side
    return [
        ((col + 0.5) * side, (row + 0.5) * side)
        for row in range(area.rows)
        for col in range(area.columns)
    ]


def generate_instance(
    area: AreaSpec,
    n_sc: int,
    n_ban: int,
    seed: int,
    defaults: Optional[InstanceDefaults] = None,
) -> Instance:
    """Place candidate sites uniformly on distinct subarea centers.

    Raises:
        InstanceValidationError: negative counts or more sites than subareas.
    """
    if n_sc < 0 or n_ban < 0:
        raise InstanceValidationError(f"site counts must be nonnegative (sc={n_sc}, ban={n_ban})")
    defaults = defaults or InstanceDefaults()
    centers = subarea_centers(area)
    requested = n_sc + n_ban
    if requested > len(centers):
        raise InstanceValidationError(
            f"requested {requested} candidate sites but the area only has "
            f"{len(centers)} subareas"
        )

    rng = random.Random(seed)
    chosen = rng.sample(range(len(centers)), requested)
    sc_sites = [
        Site(
            id=f"SC{number:03d}",
            x=centers[index][0],
            y=centers[index][1],
            cost=defaults.sc_cost,
            kind=SiteKind.SC_CANDIDATE,
        )
        for number, index in enumerate(chosen[:n_sc], start=1)
    ]
    ban_sites = [
        Site(
            id=f"BAN{number:02d}",
            x=centers[index][0],
            y=centers[index][1],
            cost=defaults.ban_cost,
            kind=SiteKind.BAN_CANDIDATE,
        )
        for number, index in enumerate(chosen[n_sc:], start=1)
    ]
    logger.debug(f"Generated {n_sc} SCBS and {n_ban} BAN candidates with seed {seed}")
    return Instance(
        area=area,
        sc_sites=sc_sites,
        ban_sites=ban_sites,
        access_channel=defaults.access_channel.model_copy(),
        backhaul_channel=defaults.backhaul_channel.model_copy(),
        radio=defaults.radio.model_copy(),
        users=defaults.users.model_copy(),
        nb_max=defaults.nb_max,
    )


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ())) or "instance"
        parts.append(f"{location}: {item.get('msg')}")
    return "; ".join(parts)


def parse_instance(data: dict) -> Instance:
    """Validate a decoded instance document."""
    try:
        return Instance.model_validate(data)
    except ValidationError as e:
        raise InstanceValidationError(f"Invalid instance: {_describe(e)}") from e


def instance_to_json(instance: Instance) -> str:
    return json.dumps(instance.model_dump(mode="json"), indent=2, sort_keys=False) + "\n"


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(instance_to_json(instance))
    logger.info(f"Wrote instance to {path}")


def load_instance(path) -> Instance:
    """Read and validate an instance file.

    Raises:
        InstanceValidationError: unreadable JSON, schema violation or broken invariant.
    """
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise InstanceValidationError(f"Instance file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InstanceValidationError(f"Instance file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise InstanceValidationError(f"Instance file {path} must contain a JSON object")
    return parse_instance(data)


def instance_sha256(instance: Instance) -> str:
    return hashlib.sha256(instance_to_json(instance).encode("utf-8")).hexdigest()


def instance_schema() -> dict:
    """JSON schema of the instance file."""
    return Instance.model_json_schema()


def ordered_sites(instance: Instance) -> Tuple[List[Site], List[Site]]:
    """SCBS and BAN candidates sorted by site id; solver indices follow this order."""
    return (
        sorted(instance.sc_sites, key=lambda site: site.id),
        sorted(instance.ban_sites, key=lambda site: site.id),
    )
