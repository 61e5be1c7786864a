"""
Discovery trial time per broadcast scheme.

TD is the single-beam exhaustive scan; FD, CD and SD sweep M beams at once.
The trial times are configuration input, checked only for their ordering.
"""
from typing import Dict, Optional
import logging

from src.models.errors import UnknownSchemeError
from src.models.params import SystemParams
from src.models.simulation import BROADCAST_SCHEMES, BroadcastTable

logger = logging.getLogger(__name__)


def delta_t_for_scheme(scheme: str, beams: int, table: Optional[BroadcastTable] = None) -> float:
    """
    Look up the trial time of ``scheme`` with ``beams`` simultaneous beams.

    Raises:
        UnknownSchemeError: scheme not recognised, TD with more than one beam,
            or no entry for the pair
    """
    table = table or BroadcastTable.default()
    if scheme not in BROADCAST_SCHEMES:
        raise UnknownSchemeError(f"unknown broadcast scheme '{scheme}', expected one of {BROADCAST_SCHEMES}")
    if beams < 1:
        raise UnknownSchemeError(f"beam count must be at least 1, got {beams}")
    if scheme == "TD" and beams != 1:
        raise UnknownSchemeError("TD is a single-beam scan and requires M = 1")
    try:
        return table.entries[scheme][beams]
    except KeyError:
        raise UnknownSchemeError(f"no trial time configured for {scheme} with M = {beams}") from None


def validate_table(table: BroadcastTable) -> Dict[str, object]:
    """
    Check the ordering the schemes are expected to show.

    Returns:
        Report with ``td_is_minimum``, ``fd_equals_cd`` (per shared M) and
        ``sd_between`` (per M where TD, SD and FD are all configured)
    """
    entries = table.entries
    td = entries.get("TD", {}).get(1)
    others = [v for scheme in ("FD", "CD", "SD") for v in entries.get(scheme, {}).values()]
    td_is_minimum = td is not None and all(td <= v for v in others)
    if not td_is_minimum:
        logger.warning("Broadcast table: TD does not have the smallest trial time")

    fd, cd, sd = entries.get("FD", {}), entries.get("CD", {}), entries.get("SD", {})
    fd_equals_cd = {m: abs(fd[m] - cd[m]) <= 1e-12 for m in sorted(set(fd) & set(cd))}
    if not all(fd_equals_cd.values()):
        logger.warning(f"Broadcast table: FD and CD differ for M in "
                       f"{[m for m, ok in fd_equals_cd.items() if not ok]}")
    sd_between = {}
    if td is not None:
        sd_between = {m: td <= sd[m] <= fd[m] for m in sorted(set(sd) & set(fd))}
    return {"td_is_minimum": td_is_minimum, "fd_equals_cd": fd_equals_cd, "sd_between": sd_between}


def params_for_scheme(params: SystemParams, scheme: str, beams: int,
                      table: Optional[BroadcastTable] = None) -> SystemParams:
    """Copy of ``params`` with the trial time of the given scheme."""
    delta_t = delta_t_for_scheme(scheme, beams, table)
    return SystemParams(**{**params.dict(), "delta_t": delta_t})
