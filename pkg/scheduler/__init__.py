"""
Scheduling policies and the name registry used by the experiment runner
"""
import logging
from typing import Dict

from core.exceptions import ConfigError
from .base import OfferDecision, ResourceOffer, SchedulingPolicy, TierFeasibility
from .baselines import GandivaPolicy, GandivaState, TiresiasPolicy, TiresiasState
from .dally import DallyConfig, DallyMode, DallyPolicy

logger = logging.getLogger(__name__)

POLICY_NAMES = (
    "gandiva",
    "tiresias",
    "dally",
    "dally_manual",
    "dally_nowait",
    "dally_fullyconsolidated",
)

_DALLY_VARIANT_MODES = {
    "dally_manual": "manual",
    "dally_nowait": "nowait",
    "dally_fullyconsolidated": "fullyconsolidated",
}


def build_policy(name: str, settings: Dict) -> SchedulingPolicy:
    """Create a fresh policy instance. `settings` is the merged config dict."""
    if name == "gandiva":
        return GandivaPolicy(GandivaState.from_config(settings.get("gandiva", {})))
    if name == "tiresias":
        return TiresiasPolicy(TiresiasState.from_config(settings.get("tiresias", {})))
    if name == "dally":
        section = settings.get("dally", {})
        requested = section.get("mode", "auto")
        if requested != "auto":
            logger.warning("dally.mode=%s ignored for policy 'dally', which always auto-tunes; "
                           "run dally_%s for that variant", requested, requested)
        return DallyPolicy(DallyConfig.from_config(section, mode="auto"), name=name)
    if name in _DALLY_VARIANT_MODES:
        config = DallyConfig.from_config(settings.get("dally", {}), mode=_DALLY_VARIANT_MODES[name])
        return DallyPolicy(config, name=name)
    raise ConfigError(f"Unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)} or 'all'")


__all__ = [
    'POLICY_NAMES', 'build_policy',
    'OfferDecision', 'ResourceOffer', 'SchedulingPolicy', 'TierFeasibility',
    'DallyConfig', 'DallyMode', 'DallyPolicy',
    'GandivaPolicy', 'GandivaState', 'TiresiasPolicy', 'TiresiasState',
]
