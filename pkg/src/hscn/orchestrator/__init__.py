from .engine import DEFAULT_CLAIM_TTL, PipelineEngine, verify_conservation
from .experiments import (
    PipelineConfig,
    ReviewerMode,
    RoutingPlan,
    SamplingMode,
    eligible_ids,
    route,
    stratified_sample,
)
from .reports import (
    JUDGMENTS_PER_PAIR,
    NO_SUGGESTION_SECONDS,
    SECONDS_PER_JUDGMENT,
    EffortReport,
    crowd_time_for_rate,
    effort_report,
)

__all__ = [
    "DEFAULT_CLAIM_TTL",
    "EffortReport",
    "JUDGMENTS_PER_PAIR",
    "NO_SUGGESTION_SECONDS",
    "PipelineConfig",
    "PipelineEngine",
    "ReviewerMode",
    "RoutingPlan",
    "SECONDS_PER_JUDGMENT",
    "SamplingMode",
    "crowd_time_for_rate",
    "effort_report",
    "eligible_ids",
    "route",
    "stratified_sample",
    "verify_conservation",
]
