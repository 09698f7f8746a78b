"""Profile-targeted display advertising simulator and the side channel it leaks.

The package models the full loop: page topics feed per-cookie profiles,
profiles qualify affinity audiences, campaigns bid for slots, and the ad
platform hands advertisers windowed per-audience impression counters.
:mod:`adtrap.trap` then shows how an advertiser who also owns a website can
correlate those counters with her visit log and recover individual
visitors' audiences.
"""

from .errors import (
    AdtrapError,
    BudgetError,
    InconsistentObservationsError,
    NotEligibleError,
    SimulationError,
    UnknownIdError,
    ValidationError,
)
from .taxonomy import (
    AffinityAudience,
    InterestCategory,
    Taxonomy,
    Topic,
    audiences_for_interests,
    load_taxonomy,
    taxonomy_to_document,
)
from .profile import (
    AdUserProfile,
    Demographics,
    NavigationEvent,
    PageProfile,
    ProfileConfig,
    analyze_page,
    derive_audiences,
    derive_interests,
    record_visit,
)
from .marketplace import (
    Ad,
    AdGroup,
    AuctionOutcome,
    AudienceCounterReport,
    Bid,
    Campaign,
    Candidate,
    ImpressionRecord,
    MarketConfig,
    Marketplace,
    build_reports,
    effective_value_micros,
    reports_to_rows,
    window_index,
)
from .gdn import VisitLogEntry, Website, log_to_rows, serve_page, visitor_log
from .scenario import (
    AttackSpec,
    AttackVisit,
    Scenario,
    UserAgentSpec,
    WarmupVisit,
    load_scenario,
    load_scenario_document,
    read_scenario_file,
)
from .simulation import (
    RunTrace,
    SimulationEngine,
    attacker_view_reports,
    poisson_visit_times,
    run_attack,
    run_scenario,
    sweep,
    trace_to_document,
    trace_to_json,
)
from .trap import (
    Assignment,
    AttributionResult,
    GroupStats,
    TrapConfig,
    WindowObservation,
    assign_per_victim_sites,
    build_trap_campaign,
    collect_observations,
    group_statistics,
    infer_audiences,
    replay_exact,
    resolve_tracked_visits,
    score_attribution,
    summary_line,
)

__version__ = "0.1.0"
