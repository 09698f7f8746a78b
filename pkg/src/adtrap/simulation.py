"""Deterministic end-to-end runs of a scenario.

A run has two phases.  Warm-up happens at negative simulated time: every
user executes her browsing plan and the network builds her profile, but no
ads are auctioned and nothing is logged, so the reporting clock starts
clean at t=0.  The attack phase then replays every scheduled visit through
the full serving path (profile update, auction, impression, log entry),
ordered by timestamp, then user id, so equal seeds give byte-identical
traces.

Ground truth is snapshotted at the warm-up/attack boundary: it is what a
user's profile qualified for at the moment the probing started.
"""

from __future__ import annotations

import copy
import itertools
import json
import logging
import math
import random
from dataclasses import dataclass, field

from .errors import InconsistentObservationsError, ValidationError
from .gdn import Website, serve_page
from .marketplace import (
    Ad,
    AdGroup,
    AudienceCounterReport,
    Bid,
    Campaign,
    ImpressionRecord,
    Marketplace,
    build_reports,
    fresh_campaign,
)
from .profile import AdUserProfile, NavigationEvent, record_visit
from .scenario import Scenario, load_scenario_document
from .trap import (
    Assignment,
    AttributionResult,
    TrapConfig,
    build_trap_campaign,
    collect_observations,
    infer_audiences,
    score_attribution,
)

log = logging.getLogger(__name__)

TRACE_SCHEMA_VERSION = 1

# Top-level scenario fields a sweep may introduce even when the template
# relies on their defaults.
_SWEEPABLE_TOP_LEVEL = {"window_length_s", "horizon_s", "seed"}


@dataclass
class RunTrace:
    """Everything one run produced, ground truth included."""

    impressions: list[ImpressionRecord]
    reports: list[AudienceCounterReport]
    logs: dict[str, list]
    ground_truth: dict[str, set[str]] = field(default_factory=dict)


def trap_campaign_id(site_id: str) -> str:
    return f"trap_{site_id}"


def _build_attack_campaigns(scenario: Scenario) -> list[Campaign]:
    attack = scenario.attack
    if attack is None:
        return []
    campaigns = []
    for site_id in attack.sites:
        website = scenario.websites[site_id]
        config = TrapConfig(
            site_id=site_id,
            audiences_to_probe=attack.audiences,
            bid=Bid(kind="CPM", amount=attack.cpm),
            one_site_per_victim=attack.one_site_per_victim,
            tracking_args=attack.tracking_args,
            total_budget=attack.budget,
        )
        campaign = build_trap_campaign(config, website)
        if attack.extra_placement_sites:
            # Deliberately widened placement: rebuild the groups with the
            # extra sites to study a misconfigured probe.  This is the one
            # path that escapes the exclusivity the builder enforces.
            widened = frozenset({site_id, *attack.extra_placement_sites})
            campaign = Campaign(
                id=campaign.id,
                name=campaign.name,
                ad_groups=tuple(
                    AdGroup(
                        id=g.id,
                        name=g.name,
                        ads=g.ads,
                        target_audiences=g.target_audiences,
                        bid=g.bid,
                        placement=widened,
                    )
                    for g in campaign.ad_groups
                ),
                total_budget=campaign.total_budget,
            )
        campaigns.append(campaign)
    return campaigns


class SimulationEngine:
    """Materialised state for one run of one scenario.

    The scenario itself is never mutated: campaigns are copied with zero
    spend and websites get fresh logs, so the same :class:`Scenario` can
    back any number of runs.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.websites: dict[str, Website] = {
            wid: Website(
                id=site.id,
                domain=site.domain,
                pages=site.pages,
                owner=site.owner,
                logging=site.logging,
                log=[],
            )
            for wid, site in scenario.websites.items()
        }
        self.page_site: dict[str, str] = {
            pid: wid for wid, site in self.websites.items() for pid in site.pages
        }
        campaigns = [fresh_campaign(c) for c in scenario.campaigns]
        campaigns.extend(_build_attack_campaigns(scenario))
        self.marketplace = Marketplace(
            campaigns,
            config=scenario.market_config,
            rng=random.Random(scenario.seed),
        )
        self.profiles: dict[str, AdUserProfile] = {
            user.cookie_id: AdUserProfile(
                cookie_id=user.cookie_id, demographics=user.demographics
            )
            for user in scenario.users
        }
        self.ground_truth: dict[str, set[str]] = {}

    def run_warmup(self) -> None:
        """Fill profiles by replaying warm-up plans at negative time."""
        taxonomy = self.scenario.taxonomy
        config = self.scenario.profile_config
        for user in self.scenario.users:
            profile = self.profiles[user.cookie_id]
            flat = [
                visit
                for visit in user.warmup_plan
                for _ in range(visit.repeat)
            ]
            for i, visit in enumerate(flat):
                site = self.websites[self.page_site[visit.page]]
                event = NavigationEvent(
                    cookie_id=user.cookie_id,
                    page_id=visit.page,
                    timestamp=float(i - len(flat)),
                    dwell=visit.dwell,
                    geo=user.geo,
                )
                record_visit(profile, site.pages[visit.page], event, taxonomy, config)
        self.ground_truth = {
            user.id: set(self.profiles[user.cookie_id].audiences)
            for user in self.scenario.users
        }

    def run_attack_phase(self) -> None:
        """Replay every scheduled visit through the serving path."""
        events = []
        for user in self.scenario.users:
            for seq, visit in enumerate(user.attack_visits):
                events.append((visit.t, user.id, seq, user, visit))
        events.sort(key=lambda e: (e[0], e[1], e[2]))
        for t, _, _, user, visit in events:
            website = self.websites[visit.site]
            page_id = visit.page or website.first_page_id()
            impression, _ = serve_page(
                website,
                page_id,
                self.profiles[user.cookie_id],
                network_id=user.network_id,
                consent=user.consent,
                time=t,
                marketplace=self.marketplace,
                taxonomy=self.scenario.taxonomy,
                profile_config=self.scenario.profile_config,
                referral=visit.referral,
                tracking_arg=visit.tracking_arg,
                geo=user.geo,
            )
            log.debug(
                "t=%s user=%s site=%s page=%s impression=%s",
                t,
                user.id,
                visit.site,
                page_id,
                impression.ad_id if impression else None,
            )

    def publish_reports(self) -> list[AudienceCounterReport]:
        return self.marketplace.publish_reports(
            self.scenario.window_length, self.scenario.horizon
        )

    def run(self) -> RunTrace:
        self.run_warmup()
        self.run_attack_phase()
        return RunTrace(
            impressions=list(self.marketplace.impressions),
            reports=self.publish_reports(),
            logs={
                wid: list(site.log)
                for wid, site in self.websites.items()
                if site.logging
            },
            ground_truth=self.ground_truth,
        )


def run_scenario(scenario: Scenario) -> RunTrace:
    """One full deterministic run; see :class:`SimulationEngine`."""
    return SimulationEngine(scenario).run()


def attacker_view_reports(
    trace: RunTrace, scenario: Scenario, site_id: str
) -> list[AudienceCounterReport]:
    """Counter reports as the probing advertiser sees them for one site.

    Restricted to the probing campaign's own impressions and keyed over
    exactly the probed audiences; cookie ids are structurally absent.
    """
    attack = scenario.attack
    if attack is None:
        raise ValidationError("scenario has no attack section")
    num_windows = math.ceil(scenario.horizon / scenario.window_length)
    return build_reports(
        trace.impressions,
        scenario.window_length,
        num_windows,
        sorted(attack.audiences),
        campaign_id=trap_campaign_id(site_id),
    )


def run_attack(scenario: Scenario, trace: RunTrace) -> AttributionResult:
    """Run the inference pipeline over a finished trace and score it.

    Observations from all attacker sites are solved jointly (each window
    of each site is one constraint).  If they contradict the model, every
    log-visible visitor is reported as unknown and the result is flagged
    inconsistent rather than aborting the evaluation.
    """
    attack = scenario.attack
    if attack is None:
        return AttributionResult({}, accuracy=None)
    observations = []
    for site_id in attack.sites:
        observations.extend(
            collect_observations(
                attacker_view_reports(trace, scenario, site_id),
                trace.logs.get(site_id, []),
            )
        )
    try:
        result = infer_audiences(observations)
    except InconsistentObservationsError as exc:
        log.warning("inference gave up: %s", exc)
        visitors = {
            entry.network_id
            for site_id in attack.sites
            for entry in trace.logs.get(site_id, [])
        }
        result = AttributionResult(
            {nid: Assignment("unknown") for nid in sorted(visitors)},
            inconsistent=True,
        )
    truth_by_network = {
        user.network_id: trace.ground_truth.get(user.id, set())
        for user in scenario.users
    }
    return score_attribution(result, truth_by_network, attack.audiences)


def trace_to_document(trace: RunTrace) -> dict:
    """Plain-JSON form of a trace, stable across runs of the same seed."""
    return {
        "schema_version": TRACE_SCHEMA_VERSION,
        "impressions": [
            {
                "ad_id": r.ad_id,
                "campaign_id": r.campaign_id,
                "ad_group_id": r.ad_group_id,
                "website_id": r.website_id,
                "page_id": r.page_id,
                "audience_id": r.audience_id,
                "cookie_id": r.cookie_id,
                "timestamp": r.timestamp,
                "clicked": r.clicked,
            }
            for r in trace.impressions
        ],
        "reports": [
            {
                "window_index": r.window_index,
                "window_start": r.window_start,
                "window_end": r.window_end,
                "deltas": dict(sorted(r.deltas.items())),
                "cumulative": dict(sorted(r.cumulative.items())),
            }
            for r in trace.reports
        ],
        "logs": {
            site_id: [
                {
                    "timestamp": e.timestamp,
                    "network_id": e.network_id,
                    "page_id": e.page_id,
                    "referral": e.referral,
                    "tracking_arg": e.tracking_arg,
                }
                for e in entries
            ]
            for site_id, entries in sorted(trace.logs.items())
        },
        "ground_truth": {
            user_id: sorted(audiences)
            for user_id, audiences in sorted(trace.ground_truth.items())
        },
    }


def trace_to_json(trace: RunTrace) -> str:
    return json.dumps(trace_to_document(trace), indent=2, sort_keys=True) + "\n"


def poisson_visit_times(
    rate_per_s: float, start: float, end: float, rng: random.Random
) -> list[float]:
    """Homogeneous Poisson arrival times in [start, end).

    Scenario files always carry explicit visit times; this helper is for
    programmatic scenario builders (sweeps, randomised tests, demos).
    """
    if rate_per_s <= 0:
        return []
    times = []
    t = start
    while True:
        t += rng.expovariate(rate_per_s)
        if t >= end:
            return times
        times.append(t)


def apply_grid_value(document: dict, key: str, value) -> None:
    """Set one swept parameter inside a scenario document.

    ``key`` is a slash-separated path ("window_length_s",
    "campaigns/0/ad_groups/0/bid/amount").  A path that cannot be
    traversed raises, so typos do not silently sweep nothing; the only
    keys that may be introduced are top-level fields with defaults.
    """
    parts = key.split("/")
    node = document
    for part in parts[:-1]:
        if isinstance(node, list):
            if not part.lstrip("-").isdigit() or not -len(node) <= int(part) < len(node):
                raise ValidationError(f"unknown grid key {key!r}")
            node = node[int(part)]
        elif isinstance(node, dict) and part in node:
            node = node[part]
        else:
            raise ValidationError(f"unknown grid key {key!r}")
    last = parts[-1]
    if isinstance(node, list):
        if not last.lstrip("-").isdigit() or not -len(node) <= int(last) < len(node):
            raise ValidationError(f"unknown grid key {key!r}")
        node[int(last)] = value
    elif isinstance(node, dict):
        if last not in node and not (node is document and last in _SWEEPABLE_TOP_LEVEL):
            raise ValidationError(f"unknown grid key {key!r}")
        node[last] = value
    else:
        raise ValidationError(f"unknown grid key {key!r}")


def sweep(
    template_document: dict,
    grid: dict[str, list],
    seeds: list[int],
) -> list[dict]:
    """Run every grid cell under every seed; one summary row per run.

    Cells iterate in sorted-key order with values in the given order, then
    seeds in the given order, so the row sequence is reproducible.  An
    empty grid yields no rows; an empty seed list is an error.
    """
    if not seeds:
        raise ValidationError("no seeds")
    if not grid:
        return []
    keys = sorted(grid)
    rows: list[dict] = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        for seed in seeds:
            document = copy.deepcopy(template_document)
            for k, v in zip(keys, combo):
                apply_grid_value(document, k, v)
            document["seed"] = seed
            scenario = load_scenario_document(document)
            trace = run_scenario(scenario)
            result = run_attack(scenario, trace)
            counts = result.counts()
            row = dict(zip(keys, combo))
            row.update(
                seed=seed,
                exact=counts["exact"],
                ambiguous=counts["ambiguous"],
                unknown=counts["unknown"],
                accuracy=result.accuracy,
                impressions=len(trace.impressions),
            )
            rows.append(row)
            log.info("sweep cell %s seed %s: accuracy=%s", dict(zip(keys, combo)), seed, result.accuracy)
    return rows
