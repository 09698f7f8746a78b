"""Campaigns, auctions, impression accounting and windowed counter reports.

Money is handled in integer micro-units internally (one currency unit =
10**6 micros), so budget arithmetic is exact and auction ties are decided
on equal integers rather than float noise.  Public fields keep plain float
amounts.

Counter reports batch impressions into fixed windows (default 30 simulated
minutes).  A report row is the advertiser-visible side channel of this
whole simulation: per-audience deltas plus cumulative totals, with no
cookie ids anywhere.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple

from .errors import BudgetError, SimulationError, ValidationError
from .profile import AdUserProfile, PageProfile

MICROS = 10**6

BID_KINDS = ("CPC", "CPM", "CPA")


def to_micros(amount: float) -> int:
    return round(amount * MICROS)


@dataclass(frozen=True)
class Bid:
    """Price attached to an ad group: kind is one of CPC, CPM or CPA."""

    kind: str
    amount: float

    def __post_init__(self):
        if self.kind not in BID_KINDS:
            raise ValidationError(f"bid kind must be one of {BID_KINDS}, got {self.kind!r}")
        if not self.amount > 0:
            raise ValidationError(f"bid amount must be positive, got {self.amount!r}")


@dataclass(frozen=True)
class Ad:
    id: str
    landing_url: str
    creative: str = ""


@dataclass(frozen=True)
class AdGroup:
    """A set of ads sharing targeting and one bid.

    Empty ``placement`` means the whole network; a non-empty set restricts
    serving to exactly those website ids.  ``demographics`` maps a profile
    field to the list of accepted tags; ``geo`` is a set of accepted region
    tags.  Absent filters do not constrain.
    """

    id: str
    name: str
    ads: tuple[Ad, ...]
    target_audiences: frozenset[str]
    bid: Bid
    placement: frozenset[str] = frozenset()
    demographics: tuple[tuple[str, tuple[str, ...]], ...] = ()
    geo: frozenset[str] | None = None

    def __post_init__(self):
        if not self.ads:
            raise ValidationError(f"ad group {self.id!r} must contain at least one ad")
        if not self.target_audiences:
            raise ValidationError(f"ad group {self.id!r} must target at least one audience")


@dataclass
class Campaign:
    id: str
    name: str
    ad_groups: tuple[AdGroup, ...]
    total_budget: float
    spent_micros: int = 0

    def __post_init__(self):
        if self.total_budget < 0:
            raise ValidationError(f"campaign {self.id!r} budget must be >= 0")

    @property
    def total_budget_micros(self) -> int:
        return to_micros(self.total_budget)

    @property
    def spent(self) -> float:
        return self.spent_micros / MICROS

    @property
    def remaining_micros(self) -> int:
        return self.total_budget_micros - self.spent_micros


@dataclass(frozen=True)
class ImpressionRecord:
    """Ground-truth record of one served ad.

    ``cookie_id`` identifies the profile that saw the ad; it exists only on
    this internal side and is never exposed through reports or logs.
    """

    ad_id: str
    campaign_id: str
    ad_group_id: str
    website_id: str
    page_id: str
    audience_id: str
    cookie_id: str
    timestamp: float
    clicked: bool = False


@dataclass(frozen=True)
class AudienceCounterReport:
    """One reporting window of per-audience impression counters.

    ``deltas`` counts impressions inside [window_start, window_end);
    ``cumulative`` is the prefix sum over this and all earlier windows.
    """

    window_index: int
    window_start: float
    window_end: float
    deltas: dict[str, int]
    cumulative: dict[str, int]


@dataclass(frozen=True)
class MarketConfig:
    """Marketplace-wide serving parameters.

    ``click_through_rate`` and ``acquisition_rate`` convert CPC and CPA
    bids into expected per-impression values; ``auction_mode`` is
    ``"first_price"`` (winner pays own value, the default) or
    ``"second_price"`` (winner pays the runner-up value).
    """

    auction_mode: str = "first_price"
    click_through_rate: float = 0.05
    acquisition_rate: float = 0.01

    def __post_init__(self):
        if self.auction_mode not in ("first_price", "second_price"):
            raise ValidationError(
                f"auction_mode must be 'first_price' or 'second_price', got {self.auction_mode!r}"
            )


DEFAULT_MARKET_CONFIG = MarketConfig()


class Candidate(NamedTuple):
    campaign: Campaign
    ad_group: AdGroup
    ad: Ad
    matched_audiences: frozenset[str]


class AuctionOutcome(NamedTuple):
    candidate: Candidate
    price_micros: int


def effective_value_micros(bid: Bid, config: MarketConfig = DEFAULT_MARKET_CONFIG) -> int:
    """Expected value of one impression under the given bid, in micros.

    CPM is amount per thousand impressions; CPC and CPA are scaled by the
    configured click-through and acquisition rates.
    """
    micros = to_micros(bid.amount)
    if bid.kind == "CPM":
        return micros // 1000
    if bid.kind == "CPC":
        return round(micros * config.click_through_rate)
    return round(micros * config.acquisition_rate)


def _demographics_match(ad_group: AdGroup, profile: AdUserProfile) -> bool:
    if not ad_group.demographics:
        return True
    demo = profile.demographics
    if demo is None:
        return False
    for fieldname, accepted in ad_group.demographics:
        value = getattr(demo, fieldname, None)
        if value is None:
            return False
        if isinstance(value, tuple):
            if not set(value) & set(accepted):
                return False
        elif value not in accepted:
            return False
    return True


class Marketplace:
    """Holds campaigns and the impression stream for one simulated run."""

    def __init__(
        self,
        campaigns: Iterable[Campaign],
        config: MarketConfig = DEFAULT_MARKET_CONFIG,
        rng: random.Random | None = None,
    ):
        self.campaigns: dict[str, Campaign] = {}
        for c in campaigns:
            if c.id in self.campaigns:
                raise ValidationError(f"duplicate campaign id {c.id!r}")
            self.campaigns[c.id] = c
        self.config = config
        self.rng = rng if rng is not None else random.Random(0)
        self.impressions: list[ImpressionRecord] = []

    def eligible_ads(
        self,
        website_id: str,
        profile: AdUserProfile,
        time: float,
        geo: str | None = None,
    ) -> list[Candidate]:
        """Candidates allowed to compete for one slot on one page view.

        An ad qualifies when its placement covers the website, the profile
        is in at least one targeted audience, optional demographic and geo
        filters pass, and the campaign can still pay for the impression.
        """
        candidates: list[Candidate] = []
        for campaign in self.campaigns.values():
            for group in campaign.ad_groups:
                if group.placement and website_id not in group.placement:
                    continue
                matched = group.target_audiences & profile.audiences
                if not matched:
                    continue
                if not _demographics_match(group, profile):
                    continue
                if group.geo is not None and (geo is None or geo not in group.geo):
                    continue
                value = effective_value_micros(group.bid, self.config)
                if campaign.remaining_micros < value:
                    continue
                for ad in group.ads:
                    candidates.append(Candidate(campaign, group, ad, matched))
        return candidates

    def run_auction(self, candidates: list[Candidate]) -> AuctionOutcome | None:
        """Pick the winner by effective per-impression value.

        Ties break on lexicographic ad id, so the outcome is reproducible
        without consuming randomness.  Returns None iff there are no
        candidates.
        """
        if not candidates:
            return None
        scored = [
            (effective_value_micros(c.ad_group.bid, self.config), c) for c in candidates
        ]
        winner_value, winner = min(scored, key=lambda vc: (-vc[0], vc[1].ad.id))
        if self.config.auction_mode == "second_price" and len(scored) > 1:
            price = max(value for value, c in scored if c is not winner)
        else:
            price = winner_value
        return AuctionOutcome(winner, price)

    def record_impression(
        self,
        outcome: AuctionOutcome,
        profile: AdUserProfile,
        page: PageProfile,
        website_id: str,
        time: float,
    ) -> ImpressionRecord:
        """Charge the winning campaign and append the impression record.

        The impression is attributed to exactly one audience: the
        lexicographically smallest id among the winning group's targets the
        profile is currently in.  A click is sampled from the configured
        click-through rate using the marketplace rng.
        """
        candidate = outcome.candidate
        campaign = candidate.campaign
        if campaign.spent_micros + outcome.price_micros > campaign.total_budget_micros:
            raise BudgetError(
                f"campaign {campaign.id!r} cannot pay {outcome.price_micros} micros"
            )
        matched = candidate.ad_group.target_audiences & profile.audiences
        if not matched:
            raise SimulationError(
                f"profile {profile.cookie_id!r} left all audiences targeted by "
                f"ad group {candidate.ad_group.id!r} before the impression"
            )
        campaign.spent_micros += outcome.price_micros
        record = ImpressionRecord(
            ad_id=candidate.ad.id,
            campaign_id=campaign.id,
            ad_group_id=candidate.ad_group.id,
            website_id=website_id,
            page_id=page.page_id,
            audience_id=min(matched),
            cookie_id=profile.cookie_id,
            timestamp=time,
            clicked=self.rng.random() < self.config.click_through_rate,
        )
        self.impressions.append(record)
        return record

    def serve(
        self,
        website_id: str,
        page: PageProfile,
        profile: AdUserProfile,
        time: float,
        geo: str | None = None,
    ) -> ImpressionRecord | None:
        """One page view, one slot: eligibility, auction, impression."""
        outcome = self.run_auction(self.eligible_ads(website_id, profile, time, geo))
        if outcome is None:
            return None
        return self.record_impression(outcome, profile, page, website_id, time)

    def target_audience_universe(self) -> list[str]:
        """Sorted union of every campaign's targeted audiences."""
        universe: set[str] = set()
        for campaign in self.campaigns.values():
            for group in campaign.ad_groups:
                universe |= group.target_audiences
        return sorted(universe)

    def publish_reports(
        self,
        window_length: float,
        up_to_time: float,
        audience_ids: list[str] | None = None,
        campaign_id: str | None = None,
    ) -> list[AudienceCounterReport]:
        """Reports for every window elapsed by ``up_to_time``."""
        if audience_ids is None:
            audience_ids = self.target_audience_universe()
        num_windows = math.ceil(up_to_time / window_length) if up_to_time > 0 else 0
        return build_reports(
            self.impressions, window_length, num_windows, audience_ids, campaign_id
        )


def window_index(timestamp: float, window_length: float) -> int:
    """Index of the half-open window [k*W, (k+1)*W) containing ``timestamp``.

    A timestamp exactly on a boundary belongs to the later window.
    """
    return math.floor(timestamp / window_length)


def build_reports(
    impressions: Iterable[ImpressionRecord],
    window_length: float,
    num_windows: int,
    audience_ids: list[str],
    campaign_id: str | None = None,
) -> list[AudienceCounterReport]:
    """Batch impressions into per-window audience counters.

    Every window in range gets a report, including all-zero ones, keyed
    over exactly ``audience_ids``.  When ``campaign_id`` is given, only
    that campaign's impressions are counted: this is the advertiser-facing
    view, since each advertiser sees counters for her own campaigns only.
    """
    if window_length <= 0:
        raise ValidationError(f"window length must be positive, got {window_length!r}")
    audience_ids = sorted(audience_ids)
    deltas = [dict.fromkeys(audience_ids, 0) for _ in range(num_windows)]
    for record in impressions:
        if campaign_id is not None and record.campaign_id != campaign_id:
            continue
        k = window_index(record.timestamp, window_length)
        if 0 <= k < num_windows and record.audience_id in deltas[k]:
            deltas[k][record.audience_id] += 1
    reports: list[AudienceCounterReport] = []
    running = dict.fromkeys(audience_ids, 0)
    for k in range(num_windows):
        for a in audience_ids:
            running[a] += deltas[k][a]
        reports.append(
            AudienceCounterReport(
                window_index=k,
                window_start=k * window_length,
                window_end=(k + 1) * window_length,
                deltas=dict(deltas[k]),
                cumulative=dict(running),
            )
        )
    return reports


def reports_to_rows(reports: Iterable[AudienceCounterReport]) -> list[dict]:
    """Flatten reports for CSV export, one row per window and audience."""
    rows = []
    for report in reports:
        for audience_id in sorted(report.deltas):
            rows.append(
                {
                    "window_index": report.window_index,
                    "window_start": report.window_start,
                    "window_end": report.window_end,
                    "audience_id": audience_id,
                    "delta": report.deltas[audience_id],
                    "cumulative": report.cumulative[audience_id],
                }
            )
    return rows


def fresh_campaign(campaign: Campaign) -> Campaign:
    """Copy with zero spend, for reusing one scenario across runs."""
    return replace(campaign, spent_micros=0)
