"""Per-cookie profiles built from page visits.

The network watches navigation through its embedded ad slots and keeps one
profile per tracking cookie: topic scores accumulated from visited pages,
plus the interests and audiences re-derived from those scores after every
visit.  Scores never decay; a derived interest can only be lost by raising
the threshold, never by further browsing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotEligibleError, SimulationError, ValidationError
from .taxonomy import Taxonomy, audiences_for_interests


@dataclass(frozen=True)
class PageProfile:
    """Topical classification of a single page.

    Admission to the display network requires at least one topic; pages with
    no recognisable topic are rejected outright.
    """

    page_id: str
    topics: frozenset[str]

    def __post_init__(self):
        if not self.topics:
            raise NotEligibleError(
                f"page {self.page_id!r} has no topics: page not eligible for display network"
            )


@dataclass(frozen=True)
class NavigationEvent:
    cookie_id: str
    page_id: str
    timestamp: float
    dwell: float = 0.0
    referral: str | None = None
    geo: str | None = None


@dataclass(frozen=True)
class Demographics:
    gender: str | None = None
    age_band: str | None = None
    languages: tuple[str, ...] = ()


@dataclass(frozen=True)
class ProfileConfig:
    """Knobs for profile building.

    ``score_mode`` is ``"count"`` (one point per visit per topic, the
    default) or ``"dwell"`` (dwell seconds / 60 per topic).
    ``interest_threshold`` is the minimum topic score that activates an
    interest; the boundary is inclusive.
    """

    score_mode: str = "count"
    interest_threshold: float = 1.0

    def __post_init__(self):
        if self.score_mode not in ("count", "dwell"):
            raise ValidationError(
                f"score_mode must be 'count' or 'dwell', got {self.score_mode!r}"
            )


DEFAULT_PROFILE_CONFIG = ProfileConfig()


@dataclass
class AdUserProfile:
    """Mutable per-cookie state owned by the ad network."""

    cookie_id: str
    demographics: Demographics | None = None
    topic_scores: dict[str, float] = field(default_factory=dict)
    interests: set[str] = field(default_factory=set)
    audiences: set[str] = field(default_factory=set)
    visit_counts: dict[str, int] = field(default_factory=dict)
    last_timestamp: float | None = None


def analyze_page(page_id: str, declared_topics, taxonomy: Taxonomy) -> PageProfile:
    """Admit a page to the network, validating its declared topics.

    Raises :class:`NotEligibleError` when no topics are declared and
    :class:`ValidationError` when a topic is not in the taxonomy.
    """
    topics = frozenset(declared_topics)
    if not topics:
        raise NotEligibleError(
            f"page {page_id!r} has no topics: page not eligible for display network"
        )
    for t in topics:
        if t not in taxonomy.topics:
            raise ValidationError(f"page {page_id!r} declares unknown topic {t!r}")
    return PageProfile(page_id, topics)


def _score_increment(event: NavigationEvent, config: ProfileConfig) -> float:
    if config.score_mode == "dwell":
        return event.dwell / 60.0
    return 1.0


def record_visit(
    profile: AdUserProfile,
    page: PageProfile,
    event: NavigationEvent,
    taxonomy: Taxonomy,
    config: ProfileConfig = DEFAULT_PROFILE_CONFIG,
) -> AdUserProfile:
    """Fold one page view into the profile and re-derive interests/audiences.

    Mutates ``profile`` in place and returns it.  Visit counts and topic
    scores only ever grow, so derivation is monotone over a browsing
    session.  Timestamps must be non-decreasing per cookie.
    """
    if event.page_id != page.page_id:
        raise SimulationError(
            f"event page {event.page_id!r} does not match page {page.page_id!r}"
        )
    if profile.last_timestamp is not None and event.timestamp < profile.last_timestamp:
        raise SimulationError(
            f"navigation timestamps for {profile.cookie_id!r} went backwards "
            f"({event.timestamp} after {profile.last_timestamp})"
        )
    profile.last_timestamp = event.timestamp
    profile.visit_counts[page.page_id] = profile.visit_counts.get(page.page_id, 0) + 1
    increment = _score_increment(event, config)
    for topic in page.topics:
        profile.topic_scores[topic] = profile.topic_scores.get(topic, 0.0) + increment
    profile.interests = derive_interests(profile, taxonomy, config)
    profile.audiences = derive_audiences(profile, taxonomy)
    return profile


def derive_interests(
    profile: AdUserProfile,
    taxonomy: Taxonomy,
    config: ProfileConfig = DEFAULT_PROFILE_CONFIG,
) -> set[str]:
    """Interest ids whose source topics reached the activation threshold.

    Pure function of the current topic scores; calling it twice in a row
    gives the same answer.
    """
    threshold = config.interest_threshold
    return {
        interest.id
        for interest in taxonomy.interests.values()
        if any(
            profile.topic_scores.get(t, 0.0) >= threshold
            for t in interest.source_topics
        )
    }


def derive_audiences(profile: AdUserProfile, taxonomy: Taxonomy) -> set[str]:
    """Affinity audiences the profile currently qualifies for."""
    return audiences_for_interests(taxonomy, profile.interests)
