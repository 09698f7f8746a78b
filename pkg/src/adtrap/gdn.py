"""Publisher side of the network: websites, page serving and visit logs.

A website owner who enables logging records one entry per page view with a
pseudonymous network id (an IP-like tag), never the ad cookie.  The two id
namespaces are kept disjoint on purpose; correlating them is exactly what
the attack in :mod:`adtrap.trap` is about.

Visitor consent gates logging only.  A non-consenting visitor still sees
ads and still moves the advertiser counters; she is simply absent from the
site's own log.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AdtrapError, SimulationError, UnknownIdError, ValidationError
from .marketplace import ImpressionRecord, Marketplace
from .profile import (
    AdUserProfile,
    NavigationEvent,
    PageProfile,
    ProfileConfig,
    DEFAULT_PROFILE_CONFIG,
    record_visit,
)
from .taxonomy import Taxonomy

OWNERS = ("attacker", "third-party")


@dataclass(frozen=True)
class VisitLogEntry:
    timestamp: float
    network_id: str
    page_id: str
    referral: str | None = None
    tracking_arg: str | None = None


@dataclass
class Website:
    id: str
    domain: str
    pages: dict[str, PageProfile]
    owner: str = "third-party"
    logging: bool = False
    log: list[VisitLogEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.owner not in OWNERS:
            raise ValidationError(
                f"website {self.id!r} owner must be one of {OWNERS}, got {self.owner!r}"
            )

    def first_page_id(self) -> str:
        if not self.pages:
            raise ValidationError(f"website {self.id!r} has no pages")
        return next(iter(self.pages))


def serve_page(
    website: Website,
    page_id: str,
    profile: AdUserProfile,
    *,
    network_id: str,
    consent: bool,
    time: float,
    marketplace: Marketplace,
    taxonomy: Taxonomy,
    profile_config: ProfileConfig = DEFAULT_PROFILE_CONFIG,
    dwell: float = 0.0,
    referral: str | None = None,
    tracking_arg: str | None = None,
    geo: str | None = None,
) -> tuple[ImpressionRecord | None, VisitLogEntry | None]:
    """One page view: update the profile, fill the ad slot, maybe log.

    The profile is updated before ad selection, so the page being viewed
    already counts toward targeting.  Returns the impression (None when no
    ad qualified) and the log entry (None when the site does not log or the
    visitor withheld consent).
    """
    if page_id not in website.pages:
        raise UnknownIdError(f"website {website.id!r} has no page {page_id!r}")
    page = website.pages[page_id]
    event = NavigationEvent(
        cookie_id=profile.cookie_id,
        page_id=page_id,
        timestamp=time,
        dwell=dwell,
        referral=referral,
        geo=geo,
    )
    record_visit(profile, page, event, taxonomy, profile_config)
    impression = marketplace.serve(website.id, page, profile, time, geo=geo)
    entry = None
    if website.logging and consent:
        if website.log and time < website.log[-1].timestamp:
            raise SimulationError(
                f"visit log for {website.id!r} would go backwards in time"
            )
        entry = VisitLogEntry(
            timestamp=time,
            network_id=network_id,
            page_id=page_id,
            referral=referral,
            tracking_arg=tracking_arg,
        )
        website.log.append(entry)
    return impression, entry


def visitor_log(
    website: Website,
    start: float | None = None,
    end: float | None = None,
) -> list[VisitLogEntry]:
    """Entries with ``start <= timestamp < end``; full log by default.

    Raises when the site never enabled logging: there is nothing to return
    and pretending otherwise would hide a configuration mistake.
    """
    if not website.logging:
        raise AdtrapError(f"no log for this site: {website.id!r}")
    entries = website.log
    if start is not None:
        entries = [e for e in entries if e.timestamp >= start]
    if end is not None:
        entries = [e for e in entries if e.timestamp < end]
    return list(entries)


def log_to_rows(entries) -> list[dict]:
    """Flatten log entries for CSV export."""
    return [
        {
            "timestamp": e.timestamp,
            "network_id": e.network_id,
            "page_id": e.page_id,
            "referral": e.referral if e.referral is not None else "",
            "tracking_arg": e.tracking_arg if e.tracking_arg is not None else "",
        }
        for e in entries
    ]
