"""Audience inference from counter reports correlated with visit logs.

The attacker runs a campaign whose ads appear only on her own site, one ad
group per probed audience.  The ad platform then hands her, per reporting
window, how many impressions each audience generated; her web server log
tells her who visited in the same window.  Matching the two streams turns
aggregate counters into per-visitor audience labels.

The matching problem is a constraint model: each visitor (network id) gets
one value, either a probed audience or "none", and in every window the
multiset of values carried by that window's visits must reproduce the
window's deltas.  Solving proceeds in three stages:

1. propagate forced values (a window whose remaining deltas are fully
   determined fixes its remaining visitors), repeated to a fixpoint;
2. split what is left into independent components and enumerate each one
   exhaustively while the candidate count stays within ``exhaustive_limit``;
3. mark visitors of any larger component ``unknown``.

A visitor is ``exact`` when every surviving assignment agrees on her value
(which may be "none": she matched no probed audience), ``ambiguous`` when
at least two values survive.  If no assignment reproduces the counters at
all, the observations contradict the model and an
:class:`InconsistentObservationsError` is raised.

Everything here consumes attacker-visible data only: counter reports and
site logs.  Profiles, cookies and impression records never enter.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field, replace

from .errors import InconsistentObservationsError, UnknownIdError, ValidationError
from .gdn import VisitLogEntry, Website
from .marketplace import Ad, AdGroup, AudienceCounterReport, Bid, Campaign

# Sentinel meaning "this visitor matched no probed audience".  Kept as
# Python None internally; rendered as the string "none" at the edges.
NO_AUDIENCE = None


@dataclass(frozen=True)
class TrapConfig:
    """Configuration of one probing campaign.

    ``tracking_args`` maps an invited identity to the unique query argument
    embedded in her invitation link; arguments must be distinct or the
    reverse lookup in :func:`resolve_tracked_visits` would be meaningless.
    """

    site_id: str
    audiences_to_probe: tuple[str, ...]
    bid: Bid
    one_site_per_victim: bool = False
    tracking_args: dict[str, str] = field(default_factory=dict)
    total_budget: float = 1_000_000.0

    def __post_init__(self):
        if not self.audiences_to_probe:
            raise ValidationError("audiences_to_probe must not be empty")
        if len(set(self.audiences_to_probe)) != len(self.audiences_to_probe):
            raise ValidationError("audiences_to_probe contains duplicates")
        if self.bid.kind != "CPM":
            raise ValidationError("probing campaigns bid CPM; pay per view, not per click")
        args = list(self.tracking_args.values())
        if len(set(args)) != len(args):
            raise ValidationError("tracking_args must be injective (duplicate argument)")


@dataclass(frozen=True)
class WindowObservation:
    """Attacker-side join of one reporting window with the matching log slice."""

    window_index: int
    window_start: float
    window_end: float
    deltas: dict[str, int]
    visits: tuple[VisitLogEntry, ...]

    def __post_init__(self):
        for audience, n in self.deltas.items():
            if n < 0:
                raise ValidationError(
                    f"negative delta {n} for audience {audience!r} in window "
                    f"{self.window_index}"
                )


@dataclass(frozen=True)
class Assignment:
    """Outcome for one visitor.

    ``status`` is ``"exact"``, ``"ambiguous"`` or ``"unknown"``.  For exact,
    ``audience`` holds the probed audience id, or None when the visitor
    provably matched no probed audience.  For ambiguous, ``candidates``
    holds every surviving value (two or more; may include None).
    """

    status: str
    audience: str | None = None
    candidates: frozenset = frozenset()


@dataclass
class AttributionResult:
    assignments: dict[str, Assignment]
    accuracy: float | None = None
    correct: dict[str, bool] = field(default_factory=dict)
    inconsistent: bool = False

    def counts(self) -> dict[str, int]:
        tally = {"exact": 0, "ambiguous": 0, "unknown": 0}
        for a in self.assignments.values():
            tally[a.status] += 1
        return tally


def build_trap_campaign(config: TrapConfig, website: Website) -> Campaign:
    """One campaign, one ad group per probed audience, attacker site only.

    The exclusive placement is what makes every counter increment
    correspond to a logged visit; the builder refuses sites that are not
    attacker-owned or do not log.
    """
    if website.id != config.site_id:
        raise ValidationError(
            f"config names site {config.site_id!r} but got website {website.id!r}"
        )
    if website.owner != "attacker":
        raise ValidationError(f"website {website.id!r} is not attacker-owned")
    if not website.logging:
        raise ValidationError(f"website {website.id!r} does not log visits")
    groups = []
    for audience in config.audiences_to_probe:
        ad = Ad(
            id=f"trap_{config.site_id}_{audience}",
            landing_url=f"https://{website.domain}/",
            creative=f"probe:{audience}",
        )
        groups.append(
            AdGroup(
                id=f"trap_{config.site_id}_{audience}",
                name=f"probe {audience}",
                ads=(ad,),
                target_audiences=frozenset({audience}),
                bid=config.bid,
                placement=frozenset({config.site_id}),
            )
        )
    return Campaign(
        id=f"trap_{config.site_id}",
        name=f"probing campaign on {config.site_id}",
        ad_groups=tuple(groups),
        total_budget=config.total_budget,
    )


def assign_per_victim_sites(
    victims: list[str],
    config: TrapConfig,
    site_factory,
) -> dict[str, tuple[Website, Campaign]]:
    """One dedicated attacker site and campaign clone per victim.

    ``site_factory(victim_id)`` must return an attacker-owned, logging
    :class:`Website`.  With one victim per site, every window observation
    on that site is a singleton and inference cannot be confounded by
    co-visitors, whatever the visit timing.
    """
    out: dict[str, tuple[Website, Campaign]] = {}
    for victim in victims:
        site = site_factory(victim)
        campaign = build_trap_campaign(replace(config, site_id=site.id), site)
        out[victim] = (site, campaign)
    return out


def collect_observations(
    reports: list[AudienceCounterReport],
    log_entries: list[VisitLogEntry],
) -> list[WindowObservation]:
    """Join counter reports with log entries window by window.

    Windows are half-open: an entry stamped exactly on a boundary belongs
    to the later window.  Entries outside every reported window are
    dropped.  Duplicate window indices in the reports are rejected.
    """
    seen: set[int] = set()
    observations = []
    for report in sorted(reports, key=lambda r: r.window_index):
        if report.window_index in seen:
            raise ValidationError(f"duplicate report window index {report.window_index}")
        seen.add(report.window_index)
        visits = tuple(
            e
            for e in log_entries
            if report.window_start <= e.timestamp < report.window_end
        )
        observations.append(
            WindowObservation(
                window_index=report.window_index,
                window_start=report.window_start,
                window_end=report.window_end,
                deltas=dict(report.deltas),
                visits=visits,
            )
        )
    return observations


class _Window:
    """Mutable solver view of one observation: unfixed visit counts and
    the residual deltas still unexplained."""

    __slots__ = ("index", "counts", "resid")

    def __init__(self, obs: WindowObservation):
        self.index = obs.window_index
        self.counts = dict(Counter(v.network_id for v in obs.visits))
        self.resid = {a: int(n) for a, n in obs.deltas.items() if n > 0}


def _inconsistent(window: _Window, why: str) -> InconsistentObservationsError:
    return InconsistentObservationsError(
        f"inconsistent observations in window {window.index}: {why}"
    )


def infer_audiences(
    observations: list[WindowObservation],
    exhaustive_limit: int = 10**6,
) -> AttributionResult:
    """Solve the visitor/counter constraint model.

    Deterministic: equal observations give equal results, whatever the
    input order.  Raises :class:`InconsistentObservationsError` when no
    assignment reproduces the counters.
    """
    windows = [_Window(obs) for obs in observations]
    visitor_windows: dict[str, list[_Window]] = {}
    for w in windows:
        for nid in w.counts:
            visitor_windows.setdefault(nid, []).append(w)

    fixed: dict[str, str | None] = {}

    def fix(nid: str, value: str | None) -> None:
        fixed[nid] = value
        for w in visitor_windows[nid]:
            k = w.counts.pop(nid)
            if value is NO_AUDIENCE:
                continue
            have = w.resid.get(value, 0)
            if have < k:
                raise _inconsistent(
                    w, f"visitor {nid!r} needs {k} x {value!r} but only {have} remain"
                )
            if have == k:
                del w.resid[value]
            else:
                w.resid[value] = have - k

    # Stage 1: propagate forced values to a fixpoint.
    changed = True
    while changed:
        changed = False
        for w in windows:
            total_resid = sum(w.resid.values())
            if not w.counts:
                if total_resid:
                    raise _inconsistent(w, "deltas remain but no visits are left")
                continue
            if total_resid == 0:
                # Nothing left to explain: everyone here matched no
                # probed audience.
                for nid in list(w.counts):
                    fix(nid, NO_AUDIENCE)
                changed = True
            elif len(w.counts) == 1:
                (nid, k), = w.counts.items()
                if len(w.resid) == 1 and total_resid == k:
                    (audience, _), = w.resid.items()
                    fix(nid, audience)
                    changed = True
                else:
                    # One visitor contributes either nothing or exactly
                    # her visit count to a single audience.
                    raise _inconsistent(
                        w, f"visitor {nid!r} cannot produce deltas {w.resid}"
                    )
            elif len(w.resid) == 1 and total_resid == sum(w.counts.values()):
                (audience, _), = w.resid.items()
                for nid in list(w.counts):
                    fix(nid, audience)
                changed = True

    assignments: dict[str, Assignment] = {}
    for nid, value in fixed.items():
        assignments[nid] = Assignment("exact", audience=value)

    # Stage 2: independent components of the remaining visitors.  Two
    # visitors are linked when they share a window, so components can be
    # enumerated separately.
    remaining = sorted(nid for nid in visitor_windows if nid not in fixed)
    unresolved = set(remaining)
    while unresolved:
        seed_nid = min(unresolved)
        component = {seed_nid}
        frontier = [seed_nid]
        while frontier:
            nid = frontier.pop()
            for w in visitor_windows[nid]:
                for other in w.counts:
                    if other in unresolved and other not in component:
                        component.add(other)
                        frontier.append(other)
        unresolved -= component
        _solve_component(sorted(component), visitor_windows, exhaustive_limit, assignments)

    return AttributionResult(assignments)


def _solve_component(
    members: list[str],
    visitor_windows: dict[str, list[_Window]],
    exhaustive_limit: int,
    assignments: dict[str, Assignment],
) -> None:
    # Per-visitor domains: "none" always fits; an audience fits only if
    # every window the visitor appears in has enough residual delta to
    # absorb all her visits there.
    domains: list[list[str | None]] = []
    for nid in members:
        feasible: list[str | None] = [NO_AUDIENCE]
        candidates: set[str] = set()
        for w in visitor_windows[nid]:
            candidates |= set(w.resid)
        for audience in sorted(candidates):
            if all(
                w.resid.get(audience, 0) >= w.counts[nid]
                for w in visitor_windows[nid]
            ):
                feasible.append(audience)
        domains.append(feasible)

    size = 1
    for dom in domains:
        size *= len(dom)
        if size > exhaustive_limit:
            for nid in members:
                assignments[nid] = Assignment("unknown")
            return

    component_windows: dict[int, _Window] = {}
    for nid in members:
        for w in visitor_windows[nid]:
            component_windows[w.index] = w
    window_list = list(component_windows.values())

    survivors: list[set] = [set() for _ in members]
    position = {nid: i for i, nid in enumerate(members)}
    any_consistent = False
    for combo in itertools.product(*domains):
        ok = True
        for w in window_list:
            produced: Counter = Counter()
            for nid, k in w.counts.items():
                value = combo[position[nid]]
                if value is not NO_AUDIENCE:
                    produced[value] += k
            if produced != Counter(w.resid):
                ok = False
                break
        if ok:
            any_consistent = True
            for i, value in enumerate(combo):
                survivors[i].add(value)
    if not any_consistent:
        raise InconsistentObservationsError(
            "inconsistent observations: no audience assignment reproduces the "
            f"counters for visitors {members}"
        )
    for nid, values in zip(members, survivors):
        if len(values) == 1:
            assignments[nid] = Assignment("exact", audience=next(iter(values)))
        else:
            assignments[nid] = Assignment("ambiguous", candidates=frozenset(values))


def score_attribution(
    result: AttributionResult,
    truth_by_network: dict[str, set[str]],
    probed_audiences,
) -> AttributionResult:
    """Fill in accuracy against ground truth (evaluator side, not attacker).

    An exact assignment is correct when its audience really belongs to the
    visitor's probed audiences, or, for "none", when the visitor genuinely
    had no probed audience.  Ambiguous and unknown assignments never count
    as correct.  Accuracy is None when there are no assignments at all.
    """
    probed = set(probed_audiences)
    correct: dict[str, bool] = {}
    for nid, assignment in result.assignments.items():
        truth = set(truth_by_network.get(nid, set())) & probed
        if assignment.status == "exact":
            if assignment.audience is NO_AUDIENCE:
                correct[nid] = not truth
            else:
                correct[nid] = assignment.audience in truth
        else:
            correct[nid] = False
    accuracy = None
    if correct:
        accuracy = sum(correct.values()) / len(correct)
    return AttributionResult(
        assignments=dict(result.assignments),
        accuracy=accuracy,
        correct=correct,
        inconsistent=result.inconsistent,
    )


def resolve_tracked_visits(
    entries: list[VisitLogEntry],
    invitation_map: dict[str, str],
) -> dict[str, str]:
    """Bind network ids to invited identities via unique invitation args.

    ``invitation_map`` maps identity -> argument and must be injective.
    The first entry carrying a known argument binds that network id; later
    entries never rebind it.
    """
    reverse: dict[str, str] = {}
    for identity, arg in invitation_map.items():
        if arg in reverse:
            raise ValidationError(
                f"tracking argument {arg!r} is used by more than one identity"
            )
        reverse[arg] = identity
    resolved: dict[str, str] = {}
    for entry in sorted(entries, key=lambda e: e.timestamp):
        if entry.tracking_arg in reverse:
            resolved.setdefault(entry.network_id, reverse[entry.tracking_arg])
    return resolved


@dataclass(frozen=True)
class GroupStats:
    """Population split between two probed audiences.

    ``fraction`` is count_x / (count_x + count_y), or None when no
    impression hit either audience ("undefined" is not the same as zero).
    """

    audience_x: str
    audience_y: str
    count_x: int
    count_y: int
    fraction: float | None

    @property
    def defined(self) -> bool:
        return self.fraction is not None


def group_statistics(
    observations: list[WindowObservation],
    audience_x: str,
    audience_y: str,
) -> GroupStats:
    """Aggregate split of a visitor population between two audiences.

    Needs no per-visitor inference at all: summing deltas is enough, which
    is what makes group-level profiling so much cheaper than individual
    attribution.
    """
    if audience_x == audience_y:
        raise ValidationError("the two audiences must differ")
    for audience in (audience_x, audience_y):
        if not all(audience in obs.deltas for obs in observations):
            raise UnknownIdError(f"audience {audience!r} was not probed")
    count_x = sum(obs.deltas[audience_x] for obs in observations)
    count_y = sum(obs.deltas[audience_y] for obs in observations)
    total = count_x + count_y
    fraction = count_x / total if total else None
    return GroupStats(audience_x, audience_y, count_x, count_y, fraction)


def replay_exact(
    result: AttributionResult, observations: list[WindowObservation]
) -> bool:
    """Check exact assignments against the observations they came from.

    For every window whose visits all belong to exactly-classified
    visitors, replaying those values must reproduce the deltas; windows
    with ambiguous or unknown participants are only checked not to exceed
    the deltas.  Used by tests and diagnostics.
    """
    for obs in observations:
        produced: Counter = Counter()
        complete = True
        for visit in obs.visits:
            assignment = result.assignments.get(visit.network_id)
            if assignment is None or assignment.status != "exact":
                complete = False
                continue
            if assignment.audience is not NO_AUDIENCE:
                produced[assignment.audience] += 1
        actual = Counter({a: n for a, n in obs.deltas.items() if n > 0})
        if complete:
            if produced != actual:
                return False
        else:
            for audience, n in produced.items():
                if n > actual.get(audience, 0):
                    return False
    return True


def render_value(value: str | None) -> str:
    """External spelling of an assignment value ("none" for no audience)."""
    return value if value is not None else "none"


def summary_counts(result: AttributionResult) -> dict:
    counts = result.counts()
    counts["accuracy"] = result.accuracy
    return counts


def summary_line(result: AttributionResult) -> str:
    """The one-line digest printed after a run."""
    counts = result.counts()
    accuracy = "undefined" if result.accuracy is None else f"{result.accuracy:.4f}"
    return (
        f"exact={counts['exact']} ambiguous={counts['ambiguous']} "
        f"unknown={counts['unknown']} accuracy={accuracy}"
    )
