"""Deliberation spaces: agents, proposals and support queries over a metric.

A space is immutable after construction.  Feasibility results for agent
subsets are memoized on the instance because the subset oracle, the merge
synthesis and the compromise search all probe the same sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .geometry import (
    APPROVAL_MARGIN,
    Coords,
    EuclideanMetric,
    ExplicitMetric,
    FeasibilityResult,
    Metric,
    MetricError,
    approves,
    best_common_proposal,
    distance,
)

STATUS_QUO_ID = "r"

DEFAULT_ORACLE_CAP = 16

ProposalRef = Union[str, Coords]
PointRefLike = Union[str, Sequence]


class SpaceError(ValueError):
    """Invalid space definition or unsupported query."""

    def __init__(self, message: str, clause: str = "space"):
        super().__init__(message)
        self.clause = clause


class OracleCapError(RuntimeError):
    """The continuous support oracle was asked to search too many agents."""


@dataclass(frozen=True)
class SupportReport:
    """Maximum support over candidate proposals and the attaining witnesses.

    ``m_star == 0`` means every approval set is empty; then ``witnesses`` is
    empty as well.  Finite spaces list every attaining proposal id in
    declaration order; continuous spaces carry a single witness point.
    """

    m_star: int
    witnesses: tuple[ProposalRef, ...]


class DeliberationSpace:
    """Finite or continuous proposal space with named agents and a status quo.

    ``proposals`` is None for continuous spaces (every coordinate tuple of
    the right dimension is a candidate) or an ordered tuple of
    (id, location) pairs for the candidates other than the status quo.  The
    id ``"r"`` is reserved for the status quo and resolves to its location.
    """

    def __init__(
        self,
        metric: Metric,
        agents: Sequence[tuple[str, PointRefLike]] | Sequence,
        status_quo,
        proposals: Optional[Sequence] = None,
    ):
        self.metric = metric
        continuous = proposals is None
        if continuous and not isinstance(metric, EuclideanMetric):
            raise SpaceError(
                "continuous proposal spaces require a euclidean metric",
                clause="space.continuous_metric",
            )

        self.status_quo = self._check_location(status_quo, "status quo")

        agent_pairs = []
        seen_agents = set()
        for entry in agents:
            vid, loc = entry
            if not isinstance(vid, str) or not vid:
                raise SpaceError(f"agent id must be a non-empty string, got {vid!r}", clause="space.agent_ids")
            if vid == STATUS_QUO_ID:
                raise SpaceError(f"agent id {STATUS_QUO_ID!r} is reserved", clause="space.agent_ids")
            if vid in seen_agents:
                raise SpaceError(f"duplicate agent id {vid!r}", clause="space.agent_ids")
            seen_agents.add(vid)
            agent_pairs.append((vid, self._check_location(loc, f"agent {vid!r}")))
        if not agent_pairs:
            raise SpaceError("need at least one agent", clause="space.agent_ids")
        self.agents = tuple(agent_pairs)
        self._agent_loc = dict(self.agents)
        self._agent_order = {vid: i for i, (vid, _) in enumerate(self.agents)}

        if continuous:
            self.proposals = None
        else:
            candidate_pairs = []
            seen_props = set()
            for entry in proposals:
                pid, loc = entry
                if not isinstance(pid, str) or not pid:
                    raise SpaceError(
                        f"proposal id must be a non-empty string, got {pid!r}", clause="space.proposal_ids"
                    )
                if pid == STATUS_QUO_ID:
                    raise SpaceError(
                        f"proposal id {STATUS_QUO_ID!r} is reserved for the status quo",
                        clause="space.proposal_ids",
                    )
                if pid in seen_props:
                    raise SpaceError(f"duplicate proposal id {pid!r}", clause="space.proposal_ids")
                seen_props.add(pid)
                candidate_pairs.append((pid, self._check_location(loc, f"proposal {pid!r}")))
            self.proposals = tuple(candidate_pairs)
            self._proposal_loc = dict(self.proposals)

        self._feasibility: dict[frozenset, object] = {}
        self._support_memo: dict[int, SupportReport] = {}

    # -- construction helpers -------------------------------------------------

    def _check_location(self, loc, what: str):
        if isinstance(self.metric, EuclideanMetric):
            if isinstance(loc, str):
                raise SpaceError(f"{what}: euclidean spaces use coordinates, not ids", clause="space.coords")
            coords = tuple(float(c) for c in loc)
            if len(coords) != self.metric.dimension:
                raise SpaceError(
                    f"{what}: expected {self.metric.dimension} coordinates, got {len(coords)}",
                    clause="space.dimension",
                )
            return coords
        if not isinstance(loc, str):
            raise SpaceError(f"{what}: explicit metrics use point ids, not coordinates", clause="space.coords")
        if loc not in self.metric._index:
            raise SpaceError(f"{what}: unknown metric point id {loc!r}", clause="space.unknown_id")
        return loc

    # -- basic accessors ------------------------------------------------------

    @property
    def is_continuous(self) -> bool:
        return self.proposals is None

    @property
    def dimension(self) -> Optional[int]:
        return self.metric.dimension if isinstance(self.metric, EuclideanMetric) else None

    @property
    def agent_ids(self) -> tuple[str, ...]:
        return tuple(vid for vid, _ in self.agents)

    @property
    def candidate_ids(self) -> tuple[str, ...]:
        if self.is_continuous:
            raise SpaceError("continuous space has no finite candidate list", clause="space.continuous")
        return tuple(pid for pid, _ in self.proposals)

    def agent_location(self, vid: str):
        try:
            return self._agent_loc[vid]
        except KeyError:
            raise SpaceError(f"unknown agent id {vid!r}", clause="space.unknown_id") from None

    def agent_order(self, vid: str) -> int:
        return self._agent_order[vid]

    def proposal_location(self, ref: ProposalRef):
        """Resolve a proposal reference (id or coordinates) to a location."""
        if isinstance(ref, str):
            if ref == STATUS_QUO_ID:
                return self.status_quo
            if self.is_continuous:
                raise SpaceError(
                    f"continuous space has no proposal id {ref!r}", clause="structure.unknown_proposal"
                )
            try:
                return self._proposal_loc[ref]
            except KeyError:
                raise SpaceError(
                    f"unknown proposal id {ref!r}", clause="structure.unknown_proposal"
                ) from None
        if not self.is_continuous:
            raise SpaceError(
                "finite spaces reference proposals by id", clause="structure.unknown_proposal"
            )
        coords = tuple(float(c) for c in ref)
        if len(coords) != self.metric.dimension:
            raise SpaceError(
                f"proposal has {len(coords)} coordinates, expected {self.metric.dimension}",
                clause="space.dimension",
            )
        return coords

    def sort_agents(self, ids: Iterable[str]) -> list[str]:
        """Agents sorted by their declaration order in this space."""
        return sorted(ids, key=lambda v: self._agent_order[v])

    # -- approval queries ------------------------------------------------------

    def agent_distance(self, vid: str, ref: ProposalRef) -> float:
        return distance(self.agent_location(vid), self.proposal_location(ref), self.metric)

    def approves(self, vid: str, ref: ProposalRef) -> bool:
        """Strict approval of a proposal reference by a named agent."""
        loc = self.agent_location(vid)
        return approves(loc, self.proposal_location(ref), self.status_quo, self.metric)

    def approval_set(self, vid: str) -> set[str]:
        """Candidate ids the agent strictly approves.  Finite spaces only."""
        if self.is_continuous:
            raise SpaceError(
                "approval_set is undefined on continuous proposal spaces", clause="space.continuous"
            )
        return {pid for pid in self.candidate_ids if self.approves(vid, pid)}

    def supporters(self, ids: Iterable[str], ref: ProposalRef) -> set[str]:
        """Subset of the given agents that strictly approve the proposal."""
        return {vid for vid in ids if self.approves(vid, ref)}

    # -- joint feasibility (continuous synthesis) ------------------------------

    def common_report(self, ids: Iterable[str]) -> FeasibilityResult:
        """Best common proposal for the given agents (euclidean spaces)."""
        if not isinstance(self.metric, EuclideanMetric):
            raise SpaceError(
                "joint-proposal synthesis needs a euclidean metric", clause="space.continuous_metric"
            )
        ordered = self.sort_agents(set(ids))
        return best_common_proposal([self.agent_location(v) for v in ordered], self.status_quo)

    def feasible_witness(self, ids: Iterable[str]) -> Optional[Coords]:
        """Witness point all given agents approve with margin, or None.

        Memoized per agent set.  A set is rejected without solving when some
        pair of approval balls cannot intersect with the required margin.
        """
        key = frozenset(ids)
        if not key:
            return None
        if key in self._feasibility:
            cached = self._feasibility[key]
            return cached if cached is None or isinstance(cached, tuple) else None
        witness: Optional[Coords] = None
        if not self._pairwise_prune(key):
            report = self.common_report(key)
            if report.feasible:
                witness = report.witness
        self._feasibility[key] = witness
        return witness

    def _pairwise_prune(self, ids: frozenset) -> bool:
        # max slack over a pair is at least (dist(u,v) - rad_u - rad_v) / 2
        # at every point, so such a pair makes the whole set infeasible.
        ordered = self.sort_agents(ids)
        radii = {v: distance(self.agent_location(v), self.status_quo, self.metric) for v in ordered}
        for v in ordered:
            if radii[v] <= APPROVAL_MARGIN:
                return True
        for u, v in itertools.combinations(ordered, 2):
            gap = distance(self.agent_location(u), self.agent_location(v), self.metric)
            if (gap - radii[u] - radii[v]) / 2.0 >= -APPROVAL_MARGIN:
                return True
        return False

    # -- maximum support -------------------------------------------------------

    def max_support(self, oracle_cap: int = DEFAULT_ORACLE_CAP) -> SupportReport:
        """Maximum number of agents any single non-status-quo proposal attracts.

        Finite spaces count supporters of every candidate exactly.
        Continuous spaces run a descending-cardinality subset search with
        joint-feasibility checks (margin below -APPROVAL_MARGIN), pruning
        subsets containing a pair of disjoint approval balls, and stop at the
        first feasible subset of each cardinality.
        """
        memo_key = oracle_cap if self.is_continuous else -1
        if memo_key in self._support_memo:
            return self._support_memo[memo_key]
        report = self._compute_max_support(oracle_cap)
        self._support_memo[memo_key] = report
        return report

    def _compute_max_support(self, oracle_cap: int) -> SupportReport:
        if not self.is_continuous:
            best = 0
            witnesses: list[str] = []
            for pid in self.candidate_ids:
                count = len(self.supporters(self.agent_ids, pid))
                if count > best:
                    best = count
                    witnesses = [pid]
                elif count == best and count > 0:
                    witnesses.append(pid)
            if best == 0:
                return SupportReport(0, ())
            return SupportReport(best, tuple(witnesses))

        if len(self.agents) > oracle_cap:
            raise OracleCapError(
                f"continuous support oracle capped at {oracle_cap} agents, space has {len(self.agents)}"
            )
        eligible = [
            vid
            for vid, loc in self.agents
            if distance(loc, self.status_quo, self.metric) > APPROVAL_MARGIN
        ]
        for size in range(len(eligible), 0, -1):
            for subset in itertools.combinations(eligible, size):
                witness = self.feasible_witness(subset)
                if witness is not None:
                    return SupportReport(size, (witness,))
        return SupportReport(0, ())
