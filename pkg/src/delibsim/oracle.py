"""Brute-force oracles: naive recounts and exhaustive state-graph exploration.

Everything here re-derives results from raw definitions, deliberately
ignoring the optimized paths in ``space`` and ``transitions``, so the two
routes can be compared in tests.  Finite proposal spaces only.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .coalition import (
    CoalitionStructure,
    canonical_key,
    canonicalize,
    is_successful,
    lex_less,
    potential,
    signature,
)
from .space import DeliberationSpace, SupportReport
from .transitions import TRANSITION_KINDS, Transition, apply_transition, enumerate_transitions

DEFAULT_STATE_CAP = 200_000


class OracleError(ValueError):
    """Oracle asked for something outside its scope."""


def naive_max_support(space: DeliberationSpace) -> SupportReport:
    """Double loop over candidates and agents; finite spaces only."""
    if space.is_continuous:
        raise OracleError("naive max-support needs a finite proposal list")
    best = 0
    witnesses: list[str] = []
    for pid, _ in space.proposals:
        count = 0
        for vid in space.agent_ids:
            if space.agent_distance(vid, pid) < space.agent_distance(vid, "r"):
                count += 1
        if count > best:
            best = count
            witnesses = [pid]
        elif count == best and count > 0:
            witnesses.append(pid)
    if best == 0:
        return SupportReport(0, ())
    return SupportReport(best, tuple(witnesses))


def _subsets(members: Sequence[str]):
    for size in range(len(members) + 1):
        yield from itertools.combinations(members, size)


def naive_transitions(
    structure: CoalitionStructure, space: DeliberationSpace, kind: str
) -> list[Transition]:
    """Try every (pair, proposal, mover subset) combination against the rules.

    Exponential and proud of it; meant for cross-checking the structured
    enumerators on small finite scenarios.
    """
    if space.is_continuous:
        raise OracleError("naive enumeration needs a finite proposal list")
    if kind not in TRANSITION_KINDS:
        raise OracleError(f"unknown transition kind {kind!r}")
    out: list[Transition] = []
    indices = range(len(structure))

    def eligible(idx: int) -> bool:
        c = structure[idx]
        return c.size > 0 and not c.supports_status_quo

    if kind == "single_agent":
        for i in indices:
            for j in indices:
                if i == j or not eligible(i) or not eligible(j):
                    continue
                if structure[j].size < structure[i].size:
                    continue
                for vid in space.sort_agents(structure[i].members):
                    if space.approves(vid, structure[j].proposal):
                        out.append(
                            Transition(
                                "single_agent",
                                (i, j),
                                structure[j].proposal,
                                (frozenset({vid}), frozenset()),
                            )
                        )
        return out

    if kind == "follow":
        for i in indices:
            for j in indices:
                if i == j or not eligible(i) or not eligible(j):
                    continue
                if all(space.approves(v, structure[j].proposal) for v in structure[i].members):
                    out.append(
                        Transition(
                            "follow", (i, j), structure[j].proposal,
                            (structure[i].members, frozenset()),
                        )
                    )
        return out

    if kind == "merge":
        for i in indices:
            for j in indices:
                if not (i < j) or not eligible(i) or not eligible(j):
                    continue
                for pid in space.candidate_ids:
                    if all(
                        space.approves(v, pid)
                        for v in structure[i].members | structure[j].members
                    ):
                        out.append(
                            Transition(
                                "merge", (i, j), pid,
                                (structure[i].members, structure[j].members),
                            )
                        )
        return out

    if kind == "compromise":
        for i in indices:
            for j in indices:
                if not (i < j) or not eligible(i) or not eligible(j):
                    continue
                members_i = space.sort_agents(structure[i].members)
                members_j = space.sort_agents(structure[j].members)
                for pid in space.candidate_ids:
                    for sub_i in _subsets(members_i):
                        for sub_j in _subsets(members_j):
                            set_i, set_j = frozenset(sub_i), frozenset(sub_j)
                            if set_i != frozenset(space.supporters(structure[i].members, pid)):
                                continue
                            if set_j != frozenset(space.supporters(structure[j].members, pid)):
                                continue
                            if len(set_i | set_j) <= max(structure[i].size, structure[j].size):
                                continue
                            out.append(Transition("compromise", (i, j), pid, (set_i, set_j)))
        return out

    # subsume
    for i in indices:
        for j in indices:
            if i == j or not eligible(i) or not eligible(j):
                continue
            members_i = space.sort_agents(structure[i].members)
            for pid in space.candidate_ids:
                if frozenset(space.supporters(structure[j].members, pid)) != structure[j].members:
                    continue
                for sub_i in _subsets(members_i):
                    set_i = frozenset(sub_i)
                    if not set_i:
                        continue
                    if set_i != frozenset(space.supporters(structure[i].members, pid)):
                        continue
                    if len(set_i) + structure[j].size <= structure[i].size:
                        continue
                    out.append(Transition("subsume", (i, j), pid, (set_i, structure[j].members)))
    return out


@dataclass(frozen=True)
class ExploreReport:
    """Exhaustive reachability report over canonicalized structures.

    ``terminal_keys`` lists canonical keys of states with no allowed
    transition, with ``terminal_successful`` aligned.  The witness path is a
    shortest transition sequence from the initial structure to some
    unsuccessful terminal, or None when every terminal is successful.
    ``potential_monotone`` covers single_agent/follow/merge/subsume edges,
    ``signature_monotone`` covers compromise/subsume edges; both true means
    the explored graph is acyclic under the corresponding orders.
    """

    states_visited: int
    edges: int
    truncated: bool
    terminal_keys: tuple[str, ...]
    terminal_successful: tuple[bool, ...]
    all_terminals_successful: bool
    unsuccessful_witness: Optional[tuple[Transition, ...]]
    potential_monotone: bool
    signature_monotone: bool
    structures: dict

    @property
    def terminal_count(self) -> int:
        return len(self.terminal_keys)


def explore(
    space: DeliberationSpace,
    initial: CoalitionStructure,
    kinds: Sequence[str],
    state_cap: int = DEFAULT_STATE_CAP,
) -> ExploreReport:
    """Breadth-first search of every structure reachable under the kinds.

    States are canonical forms; the cap bounds visited states and a capped
    search reports ``truncated`` with the partial graph retained.
    """
    if space.is_continuous:
        raise OracleError("exploration needs a finite proposal list")
    for kind in kinds:
        if kind not in TRANSITION_KINDS:
            raise OracleError(f"unknown transition kind {kind!r}")

    start = canonicalize(initial)
    start_key = canonical_key(start)
    structures: dict[str, CoalitionStructure] = {start_key: start}
    parents: dict[str, tuple[Optional[str], Optional[Transition]]] = {start_key: (None, None)}
    queue: deque[str] = deque([start_key])
    terminal_keys: list[str] = []
    terminal_successful: list[bool] = []
    first_unsuccessful: Optional[str] = None
    truncated = False
    edges = 0
    potential_monotone = True
    signature_monotone = True

    while queue:
        key = queue.popleft()
        state = structures[key]
        moves: list[Transition] = []
        for kind in kinds:
            moves.extend(enumerate_transitions(state, space, kind))
        if not moves:
            ok = is_successful(state, space)
            terminal_keys.append(key)
            terminal_successful.append(ok)
            if not ok and first_unsuccessful is None:
                first_unsuccessful = key
            continue
        for move in moves:
            successor = apply_transition(state, space, move)
            edges += 1
            if move.kind in ("single_agent", "follow", "merge", "subsume"):
                if potential(successor) <= potential(state):
                    potential_monotone = False
            if move.kind in ("compromise", "subsume"):
                if not lex_less(signature(state), signature(successor)):
                    signature_monotone = False
            successor_key = canonical_key(successor)
            if successor_key in structures:
                continue
            if len(structures) >= state_cap:
                truncated = True
                continue
            structures[successor_key] = canonicalize(successor)
            parents[successor_key] = (key, move)
            queue.append(successor_key)

    witness: Optional[tuple[Transition, ...]] = None
    if first_unsuccessful is not None:
        path: list[Transition] = []
        cursor = first_unsuccessful
        while True:
            parent, move = parents[cursor]
            if parent is None:
                break
            path.append(move)
            cursor = parent
        witness = tuple(reversed(path))

    return ExploreReport(
        states_visited=len(structures),
        edges=edges,
        truncated=truncated,
        terminal_keys=tuple(terminal_keys),
        terminal_successful=tuple(terminal_successful),
        all_terminals_successful=all(terminal_successful) if terminal_keys else True,
        unsuccessful_witness=witness,
        potential_monotone=potential_monotone,
        signature_monotone=signature_monotone,
        structures=structures,
    )
