"""Logical MPC accounting: machines with word budgets, synchronous rounds,
and violation-first ledgers.

One word holds one vertex id or one edge endpoint, so a subgraph with n'
vertices and m' edges costs n' + 2*m' words. Machines are work items, not
processes; the ledger, not placement, is the contract being checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, PartitionAssignment
from .rng import rng_from


@dataclass(frozen=True)
class MachineSpec:
    """Cluster shape: machine count and word budgets."""

    machine_count: int
    space_per_machine: int
    total_space_cap: int

    def __post_init__(self):
        if self.machine_count < 1:
            raise ValueError("need at least one machine")
        if self.space_per_machine < 1:
            raise ValueError("space per machine must be >= 1")
        if self.total_space_cap < self.space_per_machine:
            raise ValueError("total cap below a single machine's space")


def space_of_subgraph(Gi: Graph) -> int:
    """Words to hold a subgraph: one per vertex plus two per edge."""
    return space_words(Gi.n, Gi.m)


def space_words(n_vertices: int, m_edges: int) -> int:
    return int(n_vertices) + 2 * int(m_edges)


@dataclass
class RoundRecord:
    """One synchronous round: per-machine words, checked against a budget."""

    index: int
    label: str
    budget: int
    delta: int | None = None
    words_used: dict = field(default_factory=dict)    # machine -> words
    message_words: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def max_words(self) -> int:
        return max(self.words_used.values()) if self.words_used else 0

    def total_words(self) -> int:
        return sum(self.words_used.values())


class RoundLog:
    """Append-only log of rounds; budget violations are recorded, never
    dropped or raised."""

    def __init__(self, total_space_cap: int | None = None):
        self.total_space_cap = total_space_cap
        self.rounds: list[RoundRecord] = []

    def begin_round(self, label: str, budget: int, delta: int | None = None
                    ) -> RoundRecord:
        rec = RoundRecord(index=len(self.rounds), label=label,
                          budget=int(budget), delta=delta)
        self.rounds.append(rec)
        return rec

    def charge(self, machine: int, words: int) -> "RoundLog":
        if not self.rounds:
            raise ValueError("no round in progress")
        if machine < 0:
            raise ValueError("machine index must be nonnegative")
        words = int(words)
        if words < 0:
            raise ValueError("cannot charge negative words")
        rec = self.rounds[-1]
        before = rec.words_used.get(machine, 0)
        after = before + words
        rec.words_used[machine] = after
        rec.message_words[machine] = rec.message_words.get(machine, 0) + words
        if after > rec.budget and before <= rec.budget:
            rec.violations.append({"kind": "machine", "machine": machine,
                                   "words": after, "budget": rec.budget})
        if self.total_space_cap is not None:
            total = rec.total_words()
            if total > self.total_space_cap and \
                    total - words <= self.total_space_cap:
                rec.violations.append({"kind": "total", "words": total,
                                       "budget": self.total_space_cap})
        return self

    @property
    def round_count(self) -> int:
        return len(self.rounds)

    @property
    def space_clean(self) -> bool:
        return not any(r.violations for r in self.rounds)

    def max_words(self, label: str | None = None) -> int:
        rounds = [r for r in self.rounds if label is None or r.label == label]
        return max((r.max_words() for r in rounds), default=0)

    def to_json_dict(self) -> dict:
        return {
            "schema": "mpcmatch.roundlog/1",
            "total_space_cap": self.total_space_cap,
            "space_clean": self.space_clean,
            "rounds": [
                {
                    "index": r.index,
                    "label": r.label,
                    "delta": r.delta,
                    "budget": r.budget,
                    "machine_words": {str(k): v
                                      for k, v in sorted(r.words_used.items())},
                    "message_words": {str(k): v
                                      for k, v in sorted(r.message_words.items())},
                    "violations": r.violations,
                }
                for r in self.rounds
            ],
        }


def charge_round(log: RoundLog, machine: int, words: int) -> RoundLog:
    """Accumulate words onto a machine in the log's current round."""
    return log.charge(machine, words)


def assign_partitions(n: int, k: int, seed) -> PartitionAssignment:
    """Independent uniform partition of n vertices into groups 1..k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = rng_from(seed, 0xC1)
    chi = rng.integers(1, k, size=n, dtype=np.int32, endpoint=True)
    return PartitionAssignment(chi, k)
