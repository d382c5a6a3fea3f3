"""Specialized Hungarian solver for typed slot allocation.

Standard primal-dual matching, one phase per slot (best slot first), with two
structural shortcuts: the candidate scan when a slot joins the alternating
tree inspects only a few ads per type, and dual updates are implicit (a
single accumulated shift per phase plus per-node entry timestamps), written
back explicitly when the phase's augmenting path is applied.

The scan keeps an ad out of the queue only when a matched same-type witness
proves, by the crossing argument, that the ad's edge to the scanned slot can
never bind while the witness's matched edge stays tight; that proof needs
the witness to be strictly worse in value and strictly better in discount
(or vice versa).  With strictly decreasing values and discounts the witness
always exists and the scan touches at most three ads per type (unmatched
head, one matched below, one matched above); ties widen the scan just enough
to stay safe.

The duals certify optimality: feasible (u_i + p_j >= v_ij everywhere),
non-negative, tight on every matched edge, and zero on unmatched ads.
"""
from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .core import (
    TOL,
    AdRef,
    Instance,
    Matching,
    ValidationError,
    edge_matrix,
    edge_value,
    ensure_valid,
    has_gap_rules,
    welfare,
)


@lru_cache(maxsize=64)
def _strictly_decreasing_curves(inst: Instance) -> tuple[bool, ...]:
    return tuple(all(spec.discounts[j] > spec.discounts[j + 1]
                     for j in range(inst.num_slots - 1))
                 for spec in inst.types)


@dataclass(frozen=True)
class DualSolution:
    """Per-ad utilities ``u`` (indexed [type][rank]) and slot prices ``p``."""

    u: tuple[tuple[float, ...], ...]
    p: tuple[float, ...]

    def u_of(self, ad: AdRef) -> float:
        return self.u[ad.ad_type][ad.rank]


@dataclass
class SolveStats:
    """Instrumentation collected during a solve."""

    max_queue_occupancy: int = 0
    max_scan_candidates: int = 0
    scan_calls: int = 0
    total_pops: int = 0
    phases: list[tuple[int, int, float, int]] = field(default_factory=list)
    phase_matchings: list[Matching] | None = None


@dataclass
class OptimalSolution:
    matching: Matching
    duals: DualSolution
    welfare: float
    stats: SolveStats | None = None


class PhaseState:
    """One phase of the solver: alternating tree, candidate queue, dual shift.

    ``u``/``p`` are the duals at phase start; the queue keys each candidate
    ad by the accumulated shift at which its best crossing edge goes tight,
    so a pop is a dual update and a tree extension in one step.
    """

    def __init__(self, inst: Instance, matching: Matching, root_slot: int,
                 u=None, p=None):
        self.inst = inst
        n, k = inst.num_slots, inst.num_types
        if u is None:
            u = [[0.0] * n for _ in range(k)]
        if p is None:
            top = max(spec.values[0] * spec.discounts[0] for spec in inst.types)
            p = [top] * n
        self.u = u
        self.p = p
        self.root = root_slot
        self.matched = matching.as_dict()
        self.ad_slot = {ad: s for s, ad in self.matched.items()}
        self.tree_ads: dict[AdRef, float] = {}
        self.tree_slots: dict[int, float] = {root_slot: 0.0}
        self.parent_slot: dict[AdRef, int] = {}
        self.delta_acc = 0.0
        self.queue: list = []
        self.best: dict[AdRef, tuple[float, int]] = {}
        self._seq = 0
        self.pops = 0
        self.last_scan_candidates: list[AdRef] = []
        self.max_queue_occupancy = 0
        self.max_scan_candidates = 0
        self.scan_calls = 0
        self._index_type_frontiers()
        self.update_possible_new_edges(root_slot)

    def _index_type_frontiers(self):
        """Per type: matched ads sorted by rank and by slot (with rank
        extrema over slot prefixes/suffixes), the lowest unmatched rank, and
        whether the type is tie-free.  The matching is fixed for the whole
        phase, so this is built once."""
        k, n = self.inst.num_types, self.inst.num_slots
        strict_curves = _strictly_decreasing_curves(self.inst)
        per_type: list[list[tuple[int, int]]] = [[] for _ in range(k)]
        for slot, ad in self.matched.items():
            per_type[ad.ad_type].append((ad.rank, slot))
        self._matched_by_rank = []
        self._matched_slots = []
        self._prefix_max_rank = []
        self._suffix_min_rank = []
        self._unmatched_head = []
        self._tie_free = []
        for t in range(k):
            per_type[t].sort()
            self._matched_by_rank.append(per_type[t])
            spec = self.inst.types[t]
            by_slot = sorted((s, r) for r, s in per_type[t])
            slots = [s for s, _ in by_slot]
            ranks = [r for _, r in by_slot]
            self._matched_slots.append(slots)
            pref = []
            best = -1
            for r in ranks:
                best = max(best, r)
                pref.append(best)
            self._prefix_max_rank.append(pref)
            suff = [0] * len(ranks)
            best = n + 1
            for i in range(len(ranks) - 1, -1, -1):
                best = min(best, ranks[i])
                suff[i] = best
            self._suffix_min_rank.append(suff)
            taken = {r for r, _ in per_type[t]}
            head = 0
            while head in taken:
                head += 1
            self._unmatched_head.append(head if head < n else None)
            vals = sorted(spec.values[r] for r in taken)
            distinct_values = all(vals[i] < vals[i + 1]
                                  for i in range(len(vals) - 1))
            self._tie_free.append(distinct_values and strict_curves[t])

    def scan_candidates(self, slot: int) -> list[AdRef]:
        """The ads whose edge to ``slot`` might yet go tight this phase.

        Per type: the lowest-rank unmatched ad; matched ads below the slot
        from the highest rank down until one is strictly protected (an
        already-listed ad with strictly smaller value at a strictly better
        discount); matched ads above the slot from the lowest rank up,
        symmetrically.  A tie-free type (distinct matched values, strictly
        decreasing curve) is always protected by its first listed ad, so it
        contributes at most one candidate per case."""
        cands = []
        for t in range(self.inst.num_types):
            head = self._unmatched_head[t]
            if head is not None:
                cands.append(AdRef(t, head))
            if self._tie_free[t]:
                slots = self._matched_slots[t]
                lo = bisect_left(slots, slot)
                if lo > 0:
                    cands.append(AdRef(t, self._prefix_max_rank[t][lo - 1]))
                hi = bisect_right(slots, slot)
                if hi < len(slots):
                    cands.append(AdRef(t, self._suffix_min_rank[t][hi]))
                continue
            spec = self.inst.types[t]
            a_scan = spec.discounts[slot]
            pairs = self._matched_by_rank[t]
            # matched below the slot, descending rank (ascending value)
            protect_v = None
            for rank, s in reversed(pairs):
                if s >= slot:
                    continue
                v = spec.values[rank]
                if protect_v is not None and protect_v < v:
                    break
                cands.append(AdRef(t, rank))
                if spec.discounts[s] > a_scan and \
                        (protect_v is None or v < protect_v):
                    protect_v = v
            # matched above the slot, ascending rank (descending value)
            protect_v = None
            for rank, s in pairs:
                if s <= slot:
                    continue
                v = spec.values[rank]
                if protect_v is not None and protect_v > v:
                    break
                cands.append(AdRef(t, rank))
                if spec.discounts[s] < a_scan and \
                        (protect_v is None or v > protect_v):
                    protect_v = v
        return cands

    def update_possible_new_edges(self, slot: int) -> "PhaseState":
        """Offer the candidate edges into ``slot`` to the queue, lowering a
        candidate's key when this edge goes tight sooner than its current
        best.  Ads already in the tree are skipped."""
        cands = self.scan_candidates(slot)
        self.last_scan_candidates = cands
        self.scan_calls += 1
        self.max_scan_candidates = max(self.max_scan_candidates, len(cands))
        potential = self.p[slot] + self.tree_slots[slot]
        for ad in cands:
            if ad in self.tree_ads:
                continue
            value = edge_value(self.inst, ad, slot)
            key = self.u[ad.ad_type][ad.rank] + potential - value
            cur = self.best.get(ad)
            if cur is None or key < cur[0]:
                self.best[ad] = (key, slot)
                # equal keys resolve in the global edge order
                tie = (-value, slot, ad.ad_type, ad.rank)
                heapq.heappush(self.queue, (key, tie, self._seq, ad, slot))
                self._seq += 1
        self.max_queue_occupancy = max(self.max_queue_occupancy, len(self.best))
        return self

    def pop_next_tight(self) -> tuple[AdRef, int]:
        """Pop the live entry with minimal key and advance the dual shift to
        its tightness point (the step can be zero)."""
        while self.queue:
            key, _tie, _seq, ad, slot = heapq.heappop(self.queue)
            if ad in self.tree_ads or self.best.get(ad) != (key, slot):
                continue
            assert key >= self.delta_acc - 1e-9, "queue key regressed"
            self.delta_acc = max(self.delta_acc, key)
            del self.best[ad]
            self.pops += 1
            return ad, slot
        raise AssertionError("phase queue exhausted before augmenting "
                             "(impossible once every type is padded)")

    def grow(self, ad: AdRef, via_slot: int) -> int | None:
        """Add a popped ad to the tree.  Returns its matched slot when the
        tree grows, or None when the ad is unmatched (augmenting path found)."""
        self.parent_slot[ad] = via_slot
        s = self.ad_slot.get(ad)
        if s is None:
            return None
        self.tree_ads[ad] = self.delta_acc
        self.tree_slots[s] = self.delta_acc
        return s

    def augment(self, free_ad: AdRef) -> tuple[dict[int, AdRef], int]:
        """Flip the alternating path from the free ad back to the root and
        return the updated slot assignment plus the path length in edges."""
        assignment = dict(self.matched)
        ad = free_ad
        hops = 0
        while True:
            s = self.parent_slot[ad]
            displaced = assignment.get(s)
            assignment[s] = ad
            hops += 1
            if s == self.root:
                break
            ad = displaced
            hops += 1
        return assignment, hops

    def writeback_duals(self) -> None:
        """Apply the accumulated shift: in-tree ads gained, in-tree slots lost,
        each measured from its own entry time."""
        for ad, entry in self.tree_ads.items():
            self.u[ad.ad_type][ad.rank] += self.delta_acc - entry
        for slot, entry in self.tree_slots.items():
            self.p[slot] -= self.delta_acc - entry


def update_possible_new_edges(state: PhaseState, inst: Instance,
                              m: Matching, slot: int) -> PhaseState:
    """Functional wrapper over :meth:`PhaseState.update_possible_new_edges`."""
    if state.inst is not inst and state.inst != inst:
        raise ValueError("state was built for a different instance")
    if slot not in state.tree_slots:
        state.tree_slots[slot] = state.delta_acc
    return state.update_possible_new_edges(slot)


def solve_adtypes(inst: Instance, *, trace: Callable[[str], None] | None = None,
                  collect_phase_matchings: bool = False) -> OptimalSolution:
    """Optimal matching plus certifying duals.

    Slots are processed in descending discount order (slot 0 first), one
    phase per slot, so after phase ``j`` the matching is optimal for the
    sub-instance made of slots ``0..j``.  Rejects instances with gap rules.
    """
    ensure_valid(inst)
    if has_gap_rules(inst):
        raise ValidationError("instance has gap rules: use the gap dynamic program")
    n, k = inst.num_slots, inst.num_types
    u = [[0.0] * n for _ in range(k)]
    top = max(spec.values[0] * spec.discounts[0] for spec in inst.types)
    p = [top] * n
    matching = Matching({})
    stats = SolveStats(phase_matchings=[] if collect_phase_matchings else None)

    for j in range(n):
        phase = PhaseState(inst, matching, j, u=u, p=p)
        while True:
            ad, via = phase.pop_next_tight()
            matched_slot = phase.grow(ad, via)
            if matched_slot is None:
                break
            phase.update_possible_new_edges(matched_slot)
        assignment, hops = phase.augment(ad)
        phase.writeback_duals()
        matching = Matching(assignment)
        stats.max_queue_occupancy = max(stats.max_queue_occupancy,
                                        phase.max_queue_occupancy)
        stats.max_scan_candidates = max(stats.max_scan_candidates,
                                        phase.max_scan_candidates)
        stats.scan_calls += phase.scan_calls
        stats.total_pops += phase.pops
        stats.phases.append((j, phase.pops, phase.delta_acc, hops))
        if stats.phase_matchings is not None:
            stats.phase_matchings.append(matching)
        if trace is not None:
            trace(f"phase={j} pops={phase.pops} delta={phase.delta_acc:g} "
                  f"pathlen={hops}")

    duals = DualSolution(tuple(tuple(row) for row in u), tuple(p))
    return OptimalSolution(matching, duals, welfare(inst, matching), stats)


# ---------------------------------------------------------------------------
# Certification

@dataclass
class CertificateReport:
    passed: bool
    worst_violation: float
    messages: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def certify(inst: Instance, sol: OptimalSolution, tol: float = TOL) -> CertificateReport:
    """Check the dual certificate: feasibility on every edge, non-negative
    duals, tightness of matched edges, zero utility on unmatched ads, and
    welfare against the dual value on the matched subgraph."""
    msgs: list[str] = []
    worst = 0.0
    values = edge_matrix(inst)
    u = np.asarray(sol.duals.u)
    p = np.asarray(sol.duals.p)
    k, n = inst.num_types, inst.num_slots
    if u.shape != (k, n) or p.shape != (n,):
        return CertificateReport(False, float("inf"), ["dual dimensions wrong"])

    neg = min(float(u.min()), float(p.min()))
    if neg < -tol:
        worst = max(worst, -neg)
        msgs.append(f"negative dual variable ({neg:g})")

    slack = u[:, :, None] + p[None, None, :] - values
    min_slack = float(slack.min())
    if min_slack < -tol:
        worst = max(worst, -min_slack)
        msgs.append(f"dual infeasible: worst edge slack {min_slack:g}")

    dual_on_matched = 0.0
    matched_mask = np.zeros((k, n), dtype=bool)
    for slot, ad in sol.matching.pairs:
        if not (0 <= slot < n and 0 <= ad.ad_type < k and 0 <= ad.rank < n):
            return CertificateReport(False, float("inf"),
                                     [f"matched pair out of range: {slot}, {ad}"])
        matched_mask[ad.ad_type, ad.rank] = True
        resid = abs(float(slack[ad.ad_type, ad.rank, slot]))
        if resid > tol:
            worst = max(worst, resid)
            msgs.append(f"matched edge slot {slot} not tight (residual {resid:g})")
        dual_on_matched += u[ad.ad_type, ad.rank] + p[slot]

    # complementary slackness on the ad side: losers carry no utility
    loose = float(u[~matched_mask].max(initial=0.0))
    if loose > tol:
        worst = max(worst, loose)
        msgs.append(f"unmatched ad has positive utility ({loose:g})")

    w = welfare(inst, sol.matching)
    scale = max(1.0, abs(w))
    if abs(w - sol.welfare) > tol * scale:
        worst = max(worst, abs(w - sol.welfare))
        msgs.append("stored welfare does not match the matching")
    if abs(dual_on_matched - w) > tol * scale:
        worst = max(worst, abs(dual_on_matched - w))
        msgs.append("dual value on matched subgraph != welfare")

    return CertificateReport(not msgs, worst, msgs)


def crossing_violations(inst: Instance, duals: DualSolution,
                        tol: float = TOL) -> list[tuple]:
    """Same-type tight-edge pairs that cross: ads i<i' (strictly ordered by
    value) and slots j<j' (strictly ordered by discount) with both (i,j') and
    (i',j) tight.  Feasible duals admit none; equal-value or equal-discount
    pairs are exempt since either order is then interchangeable."""
    out = []
    values = edge_matrix(inst)
    u = np.asarray(duals.u)
    p = np.asarray(duals.p)
    for t, spec in enumerate(inst.types):
        tight = np.argwhere(
            np.abs(u[t][:, None] + p[None, :] - values[t]) <= tol)
        for a in range(len(tight)):
            r1, s1 = tight[a]
            for b in range(len(tight)):
                r2, s2 = tight[b]
                if r1 < r2 and s2 < s1:
                    if spec.values[r1] > spec.values[r2] and \
                            spec.discounts[s2] > spec.discounts[s1]:
                        out.append((t, int(r1), int(s1), int(r2), int(s2)))
    return out
