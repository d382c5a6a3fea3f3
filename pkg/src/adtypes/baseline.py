"""Independent reference solvers: a generic Hungarian oracle with duals, an
exhaustive enumerator, and the greedy 2-approximation with its bid-sweep
allocation curve.  These deliberately share no phase machinery with the
specialized solver so they can cross-check it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import (
    AdRef,
    GuardError,
    Instance,
    Matching,
    ValidationError,
    edge_matrix,
    ensure_valid,
    has_gap_rules,
    welfare,
    with_bid,
)
from .hungarian import DualSolution, OptimalSolution, SolveStats


def solve_generic_hungarian(inst: Instance, *, order: str = "worst-first",
                            collect_phase_matchings: bool = False) -> OptimalSolution:
    """Textbook Hungarian on the flattened bipartite graph, no type shortcuts.

    One phase per free slot; whenever a slot joins the alternating tree,
    every ad's pending slack is rescanned (dual shifts are implicit: each
    ad keys the accumulated shift at which its best tree edge goes tight).
    ``order`` picks which free slot roots each phase: ``worst-first`` (lowest
    discount first, the default) or ``best-first``; both give an optimal
    matching with certifying duals.
    """
    ensure_valid(inst)
    if has_gap_rules(inst):
        raise ValidationError("instance has gap rules: use the gap dynamic program")
    n, k = inst.num_slots, inst.num_types
    num_ads = k * n
    values = edge_matrix(inst).reshape(num_ads, n).tolist()
    u = [0.0] * num_ads
    p = [max(max(row) for row in values)] * n
    ad_of_slot = [-1] * n
    slot_of_ad = [-1] * num_ads
    if order == "worst-first":
        roots: Iterable[int] = range(n - 1, -1, -1)
    elif order == "best-first":
        roots = range(n)
    else:
        raise ValueError(f"unknown phase order {order!r}")
    phase_matchings: list[Matching] | None = [] if collect_phase_matchings else None
    inf = float("inf")

    for root in roots:
        in_tree = [False] * num_ads
        parent = [-1] * num_ads
        p_root = p[root]
        key = [u[a] + p_root - values[a][root] for a in range(num_ads)]
        src = [root] * num_ads
        ad_entry: dict[int, float] = {}
        slot_entry: dict[int, float] = {root: 0.0}
        shift = 0.0
        while True:
            best, a = inf, -1
            for i in range(num_ads):
                if not in_tree[i] and key[i] < best:
                    best, a = key[i], i
            shift = best
            parent[a] = src[a]
            s = slot_of_ad[a]
            if s < 0:
                break
            in_tree[a] = True
            ad_entry[a] = shift
            slot_entry[s] = shift
            pot = p[s] + shift
            for i in range(num_ads):
                if not in_tree[i]:
                    cand = u[i] + pot - values[i][s]
                    if cand < key[i]:
                        key[i] = cand
                        src[i] = s
        for i, entered in ad_entry.items():
            u[i] += shift - entered
        for s, entered in slot_entry.items():
            p[s] -= shift - entered
        while True:
            s = parent[a]
            prev = ad_of_slot[s]
            ad_of_slot[s] = a
            slot_of_ad[a] = s
            if s == root:
                break
            a = prev
        if phase_matchings is not None:
            phase_matchings.append(_matching_from_flat(ad_of_slot, n))

    matching = _matching_from_flat(ad_of_slot, n)
    u_grid = tuple(tuple(u[t * n:(t + 1) * n]) for t in range(k))
    duals = DualSolution(u_grid, tuple(p))
    stats = None
    if phase_matchings is not None:
        stats = SolveStats(phase_matchings=phase_matchings)
    return OptimalSolution(matching, duals, welfare(inst, matching), stats)


def _matching_from_flat(ad_of_slot: np.ndarray, n: int) -> Matching:
    return Matching({s: AdRef(int(a) // n, int(a) % n)
                     for s, a in enumerate(ad_of_slot) if a >= 0})


def solve_bruteforce(inst: Instance) -> Matching:
    """Exhaustive ground truth for gap-free instances.

    Walks every slot-by-slot assignment profile (each slot takes some type's
    next unused ad, or stays empty), memoized on (slot, per-type used
    counts).  Within a type the ads are used in rank order: swapping two
    same-type ads never helps, so nothing is lost.  Guarded to n <= 8,
    k <= 4.  Ties prefer lower type index, then assigning over skipping.
    """
    ensure_valid(inst)
    if has_gap_rules(inst):
        raise ValidationError("instance has gap rules: use the gap brute force")
    n, k = inst.num_slots, inst.num_types
    if n > 8 or k > 4:
        raise GuardError(f"brute force refuses n={n}, k={k} (guard: n<=8, k<=4)")
    vals = [spec.values for spec in inst.types]
    disc = [spec.discounts for spec in inst.types]
    caps = inst.real_counts
    memo: dict[tuple[int, tuple[int, ...]], tuple[float, int]] = {}

    def best(slot: int, counts: tuple[int, ...]) -> float:
        if slot == n:
            return 0.0
        key = (slot, counts)
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        best_v, choice = None, -1
        for t in range(k):
            c = counts[t]
            if c < caps[t]:
                nxt = counts[:t] + (c + 1,) + counts[t + 1:]
                v = vals[t][c] * disc[t][slot] + best(slot + 1, nxt)
                if best_v is None or v > best_v:
                    best_v, choice = v, t
        v = best(slot + 1, counts)
        if best_v is None or v > best_v:
            best_v, choice = v, -1
        memo[key] = (best_v, choice)
        return best_v

    best(0, (0,) * k)
    assignment: dict[int, AdRef] = {}
    counts = (0,) * k
    for slot in range(n):
        _, choice = memo[(slot, counts)]
        if choice >= 0:
            assignment[slot] = AdRef(choice, counts[choice])
            counts = counts[:choice] + (counts[choice] + 1,) + counts[choice + 1:]
    return Matching(assignment)


def solve_greedy(inst: Instance) -> Matching:
    """Repeatedly take the highest-value compatible edge (ties broken by the
    global edge order).  With sorted values and discounts this fills slots in
    descending discount order using one frontier per type, O(kn) inspections.
    """
    ensure_valid(inst)
    if has_gap_rules(inst):
        raise ValidationError("instance has gap rules: greedy handles none")
    return _greedy_with_type_order(inst, range(inst.num_types))

def _greedy_with_type_order(inst: Instance, type_order) -> Matching:
    # Candidate inspection order must not matter: the comparator is total.
    n = inst.num_slots
    vals = [spec.values for spec in inst.types]
    disc = [spec.discounts for spec in inst.types]
    next_rank = [0] * inst.num_types
    assignment: dict[int, AdRef] = {}
    for slot in range(n):
        best_key, best_type = None, None
        for t in type_order:
            r = next_rank[t]
            if r >= n:
                continue
            key = (-vals[t][r] * disc[t][slot], slot, t, r)
            if best_key is None or key < best_key:
                best_key, best_type = key, t
        if best_type is None:
            break
        assignment[slot] = AdRef(best_type, next_rank[best_type])
        next_rank[best_type] += 1
    return Matching(assignment)


# ---------------------------------------------------------------------------
# Allocation curve of the greedy mechanism under a swept bid.

@dataclass(frozen=True)
class AllocationCurve:
    """Piecewise-constant quantity (the received discount) as a function of
    the probed ad's own bid: ``points[i] = (threshold, quantity)`` means the
    quantity holds for bids above the threshold, up to the next one.
    Quantity is 0 below the first threshold."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ts = [t for t, _ in self.points]
        if any(ts[i] >= ts[i + 1] for i in range(len(ts) - 1)):
            raise ValueError("thresholds must be strictly increasing")

    def quantity_at(self, bid: float) -> float:
        q = 0.0
        for t, qt in self.points:
            if bid > t:
                q = qt
            else:
                break
        return q

    def is_monotone(self) -> bool:
        qs = [q for _, q in self.points]
        return all(qs[i] <= qs[i + 1] for i in range(len(qs) - 1)) and \
            all(q >= 0 for q in qs)


def candidate_bids(inst: Instance, ad: AdRef, resolution: int | None = None) -> list[float]:
    """Bids where the greedy comparator order can flip for the probed ad:
    every rival edge value divided by each positive probed discount, plus 0
    and the ad's own value.  ``resolution`` caps the set (even subsample)."""
    probed = inst.types[ad.ad_type]
    own_discounts = [d for d in probed.discounts if d > 0]
    rival_values: set[float] = set()
    for t, spec in enumerate(inst.types):
        for r, v in enumerate(spec.values):
            if t == ad.ad_type and r == ad.rank:
                continue
            for d in spec.discounts:
                rival_values.add(v * d)
    bids = {0.0, inst.value_of(ad)}
    for e in rival_values:
        for d in own_discounts:
            bids.add(e / d)
    out = sorted(bids)
    if resolution is not None and len(out) > resolution:
        idx = np.linspace(0, len(out) - 1, resolution).round().astype(int)
        out = [out[i] for i in dict.fromkeys(idx)]
    return out


def greedy_quantity(inst: Instance, ad: AdRef, bid: float,
                    allocator=solve_greedy) -> float:
    """The discount the probed ad receives from ``allocator`` at ``bid``."""
    probe_inst, probe_ref, _ = with_bid(inst, ad, bid)
    m = allocator(probe_inst)
    slot = m.slot_of(probe_ref)
    return 0.0 if slot is None else probe_inst.types[ad.ad_type].discounts[slot]


def greedy_allocation_curve(inst: Instance, ad: AdRef,
                            resolution: int = 4096) -> AllocationCurve:
    """Sweep the probed ad's bid over the candidate thresholds, re-running
    greedy at interval midpoints (greedy is constant between consecutive
    candidates, so midpoints determine the curve exactly)."""
    ensure_valid(inst)
    if has_gap_rules(inst):
        raise ValidationError("allocation curves are defined without gap rules")
    cands = candidate_bids(inst, ad, resolution)
    probes = [(cands[i] + cands[i + 1]) / 2 for i in range(len(cands) - 1)]
    probes.append(cands[-1] + 1.0)
    points: list[tuple[float, float]] = []
    prev_q = 0.0
    for threshold, bid in zip(cands, probes):
        q = greedy_quantity(inst, ad, bid)
        if q != prev_q:
            points.append((threshold, q))
            prev_q = q
    return AllocationCurve(tuple(points))
