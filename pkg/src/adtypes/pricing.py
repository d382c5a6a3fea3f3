"""Incentive-compatible payments for the slot allocation mechanisms.

Three pricing routes, each with an independent cross-check:

* fast VCG: descend the solver's duals to the point-wise minimal feasible
  slot prices (uniform shift on a shrinking mutable region, pinning nodes as
  constraints bind);
* naive VCG: re-solve without each winner and charge the externality;
* reserve pricing without changepoint computation: compare against the
  outcome where the bidder's bid is replaced by its reserve;
* a bid-sweep oracle that prices any monotone allocation rule by summing
  bid x allocation-jump over its changepoints.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .core import (
    TOL,
    AdRef,
    Instance,
    Matching,
    TypeSpec,
    ValidationError,
    edge_matrix,
    edge_value,
    ensure_valid,
    welfare,
    with_bid,
)
from .hungarian import OptimalSolution, certify, solve_adtypes
from .baseline import candidate_bids


class NonMonotoneAllocationError(RuntimeError):
    """The probed allocation decreased in the bid; carries a counterexample."""

    def __init__(self, bid_lo, bid_hi, q_lo, q_hi):
        self.counterexample = (bid_lo, bid_hi, q_lo, q_hi)
        super().__init__(
            f"allocation not monotone: x({bid_lo:g})={q_lo:g} but "
            f"x({bid_hi:g})={q_hi:g}")


@dataclass
class PricedOutcome:
    """A matching plus per-ad payments.  Losers and filtered bidders pay 0.
    ``min_raw_payment`` records the most negative pre-clamp payment so tests
    can assert clamping never exceeded rounding noise."""

    matching: Matching
    payments: dict[AdRef, float]
    mechanism: str
    min_raw_payment: float = 0.0


@dataclass(frozen=True)
class ReserveVector:
    """Per-ad minimum bids; ads missing from the mapping have reserve 0."""

    by_ad: tuple[tuple[AdRef, float], ...]

    def __init__(self, reserves: Mapping[AdRef, float] | None = None):
        items = tuple(sorted((reserves or {}).items()))
        if any(r < 0 for _, r in items):
            raise ValueError("reserves must be non-negative")
        object.__setattr__(self, "by_ad", items)

    def get(self, ad: AdRef) -> float:
        return dict(self.by_ad).get(ad, 0.0)

    def remap(self, ad_map: Mapping[AdRef, AdRef]) -> "ReserveVector":
        return ReserveVector({ad_map.get(ad, ad): r for ad, r in self.by_ad})


# ---------------------------------------------------------------------------
# VCG

def vcg_prices_fast(inst: Instance, sol: OptimalSolution,
                    tol: float = TOL) -> tuple[float, ...]:
    """Point-wise minimal feasible slot prices, from a certified solution.

    All matched nodes start mutable; repeatedly shift utilities up and prices
    down by the largest step that keeps every price non-negative and every
    edge from a node with fixed utility feasible, then pin (via alternating
    BFS over tight edges) everything the newly binding constraints reach.
    """
    report = certify(inst, sol, tol)
    if not report.passed:
        raise ValidationError(["solution fails certification: "
                               + "; ".join(report.messages)])
    n, k = inst.num_slots, inst.num_types
    num_ads = k * n
    V = edge_matrix(inst).reshape(num_ads, n)
    u = np.asarray(sol.duals.u, dtype=float).reshape(num_ads).copy()
    p = np.asarray(sol.duals.p, dtype=float).copy()
    ad_of_slot = np.full(n, -1, dtype=np.int64)
    for slot, ad in sol.matching.pairs:
        ad_of_slot[slot] = ad.ad_type * n + ad.rank
    r_slots = ad_of_slot >= 0
    r_ads = np.zeros(num_ads, dtype=bool)
    r_ads[ad_of_slot[r_slots]] = True

    while r_slots.any():
        outside = ~r_ads
        delta = float(p[r_slots].min())
        if outside.any():
            cross = u[outside, None] + p[None, r_slots] - V[np.ix_(outside, r_slots)]
            delta = min(delta, float(cross.min()))
        delta = max(delta, 0.0)
        if delta > 0:
            u[r_ads] += delta
            p[r_slots] -= delta
        # pin everything reached from the binding constraints
        slack = u[:, None] + p[None, :] - V
        tight = slack <= tol
        from_outside = tight[~r_ads].any(axis=0) if (~r_ads).any() else \
            np.zeros(n, dtype=bool)
        frontier = [j for j in range(n)
                    if r_slots[j] and (p[j] <= tol or from_outside[j])]
        if not frontier:
            raise AssertionError("price descent stalled without a binding constraint")
        pinned_slots: set[int] = set()
        pinned_ads: set[int] = set()
        queue = list(frontier)
        while queue:
            j = queue.pop()
            if j in pinned_slots or not r_slots[j]:
                continue
            pinned_slots.add(j)
            a = int(ad_of_slot[j])
            if a >= 0 and a not in pinned_ads and r_ads[a]:
                pinned_ads.add(a)
                for j2 in np.nonzero(tight[a] & r_slots)[0]:
                    if int(j2) not in pinned_slots:
                        queue.append(int(j2))
        for j in pinned_slots:
            r_slots[j] = False
        for a in pinned_ads:
            r_ads[a] = False
    return tuple(float(x) for x in p)


def vcg_prices_naive(inst: Instance, solver=solve_adtypes) -> tuple[float, ...]:
    """Definitional VCG: for each winner, re-solve without it and charge the
    drop in everyone else's welfare.  One solve per slot plus one."""
    sol = solver(inst)
    total = sol.welfare
    prices = [0.0] * inst.num_slots
    for slot, ad in sol.matching.pairs:
        others_now = total - edge_value(inst, ad, slot)
        without = _without_ad(inst, ad)
        others_best = solver(without).welfare
        prices[slot] = max(0.0, others_best - others_now)
    return tuple(prices)


def _without_ad(inst: Instance, ad: AdRef) -> Instance:
    spec = inst.types[ad.ad_type]
    vals = [v for r, v in enumerate(spec.values[: inst.real_counts[ad.ad_type]])
            if r != ad.rank]
    types = list(inst.types)
    types[ad.ad_type] = TypeSpec(spec.name, vals, spec.discounts)
    return Instance(inst.num_slots, types, inst.gap)


def vcg_outcome(inst: Instance) -> PricedOutcome:
    """Full VCG mechanism: optimal allocation, winners pay their slot's
    minimal feasible price, losers pay 0."""
    sol = solve_adtypes(inst)
    prices = vcg_prices_fast(inst, sol)
    payments = {AdRef(t, r): 0.0 for t in range(inst.num_types)
                for r in range(inst.real_counts[t])}
    for slot, ad in sol.matching.pairs:
        if ad.rank < inst.real_counts[ad.ad_type]:
            payments[ad] = prices[slot]
    return PricedOutcome(sol.matching, payments, "vcg")


# ---------------------------------------------------------------------------
# Reserve pricing without changepoint computation

def filter_by_reserves(inst: Instance, reserves: ReserveVector):
    """Drop real ads bidding below their reserve.  Returns the filtered
    instance plus the map from surviving original refs to filtered refs."""
    keep_map: dict[AdRef, AdRef] = {}
    types = []
    for t, spec in enumerate(inst.types):
        kept = []
        for r in range(inst.real_counts[t]):
            ad = AdRef(t, r)
            if spec.values[r] >= reserves.get(ad):
                keep_map[ad] = AdRef(t, len(kept))
                kept.append(spec.values[r])
        types.append(TypeSpec(spec.name, kept, spec.discounts))
    return Instance(inst.num_slots, types, inst.gap), keep_map


def _quantity(inst: Instance, m: Matching, ad: AdRef) -> float:
    slot = m.slot_of(ad)
    return 0.0 if slot is None else inst.types[ad.ad_type].discounts[slot]


def price_with_reserves(inst: Instance, reserves: ReserveVector | Mapping | None,
                        allocator=solve_adtypes, *,
                        check_allocator: bool = True) -> PricedOutcome:
    """Incentive-compatible pricing with eager per-bidder reserves.

    Bidders below their reserve are filtered and pay 0.  Each surviving
    bidder is charged the harm to the others of it bidding its value rather
    than its reserve, plus the reserve for whatever it would still win at the
    reserve bid.  Requires an exact welfare maximizer; the allocator's main
    run is certified and rejected if the certificate fails.
    """
    ensure_valid(inst)
    if not isinstance(reserves, ReserveVector):
        reserves = ReserveVector(reserves)
    filtered, keep_map = filter_by_reserves(inst, reserves)
    sol = allocator(filtered)
    if not isinstance(sol, OptimalSolution):
        raise ValidationError(["allocator must return a certifiable solution "
                               "with duals; inexact allocators are rejected"])
    if check_allocator:
        report = certify(filtered, sol)
        if not report.passed:
            raise ValidationError(["allocator output failed certification: "
                                   + "; ".join(report.messages)])
    total = sol.welfare
    payments = {AdRef(t, r): 0.0 for t in range(inst.num_types)
                for r in range(inst.real_counts[t])}
    min_raw = 0.0
    for orig, kept in keep_map.items():
        bid = inst.value_of(orig)
        r_i = reserves.get(orig)
        x_now = _quantity(filtered, sol.matching, kept)
        others_now = total - x_now * bid
        at_reserve, ref_r, _ = with_bid(filtered, kept, r_i)
        sol_r = allocator(at_reserve)
        x_r = _quantity(at_reserve, sol_r.matching, ref_r)
        others_at_reserve = sol_r.welfare - x_r * r_i
        raw = others_at_reserve - others_now + x_r * r_i
        min_raw = min(min_raw, raw)
        payments[orig] = max(0.0, raw)
    inv = _invert(keep_map)
    m = Matching({slot: inv[ad] for slot, ad in sol.matching.pairs if ad in inv})
    return PricedOutcome(m, payments, "reserve", min_raw)


def _invert(d: dict) -> dict:
    return {v: k for k, v in d.items()}


def reserve_mechanism(reserves: ReserveVector | Mapping | None) -> Callable:
    """Mechanism closure for audits: remaps the reserves when ranks shift."""
    base = reserves if isinstance(reserves, ReserveVector) else ReserveVector(reserves)

    def run(inst: Instance, ad_map: Mapping[AdRef, AdRef] | None = None):
        res = base.remap(ad_map) if ad_map else base
        return price_with_reserves(inst, res)

    return run


def vcg_mechanism() -> Callable:
    def run(inst: Instance, ad_map=None):
        return vcg_outcome(inst)

    return run


# ---------------------------------------------------------------------------
# Myerson changepoint oracle

def myerson_changepoint_prices(inst: Instance, allocator, ad: AdRef, r: float,
                               *, method: str = "envelope",
                               resolution: int = 4096,
                               tol: float = TOL) -> float:
    """Price the probed ad by scanning its allocation curve: the payment is
    the sum over allocation changepoints of bid x quantity-jump, with the
    reserve as the first changepoint.

    ``method='envelope'`` locates changepoints by intersecting welfare
    tangents (valid for exact welfare maximizers, whose welfare is convex in
    one bid); ``method='scan'`` probes between comparator-crossing candidate
    bids (valid for greedy).  Raises :class:`NonMonotoneAllocationError` when
    the swept allocation decreases.
    """
    ensure_valid(inst)
    bid = inst.value_of(ad)
    if bid < r:
        return 0.0

    def run(b: float):
        inst_b, ref_b, _ = with_bid(inst, ad, b)
        out = allocator(inst_b)
        m = out.matching if isinstance(out, OptimalSolution) else out
        w = out.welfare if isinstance(out, OptimalSolution) else welfare(inst_b, m)
        return w, _quantity(inst_b, m, ref_b)

    if bid == r:
        return r * run(r)[1]
    if method == "envelope":
        return _envelope_payment(run, r, bid, tol)
    if method == "scan":
        return _scan_payment(run, inst, ad, r, bid, resolution, tol)
    raise ValueError(f"unknown method {method!r}")


def _envelope_payment(run, lo: float, hi: float, tol: float) -> float:
    cache: dict[float, tuple[float, float]] = {}

    def f(b: float):
        if b not in cache:
            cache[b] = run(b)
        return cache[b]

    jumps: list[tuple[float, float, float]] = []

    def rec(a: float, b: float, depth: int):
        if depth > 60:
            raise RuntimeError("changepoint search failed to converge")
        w_a, x_a = f(a)
        w_b, x_b = f(b)
        if x_b < x_a - 1e-12:
            raise NonMonotoneAllocationError(a, b, x_a, x_b)
        if x_b - x_a <= 1e-12:
            return
        # tangents through the endpoints; convexity puts their crossing inside
        cross = ((w_b - x_b * b) - (w_a - x_a * a)) / (x_a - x_b)
        cross = min(max(cross, a), b)
        if cross in (a, b):
            jumps.append((cross, x_a, x_b))
            return
        w_c, x_c = f(cross)
        line = w_a + x_a * (cross - a)
        if w_c - line <= tol * max(1.0, abs(w_c)):
            jumps.append((cross, x_a, x_b))
        else:
            rec(a, cross, depth + 1)
            rec(cross, b, depth + 1)

    rec(lo, hi, 0)
    payment = lo * f(lo)[1]
    for b, x_left, x_right in sorted(jumps):
        payment += b * (x_right - x_left)
    return payment


def _scan_payment(run, filtered: Instance, probe: AdRef, lo: float, hi: float,
                  resolution: int, tol: float) -> float:
    cands = candidate_bids(filtered, probe, resolution)
    cuts = sorted({lo, hi} | {c for c in cands if lo < c < hi})
    quantities = []
    for i in range(len(cuts) - 1):
        mid = (cuts[i] + cuts[i + 1]) / 2
        quantities.append(run(mid)[1])
    for i in range(len(quantities) - 1):
        if quantities[i + 1] < quantities[i] - 1e-12:
            raise NonMonotoneAllocationError(
                (cuts[i] + cuts[i + 1]) / 2, (cuts[i + 1] + cuts[i + 2]) / 2,
                quantities[i], quantities[i + 1])
    x_hi = run(hi)[1]
    if quantities and x_hi < quantities[-1] - 1e-12:
        raise NonMonotoneAllocationError(
            (cuts[-2] + cuts[-1]) / 2, hi, quantities[-1], x_hi)
    area = sum(q * (cuts[i + 1] - cuts[i]) for i, q in enumerate(quantities))
    return hi * x_hi - area


def myerson_greedy_outcome(inst: Instance,
                           reserves: ReserveVector | Mapping | None = None,
                           resolution: int = 4096) -> PricedOutcome:
    """Greedy allocation priced by the bid-sweep identity (greedy's
    allocation curve is monotone, so the payments are incentive compatible)."""
    from .baseline import solve_greedy

    ensure_valid(inst)
    if not isinstance(reserves, ReserveVector):
        reserves = ReserveVector(reserves)
    filtered, keep_map = filter_by_reserves(inst, reserves)
    m = solve_greedy(filtered)
    payments = {AdRef(t, r): 0.0 for t in range(inst.num_types)
                for r in range(inst.real_counts[t])}
    min_raw = 0.0
    for orig, kept in keep_map.items():
        if m.slot_of(kept) is None:
            continue
        raw = myerson_changepoint_prices(
            filtered, solve_greedy, kept, reserves.get(orig),
            method="scan", resolution=resolution)
        min_raw = min(min_raw, raw)
        payments[orig] = max(0.0, raw)
    inv = _invert(keep_map)
    matching = Matching({s: inv[ad] for s, ad in m.pairs if ad in inv})
    return PricedOutcome(matching, payments, "myerson-greedy", min_raw)


# ---------------------------------------------------------------------------
# Deviation audit

@dataclass
class DeviationReport:
    ad: AdRef
    truthful_utility: float
    tried: list[tuple[float, float]] = field(default_factory=list)
    profitable: list[tuple[float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.profitable


def test_ic_deviation(inst: Instance, mechanism: Callable, ad: AdRef,
                      deviations, tol: float = TOL) -> DeviationReport:
    """Check that no sampled misreport beats truthful bidding for ``ad``.

    ``mechanism(instance, ad_map)`` must return a :class:`PricedOutcome`;
    ``ad_map`` carries the rank shifts caused by re-sorting the probed bid.
    Not a pytest case despite the name: this is the audit the suite drives.
    """
    value = inst.value_of(ad)
    truth = mechanism(inst, None)
    u_true = value * _quantity(inst, truth.matching, ad) - \
        truth.payments.get(ad, 0.0)
    report = DeviationReport(ad, u_true)
    for b in deviations:
        if b < 0:
            continue
        inst_b, ref_b, rank_map = with_bid(inst, ad, b)
        ad_map = {AdRef(ad.ad_type, old): AdRef(ad.ad_type, new)
                  for old, new in rank_map.items()}
        out = mechanism(inst_b, ad_map)
        u_dev = value * _quantity(inst_b, out.matching, ref_b) - \
            out.payments.get(ref_b, 0.0)
        report.tried.append((b, u_dev))
        if u_dev > u_true + tol:
            report.profitable.append((b, u_dev))
    return report


# ---------------------------------------------------------------------------
# Wire format

def priced_outcome_to_dict(out: PricedOutcome) -> dict:
    return {
        "assignment": [{"slot": s, "type": ad.ad_type, "rank": ad.rank}
                       for s, ad in out.matching.pairs],
        "payments": [{"type": ad.ad_type, "rank": ad.rank, "pay": pay}
                     for ad, pay in sorted(out.payments.items())],
        "mechanism": out.mechanism,
    }
