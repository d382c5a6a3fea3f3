"""Problem model shared by every solver.

An instance has ``n`` ordered slots and ``k`` ad types.  Each type carries a
list of per-ad values (sorted non-increasing) and a discount curve over the
slots (sorted non-increasing, one entry per slot).  The value of placing ad
``r`` of type ``t`` in slot ``s`` is ``discounts[t][s] * values[t][r]``.
Optional gap rules are a k-by-k integer matrix ``G``: after a type-``i`` ad in
slot ``s``, slots ``s+1 .. s+G[i][j]`` may not hold a type-``j`` ad.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

TOL = 1e-9


class ValidationError(ValueError):
    """Raised when a solver is handed an instance that fails validation."""

    def __init__(self, errors):
        self.errors = list(errors) if not isinstance(errors, str) else [errors]
        super().__init__("; ".join(self.errors))


class GuardError(RuntimeError):
    """Raised when an exhaustive solver refuses an instance as too large."""


@dataclass(frozen=True, order=True)
class AdRef:
    """Ad ``rank`` within its type's descending value order."""

    ad_type: int
    rank: int


@dataclass(frozen=True)
class TypeSpec:
    """One ad type: a value list and a discount curve over the slots."""

    name: str
    values: tuple[float, ...]
    discounts: tuple[float, ...]

    def __init__(self, name: str, values: Sequence[float], discounts: Sequence[float]):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        object.__setattr__(self, "discounts", tuple(float(d) for d in discounts))


@dataclass(frozen=True)
class Instance:
    """A full problem: slots, typed value lists, discount curves, gap rules.

    Construction normalizes every type to exactly ``num_slots`` values by
    appending zero-value ads (or keeping only the top ``num_slots``); the
    pre-padding count per type is kept in ``real_counts``.  Nothing is
    re-sorted: unsorted input is surfaced by :func:`validate_instance`, not
    silently repaired.
    """

    num_slots: int
    types: tuple[TypeSpec, ...]
    gap: tuple[tuple[int, ...], ...] | None = None
    real_counts: tuple[int, ...] = field(default=(), compare=False)

    def __init__(self, num_slots, types, gap=None):
        n = int(num_slots)
        object.__setattr__(self, "num_slots", n)
        norm, real = [], []
        for spec in types:
            if not isinstance(spec, TypeSpec):
                spec = TypeSpec(*spec)
            vals = spec.values[:n] if n > 0 else spec.values
            real.append(len(vals))
            if len(vals) < n:
                vals = vals + (0.0,) * (n - len(vals))
            norm.append(TypeSpec(spec.name, vals, spec.discounts))
        object.__setattr__(self, "types", tuple(norm))
        object.__setattr__(self, "real_counts", tuple(real))
        if gap is not None:
            gap = tuple(tuple(int(g) for g in row) for row in gap)
        object.__setattr__(self, "gap", gap)

    @property
    def num_types(self) -> int:
        return len(self.types)

    @property
    def ads(self) -> list[AdRef]:
        """All ads, including zero-value padding, in (type, rank) order."""
        return [AdRef(t, r) for t in range(self.num_types)
                for r in range(self.num_slots)]

    def real_ads(self) -> list[AdRef]:
        """Only the ads that were actually supplied (no padding)."""
        return [AdRef(t, r) for t in range(self.num_types)
                for r in range(self.real_counts[t])]

    def value_of(self, ad: AdRef) -> float:
        return self.types[ad.ad_type].values[ad.rank]


@dataclass(frozen=True)
class Matching:
    """Partial assignment of slots to ads; injective on both sides."""

    pairs: tuple[tuple[int, AdRef], ...]

    def __init__(self, assignment: Mapping[int, AdRef] | Iterable[tuple[int, AdRef]]):
        items = assignment.items() if isinstance(assignment, Mapping) else assignment
        pairs = tuple(sorted((int(s), ad) for s, ad in items))
        slots = [s for s, _ in pairs]
        ads = [ad for _, ad in pairs]
        if len(set(slots)) != len(slots):
            raise ValueError("slot assigned twice")
        if len(set(ads)) != len(ads):
            raise ValueError("ad assigned twice")
        object.__setattr__(self, "pairs", pairs)

    def as_dict(self) -> dict[int, AdRef]:
        return dict(self.pairs)

    def slot_of(self, ad: AdRef) -> int | None:
        for s, a in self.pairs:
            if a == ad:
                return s
        return None

    def get(self, slot: int) -> AdRef | None:
        return self.as_dict().get(slot)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class ValidationReport:
    """Violations found in an instance.  ``errors`` make solvers refuse;
    ``warnings`` are advisory (discounts above 1 are tolerated but flagged)."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


def validate_instance(inst: Instance) -> ValidationReport:
    """Check monotonicity, signs, dimensions, and the gap matrix shape."""
    rep = ValidationReport()
    err = rep.errors.append
    if inst.num_slots < 1:
        err("num_slots must be >= 1")
    if inst.num_types < 1:
        err("at least one ad type required")
    n = inst.num_slots
    for t, spec in enumerate(inst.types):
        label = spec.name or f"type {t}"
        if any(v < 0 for v in spec.values):
            err(f"{label}: negative value")
        if any(spec.values[i] < spec.values[i + 1] for i in range(len(spec.values) - 1)):
            err(f"{label}: values not non-increasing")
        if len(spec.discounts) != n:
            err(f"{label}: expected {n} discounts, got {len(spec.discounts)}")
        if any(d < 0 for d in spec.discounts):
            err(f"{label}: negative discount")
        if any(spec.discounts[i] < spec.discounts[i + 1] for i in range(len(spec.discounts) - 1)):
            err(f"{label}: discounts not non-increasing")
        if any(d > 1 for d in spec.discounts):
            rep.warnings.append(f"{label}: discount above 1 (treated as-is)")
    if inst.gap is not None:
        k = inst.num_types
        if len(inst.gap) != k or any(len(row) != k for row in inst.gap):
            err("gap matrix not k x k")
        else:
            if any(g < 0 for row in inst.gap for g in row):
                err("gap matrix has negative entries")
    return rep


def ensure_valid(inst: Instance) -> None:
    rep = validate_instance(inst)
    if not rep.ok:
        raise ValidationError(rep.errors)


def has_gap_rules(inst: Instance) -> bool:
    return inst.gap is not None and any(g != 0 for row in inst.gap for g in row)


def edge_value(inst: Instance, ad: AdRef, slot: int) -> float:
    """Value of placing ``ad`` in ``slot``: discount[slot] * value[rank]."""
    if not 0 <= slot < inst.num_slots:
        raise IndexError(f"slot {slot} out of range")
    if not 0 <= ad.ad_type < inst.num_types:
        raise IndexError(f"ad type {ad.ad_type} out of range")
    spec = inst.types[ad.ad_type]
    if not 0 <= ad.rank < len(spec.values):
        raise IndexError(f"rank {ad.rank} out of range for {spec.name}")
    return spec.discounts[slot] * spec.values[ad.rank]


def welfare(inst: Instance, m: Matching) -> float:
    """Total value of a matching.  Summed in slot order so the result does
    not depend on the mapping's iteration order."""
    return sum(edge_value(inst, ad, slot) for slot, ad in m.pairs)


def edge_comparator_key(inst: Instance, ad: AdRef, slot: int):
    """Sort key placing the globally preferred edge first: higher value,
    then lower slot, lower type, lower rank.  Every solver breaks ties
    with this single order."""
    return (-edge_value(inst, ad, slot), slot, ad.ad_type, ad.rank)


@lru_cache(maxsize=16)
def edge_matrix(inst: Instance) -> np.ndarray:
    """Edge values as an array of shape (k, n, n) indexed [type, rank, slot]."""
    n = inst.num_slots
    out = np.empty((inst.num_types, n, n))
    for t, spec in enumerate(inst.types):
        out[t] = np.outer(np.asarray(spec.values), np.asarray(spec.discounts))
    out.setflags(write=False)
    return out


def with_bid(inst: Instance, ad: AdRef, bid: float):
    """Rebuild the instance with ``ad`` bidding ``bid`` instead of its value.

    The probed type's value list is re-sorted (the probed ad is placed ahead
    of equal values).  Returns ``(new_instance, new_ref, rank_map)`` where
    ``rank_map`` sends old ranks of the probed type to new ranks.
    """
    if bid < 0:
        raise ValueError("bids must be non-negative")
    t = ad.ad_type
    spec = inst.types[t]
    rest = [v for r, v in enumerate(spec.values) if r != ad.rank]
    pos = sum(1 for v in rest if v > bid)
    new_vals = rest[:pos] + [float(bid)] + rest[pos:]
    rank_map: dict[int, int] = {ad.rank: pos}
    for old in range(len(spec.values)):
        if old == ad.rank:
            continue
        idx = old - 1 if old > ad.rank else old
        rank_map[old] = idx + 1 if idx >= pos else idx
    new_types = list(inst.types)
    new_types[t] = TypeSpec(spec.name, new_vals, spec.discounts)
    new_inst = Instance(inst.num_slots, new_types, inst.gap)
    return new_inst, AdRef(t, pos), rank_map


# ---------------------------------------------------------------------------
# JSON interchange:
#   {"num_slots": int,
#    "types": [{"name": str, "values": [num], "discounts": [num]}],
#    "gap": [[int]] | null}

def instance_to_dict(inst: Instance) -> dict:
    return {
        "num_slots": inst.num_slots,
        "types": [
            {
                "name": spec.name,
                "values": list(spec.values[: inst.real_counts[t]]),
                "discounts": list(spec.discounts),
            }
            for t, spec in enumerate(inst.types)
        ],
        "gap": [list(row) for row in inst.gap] if inst.gap is not None else None,
    }


def instance_from_dict(data: Mapping) -> Instance:
    types = [
        TypeSpec(t.get("name", f"type{i}"), t["values"], t["discounts"])
        for i, t in enumerate(data["types"])
    ]
    return Instance(data["num_slots"], types, data.get("gap"))


def dump_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def matching_to_list(m: Matching) -> list[dict]:
    return [{"slot": s, "type": ad.ad_type, "rank": ad.rank} for s, ad in m.pairs]


def matching_from_list(entries: Iterable[Mapping]) -> Matching:
    return Matching({e["slot"]: AdRef(e["type"], e["rank"]) for e in entries})
