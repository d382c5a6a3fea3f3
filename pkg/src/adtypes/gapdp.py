"""Exact solvers for instances with gap rules.

The general solver is a dynamic program over states (ads placed per type,
last slot used per type).  States are reached forward, appending one ad at a
time at a slot past every type's last; an append only has to clear each
type's most recent ad, since the blocking window of an older same-type ad is
contained in the newer one's.  Also here: the k=2 gap-free dynamic program,
the independent-set reduction used for hardness-style instances, and an
exhaustive oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import (
    AdRef,
    GuardError,
    Instance,
    Matching,
    TypeSpec,
    ValidationError,
    ensure_valid,
    has_gap_rules,
)

BOTTOM = None  # "no ad of this type placed yet"


@dataclass(frozen=True)
class GapDpState:
    """DP key: how many ads of each type are placed and where each type's
    last ad sits (``None`` when the type is unused)."""

    counts: tuple[int, ...]
    last_slots: tuple[int | None, ...]

    def __post_init__(self):
        if len(self.counts) != len(self.last_slots):
            raise ValueError("counts and last_slots must have equal length")
        for c, s in zip(self.counts, self.last_slots):
            if (c == 0) != (s is BOTTOM):
                raise ValueError("counts[l] == 0 iff last_slots[l] is empty")
        used = [s for s in self.last_slots if s is not BOTTOM]
        if len(set(used)) != len(used):
            raise ValueError("last slots must be distinct")


def _gap(inst: Instance):
    if inst.gap is not None:
        return inst.gap
    k = inst.num_types
    return tuple((0,) * k for _ in range(k))


def check_gap_feasible(inst: Instance, m: Matching) -> bool:
    """True iff no assigned slot sits inside the blocking window that an
    earlier assigned ad's type imposes on its type."""
    gap = _gap(inst)
    pairs = m.pairs
    for i, (s1, a1) in enumerate(pairs):
        for s2, a2 in pairs[i + 1:]:
            if s2 - s1 <= gap[a1.ad_type][a2.ad_type]:
                return False
    return True


def _append_ok(gap, last_slots, ad_type: int, slot: int) -> bool:
    """May an ad of ``ad_type`` go at ``slot``, past every current last?"""
    for m, s_m in enumerate(last_slots):
        if s_m is not BOTTOM and slot - s_m <= gap[m][ad_type]:
            return False
    return True


def solve_gap_dp(inst: Instance, *, max_states: int = 2_000_000) -> Matching:
    """Welfare-maximizing gap-feasible matching via the sparse state DP.

    Within a type, ads are placed in rank order (same-type swaps never
    change gap feasibility and sorted values make rank order optimal).
    Refuses instances whose reachable state space exceeds ``max_states``;
    the hard cap n <= 12 bounds the per-type dimension.
    """
    ensure_valid(inst)
    n, k = inst.num_slots, inst.num_types
    if n > 12:
        raise GuardError(f"gap DP refuses n={n} (guard: n <= 12, "
                         f"state space up to {(n + 1) ** (2 * k):.2e})")
    gap = _gap(inst)
    caps = inst.real_counts
    vals = [spec.values for spec in inst.types]
    disc = [spec.discounts for spec in inst.types]

    empty = ((0,) * k, (BOTTOM,) * k)
    value: dict[tuple, float] = {empty: 0.0}
    parent: dict[tuple, tuple] = {}
    frontier = [empty]
    best_state, best_value = empty, 0.0
    while frontier:
        nxt: list[tuple] = []
        for state in frontier:
            counts, lasts = state
            base = value[state]
            start = max((s for s in lasts if s is not BOTTOM), default=-1) + 1
            for t in range(k):
                c = counts[t]
                if c >= caps[t]:
                    continue
                for s in range(start, n):
                    if not _append_ok(gap, lasts, t, s):
                        continue
                    new = (counts[:t] + (c + 1,) + counts[t + 1:],
                           lasts[:t] + (s,) + lasts[t + 1:])
                    v = base + vals[t][c] * disc[t][s]
                    old = value.get(new)
                    if old is None:
                        if len(value) >= max_states:
                            raise GuardError(
                                f"gap DP exceeded {max_states} states "
                                f"(k={k}, n={n}; reachable space too large)")
                        value[new] = v
                        parent[new] = (state, t, s)
                        nxt.append(new)
                    elif v > old:
                        value[new] = v
                        parent[new] = (state, t, s)
                    if value[new] > best_value:
                        best_value, best_state = value[new], new
        frontier = nxt

    assignment: dict[int, AdRef] = {}
    placed: list[tuple[int, int]] = []
    state = best_state
    while state != empty:
        state, t, s = parent[state]
        placed.append((t, s))
    per_type = [0] * k
    for t, s in sorted(placed, key=lambda ts: ts[1]):
        assignment[s] = AdRef(t, per_type[t])
        per_type[t] += 1
    return Matching(assignment)


def feasible_predecessors(inst: Instance, ad_type: int,
                          state: GapDpState) -> set:
    """Where could this type's second-to-last ad sit, given the state?

    Defined for the type holding the maximum last slot.  With one ad placed
    the only predecessor is "nowhere" (``None``); otherwise every slot below
    the last that clears the gap rules against the other types' last ads and
    against this type's own last.
    """
    if state.counts[ad_type] < 1:
        raise ValueError("type has no placed ad")
    s_l = state.last_slots[ad_type]
    others = [s for t, s in enumerate(state.last_slots)
              if t != ad_type and s is not BOTTOM]
    if any(s_l < s for s in others):
        raise ValueError("defined only for the type with the maximum last slot")
    if state.counts[ad_type] == 1:
        return {BOTTOM}
    gap = _gap(inst)
    out = set()
    for j in range(s_l):
        if s_l - j <= gap[ad_type][ad_type]:
            continue
        ok = True
        for m, s_m in enumerate(state.last_slots):
            if m == ad_type or s_m is BOTTOM:
                continue
            if s_m == j:
                ok = False
            elif s_m > j and s_m - j <= gap[ad_type][m]:
                ok = False
            elif s_m < j and j - s_m <= gap[m][ad_type]:
                ok = False
            if not ok:
                break
        if ok:
            out.add(j)
    return out


def brute_force_gap(inst: Instance) -> Matching:
    """Exhaustive gap-aware oracle: every slot takes some type's next ad or
    stays empty, with full rule checks along the way.  No memoization, no
    shortcuts beyond within-type rank order.  Guard: n <= 6, <= 12 real ads."""
    ensure_valid(inst)
    n, k = inst.num_slots, inst.num_types
    total = sum(inst.real_counts)
    if n > 6 or total > 12:
        raise GuardError(f"gap brute force refuses n={n}, ads={total} "
                         "(guard: n <= 6, <= 12 ads)")
    gap = _gap(inst)
    caps = inst.real_counts
    vals = [spec.values for spec in inst.types]
    disc = [spec.discounts for spec in inst.types]
    best = {"welfare": -1.0, "assignment": {}}
    counts = [0] * k
    lasts: list[int | None] = [BOTTOM] * k
    chosen: dict[int, AdRef] = {}

    def walk(slot: int, acc: float):
        if slot == n:
            if acc > best["welfare"]:
                best["welfare"] = acc
                best["assignment"] = dict(chosen)
            return
        for t in range(k):
            if counts[t] >= caps[t]:
                continue
            if not _append_ok(gap, lasts, t, slot):
                continue
            chosen[slot] = AdRef(t, counts[t])
            saved = lasts[t]
            counts[t] += 1
            lasts[t] = slot
            walk(slot + 1, acc + vals[t][counts[t] - 1] * disc[t][slot])
            counts[t] -= 1
            lasts[t] = saved
            del chosen[slot]
        walk(slot + 1, acc)

    walk(0, 0.0)
    return Matching(best["assignment"])


def solve_two_type_dp(inst: Instance) -> Matching:
    """Gap-free exact solver for exactly two types: a triangular table over
    (ads of type 0 used, ads of type 1 used), filling slots front to back
    with each type's ads in rank order."""
    ensure_valid(inst)
    if inst.num_types != 2:
        raise ValidationError([f"two-type solver needs k=2, got k={inst.num_types}"])
    if has_gap_rules(inst):
        raise ValidationError(["instance has gap rules: use the gap dynamic program"])
    n = inst.num_slots
    v = [spec.values for spec in inst.types]
    d = [spec.discounts for spec in inst.types]
    table = [[0.0] * (n + 1) for _ in range(n + 1)]
    for total in range(n - 1, -1, -1):
        for i in range(total, -1, -1):
            j = total - i
            take0 = d[0][total] * v[0][i] + table[i + 1][j]
            take1 = d[1][total] * v[1][j] + table[i][j + 1]
            table[i][j] = max(take0, take1)
    assignment: dict[int, AdRef] = {}
    i = j = 0
    for slot in range(n):
        take0 = d[0][slot] * v[0][i] + table[i + 1][j]
        take1 = d[1][slot] * v[1][j] + table[i][j + 1]
        if take0 >= take1:
            assignment[slot] = AdRef(0, i)
            i += 1
        else:
            assignment[slot] = AdRef(1, j)
            j += 1
    return Matching(assignment)


# ---------------------------------------------------------------------------
# Independent-set reduction

@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, num_vertices: int, edges):
        canon = set()
        for a, b in edges:
            if a == b:
                raise ValueError("self-loop")
            if not (0 <= a < num_vertices and 0 <= b < num_vertices):
                raise ValueError("edge endpoint out of range")
            canon.add((min(a, b), max(a, b)))
        object.__setattr__(self, "num_vertices", int(num_vertices))
        object.__setattr__(self, "edges", tuple(sorted(canon)))


def mis_to_adtypes(g: Graph) -> Instance:
    """One type per vertex, one unit-value ad each, flat discounts, and a
    full-width gap between adjacent vertices' types: a gap-feasible set of
    placed ads is exactly an independent set, so the optimal welfare equals
    the maximum independent set size."""
    k = g.num_vertices
    gap = [[0] * k for _ in range(k)]
    for a, b in g.edges:
        gap[a][b] = k
        gap[b][a] = k
    types = [TypeSpec(f"v{i}", [1.0], [1.0] * k) for i in range(k)]
    return Instance(k, types, gap)


def max_independent_set_size(g: Graph) -> int:
    """Exhaustive independent-set oracle (fine up to ~20 vertices)."""
    if g.num_vertices > 20:
        raise GuardError("exhaustive independent set limited to 20 vertices")
    adj = [0] * g.num_vertices
    for a, b in g.edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    best = 0
    for mask in range(1 << g.num_vertices):
        if mask.bit_count() <= best:
            continue
        ok = True
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            if adj[v] & mask:
                ok = False
                break
            m &= m - 1
        if ok:
            best = mask.bit_count()
    return best


def parse_graph_text(text: str) -> Graph:
    """Edge-list format: first line "n m", then m lines "u v", 0-indexed."""
    lines = [ln for ln in (s.strip() for s in text.splitlines())
             if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty graph file")
    n, m = (int(x) for x in lines[0].split())
    edges = []
    for ln in lines[1:m + 1]:
        a, b = (int(x) for x in ln.split())
        edges.append((a, b))
    if len(edges) != m:
        raise ValueError(f"expected {m} edges, found {len(edges)}")
    return Graph(n, edges)


def graph_to_text(g: Graph) -> str:
    lines = [f"{g.num_vertices} {len(g.edges)}"]
    lines += [f"{a} {b}" for a, b in g.edges]
    return "\n".join(lines) + "\n"
