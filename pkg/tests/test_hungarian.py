import re

import pytest

from adtypes.baseline import solve_bruteforce, solve_generic_hungarian
from adtypes.bench import gen_exact_random, gen_strict_random
from adtypes.core import (
    AdRef,
    Instance,
    Matching,
    TypeSpec,
    ValidationError,
    welfare,
)
from adtypes.hungarian import (
    DualSolution,
    OptimalSolution,
    PhaseState,
    certify,
    crossing_violations,
    solve_adtypes,
    update_possible_new_edges,
)


def test_example1_assignment(example1):
    sol = solve_adtypes(example1)
    assert sol.welfare == 9.0
    assert sol.matching.as_dict() == {0: AdRef(1, 0), 1: AdRef(0, 0)}
    assert certify(example1, sol).passed


def test_single_edge():
    inst = Instance(1, [TypeSpec("t", [7.0], [1.0])])
    sol = solve_adtypes(inst)
    assert sol.welfare == 7.0
    assert sol.matching.as_dict() == {0: AdRef(0, 0)}


def test_rejects_gap_rules():
    inst = Instance(2, [TypeSpec("a", [1.0], [1.0, 0.5]),
                        TypeSpec("b", [1.0], [1.0, 0.5])],
                    gap=[[0, 1], [0, 0]])
    with pytest.raises(ValidationError, match="gap"):
        solve_adtypes(inst)


def test_all_zero_values_fully_matched():
    inst = Instance(3, [TypeSpec("t", [0.0, 0.0, 0.0], [1.0, 0.5, 0.25])])
    sol = solve_adtypes(inst)
    assert sol.welfare == 0.0
    assert len(sol.matching) == 3
    assert certify(inst, sol).passed


def test_matches_bruteforce_on_random_instances():
    for seed in range(200):
        inst = gen_exact_random(seed, max_n=8, max_k=3)
        sol = solve_adtypes(inst)
        oracle = welfare(inst, solve_bruteforce(inst))
        assert sol.welfare == oracle, f"seed {seed}"
        assert certify(inst, sol).passed, f"seed {seed}"


def test_instrumentation_budgets():
    # queue occupancy is bounded unconditionally; the three-ads-per-type scan
    # bound holds when values and discounts are strict within each type
    for seed in range(120):
        inst = gen_strict_random(seed)
        stats = solve_adtypes(inst).stats
        assert stats.max_queue_occupancy <= inst.num_slots + inst.num_types
        assert stats.max_scan_candidates <= 3 * inst.num_types
    for seed in range(120):
        inst = gen_exact_random(seed)
        stats = solve_adtypes(inst).stats
        assert stats.max_queue_occupancy <= inst.num_slots + inst.num_types


def test_scan_candidates_three_cases():
    # one type, three ads; rank 0 matched to slot 0, ranks 1-2 unmatched
    inst = Instance(3, [TypeSpec("t", [9.0, 5.0, 2.0], [1.0, 0.5, 0.25])])
    m = Matching({0: AdRef(0, 0)})
    state = PhaseState(inst, m, root_slot=1)
    assert set(state.last_scan_candidates) == {AdRef(0, 1), AdRef(0, 0)}


def test_scan_candidates_matched_above_and_below():
    inst = Instance(4, [TypeSpec("t", [9.0, 5.0, 4.0, 2.0],
                                 [1.0, 0.5, 0.25, 0.125])])
    m = Matching({0: AdRef(0, 0), 3: AdRef(0, 1)})
    state = PhaseState(inst, m, root_slot=2)
    # lowest unmatched rank, highest rank matched below, lowest matched above
    assert set(state.last_scan_candidates) == \
        {AdRef(0, 2), AdRef(0, 0), AdRef(0, 1)}


def test_scan_all_unmatched_one_candidate_per_type():
    types = [TypeSpec(f"t{i}", [3.0, 1.0], [1.0, 0.5]) for i in range(3)]
    inst = Instance(2, types)
    state = PhaseState(inst, Matching({}), root_slot=0)
    assert len(state.last_scan_candidates) == 3
    assert {ad.ad_type for ad in state.last_scan_candidates} == {0, 1, 2}
    state2 = update_possible_new_edges(state, inst, Matching({}), 1)
    assert len(state2.last_scan_candidates) == 3


def test_certify_flags_corrupted_dual(example1):
    sol = solve_adtypes(example1)
    p = list(sol.duals.p)
    p[0] -= 1.0
    corrupt = OptimalSolution(sol.matching, DualSolution(sol.duals.u, tuple(p)),
                              sol.welfare)
    report = certify(example1, corrupt)
    assert not report.passed
    assert report.worst_violation == pytest.approx(1.0)


def test_certify_accepts_generic_solver_output():
    for seed in range(30):
        inst = gen_exact_random(seed)
        sol = solve_generic_hungarian(inst)
        assert certify(inst, sol).passed, f"seed {seed}"


def test_no_crossing_tight_edges():
    for seed in range(150):
        inst = gen_exact_random(seed)
        sol = solve_adtypes(inst)
        assert crossing_violations(inst, sol.duals) == [], f"seed {seed}"


def test_prefix_optimal_after_each_phase():
    for seed in range(60):
        inst = gen_exact_random(seed)
        sol = solve_adtypes(inst, collect_phase_matchings=True)
        for j, m in enumerate(sol.stats.phase_matchings):
            prefix = Matching({s: ad for s, ad in m.pairs if s <= j})
            trunc = Instance(j + 1,
                             [TypeSpec(spec.name, spec.values[:j + 1],
                                       spec.discounts[:j + 1])
                              for spec in inst.types])
            independent = solve_generic_hungarian(trunc)
            assert welfare(trunc, prefix) == independent.welfare, \
                f"seed {seed} phase {j}"


def test_phase_welfare_matches_full_scan_variant():
    # the O(k)-scan phases must augment exactly as a full-scan Hungarian
    # does when both process slots best-first
    for seed in range(40):
        inst = gen_exact_random(seed + 1000, max_n=12, max_k=4)
        mine = solve_adtypes(inst, collect_phase_matchings=True)
        full = solve_generic_hungarian(inst, order="best-first",
                                       collect_phase_matchings=True)
        for j, (ma, mb) in enumerate(zip(mine.stats.phase_matchings,
                                         full.stats.phase_matchings)):
            assert welfare(inst, ma) == welfare(inst, mb), \
                f"seed {seed} phase {j}"


def test_trace_format(example1):
    lines = []
    solve_adtypes(example1, trace=lines.append)
    assert len(lines) == example1.num_slots
    for line in lines:
        assert re.fullmatch(
            r"phase=\d+ pops=\d+ delta=[-0-9.e+]+ pathlen=\d+", line)


def test_matched_ranks_ascend_with_slots():
    # exchange property: same-type ads appear in rank order by slot, except
    # between interchangeable pairs (equal values or equal discounts)
    for seed in range(100):
        inst = gen_exact_random(seed)
        sol = solve_adtypes(inst)
        per_type: dict[int, list[tuple[int, int]]] = {}
        for slot, ad in sol.matching.pairs:
            per_type.setdefault(ad.ad_type, []).append((slot, ad.rank))
        for t, pairs in per_type.items():
            pairs.sort()
            spec = inst.types[t]
            for (s1, r1), (s2, r2) in zip(pairs, pairs[1:]):
                if r1 > r2:
                    assert spec.values[r1] == spec.values[r2] or \
                        spec.discounts[s1] == spec.discounts[s2], f"seed {seed}"
