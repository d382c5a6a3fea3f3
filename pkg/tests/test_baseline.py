import numpy as np
import pytest

from adtypes.baseline import (
    AllocationCurve,
    _greedy_with_type_order,
    candidate_bids,
    greedy_allocation_curve,
    greedy_quantity,
    solve_bruteforce,
    solve_generic_hungarian,
    solve_greedy,
)
from adtypes.bench import GenConfig, gen_exact_random, gen_greedy_tight, gen_random
from adtypes.core import AdRef, GuardError, Instance, TypeSpec, welfare
from adtypes.hungarian import certify, solve_adtypes


def test_generic_example1(example1):
    sol = solve_generic_hungarian(example1)
    assert sol.welfare == 9.0
    assert certify(example1, sol).passed


def test_generic_one_by_one():
    inst = Instance(1, [TypeSpec("t", [7.0], [1.0])])
    assert solve_generic_hungarian(inst).welfare == 7.0


def test_generic_agrees_with_specialized():
    for seed in range(250):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 21))
        k = int(rng.integers(1, 6))
        dist = ("uniform-int", "uniform-real", "pareto")[seed % 3]
        fam = ("geometric", "linear", "step")[seed % 3]
        inst = gen_random(GenConfig(n, k, seed, dist, fam))
        a = solve_adtypes(inst).welfare
        g = solve_generic_hungarian(inst).welfare
        assert abs(a - g) <= 1e-9 * max(1.0, abs(a)), f"seed {seed}"


def test_bruteforce_example1(example1):
    assert welfare(example1, solve_bruteforce(example1)) == 9.0


def test_bruteforce_trivial_and_guard():
    lone = Instance(1, [TypeSpec("t", [0.0], [1.0])])
    assert welfare(lone, solve_bruteforce(lone)) == 0.0
    big = Instance(9, [TypeSpec("t", [1.0] * 9, [1.0] * 9)])
    with pytest.raises(GuardError):
        solve_bruteforce(big)


def test_greedy_tight_instance():
    inst = gen_greedy_tight(0.25)
    greedy_w = welfare(inst, solve_greedy(inst))
    optimal = solve_adtypes(inst).welfare
    assert greedy_w == 1.0
    assert optimal == 1.75


def test_greedy_single_type_is_optimal():
    for seed in range(40):
        inst = gen_exact_random(seed, max_n=8, max_k=1)
        assert welfare(inst, solve_greedy(inst)) == solve_adtypes(inst).welfare


def test_greedy_two_approximation():
    for seed in range(200):
        inst = gen_exact_random(seed)
        g = welfare(inst, solve_greedy(inst))
        opt = welfare(inst, solve_bruteforce(inst))
        assert g >= opt / 2, f"seed {seed}: greedy {g} < half of {opt}"


def test_greedy_deterministic_across_inspection_orders():
    for seed in range(40):
        inst = gen_exact_random(seed)
        forward = solve_greedy(inst)
        backward = _greedy_with_type_order(inst, range(inst.num_types - 1, -1, -1))
        assert forward == backward
        assert solve_greedy(inst) == forward


def test_allocation_curve_sole_bidder():
    inst = Instance(1, [TypeSpec("t", [5.0], [1.0])])
    curve = greedy_allocation_curve(inst, AdRef(0, 0))
    assert curve.points == ((0.0, 1.0),)
    assert curve.quantity_at(0.0) == 0.0
    assert curve.quantity_at(3.0) == 1.0


def test_allocation_curve_tight_instance_probe():
    inst = gen_greedy_tight(0.25)
    probe = AdRef(1, 0)  # the flat type's real bidder
    curve = greedy_allocation_curve(inst, probe)
    assert curve.is_monotone()
    # it always wins a full-discount slot once its bid is positive
    assert curve.quantity_at(0.5) == 1.0
    assert curve.quantity_at(2.0) == 1.0


def test_allocation_curve_monotone_on_random_probes():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 300:
        inst = gen_exact_random(int(rng.integers(0, 1 << 31)),
                                max_n=4, max_k=2)
        for t in range(inst.num_types):
            for r in range(inst.real_counts[t]):
                curve = greedy_allocation_curve(inst, AdRef(t, r),
                                                resolution=512)
                assert curve.is_monotone(), (inst, t, r)
                checked += 1


def test_candidate_bids_include_own_value_and_zero():
    inst = gen_greedy_tight(0.5)
    bids = candidate_bids(inst, AdRef(0, 0))
    assert 0.0 in bids
    assert 1.0 in bids
    assert bids == sorted(bids)


def test_curve_constructor_rejects_unsorted_thresholds():
    with pytest.raises(ValueError):
        AllocationCurve(((1.0, 0.5), (1.0, 0.75)))


def test_greedy_quantity_matches_curve():
    inst = gen_greedy_tight(0.25)
    probe = AdRef(0, 0)
    curve = greedy_allocation_curve(inst, probe)
    for bid in (0.1, 0.4, 0.9, 1.3, 2.4):
        assert curve.quantity_at(bid) == greedy_quantity(inst, probe, bid)
