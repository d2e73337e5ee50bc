import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jamlim.armour import armour, default_budget, perfect_samples, perfect_site, perfect_window
from jamlim.errors import BudgetExceeded
from jamlim.field import Box, ExplicitField, UniformField
from jamlim.scheme import ParkingScheme, neighbour_offsets, nn_exclusion
from jamlim.simulate import BoundaryCondition, park, park_box

seeds = st.integers(0, 2**64 - 1)


def closed(fld, sites, nu):
    sset = {tuple(s) for s in sites}
    offs = neighbour_offsets(fld.d, nu).tolist()
    for y in sset:
        vy = fld.value(y)
        for o in offs:
            z = tuple(a + b for a, b in zip(y, o))
            if fld.value(z) < vy and z not in sset:
                return False
    return True


def test_hand_trace_armour():
    fld = ExplicitField(1, {(-2,): 0.9, (-1,): 0.8, (0,): 0.5, (1,): 0.3, (2,): 0.7, (3,): 0.95})
    A = armour(fld, [(0,)], 1)
    assert A.site_set() == {(0,), (1,)}
    assert A.max_radius_seen == 1
    assert perfect_site(fld, (0,), nn_exclusion(1, 1)) == 0


def test_local_minimum_is_its_own_armour():
    s = nn_exclusion(2, 1)
    for seed in range(200):
        fld = UniformField(seed, 2)
        vals = fld.values(Box.centered(2, 1).sites())
        if vals[4] == vals.min():
            A = armour(fld, [(0, 0)], 1)
            assert A.site_set() == {(0, 0)}
            assert perfect_site(fld, (0, 0), s) == 1


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([1, 2]), st.sampled_from([1, 2]))
def test_closure_and_minimality(seed, d, nu):
    fld = UniformField(seed, d)
    X = [(0,) * d, (3,) + (0,) * (d - 1)]
    A = armour(fld, X, nu)
    sset = A.site_set()
    assert {tuple(x) for x in X} <= sset
    assert closed(fld, A.sites, nu)
    # every extra site is reached by a decreasing step from another armour site
    offs = neighbour_offsets(d, nu).tolist()
    for a in sset - {tuple(x) for x in X}:
        va = fld.value(a)
        assert any(tuple(p - q for p, q in zip(a, o)) in sset and fld.value(tuple(p - q for p, q in zip(a, o))) > va
                   for o in offs)


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from([1, 2]))
def test_additivity(seed, d):
    fld = UniformField(seed, d)
    x, y = (0,) * d, (2,) * d
    union = armour(fld, [x, y], 1).site_set()
    assert union == armour(fld, [x], 1).site_set() | armour(fld, [y], 1).site_set()


def test_monotone_in_x():
    for seed in range(50):
        fld = UniformField(seed, 1)
        assert armour(fld, [(0,)], 1).site_set() <= armour(fld, Box.centered(1, 1).sites(), 1).site_set()


def test_budget_exceeded():
    fld = UniformField(0, 2)
    with pytest.raises(BudgetExceeded) as info:
        armour(fld, Box.centered(2, 10).sites(), 1, budget=441)
    assert info.value.budget == 441 and info.value.seed == 0
    with pytest.raises(ValueError):
        armour(fld, Box.centered(2, 1).sites(), 1, budget=2)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("JAMLIM_BUDGET", "5")
    assert default_budget() == 5
    monkeypatch.delenv("JAMLIM_BUDGET")
    assert default_budget() == 10**7


@pytest.mark.parametrize("d,seeds_n", [(1, 1000), (2, 200)])
def test_box_matches_armour_parking(d, seeds_n):
    """Armour inside the box: the box parking and the perfect sample agree on the whole armour."""
    s = nn_exclusion(d, 1)
    for seed in range(seeds_n):
        fld = UniformField(seed, d)
        A = armour(fld, [(0,) * d], 1)
        n = A.extent()
        for m in (n, n + 2):
            box = park_box(fld, m, s)
            on_armour = park(fld, A.sites, s)
            assert box.restrict(A.sites).same_spins(on_armour)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([1, 2]))
def test_stability_from_armour_radius(seed, d):
    s = nn_exclusion(d, 1, "linf")
    fld = UniformField(seed, d)
    W = Box.centered(d, 1).sites()
    ref = perfect_window(fld, W, s)
    n0 = armour(fld, W, 1).extent()
    for n in range(n0, n0 + 4):
        assert park_box(fld, n, s).restrict(W).same_spins(ref)


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([1, 2]))
def test_boundary_invariance(seed, d):
    s = nn_exclusion(d, 1)
    fld = UniformField(seed, d)
    W = Box.centered(d, 1).sites()
    n = armour(fld, W, 1).extent()
    ref = perfect_window(fld, W, s)
    ones = park_box(fld, n + 1, s, BoundaryCondition.ones()).restrict(W)
    assert ones.same_spins(ref)


def test_perfect_window_consistency():
    s = nn_exclusion(1, 1)
    W = Box.centered(1, 1).sites()
    for seed in range(300):
        fld = UniformField(seed, 1)
        conf = perfect_window(fld, W, s)
        assert conf.spin((0,)) == perfect_site(fld, (0,), s)
        assert conf.meta["armour_size"] >= 3


def test_non_decreasing_table_scheme_coupling():
    s = ParkingScheme(1, 1, "table", table=frozenset({0, 0b101}))
    for seed in range(200):
        fld = UniformField(seed, 1)
        A = armour(fld, [(0,)], 1)
        assert park_box(fld, A.extent(), s).spin((0,)) == perfect_site(fld, (0,), s)


def test_perfect_samples_match_perfect_site():
    s = nn_exclusion(2, 1)
    W = [(0, 0), (1, 2)]
    spins, sizes, radii, explored = perfect_samples(77, 60, W, s)
    for r in range(60):
        fld = UniformField(77 + r, 2)
        conf = perfect_window(fld, W, s)
        assert spins[r].tolist() == conf.spins.tolist()
        A = armour(fld, W, 1)
        assert sizes[r] == len(A) and radii[r] == A.max_radius_seen and explored[r] == A.explored


def test_perfect_samples_independent_of_jobs_and_chunks():
    s = nn_exclusion(1, 1)
    a = perfect_samples(5, 3000, [(0,), (4,)], s, jobs=1)
    b = perfect_samples(5, 3000, [(0,), (4,)], s, jobs=2, chunk=700)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


def test_max_radius_multi_site():
    fld = ExplicitField(1, {(-1,): 0.6, (0,): 0.5, (1,): 0.4, (2,): 0.3, (3,): 0.35, (4,): 0.9, (5,): 0.2,
                            (6,): 0.95, (-2,): 0.99})
    A = armour(fld, [(0,), (5,)], 1)
    assert A.site_set() == {(0,), (1,), (2,), (5,)}
    assert A.max_radius_seen == 2
