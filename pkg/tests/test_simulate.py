import functools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jamlim.field import ExplicitField, UniformField
from jamlim.scheme import ParkingScheme, full_table, nn_exclusion
from jamlim.simulate import BoundaryCondition, Configuration, park, park_box

SCHEMES = [nn_exclusion(1, 1), nn_exclusion(1, 2), nn_exclusion(2, 1, "l1"), nn_exclusion(2, 1, "linf"),
           ParkingScheme(1, 1, "table", table=frozenset({0, 0b101}))]


def naive_park(fld, sites, scheme, outside):
    """Steps 1-4 written out directly: visit by `less`, read windows, test `admits`."""
    sites = [tuple(s) for s in sites]
    order = sorted(sites, key=functools.cmp_to_key(lambda a, b: -1 if fld.less(a, b) else 1))
    inside = set(sites)
    state = {s: 0 for s in sites}
    offs = [tuple(o) for o in scheme.window_offsets().tolist()]
    for x in order:
        w = []
        for o in offs:
            y = tuple(a + b for a, b in zip(x, o))
            w.append(0 if y == x else (state[y] if y in inside else outside(y)))
        if scheme.admits(np.array(w)):
            state[x] = 1
    return state


def test_hand_trace_three_sites():
    fld = ExplicitField(1, {(-1,): 0.2, (0,): 0.5, (1,): 0.4})
    conf = park(fld, [(-1,), (0,), (1,)], nn_exclusion(1, 1))
    assert conf.as_dict() == {(-1,): 1, (0,): 0, (1,): 1}


def test_hand_trace_via_park_box():
    fld = ExplicitField(1, {(-1,): 0.2, (0,): 0.5, (1,): 0.4})
    conf = park_box(fld, 1, nn_exclusion(1, 1))
    assert conf.spins.tolist() == [1, 0, 1]
    assert conf.meta["n"] == 1


@pytest.mark.parametrize("d", [1, 2, 3])
def test_full_table_occupies_everything(d):
    conf = park_box(UniformField(3, d), 2, full_table(d, 1))
    assert conf.count() == 5**d
    if d < 3:
        conf = park_box(UniformField(3, d), 2, full_table(d, 1).to_table(), BoundaryCondition.ones())
        assert conf.count() == 5**d


def test_constant_one_boundary_blocks_lone_site():
    conf = park(UniformField(0, 1), [(0,)], nn_exclusion(1, 1), BoundaryCondition.ones())
    assert conf.spins.tolist() == [0]
    assert conf.boundary == {"kind": "ones"}


def test_single_site_box():
    for seed in range(5):
        assert park_box(UniformField(seed, 2), 0, nn_exclusion(2, 1)).spins.tolist() == [1]


def test_packing_bound_1d():
    s = nn_exclusion(1, 1)
    for seed in range(50):
        for n in (1, 5, 30):
            assert park_box(UniformField(seed, 1), n, s).count() <= n + 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**64 - 1), st.sampled_from(range(len(SCHEMES))), st.sampled_from(["null", "ones"]),
       st.data())
def test_matches_naive_steps(seed, k, bc, data):
    s = SCHEMES[k]
    pts = data.draw(st.lists(st.tuples(*[st.integers(-4, 4)] * s.d), min_size=1, max_size=25, unique=True))
    fld = UniformField(seed, s.d)
    conf = park(fld, pts, s, BoundaryCondition(bc))
    expected = naive_park(fld, pts, s, lambda y: 1 if bc == "ones" else 0)
    assert conf.as_dict() == expected


def test_explicit_boundary():
    s = nn_exclusion(1, 1)
    cfg = Configuration(1, [[-1], [3]], [1, 0], ambient_default=0)
    bc = BoundaryCondition.explicit(cfg)
    for seed in range(30):
        fld = UniformField(seed, 1)
        X = [(0,), (1,), (2,)]
        conf = park(fld, X, s, bc)
        assert conf.as_dict() == naive_park(fld, X, s, lambda y: cfg.spin(y))
        assert conf.spin((0,)) == 0
        assert conf.boundary["collar"] == {"sites": [[-1], [3]], "spins": [1, 0]}


def test_explicit_boundary_ambient_default():
    s = nn_exclusion(1, 1)
    cfg = Configuration(1, [[5]], [0], ambient_default=1)
    conf = park(UniformField(0, 1), [(0,)], s, BoundaryCondition.explicit(cfg))
    assert conf.spins.tolist() == [0]


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_jammed_for_decreasing_schemes(k):
    s = SCHEMES[k]
    offs = s.window_offsets()
    for seed in range(10):
        for bc in ("null", "ones"):
            conf = park_box(UniformField(seed, s.d), 4, s, BoundaryCondition(bc))
            amb = 1 if bc == "ones" else 0
            for x, v in zip(conf.sites.tolist(), conf.spins.tolist()):
                if v:
                    continue
                w = np.array([0 if not any(o) else (conf.spin(tuple(np.add(x, o))) if
                              tuple(np.add(x, o).tolist()) in conf.index else amb) for o in offs.tolist()])
                assert not s.admits(w)


def test_deterministic_and_order_independent():
    s = nn_exclusion(2, 1)
    fld = UniformField(99, 2)
    rng = np.random.default_rng(1)
    pts = rng.integers(-6, 6, size=(60, 2))
    a = park(fld, pts, s)
    b = park(fld, pts[::-1], s)
    assert a.same_spins(b)
    assert json.dumps(a.to_json()) == json.dumps(park(fld, pts, s).to_json())


def test_errors():
    s = nn_exclusion(1, 1)
    with pytest.raises(ValueError):
        park(UniformField(0, 1), np.zeros((0, 1), dtype=np.int64), s)
    with pytest.raises(ValueError):
        park(UniformField(0, 2), [(0, 0)], s)
    with pytest.raises(ValueError):
        park(UniformField(0, 1), [(0,), (10**9,)], s)
    with pytest.raises(ValueError):
        BoundaryCondition("periodic")
    with pytest.raises(ValueError):
        BoundaryCondition("explicit")


def test_configuration_json_round_trip():
    conf = park_box(UniformField(4, 2), 2, nn_exclusion(2, 1))
    obj = json.loads(json.dumps(conf.to_json()))
    assert obj["seed"] == 4 and obj["scheme"] == nn_exclusion(2, 1).digest() and obj["bc"] == "null"
    back = Configuration.from_json(obj)
    assert back.same_spins(conf)
    with pytest.raises(ValueError):
        Configuration.from_json({"d": 1})


def test_restrict():
    conf = park_box(UniformField(4, 1), 3, nn_exclusion(1, 1))
    sub = conf.restrict([(1,), (-1,)])
    assert sub.spins.tolist() == [conf.spin((1,)), conf.spin((-1,))]
    with pytest.raises(ValueError):
        conf.restrict([(9,)])
