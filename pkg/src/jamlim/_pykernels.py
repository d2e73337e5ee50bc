"""Pure-Python kernels; the reference path and the fallback when the extension is missing.

Signatures mirror ``_ckernels`` exactly.
"""
from __future__ import annotations

import numpy as np

from .errors import BudgetExceeded
from .field import GOLDEN, MASK64, mix64, seed_hash, site_values
from .scheme import neighbour_offsets

NAME = "python"


def field_values(seed: int, coords: np.ndarray) -> np.ndarray:
    return site_values(seed, coords)


def value_fn(seed: int):
    sh = seed_hash(seed)

    def value(site):
        h = sh
        for c in site:
            h = mix64((h ^ (c & MASK64)) + GOLDEN)
        return ((h >> 12) + 0.5) * 2.0**-52

    return value


def armour_closure(value_of, X: np.ndarray, nu: int, budget: int, seed=None, initial_values=None):
    """Close ``X`` under decreasing steps of sup-length <= ``nu``.

    ``value_of`` maps a site tuple to its mark. Returns ``(sites, values, explored)``
    with ``X`` first, in input order.
    """
    d = X.shape[1]
    sites = [tuple(row) for row in X.tolist()]
    if initial_values is None:
        vals = [value_of(s) for s in sites]
    else:
        vals = list(map(float, initial_values))
    index = {s: i for i, s in enumerate(sites)}
    if len(sites) > budget:
        raise BudgetExceeded(len(sites), budget, seed)
    offs = [tuple(o) for o in neighbour_offsets(d, nu).tolist()]
    explored = 0
    head = 0
    if d == 1:
        steps = [o[0] for o in offs]
        while head < len(sites):
            y = sites[head][0]
            vy = vals[head]
            for s in steps:
                z = (y + s,)
                explored += 1
                if z in index:
                    continue
                vz = value_of(z)
                if vz < vy:
                    index[z] = len(sites)
                    sites.append(z)
                    vals.append(vz)
                    if len(sites) > budget:
                        raise BudgetExceeded(len(sites), budget, seed)
            head += 1
    else:
        while head < len(sites):
            y = sites[head]
            vy = vals[head]
            for o in offs:
                z = tuple(a + b for a, b in zip(y, o))
                explored += 1
                if z in index:
                    continue
                vz = value_of(z)
                if vz < vy:
                    index[z] = len(sites)
                    sites.append(z)
                    vals.append(vz)
                    if len(sites) > budget:
                        raise BudgetExceeded(len(sites), budget, seed)
            head += 1
    return sites, vals, explored


def armour_bfs(seed: int, X: np.ndarray, nu: int, budget: int):
    X = np.ascontiguousarray(X, dtype=np.int64)
    sites, vals, explored = armour_closure(
        value_fn(seed), X, nu, budget, seed=seed, initial_values=site_values(seed, X)
    )
    return np.array(sites, dtype=np.int64).reshape(-1, X.shape[1]), np.array(vals), explored


def park_grid(grid: np.ndarray, order: np.ndarray, offsets: np.ndarray, table: np.ndarray, use_table: bool) -> None:
    """Run arrivals in ``order`` over a flat int8 ``grid``; ``offsets`` are flat strides."""
    g = grid.tolist()
    offs = offsets.tolist()
    if use_table:
        tbl = set(table.tolist())
        for i in order.tolist():
            w = 0
            for k, o in enumerate(offs):
                if g[i + o]:
                    w |= 1 << k
            if w in tbl:
                g[i] = 1
    else:
        for i in order.tolist():
            for o in offs:
                if g[i + o]:
                    break
            else:
                g[i] = 1
    grid[:] = g


def park_sparse(sites, vals, offsets, table, use_table):
    """Null-boundary parking on an explicit site list; returns spins in list order."""
    order = sorted(range(len(sites)), key=lambda i: (vals[i], sites[i]))
    index = {s: i for i, s in enumerate(sites)}
    state = [0] * len(sites)
    offs = [tuple(o) for o in offsets.tolist()]
    tbl = set(table.tolist()) if use_table else None
    for i in order:
        y = sites[i]
        if use_table:
            w = 0
            for k, o in enumerate(offs):
                j = index.get(tuple(a + b for a, b in zip(y, o)))
                if j is not None and state[j]:
                    w |= 1 << k
            ok = w in tbl
        else:
            ok = True
            for o in offs:
                j = index.get(tuple(a + b for a, b in zip(y, o)))
                if j is not None and state[j]:
                    ok = False
                    break
        if ok:
            state[i] = 1
    return state


def perfect_batch(seed0: int, replicas: int, W: np.ndarray, nu: int, offsets: np.ndarray,
                  table: np.ndarray, use_table: bool, budget: int):
    """Exact joint samples of the limit spins on ``W`` for seeds ``seed0 .. seed0+replicas-1``.

    Returns ``(spins (R, |W|) int8, sizes, radii, explored)``; radius is the largest
    sup-distance from an armour site to the nearest site of ``W``.
    """
    W = np.ascontiguousarray(W, dtype=np.int64)
    k = W.shape[0]
    wsites = [tuple(r) for r in W.tolist()]
    spins = np.zeros((replicas, k), dtype=np.int8)
    sizes = np.zeros(replicas, dtype=np.int64)
    radii = np.zeros(replicas, dtype=np.int64)
    explored = np.zeros(replicas, dtype=np.int64)
    for r in range(replicas):
        seed = (seed0 + r) & MASK64
        value = value_fn(seed)
        sites, vals, ex = armour_closure(value, W, nu, budget, seed=seed)
        state = park_sparse(sites, vals, offsets, table, use_table)
        spins[r] = state[:k]
        sizes[r] = len(sites)
        explored[r] = ex
        rad = 0
        for a in sites[k:]:
            dist = min(max(abs(p - q) for p, q in zip(a, w)) for w in wsites)
            if dist > rad:
                rad = dist
        radii[r] = rad
    return spins, sizes, radii, explored


def _box_layout(d: int, n: int, nu: int):
    side = 2 * n + 1
    padded = side + 2 * nu
    strides = padded ** np.arange(d - 1, -1, -1, dtype=np.int64)
    axes = np.meshgrid(*([np.arange(-n, n + 1, dtype=np.int64)] * d), indexing="ij")
    coords = np.stack([a.ravel() for a in axes], axis=1)
    return coords, (coords + n + nu) @ strides, strides, padded**d


def box_batch(seed0: int, replicas: int, d: int, n: int, nu: int, offsets: np.ndarray, table: np.ndarray,
              use_table: bool, ambient: int, keep: np.ndarray):
    """Park the centred box of radius ``n`` under a constant boundary for seeds ``seed0 + r``.

    Returns ``(occupied counts (R,), spins at box indices keep (R, len(keep)))``;
    box sites are indexed row-major.
    """
    coords, flat, strides, cells = _box_layout(d, n, nu)
    offs = np.asarray(offsets, dtype=np.int64).reshape(-1, d) @ strides
    keep = np.asarray(keep, dtype=np.int64)
    if keep.size and (keep.min() < 0 or keep.max() >= len(coords)):
        raise IndexError("keep index outside the box")
    counts = np.zeros(replicas, dtype=np.int64)
    kept = np.zeros((replicas, len(keep)), dtype=np.int8)
    for r in range(replicas):
        vals = site_values((seed0 + r) & MASK64, coords)
        # row-major order is lexicographic, so a stable sort breaks ties correctly
        order = flat[np.argsort(vals, kind="stable")]
        grid = np.full(cells, ambient, dtype=np.int8)
        grid[flat] = 0
        park_grid(grid, order, offs, table, use_table)
        spins = grid[flat]
        counts[r] = int(spins.sum())
        kept[r] = spins[keep]
    return counts, kept
