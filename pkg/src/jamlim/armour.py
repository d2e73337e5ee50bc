"""Armours (influence sets along decreasing paths) and the perfect sampler of the jamming limit."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend, _pykernels
from .errors import BudgetExceeded
from .field import MASK64, UniformField, as_sites
from .scheme import ParkingScheme
from .simulate import Configuration, park

DEFAULT_BUDGET = 10**7

__all__ = ["Armour", "BudgetExceeded", "armour", "perfect_site", "perfect_window", "perfect_samples",
           "default_budget"]


def default_budget() -> int:
    """Site budget for armour exploration; ``JAMLIM_BUDGET`` overrides the default."""
    env = os.environ.get("JAMLIM_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(eq=False)
class Armour:
    seeds_of: np.ndarray
    sites: np.ndarray
    values: np.ndarray
    max_radius_seen: int
    explored: int

    def __len__(self) -> int:
        return len(self.sites)

    def site_set(self) -> set:
        return {tuple(s) for s in self.sites.tolist()}

    def __contains__(self, x) -> bool:
        return tuple(int(c) for c in x) in self.site_set()

    def extent(self) -> int:
        """Sup-norm of the farthest armour site from the origin."""
        return int(np.abs(self.sites).max())

    def within(self, n: int) -> bool:
        """True iff the armour fits in the centred box of radius ``n``."""
        return self.extent() <= n


def _radius(extra: np.ndarray, X: np.ndarray) -> int:
    if len(extra) == 0:
        return 0
    if len(X) == 1:
        return int(np.abs(extra - X[0]).max())
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(X).query(extra, p=np.inf)
    return int(round(float(dist.max())))


def armour(fld, X, nu: int, budget: int | None = None) -> Armour:
    """All sites reachable from ``X`` by decreasing paths with steps of sup-length <= ``nu``."""
    X = as_sites(X, fld.d)
    if len(X) == 0:
        raise ValueError("armour of an empty set")
    budget = default_budget() if budget is None else budget
    if budget < len(X):
        raise ValueError("budget is smaller than the seed set")
    if type(fld) is UniformField:
        sites, vals, explored = _backend.call("armour_bfs", fld.seed, X, nu, budget)
    else:
        s, v, explored = _pykernels.armour_closure(fld.value, X, nu, budget, seed=fld.seed)
        sites, vals = np.array(s, dtype=np.int64).reshape(-1, fld.d), np.array(v)
    return Armour(X, sites, vals, _radius(sites[len(X):], X), int(explored))


def perfect_window(fld, W, scheme: ParkingScheme, budget: int | None = None) -> Configuration:
    """Exact sample of the infinite-volume jamming limit on ``W``: park on the armour of ``W``."""
    if fld.d != scheme.d:
        raise ValueError(f"field has d={fld.d}, scheme has d={scheme.d}")
    A = armour(fld, W, scheme.nu, budget)
    conf = park(fld, A.sites, scheme, unique=True).restrict(A.seeds_of)
    conf.meta.update(seed=fld.seed, scheme=scheme.digest(), armour_size=len(A),
                     max_radius_seen=A.max_radius_seen)
    return conf


def perfect_site(fld, x, scheme: ParkingScheme, budget: int | None = None) -> int:
    return int(perfect_window(fld, [x], scheme, budget).spins[0])


def _batch(args):
    return _backend.call("perfect_batch", *args)


def perfect_samples(seed0: int, replicas: int, W, scheme: ParkingScheme, budget: int | None = None,
                    jobs: int = 1, chunk: int = 20000):
    """Joint perfect samples on ``W`` for seeds ``seed0 + r``, ``r < replicas``.

    Returns ``(spins (R, |W|), armour sizes, radii, explored)``. Results do not
    depend on ``jobs``: chunks are computed independently and concatenated in seed order.
    """
    W = as_sites(W, scheme.d)
    budget = default_budget() if budget is None else budget
    offs, table, use_table = scheme.kernel_args()
    starts = list(range(0, replicas, chunk)) or [0]
    tasks = [((seed0 + s) & MASK64, min(chunk, replicas - s), W, scheme.nu, offs, table, use_table, budget)
             for s in starts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_batch, tasks))
    else:
        parts = [_batch(t) for t in tasks]
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(4))
