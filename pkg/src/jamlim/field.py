"""Counter-based uniform random field over the lattice Z^d.

Every site gets an i.i.d. uniform mark in (0, 1) that is computed on demand
from ``(seed, coords)``; nothing is stored. The mixing is a chained
splitmix64 finalizer::

    h = mix64(seed + GOLDEN)
    for c in coords:
        h = mix64((h ^ (c mod 2**64)) + GOLDEN)
    value = ((h >> 12) + 0.5) * 2**-52

so values are odd multiples of 2**-53 and never hit 0 or 1 exactly.
The compiled kernels implement the same recipe bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterable, Mapping, Sequence

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SCALE = 2.0**-52

Site = tuple  # tuple[int, ...]


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def seed_hash(seed: int) -> int:
    return mix64((seed & MASK64) + GOLDEN)


def site_value(seed: int, coords: Sequence[int]) -> float:
    h = seed_hash(seed)
    for c in coords:
        h = mix64((h ^ (c & MASK64)) + GOLDEN)
    return ((h >> 12) + 0.5) * _SCALE


def site_values(seed: int, coords: np.ndarray) -> np.ndarray:
    """Vectorised :func:`site_value` over the rows of an ``(N, d)`` array."""
    coords = np.asarray(coords, dtype=np.int64)
    n = coords.shape[0]
    h = np.full(n, seed_hash(seed), dtype=np.uint64)
    golden = np.uint64(GOLDEN)
    with np.errstate(over="ignore"):
        for k in range(coords.shape[1]):
            h = _mix64_array((h ^ coords[:, k].view(np.uint64)) + golden)
    return ((h >> np.uint64(12)).astype(np.float64) + 0.5) * _SCALE


def parse_seed(text: str | int) -> int:
    """Accept decimal or 0x-hex; reduce to 64 bits."""
    if isinstance(text, int):
        return text & MASK64
    text = text.strip()
    value = int(text, 16) if text.lower().startswith(("0x", "-0x")) else int(text, 10)
    return value & MASK64


def as_site(x: Iterable[int], d: int | None = None) -> Site:
    site = tuple(int(c) for c in x)
    if d is not None and len(site) != d:
        raise ValueError(f"site {site} has dimension {len(site)}, expected {d}")
    return site


def as_sites(sites, d: int) -> np.ndarray:
    """Coerce a collection of sites to a unique ``(N, d)`` int64 array, keeping first-seen order."""
    arr = np.asarray(sites, dtype=np.int64)
    if arr.ndim == 1 and d == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"expected sites of dimension {d}, got array of shape {arr.shape}")
    if len(arr) > 1:
        _, first = np.unique(arr, axis=0, return_index=True)
        if len(first) != len(arr):
            arr = arr[np.sort(first)]
    return arr


def sup_norm(x: Sequence[int], y: Sequence[int] | None = None) -> int:
    if y is None:
        return max(abs(int(c)) for c in x)
    return max(abs(int(a) - int(b)) for a, b in zip(x, y))


@dataclass(frozen=True)
class Box:
    center: Site
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("box radius must be nonnegative")

    @classmethod
    def centered(cls, d: int, radius: int) -> "Box":
        return cls((0,) * d, radius)

    @property
    def d(self) -> int:
        return len(self.center)

    def __len__(self) -> int:
        return (2 * self.radius + 1) ** self.d

    def __contains__(self, x) -> bool:
        return sup_norm(x, self.center) <= self.radius

    def sites(self) -> np.ndarray:
        """All sites in row-major order (first axis slowest)."""
        axes = [np.arange(c - self.radius, c + self.radius + 1, dtype=np.int64) for c in self.center]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)


@dataclass(frozen=True)
class UniformField:
    """i.i.d. uniform marks on Z^d, a pure function of ``(seed, site)``."""

    seed: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        object.__setattr__(self, "seed", int(self.seed) & MASK64)

    def value(self, x) -> float:
        return site_value(self.seed, as_site(x, self.d))

    def values(self, sites) -> np.ndarray:
        return site_values(self.seed, _check(sites, self.d))

    def less(self, x, y) -> bool:
        x, y = as_site(x, self.d), as_site(y, self.d)
        if x == y:
            raise ValueError("less() needs two distinct sites")
        vx, vy = self.value(x), self.value(y)
        if vx != vy:
            return vx < vy
        return x < y

    def shifted(self, r: int) -> "UniformField":
        """Field for replica ``r`` of a seed schedule starting at this seed."""
        return UniformField((self.seed + r) & MASK64, self.d)


@dataclass(frozen=True)
class ExplicitField:
    """A field with hand-set marks at some sites, falling back to a uniform field elsewhere.

    Used for hand-traced examples; always runs on the pure-Python kernels.
    """

    d: int
    overrides: Mapping[Site, float]
    base: UniformField = dc_field(default=None)

    def __post_init__(self):
        ov = {as_site(k, self.d): float(v) for k, v in dict(self.overrides).items()}
        for v in ov.values():
            if not 0.0 < v < 1.0:
                raise ValueError("field values must lie in (0, 1)")
        object.__setattr__(self, "overrides", ov)
        if self.base is None:
            object.__setattr__(self, "base", UniformField(0, self.d))

    @property
    def seed(self) -> int:
        return self.base.seed

    def value(self, x) -> float:
        x = as_site(x, self.d)
        v = self.overrides.get(x)
        return self.base.value(x) if v is None else v

    def values(self, sites) -> np.ndarray:
        arr = _check(np.asarray(sites, dtype=np.int64), self.d)
        out = self.base.values(arr)
        for i, row in enumerate(arr):
            v = self.overrides.get(tuple(int(c) for c in row))
            if v is not None:
                out[i] = v
        return out

    def less(self, x, y) -> bool:
        x, y = as_site(x, self.d), as_site(y, self.d)
        if x == y:
            raise ValueError("less() needs two distinct sites")
        vx, vy = self.value(x), self.value(y)
        if vx != vy:
            return vx < vy
        return x < y


def _check(arr: np.ndarray, d: int) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64)
    if arr.ndim == 1 and d == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"expected sites of dimension {d}, got array of shape {arr.shape}")
    return arr


def arrival_order(values: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Indices sorting sites by increasing mark, ties broken lexicographically."""
    keys = [coords[:, k] for k in range(coords.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [values])
