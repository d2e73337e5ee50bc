"""Parking processes on finite sets, with null or fixed boundary conditions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .field import Box, arrival_order, as_site, as_sites
from .scheme import ParkingScheme

GRID_CAP = 1 << 27


@dataclass(eq=False)
class Configuration:
    """Spins on a finite support; ``ambient_default`` is the value attributed elsewhere."""

    d: int
    sites: np.ndarray
    spins: np.ndarray
    ambient_default: int = 0
    meta: dict = field(default_factory=dict)
    boundary: Optional[dict] = None

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=np.int64).reshape(-1, self.d)
        self.spins = np.asarray(self.spins, dtype=np.int8).ravel()
        if len(self.sites) != len(self.spins):
            raise ValueError("sites and spins differ in length")
        if np.any((self.spins != 0) & (self.spins != 1)):
            raise ValueError("spins must be 0 or 1")
        self._index = None

    def __len__(self) -> int:
        return len(self.spins)

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = {tuple(s): i for i, s in enumerate(self.sites.tolist())}
        return self._index

    def spin(self, x) -> int:
        i = self.index.get(as_site(x, self.d))
        return self.ambient_default if i is None else int(self.spins[i])

    def occupied(self) -> np.ndarray:
        return self.sites[self.spins == 1]

    def count(self) -> int:
        return int(self.spins.sum())

    def as_dict(self) -> dict:
        return {s: int(v) for s, v in zip(self.index, self.spins.tolist())}

    def restrict(self, sites) -> "Configuration":
        sub = as_sites(sites, self.d)
        try:
            idx = [self.index[tuple(s)] for s in sub.tolist()]
        except KeyError as exc:
            raise ValueError(f"site {exc.args[0]} is outside the support") from None
        return Configuration(self.d, sub, self.spins[idx], self.ambient_default, dict(self.meta))

    def same_spins(self, other: "Configuration") -> bool:
        """Equal supports and spins, regardless of site order."""
        return len(self) == len(other) and self.as_dict() == other.as_dict()

    def to_json(self) -> dict:
        out = {"d": self.d, "sites": self.sites.tolist(), "spins": self.spins.tolist()}
        if self.boundary is not None:
            out["boundary"] = self.boundary
        out.update(self.meta)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Configuration":
        try:
            d = int(obj["d"])
            return cls(d, np.asarray(obj["sites"], dtype=np.int64).reshape(-1, d), obj["spins"],
                       int(obj.get("ambient_default", 0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed configuration: {exc}") from None


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = "null"
    config: Optional[Configuration] = None

    def __post_init__(self):
        if self.kind not in ("null", "ones", "explicit"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if (self.kind == "explicit") != (self.config is not None):
            raise ValueError("an explicit boundary condition needs exactly one configuration")

    @classmethod
    def null(cls) -> "BoundaryCondition":
        return cls("null")

    @classmethod
    def ones(cls) -> "BoundaryCondition":
        return cls("ones")

    @classmethod
    def explicit(cls, config: Configuration) -> "BoundaryCondition":
        return cls("explicit", config)

    def describe(self) -> dict:
        if self.kind == "explicit":
            return {"kind": "explicit", "sites": len(self.config), "ambient_default": self.config.ambient_default}
        return {"kind": self.kind}


NULL = BoundaryCondition.null()


def park(fld, target, scheme: ParkingScheme, bc: BoundaryCondition = NULL, *, unique: bool = False) -> Configuration:
    """Jamming limit of the parking process on ``target``.

    Sites arrive in increasing mark order (ties lexicographic); each adsorbs iff
    its window, read from the current configuration inside ``target`` and from
    ``bc`` outside, is admitted by ``scheme``. Pass ``unique=True`` to skip
    deduplication when ``target`` is known to hold distinct sites.
    """
    if fld.d != scheme.d:
        raise ValueError(f"field has d={fld.d}, scheme has d={scheme.d}")
    X = as_sites(target, fld.d) if unique is False else np.asarray(target, dtype=np.int64)
    if len(X) == 0:
        raise ValueError("cannot park on an empty set")
    if bc.kind == "explicit" and bc.config.d != fld.d:
        raise ValueError("boundary configuration has the wrong dimension")
    values = fld.values(X)
    order = arrival_order(values, X)
    nu = scheme.nu
    lo = X.min(axis=0) - nu
    shape = X.max(axis=0) + nu - lo + 1
    cells = int(np.prod(shape.astype(object)))
    if cells > GRID_CAP:
        raise ValueError(f"target set spans {cells} grid cells; too spread out to park densely")
    strides = np.ones(fld.d, dtype=np.int64)
    for k in range(fld.d - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]

    ambient = {"null": 0, "ones": 1, "explicit": None}[bc.kind]
    if ambient is None:
        ambient = bc.config.ambient_default
    grid = np.full(cells, ambient, dtype=np.int8)
    boundary = None
    if bc.kind == "explicit":
        rel = bc.config.sites - lo
        inside = np.all((rel >= 0) & (rel < shape), axis=1)
        grid[rel[inside] @ strides] = bc.config.spins[inside]
    flat = (X - lo) @ strides
    grid[flat] = 0
    if bc.kind != "null":
        boundary = bc.describe()
        if bc.kind == "explicit":
            collar = _collar(X, nu)
            boundary["collar"] = {"sites": collar.tolist(), "spins": grid[(collar - lo) @ strides].tolist()}

    offs, table, use_table = scheme.kernel_args()
    _backend.call("park_grid", grid, np.ascontiguousarray(flat[order]), np.ascontiguousarray(offs @ strides),
                  table, use_table)
    return Configuration(fld.d, X, grid[flat], ambient, {"seed": fld.seed, "scheme": scheme.digest(),
                                                          "bc": bc.kind}, boundary)


def _collar(X: np.ndarray, nu: int) -> np.ndarray:
    """Sites outside ``X`` within sup-distance ``nu`` of it."""
    from .scheme import neighbour_offsets

    inside = {tuple(s) for s in X.tolist()}
    out = set()
    for o in neighbour_offsets(X.shape[1], nu).tolist():
        for s in (X + o).tolist():
            t = tuple(s)
            if t not in inside:
                out.add(t)
    return np.array(sorted(out), dtype=np.int64).reshape(-1, X.shape[1])


def park_box(fld, n: int, scheme: ParkingScheme, bc: BoundaryCondition = NULL) -> Configuration:
    """:func:`park` on the centred box of radius ``n``."""
    conf = park(fld, Box.centered(fld.d, n).sites(), scheme, bc, unique=True)
    conf.meta["n"] = n
    return conf
