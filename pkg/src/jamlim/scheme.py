"""Parking schemes: which local windows let an arriving particle adsorb."""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

MAX_WINDOW_CELLS = 63


def window_offsets(d: int, nu: int) -> np.ndarray:
    """Offsets of the window box of radius ``nu``, row-major (first axis slowest)."""
    return np.array(list(itertools.product(range(-nu, nu + 1), repeat=d)), dtype=np.int64)


def neighbour_offsets(d: int, nu: int) -> np.ndarray:
    offs = window_offsets(d, nu)
    return offs[np.any(offs != 0, axis=1)]


@dataclass(frozen=True)
class ParkingScheme:
    """A parking scheme of radius ``nu`` on Z^d.

    ``kind="mask"``: admissible iff every site in ``mask`` is vacant.
    ``kind="table"``: admissible iff the window (center forced vacant) is listed
    in ``table``; windows are encoded as ints with bit k = cell k in row-major order.
    """

    d: int
    nu: int
    kind: str
    mask: tuple = ()
    table: frozenset = frozenset()

    def __post_init__(self):
        if self.d < 1 or self.nu < 1:
            raise ValueError("need d >= 1 and nu >= 1")
        if self.kind == "mask":
            mask = tuple(sorted({tuple(int(c) for c in m) for m in self.mask}))
            for m in mask:
                if len(m) != self.d or max(abs(c) for c in m) > self.nu or not any(m):
                    raise ValueError(f"mask site {m} not in the punctured window of radius {self.nu}")
            object.__setattr__(self, "mask", mask)
        elif self.kind == "table":
            if self.n_cells > MAX_WINDOW_CELLS:
                raise ValueError(f"truth tables support at most {MAX_WINDOW_CELLS} window cells")
            center = 1 << self.center_bit
            table = frozenset(int(w) & ~center for w in self.table)
            if 0 not in table:
                raise ValueError("a parking scheme must admit the empty window")
            object.__setattr__(self, "table", table)
        else:
            raise ValueError(f"unknown scheme kind {self.kind!r}")

    @property
    def n_cells(self) -> int:
        return (2 * self.nu + 1) ** self.d

    @property
    def center_bit(self) -> int:
        return self.n_cells // 2

    def window_offsets(self) -> np.ndarray:
        return window_offsets(self.d, self.nu)

    def encode(self, window) -> int:
        w = self._flat(window)
        return int(sum(1 << k for k, v in enumerate(w) if v))

    def _flat(self, window) -> np.ndarray:
        w = np.asarray(window).ravel()
        if w.size != self.n_cells:
            raise ValueError(f"window has {w.size} cells, scheme expects {self.n_cells}")
        if np.any((w != 0) & (w != 1)):
            raise ValueError("window spins must be 0 or 1")
        if w[self.center_bit] != 0:
            raise ValueError("window center must be vacant")
        return w

    def admits(self, window) -> bool:
        w = self._flat(window)
        if self.kind == "mask":
            offs = self.window_offsets()
            occupied = {tuple(o) for o in offs[w == 1].tolist()}
            return not any(m in occupied for m in self.mask)
        return self.encode(w) in self.table

    def to_table(self) -> "ParkingScheme":
        """Enumerate a mask scheme into an equivalent truth table."""
        if self.kind == "table":
            return self
        free = [k for k in range(self.n_cells) if k != self.center_bit]
        offs = [tuple(o) for o in self.window_offsets().tolist()]
        blocked = sum(1 << offs.index(m) for m in self.mask)
        if len(free) > 24:
            raise ValueError("window too large to enumerate")
        table = []
        for bits in range(1 << len(free)):
            w = sum(1 << free[i] for i in range(len(free)) if bits >> i & 1)
            if not w & blocked:
                table.append(w)
        return ParkingScheme(self.d, self.nu, "table", table=frozenset(table))

    def to_json(self) -> dict:
        out = {"d": self.d, "nu": self.nu, "kind": self.kind}
        if self.kind == "mask":
            out["mask"] = [list(m) for m in self.mask]
        else:
            out["table"] = sorted(_bits_to_str(w, self.n_cells) for w in self.table)
        return out

    def digest(self) -> str:
        return self._digest

    @cached_property
    def _digest(self) -> str:
        canon = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    # kernel-facing encodings
    def kernel_args(self):
        """``(offsets, table, use_table)`` for the park kernels."""
        return self._kernel_args

    @cached_property
    def _kernel_args(self):
        if self.kind == "mask":
            offs = np.array(self.mask, dtype=np.int64).reshape(-1, self.d)
            return offs, np.zeros(0, dtype=np.int64), False
        return self.window_offsets(), np.array(sorted(self.table), dtype=np.int64), True


def _bits_to_str(w: int, n: int) -> str:
    return "".join("1" if w >> k & 1 else "0" for k in range(n))


def _str_to_bits(s: str, n: int) -> int:
    s = s.strip()
    if len(s) != n or set(s) - {"0", "1"}:
        raise ValueError(f"table entry {s!r} is not a bitstring of length {n}")
    return sum(1 << k for k, ch in enumerate(s) if ch == "1")


def nn_exclusion(d: int, nu: int = 1, norm: str = "l1") -> ParkingScheme:
    """Hard-core exclusion of every site within ``norm``-distance ``nu``."""
    offs = neighbour_offsets(d, nu)
    if norm == "l1":
        offs = offs[np.abs(offs).sum(axis=1) <= nu]
    elif norm != "linf":
        raise ValueError(f"norm must be 'l1' or 'linf', got {norm!r}")
    return ParkingScheme(d, nu, "mask", mask=tuple(map(tuple, offs.tolist())))


def full_table(d: int, nu: int = 1) -> ParkingScheme:
    """The scheme admitting every window: all arrivals adsorb."""
    return ParkingScheme(d, nu, "mask", mask=())


def is_decreasing(s: ParkingScheme) -> bool:
    """True iff removing particles from an admissible window keeps it admissible."""
    if s.kind == "mask":
        return True
    # downward closure follows from closure under single-particle removal
    for w in s.table:
        bits = w
        while bits:
            low = bits & -bits
            if w & ~low not in s.table:
                return False
            bits ^= low
    return True


def scheme_from_json(obj: dict) -> ParkingScheme:
    try:
        d, nu, kind = int(obj["d"]), int(obj["nu"]), obj["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed scheme: {exc}") from None
    if kind == "mask":
        return ParkingScheme(d, nu, "mask", mask=tuple(tuple(m) for m in obj.get("mask", [])))
    if kind == "table":
        n = (2 * nu + 1) ** d
        return ParkingScheme(d, nu, "table", table=frozenset(_str_to_bits(s, n) for s in obj.get("table", [])))
    raise ValueError(f"unknown scheme kind {kind!r}")


def load_scheme(path) -> ParkingScheme:
    with open(path, encoding="utf-8") as fh:
        return scheme_from_json(json.load(fh))


def save_scheme(s: ParkingScheme, path) -> None:
    Path(path).write_text(json.dumps(s.to_json(), indent=1) + "\n", encoding="utf-8")


def resolve_scheme(name: str, d: int | None, nu: int | None) -> ParkingScheme:
    """Parse ``nn-l1``, ``nn-linf``, ``full`` or ``file:<path>``."""
    if name.startswith("file:"):
        s = load_scheme(name[5:])
        if d is not None and d != s.d:
            raise ValueError(f"scheme file has d={s.d}, but --d {d} was given")
        if nu is not None and nu != s.nu:
            raise ValueError(f"scheme file has nu={s.nu}, but --nu {nu} was given")
        return s
    d = 1 if d is None else d
    nu = 1 if nu is None else nu
    if name == "nn-l1":
        return nn_exclusion(d, nu, "l1")
    if name == "nn-linf":
        return nn_exclusion(d, nu, "linf")
    if name == "full":
        return full_table(d, nu)
    raise ValueError(f"unknown scheme {name!r}")
