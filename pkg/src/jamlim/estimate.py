"""Monte Carlo and ergodic estimators for the jamming limit, plus the analytic comparison curves.

Replica ``r`` of a run with base seed ``seed0`` uses the field seeded ``seed0 + r``.
All sums go through :func:`math.fsum`, so aggregates do not depend on evaluation order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import _backend
from .armour import perfect_samples, perfect_window
from .field import MASK64, Box, UniformField, as_site
from .scheme import ParkingScheme
from .simulate import NULL, BoundaryCondition, park_box

Z95 = 1.96


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    replicas: int

    @property
    def ci95(self) -> tuple:
        return (self.mean - Z95 * self.std_error, self.mean + Z95 * self.std_error)

    @classmethod
    def from_samples(cls, values) -> "Estimate":
        vals = [float(v) for v in np.asarray(values, dtype=np.float64).ravel()]
        n = len(vals)
        if n < 2:
            raise ValueError("need at least two replicas")
        mean = math.fsum(vals) / n
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
        return cls(mean, math.sqrt(var / n), n)

    def as_dict(self) -> dict:
        lo, hi = self.ci95
        return {"mean": self.mean, "std_error": self.std_error, "ci_low": lo, "ci_high": hi,
                "replicas": self.replicas}


@dataclass(frozen=True)
class CorrelationReport:
    x: tuple
    cov_hat: float
    sigma0_sq_hat: float
    rho_hat: float
    bound: float
    replicas: int
    rho_std_error: float = float("nan")
    cov_std_error: float = float("nan")
    mean0: float = float("nan")
    meanx: float = float("nan")
    degenerate: bool = False

    @property
    def bound_applies(self) -> bool:
        return math.isfinite(self.bound)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["x"] = list(self.x)
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in out.items()}


def tail_bound(n: int, d: int, nu: int) -> float:
    """Upper bound (2nu+1)^(d n) / (n+1)! on the chance the armour of a site leaves its (n nu)-box."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    base = 2 * nu + 1
    if n <= 2000:
        try:
            return float(Fraction(base ** (d * n), math.factorial(n + 1)))
        except OverflowError:
            return math.inf
    return math.exp(d * n * math.log(base) - math.lgamma(n + 2))


def correlation_bound(x_norm: int, d: int, nu: int, sigma0_sq: float) -> float:
    """Super-exponential decay curve for the pair correlation at sup-distance ``x_norm``.

    ``inf`` when the curve does not apply (fewer than two interaction lengths apart)
    or the variance is zero.
    """
    k = x_norm // (2 * nu) - 2
    if k < 0 or not sigma0_sq > 0:
        return math.inf
    return 2.0 / sigma0_sq * math.exp(d * k * math.log(2 * nu + 1) - math.lgamma(k + 1))


def _map(fn, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _box_task(args):
    return _backend.call("box_batch", *args)


def box_samples(seed0: int, replicas: int, n: int, scheme: ParkingScheme, bc: BoundaryCondition = NULL,
                keep=(), jobs: int = 1, chunk: int = 5000):
    """Batch of box parkings for seeds ``seed0 + r``; returns ``(counts, spins at keep)``.

    ``keep`` lists sites of the box whose spins are returned. Constant boundaries only.
    """
    if bc.kind == "explicit":
        raise ValueError("batched box parking supports null and constant-one boundaries")
    d = scheme.d
    side = 2 * n + 1
    keep_idx = []
    for x in keep:
        x = as_site(x, d)
        if max(abs(c) for c in x) > n:
            raise ValueError(f"site {x} is outside the box of radius {n}")
        keep_idx.append(sum((c + n) * side ** (d - 1 - k) for k, c in enumerate(x)))
    offs, table, use_table = scheme.kernel_args()
    ambient = 1 if bc.kind == "ones" else 0
    tasks = [((seed0 + s) & MASK64, min(chunk, replicas - s), d, n, scheme.nu, offs, table, use_table, ambient,
              np.array(keep_idx, dtype=np.int64)) for s in range(0, replicas, chunk)]
    parts = _map(_box_task, tasks, jobs)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def density_box(seed0: int, n: int, scheme: ParkingScheme, bc: BoundaryCondition = NULL, replicas: int = 100,
                jobs: int = 1) -> Estimate:
    """Mean occupation density of the box of radius ``n`` at jamming, over independent seeds."""
    if replicas < 2:
        raise ValueError("need at least two replicas")
    if bc.kind == "explicit":
        vals = [park_box(UniformField(seed0 + r, scheme.d), n, scheme, bc).spins.mean() for r in range(replicas)]
        return Estimate.from_samples(vals)
    counts, _ = box_samples(seed0, replicas, n, scheme, bc, jobs=jobs)
    return Estimate.from_samples(counts / (2 * n + 1) ** scheme.d)


def density_ergodic(seed: int, n: int, scheme: ParkingScheme, budget: Optional[int] = None) -> float:
    """Spatial average of the infinite-volume spins over the box of radius ``n``, for one field."""
    if n < 1:
        raise ValueError("n must be >= 1")
    fld = UniformField(seed, scheme.d)
    conf = perfect_window(fld, Box.centered(scheme.d, n).sites(), scheme, budget)
    return math.fsum(conf.spins.tolist()) / len(conf)


def density_perfect(seed0: int, scheme: ParkingScheme, replicas: int, budget: Optional[int] = None,
                    jobs: int = 1) -> Estimate:
    """Monte Carlo mean of the exact infinite-volume spin at the origin."""
    spins = perfect_samples(seed0, replicas, [(0,) * scheme.d], scheme, budget, jobs)[0][:, 0]
    return Estimate.from_samples(spins)


def correlation(seed0: int, x, scheme: ParkingScheme, replicas: int, budget: Optional[int] = None,
                jobs: int = 1) -> CorrelationReport:
    """Pair correlation of the limit spins at the origin and at ``x``, from joint perfect samples."""
    d = scheme.d
    x = as_site(x, d)
    if not any(x):
        raise ValueError("x must differ from the origin")
    if replicas < 3:
        raise ValueError("need at least three replicas")
    spins = perfect_samples(seed0, replicas, [(0,) * d, x], scheme, budget, jobs)[0].astype(np.float64)
    a, b = spins[:, 0], spins[:, 1]
    R = len(a)
    ma, mb = math.fsum(a.tolist()) / R, math.fsum(b.tolist()) / R
    da, db = a - ma, b - mb
    va = math.fsum((da * da).tolist()) / (R - 1)
    vb = math.fsum((db * db).tolist()) / (R - 1)
    cov = math.fsum((da * db).tolist()) / (R - 1)
    cov_se = float(np.std(da * db, ddof=1) / math.sqrt(R))
    xnorm = max(abs(c) for c in x)
    if va == 0 or vb == 0:
        return CorrelationReport(x, cov, va, math.nan, math.inf, R, math.nan, cov_se, ma, mb, True)
    rho = cov / math.sqrt(va * vb)
    # nonparametric delta method: influence function of the sample correlation
    za, zb = da / math.sqrt(va), db / math.sqrt(vb)
    psi = za * zb - 0.5 * rho * (za * za + zb * zb)
    rho_se = float(np.std(psi, ddof=1) / math.sqrt(R))
    bound = correlation_bound(xnorm, d, scheme.nu, va)
    return CorrelationReport(x, cov, va, rho, bound, R, rho_se, cov_se, ma, mb, False)


@dataclass(frozen=True)
class DiscrepancyRow:
    n: int
    mu: Estimate
    mu_n: Estimate
    diff: float
    std_error: float
    disagreement: Estimate
    bound: float

    def as_dict(self) -> dict:
        return {"n": self.n, "mu": self.mu.as_dict(), "mu_n": self.mu_n.as_dict(), "diff": self.diff,
                "abs_diff": abs(self.diff), "std_error": self.std_error,
                "disagreement": self.disagreement.as_dict(), "bound": self.bound}


def event_occupied(site) -> Callable[[np.ndarray], bool]:
    """Local event {spin at ``site`` is 1}; ``site`` is relative to the centre of the window."""
    site = tuple(site)

    def pred(window: np.ndarray) -> bool:
        m = window.shape[0] // 2
        return bool(window[tuple(c + m for c in site)])

    return pred


def event_always(window: np.ndarray) -> bool:
    return True


def event_pattern(bits: str) -> Callable[[np.ndarray], bool]:
    """Local event {window equals ``bits``}, cells in row-major order."""
    target = np.array([int(ch) for ch in bits], dtype=np.int8)

    def pred(window: np.ndarray) -> bool:
        if window.size != target.size:
            raise ValueError(f"pattern has {target.size} cells, window has {window.size}")
        return bool(np.array_equal(window.ravel(), target))

    return pred


def local_discrepancy(predicate: Callable[[np.ndarray], bool], m: int, ns: Sequence[int], scheme: ParkingScheme,
                      replicas: int, seed0: int = 0, budget: Optional[int] = None, jobs: int = 1):
    """Estimate |mu(L) - mu_n(L)| for a local event ``L`` on the box of radius ``m``.

    ``mu(L)`` comes from perfect samples of that box (seeds ``seed0 + r``), ``mu_n(L)``
    from box parkings of radius ``n`` on an independent seed stream
    (``seed0 + replicas + r``). The coupled column reruns the box parkings on the
    perfect-sample seeds and records how often the two windows differ; its bound is
    ``(2m+1)^d * tail_bound(floor((n - m) / nu))``.
    """
    d = scheme.d
    if any(n <= m for n in ns):
        raise ValueError("every n must exceed m")
    box = Box.centered(d, m).sites()
    shape = (2 * m + 1,) * d
    perfect = perfect_samples(seed0, replicas, box, scheme, budget, jobs)[0]
    hits = np.array([predicate(w.reshape(shape)) for w in perfect], dtype=np.float64)
    mu = Estimate.from_samples(hits)
    rows = []
    for n in ns:
        _, indep = box_samples((seed0 + replicas) & MASK64, replicas, n, scheme, keep=box, jobs=jobs)
        hits_n = np.array([predicate(w.reshape(shape)) for w in indep], dtype=np.float64)
        mu_n = Estimate.from_samples(hits_n)
        _, coupled = box_samples(seed0, replicas, n, scheme, keep=box, jobs=jobs)
        differ = np.any(coupled != perfect, axis=1).astype(np.float64)
        bound = (2 * m + 1) ** d * tail_bound((n - m) // scheme.nu, d, scheme.nu)
        rows.append(DiscrepancyRow(n, mu, mu_n, mu.mean - mu_n.mean,
                                   math.hypot(mu.std_error, mu_n.std_error),
                                   Estimate.from_samples(differ), bound))
    return rows
