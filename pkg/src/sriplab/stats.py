"""Monte Carlo tail and spectrum experiments over random supports.

Every trial draws its own generator from ``trial_seed(master_seed, i)``, so
reports do not depend on the order in which trials run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .dictionary import AtomId, Dictionary
from .spectral import deviation_extremes, gram, hermitian_eigenvalues

UNIFORM = "uniform"
DISTINCT_BASES = "distinct-bases"
POLICIES = (UNIFORM, DISTINCT_BASES)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class ConfigError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, index: int) -> int:
    """64-bit seed for trial ``index``: two chained SplitMix64 rounds."""
    return splitmix64(splitmix64(int(master_seed) & _MASK64) ^ (int(index) & _MASK64))


def _partial_fisher_yates(rng, N, n):
    # sparse swap table: O(n) memory even when N ~ 10^6
    swaps = {}
    out = []
    for i in range(n):
        j = int(rng.integers(i, N))
        vi = swaps.get(i, i)
        vj = swaps.get(j, j)
        swaps[j] = vi
        swaps[i] = vj
        out.append(vj)
    return out


def sample_support(d: Dictionary, n: int, seed: int, policy: str = UNIFORM) -> tuple[AtomId, ...]:
    """Random ``n``-subset of atoms, sorted by AtomId.

    ``uniform`` draws uniformly over all n-subsets. ``distinct-bases`` draws
    uniformly over n-subsets with no two atoms from the same basis; it is
    meant for tests that need every Gram entry to be a cross-basis product.
    """
    n = int(n)
    if policy not in POLICIES:
        raise ConfigError(f"unknown sampling policy {policy!r}")
    if n < 1:
        raise ConfigError(f"support size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if policy == UNIFORM:
        if n > d.n_atoms:
            raise ConfigError(f"support size {n} exceeds dictionary size {d.n_atoms}")
        flat = _partial_fisher_yates(rng, d.n_atoms, n)
        ids = [AtomId(*divmod(k, d.p)) for k in flat]
    else:
        if n > d.n_bases:
            raise ConfigError(
                f"distinct-bases policy needs n <= number of bases ({d.n_bases}), got {n}")
        bases = _partial_fisher_yates(rng, d.n_bases, n)
        idx = rng.integers(0, d.p, size=n)
        ids = [AtomId(int(b), int(i)) for b, i in zip(bases, idx)]
    return tuple(sorted(ids))


def srip_trial(d: Dictionary, n: int, seed: int, policy: str = UNIFORM) -> float:
    """``||G(S) - Id||`` for one random support."""
    return deviation_extremes(gram(d, sample_support(d, n, seed, policy)))[0]


def wilson_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    z = NormalDist().inv_cdf(0.5 + level / 2)
    ph = k / n
    denom = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / denom
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class ScanConfig:
    """Parameters of a tail-probability scan.

    Exactly one of ``epsilon`` (n = round(p^(1-eps))) or ``alpha``
    (n = round(alpha p)) is set. ``threshold`` overrides the default
    ``p^(-eps/2)``; it is required in alpha mode.
    """

    trials: int
    master_seed: int = 0
    epsilon: float | None = None
    alpha: float | None = None
    threshold: float | None = None
    policy: str = UNIFORM
    n: int | None = None

    def __post_init__(self):
        if (self.epsilon is None) == (self.alpha is None):
            raise ConfigError("set exactly one of epsilon or alpha")
        val = self.epsilon if self.epsilon is not None else self.alpha
        name = "epsilon" if self.epsilon is not None else "alpha"
        if not 0 < val < 1:
            raise ConfigError(f"{name} must lie in (0, 1), got {val}")
        if self.trials < 1:
            raise ConfigError(f"trials must be positive, got {self.trials}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown sampling policy {self.policy!r}")
        if self.alpha is not None and self.threshold is None:
            raise ConfigError("alpha mode needs an explicit threshold")

    def support_size(self, d: Dictionary) -> int:
        if self.n is not None:
            n = int(self.n)
        elif self.epsilon is not None:
            # round half to even; the result is clamped to [2, |D|]
            n = min(max(round(d.p ** (1 - self.epsilon)), 2), d.n_atoms)
        else:
            n = round(self.alpha * d.p)
        if not 1 <= n <= d.n_atoms:
            raise ConfigError(f"derived support size {n} outside [1, {d.n_atoms}]")
        return n

    def tail_threshold(self, d: Dictionary) -> float:
        if self.threshold is not None:
            return float(self.threshold)
        return d.p ** (-self.epsilon / 2)


@dataclass
class ScanReport:
    p: int
    n: int
    threshold: float
    trials: int
    exceed_count: int
    p_hat: float
    deviations: np.ndarray = field(repr=False)
    seeds: list = field(repr=False)
    wilson_ci: tuple[float, float] = (0.0, 1.0)
    master_seed: int = 0

    def summary(self) -> dict:
        return {
            "p": self.p, "n": self.n, "threshold": self.threshold, "trials": self.trials,
            "exceed_count": self.exceed_count, "p_hat": self.p_hat,
            "wilson_lo": self.wilson_ci[0], "wilson_hi": self.wilson_ci[1],
            "master_seed": self.master_seed,
        }


def srip_scan(d: Dictionary, cfg: ScanConfig) -> ScanReport:
    n = cfg.support_size(d)
    thr = cfg.tail_threshold(d)
    if cfg.policy == DISTINCT_BASES and n > d.n_bases:
        raise ConfigError(f"distinct-bases policy needs n <= {d.n_bases}, got {n}")
    seeds = [trial_seed(cfg.master_seed, i) for i in range(cfg.trials)]
    devs = np.array([srip_trial(d, n, s, cfg.policy) for s in seeds])
    k = int(np.count_nonzero(devs >= thr))
    return ScanReport(
        p=d.p, n=n, threshold=thr, trials=cfg.trials, exceed_count=k,
        p_hat=k / cfg.trials, deviations=devs, seeds=seeds,
        wilson_ci=wilson_interval(k, cfg.trials), master_seed=cfg.master_seed)


def semicircle_pdf(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 2
    out = np.zeros_like(x)
    out[inside] = np.sqrt(4 - x[inside] ** 2) / (2 * np.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(x):
    """CDF of the semicircle law on [-2, 2]."""
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -2.0, 2.0)
    out = 0.5 + xc * np.sqrt(4 - xc * xc) / (4 * np.pi) + np.arcsin(xc / 2) / np.pi
    out = np.where(x <= -2, 0.0, np.where(x >= 2, 1.0, out))
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def ks_distance(samples: Sequence[float], cdf: Callable = semicircle_cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance between ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    N = x.size
    if N == 0:
        raise ValueError("ks_distance needs a nonempty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, N + 1)
    return float(max(np.max(np.abs(i / N - F)), np.max(np.abs((i - 1) / N - F))))


def spectral_moment(samples: Sequence[float], k: int) -> float:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("spectral_moment needs a nonempty sample")
    if int(k) != k or k < 1:
        raise ValueError(f"moment order must be a positive integer, got {k}")
    return float(np.mean(x ** int(k)))


@dataclass
class SpectrumResult:
    p: int
    n: int
    trials: int
    eigenvalues: np.ndarray = field(repr=False)
    per_trial: list = field(repr=False)
    supports: list = field(repr=False)
    ks: float = float("nan")
    moments: dict = field(default_factory=dict)
    master_seed: int = 0

    def summary(self) -> dict:
        out = {"p": self.p, "n": self.n, "trials": self.trials,
               "master_seed": self.master_seed, "ks": self.ks}
        out.update({f"m{k}": v for k, v in self.moments.items()})
        return out


def normalized_error(G, p: int) -> np.ndarray:
    """``sqrt(p/n) (G - Id)`` for an ``n x n`` Gram matrix."""
    n = G.shape[0]
    return math.sqrt(p / n) * (G - np.eye(n))


def error_spectrum(d: Dictionary, n: int, trials: int, master_seed: int,
                   policy: str = UNIFORM) -> SpectrumResult:
    """Pooled eigenvalues of the normalized Gram error over random supports."""
    if n < 2:
        raise ConfigError("error_spectrum needs n >= 2")
    if trials < 1:
        raise ConfigError("trials must be positive")
    per_trial, supports = [], []
    for i in range(trials):
        s = sample_support(d, n, trial_seed(master_seed, i), policy)
        E = normalized_error(gram(d, s), d.p)
        per_trial.append(hermitian_eigenvalues(E).eigenvalues)
        supports.append(s)
    pooled = np.concatenate(per_trial)
    return SpectrumResult(
        p=d.p, n=n, trials=trials, eigenvalues=pooled, per_trial=per_trial,
        supports=supports, ks=ks_distance(pooled, semicircle_cdf),
        moments={k: spectral_moment(pooled, k) for k in range(1, 7)},
        master_seed=master_seed)


@dataclass
class DecayFit:
    primes: list
    epsilon: float | None
    p_hat: list
    log_p_hat: list
    slope: float
    intercept: float
    primes_used: int
    primes_zero: int
    reports: list = field(default_factory=list, repr=False)


def fit_decay(primes: Sequence[int], p_hats: Sequence[float], epsilon=None) -> DecayFit:
    """Least-squares line through ``(log p, log p_hat)`` for the nonzero estimates."""
    primes = [int(p) for p in primes]
    p_hats = [float(v) for v in p_hats]
    used = [(p, v) for p, v in zip(primes, p_hats) if v > 0]
    if len(used) < 2:
        raise InsufficientDataError("insufficient nonzero tail estimates")
    lx = np.log([p for p, _ in used])
    ly = np.log([v for _, v in used])
    slope, intercept = np.polyfit(lx, ly, 1)
    return DecayFit(
        primes=primes, epsilon=epsilon, p_hat=p_hats,
        log_p_hat=[math.log(v) if v > 0 else float("-inf") for v in p_hats],
        slope=float(slope), intercept=float(intercept),
        primes_used=len(used), primes_zero=len(primes) - len(used))


def estimate_decay(family: Callable[[int], Dictionary], primes: Sequence[int],
                   epsilon: float, trials: int, master_seed: int,
                   policy: str = UNIFORM) -> DecayFit:
    """Run :func:`srip_scan` per prime and fit the empirical tail decay exponent."""
    cfg = ScanConfig(trials=trials, master_seed=master_seed, epsilon=epsilon, policy=policy)
    reports = [srip_scan(family(p), cfg) for p in primes]
    fit = fit_decay(primes, [r.p_hat for r in reports], epsilon)
    fit.reports = reports
    return fit
