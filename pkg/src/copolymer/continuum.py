"""Stable regenerative sets and continuum partition-function estimation.

The zero set of the continuum copolymer is the alpha-stable regenerative
set: the closed image of the stable subordinator with Levy measure

    Pi(dx) = C x^(-1-alpha) dx on (0, infinity),  C = alpha / Gamma(1-alpha),

normalized so the Levy exponent is exactly Phi(u) = u^alpha.  Simulation
keeps every jump above a cutoff eta as an explicit excursion gap (a Poisson
point process in local time with Pareto sizes) and replaces the sub-cutoff
jump mass by its deterministic compensator drift.

Exact laws used as oracles: the last point before t satisfies
(g_t - x)/(t - x) ~ Beta(alpha, 1-alpha) under P_x, and conditionally on
g_t = a the first point after t has the Pareto tail
P(d_t > b | g_t = a) = ((t-a)/(b-a))^alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.stats import beta as beta_dist

from .models import CouplingParams

__all__ = [
    "GtDtLaw", "ExcursionDecomposition", "ContinuumQuenched",
    "levy_constant", "sample_g", "sample_d_given_g",
    "sample_regenerative_excursions", "coarsen_excursions",
    "continuum_log_partition", "modified_log_partition",
    "modified_partition_detail", "campbell_check", "excursion_scaling_check",
    "gap_log_weights",
]

LOG_HALF = math.log(0.5)


def levy_constant(alpha: float) -> float:
    """C with Pi(dx) = C x^(-1-alpha) dx and Levy exponent u^alpha."""
    return alpha / math.gamma(1.0 - alpha)


def _log_phi(x):
    """log[(1 + e^x)/2] elementwise, overflow safe."""
    x = np.asarray(x, dtype=float)
    return LOG_HALF + np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


# ---------------------------------------------------------------------------
# exact g/d laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GtDtLaw:
    """Laws of the last point before t (g_t) and first point after (d_t),
    for the regenerative set started at x <= t."""

    x: float
    t: float
    alpha: float

    def __post_init__(self):
        if self.x > self.t:
            raise ValueError("need start point x <= t")

    def g_cdf(self, y: float) -> float:
        """P_x(g_t <= y): a Beta(alpha, 1-alpha) law for (g_t-x)/(t-x)."""
        return float(beta_dist.cdf((y - self.x) / (self.t - self.x),
                                   self.alpha, 1.0 - self.alpha))

    def d_cdf(self, y: float) -> float:
        """P_x(d_t <= y) by quadrature of the explicit density."""
        if y <= self.t:
            return 0.0
        al, x, t = self.alpha, self.x, self.t
        pref = math.sin(math.pi * al) / math.pi * (t - x) ** al
        val, _ = quad(lambda b: (b - t) ** (-al) / (b - x), t, y,
                      epsabs=0.0, epsrel=1e-11, limit=200)
        return pref * val


def sample_g(x: float, t: float, alpha: float,
             rng: np.random.Generator, size=None):
    """Draw g_t under P_x: x + (t - x) * Beta(alpha, 1-alpha)."""
    if x >= t:
        raise ValueError("need x < t")
    return x + (t - x) * rng.beta(alpha, 1.0 - alpha, size=size)


def sample_d_given_g(a, t: float, alpha: float,
                     rng: np.random.Generator, size=None):
    """Draw d_t given g_t = a: d_t = a + (t - a) U^(-1/alpha), U uniform."""
    a = np.asarray(a, dtype=float)
    if np.any(a >= t):
        raise ValueError("need a < t")
    if size is None and a.shape:
        size = a.shape
    u = rng.random(size)
    return a + (t - a) * u ** (-1.0 / alpha)


# ---------------------------------------------------------------------------
# regenerative-set simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExcursionDecomposition:
    """Gaps of an alpha-stable regenerative set on [0, t] above cutoff eta.

    ``gaps`` is an (m, 2) array of open intervals sorted by left endpoint,
    each of width >= eta, the last possibly straddling t.  ``signs`` carries
    one fair coin per gap (the excursion side).  ``local_time`` is the
    subordinator time spent and ``drift_comp`` the total length contributed
    by the sub-cutoff compensator drift; the complement of the gaps inside
    [0, t] is exactly that drift mass.
    """

    t: float
    alpha: float
    eta: float
    gaps: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)
    local_time: float
    drift_comp: float

    @property
    def count(self) -> int:
        return len(self.gaps)

    def widths(self) -> np.ndarray:
        return self.gaps[:, 1] - self.gaps[:, 0]

    def clipped_widths(self) -> np.ndarray:
        """Gap lengths intersected with (0, t)."""
        return np.clip(self.gaps[:, 1], None, self.t) - self.gaps[:, 0]

    def delta_at(self, u: float) -> int:
        """Sign process at u: the covering gap's sign, 0 on the set."""
        idx = int(np.searchsorted(self.gaps[:, 0], u, side="right")) - 1
        if idx >= 0 and self.gaps[idx, 0] < u < self.gaps[idx, 1]:
            return int(self.signs[idx])
        return 0


def sample_regenerative_excursions(t: float, alpha: float, eta: float,
                                   rng: np.random.Generator,
                                   ) -> ExcursionDecomposition:
    """Simulate the set's gap decomposition on [0, t].

    Jumps above eta arrive at rate C eta^(-alpha)/alpha = eta^(-alpha)/
    Gamma(1-alpha) per unit local time with Pareto(alpha, eta) sizes; the
    sub-cutoff mass advances the position deterministically at drift rate
    C eta^(1-alpha)/(1-alpha).  The walk stops once it passes t, so the
    last gap may straddle t.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 < eta <= t / 10.0:
        raise ValueError("cutoff eta must lie in (0, t/10]: the decomposition "
                         "degenerates for coarser cutoffs")
    c = levy_constant(alpha)
    rate = c * eta ** (-alpha) / alpha
    drift = c * eta ** (1.0 - alpha) / (1.0 - alpha)

    lefts, rights = [], []
    pos = 0.0
    local_time = 0.0
    block = 128
    while True:
        waits = rng.exponential(1.0 / rate, size=block)
        sizes = eta * rng.random(size=block) ** (-1.0 / alpha)
        for w, s in zip(waits, sizes):
            advance = drift * w
            if pos + advance >= t:
                # drift alone crosses t: the set is solid there, no gap
                local_time += (t - pos) / drift
                pos = t
                break
            local_time += w
            pos += advance
            lefts.append(pos)
            pos += s
            rights.append(pos)
            if pos >= t:
                break
        if pos >= t:
            break
    gaps = np.column_stack([np.asarray(lefts), np.asarray(rights)]) \
        if lefts else np.empty((0, 2))
    signs = rng.integers(0, 2, size=len(gaps)).astype(np.int8)
    return ExcursionDecomposition(t=float(t), alpha=float(alpha),
                                  eta=float(eta), gaps=gaps, signs=signs,
                                  local_time=float(local_time),
                                  drift_comp=float(drift * local_time))


def coarsen_excursions(exc: ExcursionDecomposition, eta_new: float,
                       ) -> ExcursionDecomposition:
    """Coupled coarsening: drop gaps below a larger cutoff into the drift.

    Keeps wide gaps exactly in place, so the coarse decomposition is a
    subset of the fine one (the coupling used by the cutoff-doubling
    invariant checks).
    """
    if eta_new < exc.eta:
        raise ValueError("can only coarsen to a larger cutoff")
    keep = exc.widths() >= eta_new
    dropped = float(np.sum(np.clip(exc.gaps[~keep, 1], None, exc.t)
                           - np.clip(exc.gaps[~keep, 0], None, exc.t)))
    return replace(exc, eta=float(eta_new), gaps=exc.gaps[keep],
                   signs=exc.signs[keep],
                   drift_comp=exc.drift_comp + dropped)


# ---------------------------------------------------------------------------
# partition-function estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuumQuenched:
    """Sign-averaged log-weight of one (set, medium) realization."""

    log_z: float
    t: float
    params: CouplingParams
    sign_mode: str         # 'analytic-average' | 'sampled'
    eta: float
    seed: int = 0
    gap_count: int = 0


def gap_log_weights(lengths: np.ndarray, beta_incs: np.ndarray,
                    p: CouplingParams) -> np.ndarray:
    """Per-gap sign-averaged log factors log[(1+exp(-2 lam (b + h len)))/2]."""
    return _log_phi(-2.0 * p.lam * (beta_incs + p.h * lengths))


def continuum_log_partition(exc: ExcursionDecomposition, p: CouplingParams,
                            rng: np.random.Generator,
                            sign_mode: str = "analytic-average",
                            ) -> ContinuumQuenched:
    """log of the sign-averaged Boltzmann weight of one decomposition.

    Each gap receives an independent Gaussian medium increment with
    variance equal to its length inside (0, t) (gaps are disjoint, so the
    Brownian path never needs to be materialized).  In analytic-average
    mode the excursion signs are integrated out per gap; the sub-cutoff
    mass is ignored, with error controlled by ``drift_comp``.  Every
    per-gap factor lies in ((1+e^-x)/2 form) > 1/2 for adverse signs, so
    log_z >= -count * log 2 pathwise.
    """
    if p.lam == 0.0 and sign_mode == "analytic-average":
        return ContinuumQuenched(log_z=0.0, t=exc.t, params=p,
                                 sign_mode=sign_mode, eta=exc.eta,
                                 gap_count=exc.count)
    lengths = exc.clipped_widths()
    beta_incs = rng.standard_normal(len(lengths)) * np.sqrt(lengths)
    if sign_mode == "analytic-average":
        log_z = float(gap_log_weights(lengths, beta_incs, p).sum())
    elif sign_mode == "sampled":
        signs = exc.signs.astype(float)
        log_z = float(np.sum(-2.0 * p.lam * signs
                             * (beta_incs + p.h * lengths)))
    else:
        raise ValueError(f"unknown sign_mode {sign_mode!r}")
    return ContinuumQuenched(log_z=log_z, t=exc.t, params=p,
                             sign_mode=sign_mode, eta=exc.eta,
                             gap_count=exc.count)


def _walk_from(x: float, stop: float, alpha: float, eta: float,
               rng: np.random.Generator):
    """Jump-chain from x until the set passes ``stop``.

    Returns (gaps list, d) where d is the first set point after ``stop``:
    the right end of the straddling jump, or ``stop`` itself when the
    compensator drift carries the solid set across.
    """
    c = levy_constant(alpha)
    rate = c * eta ** (-alpha) / alpha
    drift = c * eta ** (1.0 - alpha) / (1.0 - alpha)
    gaps = []
    pos = x
    block = 128
    while True:
        waits = rng.exponential(1.0 / rate, size=block)
        sizes = eta * rng.random(size=block) ** (-1.0 / alpha)
        for w, size in zip(waits, sizes):
            advance = drift * w
            if pos + advance > stop:
                return gaps, stop
            pos += advance
            gaps.append((pos, pos + size))
            pos += size
            if pos > stop:
                return gaps, pos


def modified_log_partition(s: float, t: float, grid_m: int,
                           p: CouplingParams, alpha: float, eta: float,
                           rng: np.random.Generator, mc: int = 256) -> float:
    """log of the start-point-robust partition estimate on (s, t).

    Discretizes the infimum over start points x in [s-1, min(s, t-1)] on a
    uniform grid of ``grid_m`` points.  Per start point the Monte Carlo
    average of exp(H) over sets restricted to the return event
    {first set point after t-1 lies below t} is formed with common random
    numbers across grid points; the smallest grid estimate wins.  Start
    points above t-1 sit inside the return window already and contribute
    the empty Hamiltonian (weight 1).
    """
    value, _ = modified_partition_detail(s, t, grid_m, p, alpha, eta, rng,
                                         mc=mc)
    return value


def modified_partition_detail(s: float, t: float, grid_m: int,
                              p: CouplingParams, alpha: float, eta: float,
                              rng: np.random.Generator, mc: int = 256,
                              ) -> tuple[float, float]:
    """(log min-grid estimate, stderr of that log) for the modified weight."""
    if not t > s >= 0.0:
        raise ValueError("need t > s >= 0")
    if grid_m < 2:
        raise ValueError("grid_m must be >= 2")
    xs = np.linspace(s - 1.0, s, grid_m)
    seeds = rng.integers(0, 2 ** 63 - 1, size=mc)

    best_mean, best_err = np.inf, 0.0
    for x in xs:
        if x >= t - 1.0:
            # degenerate start (t < s+1): d_{t-1} = x < t, empty Hamiltonian
            if 1.0 < best_mean:
                best_mean, best_err = 1.0, 0.0
            continue
        weights = np.empty(mc)
        for r in range(mc):
            sub = np.random.Generator(np.random.PCG64(seeds[r]))
            gaps, d = _walk_from(x, t - 1.0, alpha, eta, sub)
            if d >= t:
                weights[r] = 0.0
                continue
            if p.lam == 0.0:
                weights[r] = 1.0
                continue
            g = np.asarray(gaps)
            lengths = g[:, 1] - g[:, 0] if len(g) else np.empty(0)
            incs = sub.standard_normal(len(lengths)) * np.sqrt(lengths)
            weights[r] = math.exp(gap_log_weights(lengths, incs, p).sum())
        mean = float(weights.mean())
        err = float(weights.std(ddof=1) / math.sqrt(mc))
        if mean < best_mean:
            best_mean, best_err = mean, err
    if best_mean <= 0.0:
        return -np.inf, np.inf
    return math.log(best_mean), best_err / best_mean


def campbell_check(lambda_c: float, eps: float, m: float, alpha: float,
                   mc: int, rng: np.random.Generator,
                   eta: float = 1e-6) -> tuple[float, float, float]:
    """Exponential functional of the jump process vs its closed form.

    For f(x) = x^(1-eps) on [0, 2], E[exp(2 lam sum f(jumps on (0, m)))]
    equals exp(m integral (e^{2 lam f} - 1) dPi); finite for eps < 1-alpha.
    The Monte Carlo side simulates the Poisson point process of jumps above
    ``eta`` and adds the deterministic compensator of the sub-cutoff mass.

    Returns (analytic, mc_mean, mc_stderr).
    """
    if not 0.0 < eps < 1.0 - alpha:
        raise ValueError("need 0 < eps < 1 - alpha for a finite integral")
    if lambda_c == 0.0:
        return 1.0, 1.0, 0.0
    c = levy_constant(alpha)

    def integrand(x):
        return math.expm1(2.0 * lambda_c * x ** (1.0 - eps)) * x ** (-1.0 - alpha)

    integral, _ = quad(integrand, 0.0, 2.0, epsabs=0.0, epsrel=1e-10,
                       limit=400, points=[0.0, 2.0])
    analytic = math.exp(m * c * integral)

    rate = m * c * eta ** (-alpha) / alpha
    counts = rng.poisson(rate, size=mc)
    total = int(counts.sum())
    sizes = eta * rng.random(total) ** (-1.0 / alpha)
    contrib = np.where(sizes <= 2.0, sizes ** (1.0 - eps), 0.0)
    bounds = np.concatenate(([0], np.cumsum(counts)))
    sums = np.add.reduceat(np.concatenate([contrib, [0.0]]), bounds[:-1])
    sums[counts == 0] = 0.0
    # compensator: mean of sum f(jumps <= eta) on local time m
    comp = m * c * eta ** (1.0 - eps - alpha) / (1.0 - eps - alpha)
    vals = np.exp(2.0 * lambda_c * (sums + comp))
    return (analytic, float(vals.mean()),
            float(vals.std(ddof=1) / math.sqrt(mc)))


def excursion_scaling_check(t: float, alpha: float, eta: float,
                            deltas, rng: np.random.Generator,
                            samples: int = 1000) -> dict:
    """Counts vs mass of small gaps across a grid of thresholds delta.

    For each sample, N_delta counts gaps wider than delta intersecting
    (0, t) and A_delta accumulates the length of gaps at most delta; the
    ratio R(delta) = delta N_delta / A_delta cancels the sample's local
    time.  Returns per-delta arrays of N, A and R over the samples.
    """
    deltas = np.asarray(sorted(deltas), dtype=float)
    if eta > deltas.min() / 10.0:
        raise ValueError("cutoff eta must be well below the probed deltas")
    n_tab = np.zeros((samples, len(deltas)))
    a_tab = np.zeros((samples, len(deltas)))
    for i in range(samples):
        exc = sample_regenerative_excursions(t, alpha, eta, rng)
        w = exc.clipped_widths()
        for j, d in enumerate(deltas):
            n_tab[i, j] = np.sum(w > d)
            # sub-cutoff gaps live in the compensator drift; all of them
            # are narrower than any probed delta, so their mass belongs
            # to A_delta
            a_tab[i, j] = np.sum(w[w <= d]) + exc.drift_comp
    with np.errstate(divide="ignore", invalid="ignore"):
        r = deltas * n_tab / a_tab
    return {"deltas": deltas, "n": n_tab, "a": a_tab, "ratio": r}
