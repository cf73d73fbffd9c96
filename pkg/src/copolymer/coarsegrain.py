"""Coarse-grained skeletons, the Gaussian block coupling, and the
discrete-vs-continuum return-increment ratio.

A renewal path (or regenerative set) is reduced to a skeleton
Sigma = (m; s_1..s_m; sigma_1..sigma_m): the indices of the visited
coarse blocks, thinned so consecutive visits are at least delta/eps blocks
apart, together with one excursion sign per coarse excursion.  The same
shape is produced from discrete paths (blocks of eps/a^2 sites) and from
regenerative sets (blocks of width eps), which is what makes the
discrete-to-continuum comparison executable.

The likelihood ratio between the two skeleton laws factorizes over return
increments; its per-increment version is the ratio J_n/I of a renewal
convolution against a two-variable density integral, computed here
deterministically from the tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtri
from scipy.stats import binom

from .continuum import ExcursionDecomposition, _log_phi
from .discrete import DisorderSample, PathSample, delta_at
from .models import CouplingParams, DisorderLaw, RenewalMassFunction, TailedRenewalLaw

__all__ = [
    "Skeleton", "CoupledBlockPair", "RnEntry", "RnReport",
    "coarse_grain_discrete", "coarse_grain_continuum", "skeleton_hamiltonian",
    "coarse_grained_hamiltonian_discrete", "skorohod_pair", "rn_ratio",
    "rn_report", "skeleton_log_rn_bound",
]


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Skeleton:
    """Coarse-grained return/sign vector.

    ``sigma`` holds block indices for the discrete side and real multiples
    of eps for the continuum side; ``sigma_times()`` converts both to the
    common macroscopic time scale.  The final entry is clipped to the
    horizon; ``truncated_last`` records whether the last coarse excursion
    ran past it.
    """

    m: int
    sigma: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)
    block_eps: float
    skip_delta: float
    horizon: float
    scale_a: float | None = None     # None for continuum skeletons
    truncated_last: bool = False

    def sigma_times(self) -> np.ndarray:
        """Visited-block positions in macroscopic time units."""
        if self.scale_a is None:
            return np.asarray(self.sigma, dtype=float)
        return self.block_eps * np.asarray(self.sigma, dtype=float)

    def increments(self) -> np.ndarray:
        """Coarse-excursion durations, last one clipped to the horizon."""
        times = np.minimum(self.sigma_times(), self.horizon)
        return np.diff(np.concatenate(([0.0], times)))

    def check_skip_rule(self) -> bool:
        blocks = np.asarray(self.sigma, dtype=float)
        if self.scale_a is None:
            blocks = blocks / self.block_eps
        if self.truncated_last:
            # the final entry is the horizon stand-in for a later visited
            # block whose true index satisfies the rule by construction
            blocks = blocks[:-1]
        steps = np.diff(np.concatenate(([0.0], blocks)))
        return bool(np.all(steps >= self.skip_delta / self.block_eps - 1e-9))


@dataclass(frozen=True)
class CoupledBlockPair:
    """Skorohod coupling of a normalized block sum with a standard Gaussian.

    Both coordinates are nondecreasing transforms of the same uniform u,
    so the pair is comonotone by construction.
    """

    u: float
    x: float
    y: float
    n: int


@dataclass(frozen=True)
class RnEntry:
    y: float
    z: float
    j_value: float
    i_value: float

    @property
    def ratio(self) -> float:
        return self.j_value / self.i_value


@dataclass(frozen=True)
class RnReport:
    entries: tuple
    n: int
    eps: float
    alpha: float


# ---------------------------------------------------------------------------
# coarse-graining
# ---------------------------------------------------------------------------

def _check_integer(value: float, what: str) -> int:
    if abs(value - round(value)) > 1e-9:
        raise ValueError(
            f"{what} = {value} must be an integer; adjust eps/delta/a/t so "
            "that eps/a^2, delta/eps and t/eps are whole numbers")
    return int(round(value))


def coarse_grain_discrete(path: PathSample, a: float, eps: float,
                          delta: float, t: float) -> Skeleton:
    """Coarse-grain a renewal path into its visited-block skeleton.

    Blocks are I_j = ((j-1) eps/a^2, j eps/a^2] sites; after a visited
    block the next delta/eps - 1 blocks are skipped.  The sign of coarse
    excursion k is the path sign at the first renewal inside the visited
    block; a truncated last excursion (no visited block up to t/eps)
    inherits the sign at the horizon instead.
    """
    block_sites = _check_integer(eps / (a * a), "eps/a^2")
    skip = _check_integer(delta / eps, "delta/eps")
    n_blocks = _check_integer(t / eps, "t/eps")
    horizon_sites = block_sites * n_blocks
    if path.n < horizon_sites:
        raise ValueError(f"path horizon {path.n} is shorter than "
                         f"t/a^2 = {horizon_sites}")

    tau = path.tau
    # visited block numbers in 1..n_blocks: any renewal in ((j-1)b, jb]
    counts = np.bincount((tau[tau > 0] - 1) // block_sites,
                         minlength=n_blocks)[:n_blocks]
    visited_blocks = np.nonzero(counts > 0)[0] + 1

    sigma = []
    signs = []
    j = skip                       # first eligible block index
    truncated = False
    while True:
        pos = int(np.searchsorted(visited_blocks, j, side="left"))
        if pos == len(visited_blocks):
            truncated = True
            sigma.append(n_blocks)
            signs.append(int(delta_at(path, horizon_sites)))
            break
        nxt = int(visited_blocks[pos])
        lo = (nxt - 1) * block_sites
        first = tau[np.searchsorted(tau, lo, side="right")]
        sigma.append(nxt)
        signs.append(int(delta_at(path, int(first))))
        if nxt >= n_blocks:
            break
        j = nxt + skip
    return Skeleton(m=len(sigma), sigma=np.asarray(sigma, dtype=np.int64),
                    signs=np.asarray(signs, dtype=np.int8),
                    block_eps=eps, skip_delta=delta, horizon=t, scale_a=a,
                    truncated_last=truncated)


def coarse_grain_continuum(exc: ExcursionDecomposition, eps: float,
                           delta: float, t: float) -> Skeleton:
    """Skeleton of a regenerative set on the eps-grid (same rules)."""
    skip = _check_integer(delta / eps, "delta/eps")
    n_blocks = _check_integer(t / eps, "t/eps")
    if exc.eta > eps / 10.0:
        raise ValueError("decomposition cutoff eta must be well below eps")

    # block j = ((j-1) eps, j eps] is visited unless one open gap covers it
    lefts = exc.gaps[:, 0]
    rights = exc.gaps[:, 1]
    los = np.arange(n_blocks) * eps
    idx = np.searchsorted(lefts, los, side="right") - 1
    covered = np.zeros(n_blocks, dtype=bool)
    ok = idx >= 0
    covered[ok] = (lefts[idx[ok]] <= los[ok]) & (rights[idx[ok]] > los[ok] + eps)
    visited_blocks = np.nonzero(~covered)[0] + 1

    sigma = []
    signs = []
    j = skip
    truncated = False
    while True:
        pos = int(np.searchsorted(visited_blocks, j, side="left"))
        if pos == len(visited_blocks):
            truncated = True
            sigma.append(n_blocks * eps)
            signs.append(exc.delta_at(t))
            break
        nxt = int(visited_blocks[pos])
        sigma.append(nxt * eps)
        signs.append(exc.delta_at((nxt - 1) * eps))
        if nxt >= n_blocks:
            break
        j = nxt + skip
    return Skeleton(m=len(sigma), sigma=np.asarray(sigma, dtype=float),
                    signs=np.asarray(signs, dtype=np.int8),
                    block_eps=eps, skip_delta=delta, horizon=t, scale_a=None,
                    truncated_last=truncated)


# ---------------------------------------------------------------------------
# skeleton Hamiltonians
# ---------------------------------------------------------------------------

def skeleton_hamiltonian(sk: Skeleton, a: float, p: CouplingParams,
                         rng: np.random.Generator,
                         mode: str = "exponent") -> float:
    """Skeleton Hamiltonian with Gaussian medium increments.

    Each coarse excursion k receives an independent increment of variance
    sigma_k - sigma_{k-1} (macroscopic time).  ``exponent`` mode returns
    the full Boltzmann exponent -(2 lam / a) sum s_k (b_k + h dt_k); its
    variance over the medium is (4 lam^2 / a^2) sum s_k dt_k.  ``weight``
    mode integrates the signs out instead and returns the sign-averaged
    log-weight sum_k log[(1 + exp(-2 lam (b_k + h dt_k)))/2] used in the
    pipeline comparisons.
    """
    dts = sk.increments()
    incs = rng.standard_normal(len(dts)) * np.sqrt(np.maximum(dts, 0.0))
    if mode == "weight":
        if p.lam == 0.0:
            return 0.0
        return float(_log_phi(-2.0 * p.lam * (incs + p.h * dts)).sum())
    if mode == "exponent":
        s = sk.signs.astype(float)
        return float(-(2.0 * p.lam / a) * np.sum(s * (incs + p.h * dts)))
    raise ValueError(f"unknown mode {mode!r}")


def coarse_grained_hamiltonian_discrete(path: PathSample, w: DisorderSample,
                                        sk: Skeleton, a: float,
                                        p: CouplingParams,
                                        ) -> tuple[float, float]:
    """Boltzmann exponents (H0, H1) of the rescaled model, for diagnostics.

    H0 = -2 a lam sum_i (w_i + a h) Delta_i uses the fine path; H1 replaces
    the fine signs by the skeleton signs on whole coarse excursions,
    H1 = -2 a lam sum_k s_k (Z_k + a h |bar I_k|) with Z_k the charge sum of
    the excursion's blocks.  Their gap is controlled by the short-excursion
    mass plus one block width per coarse excursion.
    """
    if sk.scale_a is None or abs(sk.scale_a - a) > 1e-12:
        raise ValueError("skeleton was built at a different scale a")
    block_sites = _check_integer(sk.block_eps / (a * a), "eps/a^2")
    n_blocks = _check_integer(sk.horizon / sk.block_eps, "t/eps")
    n_sites = block_sites * n_blocks
    if path.n < n_sites or w.n < n_sites:
        raise ValueError("path/disorder shorter than the skeleton horizon")

    sites = np.arange(1, n_sites + 1)
    delta_sites = delta_at(path, sites).astype(float)
    h0 = -2.0 * a * p.lam * float(
        np.sum((w.omega[:n_sites] + a * p.h) * delta_sites))

    ends = np.minimum(np.asarray(sk.sigma, dtype=np.int64), n_blocks) \
        * block_sites
    starts = np.concatenate(([0], ends[:-1]))
    z = w.prefix[ends] - w.prefix[starts]
    lengths = (ends - starts).astype(float)
    h1 = -2.0 * a * p.lam * float(
        np.sum(sk.signs * (z + a * p.h * lengths)))
    return h0, h1


# ---------------------------------------------------------------------------
# Gaussian block coupling
# ---------------------------------------------------------------------------

_EMPIRICAL_CDF_SAMPLES = 1_000_000
_EMPIRICAL_CDF_SEED = 0x5b10c5


def _block_sum_inverse_cdf(d: DisorderLaw, n: int, u: float,
                           mc_cdf_samples: int) -> float:
    """F_n^{-1}(u) = inf{t : F_n(t) > u} for the law of sum(omega_i)/sqrt(n)."""
    if d.kind == "gaussian":
        return float(ndtri(u))
    if d.kind == "binary":
        # sum = 2 B - n with B ~ Binomial(n, 1/2)
        ks = np.arange(n + 1)
        cdf = binom.cdf(ks, n, 0.5)
        k_star = int(np.searchsorted(cdf, u, side="right"))
        k_star = min(k_star, n)
        return (2.0 * k_star - n) / math.sqrt(n)
    rng = np.random.Generator(np.random.PCG64(_EMPIRICAL_CDF_SEED))
    draws = np.sort(d.sample(rng, mc_cdf_samples * n).reshape(
        mc_cdf_samples, n).sum(axis=1) / math.sqrt(n))
    idx = min(int(math.floor(u * mc_cdf_samples)), mc_cdf_samples - 1)
    return float(draws[idx])


def skorohod_pair(d: DisorderLaw, n: int, u: float,
                  mc_cdf_samples: int = _EMPIRICAL_CDF_SAMPLES,
                  ) -> CoupledBlockPair:
    """Couple a normalized n-block charge sum with a standard Gaussian.

    y is the Gaussian quantile of u and x the generalized-inverse quantile
    of the block-sum law: exact for Gaussian charges (x == y) and binary
    charges (binomial), empirical from a fixed seeded sample otherwise.
    """
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1)")
    y = float(ndtri(u))
    x = _block_sum_inverse_cdf(d, n, u, mc_cdf_samples)
    return CoupledBlockPair(u=u, x=x, y=y, n=n)


# ---------------------------------------------------------------------------
# return-increment ratio J/I
# ---------------------------------------------------------------------------

def _i_integral(alpha: float, y: float, z: float, eps: float) -> float:
    """I(y,z): the continuum return-increment mass on (z, z+eps].

    The inner variable integrates in closed form, leaving
    C_a/alpha * int_y^1 (s-y)^(alpha-1) [(z-s)^-alpha - (z+eps-s)^-alpha] ds
    with integrable endpoint singularities at s = y and, when z = 1, at
    s = 1; both are folded into algebraic quadrature weights.
    """
    c_a = alpha * math.sin(math.pi * alpha) / math.pi
    if z == 1.0:
        first, _ = quad(lambda s: 1.0, y, 1.0, weight="alg",
                        wvar=(alpha - 1.0, -alpha), epsabs=0.0,
                        epsrel=1e-10, limit=400)
    else:
        first, _ = quad(lambda s: (z - s) ** (-alpha), y, 1.0, weight="alg",
                        wvar=(alpha - 1.0, 0.0), epsabs=0.0, epsrel=1e-10,
                        limit=400)
    second, _ = quad(lambda s: (z + eps - s) ** (-alpha), y, 1.0,
                     weight="alg", wvar=(alpha - 1.0, 0.0), epsabs=0.0,
                     epsrel=1e-10, limit=400)
    return c_a / alpha * (first - second)


def rn_ratio(k: TailedRenewalLaw, u: RenewalMassFunction, y: float, z: float,
             eps: float, n: int) -> RnEntry:
    """One deterministic point of the discrete/continuum increment ratio.

    J_n(y,z) = sum_{ny <= k' <= n} sum_{nz < l <= n(z+eps)}
               U(k' - ny) K(l - k'),
    the probability that the rescaled renewal, started at y, first returns
    after time 1 inside (z, z+eps]; I(y,z) is its continuum analogue.
    """
    for name, v in (("n*y", n * y), ("n*z", n * z), ("n*eps", n * eps)):
        _check_integer(v, name)
    ny, nz, neps = round(n * y), round(n * z), round(n * eps)
    if u.horizon < n - ny:
        raise ValueError(f"renewal mass table covers {u.horizon} < {n - ny}")
    if k.support_max < nz + neps - ny:
        raise ValueError(f"k table covers {k.support_max} < {nz + neps - ny}")

    u_slice = u.u_table[0:n - ny + 1]             # U(k' - ny), k' = ny..n
    j_val = 0.0
    ks = np.arange(ny, n + 1)
    for l in range(nz + 1, nz + neps + 1):
        j_val += float(np.dot(u_slice, k.k(l - ks)))
    return RnEntry(y=y, z=z, j_value=j_val,
                   i_value=_i_integral(k.alpha, y, z, eps))


def rn_report(k: TailedRenewalLaw, u: RenewalMassFunction, ys, zs,
              eps: float, n: int) -> RnReport:
    entries = tuple(rn_ratio(k, u, y, z, eps, n) for y in ys for z in zs)
    return RnReport(entries=entries, n=n, eps=eps, alpha=k.alpha)


def skeleton_log_rn_bound(k: TailedRenewalLaw, u: RenewalMassFunction,
                          grid: tuple, eps: float, n: int) -> float:
    """Measured per-increment log-ratio constant kappa-hat.

    kappa-hat = max over start offsets y, y' and increments z of
    |log( J_n(y, z) / I(y', z) )| / (log z + 1); a diagnostic that shrinks
    as eps decreases and n grows.
    """
    ys, zs = grid
    kappa = 0.0
    for z in zs:
        js = [rn_ratio(k, u, y, z, eps, n).j_value for y in ys]
        i_vals = [_i_integral(k.alpha, y, z, eps) for y in ys]
        for j_val in js:
            for i_val in i_vals:
                kappa = max(kappa,
                            abs(math.log(j_val / i_val)) / (math.log(z) + 1.0))
    return kappa
