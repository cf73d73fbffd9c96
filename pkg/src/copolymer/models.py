"""Renewal laws, disorder laws, and the analytic quantities derived from them.

The discrete copolymer is built over a persistent renewal process whose
inter-arrival law has a regularly varying tail,

    K(n) = P(tau_1 = n) ~ L(n) / n^(1+alpha),   alpha in (0, 1),

supported on multiples of a period T, together with i.i.d. charges of zero
mean and unit variance.  This module constructs concrete laws of that form,
computes the renewal mass function U(n) = P(n in tau), and evaluates the
closed-form critical-curve bounds

    (1+alpha)/(2 lambda) * log M(-2 lambda/(1+alpha))
        <= h_c(lambda) <= 1/(2 lambda) * log M(-2 lambda),

where M is the charge moment generating function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.signal import fftconvolve


class BoundUndefinedError(ValueError):
    """MGF argument falls outside the declared finiteness window."""


class HorizonError(ValueError):
    """Requested length exceeds the tabulated horizon."""


U_TABLE_CAP = 20_000  # direct O(N^2) renewal convolution is kept below this

_EM_MIN_TERMS = 1 << 17  # partial-sum length before the Euler-Maclaurin tail


# ---------------------------------------------------------------------------
# slowly varying menu
# ---------------------------------------------------------------------------

def _sv_shape(sv_kind: str, sv_param: float, n):
    """Raw slowly varying factor, before normalization is folded in."""
    if sv_kind == "constant":
        return sv_param * np.ones_like(np.asarray(n, dtype=float))
    if sv_kind == "log-power":
        return np.power(np.log1p(np.asarray(n, dtype=float)), sv_param)
    raise ValueError(f"unknown slowly varying kind {sv_kind!r}")


def _parse_sv_spec(sv_spec) -> tuple[str, float]:
    """Accepts ('constant', c) / ('log-power', a), a bare positive number,
    or the strings 'constant' / 'log-power' with default parameter 1."""
    if isinstance(sv_spec, (int, float)):
        if sv_spec <= 0:
            raise ValueError("constant slowly varying factor must be > 0")
        return "constant", float(sv_spec)
    if isinstance(sv_spec, str):
        if sv_spec in ("constant", "log-power"):
            return sv_spec, 1.0
        raise ValueError(f"unknown slowly varying spec {sv_spec!r}")
    kind, param = sv_spec
    if kind not in ("constant", "log-power"):
        raise ValueError(f"unknown slowly varying kind {kind!r}")
    if kind == "constant" and param <= 0:
        raise ValueError("constant slowly varying factor must be > 0")
    return kind, float(param)


def _series_tail(alpha: float, sv_kind: str, sv_param: float, period: int,
                 m_last: int) -> float:
    """sum_{m > m_last} L(mT) / (mT)^(1+alpha) by Euler-Maclaurin.

    Plain truncation would bias the normalization by O(m_last^-alpha); the
    integral remainder plus the f/2, f'/12, f'''/720 corrections brings the
    error below 1e-12 relative for every alpha in (0, 1).
    """
    T = float(period)

    def f(x):
        return float(_sv_shape(sv_kind, sv_param, T * x)) / (T * x) ** (1.0 + alpha)

    a = float(m_last + 1)
    if sv_kind == "constant":
        p = 1.0 + alpha
        c = sv_param * T ** (-p)
        integral = c * a ** (-alpha) / alpha
        f_a = c * a ** (-p)
        fp_a = -p * c * a ** (-p - 1.0)
        fppp_a = -p * (p + 1.0) * (p + 2.0) * c * a ** (-p - 3.0)
    else:
        # substitute x = a/s to put the integral on (0, 1]; the s^(alpha-1)
        # endpoint is handled by the algebraic-weight rule
        pref = a ** (-alpha) * T ** (-1.0 - alpha)

        def g(s):
            return pref * math.log1p(T * a / max(s, 1e-300)) ** sv_param

        integral, _ = quad(g, 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0),
                           epsabs=0.0, epsrel=1e-12, limit=400)
        # the slowly varying factor changes on scale a, so unit-step central
        # differences are accurate enough for the small corrections
        f_a = f(a)
        fp_a = (f(a + 1.0) - f(a - 1.0)) / 2.0
        fppp_a = (f(a + 2.0) - 2.0 * f(a + 1.0) + 2.0 * f(a - 1.0)
                  - f(a - 2.0)) / 2.0
    return integral + f_a / 2.0 - fp_a / 12.0 + fppp_a / 720.0


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailedRenewalLaw:
    """Persistent inter-arrival law K(n) ~ L(n)/n^(1+alpha) on T*N.

    ``k_table[m]`` holds K((m+1)T) for m = 0..n_max-1; ``tail_table[m]``
    holds the survival K_bar(mT) = P(tau_1 > mT) for m = 0..n_max.  Mass
    beyond the horizon is kept as the explicit atom ``tail_table[n_max]``
    ("one excursion longer than the horizon"), so the law is exactly
    normalized at finite storage and no computation ever needs K beyond
    the table.
    """

    alpha: float
    period: int
    sv_kind: str
    sv_param: float
    norm_const: float          # multiplies the raw shape; 1.0 for pinned laws
    k_table: np.ndarray = field(repr=False)
    tail_table: np.ndarray = field(repr=False)
    n_max: int
    first_atom_pinned: bool = False
    name: str = ""

    @property
    def support_max(self) -> int:
        return self.n_max * self.period

    def k(self, n) -> np.ndarray:
        """K(n) for integer n (vectorized); zero off the support."""
        n = np.asarray(n)
        on_lattice = (n > 0) & (n % self.period == 0) & (n <= self.support_max)
        m = np.where(on_lattice, n // self.period - 1, 0)
        return np.where(on_lattice, self.k_table[m], 0.0)

    def tail(self, n) -> np.ndarray:
        """K_bar(n) = P(tau_1 > n); constant between lattice points."""
        n = np.asarray(n)
        m = np.clip(n // self.period, 0, self.n_max)
        return self.tail_table[m]

    def sv_effective(self, n) -> np.ndarray:
        """Effective slowly varying factor: K(n) * n^(1+alpha) -> L_eff(n)."""
        return self.norm_const * _sv_shape(self.sv_kind, self.sv_param, n)

    def support_threshold(self) -> int:
        """Smallest n with K(m) > 0 for every lattice point m >= n."""
        positive = self.k_table > 0.0
        if positive.all():
            return self.period
        last_zero = int(np.nonzero(~positive)[0][-1])
        return (last_zero + 2) * self.period


@dataclass(frozen=True)
class DisorderLaw:
    """Charge distribution: zero mean, unit variance, locally finite MGF.

    ``t0`` is the declared finiteness window of M(t) = E[exp(t omega)] and
    ``c0`` a constant with M(t) <= exp(c0 t^2) on [-t0, t0].  All built-in
    kinds have entire MGFs, so t0 defaults to the +inf sentinel; c0 is 1/2
    for the Gaussian and binary kinds and range^2/8 (Hoeffding) otherwise.
    """

    kind: str                       # 'gaussian' | 'binary' | 'finite'
    values: tuple = ()
    probs: tuple = ()
    t0: float = math.inf
    c0: float = 0.5

    def mgf(self, t: float) -> float:
        return mgf(self, t)

    def mean(self) -> float:
        if self.kind == "finite":
            return float(np.dot(self.values, self.probs))
        return 0.0

    def variance(self) -> float:
        if self.kind == "finite":
            v = np.asarray(self.values)
            return float(np.dot(v * v, self.probs))
        return 1.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "binary":
            return rng.integers(0, 2, size=size) * 2.0 - 1.0
        return rng.choice(np.asarray(self.values, dtype=float), size=size,
                          p=self.probs)


def gaussian_disorder() -> DisorderLaw:
    return DisorderLaw(kind="gaussian")


def binary_disorder() -> DisorderLaw:
    # cosh t <= exp(t^2 / 2) for all t
    return DisorderLaw(kind="binary")


def finite_disorder(values, probs) -> DisorderLaw:
    values = tuple(float(v) for v in values)
    probs = tuple(float(p) for p in probs)
    if len(values) != len(probs) or len(values) < 2:
        raise ValueError("need matching values/probs with >= 2 atoms")
    if abs(sum(probs) - 1.0) > 1e-12 or min(probs) <= 0:
        raise ValueError("probs must be positive and sum to 1")
    mean = sum(v * p for v, p in zip(values, probs))
    var = sum(v * v * p for v, p in zip(values, probs)) - mean * mean
    if abs(mean) > 1e-12 or abs(var - 1.0) > 1e-12:
        raise ValueError("finite-support charges must have mean 0, variance 1")
    spread = max(values) - min(values)
    return DisorderLaw(kind="finite", values=values, probs=probs,
                       c0=max(0.5, spread * spread / 8.0))


@dataclass(frozen=True)
class CouplingParams:
    """Coupling strength lambda >= 0 and charge bias h >= 0."""

    lam: float
    h: float

    def __post_init__(self):
        if self.lam < 0 or self.h < 0:
            raise ValueError("coupling parameters must be nonnegative")


@dataclass(frozen=True)
class RenewalMassFunction:
    """u_table[n] = U(n) = P(n in tau) for n = 0..N (zero off the lattice)."""

    u_table: np.ndarray = field(repr=False)
    period: int

    @property
    def horizon(self) -> int:
        return len(self.u_table) - 1

    def u(self, n) -> np.ndarray:
        return self.u_table[np.asarray(n)]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def build_renewal_law(alpha: float, sv_spec, n_max: int, period: int = 1,
                      pin_constant: bool = False, name: str = "") -> TailedRenewalLaw:
    """Construct K(n) = C * L(n) / n^(1+alpha) on {T, 2T, ...}.

    By default C is fixed by normalization over the full (infinite) lattice,
    with the mass beyond n_max*T kept analytically in the tail table.  With
    ``pin_constant=True`` the constant of the sv spec is used verbatim for
    n >= 2T and the first atom K(T) absorbs the normalization remainder;
    this is how a law with a prescribed tail constant (e.g. the simple
    random walk's 1/(2 sqrt(pi) n^{3/2}) return asymptotics) is realized.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if n_max < 100:
        raise ValueError("n_max must be >= 100")
    if period < 1:
        raise ValueError("period must be a positive integer")
    sv_kind, sv_param = _parse_sv_spec(sv_spec)

    m_terms = max(int(n_max), _EM_MIN_TERMS // period)
    m = np.arange(1, m_terms + 1, dtype=float)
    sites = m * period
    raw = _sv_shape(sv_kind, sv_param, sites) / sites ** (1.0 + alpha)
    em_tail = _series_tail(alpha, sv_kind, sv_param, period, m_terms)

    # remainders computed backwards so the tail table is exactly monotone
    # and partial sum + tail atom reproduces the total to one ulp
    rem = np.empty(m_terms + 1)
    rem[m_terms] = em_tail
    rem[:m_terms] = raw[::-1].cumsum()[::-1] + em_tail
    total = rem[0]

    if pin_constant:
        if sv_kind != "constant":
            raise ValueError("pin_constant requires a constant sv spec")
        first_atom = 1.0 - (total - raw[0])
        if not 0.0 < first_atom < 1.0:
            raise ValueError("pinned constant leaves no valid mass for K(T)")
        k_table = raw.copy()
        k_table[0] = first_atom
        tail = np.empty(n_max + 1)
        tail[0] = 1.0
        tail[1:] = rem[1:n_max + 1]
        norm_const = 1.0
    else:
        norm_const = 1.0 / total
        if not math.isfinite(norm_const) or norm_const <= 0:
            raise ValueError("normalization failed: nonfinite constant")
        k_table = norm_const * raw
        tail = np.empty(n_max + 1)
        tail[0] = 1.0
        tail[1:] = norm_const * rem[1:n_max + 1]

    law = TailedRenewalLaw(
        alpha=alpha, period=period, sv_kind=sv_kind, sv_param=sv_param,
        norm_const=norm_const,
        k_table=np.ascontiguousarray(k_table[:n_max]),
        tail_table=np.ascontiguousarray(tail),
        n_max=int(n_max), first_atom_pinned=pin_constant,
        name=name or f"alpha{alpha:g}-{sv_kind}{sv_param:g}-T{period}",
    )
    law.k_table.setflags(write=False)
    law.tail_table.setflags(write=False)
    return law


def srw_like_law(n_max: int) -> TailedRenewalLaw:
    """alpha = 1/2, period 2 law with K(2n) * 2 sqrt(pi) * n^{3/2} -> 1.

    As a function of the epoch m = 2n this means K(m) ~ sqrt(2/pi) / m^{3/2}.
    """
    return build_renewal_law(0.5, ("constant", math.sqrt(2.0 / math.pi)),
                             n_max=n_max, period=2, pin_constant=True,
                             name="srw-like")


def law_from_tables(alpha: float, period: int, k_table, name: str = "custom"
                    ) -> TailedRenewalLaw:
    """Law with an explicitly given (finite, sub-probability) k_table.

    The deficit 1 - sum(k_table) becomes the beyond-horizon tail atom.  Meant
    for degenerate test laws (point masses etc.); the power-law asymptotics
    invariant is not enforced here.
    """
    k_table = np.asarray(k_table, dtype=float)
    if k_table.min() < 0 or k_table.sum() > 1.0 + 1e-12:
        raise ValueError("k_table must be a sub-probability vector")
    n_max = len(k_table)
    tail = np.empty(n_max + 1)
    tail[0] = 1.0
    tail[1:] = 1.0 - k_table.cumsum()
    np.clip(tail, 0.0, None, out=tail)
    return TailedRenewalLaw(alpha=alpha, period=period, sv_kind="constant",
                            sv_param=1.0, norm_const=1.0,
                            k_table=k_table, tail_table=tail, n_max=n_max,
                            name=name)


def mgf(d: DisorderLaw, t: float) -> float:
    """Moment generating function M(t) = E[exp(t omega_1)], closed form."""
    if abs(t) > d.t0:
        raise BoundUndefinedError(
            f"MGF argument {t} outside declared finiteness window "
            f"[-{d.t0}, {d.t0}]")
    if d.kind == "gaussian":
        return math.exp(0.5 * t * t)
    if d.kind == "binary":
        return math.cosh(t)
    if d.kind == "finite":
        return float(np.dot(np.exp(t * np.asarray(d.values)), d.probs))
    raise ValueError(f"unknown disorder kind {d.kind!r}")


def renewal_mass_function(k: TailedRenewalLaw, n: int) -> RenewalMassFunction:
    """U(n) = P(n in tau) for n <= N via the renewal recursion.

    U(0) = 1 and U(n) = sum_{j} K(j) U(n-j); computed on the compressed
    lattice (period folded out) with one inner dot product per step.
    """
    n = int(n)
    if n > k.support_max:
        raise HorizonError(f"n={n} exceeds table horizon {k.support_max}")
    if n > U_TABLE_CAP:
        raise HorizonError(
            f"n={n} exceeds the O(N^2) renewal-convolution cap {U_TABLE_CAP}")
    T = k.period
    m_top = n // T
    kc = np.zeros(m_top + 1)
    upto = min(m_top, k.n_max)
    kc[1:upto + 1] = k.k_table[:upto]
    kc_rev = kc[::-1].copy()
    uc = np.zeros(m_top + 1)
    uc[0] = 1.0
    for j in range(1, m_top + 1):
        uc[j] = np.dot(uc[:j], kc_rev[m_top - j:m_top])
    u_full = np.zeros(n + 1)
    u_full[::T] = uc[:n // T + 1]
    u_full.setflags(write=False)
    return RenewalMassFunction(u_table=u_full, period=T)


def renewal_identity_residuals(k: TailedRenewalLaw,
                               u: RenewalMassFunction) -> np.ndarray:
    """|sum_{n<=N} U(n) K_bar(N-n) - 1| for every N up to the U horizon.

    The last-renewal decomposition makes this exactly 1 for a correctly
    built pair of tables.
    """
    horizon = u.horizon
    tail_site = k.tail(np.arange(horizon + 1)).astype(float)
    conv = fftconvolve(u.u_table, tail_site)[:horizon + 1]
    return np.abs(conv - 1.0)


def doney_ratio(k: TailedRenewalLaw, u: RenewalMassFunction, ell: int) -> float:
    """U(ell) normalized by its heavy-tail renewal asymptotics.

    Returns U(ell) * L_eff(ell) * ell^(1-alpha) * pi / (alpha sin(pi alpha)),
    which tends to 1 as ell grows.
    """
    c_alpha = k.alpha * math.sin(math.pi * k.alpha) / math.pi
    ell = int(ell)
    return float(u.u(ell) * k.sv_effective(ell) * ell ** (1.0 - k.alpha)
                 / c_alpha)


def hc_bounds(lam: float, alpha: float, d: DisorderLaw) -> tuple[float, float]:
    """Closed-form critical-curve bounds at coupling strength lambda.

    lower = (1+alpha)/(2 lambda) log M(-2 lambda/(1+alpha)),
    upper = 1/(2 lambda) log M(-2 lambda).
    Convexity of log M with log M(0) = 0 gives lower <= upper.
    """
    if lam <= 0:
        raise ValueError("hc_bounds requires lambda > 0")
    if 2.0 * lam > d.t0 or 2.0 * lam / (1.0 + alpha) > d.t0:
        raise BoundUndefinedError(
            f"bound undefined: 2*lambda={2 * lam:g} outside the MGF "
            f"finiteness window t0={d.t0:g}")
    lower = (1.0 + alpha) / (2.0 * lam) * math.log(mgf(d, -2.0 * lam / (1.0 + alpha)))
    upper = 1.0 / (2.0 * lam) * math.log(mgf(d, -2.0 * lam))
    return lower, upper
