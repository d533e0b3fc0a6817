"""The scalar 'real' heat flow: great-circle reduction of the dissipative
flow, its uniqueness classifier, stationary and self-similar profiles, and
the energy-comparison (non-uniqueness witness) machinery for n = 2.

Great-circle data u = cos(g) e3 + sin(g) v0 reduces the heat flow to

    g_t = g_rr + ((2n-1)/r) g_r - eta(g)/r^2,
    eta(x) = (2n-2) sin(x) + sin(2x)/2,

with stationary solutions 2 arctan(alpha r) for every n.  Throughout, a
profile "labeled" alpha/beta has origin slope 2*alpha (the label is the
arctan coefficient); this convention is fitted, not assumed, from the
reference curves in `figure_reference`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import hermite_eval, trapezoid
from .errors import DomainError
from .singular_ode import DEFAULT_R0, SingularIVP, integrate_rk, series_start

# ---------------------------------------------------------------------------
# eta and its derivatives (closed forms)
# ---------------------------------------------------------------------------

def eta(x, n):
    """(2n-2) sin(x) + sin(2x)/2; n >= 2 for the flows considered here."""
    return (2 * n - 2) * np.sin(x) + 0.5 * np.sin(2 * x)


def eta_prime(x, n):
    return (2 * n - 2) * np.cos(x) + np.cos(2 * x)


def eta_double_prime(x, n):
    return -(2 * n - 2) * np.sin(x) - 2.0 * np.sin(2 * x)


def eta_triple_prime(x, n):
    return -(2 * n - 2) * np.cos(x) - 4.0 * np.cos(2 * x)


def eta_prime_at_pi(n) -> int:
    """Exact integer value (2n-2)(-1) + 1 = 3 - 2n."""
    return 3 - 2 * n


def eta_triple_prime_at_pi(n) -> int:
    """Exact integer value (2n-2) - 4 = 2n - 6 (negative only for n = 2)."""
    return 2 * n - 6


def gamma(x, n):
    """Antiderivative of eta normalized so that gamma(pi) = 0.

    gamma(x) = -(2n-2) cos(x) - cos(2x)/4 - [(2n-2) - 1/4].
    """
    return -(2 * n - 2) * np.cos(x) - 0.25 * np.cos(2 * x) - ((2 * n - 2) - 0.25)


# ---------------------------------------------------------------------------
# uniqueness classifier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassifierReport:
    n: int
    d: int
    eta_prime_at_pi: float
    min_eta_prime: float
    threshold: float
    verdict: str            # "nonunique" | "unique" | "borderline"

    def to_json(self):
        return json.dumps({
            "schema": "gllflow.classifier_report/1",
            "n": self.n, "d": self.d,
            "eta_prime_at_pi": self.eta_prime_at_pi,
            "min_eta_prime": self.min_eta_prime,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }, indent=2, sort_keys=True)


def min_eta_prime(n) -> float:
    """Exact minimum of eta' over [0, 2pi].

    Critical points: sin x = 0 (value 3-2n at pi) and cos x = -(n-1)/2,
    which exists only for n <= 3 and gives -(n-1)^2/2 - 1.
    """
    vals = [float(eta_prime_at_pi(n))]
    if (n - 1) / 2.0 <= 1.0:
        vals.append(-((n - 1) ** 2) / 2.0 - 1.0)
    return min(vals)


def classify_uniqueness(n: int) -> ClassifierReport:
    """Threshold test of eta' against -(d-2)^2/4 with d = 2n.

    nonunique  if eta'(pi)  < threshold,
    unique     if min eta' >= threshold,
    borderline otherwise (the n = 2 case: equality at pi but the global
    minimum dips below; pi is a local maximum of eta').
    """
    if n < 2:
        raise DomainError("classifier defined for n >= 2")
    d = 2 * n
    thr = -((d - 2) ** 2) / 4.0
    at_pi = float(eta_prime_at_pi(n))
    mn = min_eta_prime(n)
    if at_pi < thr:
        verdict = "nonunique"
    elif mn >= thr:
        verdict = "unique"
    else:
        verdict = "borderline"
    return ClassifierReport(n=n, d=d, eta_prime_at_pi=at_pi, min_eta_prime=mn,
                            threshold=thr, verdict=verdict)


# ---------------------------------------------------------------------------
# stationary and self-similar scalar profiles
# ---------------------------------------------------------------------------

def stationary_profile(alpha, r):
    """2 arctan(alpha r): the stationary profile labeled alpha (slope 2 alpha)."""
    return 2.0 * np.arctan(alpha * np.asarray(r, float))


def stationary_profile_derivative(alpha, r):
    return 2.0 * alpha / (1.0 + (alpha * np.asarray(r, float)) ** 2)


def stationary_residual(alpha, r_samples, n) -> float:
    """Max |psi'' + ((2n-1)/r) psi' - eta(psi)/r^2| with analytic derivatives.

    Independent of n up to rounding: the stationary family solves the ODE
    for every n.
    """
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    r = np.asarray(r_samples, float)
    if np.any(r <= 0):
        raise DomainError("samples must have r > 0")
    if alpha == 0.0:
        return 0.0
    g = stationary_profile(alpha, r)
    gp = stationary_profile_derivative(alpha, r)
    gpp = -4.0 * alpha**3 * r / (1.0 + (alpha * r) ** 2) ** 2
    res = gpp + (2 * n - 1) / r * gp - eta(g, n) / r**2
    return float(np.max(np.abs(res)))


def real_selfsim_ivp(slope: float, n: int, drift: bool = True) -> SingularIVP:
    """Scalar profile ODE as a singular IVP (drift=False gives the stationary ODE).

    phi'' = -((2n-1)/r + r/2) phi' + eta(phi)/r^2
          = -(2n-1)(phi'/r - phi/r^2) - (r/2) phi' + B(phi)/r^2,
    with B(z) = eta(z) - (2n-1) z = O(z^3).
    """

    def A(z1, z2, r):
        return -(r / 2.0) * z1 if drift else 0.0 * z1

    def B(z):
        return (2 * n - 2) * np.sin(z) + 0.5 * np.sin(2 * z) - (2 * n - 1) * z

    return SingularIVP(k=2 * n - 1, A=A, B=B, alpha0=complex(slope))


@dataclass(frozen=True)
class RealProfile:
    """Scalar profile g(r) with derivative; g(0) = 0."""

    r: np.ndarray
    g: np.ndarray
    g_r: np.ndarray
    n: int
    slope: float
    g_rr: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, float))
        object.__setattr__(self, "g", np.asarray(self.g, float))
        object.__setattr__(self, "g_r", np.asarray(self.g_r, float))
        if not np.all(np.isfinite(self.g)):
            raise DomainError("profile contains non-finite values")

    @property
    def g_inf(self) -> float:
        return float(self.g[-1])

    def eval(self, r_query):
        val, _ = hermite_eval(r_query, self.r, self.g, self.g_r)
        if self.g_rr is not None:
            der, _ = hermite_eval(r_query, self.r, self.g_r, self.g_rr)
        else:
            _, der = hermite_eval(r_query, self.r, self.g, self.g_r)
        return val, der

    def to_csv(self, path):
        data = np.column_stack([self.r, self.g, self.g_r])
        np.savetxt(path, data, delimiter=",", header="r,g,g_r", comments="", fmt="%.17g")


def solve_selfsim_real(beta_slope: float, n: int, r_max: float,
                       rel_tol: float = 1e-10, r0: float = DEFAULT_R0,
                       max_step: float = np.inf, drift: bool = True) -> RealProfile:
    """Integrate the scalar self-similar profile with origin slope beta_slope.

    beta_slope is the actual derivative at the origin (a curve "labeled"
    beta in the comparison suite has beta_slope = 2*beta).
    """
    if beta_slope < 0:
        raise DomainError("need beta_slope >= 0")
    if n < 2:
        raise DomainError("need n >= 2")
    if beta_slope == 0.0:
        r = np.linspace(0.0, r_max, 201)
        z = np.zeros_like(r)
        return RealProfile(r, z, z, n, 0.0, g_rr=z)
    ivp = real_selfsim_ivp(beta_slope, n, drift=drift)
    f0, fp0 = series_start(ivp, r0)
    fun = ivp.rhs()
    rs, ys, fs = integrate_rk(fun, r0, np.array([f0, fp0], dtype=complex), r_max,
                              rel_tol=rel_tol, max_step=max_step)
    return RealProfile(rs, ys[:, 0].real, ys[:, 1].real, n, beta_slope,
                       g_rr=fs[:, 1].real)


# ---------------------------------------------------------------------------
# comparison suite (maximum-principle orderings)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ComparisonReport:
    n: int
    beta_labels: tuple
    informational: bool       # n = 2 runs are produced but not certified
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        return json.dumps({
            "schema": "gllflow.comparison_report/1",
            "n": self.n,
            "beta_labels": list(self.beta_labels),
            "informational": self.informational,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
        }, indent=2, sort_keys=True)


ORDERING_TOL = 1e-8


def comparison_suite(beta_list, n: int, r_max: float, rel_tol: float = 1e-10,
                     limit_beta: float = 1e3) -> ComparisonReport:
    """Ordering checks for the self-similar scalar profiles.

    For each label beta (slope 2*beta): (i) phi <= matched stationary
    profile, (ii) monotone in r and < pi, (iii) pointwise strictly
    increasing in beta with the large-beta profile near pi, (iv) the
    r_max value strictly increasing in beta.
    """
    betas = sorted(float(b) for b in beta_list)
    if any(b < 0 for b in betas):
        raise DomainError("beta labels must be >= 0")
    r_common = np.linspace(r_max / 400.0, r_max, 400)
    checks = []
    profiles = {}
    for b in betas:
        profiles[b] = solve_selfsim_real(2.0 * b, n, r_max, rel_tol=rel_tol)

    worst, where = -np.inf, None
    for b in betas:
        if b == 0.0:
            continue
        g, _ = profiles[b].eval(r_common)
        excess = g - stationary_profile(b, r_common)
        i = int(np.argmax(excess))
        if excess[i] > worst:
            worst, where = float(excess[i]), (b, float(r_common[i]))
    checks.append(ComparisonCheck(
        "below_matched_stationary", worst <= ORDERING_TOL,
        f"max(phi - stationary) = {worst:.3e} at (beta, r) = {where}"))

    worst, where = -np.inf, None
    top, top_where = -np.inf, None
    for b in betas:
        p = profiles[b]
        dec = -np.min(np.diff(p.g)) if p.g.size > 1 else 0.0
        if dec > worst:
            worst, where = float(dec), b
        if p.g.max() > top:
            top, top_where = float(p.g.max()), b
    checks.append(ComparisonCheck(
        "monotone_in_r", worst <= ORDERING_TOL,
        f"largest decrease {worst:.3e} (beta = {where})"))
    checks.append(ComparisonCheck(
        "below_pi", top < math.pi,
        f"max phi = {top:.6f} (beta = {top_where}), pi = {math.pi:.6f}"))

    worst, where = -np.inf, None
    for b_lo, b_hi in zip(betas[:-1], betas[1:]):
        g_lo, _ = profiles[b_lo].eval(r_common)
        g_hi, _ = profiles[b_hi].eval(r_common)
        gap = g_lo - g_hi
        i = int(np.argmax(gap))
        if gap[i] > worst:
            worst, where = float(gap[i]), (b_lo, b_hi, float(r_common[i]))
    checks.append(ComparisonCheck(
        "increasing_in_beta", worst <= ORDERING_TOL,
        f"max(phi_lo - phi_hi) = {worst:.3e} at (beta_lo, beta_hi, r) = {where}"))

    big = solve_selfsim_real(2.0 * limit_beta, n, r_max, rel_tol=rel_tol)
    gap_pi = math.pi - big.g_inf
    checks.append(ComparisonCheck(
        "large_beta_near_pi", 0.0 < gap_pi < 0.05,
        f"pi - phi_{{{limit_beta:g}}}(r_max) = {gap_pi:.4f}"))

    ginfs = [profiles[b].g_inf for b in betas]
    incr = all(a < b for a, b in zip(ginfs[:-1], ginfs[1:]))
    checks.append(ComparisonCheck(
        "limits_increasing_in_beta", incr,
        f"phi(infty) per beta: {[round(v, 6) for v in ginfs]}"))

    return ComparisonReport(n=n, beta_labels=tuple(betas),
                            informational=(n == 2), checks=tuple(checks))


# ---------------------------------------------------------------------------
# non-uniqueness witness machinery (n = 2, d = 4)
# ---------------------------------------------------------------------------

def f_kink(r, epsilon):
    """The near-Hardy-saturating kink family on [0, 1].

    1/epsilon on [0, epsilon], 1/r on [epsilon, 1/2], 4(1-r) on [1/2, 1].
    """
    r = np.asarray(r, float)
    return np.where(r <= epsilon, 1.0 / epsilon,
                    np.where(r <= 0.5, 1.0 / np.maximum(r, 1e-300), 4.0 * (1.0 - r)))


def f_kink_derivative(r, epsilon):
    r = np.asarray(r, float)
    safe = np.where(r > 0, r, 1.0)
    return np.where(r <= epsilon, 0.0, np.where(r <= 0.5, -1.0 / safe**2, -4.0))


def _witness_nodes(epsilon, quad_nodes):
    """Quadrature nodes respecting the kink breakpoints (log-spaced middle)."""
    m = max(quad_nodes // 3, 64)
    seg1 = np.linspace(0.0, epsilon, m)
    seg2 = np.geomspace(epsilon, 0.5, 2 * m)
    seg3 = np.linspace(0.5, 1.0, m)
    return seg1, seg2, seg3


def witness_energy_gap(epsilon, delta, n_dim=4, quad_nodes=4000):
    """E(h) - E(pi) on [0, 1] for h = pi - (delta/2) f_epsilon, d = 4.

    Integrand |h'|^2 + (gamma(h) - gamma(pi))/r^2 against r^{d-1} dr,
    integrated piecewise so the kinks at r = epsilon and 1/2 stay sharp.
    """
    total = 0.0
    for seg in _witness_nodes(epsilon, quad_nodes):
        r = seg.copy()
        f = f_kink(r, epsilon)
        fp = f_kink_derivative(r, epsilon)
        h = math.pi - (delta / 2.0) * f
        hp = -(delta / 2.0) * fp
        with np.errstate(divide="ignore", invalid="ignore"):
            pot = np.where(r > 0, gamma(h, 2) / np.where(r > 0, r, 1.0) ** 2, 0.0)
        integrand = (hp**2 + pot) * r ** (n_dim - 1)
        total += float(trapezoid(integrand, r))
    return total


def hardy_saturation_ratio(epsilon, quad_nodes=4000):
    """int |f'|^2 r^3 dr / int |f/r|^2 r^3 dr for the kink family (>= 1, -> 1)."""
    num = den = 0.0
    for seg in _witness_nodes(epsilon, quad_nodes):
        r = seg
        f = f_kink(r, epsilon)
        fp = f_kink_derivative(r, epsilon)
        num += float(trapezoid(fp**2 * r**3, r))
        with np.errstate(divide="ignore", invalid="ignore"):
            den += float(trapezoid(np.where(r > 0, (f / np.where(r > 0, r, 1.0)) ** 2, 0.0) * r**3, r))
    return num / den


def taylor_domination_delta(C=0.2, quadratic_coefficient=1.0, samples=20001):
    """Largest delta <= 0.5 with gamma(x) - gamma(pi) <= -q (x-pi)^2 - C (x-pi)^4
    on [pi-delta, pi+delta]; None if no delta works.

    Near pi the expansion gamma(pi+s) = -s^2/2 - s^4/12 + O(s^6) decides
    the small-s regime exactly: q = 1 (or any q > 1/2) fails for every
    delta, and q = 1/2 needs C < 1/12.  The remaining range is sampled.
    """
    q = quadratic_coefficient
    if q > 0.5:
        return None
    if q == 0.5 and C >= 1.0 / 12.0:
        return None
    # small |s| is covered by the expansion; sample the rest
    s = np.linspace(0.01, 0.5, samples)
    margin = gamma(math.pi + s, 2) + q * s**2 + C * s**4
    bad = s[margin > 1e-14]
    return 0.5 if bad.size == 0 else float(bad.min())


@dataclass(frozen=True)
class WitnessReport:
    epsilon: float
    delta: float
    energy_gap: float
    hardy_ratio: float
    taylor_delta_literal: float | None     # q = 1 domination radius (None: fails)
    taylor_delta_halved: float | None      # q = 1/2 domination radius
    taylor_C: float
    quad_nodes: int

    def to_json(self):
        return json.dumps({
            "schema": "gllflow.witness_report/1",
            "epsilon": self.epsilon,
            "delta": self.delta,
            "energy_gap": self.energy_gap,
            "hardy_ratio": self.hardy_ratio,
            "taylor_delta_literal": self.taylor_delta_literal,
            "taylor_delta_halved": self.taylor_delta_halved,
            "taylor_C": self.taylor_C,
            "quad_nodes": self.quad_nodes,
            "kink_breakpoints": [self.epsilon, 0.5],
        }, indent=2, sort_keys=True)


def nonuniqueness_witness(epsilon, delta, quad_nodes=4000, taylor_C=0.05) -> WitnessReport:
    """Energy-comparison report for the equator map against the kink family.

    The quartic Taylor domination that the classical construction leans on
    is recorded in both the literal (q = 1) and the corrected (q = 1/2)
    normalization; the energy gap itself is computed from the exact
    potential, not the Taylor surrogate.
    """
    if not (0.0 < epsilon < 0.5):
        raise DomainError("need 0 < epsilon < 1/2")
    if not (0.0 <= delta <= 0.5):
        raise DomainError("need 0 <= delta <= 1/2")
    gap = 0.0 if delta == 0.0 else witness_energy_gap(epsilon, delta, quad_nodes=quad_nodes)
    return WitnessReport(
        epsilon=float(epsilon), delta=float(delta), energy_gap=gap,
        hardy_ratio=hardy_saturation_ratio(epsilon, quad_nodes=quad_nodes),
        taylor_delta_literal=taylor_domination_delta(taylor_C, 1.0),
        taylor_delta_halved=taylor_domination_delta(taylor_C, 0.5),
        taylor_C=taylor_C, quad_nodes=quad_nodes)


def search_negative_gap(epsilons, delta, quad_nodes=4000):
    """Scan the kink family for a negative energy gap; returns (min, argmin)."""
    best, arg = np.inf, None
    for eps in epsilons:
        g = witness_energy_gap(eps, delta, quad_nodes=quad_nodes)
        if g < best:
            best, arg = g, float(eps)
    return best, arg
