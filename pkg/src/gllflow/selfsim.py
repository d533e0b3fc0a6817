"""Self-similar profiles of the reduced flow.

A self-similar solution u(r, t) = psi(r / sqrt(t)) has a profile psi that
solves the flow ODE with an extra (r/2) drift term.  Integration uses the
explicit second-order rearrangement (apply psi x to the drift form and use
psi x (psi x X) = -X on tangent vectors):

    psi'' = -|psi'|^2 psi - ((2n-1)/r) psi' - ((2n-2+psi3)/r^2) P_psi e3
            - (r/2) (alpha psi' - beta psi x psi')

started at the singular origin through the stereographic chart, where the
problem fits the singular-ODE class of `singular_ode`.

Convention: the initial data v = (v1, v2, 0) is the same coefficient that
parameterizes the stationary profiles (chart slope v1 + i v2); the actual
origin slope of psi is 2v.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._numerics import cumquad0, derivative_nonuniform, hermite_eval
from .errors import DomainError, NonConvergedError, NormDriftError
from .geometry import (E3, FlowParams, SpherePoint, stereo_lift_arr,
                       stereo_lift_differential)
from .singular_ode import DEFAULT_R0, SingularIVP, integrate_rk, series_start

TANGENT_DRIFT_ABORT = 1e-6
UNIT_NORM_TOL = 1e-10
TAIL_RATE_CONSTANT = 40.0     # rate bound 40 n^2 / r^2 for |psi_inf - psi(r)|


def stereo_selfsim_ivp(v, params: FlowParams) -> SingularIVP:
    """Chart form of the profile ODE as a singular initial-value problem.

    F'' = -(2n-1)(F'/r - F/r^2) + 2 conj(F) F'^2/(1+|F|^2)
          - 2 |F|^2 F / (r^2 (1+|F|^2)) - (alpha - i beta)(r/2) F'
    """
    al, be = params.alpha, params.beta
    alpha0 = complex(v[0], v[1])

    def A(z1, z2, r):
        return 2.0 * np.conj(z2) * z1**2 / (1.0 + abs(z2) ** 2) - (al - 1j * be) * (r / 2.0) * z1

    def B(z):
        return -2.0 * abs(z) ** 2 * z / (1.0 + abs(z) ** 2)

    return SingularIVP(k=2 * params.n - 1, A=A, B=B, alpha0=alpha0)


def sphere_profile_rhs(params: FlowParams):
    """Second-order rearrangement as a first-order system on y = (psi, psi_r)."""
    n, al, be = params.n, params.alpha, params.beta
    c_n1 = 2 * n - 1
    c_n2 = 2 * n - 2

    def fun(r, y):
        p1, p2, p3, d1, d2, d3 = y
        dd = d1 * d1 + d2 * d2 + d3 * d3
        c1 = c_n1 / r
        c2 = (c_n2 + p3) / (r * r)
        # P_psi e3 = e3 - p3 psi
        e1 = -p3 * p1
        e2 = -p3 * p2
        e3c = 1.0 - p3 * p3
        # psi x psi_r
        x1 = p2 * d3 - p3 * d2
        x2 = p3 * d1 - p1 * d3
        x3 = p1 * d2 - p2 * d1
        half_r = 0.5 * r
        a1 = -dd * p1 - c1 * d1 - c2 * e1 - half_r * (al * d1 - be * x1)
        a2 = -dd * p2 - c1 * d2 - c2 * e2 - half_r * (al * d2 - be * x2)
        a3 = -dd * p3 - c1 * d3 - c2 * e3c - half_r * (al * d3 - be * x3)
        return np.array([d1, d2, d3, a1, a2, a3])

    return fun


def _project_state(r, y):
    psi = y[:3]
    nrm = float(np.sqrt(psi @ psi))
    if abs(nrm - 1.0) > TANGENT_DRIFT_ABORT:
        raise NormDriftError(f"profile left the sphere at r={r} (|psi|-1 = {nrm - 1.0:.3e})")
    psi = psi / nrm
    d = y[3:]
    d = d - (d @ psi) * psi
    return np.concatenate([psi, d])


@dataclass(frozen=True)
class SelfSimProfile:
    """Solved profile: nodes, field, derivative, and the drift parameters."""

    r: np.ndarray
    psi: np.ndarray        # (N, 3)
    psi_r: np.ndarray      # (N, 3)
    params: FlowParams
    v: np.ndarray
    psi_rr: np.ndarray = field(default=None, repr=False)  # from the ODE, for interpolation

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, float))
        object.__setattr__(self, "psi", np.asarray(self.psi, float))
        object.__setattr__(self, "psi_r", np.asarray(self.psi_r, float))
        object.__setattr__(self, "v", np.asarray(self.v, float))
        norms = np.linalg.norm(self.psi, axis=1)
        if np.max(np.abs(norms - 1.0)) > UNIT_NORM_TOL:
            raise NormDriftError("profile nodes off the unit sphere beyond 1e-10")
        if self.params.n >= 2:
            bound = 4.0 * self.params.n + 1e-6
            if np.max(self.A) > bound:
                raise NormDriftError(f"derivative invariant A(r) exceeded {bound}")

    @property
    def A(self):
        """Weighted derivative energy A(r) = r^2 |psi_r|^2."""
        return self.r**2 * np.sum(self.psi_r**2, axis=1)

    @property
    def r_max(self):
        return float(self.r[-1])

    def eval(self, r_query, renormalize=True):
        """Hermite-interpolated (psi, psi_r) at query radii."""
        psi, _ = hermite_eval(r_query, self.r, self.psi, self.psi_r)
        if self.psi_rr is not None:
            dpsi, _ = hermite_eval(r_query, self.r, self.psi_r, self.psi_rr)
        else:
            _, dpsi = hermite_eval(r_query, self.r, self.psi, self.psi_r)
        if renormalize:
            psi = psi / np.linalg.norm(psi, axis=-1, keepdims=True)
            dpsi = dpsi - np.sum(dpsi * psi, axis=-1, keepdims=True) * psi
        return psi, dpsi

    def to_csv(self, path):
        header = "r,psi1,psi2,psi3,psi_r_norm,A"
        dn = np.linalg.norm(self.psi_r, axis=1)
        data = np.column_stack([self.r, self.psi, dn, self.A])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def solve_profile(v, params: FlowParams, r_max: float, rel_tol: float | None = None,
                  r0: float = DEFAULT_R0, max_step: float = np.inf) -> SelfSimProfile:
    """Integrate the profile ODE from the singular origin out to r_max.

    v = (v1, v2) or (v1, v2, 0).  rel_tol defaults to 1e-10, tightened to
    1e-12 for alpha = 0 where no dissipation damps the error.
    """
    v = np.asarray(v, float)
    if v.size == 2:
        v = np.array([v[0], v[1], 0.0])
    if abs(v[2]) > 1e-14:
        raise DomainError("initial data must be tangent at the north pole: v = (v1, v2, 0)")
    if params.n < 2:
        raise DomainError("self-similar profiles are solved for n >= 2")
    if r_max <= r0:
        raise DomainError("need r_max > r0")
    if rel_tol is None:
        rel_tol = 1e-12 if params.alpha == 0.0 else 1e-10

    if np.hypot(v[0], v[1]) == 0.0:
        r = np.linspace(0.0, r_max, 201)
        zeros = np.zeros((r.size, 3))
        psi = np.tile(E3, (r.size, 1))
        return SelfSimProfile(r, psi, zeros, params, v, psi_rr=zeros)

    ivp = stereo_selfsim_ivp(v, params)
    F0, Fp0 = series_start(ivp, r0)
    psi0 = stereo_lift_arr(F0)
    dpsi0 = stereo_lift_differential(F0, Fp0)
    y0 = np.concatenate([psi0, dpsi0])
    fun = sphere_profile_rhs(params)
    rs, ys, fs = integrate_rk(fun, r0, y0, r_max, rel_tol=rel_tol,
                              max_step=max_step, postprocess=_project_state)
    return SelfSimProfile(rs, ys[:, :3], ys[:, 3:], params, v, psi_rr=fs[:, 3:])


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def apriori_identity_residual(profile: SelfSimProfile, n: int | None = None,
                              alpha: float | None = None, n_resample: int = 4000,
                              r_stop: float | None = None) -> float:
    """Max residual of the integrated derivative-energy identity

        A(r) + int_0^r (2(2n-2)/s + alpha s) A(s) ds
            = 2(2n-2)(1 - psi3) + (1 - psi3^2).

    Both sides vanish at the origin and the identity holds exactly along
    true solutions, so the residual measures solver plus quadrature error.
    """
    n = profile.params.n if n is None else n
    alpha = profile.params.alpha if alpha is None else alpha
    r_hi = profile.r_max if r_stop is None else min(r_stop, profile.r_max)
    rr = np.linspace(profile.r[0], r_hi, n_resample)
    psi, dpsi = profile.eval(rr)
    A = rr**2 * np.sum(dpsi**2, axis=1)
    integrand = (2.0 * (2 * n - 2) / rr + alpha * rr) * A
    # prepend the origin, where the integrand vanishes like r
    rr0 = np.concatenate([[0.0], rr])
    integ0 = np.concatenate([[0.0], integrand])
    I = cumquad0(integ0, rr0)[1:]
    bracket = 2.0 * (2 * n - 2) * (1.0 - psi[:, 2]) + (1.0 - psi[:, 2] ** 2)
    return float(np.max(np.abs(A + I - bracket)))


def identity_integral_at(profile: SelfSimProfile, r_value: float) -> float:
    """The identity's cumulative integral evaluated at one radius."""
    n, alpha = profile.params.n, profile.params.alpha
    rr = np.linspace(profile.r[0], r_value, 2000)
    _, dpsi = profile.eval(rr)
    A = rr**2 * np.sum(dpsi**2, axis=1)
    integrand = (2.0 * (2 * n - 2) / rr + alpha * rr) * A
    rr0 = np.concatenate([[0.0], rr])
    integ0 = np.concatenate([[0.0], integrand])
    return float(cumquad0(integ0, rr0)[-1])


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    window: tuple
    n_points: int
    underflow: bool = False


def decay_exponent(profile: SelfSimProfile, window) -> DecayFit:
    """Least-squares log-log slope of |psi_r| over the window (r_lo, r_hi)."""
    r_lo, r_hi = window
    mask = (profile.r >= r_lo) & (profile.r <= r_hi)
    if mask.sum() < 3:
        raise DomainError("decay window contains fewer than 3 grid nodes")
    rr = profile.r[mask]
    mag = np.linalg.norm(profile.psi_r[mask], axis=1)
    if np.any(mag < 1e-14):
        return DecayFit(slope=np.nan, intercept=np.nan, window=(r_lo, r_hi),
                        n_points=int(mask.sum()), underflow=True)
    slope, intercept = np.polyfit(np.log(rr), np.log(mag), 1)
    return DecayFit(slope=float(slope), intercept=float(intercept),
                    window=(r_lo, r_hi), n_points=int(mask.sum()))


@dataclass(frozen=True)
class TailReport:
    """Limit estimate with the a-priori rate bound self-check."""

    psi_inf: SpherePoint
    r_used: float
    rate_bound: float
    observed_gap: float
    empirical_rate_constant: float
    params: FlowParams
    grid_nodes: int

    def to_json(self):
        return json.dumps({
            "schema": "gllflow.tail_report/1",
            "psi_inf": [self.psi_inf.x1, self.psi_inf.x2, self.psi_inf.x3],
            "r_used": self.r_used,
            "rate_bound": self.rate_bound,
            "observed_gap": self.observed_gap,
            "empirical_rate_constant": self.empirical_rate_constant,
            "params": {"n": self.params.n, "alpha": self.params.alpha, "beta": self.params.beta},
            "grid_nodes": self.grid_nodes,
        }, indent=2, sort_keys=True)


def tail_limit(profile: SelfSimProfile, n: int | None = None) -> TailReport:
    """Estimate psi_inf = psi(r_max) and self-check the 40 n^2 / r^2 rate.

    Consistency: |psi(r_max/2) - psi(r_max)| must not exceed the rate bound
    at r_max/2; a violation means the tail has not converged.
    """
    n = profile.params.n if n is None else n
    if profile.r_max < 10.0:
        raise DomainError("tail limit needs a profile reaching r_max >= 10")
    r_used = profile.r_max / 2.0
    psi_half, _ = profile.eval(np.array([r_used]))
    psi_end = profile.psi[-1]
    gap = float(np.linalg.norm(psi_half[0] - psi_end))
    bound = TAIL_RATE_CONSTANT * n**2 / r_used**2
    if gap > bound:
        raise NonConvergedError(
            f"|psi(r_max/2) - psi(r_max)| = {gap:.3e} exceeds rate bound {bound:.3e}; increase r_max")
    empirical = gap * r_used**2 / n**2
    return TailReport(psi_inf=SpherePoint.from_array(psi_end), r_used=r_used,
                      rate_bound=bound, observed_gap=gap, empirical_rate_constant=empirical,
                      params=profile.params, grid_nodes=profile.r.size)


def limit_map_continuity(v_samples, params: FlowParams, r_max: float,
                         rel_tol: float | None = None):
    """Table of (v, psi_inf, |psi_inf - e3|) along a path of initial data.

    Returns (rows, modulus) where modulus is the max ratio
    |psi_inf(v) - psi_inf(v')| / |v - v'| over consecutive samples.
    """
    rows = []
    for v in v_samples:
        v = np.asarray(v, float)
        prof = solve_profile(v, params, r_max, rel_tol=rel_tol)
        psi_inf = prof.psi[-1]
        rows.append({"v": v, "psi_inf": psi_inf,
                     "gap_to_e3": float(np.linalg.norm(psi_inf - E3))})
    modulus = 0.0
    for a, b in zip(rows[:-1], rows[1:]):
        dv = float(np.linalg.norm(a["v"] - b["v"]))
        if dv > 0:
            modulus = max(modulus, float(np.linalg.norm(a["psi_inf"] - b["psi_inf"])) / dv)
    return rows, modulus


def consistency_second_derivative(profile: SelfSimProfile, stencil: int = 5):
    """psi_rr by finite differences of the stored psi_r nodes.

    Deliberately independent of the ODE rearrangement (which would make
    any substitution check a tautology).
    """
    return derivative_nonuniform(profile.r, profile.psi_r, order=1, stencil=stencil)
