"""Closed-form benchmarks: self-similar profiles and comparison ODEs.

Everything here is exact arithmetic on formulas, independent of the
finite-volume solver, so it can serve as an oracle for it.  Three families:

* the Barenblatt source solution of the porous-medium equation,
* compactly supported sub/super profiles
      g(x, t) = amplitude * (shift + t)**(sign * rate_exp)
                * max(support_scale - |x - center|^2 / (shift + t)**spread_exp, 0)**shape_exp
  whose parameters are picked so that g bounds the cell density from below
  (all times) or from above (a short initial window),
* scalar comparison ODEs g' = C e^{-c t} g^m (+ logistic variants) with an
  explicit blow-up dichotomy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Field

__all__ = [
    "ConstructionError",
    "ProfileParams",
    "barenblatt",
    "select_lower_profile",
    "select_upper_profile",
    "lower_plateau",
    "BlowupResult",
    "classify_blowup",
    "OdeEnvelopeParams",
    "EnvelopeResult",
    "convergence_envelopes",
    "exact_ecm_decay",
]


class ConstructionError(RuntimeError):
    """A profile construction could not satisfy its inequalities."""


def _radial_sq(x, dim: int, center=None):
    x = np.asarray(x, dtype=float)
    if dim == 1:
        if center is not None:
            x = x - center[0]
        return x * x
    if x.shape[-1] != dim:
        raise ValueError("last axis of x must have length %d" % dim)
    if center is not None:
        x = x - np.asarray(center, dtype=float)
    return np.sum(x * x, axis=-1)


def barenblatt(x, t: float, m: float, n: int):
    """Source solution of u_t = Lap(u^m) in n dimensions, mass fixed by m, n.

    B(x, t) = (1+t)^{-k} (1 - k(m-1)/(2mn) |x|^2 (1+t)^{-2k/n})_+^{1/(m-1)}
    with k = 1/(m - 1 + 2/n).  Scalar x is fine for n = 1; for n = 2 the
    last axis of x holds the coordinates.
    """
    if not (m > 1.0):
        raise ValueError("m must be > 1, got %r" % m)
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2, got %r" % n)
    if t < 0.0:
        raise ValueError("t must be >= 0, got %r" % t)
    k = 1.0 / (m - 1.0 + 2.0 / n)
    r2 = _radial_sq(x, 1 if n == 1 else n)
    bracket = 1.0 - (k * (m - 1.0) / (2.0 * m * n)) * r2 * (1.0 + t) ** (-2.0 * k / n)
    out = (1.0 + t) ** (-k) * np.clip(bracket, 0.0, None) ** (1.0 / (m - 1.0))
    if np.ndim(out) == 0:
        return float(out)
    return out


def barenblatt_support_radius(t: float, m: float, n: int) -> float:
    """Edge of the Barenblatt support at time t."""
    k = 1.0 / (m - 1.0 + 2.0 / n)
    return math.sqrt(2.0 * m * n / (k * (m - 1.0))) * (1.0 + t) ** (k / n)


@dataclass(frozen=True)
class ProfileParams:
    """Parameters of a compact self-similar comparison profile.

    kind 'lower': g = amplitude (1+t)^{-rate_exp} (support_scale - d2/(1+t)^spread_exp)_+^shape_exp
    kind 'upper': g = amplitude (shift+t)^{+rate_exp} (support_scale - d2/(shift+t)^spread_exp)_+^shape_exp
    where d2 = |x - center|^2 and shape_exp = 1/(m-1).
    """

    kind: str
    amplitude: float
    support_scale: float
    spread_exp: float
    rate_exp: float
    time_shift: float
    center: tuple[float, ...]
    m: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.kind not in ("lower", "upper"):
            raise ValueError("kind must be 'lower' or 'upper', got %r" % self.kind)
        if not (self.amplitude > 0 and self.support_scale > 0):
            raise ValueError("amplitude and support_scale must be positive")
        if not (self.m > 1.0):
            raise ValueError("m must be > 1")
        if self.kind == "lower":
            if not (0.0 < self.spread_exp < 0.5):
                raise ValueError("lower profile needs spread_exp in (0, 1/2), got %r" % self.spread_exp)
            if abs(self.time_shift - 1.0) > 1e-12:
                raise ValueError("lower profile uses time shift 1")
            want = (1.0 - self.spread_exp) / (self.m - 1.0)
            if abs(self.rate_exp - want) > 1e-9 * max(1.0, abs(want)):
                raise ValueError("lower profile rate_exp must equal (1 - spread_exp)/(m - 1)")
        else:
            if not (0.0 < self.time_shift <= 1.0):
                raise ValueError("upper profile needs time_shift in (0, 1], got %r" % self.time_shift)

    @property
    def shape_exp(self) -> float:
        return 1.0 / (self.m - 1.0)

    def evaluate(self, x, t: float):
        """Profile value at positions x and time t >= 0."""
        if t < 0.0:
            raise ValueError("t must be >= 0")
        s = self.time_shift + t
        d2 = _radial_sq(x, len(self.center), self.center)
        bracket = np.clip(self.support_scale - d2 * s ** (-self.spread_exp), 0.0, None)
        power = -self.rate_exp if self.kind == "lower" else self.rate_exp
        out = self.amplitude * s ** power * bracket ** self.shape_exp
        if np.ndim(out) == 0:
            return float(out)
        return out

    def support_radius_at(self, t: float) -> float:
        """Radius of the profile's support ball at time t."""
        return math.sqrt(self.support_scale) * (self.time_shift + t) ** (self.spread_exp / 2.0)


def select_lower_profile(
    m: float,
    n: int,
    mu: float,
    delta: float,
    seed_radius: float,
    seed_height: float,
    diam: float,
    c1: float,
    c2: float,
    center,
) -> ProfileParams:
    """Build the expanding sub-profile pinned under a seeded cell density.

    The density must dominate seed_height on the ball of seed_radius around
    center at t = 0; c1 and c2 bound the attractant gradient and Laplacian
    over the run; diam is the domain diameter.  The amplitude is the minimum
    of four closed-form branches and the spread exponent is
    4 * amplitude^{m-1} * m/(m-1), capped just below 1/2 (the cap keeps the
    strict-inequality hypothesis while the formula can land exactly on 1/2;
    a smaller spread only relaxes the remaining inequalities).
    Requires 1 <= delta < m and mu > 0.
    """
    if not (m > 1.0):
        raise ValueError("m must be > 1, got %r" % m)
    if not (1.0 <= delta < m):
        raise ValueError("lower profile requires 1 <= delta < m, got delta=%r m=%r" % (delta, m))
    if not (mu > 0.0):
        raise ValueError("lower profile requires mu > 0, got %r" % mu)
    if not (0.0 < seed_height <= 0.5):
        raise ValueError("seed_height must lie in (0, 1/2], got %r" % seed_height)
    if not (seed_radius > 0.0 and diam > 0.0):
        raise ValueError("seed_radius and diam must be positive")
    if not (c1 > 0.0 and c2 > 0.0):
        raise ValueError("gradient bounds c1, c2 must be positive")
    d = 1.0 / (m - 1.0)
    eta = seed_radius * seed_radius
    eps = min(
        (1.0 / (8.0 * n * m)) ** d,
        (1.0 / (8.0 * m * (m - 1.0) * c1 * diam)) ** d,
        seed_height / seed_radius ** (2.0 * d),
        (mu / (2.0 * c2)) ** (1.0 / (m - delta)),
    )
    beta = min(4.0 * eps ** (m - 1.0) * m / (m - 1.0), 0.499)
    kappa = (1.0 - beta) / (m - 1.0)
    return ProfileParams(
        kind="lower",
        amplitude=eps,
        support_scale=eta,
        spread_exp=beta,
        rate_exp=kappa,
        time_shift=1.0,
        center=tuple(np.atleast_1d(np.asarray(center, float))),
        m=m,
    )


def lower_profile_branches(m, n, mu, delta, seed_radius, seed_height, diam, c1, c2):
    """The four amplitude branches of the sub-profile, for auditing."""
    d = 1.0 / (m - 1.0)
    return (
        (1.0 / (8.0 * n * m)) ** d,
        (1.0 / (8.0 * m * (m - 1.0) * c1 * diam)) ** d,
        seed_height / seed_radius ** (2.0 * d),
        (mu / (2.0 * c2)) ** (1.0 / (m - delta)),
    )


def select_upper_profile(
    m: float,
    mu: float,
    delta: float,
    r0: float,
    r1: float,
    sup_height: float,
    c1: float,
    c2: float,
    center,
    tau_start: float = 0.5,
) -> tuple[ProfileParams, float]:
    """Build the super-profile covering the density on an initial window.

    The density is supported in the ball of radius r0 around center with sup
    at most sup_height, and the ball of radius r1 > r0 stays inside the
    domain.  Both spread and rate exponents equal 1; the amplitude makes the
    profile exactly sup_height on the edge of the r0 ball at t = 0.  The time
    shift tau is found by halving from tau_start until three sufficient
    inequalities hold over the validity window (they are all increasing in
    tau, so halving terminates); below 1e-8 the construction gives up.

    Returns the profile and the end t0 of its validity window.
    """
    if not (m > 1.0):
        raise ValueError("m must be > 1, got %r" % m)
    if not (1.0 <= delta < m):
        raise ValueError("upper profile requires 1 <= delta < m, got delta=%r m=%r" % (delta, m))
    if not (0.0 < r0 < r1):
        raise ValueError("need 0 < r0 < r1, got r0=%r r1=%r" % (r0, r1))
    if not (sup_height > 0.0):
        raise ValueError("sup_height must be positive, got %r" % sup_height)
    if not (c1 > 0.0 and c2 > 0.0):
        raise ValueError("gradient bounds c1, c2 must be positive")
    if not (0.0 < tau_start <= 1.0):
        raise ValueError("tau_start must lie in (0, 1], got %r" % tau_start)

    d = 1.0 / (m - 1.0)
    beta = 1.0
    sigma = 1.0
    r2 = 0.5 * (r0 + r1)
    gap = r2 * r2 - r0 * r0

    tau = tau_start
    while tau >= 1e-8:
        eta = r2 * r2 / tau ** beta
        eps = sup_height / (tau ** (sigma - d * beta) * gap ** d)
        t0 = min(tau, tau * ((r1 / r2) ** (2.0 / beta) - 1.0))
        s = tau + t0  # all three bounds are monotone in tau + t, check the far end
        ok1 = (m - 1.0) * beta >= 8.0 * m * eps ** (m - 1.0) * s ** ((m - 1.0) * sigma - beta + 1.0)
        coeff = c2 + (m + eps * tau ** sigma * eta ** d) ** 2 * c1 * c1 * m
        ok2 = 2.0 * sigma / 3.0 >= coeff * eps ** (m - 1.0) * s ** ((m - 1.0) * sigma + 1.0) * eta
        ok3 = sigma / 3.0 >= mu * eps ** (delta - 1.0) * s ** ((delta - 1.0) * sigma + 1.0) * eta ** (d * (delta - 1.0))
        if ok1 and ok2 and ok3:
            params = ProfileParams(
                kind="upper",
                amplitude=eps,
                support_scale=eta,
                spread_exp=beta,
                rate_exp=sigma,
                time_shift=tau,
                center=tuple(np.atleast_1d(np.asarray(center, float))),
                m=m,
            )
            return params, t0
        tau *= 0.5
    raise ConstructionError(
        "no admissible time shift above 1e-8 for r0=%r r1=%r sup=%r c1=%r c2=%r"
        % (r0, r1, sup_height, c1, c2)
    )


def lower_plateau(
    profile: ProfileParams,
    mu: float,
    delta: float,
    c2_late: float,
    max_dist2: float,
) -> tuple[float, float]:
    """Constant floor reached after the sub-profile covers the domain.

    Returns (t_cover, floor): after t_cover the profile bracket exceeds half
    its peak everywhere (max_dist2 is the largest squared distance from the
    profile center to the domain boundary), and the density then dominates
    the constant floor, limited also by the late-time attractant curvature
    bound c2_late.
    """
    if profile.kind != "lower":
        raise ValueError("plateau is defined for lower profiles")
    m = profile.m
    if not (1.0 <= delta < m):
        raise ValueError("plateau requires 1 <= delta < m")
    eta = profile.support_scale
    t_cover = max((2.0 * max_dist2 / eta) ** (1.0 / profile.spread_exp) - 1.0, 0.0)
    d = profile.shape_exp
    floor = min(
        profile.amplitude * (1.0 + t_cover) ** (-profile.rate_exp) * (eta / 2.0) ** d,
        (mu / (2.0 * c2_late)) ** (1.0 / (m - delta)),
        0.5,
    )
    return t_cover, floor


# --- comparison ODEs --------------------------------------------------------


@dataclass(frozen=True)
class BlowupResult:
    outcome: str  # 'blows_up' | 'bounded' | 'marginal'
    time: float | None  # finite blow-up time when outcome == 'blows_up'


def classify_blowup(C: float, c: float, m: float, g0: float) -> BlowupResult:
    """Dichotomy for g' = C e^{-c t} g^m, g(0) = g0 > 0.

    Separating variables gives
        (g0^{1-m} - g(t)^{1-m})/(m-1) = (C/c)(1 - e^{-c t}),
    so the solution escapes to infinity in finite time exactly when
    c/C < (m-1) g0^{m-1}, with
        t* = -(1/c) ln(1 - c g0^{1-m} / (C (m-1))).
    Ratios within 1e-12 relative of the threshold are reported marginal.
    """
    if not (C > 0 and c > 0 and g0 > 0):
        raise ValueError("C, c and g0 must be positive")
    if not (m > 1.0):
        raise ValueError("m must be > 1, got %r" % m)
    threshold = (m - 1.0) * g0 ** (m - 1.0)
    ratio = c / C
    if abs(ratio - threshold) <= 1e-12 * max(abs(ratio), abs(threshold)):
        return BlowupResult("marginal", None)
    if ratio < threshold:
        t_star = -(1.0 / c) * math.log1p(-c * g0 ** (1.0 - m) / (C * (m - 1.0)))
        return BlowupResult("blows_up", t_star)
    return BlowupResult("bounded", None)


@dataclass(frozen=True)
class OdeEnvelopeParams:
    """Scalar envelopes bracketing the late-stage density around 1.

    upper: y' = +forcing_amp e^{-forcing_rate t} y^m + mu y^delta (1 - y), y(t_start) = upper_init > 1
    lower: y' = -forcing_amp e^{-forcing_rate t} y^m + mu y^delta (1 - y), y(t_start) = lower_init < 1
    """

    forcing_amp: float
    forcing_rate: float
    t_start: float
    upper_init: float
    lower_init: float
    mu: float
    delta: float
    m: float

    def __post_init__(self):
        if not (self.forcing_amp >= 0 and self.forcing_rate > 0):
            raise ValueError("need forcing_amp >= 0 and forcing_rate > 0")
        if not (self.upper_init > 1.0 > self.lower_init > 0.0):
            raise ValueError(
                "envelope initial data must satisfy upper_init > 1 > lower_init > 0, got %r, %r"
                % (self.upper_init, self.lower_init)
            )
        if not (self.mu >= 0 and self.delta >= 1 and self.m > 1):
            raise ValueError("need mu >= 0, delta >= 1, m > 1")


@dataclass
class EnvelopeResult:
    t: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    step_used: float


def _envelope_rhs(t, y, p: OdeEnvelopeParams):
    force = p.forcing_amp * math.exp(-p.forcing_rate * t)
    y1, y2 = y
    d1 = force * y1 ** p.m + p.mu * y1 ** p.delta * (1.0 - y1)
    d2 = -force * y2 ** p.m + p.mu * y2 ** p.delta * (1.0 - y2)
    return np.array([d1, d2])


def _rk4_path(p: OdeEnvelopeParams, t_end: float, n_steps: int, keep_every: int):
    y = np.array([p.upper_init, p.lower_init])
    h = (t_end - p.t_start) / n_steps
    ts = [p.t_start]
    ys = [y.copy()]
    t = p.t_start
    for i in range(n_steps):
        k1 = _envelope_rhs(t, y, p)
        k2 = _envelope_rhs(t + 0.5 * h, y + 0.5 * h * k1, p)
        k3 = _envelope_rhs(t + 0.5 * h, y + 0.5 * h * k2, p)
        k4 = _envelope_rhs(t + h, y + h * k3, p)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = p.t_start + (i + 1) * h
        if not np.all(np.isfinite(y)):
            raise ConstructionError("envelope integration lost finiteness at t=%r" % t)
        if (i + 1) % keep_every == 0:
            ts.append(t)
            ys.append(y.copy())
    return np.asarray(ts), np.asarray(ys)


def convergence_envelopes(p: OdeEnvelopeParams, t_end: float, dt: float, tol: float = 1e-10) -> EnvelopeResult:
    """Integrate both envelope ODEs with classical RK4 and step-halving control.

    Before integrating, the upper envelope is screened with classify_blowup
    (the logistic term only damps it above 1, so the forced power ODE with
    effective amplitude forcing_amp e^{-forcing_rate t_start} majorizes it);
    a blows_up or marginal verdict is refused.  The step is halved until two
    consecutive resolutions agree to tol at every kept sample.  The result is
    guaranteed to satisfy lower < 1 < upper at every sample.
    """
    if not (t_end > p.t_start):
        raise ValueError("t_end must exceed t_start")
    if not (dt > 0):
        raise ValueError("dt must be positive")
    if p.forcing_amp > 0.0:
        verdict = classify_blowup(
            C=p.forcing_amp * math.exp(-p.forcing_rate * p.t_start),
            c=p.forcing_rate,
            m=p.m,
            g0=p.upper_init,
        )
        if verdict.outcome != "bounded":
            raise ConstructionError(
                "upper envelope is not certified bounded (verdict %s); pick a later t_start"
                % verdict.outcome
            )

    n0 = max(int(math.ceil((t_end - p.t_start) / dt)), 8)
    refine = 1
    ts, ys = _rk4_path(p, t_end, n0, 1)
    for _ in range(22):
        refine *= 2
        ts2, ys2 = _rk4_path(p, t_end, n0 * refine, refine)
        err = float(np.max(np.abs(ys2 - ys)))
        ts, ys = ts2, ys2
        if err <= tol:
            break
    else:
        raise ConstructionError("envelope step halving did not reach tol=%r" % tol)

    upper, lower = ys[:, 0], ys[:, 1]
    if not (np.all(upper > 1.0) and np.all(lower < 1.0)):
        raise ConstructionError("envelope ordering lower < 1 < upper failed along the path")
    return EnvelopeResult(t=ts, upper=upper, lower=lower, step_used=(t_end - p.t_start) / (n0 * refine))


def exact_ecm_decay(w0: Field, z_integral: Field) -> Field:
    """Matrix after enzyme exposure: w0 * exp(-int z dt), cell by cell."""
    if w0.grid != z_integral.grid:
        raise ValueError("fields must share a grid")
    if np.any(z_integral.values < 0.0):
        raise ValueError("accumulated enzyme exposure must be >= 0")
    return Field(w0.grid, w0.values * np.exp(-z_integral.values))
