"""Stochastic lattice walk whose hydrodynamic limit is the cell PDE.

Particles hop on a 1D chain of sites with reflecting ends.  The jump rate
from site i to a neighbor is q(relative density) * (alpha + beta * (tau(v_dest)
- tau(v_here))), scaled by 1/h^2; where q is evaluated distinguishes the
kernels:

* volume_filling  : q at the destination site (crowded targets slow arrivals)
* pushing         : q at the departure site (crowded origins push out)
* quorum_pushing  : like pushing but the drift coefficient is beta(z_here)

With q(s) = s^(m-1) and flat signal every kernel relaxes to the degenerate
diffusion u_t = (u^m)_xx.  Time advances by tau leaping with per-site
binomial (multinomial) draws, which conserves particles exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .model import ConstantSensitivity, Field, Grid, jump_probability

__all__ = [
    "KERNELS",
    "LatticeState",
    "transition_rates",
    "rate_arrays",
    "step_tau_leap",
    "coarse_density",
    "run_adaptive",
]

KERNELS = ("volume_filling", "pushing", "quorum_pushing")

LEAP_LIMIT = 0.1  # dt * max rate must stay below this for the leap to be honest
OVERFLOW_FACTOR = 4  # occupancy above OVERFLOW_FACTOR * u_max aborts the run


def _identity(v):
    return v


@dataclass(eq=False)
class LatticeState:
    """Occupancies plus the frozen signal landscape and kinetic constants.

    occupancy counts particles per site (u_max of them make relative density
    one); v and z are prescribed signal and quorum profiles; tau_of_v is the
    signal transduction (identity by default).  Sites above u_max are counted
    as capacity violations but only occupancy beyond OVERFLOW_FACTOR * u_max
    is an error, because the pushing kernels do not hard-block arrivals.
    """

    occupancy: np.ndarray
    u_max: int
    v: np.ndarray
    z: np.ndarray
    m: float
    alpha: float = 1.0
    beta_sens: object = dc_field(default_factory=lambda: ConstantSensitivity(0.0))
    tau_of_v: object = _identity
    kernel: str = "pushing"
    seed: int = 0
    spacing: float = 1.0
    origin: float = 0.0
    capacity_violations: int = 0
    rng: np.random.Generator = None

    def __post_init__(self):
        self.occupancy = np.asarray(self.occupancy, dtype=np.int64)
        if self.occupancy.ndim != 1 or self.occupancy.size < 2:
            raise ValueError("occupancy must be a 1D array with >= 2 sites")
        if np.any(self.occupancy < 0):
            raise ValueError("occupancy must be nonnegative")
        if not (isinstance(self.u_max, (int, np.integer)) and self.u_max >= 1):
            raise ValueError("u_max must be a positive integer, got %r" % self.u_max)
        cap = OVERFLOW_FACTOR * self.u_max
        if np.any(self.occupancy > cap):
            raise ValueError("occupancy exceeds the overflow cap %d" % cap)
        self.v = np.asarray(self.v, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if self.v.shape != self.occupancy.shape or self.z.shape != self.occupancy.shape:
            raise ValueError("v and z must match the occupancy shape")
        if self.kernel not in KERNELS:
            raise ValueError("kernel must be one of %r, got %r" % (KERNELS, self.kernel))
        if not (self.m > 1.0):
            raise ValueError("m must be > 1, got %r" % self.m)
        if not (self.alpha >= 0.0):
            raise ValueError("alpha must be >= 0, got %r" % self.alpha)
        if not (self.spacing > 0.0):
            raise ValueError("spacing must be positive, got %r" % self.spacing)
        if self.kernel != "quorum_pushing" and not isinstance(self.beta_sens, ConstantSensitivity):
            raise ValueError(
                "kernel %r uses a constant drift coefficient; quorum_pushing is the "
                "kernel that reads beta off the local z" % self.kernel
            )
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)

    @property
    def sites(self) -> int:
        return self.occupancy.size

    def relative_density(self) -> np.ndarray:
        return self.occupancy / float(self.u_max)

    def particle_count(self) -> int:
        return int(self.occupancy.sum())


def rate_arrays(s: LatticeState):
    """Per-particle jump rates (to_left, to_right) for every site.

    Reflecting boundaries show up as zero outward rates at the ends; negative
    raw rates (strong adverse drift) clamp to zero.
    """
    dens = s.relative_density()
    q = jump_probability(dens, s.m)
    tau_v = np.asarray(s.tau_of_v(s.v), dtype=float)
    # quorum_pushing reads the coefficient off the departure site's z,
    # the other kernels carry a constant coefficient
    beta = s.beta_sens.eval(s.z)

    scale = 1.0 / (s.spacing * s.spacing)
    left = np.zeros(s.sites)
    right = np.zeros(s.sites)
    dtau_r = tau_v[1:] - tau_v[:-1]  # transduced signal gap across face (i, i+1)
    if s.kernel == "volume_filling":
        q_r = q[1:]  # q at the destination
        q_l = q[:-1]
    else:
        q_r = q[:-1]  # q at the departure site
        q_l = q[1:]
    right[:-1] = q_r * (s.alpha + beta[:-1] * dtau_r)
    left[1:] = q_l * (s.alpha - beta[1:] * dtau_r)
    np.clip(left, 0.0, None, out=left)
    np.clip(right, 0.0, None, out=right)
    return left * scale, right * scale


def transition_rates(s: LatticeState, i: int):
    """Rates (to_left, to_right) for one site; see rate_arrays."""
    if not (0 <= i < s.sites):
        raise ValueError("site index %r out of range" % i)
    left, right = rate_arrays(s)
    return float(left[i]), float(right[i])


def step_tau_leap(s: LatticeState, dt: float) -> LatticeState:
    """Advance the occupancies by dt with one multinomial leap per site.

    Requires dt * max rate <= 0.1 so the frozen-rate approximation holds;
    every particle moves at most once, hence the total count is conserved
    exactly.  Returns a new state (the generator advances in place).
    """
    if not (dt > 0.0):
        raise ValueError("dt must be positive")
    left, right = rate_arrays(s)
    max_rate = max(float(left.max()), float(right.max()), 0.0)
    if dt * max_rate > LEAP_LIMIT * (1.0 + 1e-9):
        raise ValueError(
            "leap condition violated: dt * max_rate = %g exceeds %g"
            % (dt * max_rate, LEAP_LIMIT)
        )
    p_left = left * dt
    p_right = right * dt
    stay = 1.0 - p_left - p_right
    pvals = np.stack([p_left, p_right, stay], axis=-1)
    moves = s.rng.multinomial(s.occupancy, pvals)
    go_left = moves[:, 0]
    go_right = moves[:, 1]

    occ = s.occupancy - go_left - go_right
    occ[:-1] += go_left[1:]
    occ[1:] += go_right[:-1]

    cap = OVERFLOW_FACTOR * s.u_max
    if np.any(occ > cap):
        raise ValueError("occupancy exceeded the overflow cap %d during a leap" % cap)
    violations = s.capacity_violations + int(np.count_nonzero(occ > s.u_max))

    return LatticeState(
        occupancy=occ,
        u_max=s.u_max,
        v=s.v,
        z=s.z,
        m=s.m,
        alpha=s.alpha,
        beta_sens=s.beta_sens,
        tau_of_v=s.tau_of_v,
        kernel=s.kernel,
        seed=s.seed,
        spacing=s.spacing,
        origin=s.origin,
        capacity_violations=violations,
        rng=s.rng,
    )


def run_adaptive(s: LatticeState, t_end: float, leap_fraction: float = 0.5):
    """Leap to t_end, each step sized at leap_fraction of the allowed limit.

    Returns (state, t_reached, steps).  leap_fraction in (0, 1] trades steps
    for leap bias.
    """
    if not (0.0 < leap_fraction <= 1.0):
        raise ValueError("leap_fraction must lie in (0, 1], got %r" % leap_fraction)
    t = 0.0
    steps = 0
    while t < t_end * (1.0 - 1e-12):
        left, right = rate_arrays(s)
        max_rate = max(float(left.max()), float(right.max()))
        if max_rate <= 0.0:
            break  # frozen configuration, nothing will ever move
        dt = min(leap_fraction * LEAP_LIMIT / max_rate, t_end - t)
        s = step_tau_leap(s, dt)
        t += dt
        steps += 1
    return s, t, steps


def coarse_density(s: LatticeState, cells_per_bin: int) -> Field:
    """Bin the relative density onto the matching finite-volume grid.

    sites must divide evenly into bins; the result lives on a 1D Grid with
    the same total extent and origin as the lattice.
    """
    if not (isinstance(cells_per_bin, (int, np.integer)) and cells_per_bin >= 1):
        raise ValueError("cells_per_bin must be a positive integer")
    if s.sites % cells_per_bin != 0:
        raise ValueError(
            "sites (%d) must be a multiple of cells_per_bin (%d)" % (s.sites, cells_per_bin)
        )
    n_bins = s.sites // cells_per_bin
    dens = s.relative_density().reshape(n_bins, cells_per_bin).mean(axis=1)
    grid = Grid(
        cells=(n_bins,),
        extent=(s.sites * s.spacing,),
        origin=(s.origin,),
    )
    return Field(grid, dens)
