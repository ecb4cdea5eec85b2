"""Leapfrog evolution of the even pair system with a soft absorbing edge.

The interior scheme is velocity Verlet on the second-order form: symplectic,
time-reversible, parity-preserving by construction on the half-line storage.
The absorbing edge multiplies u2 by exp(-sigma dt/2) on both sides of each
conservative step (Strang split), so the core stays clean and switching the
edge off recovers exact reversibility.

Soliton-centered runs carry a genuine even instability with rate nu0.
Discretization residuals seed that direction at ~1e-8, so it surfaces around
t ~ 10/nu0 no matter how clean the data is; short horizons measure the honest
discrete dynamics, and suppress_unstable zeroes the unstable coordinate at
each record point, the numerical analogue of holding the state on the center
hypersurface.
"""
import math
from dataclasses import dataclass

import numpy as np

from .fields import (Grid, ParityField, StatePair, deriv1, deriv2, even_field,
                     inner, integrate_even)
from .refined import (DecompositionError, ProfileConfig, RefinedProfile,
                      decompose, ztilde)
from .soliton import f_nonlin
from .weights import norm_l2_minus_kappa, norm_sigma_A, smoothstep


class BlowupError(RuntimeError):
    """Non-finite or runaway state; carries the time of detection."""

    def __init__(self, t: float):
        super().__init__(f"state blew up at t = {t:.6g}")
        self.t = t


class ShootingError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionConfig:
    dt_factor: float = 0.25       # dt = dt_factor * dx; Verlet stability needs < 0.86
    t_final: float = 50.0
    record_stride: int = 10
    sponge_strength: float = 2.5
    escape_factor: float = 5.0
    escape_radius: float = 0.0    # 0 means escape_factor * initial z modulus
    blowup_sup: float = 1e3
    suppress_unstable: bool = False
    track_modes: bool = True      # False: integrate only, no mode decomposition
    kappa: float = 0.1
    weight_scale: float = 40.0

    def __post_init__(self):
        if not 0.0 < self.dt_factor <= 0.5:
            raise ValueError(f"dt_factor {self.dt_factor} outside (0, 0.5]")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class Trajectory:
    t: np.ndarray
    z: np.ndarray                 # (m, 2) complex amplitudes, NaN when untracked
    ztilde: np.ndarray            # (m, 2) complex target velocities
    energy: np.ndarray
    eta_sigma_a: np.ndarray
    eta_l2_kappa: np.ndarray
    eta_h1_a: np.ndarray
    zdot_minus_ztilde: np.ndarray  # centered-difference residual, NaN at the ends
    status: str                   # completed | escaped_unstable | left_ball
    final_state: StatePair
    final_time: float
    dt: float
    classification: float         # sign of Re z1 at the last record

    @property
    def abs_z2(self) -> np.ndarray:
        return np.abs(self.z[:, 1])


def sponge_sigma(grid: Grid, strength: float) -> np.ndarray:
    """Damping rate: zero in the interior, smooth ramp over the edge band."""
    start = grid.L - grid.sponge_width
    ramp = (grid.x - start) / grid.sponge_width
    return strength * smoothstep(ramp)


def nlkg_rhs(u: StatePair, p: float, sigma: np.ndarray = None) -> StatePair:
    acc = deriv2(u.u1).values - u.u1.values + f_nonlin(u.u1.values, p)
    if sigma is not None:
        acc = acc - sigma * u.u2.values
    return StatePair(u.u2, even_field(u.grid, acc))


def energy(u: StatePair, p: float) -> float:
    """Conserved field energy of the undamped flow.

    The quadratic part is the full first-order form, mass term included;
    without it d/dt E = -int u1 u2, which the flow does not conserve.
    """
    g = u.grid
    d1 = deriv1(u.u1).values
    quad = integrate_even(g, d1 * d1 + u.u1.values ** 2 + u.u2.values ** 2)
    pot = integrate_even(g, np.abs(u.u1.values) ** (p + 1.0)) / (p + 1.0)
    return float(0.5 * np.real(quad) - np.real(pot))


def _force(u1: ParityField, p: float) -> np.ndarray:
    return deriv2(u1).values - u1.values + f_nonlin(u1.values, p)


def step(u: StatePair, dt: float, p: float,
         sigma: np.ndarray = None) -> StatePair:
    """One velocity-Verlet step with half-step edge damping on both sides."""
    g = u.grid
    u2 = u.u2.values.copy()
    if sigma is not None:
        u2 = u2 * np.exp(-0.5 * dt * sigma)
    u2 = u2 + 0.5 * dt * _force(u.u1, p)
    u1 = u.u1.values + dt * u2
    f1 = even_field(g, u1)
    u2 = u2 + 0.5 * dt * _force(f1, p)
    if sigma is not None:
        u2 = u2 * np.exp(-0.5 * dt * sigma)
    return StatePair(f1, even_field(g, u2))


def _pair_dot(u: StatePair, v: StatePair) -> float:
    return float(np.real(inner(u.u1, v.u1) + inner(u.u2, v.u2)))


def pair_h1_norm(u: StatePair) -> float:
    d1 = deriv1(u.u1)
    return math.sqrt(_pair_dot(u, u) + float(np.real(inner(d1, d1))))


def _eta_h1_weighted(eta: StatePair, a: float) -> float:
    g = eta.grid
    w = 1.0 / np.cosh(a * g.x)
    prod = even_field(g, w * eta.u1.values)
    dp = deriv1(prod).values
    val = (integrate_even(g, np.abs(dp) ** 2)
           + integrate_even(g, np.abs(prod.values) ** 2)
           + integrate_even(g, np.abs(w * eta.u2.values) ** 2))
    return float(np.sqrt(np.real(val)))


def evolve(u0: StatePair, config: EvolutionConfig, prof: RefinedProfile,
           prof_config: ProfileConfig = ProfileConfig(),
           on_record=None) -> Trajectory:
    """Step the system, recording modulation data every record_stride steps.

    With track_modes off the run only records energy and stops on t_final or
    blowup; mode columns are NaN and eta norms are computed on u - Qi.
    on_record, when given, is called as on_record(t, u) at every recorded
    frame; checkpoint writers hook in here.
    """
    g = u0.grid
    p = prof.p
    dt = config.dt_factor * g.dx
    sigma = sponge_sigma(g, config.sponge_strength)
    if not np.any(sigma > 0.0):
        sigma = None

    times, zs, zts, energies = [], [], [], []
    n_sig, n_kap, n_h1 = [], [], []
    status = "completed"
    u = u0.copy()
    acc = _force(u.u1, p)
    delta_esc = config.escape_radius
    steps_total = int(round(config.t_final / dt))
    exp_half = np.exp(-0.5 * dt * sigma) if sigma is not None else None
    nan_pair = (complex(np.nan), complex(np.nan))

    n_step = 0
    while True:
        t = n_step * dt
        sup = max(np.max(np.abs(u.u1.values)), np.max(np.abs(u.u2.values)))
        if not np.isfinite(sup) or sup > config.blowup_sup:
            raise BlowupError(t)
        if config.track_modes:
            try:
                dec = decompose(u, prof, prof_config)
            except DecompositionError:
                status = "left_ball"
                break
            if config.suppress_unstable:
                zr = dec.z.as_real()
                if zr[0] != 0.0:
                    u = u - prof.directions[0] * zr[0]
                    acc = _force(u.u1, p)
                    dec = decompose(u, prof, prof_config)
            # arm the escape check off the first record; a near-zero start
            # (plain Qi) leaves it disabled rather than tripping on roundoff
            if n_step == 0 and delta_esc == 0.0 and config.escape_factor > 0.0 \
                    and dec.z.modulus > 1e-6:
                delta_esc = config.escape_factor * dec.z.modulus
            times.append(t)
            zs.append((dec.z.z1, dec.z.z2))
            zts.append(tuple(ztilde(dec.z, prof)))
            energies.append(energy(u, p))
            eta = dec.eta
            n_sig.append(norm_sigma_A(eta, config.weight_scale))
            n_kap.append(norm_l2_minus_kappa(eta, config.kappa))
            n_h1.append(_eta_h1_weighted(eta, config.kappa))
            if on_record is not None:
                on_record(t, u)
            if delta_esc > 0.0 and abs(dec.z.z1) > delta_esc:
                status = "escaped_unstable"
                break
            if not dec.in_ball:
                status = "left_ball"
                break
        else:
            times.append(t)
            zs.append(nan_pair)
            zts.append(nan_pair)
            energies.append(energy(u, p))
            diff = u - prof.qi
            n_sig.append(norm_sigma_A(diff, config.weight_scale))
            n_kap.append(norm_l2_minus_kappa(diff, config.kappa))
            n_h1.append(_eta_h1_weighted(diff, config.kappa))
            if on_record is not None:
                on_record(t, u)
        if n_step >= steps_total:
            break
        for _ in range(min(config.record_stride, steps_total - n_step)):
            u2v = u.u2.values
            if exp_half is not None:
                u2v = u2v * exp_half
            u2v = u2v + 0.5 * dt * acc
            u1v = u.u1.values + dt * u2v
            f1 = even_field(g, u1v)
            acc = _force(f1, p)
            u2v = u2v + 0.5 * dt * acc
            if exp_half is not None:
                u2v = u2v * exp_half
            u = StatePair(f1, even_field(g, u2v))
            n_step += 1

    t_arr = np.array(times)
    z_arr = np.array(zs, dtype=complex).reshape(-1, 2)
    zt_arr = np.array(zts, dtype=complex).reshape(-1, 2)
    m = len(times)
    resid = np.full(m, np.nan)
    if m >= 3 and config.track_modes:
        dt_rec = np.diff(t_arr)
        for k in range(1, m - 1):
            zdot = (z_arr[k + 1] - z_arr[k - 1]) / (dt_rec[k - 1] + dt_rec[k])
            resid[k] = np.linalg.norm(zdot - zt_arr[k])
    cls = 0.0
    if m and config.track_modes:
        cls = float(np.sign(np.real(z_arr[-1, 0])))
    return Trajectory(
        t=t_arr, z=z_arr, ztilde=zt_arr, energy=np.array(energies),
        eta_sigma_a=np.array(n_sig), eta_l2_kappa=np.array(n_kap),
        eta_h1_a=np.array(n_h1), zdot_minus_ztilde=resid, status=status,
        final_state=u, final_time=float(t_arr[-1]) if m else 0.0, dt=dt,
        classification=cls)


def fit_decay_exponent(traj: Trajectory, start_frac: float = 0.5) -> float:
    """Log-log slope of |z2| against t over the trailing window."""
    mask = (traj.t >= start_frac * traj.t[-1]) & (traj.abs_z2 > 0.0)
    if np.count_nonzero(mask) < 3:
        raise ValueError("trailing window too short for a decay fit")
    coef = np.polyfit(np.log(traj.t[mask]), np.log(traj.abs_z2[mask]), 1)
    return float(coef[0])


def fit_growth_rate(traj: Trajectory, lo: float, hi: float) -> float:
    """E-folding rate of |Re z1| over the amplitude band [lo, hi]."""
    amp = np.abs(np.real(traj.z[:, 0]))
    mask = (amp > lo) & (amp < hi)
    if np.count_nonzero(mask) < 3:
        raise ValueError("amplitude band too narrow for a rate fit")
    coef = np.polyfit(traj.t[mask], np.log(amp[mask]), 1)
    return float(coef[0])


# ---------------------------------------------------------------------------
# shooting onto the center hypersurface


@dataclass
class ShootResult:
    a_star: float
    trajectory: Trajectory
    eps_norm: float
    bound_constant: float        # |a*| / eps_norm^{(p+1)/2}
    evaluations: int
    bracket: tuple


def project_out_zplus(eps: StatePair, prof: RefinedProfile) -> StatePair:
    """Remove the component along (phi0, phi0/nu0) in the plain pairing."""
    zplus = StatePair(prof.phi0, prof.phi0 * (1.0 / prof.consts.nu0))
    coef = _pair_dot(eps, zplus) / _pair_dot(zplus, zplus)
    return eps - zplus * coef


def shoot_center(eps_pert: StatePair, a_range: tuple,
                 config: EvolutionConfig, prof: RefinedProfile,
                 prof_config: ProfileConfig = ProfileConfig(),
                 tol: float = 1e-10) -> ShootResult:
    """Bisect the unstable-direction coefficient onto the non-escaping set.

    Each trial runs Qi + eps + a Y+ and is classified by the sign of Re z1 at
    the last record; an escape before t_final/2 at the returned a* means the
    bracket never tightened onto the surface.
    """
    eps = project_out_zplus(eps_pert, prof)
    yplus = prof.directions[0]
    evaluations = 0

    def run(a: float) -> Trajectory:
        nonlocal evaluations
        evaluations += 1
        return evolve(prof.qi + eps + yplus * a, config, prof, prof_config)

    a_lo, a_hi = float(min(a_range)), float(max(a_range))
    s_lo = run(a_lo).classification
    s_hi = run(a_hi).classification
    if s_lo == s_hi or s_lo == 0.0 or s_hi == 0.0:
        raise ShootingError(
            f"no sign change over [{a_lo:.3e}, {a_hi:.3e}]; widen the range")
    while a_hi - a_lo > tol:
        mid = 0.5 * (a_lo + a_hi)
        if run(mid).classification == s_hi:
            a_hi = mid
        else:
            a_lo = mid
    a_star = 0.5 * (a_lo + a_hi)
    traj = run(a_star)
    if traj.status != "completed" and traj.final_time < 0.5 * config.t_final:
        raise ShootingError(
            f"run at a* left the ball at t = {traj.final_time:.3g}, "
            f"before t_final/2 = {0.5 * config.t_final:.3g}")
    eps_norm = pair_h1_norm(eps)
    expo = 0.5 * (prof.p + 1.0)
    bound_c = abs(a_star) / eps_norm ** expo if eps_norm > 0.0 else 0.0
    return ShootResult(a_star=a_star, trajectory=traj, eps_norm=eps_norm,
                       bound_constant=bound_c, evaluations=evaluations,
                       bracket=(a_lo, a_hi))


def shooting_slope(shape: StatePair, magnitudes, config: EvolutionConfig,
                   prof: RefinedProfile,
                   prof_config: ProfileConfig = ProfileConfig()):
    """Fit log|a*| against log eps over rescaled copies of one perturbation.

    Returns (slope, results); the bisection range for each magnitude scales
    with the theoretical bound shape so brackets stay tight.
    """
    results = []
    for mag in magnitudes:
        eps = shape * float(mag)
        width = 10.0 * max(float(mag) ** (0.5 * (prof.p + 1.0)), 1e-6)
        res = shoot_center(eps, (-width, width), config, prof, prof_config)
        results.append(res)
    xs = np.log([r.eps_norm for r in results])
    ys = np.log([max(abs(r.a_star), 1e-16) for r in results])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, results


__all__ = [
    "BlowupError", "ShootingError", "EvolutionConfig", "Trajectory",
    "sponge_sigma", "nlkg_rhs", "energy", "step", "evolve",
    "fit_decay_exponent", "fit_growth_rate", "ShootResult",
    "project_out_zplus", "shoot_center", "shooting_slope", "pair_h1_norm",
]
