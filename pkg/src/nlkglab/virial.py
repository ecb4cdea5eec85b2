"""Monitoring functionals evaluated along modulated trajectories.

Five bilinear forms watch a run: one resonance-pairing functional built on
the distorted wave, two first-stage virial forms on eta, and two second-stage
forms on the transformed variable v.  Each form comes with an analytic time
derivative assembled from the modulation splitting, so recorded series can be
checked against centered differences frame by frame.

Scale defaults (A = 40, B = 10, kappa = 0.1, eps = 0.3) put the weights in a
qualitative regime: the functionals are well defined, but no constant
hierarchy between the scales is claimed, and outputs are labeled accordingly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Grid, ParityField, StatePair, integrate_even, pair_J
from .refined import (Decomposition, ProfileConfig, RefinedProfile, decompose,
                      modulation_rhs)
from .scattering import DistortedWave, distorted_wave, g2_vector
from .soliton import constants
from .spectrum import transform_T
from .weights import (WeightSet, apply_S_A, apply_S_AB, apply_sigma3, chi_d1,
                      chi_d2, norm_l2_minus_kappa, norm_sigma_A, weight_set)


def _re_pair_J(u: StatePair, v: StatePair) -> float:
    return float(np.real(pair_J(u, v)))


def _fgr_field(z2: complex, g2: StatePair, ws: WeightSet) -> StatePair:
    """chi_A (z2^2 g2 + conjugate), a real pair."""
    g = g2.grid
    w1 = 2.0 * np.real(z2 * z2 * g2.u1.values) * ws.chi_A
    w2 = 2.0 * np.real(z2 * z2 * g2.u2.values) * ws.chi_A
    return StatePair(ParityField(g, w1, g2.u1.parity),
                     ParityField(g, w2, g2.u2.parity))


def functional_fgr(dec: Decomposition, wave: DistortedWave, ws: WeightSet,
                   c_coef: complex = 1.0 + 0.0j) -> float:
    """<J eta, chi_A (z2^2 g2 + c.c.)> with g2 scaled by c_coef."""
    g2 = g2_vector(wave, c_coef)
    return _re_pair_J(dec.eta, _fgr_field(dec.z.z2, g2, ws))


def functional_virial_1(eta: StatePair, ws: WeightSet):
    """The pair (1/2 <J eta, S_A eta>, 1/2 <J eta, sigma3 zeta_A^4 eta>)."""
    main = 0.5 * _re_pair_J(eta, apply_S_A(eta, ws))
    wgt = 0.5 * _re_pair_J(eta, apply_sigma3(eta, ws.zeta_A**4))
    return main, wgt


@dataclass
class Virial2Result:
    i2nd_1: float
    i2nd_2: float
    xi1: ParityField
    coercive_form: float


def coercive_potential(ws: WeightSet, p: float) -> np.ndarray:
    """Localization potential of the second-stage quadratic form.

    The first piece comes from the unit-scale cutoff inside zeta_B and lives
    on 1 <= |x| <= 2; the second is the repulsive-barrier contribution, which
    vanishes identically at p = 2.
    """
    x = ws.grid.x
    c = constants(p)
    B = ws.config.B
    first = 0.5 / B * (chi_d2(x) * np.abs(x) + 2.0 * chi_d1(x) * np.sign(x))
    a = 0.5 * (p - 1.0)
    kk = float(c.k[c.N] * c.k[c.N + 1])
    sech = 1.0 / np.cosh(a * x)
    v_final_d1 = 2.0 * a * kk * sech**2 * np.tanh(a * x)
    second = -0.5 * (ws.phi_B / ws.zeta_B**2) * v_final_d1
    return first + second


def functional_virial_2(v: StatePair, ws: WeightSet, p: float) -> Virial2Result:
    """Second-stage forms on v = T eta, plus the localized coercivity data."""
    from .fields import deriv1

    main = 0.5 * _re_pair_J(v, apply_S_AB(v, ws))
    wgt = 0.5 * _re_pair_J(v, apply_sigma3(v, ws.exp_kappa_bracket))
    xi1 = ParityField(v.grid, ws.chi_A * ws.zeta_B * np.real(v.u1.values),
                      v.u1.parity)
    vb = coercive_potential(ws, p)
    d1 = deriv1(xi1).values
    form = float(integrate_even(v.grid, d1 * d1 + vb * xi1.values**2))
    return Virial2Result(i2nd_1=main, i2nd_2=wgt, xi1=xi1, coercive_form=form)


# ---------------------------------------------------------------------------
# per-frame evaluation with analytic rates


@dataclass
class FunctionalFrame:
    t: float
    z1: complex
    z2: complex
    fgr: float
    i1st_1: float
    i1st_2: float
    i2nd_1: float
    i2nd_2: float
    coercive_form: float
    rate_fgr: float
    rate_i1st_1: float
    rate_i1st_2: float
    rate_i2nd_1: float
    rate_i2nd_2: float
    eta_sigma: float
    eta_kappa: float
    transform_ratio: float
    transform_tail: float
    bound_ratio: float


def _sponge_tail_norm(v: StatePair) -> float:
    g = v.grid
    mask = g.x >= g.L - g.sponge_width
    vals = (np.abs(v.u1.values) ** 2 + np.abs(v.u2.values) ** 2) * mask
    return float(np.sqrt(integrate_even(g, vals)))


def evaluate_frame(u: StatePair, t: float, prof: RefinedProfile,
                   ws: WeightSet, wave: DistortedWave,
                   c_coef: complex = 1.0 + 0.0j,
                   prof_config: ProfileConfig = ProfileConfig()) -> FunctionalFrame:
    """All functionals and their analytic time derivatives at one state.

    Pure in its inputs, so a batch of recorded frames can be evaluated in
    parallel and in any order.
    """
    p = prof.p
    dec = decompose(u, prof, prof_config)
    eta = dec.eta
    eps = ws.config.eps
    v = transform_T(eta, p, eps)

    g2 = g2_vector(wave, c_coef)
    fgr = _re_pair_J(eta, _fgr_field(dec.z.z2, g2, ws))
    i11, i12 = functional_virial_1(eta, ws)
    v2 = functional_virial_2(v, ws, p)

    eta_dot, zdot = modulation_rhs(dec, prof)
    v_dot = transform_T(eta_dot, p, eps)
    w_now = _fgr_field(dec.z.z2, g2, ws)
    w_dot = _fgr_field_rate(dec.z.z2, complex(zdot[1]), g2, ws)
    rate_fgr = _re_pair_J(eta_dot, w_now) + _re_pair_J(eta, w_dot)
    rate_i11 = 0.5 * (_re_pair_J(eta_dot, apply_S_A(eta, ws))
                      + _re_pair_J(eta, apply_S_A(eta_dot, ws)))
    rate_i12 = 0.5 * (_re_pair_J(eta_dot, apply_sigma3(eta, ws.zeta_A**4))
                      + _re_pair_J(eta, apply_sigma3(eta_dot, ws.zeta_A**4)))
    rate_i21 = 0.5 * (_re_pair_J(v_dot, apply_S_AB(v, ws))
                      + _re_pair_J(v, apply_S_AB(v_dot, ws)))
    rate_i22 = 0.5 * (_re_pair_J(v_dot, apply_sigma3(v, ws.exp_kappa_bracket))
                      + _re_pair_J(v, apply_sigma3(v_dot, ws.exp_kappa_bracket)))

    n_sig = norm_sigma_A(eta, ws.config.A)
    n_kap = norm_l2_minus_kappa(eta, ws.config.kappa)
    comb = np.hypot(n_sig, n_kap)
    ratio = norm_l2_minus_kappa(v, 0.5 * ws.config.kappa) / max(comb, 1e-300)
    bound = abs(i11) / (ws.config.A * max(prof_config.delta_ball, 1e-300) ** 2)
    return FunctionalFrame(
        t=t, z1=dec.z.z1, z2=dec.z.z2, fgr=fgr, i1st_1=i11, i1st_2=i12,
        i2nd_1=v2.i2nd_1, i2nd_2=v2.i2nd_2, coercive_form=v2.coercive_form,
        rate_fgr=rate_fgr, rate_i1st_1=rate_i11, rate_i1st_2=rate_i12,
        rate_i2nd_1=rate_i21, rate_i2nd_2=rate_i22,
        eta_sigma=n_sig, eta_kappa=n_kap, transform_ratio=ratio,
        transform_tail=_sponge_tail_norm(v), bound_ratio=bound)


def _fgr_field_rate(z2: complex, z2dot: complex, g2: StatePair,
                    ws: WeightSet) -> StatePair:
    g = g2.grid
    w1 = 2.0 * np.real(2.0 * z2 * z2dot * g2.u1.values) * ws.chi_A
    w2 = 2.0 * np.real(2.0 * z2 * z2dot * g2.u2.values) * ws.chi_A
    return StatePair(ParityField(g, w1, g2.u1.parity),
                     ParityField(g, w2, g2.u2.parity))


FUNCTIONAL_NAMES = ("fgr", "i1st_1", "i1st_2", "i2nd_1", "i2nd_2")


def evaluate_series(states, prof: RefinedProfile, ws: WeightSet = None,
                    wave: DistortedWave = None,
                    c_coef: complex = 1.0 + 0.0j,
                    prof_config: ProfileConfig = ProfileConfig()):
    """Frames for a (t, state) sequence, shared wave and weights."""
    if ws is None:
        ws = weight_set(prof.grid)
    if wave is None:
        wave = distorted_wave(prof.grid, prof.p)
    return [evaluate_frame(u, t, prof, ws, wave, c_coef, prof_config)
            for t, u in states]


def ddt_consistency(frames) -> dict:
    """Max |centered FD - analytic rate| per functional, relative to the
    largest analytic rate of that functional over the series."""
    t = np.array([f.t for f in frames])
    report = {}
    for name in FUNCTIONAL_NAMES:
        vals = np.array([getattr(f, name) for f in frames])
        rates = np.array([getattr(f, "rate_" + name) for f in frames])
        scale = float(np.max(np.abs(rates)))
        worst = 0.0
        for k in range(1, len(frames) - 1):
            fd = (vals[k + 1] - vals[k - 1]) / (t[k + 1] - t[k - 1])
            worst = max(worst, abs(fd - rates[k]))
        report[name] = worst / max(scale, 1e-300)
    return report


# ---------------------------------------------------------------------------
# cumulative budgets along an evolution trajectory


@dataclass
class BudgetReport:
    resid_sq: float       # int |zdot - ztilde|^2
    z1_sq: float          # int |z1|^2
    z2_quartic: float     # int |z2|^4
    eta_sq: float         # int (|eta|_{Sigma_A}^2 + |eta|_{L2,-kappa}^2)
    tail_resid: float
    tail_z1: float
    tail_z2: float
    tail_eta: float


def _integral_and_tail(t: np.ndarray, q: np.ndarray, frac: float = 0.75):
    good = np.isfinite(q)
    tt, qq = t[good], q[good]
    if len(tt) < 3:
        return float("nan"), float("nan")
    total = float(np.trapezoid(qq, tt))
    mask = tt >= frac * tt[-1]
    tail = float(np.trapezoid(qq[mask], tt[mask]))
    return total, tail / total if total > 0.0 else 0.0


def trajectory_budgets(traj) -> BudgetReport:
    """Cumulative smallness integrals of a recorded run, with the fraction
    contributed by the last quarter of the time window."""
    t = traj.t
    r_sq, r_tail = _integral_and_tail(t, traj.zdot_minus_ztilde**2)
    z1_sq, z1_tail = _integral_and_tail(t, np.abs(traj.z[:, 0])**2)
    z2_q, z2_tail = _integral_and_tail(t, traj.abs_z2**4)
    eta_q = traj.eta_sigma_a**2 + traj.eta_l2_kappa**2
    eta_sq, eta_tail = _integral_and_tail(t, eta_q)
    return BudgetReport(resid_sq=r_sq, z1_sq=z1_sq, z2_quartic=z2_q,
                        eta_sq=eta_sq, tail_resid=r_tail, tail_z1=z1_tail,
                        tail_z2=z2_tail, tail_eta=eta_tail)


__all__ = [
    "Virial2Result", "FunctionalFrame", "BudgetReport", "FUNCTIONAL_NAMES",
    "functional_fgr", "functional_virial_1", "functional_virial_2",
    "coercive_potential", "evaluate_frame", "evaluate_series",
    "ddt_consistency", "trajectory_budgets",
]
