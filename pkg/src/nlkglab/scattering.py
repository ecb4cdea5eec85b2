"""Distorted plane waves and the radiation-damping coefficient.

The internal oscillator frequency sits at twice its own value inside the
continuous spectrum, so the quadratic coefficient field pairs against a
generalized eigenfunction at energy 4 lam^2.  The coefficient gamma comes out
two ways: the direct pairing with the quadratic coefficient field, and the
reduced integral against the soliton-power source.  The two differ only by
discrete-mode contributions that pair to zero against the wave, which is the
cross-check carried through every scan.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .fields import (
    Grid, ParityField, StatePair, even_field, inner, integrate_even, pair_J,
)
from .refined import CorrectorData, RefinedProfile, build_profile, g2_coefficient
from .soliton import P_MIN, Q_power, Q_values, constants
from .spectrum import apply_L


class FarFieldFitError(RuntimeError):
    """Far-field window does not look sinusoidal: domain too short."""


class ScanRefusal(ValueError):
    """Exponent too close to the lower endpoint for a trustworthy integrand."""


@dataclass(frozen=True)
class ScatteringConfig:
    fit_tol: float = 1e-6          # relative far-field fit residual
    agreement_tol: float = 1e-4    # pairing-vs-reduced relative mismatch
    dip_factor: float = 1e-3       # |gamma| below factor*median flags a dip
    p_margin: float = 1e-3         # refuse p <= 5/3 + margin in scans


@dataclass(frozen=True)
class DistortedWave:
    p: float
    energy: float
    xi: float
    g: ParityField                 # even generalized eigenfunction, real values
    gp: np.ndarray                 # derivative from the integrator
    amp: complex                   # asymptotic amplitude a, |2a| = 1 after scaling
    fit_residual: float
    normalization: str = "unit-asymptotic"


@dataclass(frozen=True)
class FgrSample:
    p: float
    xi: float
    gamma_pairing: complex
    gamma_reduced: complex
    gamma_abs: float
    phase: float
    agreement: float
    c: complex
    flags: tuple = ()


def _potential_nodes(grid: Grid, p: float):
    """-p Q^{p-1} at nodes and at midpoints, from the closed soliton form."""
    qn = Q_values(grid.x, p)
    qm = Q_values(grid.x[:-1] + 0.5 * grid.dx, p)
    return -p * qn ** (p - 1.0), -p * qm ** (p - 1.0)


def _integrate_even(grid: Grid, p: float, energy: float, g0: float, gp0: float):
    """Grid-locked RK4 for g'' = (V + 1 - E) g from the origin outward."""
    vn, vm = _potential_nodes(grid, p)
    wn = vn + 1.0 - energy
    wm = vm + 1.0 - energy
    h = grid.dx
    g = np.empty(grid.n)
    gp = np.empty(grid.n)
    g[0], gp[0] = g0, gp0
    y1, y2 = g0, gp0
    for i in range(grid.n - 1):
        w0, wh, w1 = wn[i], wm[i], wn[i + 1]
        k1a = y2
        k1b = w0 * y1
        k2a = y2 + 0.5 * h * k1b
        k2b = wh * (y1 + 0.5 * h * k1a)
        k3a = y2 + 0.5 * h * k2b
        k3b = wh * (y1 + 0.5 * h * k2a)
        k4a = y2 + h * k3b
        k4b = w1 * (y1 + h * k3a)
        y1 = y1 + (h / 6.0) * (k1a + 2 * k2a + 2 * k3a + k4a)
        y2 = y2 + (h / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b)
        g[i + 1] = y1
        gp[i + 1] = y2
    return g, gp


def _far_window(grid: Grid) -> np.ndarray:
    return grid.x >= grid.L - grid.sponge_width


def _fit_sinusoid(grid: Grid, vals: np.ndarray, xi: float):
    win = _far_window(grid)
    xw = grid.x[win]
    design = np.stack([np.cos(xi * xw), np.sin(xi * xw)], axis=1)
    beta, *_ = np.linalg.lstsq(design, vals[win], rcond=None)
    resid = float(np.linalg.norm(vals[win] - design @ beta)
                  / max(np.linalg.norm(vals[win]), 1e-300))
    c, d = beta
    return complex(c, -d) / 2.0, resid


def distorted_wave(grid: Grid, p: float,
                   config: ScatteringConfig = ScatteringConfig()) -> DistortedWave:
    c = constants(p)
    energy = 4.0 * c.mu[2]
    if energy <= 1.0:
        raise ValueError("energy at or below the continuum edge")
    xi = math.sqrt(energy - 1.0)
    vn, _ = _potential_nodes(grid, p)
    if np.max(np.abs(vn[_far_window(grid)])) > 1e-15:
        raise FarFieldFitError("potential not negligible in fit window")
    g, gp = _integrate_even(grid, p, energy, 1.0, 0.0)
    amp, resid = _fit_sinusoid(grid, g, xi)
    if resid > config.fit_tol:
        raise FarFieldFitError(f"far-field fit residual {resid:.3e}")
    scale = 2.0 * abs(amp)
    return DistortedWave(p=p, energy=energy, xi=xi,
                         g=even_field(grid, g / scale), gp=gp / scale,
                         amp=amp / scale, fit_residual=resid)


def wronskian_drift(grid: Grid, p: float) -> float:
    """Relative drift of the Wronskian of the even and odd solutions."""
    c = constants(p)
    energy = 4.0 * c.mu[2]
    ge, gep = _integrate_even(grid, p, energy, 1.0, 0.0)
    go, gop = _integrate_even(grid, p, energy, 0.0, 1.0)
    w = ge * gop - gep * go
    return float(np.max(np.abs(w - w[0])) / abs(w[0]))


def wave_residual(wave: DistortedWave, weight_kappa: float = 0.1) -> float:
    """Weighted eigenvalue-equation residual of the wave."""
    grid = wave.g.grid
    r = apply_L(wave.g, wave.p, 0) - wave.g * wave.energy
    sech = 1.0 / np.cosh(weight_kappa * grid.x)
    return math.sqrt(integrate_even(grid, (sech * r.values) ** 2))


def g2_vector(wave: DistortedWave, c_coef: complex) -> StatePair:
    lam = constants(wave.p).lam
    gv = wave.g.values
    return StatePair(
        ParityField(wave.g.grid, c_coef * gv, "even"),
        ParityField(wave.g.grid, 2j * lam * c_coef * gv, "even"),
    )


def fgr_gamma(grid: Grid, p: float,
              wave: DistortedWave = None,
              corrector_data: CorrectorData = None,
              profile: RefinedProfile = None,
              c_override: complex = None,
              config: ScatteringConfig = ScatteringConfig()) -> FgrSample:
    """Damping coefficient by pairing, with the reduced-integral cross-check."""
    if wave is None:
        wave = distorted_wave(grid, p, config)
    if corrector_data is None:
        if profile is None:
            profile = build_profile(grid, p)
        corrector_data = g2_coefficient(profile)
    reduced_integral = inner(
        even_field(grid, Q_power(grid.x, p, p - 2.0)
                   * _phi2_values(grid, p, profile) ** 2),
        wave.g)
    if c_override is None:
        sign = -1.0 if reduced_integral > 0 else 1.0
        c_coef = complex(sign)
    else:
        c_coef = complex(c_override)
    gamma_reduced = -np.conj(c_coef) * p * (p - 1.0) * reduced_integral
    g2vec = g2_vector(wave, c_coef)
    gamma_pairing = complex(pair_J(corrector_data.g2, g2vec))
    agreement = abs(gamma_pairing - gamma_reduced) / max(abs(gamma_pairing), 1e-300)
    flags = () if agreement < config.agreement_tol else ("agreement",)
    return FgrSample(p=p, xi=wave.xi,
                     gamma_pairing=gamma_pairing, gamma_reduced=gamma_reduced,
                     gamma_abs=abs(gamma_pairing),
                     phase=float(np.angle(gamma_pairing)),
                     agreement=agreement, c=c_coef, flags=flags)


def _phi2_values(grid: Grid, p: float, profile: RefinedProfile = None) -> np.ndarray:
    if profile is not None:
        return profile.phi2.values
    from .spectrum import bound_state
    return bound_state(grid, p, 2).values


def _scan_one(args):
    grid_args, p = args
    grid = Grid(*grid_args)
    try:
        return fgr_gamma(grid, p)
    except Exception as exc:   # per-sample isolation: scan must continue
        return FgrSample(p=p, xi=float("nan"),
                         gamma_pairing=complex("nan"), gamma_reduced=complex("nan"),
                         gamma_abs=float("nan"), phase=float("nan"),
                         agreement=float("nan"), c=complex("nan"),
                         flags=(f"fault:{type(exc).__name__}",))


def fgr_scan(p_values, grid: Grid,
             config: ScatteringConfig = ScatteringConfig(),
             workers: int = 1):
    """Independent per-exponent samples, sorted by p, dips flagged."""
    p_values = sorted(float(p) for p in p_values)
    for p in p_values:
        if p <= P_MIN + config.p_margin:
            raise ScanRefusal(f"p = {p} too close to the lower endpoint")
    grid_args = (grid.L, grid.n, grid.sponge_width)
    jobs = [(grid_args, p) for p in p_values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(_scan_one, jobs))   # index-ordered
    else:
        samples = [_scan_one(j) for j in jobs]
    finite = [s.gamma_abs for s in samples if np.isfinite(s.gamma_abs)]
    if finite:
        med = float(np.median(finite))
        out = []
        for s in samples:
            if np.isfinite(s.gamma_abs) and s.gamma_abs < config.dip_factor * med:
                s = replace(s, flags=s.flags + ("dip",))
            out.append(s)
        samples = out
    return samples
