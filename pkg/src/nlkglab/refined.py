"""Modulation frame around the soliton.

The state near Qi = (Q, 0) is written u = profile(z) + eta with z two complex
mode amplitudes (unstable pair and internal oscillator) and eta symplectically
orthogonal to the four real direction fields of the profile family.  The
family is affine in the real coordinates of z, so decomposition is a single
4x4 solve against the constant Gram matrix.  On top of the linear frame sit
the quadratic correction ztilde_R to the amplitude flow, the remainder field
driving eta, and the quadratic coefficient G2 that feeds the damping-rate
pairing.
"""
from dataclasses import dataclass

import numpy as np

from .fields import (
    Grid, ParityField, StatePair, deriv2, even_field, norm_l2, pair_J, zeros,
)
from .soliton import (
    ModelConstants, constants, f_nonlin, f_prime, f_second_at_Q,
)
from .soliton import soliton as soliton_field
from .spectrum import bound_state


class DegenerateFrame(RuntimeError):
    """Gram matrix numerically singular: grid too coarse or too small."""


class DecompositionError(RuntimeError):
    """Orthogonality residuals failed to reach tolerance."""


class CoefficientMismatch(RuntimeError):
    """Analytic quadratic coefficient disagrees with the finite-difference probe."""


@dataclass(frozen=True)
class ProfileConfig:
    delta_ball: float = 0.05      # |z| radius within which decomposition is trusted
    ortho_tol: float = 1e-10      # residual bound, scaled by (1 + ||eta||)
    det_floor: float = 1e-12      # |det M| below floor * scale^4 is degenerate
    fd_step: float = 1e-4
    fd_match_rel: float = 1e-5
    max_newton: int = 4


@dataclass(frozen=True)
class ModeAmplitudes:
    z1: complex
    z2: complex

    def as_real(self) -> np.ndarray:
        return np.array([self.z1.real, self.z1.imag, self.z2.real, self.z2.imag])

    @staticmethod
    def from_real(vec: np.ndarray) -> "ModeAmplitudes":
        return ModeAmplitudes(complex(vec[0], vec[1]), complex(vec[2], vec[3]))

    @property
    def modulus(self) -> float:
        return float(np.sqrt(abs(self.z1) ** 2 + abs(self.z2) ** 2))


def _zreal(z) -> np.ndarray:
    """Real coordinates (Re z1, Im z1, Re z2, Im z2) from any z spelling."""
    if isinstance(z, ModeAmplitudes):
        return z.as_real()
    z = np.asarray(z)
    if z.shape == (4,) and not np.iscomplexobj(z):
        return z.astype(float)
    if z.shape == (2,):
        return np.array([z[0].real, z[0].imag, z[1].real, z[1].imag])
    raise ValueError(f"cannot read mode amplitudes from shape {z.shape}")


def _zcomplex(vec: np.ndarray) -> np.ndarray:
    return np.array([vec[0] + 1j * vec[1], vec[2] + 1j * vec[3]])


@dataclass(eq=False)
class RefinedProfile:
    """Immutable profile family data; safe to share across threads."""

    grid: Grid
    p: float
    consts: ModelConstants
    q: ParityField
    qi: StatePair
    phi0: ParityField
    phi2: ParityField
    directions: tuple          # 4 StatePairs, derivative of profile in each real coord
    gram: np.ndarray           # M[a, b] = <J d_a, d_b>, constant and antisymmetric
    gram_det: float

    def tilde(self, z) -> StatePair:
        return self.apply_dz(_zreal(z))

    def profile(self, z) -> StatePair:
        return self.qi + self.tilde(z)

    def apply_dz(self, vec) -> StatePair:
        """Differential of the profile along a direction, real or complex."""
        vr = _zreal(vec)
        out = StatePair(zeros(self.grid), zeros(self.grid))
        for coef, d in zip(vr, self.directions):
            out = out + d * float(coef)
        return out

    def solve_gram_t(self, rhs: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.gram.T, rhs)


def build_profile(grid: Grid, p: float,
                  config: ProfileConfig = ProfileConfig()) -> RefinedProfile:
    c = constants(p)
    q = soliton_field(grid, p)
    phi0 = bound_state(grid, p, 0)
    phi2 = bound_state(grid, p, 2)
    zero = zeros(grid)
    directions = (
        StatePair(phi0, phi0 * c.nu0),
        StatePair(phi0, phi0 * (-c.nu0)),
        StatePair(phi2 * 2.0, zero),
        StatePair(zero, phi2 * (-2.0 * c.lam)),
    )
    gram = np.empty((4, 4))
    for a in range(4):
        for b in range(4):
            gram[a, b] = pair_J(directions[a], directions[b])
    scale = float(np.max(np.abs(gram)))
    det = float(np.linalg.det(gram))
    if abs(det) < config.det_floor * scale**4:
        raise DegenerateFrame(f"|det M| = {abs(det):.3e} below floor")
    prof = RefinedProfile(grid=grid, p=p, consts=c, q=q,
                          qi=StatePair(q, zero), phi0=phi0, phi2=phi2,
                          directions=directions, gram=gram, gram_det=det)
    _check_realness(prof)
    return prof


def _check_realness(prof: RefinedProfile):
    # assemble the complex-combination form of the family at a fixed z and
    # confirm it is real and equal to the real-coordinate assembly
    c = prof.consts
    rng = np.random.default_rng(7)
    for _ in range(2):
        z = _zcomplex(rng.uniform(-0.1, 0.1, size=4))
        big0_1 = 0.5 * (1.0 - 1j) * prof.phi0.values
        big0_2 = 0.5 * (1.0 + 1j) * c.nu0 * prof.phi0.values
        big2_1 = prof.phi2.values.astype(complex)
        big2_2 = 1j * c.lam * prof.phi2.values
        v1 = z[0] * big0_1 + np.conj(z[0] * big0_1) + z[1] * big2_1 + np.conj(z[1] * big2_1)
        v2 = z[0] * big0_2 + np.conj(z[0] * big0_2) + z[1] * big2_2 + np.conj(z[1] * big2_2)
        tl = prof.tilde(z)
        amp = 1.0 + float(np.max(np.abs(v1))) + float(np.max(np.abs(v2)))
        if max(np.max(np.abs(v1.imag)), np.max(np.abs(v2.imag))) > 1e-13 * amp:
            raise DegenerateFrame("complex assembly of the profile is not real")
        err = max(np.max(np.abs(v1.real - tl.u1.values)),
                  np.max(np.abs(v2.real - tl.u2.values)))
        if err > 1e-13 * amp:
            raise DegenerateFrame("direction fields disagree with complex assembly")


# ---------------------------------------------------------------------------
# nonlinear remainder and corrector


def rhat(z, prof: RefinedProfile) -> StatePair:
    """Nonlinear remainder of the profile ansatz; j-directed by construction."""
    zr = _zreal(z)
    qv = prof.q.values
    t1 = (zr[0] + zr[1]) * prof.phi0.values + 2.0 * zr[2] * prof.phi2.values
    resid = f_nonlin(qv + t1, prof.p) - f_nonlin(qv, prof.p) - f_prime(qv, prof.p) * t1
    return StatePair(zeros(prof.grid), even_field(prof.grid, -resid))


def corrector(z, prof: RefinedProfile) -> np.ndarray:
    """Quadratic amplitude correction, from the 4x4 orthogonality system."""
    r = np.array([pair_J(rhat(z, prof), d) for d in prof.directions])
    s = prof.solve_gram_t(-r)
    return _zcomplex(s)


def ztilde0(z, c: ModelConstants) -> np.ndarray:
    zc = _zcomplex(_zreal(z))
    return np.array([c.nu0 * np.conj(zc[0]), 1j * c.lam * zc[1]])


def ztilde(z, prof: RefinedProfile) -> np.ndarray:
    return ztilde0(z, prof.consts) + corrector(z, prof)


def remainder(z, prof: RefinedProfile) -> StatePair:
    """Profile-equation remainder after the corrector; orthogonal to the frame."""
    return prof.apply_dz(corrector(z, prof)) + rhat(z, prof)


# ---------------------------------------------------------------------------
# quadratic coefficient


@dataclass(frozen=True)
class CorrectorData:
    w: np.ndarray              # second derivative of the corrector along z2 at 0
    g2: StatePair              # quadratic coefficient field
    fd_residual: float         # relative analytic-vs-difference mismatch


def g2_coefficient(prof: RefinedProfile,
                   config: ProfileConfig = ProfileConfig()) -> CorrectorData:
    fpp = f_second_at_Q(prof.q.values, prof.p)
    rho2 = -0.5 * fpp * prof.phi2.values**2
    rho = StatePair(zeros(prof.grid), even_field(prof.grid, rho2))
    r = np.array([pair_J(rho, d) for d in prof.directions])
    cvec = prof.solve_gram_t(-r)
    w = 2.0 * _zcomplex(cvec)

    # difference probe along real and imaginary z2; corrector(0) = 0
    h = config.fd_step
    d_re = (corrector((0.0, h), prof) + corrector((0.0, -h), prof)) / h**2
    d_im = (corrector((0.0, 1j * h), prof) + corrector((0.0, -1j * h), prof)) / h**2
    w_fd = (d_re - d_im) / 4.0
    resid = float(np.max(np.abs(w - w_fd)) / max(np.max(np.abs(w)), 1e-300))
    if resid > config.fd_match_rel:
        raise CoefficientMismatch(f"quadratic coefficient mismatch {resid:.3e}")

    g2 = prof.apply_dz(w) + StatePair(
        zeros(prof.grid), even_field(prof.grid, -fpp * prof.phi2.values**2))
    return CorrectorData(w=w, g2=g2, fd_residual=resid)


# ---------------------------------------------------------------------------
# decomposition


@dataclass(frozen=True)
class Decomposition:
    z: ModeAmplitudes
    eta: StatePair
    residuals: np.ndarray
    newton_iters: int
    in_ball: bool


def decompose(u: StatePair, prof: RefinedProfile,
              config: ProfileConfig = ProfileConfig()) -> Decomposition:
    """Split u into profile(z) + eta with eta J-orthogonal to the frame.

    The family is affine in the real coordinates of z, so the first solve is
    already exact; further iterations only polish roundoff.
    """
    diff = u - prof.qi
    d = np.array([pair_J(diff, dd) for dd in prof.directions])
    zr = prof.solve_gram_t(d)
    iters = 1
    while True:
        eta = u - prof.profile(zr)
        res = np.array([pair_J(eta, dd) for dd in prof.directions])
        bound = config.ortho_tol * (1.0 + norm_l2(eta))
        if np.max(np.abs(res)) <= bound or iters >= config.max_newton:
            break
        zr = zr + prof.solve_gram_t(res)
        iters += 1
    if np.max(np.abs(res)) > bound:
        raise DecompositionError(
            f"orthogonality residual {np.max(np.abs(res)):.3e} above {bound:.3e}")
    z = ModeAmplitudes.from_real(zr)
    return Decomposition(z=z, eta=eta, residuals=res, newton_iters=iters,
                         in_ball=z.modulus <= config.delta_ball)


def project_orthogonal(u: StatePair, prof: RefinedProfile) -> StatePair:
    """Remove the frame components of u in the J-pairing sense."""
    d = np.array([pair_J(u, dd) for dd in prof.directions])
    return u - prof.apply_dz(prof.solve_gram_t(d))


# ---------------------------------------------------------------------------
# modulation vector field


def modulation_rhs(decomp: Decomposition, prof: RefinedProfile):
    """Amplitude velocity and eta velocity implied by the flow at this state.

    The evolution itself advances (u1, u2); this splitting is evaluated only
    for consistency monitoring of zdot - ztilde.
    """
    z = decomp.z
    eta = decomp.eta
    zt = ztilde(z, prof)
    rem = remainder(z, prof)
    lin = StatePair(eta.u2, deriv2(eta.u1) - eta.u1)
    prof1 = prof.profile(z).u1.values
    nl2 = f_nonlin(prof1 + eta.u1.values, prof.p) - f_nonlin(prof1, prof.p)
    rhs_total = lin - rem + StatePair(zeros(prof.grid),
                                      even_field(prof.grid, nl2))
    d = np.array([pair_J(rhs_total, dd) for dd in prof.directions])
    diff = prof.solve_gram_t(d)
    zdot = zt + _zcomplex(diff)
    eta_dot = rhs_total - prof.apply_dz(diff)
    return eta_dot, zdot
