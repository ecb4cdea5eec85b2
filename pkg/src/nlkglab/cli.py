"""Command-line entry point: config parsing, run orchestration, CSV emission.

Subcommands: spectrum, fgr-scan, evolve, shoot, virial, selftest.  Every
output file starts with comment lines echoing the resolved configuration, so
a CSV is self-describing.  Floats are written with 17 significant digits for
bit-faithful round trips.  Identical config and seed give byte-identical
output bodies; scans reduce in index order regardless of worker count.

Exit codes: 0 ok, 2 config error, 3 numerical fault, 4 selftest failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .evolution import (BlowupError, EvolutionConfig, ShootingError, energy,
                        evolve, fit_decay_exponent, shoot_center)
from .fields import Grid, GridError, StatePair, even_field, make_grid, state_pair
from .refined import (DecompositionError, ModeAmplitudes, ProfileConfig,
                      build_profile, decompose, ztilde)
from .scattering import (FarFieldFitError, ScanRefusal, fgr_gamma, fgr_scan)
from .soliton import P_MIN, constants
from .spectrum import (SolveBreakdown, eigen_residual, intertwining_residual,
                       repulsivity_check)
from .virial import (FUNCTIONAL_NAMES, ddt_consistency, evaluate_series,
                     functional_virial_1)
from .weights import weight_set

P_SUP = 2.0

NUMERICAL_FAULTS = (BlowupError, DecompositionError, ShootingError,
                    SolveBreakdown, FarFieldFitError, ScanRefusal, GridError,
                    FloatingPointError, np.linalg.LinAlgError)


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: float = 2.0
    p_min: float = 1.7
    p_max: float = 2.0
    p_count: int = 50
    L: float = 100.0
    n: int = 4096
    sponge: float = 20.0
    dt_factor: float = 0.25
    t_final: float = 50.0
    stride: int = 10
    delta: float = 0.05
    delta_esc: float = 0.0
    suppress: int = 0
    re_z1: float = 0.0
    im_z1: float = 0.0
    re_z2: float = 0.1
    im_z2: float = 0.0
    A: float = 40.0
    B: float = 10.0
    kappa: float = 0.1
    eps: float = 0.3
    pert_mag: float = 0.01
    a_min: float = -1e-3
    a_max: float = 1e-3
    tol: float = 1e-10
    checkpoint_stride: int = 0
    workers: int = 1
    seed: int = 0
    out: str = "runs"
    series: str = ""


COMMANDS = ("spectrum", "fgr-scan", "evolve", "shoot", "virial", "selftest")

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def fmt(x) -> str:
    if isinstance(x, float) or isinstance(x, np.floating):
        return "%.17g" % x
    return str(x)


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"malformed value for {key}: {raw!r}")
    return raw


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{line_no}: expected key = value")
        key, _, raw = body.partition("=")
        key = key.strip()
        if key == "command" or key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def _gate_p(p: float):
    if not (P_MIN < p <= P_SUP):
        raise ConfigError(f"p out of (5/3, 2]: {fmt(p)}")


def parse_config(argv) -> RunConfig:
    ap = argparse.ArgumentParser(prog="nlkglab", allow_abbrev=False,
                                 description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, allow_abbrev=False)
        sp.add_argument("--config", default=None)
        for f in fields(RunConfig):
            if f.name == "command":
                continue
            sp.add_argument("--" + f.name.replace("_", "-"), dest=f.name,
                            default=None)
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            raise ConfigError("unrecognized arguments")
        raise
    values = {}
    if ns.config is not None:
        values.update(_read_config_file(ns.config))
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        raw = getattr(ns, f.name)
        if raw is not None:
            values[f.name] = _coerce(f.name, raw)
    cfg = RunConfig(command=ns.command, **values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.n < 16 or cfg.L <= 0.0 or cfg.sponge < 0.0:
        raise ConfigError("grid parameters out of range")
    if not (0.0 < cfg.dt_factor <= 0.5):
        raise ConfigError("dt_factor must lie in (0, 0.5]")
    if cfg.stride < 1 or cfg.t_final <= 0.0:
        raise ConfigError("evolution parameters out of range")
    if cfg.command == "fgr-scan":
        if not (P_MIN < cfg.p_min < cfg.p_max <= P_SUP):
            raise ConfigError("p range must satisfy 5/3 < p_min < p_max <= 2")
        if cfg.p_count < 2:
            raise ConfigError("p_count must be >= 2")
    elif cfg.command in ("spectrum", "evolve", "shoot"):
        _gate_p(cfg.p)
    elif cfg.command == "virial":
        if not cfg.series:
            raise ConfigError("virial requires --series <checkpoint dir>")


# ---------------------------------------------------------------------------
# emission helpers


def _config_header(cfg: RunConfig) -> list:
    lines = [f"nlkglab {__version__}", f"command = {cfg.command}"]
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        if f.name == "command":
            continue
        lines.append(f"{f.name} = {fmt(getattr(cfg, f.name))}")
    return lines


def _write_table(path: Path, header: list, columns: list, rows: list,
                 trailer: list = ()):
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
        for line in trailer:
            fh.write(f"# {line}\n")


def _write_failed(path: Path, header: list, message: str):
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"# FAILED: {message}\n")


def _outdir(cfg: RunConfig) -> Path:
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# checkpoint files: text header + full-precision state rows


def write_checkpoint(path: Path, t: float, p: float, u: StatePair, dt: float):
    g = u.grid
    with open(path, "w") as fh:
        fh.write(f"# nlkglab {__version__} checkpoint\n")
        for key, val in (("p", p), ("L", g.L), ("n", g.n),
                         ("sponge_width", g.sponge_width), ("dt", dt),
                         ("t", t)):
            fh.write(f"# {key} = {fmt(val)}\n")
        for a, b in zip(u.u1.values, u.u2.values):
            fh.write(f"{fmt(a)} {fmt(b)}\n")


def read_checkpoint(path: Path):
    meta = {}
    rows1, rows2 = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, raw = body.partition("=")
                    meta[key.strip()] = float(raw)
                continue
            a, b = line.split()
            rows1.append(float(a))
            rows2.append(float(b))
    for key in ("p", "L", "n", "t"):
        if key not in meta:
            raise ConfigError(f"checkpoint {path} missing header key {key}")
    g = make_grid(L=meta["L"], n=int(meta["n"]),
                  sponge_width=meta.get("sponge_width", 0.0))
    if len(rows1) != g.n:
        raise ConfigError(f"checkpoint {path} row count {len(rows1)} != n")
    u = state_pair(g, np.array(rows1), np.array(rows2))
    return meta["t"], meta["p"], u


# ---------------------------------------------------------------------------
# subcommands


TRAJ_COLUMNS = ["t", "re_z1", "im_z1", "re_z2", "im_z2", "abs_z2", "energy",
                "eta_sigmaA", "eta_l2kappa", "eta_h1a", "zdot_minus_ztilde"]


def _traj_rows(traj):
    rows = []
    for k in range(len(traj.t)):
        z1, z2 = traj.z[k]
        rows.append((traj.t[k], z1.real, z1.imag, z2.real, z2.imag,
                     abs(z2), traj.energy[k], traj.eta_sigma_a[k],
                     traj.eta_l2_kappa[k], traj.eta_h1_a[k],
                     traj.zdot_minus_ztilde[k]))
    return rows


def _emit_trajectory(path: Path, cfg: RunConfig, traj, extra: list = ()):
    header = _config_header(cfg) + list(extra)
    header.append(f"status = {traj.status}")
    try:
        exponent = fit_decay_exponent(traj)
    except ValueError:
        exponent = float("nan")
    header.append(f"fitted_decay_exponent = {fmt(exponent)}")
    _write_table(path, header, TRAJ_COLUMNS, _traj_rows(traj))


def cmd_spectrum(cfg: RunConfig) -> int:
    g = make_grid(L=cfg.L, n=cfg.n, sponge_width=cfg.sponge)
    c = constants(cfg.p)
    columns = (["p"] + [f"k{j}" for j in range(5)]
               + [f"mu{m}" for m in range(4)] + ["nu0", "lambda"]
               + [f"res_phi{j}" for j in range(4)] + ["intertwining_residual"])
    res = [eigen_residual(g, cfg.p, j) if j <= c.N else float("nan")
           for j in range(4)]
    row = ([cfg.p] + [float(v) for v in c.k] + [float(v) for v in c.mu]
           + [c.nu0, c.lam] + res + [intertwining_residual(g, cfg.p)])
    _write_table(_outdir(cfg) / "spectrum.csv", _config_header(cfg),
                 columns, [tuple(row)])
    return 0


def cmd_fgr_scan(cfg: RunConfig) -> int:
    g = make_grid(L=cfg.L, n=cfg.n, sponge_width=cfg.sponge)
    pvals = np.linspace(cfg.p_min, cfg.p_max, cfg.p_count)
    path = _outdir(cfg) / "fgr_scan.csv"
    columns = ["p", "xi", "gamma_re", "gamma_im", "gamma_abs",
               "gamma_reduced_abs", "agreement", "flags"]
    try:
        samples = fgr_scan(pvals, g, workers=cfg.workers)
    except NUMERICAL_FAULTS as exc:
        _write_failed(path, _config_header(cfg), f"{type(exc).__name__}: {exc}")
        raise
    rows = [(s.p, s.xi, s.gamma_pairing.real, s.gamma_pairing.imag,
             s.gamma_abs, abs(s.gamma_reduced), s.agreement,
             ";".join(s.flags)) for s in samples]
    _write_table(path, _config_header(cfg), columns, rows)
    return 0


def _evolution_config(cfg: RunConfig) -> EvolutionConfig:
    return EvolutionConfig(dt_factor=cfg.dt_factor, t_final=cfg.t_final,
                           record_stride=cfg.stride,
                           escape_radius=cfg.delta_esc,
                           suppress_unstable=bool(cfg.suppress),
                           kappa=cfg.kappa, weight_scale=cfg.A)


def cmd_evolve(cfg: RunConfig) -> int:
    g = make_grid(L=cfg.L, n=cfg.n, sponge_width=cfg.sponge)
    prof = build_profile(g, cfg.p)
    prof_config = ProfileConfig(delta_ball=cfg.delta)
    z0 = np.array([cfg.re_z1 + 1j * cfg.im_z1, cfg.re_z2 + 1j * cfg.im_z2])
    u0 = prof.profile(z0)
    econf = _evolution_config(cfg)
    outdir = _outdir(cfg)
    dt = econf.dt_factor * g.dx

    on_record = None
    if cfg.checkpoint_stride > 0:
        counter = {"k": 0}

        def on_record(t, u):
            k = counter["k"]
            counter["k"] = k + 1
            if k % cfg.checkpoint_stride == 0:
                write_checkpoint(outdir / f"state_{k:06d}.txt",
                                 t, cfg.p, u, dt)

    path = outdir / "traj.csv"
    try:
        traj = evolve(u0, econf, prof, prof_config, on_record=on_record)
    except NUMERICAL_FAULTS as exc:
        _write_failed(path, _config_header(cfg), f"{type(exc).__name__}: {exc}")
        raise
    _emit_trajectory(path, cfg, traj)
    return 0


def cmd_shoot(cfg: RunConfig) -> int:
    g = make_grid(L=cfg.L, n=cfg.n, sponge_width=cfg.sponge)
    prof = build_profile(g, cfg.p)
    prof_config = ProfileConfig(delta_ball=cfg.delta)
    shape = state_pair(g, prof.phi2.values.copy(), np.zeros(g.n))
    eps_pert = shape * cfg.pert_mag
    econf = _evolution_config(cfg)
    outdir = _outdir(cfg)
    report = outdir / "shoot.txt"
    try:
        result = shoot_center(eps_pert, (cfg.a_min, cfg.a_max), econf, prof,
                              prof_config, tol=cfg.tol)
    except NUMERICAL_FAULTS as exc:
        _write_failed(report, _config_header(cfg),
                      f"{type(exc).__name__}: {exc}")
        raise
    power = 0.5 * (cfg.p + 1.0)
    with open(report, "w") as fh:
        for line in _config_header(cfg):
            fh.write(f"# {line}\n")
        fh.write(f"a_star = {fmt(result.a_star)}\n")
        fh.write(f"eps_norm = {fmt(result.eps_norm)}\n")
        fh.write(f"evaluations = {result.evaluations}\n")
        fh.write(f"bracket = {fmt(result.bracket[0])} {fmt(result.bracket[1])}\n")
        fh.write(f"abs_a_star = {fmt(abs(result.a_star))} <= "
                 f"{fmt(result.bound_constant)} * eps_norm^{fmt(power)}\n")
    _emit_trajectory(outdir / "traj.csv", cfg, result.trajectory,
                     extra=[f"a_star = {fmt(result.a_star)}"])
    return 0


def cmd_virial(cfg: RunConfig) -> int:
    paths = sorted(Path(cfg.series).glob("state_*.txt"))
    if not paths:
        raise ConfigError(f"no checkpoint files under {cfg.series}")
    loaded = [read_checkpoint(path) for path in paths]
    p_set = {meta_p for _, meta_p, _ in loaded}
    if len(p_set) != 1:
        raise ConfigError("checkpoint series mixes exponents")
    p = p_set.pop()
    _gate_p(p)
    states = [(t, u) for t, _, u in loaded]
    g = states[0][1].grid
    prof = build_profile(g, p)
    prof_config = ProfileConfig(delta_ball=cfg.delta)
    ws = weight_set(g, A=cfg.A, B=cfg.B, kappa=cfg.kappa, eps=cfg.eps)
    path = _outdir(cfg) / "virial.csv"
    columns = ["t", "J_FGR", "I1_1", "I1_2", "I2_1", "I2_2"]
    try:
        frames = evaluate_series(states, prof, ws, prof_config=prof_config)
    except NUMERICAL_FAULTS as exc:
        _write_failed(path, _config_header(cfg), f"{type(exc).__name__}: {exc}")
        raise
    rows = [(f.t, f.fgr, f.i1st_1, f.i1st_2, f.i2nd_1, f.i2nd_2)
            for f in frames]
    trailer = []
    if len(frames) >= 3:
        for name, val in ddt_consistency(frames).items():
            trailer.append(f"ddt_{name} = {fmt(val)}")
        trailer.extend(_frame_budgets(frames, prof))
    _write_table(path, _config_header(cfg), columns, rows, trailer)
    return 0


def _frame_budgets(frames, prof) -> list:
    t = np.array([f.t for f in frames])
    z = np.array([[f.z1, f.z2] for f in frames])
    resid_sq = np.full(len(frames), np.nan)
    for k in range(1, len(frames) - 1):
        zdot = (z[k + 1] - z[k - 1]) / (t[k + 1] - t[k - 1])
        zt = ztilde(ModeAmplitudes(z1=z[k, 0], z2=z[k, 1]), prof)
        resid_sq[k] = float(np.sum(np.abs(zdot - zt) ** 2))
    inner = slice(1, -1)
    eta_sq = np.array([f.eta_sigma**2 + f.eta_kappa**2 for f in frames])
    out = [
        ("budget_resid_sq", np.trapezoid(resid_sq[inner], t[inner])),
        ("budget_z1_sq", np.trapezoid(np.abs(z[:, 0]) ** 2, t)),
        ("budget_z2_quartic", np.trapezoid(np.abs(z[:, 1]) ** 4, t)),
        ("budget_eta_sq", np.trapezoid(eta_sq, t)),
    ]
    return [f"{name} = {fmt(float(val))}" for name, val in out]


# ---------------------------------------------------------------------------
# selftest: one pass/fail line per module invariant


def _selftest_checks(cfg: RunConfig):
    g = make_grid(L=cfg.L, n=cfg.n, sponge_width=cfg.sponge)

    def constants_closed_forms():
        c = constants(2.0)
        assert np.allclose(c.k, [1.5, 1.0, 0.5, 0.0, -0.5], atol=1e-14)
        assert np.allclose(c.mu, [-1.25, 0.0, 0.75, 1.0], atol=1e-14)
        assert abs(c.nu0 - np.sqrt(1.25)) < 1e-14
        assert abs(c.lam - np.sqrt(0.75)) < 1e-14

    def eigen_residuals():
        for p in (2.0, 1.8):
            c = constants(p)
            for j in range(c.N + 1):
                assert eigen_residual(g, p, j) < 1e-5, (p, j)

    def intertwining():
        for p in (2.0, 1.8):
            assert intertwining_residual(g, p) < 1e-4, p

    def repulsivity():
        assert repulsivity_check(g, 1.8)
        assert not repulsivity_check(g, 2.0)

    def soliton_energy():
        prof = build_profile(g, 2.0)
        assert abs(energy(prof.qi, 2.0) - 1.2) < 1e-6

    def decompose_roundtrip():
        small = make_grid(L=100.0, n=1024)
        prof = build_profile(small, 2.0)
        z = np.array([0.004 - 0.002j, -0.003 + 0.006j])
        dec = decompose(prof.profile(z), prof)
        assert abs(dec.z.z1 - z[0]) + abs(dec.z.z2 - z[1]) < 1e-12
        assert np.max(np.abs(dec.residuals)) < 1e-10

    def fgr_two_routes():
        sample = fgr_gamma(g, 2.0)
        assert sample.gamma_abs > 0.0
        assert sample.agreement < 1e-4

    def transform_roundtrip():
        from .spectrum import (bound_states, project_continuum,
                               reconstruct_from_T, transform_T)
        x = g.x
        u = state_pair(g, 0.3 * np.exp(-(x**2) / 6.0) * np.cos(0.8 * x),
                       0.2 * np.exp(-(x**2) / 8.0))
        phis = bound_states(g, 2.0)
        ref = StatePair(project_continuum(u.u1, phis),
                        project_continuum(u.u2, phis))
        back = reconstruct_from_T(transform_T(u, 2.0, cfg.eps), 2.0, cfg.eps)
        wgt = np.exp(-cfg.kappa * np.abs(x))
        num = den = 0.0
        for a, b in ((back.u1, ref.u1), (back.u2, ref.u2)):
            num += np.trapezoid(wgt * (a.values - b.values) ** 2, x)
            den += np.trapezoid(wgt * b.values**2, x)
        assert np.sqrt(num / den) < 1e-3

    def functional_bilinearity():
        ws = weight_set(g, A=cfg.A, B=cfg.B, kappa=cfg.kappa, eps=cfg.eps)
        x = g.x
        eta = state_pair(g, 0.02 * np.exp(-(x**2) / 6.0),
                         0.01 * np.exp(-(x**2) / 5.0) * np.cos(0.7 * x))
        m1, w1 = functional_virial_1(eta, ws)
        m2, w2 = functional_virial_1(2.0 * eta, ws)
        assert abs(m2 - 4.0 * m1) < 1e-10 * max(1.0, abs(m1))
        assert abs(w2 - 4.0 * w1) < 1e-10 * max(1.0, abs(w1))

    return [
        ("constants_closed_forms", constants_closed_forms),
        ("eigen_residuals", eigen_residuals),
        ("intertwining", intertwining),
        ("repulsivity", repulsivity),
        ("soliton_energy", soliton_energy),
        ("decompose_roundtrip", decompose_roundtrip),
        ("fgr_two_routes", fgr_two_routes),
        ("transform_roundtrip", transform_roundtrip),
        ("functional_bilinearity", functional_bilinearity),
    ]


def cmd_selftest(cfg: RunConfig) -> int:
    failures = 0
    for name, check in _selftest_checks(cfg):
        try:
            check()
        except Exception as exc:
            failures += 1
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
        else:
            print(f"PASS {name}")
    if failures:
        print(f"{failures} selftest check(s) failed")
        return 4
    print("all selftest checks passed")
    return 0


_DISPATCH = {
    "spectrum": cmd_spectrum,
    "fgr-scan": cmd_fgr_scan,
    "evolve": cmd_evolve,
    "shoot": cmd_shoot,
    "virial": cmd_virial,
    "selftest": cmd_selftest,
}


def run(cfg: RunConfig) -> int:
    return _DISPATCH[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_FAULTS as exc:
        print(f"numerical fault: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
