"""Command-line front end: parameter sweeps written as deterministic CSV."""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import amplitudes, classical, oracle, xsec
from .channel import DomainError, ScatterConfig, make_channel, reflection_coeff, wkb_phase_shift

PROG = "vortexscatter"

# electron rest energy and hbar*c, CODATA 2018
ELECTRON_MC2_EV = 510998.95000
HBAR_C_EV_NM = 197.3269804

SUBCOMMANDS = ("xsec", "figure1", "phase-shifts", "oracle-compare", "classical", "amps")

_DEFAULTS = {
    "s": 2 * math.pi * 100,
    "mu": 0.0,
    "rho": 0.0,
    "phi_min": -math.pi,
    "phi_max": math.pi,
    "phi_count": 1001,
    "method": "direct",
    "tol_tail": amplitudes.TOL_TAIL,
    "rtol": oracle.RTOL,
    "b_min": -0.99,
    "b_max": 0.99,
    "b_count": 199,
    "mu_prime": 0.0,
    "x_count": 601,
}
_SUBCOMMAND_DEFAULTS = {"oracle-compare": {"s": 100.0}}


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    """17 significant digits; ``inf`` and ``nan`` spelled out."""
    return "%.17g" % float(x)


def size_parameter(energy_ev: float, radius_um: float) -> float:
    """``s = p r_c / hbar`` for a non-relativistic electron of kinetic energy ``energy_ev``."""
    if energy_ev <= 0 or radius_um <= 0:
        raise UsageError("--energy-ev and --radius-um must be positive")
    pc = math.sqrt(2.0 * ELECTRON_MC2_EV * energy_ev)
    return pc * radius_um * 1000.0 / HBAR_C_EV_NM


@dataclass
class RunSpec:
    subcommand: str
    cfg: ScatterConfig
    angles: np.ndarray
    out: str | None
    method: str
    tolerances: dict
    extra: dict = field(default_factory=dict)

    def header(self) -> list[str]:
        lines = [
            f"subcommand={self.subcommand}",
            f"s={fmt(self.cfg.s)}",
            f"mu={fmt(self.cfg.mu)}",
            f"rho={fmt(self.cfg.rho)}",
            f"method={self.method}",
        ]
        if len(self.angles):
            lines.append(f"phi_min={fmt(self.angles[0])} phi_max={fmt(self.angles[-1])} phi_count={len(self.angles)}")
        lines += [f"{k}={fmt(v)}" for k, v in sorted(self.tolerances.items())]
        lines += [f"{k}={v}" for k, v in sorted(self.extra.items())]
        lines.append("units: lengths in r_c, amplitudes in sqrt(r_c), hbar = 1")
        return lines


def read_config(path: str) -> dict:
    """Parse a ``key=value`` file; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                key, value = (t.strip() for t in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Scattering off an impenetrable magnetic vortex.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem")
    g.add_argument("--s", type=float, help="size parameter p r_c / hbar")
    g.add_argument("--mu", type=float, help="reduced flux")
    g.add_argument("--rho", type=float, help="Robin parameter in [0, 1)")
    g.add_argument("--energy-ev", type=float, help="electron kinetic energy in eV (with --radius-um, sets s)")
    g.add_argument("--radius-um", type=float, help="tube radius in micrometres (with --energy-ev, sets s)")
    g.add_argument("--phi-min", type=float)
    g.add_argument("--phi-max", type=float)
    g.add_argument("--phi-count", type=int)
    g.add_argument("--phi-list", help="comma-separated explicit angles, overrides the grid flags")
    g.add_argument("--method", choices=("direct", "closed"))
    g.add_argument("--tol-tail", type=float, help="evanescent tail cutoff")
    g.add_argument("--rtol", type=float, help="oracle integrator tolerance")
    g.add_argument("--out", help="output CSV path (default: stdout)")
    g.add_argument("--config", help="key=value file merged under the flags")

    sub.add_parser("xsec", parents=[common], help="differential cross sections")
    p = sub.add_parser("figure1", parents=[common], help="normalised diffraction pattern, integer and half-integer flux")
    p.add_argument("--x-count", type=int, help="abscissa samples on [-3, 3]")
    sub.add_parser("phase-shifts", parents=[common], help="per-channel WKB phase shifts and reflection coefficients")
    sub.add_parser("oracle-compare", parents=[common], help="WKB against the exact radial solution")
    p = sub.add_parser("classical", parents=[common], help="classical deflection and cross section")
    p.add_argument("--b-min", type=float)
    p.add_argument("--b-max", type=float)
    p.add_argument("--b-count", type=int)
    p.add_argument("--b-list", help="comma-separated impact parameters")
    p.add_argument("--mu-prime", type=float, help="flux coupling of the canonical momentum")
    p.add_argument("--trajectory-dir", help="write one orbit CSV per impact parameter here")
    sub.add_parser("amps", parents=[common], help="partial amplitudes f0..f3")
    return parser


def _merged(args: argparse.Namespace) -> dict:
    vals = dict(_DEFAULTS)
    vals.update(_SUBCOMMAND_DEFAULTS.get(args.subcommand, {}))
    if args.config:
        known = set(vars(args))
        for key, raw in read_config(args.config).items():
            if key not in known or key in ("config", "subcommand"):
                raise UsageError(f"unknown config key {key!r}")
            vals[key] = raw
    vals.update({k: v for k, v in vars(args).items() if v is not None})
    return vals


def _float(vals, key):
    try:
        return float(vals[key])
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be a number, got {vals[key]!r}") from None


def _int(vals, key):
    try:
        return int(vals[key])
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be an integer, got {vals[key]!r}") from None


def _float_list(text, name):
    try:
        return np.array([float(t) for t in str(text).split(",") if t.strip()])
    except ValueError:
        raise UsageError(f"{name} must be a comma-separated list of numbers") from None


def _check_output(path):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise UsageError(f"output path {path} is not writable")
    if os.path.isdir(path):
        raise UsageError(f"output path {path} is a directory")


def make_spec(args: argparse.Namespace) -> RunSpec:
    """Validate everything and assemble a :class:`RunSpec`; no physics is evaluated."""
    vals = _merged(args)
    has_e, has_r = vals.get("energy_ev") is not None, vals.get("radius_um") is not None
    if has_e != has_r:
        raise UsageError("--energy-ev and --radius-um must be given together")
    if has_e:
        if args.s is not None:
            raise UsageError("give either --s or --energy-ev/--radius-um, not both")
        vals["s"] = size_parameter(_float(vals, "energy_ev"), _float(vals, "radius_um"))
    try:
        cfg = ScatterConfig(_float(vals, "s"), _float(vals, "mu"), _float(vals, "rho"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if vals.get("phi_list") is not None:
        angles = _float_list(vals["phi_list"], "phi-list")
        if angles.size == 0:
            raise UsageError("phi-list is empty")
    else:
        lo, hi, count = _float(vals, "phi_min"), _float(vals, "phi_max"), _int(vals, "phi_count")
        if count < 2:
            raise UsageError("phi-count must be at least 2")
        if not lo < hi:
            raise UsageError("phi-min must be below phi-max")
        angles = np.linspace(lo, hi, count)
    if not np.all(np.isfinite(angles)) or np.any(np.abs(angles) > math.pi):
        raise UsageError("angles must lie in [-pi, pi]")

    tols = {"tol_tail": _float(vals, "tol_tail"), "rtol": _float(vals, "rtol")}
    for k, v in tols.items():
        if not v > 0:
            raise UsageError(f"{k} must be positive")
    method = vals["method"]
    if method not in ("direct", "closed"):
        raise UsageError("method must be direct or closed")

    extra = {}
    sc = args.subcommand
    if sc == "figure1":
        if cfg.s / (2 * math.pi) < 50:
            raise UsageError("figure1 needs s/(2 pi) >= 50")
        extra["x_count"] = _int(vals, "x_count")
        if extra["x_count"] < 2:
            raise UsageError("x-count must be at least 2")
    elif sc == "oracle-compare":
        if not 50 <= cfg.s <= 500:
            raise UsageError("oracle-compare accepts s in [50, 500]")
    elif sc == "classical":
        if vals.get("b_list") is not None:
            bs = _float_list(vals["b_list"], "b-list")
        else:
            n = _int(vals, "b_count")
            if n < 2:
                raise UsageError("b-count must be at least 2")
            bs = np.linspace(_float(vals, "b_min"), _float(vals, "b_max"), n)
        if bs.size == 0 or np.any(~(np.abs(bs) < 1.0)):
            raise UsageError("impact parameters must lie in (-1, 1)")
        extra["b"] = ",".join(fmt(b) for b in bs)
        extra["mu_prime"] = fmt(_float(vals, "mu_prime"))
        td = vals.get("trajectory_dir")
        if td is not None:
            if not os.path.isdir(td) or not os.access(td, os.W_OK):
                raise UsageError(f"trajectory directory {td} is not writable")
            extra["trajectory_dir"] = td
    _check_output(vals.get("out"))
    return RunSpec(sc, cfg, angles, vals.get("out"), method, tols, extra)


def _write_csv(spec: RunSpec, columns: list[str], rows, comments=()):
    buf = io.StringIO(newline="")
    for line in spec.header():
        buf.write(f"# {line}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if spec.out is None:
        sys.stdout.write(text)
    else:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_xsec(spec: RunSpec) -> int:
    t = xsec.cross_section_table(spec.cfg, spec.angles)
    rows = zip(t.angles, t.dsigma1, t.dsigma2, t.dsigma_total, t.dsigma_ab)
    _write_csv(spec, ["phi", "dsigma1", "dsigma2", "dsigma_total", "dsigma_ab_point"], rows,
               ["dsigma_ab_point is the point-vortex cross section, infinite at phi = 0"])
    return 0


def cmd_figure1(spec: RunSpec) -> int:
    xs = np.linspace(-3.0, 3.0, int(spec.extra["x_count"]))
    integer = spec.cfg.with_(mu=float(spec.cfg.mu_int))
    half = spec.cfg.with_(mu=spec.cfg.mu_int + 0.5)
    ci = xsec.figure1_curve(integer, xs)
    ch = xsec.figure1_curve(half, xs)
    a_int, e_int = xsec.central_peak_area(integer)
    a_half, e_half = xsec.central_peak_area(half)
    summary = [
        "abscissa x = phi s/(2 pi) on [-3, 3]",
        "ordinate = (dsigma1 + dsigma2) / (4 s/(2 pi)); 4 r_c is the total cross section per unit length",
        f"integer flux central-peak area (|phi| < pi/s) = {fmt(a_int)} +- {fmt(e_int)}",
        f"half-integer flux two-peak area (|phi| < 2 pi/s) = {fmt(a_half)} +- {fmt(e_half)}",
    ]
    _write_csv(spec, ["x", "integer_flux", "half_integer_flux"], zip(xs, ci.ordinate, ch.ordinate), summary)
    if spec.out is not None:
        for line in summary[2:]:
            print(line)
    return 0


def cmd_phase_shifts(spec: RunSpec) -> int:
    cfg = spec.cfg
    plan = amplitudes.plan_sums(cfg, spec.tolerances["tol_tail"])
    ev, _ = amplitudes._evanescent_channels(cfg, plan)
    ns = sorted(set(range(plan.n_min, plan.n_max + 1)) | set(int(n) for n in ev))
    rows = []
    for n in ns:
        ch = make_channel(cfg, n)
        c = reflection_coeff(cfg, ch).value
        delta = wkb_phase_shift(cfg, ch) if ch.propagating else math.nan
        regime = "threshold" if ch.nu == cfg.s else ch.regime.value
        rows.append((str(n), ch.nu, regime, delta, c.real, c.imag, abs(c)))
    _write_csv(spec, ["n", "nu", "regime", "delta_wkb", "re_Cn", "im_Cn", "abs_Cn"], rows,
               ["delta_wkb is nan for evanescent channels",
                "threshold rows (nu = s) carry the evanescent-side limit of C_n, which is not a pure phase"])
    return 0


def cmd_oracle_compare(spec: RunSpec) -> int:
    cfg = spec.cfg
    rep = oracle.compare_wkb(cfg)
    phis = np.linspace(math.pi / 4, 3 * math.pi / 4, 65)
    exact = np.abs(oracle.exact_amplitude(cfg, phis)) ** 2
    asym = xsec.dsigma_total(cfg, phis)
    deviation = float(np.mean(np.abs(exact - asym) / asym))
    passed = rep.ratio is not None and rep.ratio <= 0.6
    lines = [
        f"max phase error = {fmt(rep.max_error)} rad at channel n = {rep.max_channel}",
        f"mean phase error = {fmt(rep.mean_error)} rad over {len(rep.ns)} channels",
        f"error ratio s -> 2s = {fmt(rep.ratio)} (expect <= 0.6 for 1/s convergence)",
        f"mean relative cross-section deviation on [pi/4, 3pi/4] = {fmt(deviation)}",
        f"convergence check: {'PASS' if passed else 'FAIL'}",
    ]
    rows = [(str(n), nu, e, str(int(f))) for n, nu, e, f in zip(rep.ns, rep.nus, rep.errors, rep.flagged)]
    _write_csv(spec, ["n", "nu", "phase_error", "non_quasiclassical"], rows, lines)
    stream = sys.stdout if spec.out is not None else sys.stderr
    for line in lines:
        print(line, file=stream)
    return 0 if passed else 1


def cmd_classical(spec: RunSpec) -> int:
    bs = [float(b) for b in spec.extra["b"].split(",")]
    mu_p = float(spec.extra["mu_prime"])
    rows = []
    for b in bs:
        phi = classical.deflection_angle(b)
        rows.append((b, phi, classical.cross_section(phi)))
    _write_csv(spec, ["b", "deflection", "cross_section"], rows)
    td = spec.extra.get("trajectory_dir")
    if td:
        for i, b in enumerate(bs):
            orbit = classical.trajectory(b, mu_prime=mu_p)
            path = os.path.join(td, f"orbit_{i:04d}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(f"# b={fmt(b)} mu_prime={fmt(mu_p)} alpha={fmt(orbit.alpha)}\n")
                fh.write("r,theta,t,z\n")
                for r in orbit.samples:
                    fh.write(",".join(fmt(v) for v in r) + "\n")
    return 0


def cmd_amps(spec: RunSpec) -> int:
    t = amplitudes.amplitude_table(spec.cfg, spec.angles, spec.method)
    cols = ["phi"]
    parts = [t.f0, t.f1, t.f2, t.f3, t.total]
    for name in ("f0", "f1", "f2", "f3", "total"):
        cols += [f"re_{name}", f"im_{name}"]
    rows = []
    for i, phi in enumerate(t.angles):
        row = [phi]
        for arr in parts:
            row += [arr[i].real, arr[i].imag]
        rows.append(row)
    _write_csv(spec, cols, rows, ["f0 and closed-form f2 are nan at phi = 0; total treats nan as 0"])
    return 0


COMMANDS = {
    "xsec": cmd_xsec,
    "figure1": cmd_figure1,
    "phase-shifts": cmd_phase_shifts,
    "oracle-compare": cmd_oracle_compare,
    "classical": cmd_classical,
    "amps": cmd_amps,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = make_spec(args)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[spec.subcommand](spec)
    except (DomainError, amplitudes.ConvergenceError, oracle.OracleError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
