"""Command-line front end.

    fringent spectrum --state s.json --u 6.283 --out out/
    fringent visibility --state s.json --u 12.57 --mode physical
    fringent deviation-scan --s 0.1,0.5,1.0 --u-min 0.1 --u-max 62.83 --grid 500
    fringent bounds --grid 200 --samples 50
    fringent tomography --simulate --atoms 2 --u 12.57 --photons 1000000
    fringent simulate --state s.json --u 12.57 --photons 100000

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import measures, photon_sim, three_atom, tomography, two_atom
from .errors import DomainError, FringentError, InvalidStateError
from .states import TwoQubitBlochState, WLikeState, canonicalize, load_state, state_to_record

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


# --- small parsers --------------------------------------------------------------------

def _floats(text):
    """'a,b,c' or 'lo:hi:n' (inclusive linspace)."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return [float(x) for x in np.linspace(float(lo), float(hi), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def _config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_csv(path, header, rows, cfg):
    lines = [f"# config_sha256={_config_hash(cfg)}", ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n", encoding="utf-8")


def _write_plot(path, csv_name, x, y, group=None):
    lines = [
        "# companion plot script; run with matplotlib available",
        "import csv",
        "import matplotlib.pyplot as plt",
        f"rows = list(csv.DictReader(l for l in open({csv_name!r}) if not l.startswith('#')))",
    ]
    if group:
        lines += [
            f"for key in sorted({{r[{group!r}] for r in rows}}):",
            f"    sel = [r for r in rows if r[{group!r}] == key]",
            f"    plt.plot([float(r[{x!r}]) for r in sel], [float(r[{y!r}]) for r in sel], label=f'{group}={{key}}')",
            "plt.legend()",
        ]
    else:
        lines.append(f"plt.plot([float(r[{x!r}]) for r in rows], [float(r[{y!r}]) for r in rows])")
    lines += [f"plt.xlabel({x!r})", f"plt.ylabel({y!r})", "plt.show()"]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "func")}
    if args.state:
        cfg["state_record"] = Path(args.state).read_text(encoding="utf-8")
    return cfg


def _state(args, required=True):
    if not args.state:
        if required:
            raise UsageError("--state FILE is required")
        return None
    try:
        return load_state(args.state)
    except OSError as exc:
        raise UsageError(f"cannot read state file: {exc}") from exc


def _u(args):
    if args.u is None:
        raise UsageError("--u is required")
    if not args.u > 0:
        raise DomainError("--u must be positive")
    return args.u


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _direction(text):
    v = np.array(_floats(text))
    if v.size != 3 or np.linalg.norm(v) == 0:
        raise UsageError("--direction needs three components, not all zero")
    return v / np.linalg.norm(v)


# --- commands ---------------------------------------------------------------------------

def cmd_spectrum(args):
    state = _state(args)
    u = _u(args)
    cfg = _config(args)
    out = _outdir(args)
    omegas = _floats(args.omega) if args.omega else [float(x) for x in np.linspace(-5, 5, 101)]
    if isinstance(state, TwoQubitBlochState):
        chis = np.linspace(-u, u, args.grid)
        rows = []
        for om in omegas:
            lp, lm = two_atom.eigenmodes_two(u).lorentzians(om)
            bp, bm = two_atom.spectral_weights_two(state, u, chis)
            inten = two_atom.emission_spectrum_two(state, u, om, chis, model=args.model)
            for c, i, p, m in zip(chis, inten, bp, bm):
                rows.append((c, om, i, p, m))
        _write_csv(out / "spectrum.csv", ["chi", "omega", "intensity", "B_plus", "B_minus"], rows, cfg)
        _write_plot(out / "plot_spectrum.py", "spectrum.csv", "chi", "intensity", group="omega")
        return {"file": str(out / "spectrum.csv"), "rows": len(rows)}
    geom = three_atom.TriangleGeometry(u)
    khat = _direction(args.direction)
    model = "auto" if args.model == "lorentzian" else args.model
    inten = three_atom.emission_spectrum_three(state, geom, np.array(omegas), khat, model=model)
    if state.has_phases:
        dp = dm = [float("nan")] * len(omegas)
    else:
        d = three_atom.spectral_weights_three(state, geom, khat)
        dp, dm = [float(d[0])] * len(omegas), [float(d[1])] * len(omegas)
    rows = list(zip(omegas, inten, dp, dm))
    _write_csv(out / "spectrum.csv", ["omega", "intensity", "D_plus", "D_minus"], rows, cfg)
    t = 2 * np.pi * np.arange(args.grid) / args.grid
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    I = three_atom.farfield_intensity(state, T1.ravel(), T2.ravel())
    _write_csv(out / "torus.csv", ["theta1", "theta2", "intensity"], zip(T1.ravel(), T2.ravel(), I), cfg)
    _write_plot(out / "plot_spectrum.py", "spectrum.csv", "omega", "intensity")
    return {"file": str(out / "spectrum.csv"), "rows": len(rows)}


def cmd_visibility(args):
    state = _state(args)
    if isinstance(state, TwoQubitBlochState):
        u = _u(args)
        om = float(_floats(args.omega)[0]) if args.omega else 0.0
        p = two_atom.fringe_params_two(state, u, om)
        summary = {
            "atoms": 2, "u": u, "omega": om, "mode": args.mode,
            "visibility": two_atom.visibility_two(state, u, om, args.mode),
            "concurrence": measures.concurrence_bloch(state),
            "xi_plus": p.xi_plus, "xi_minus": p.xi_minus, "eta": p.eta, "theta0": p.theta0,
        }
    else:
        e = three_atom.fringe_extrema_three(state)
        summary = {
            "atoms": 3, "Imax": e.imax, "Imin": e.imin, "V": three_atom.visibility_three(state),
            "angles": list(e.min_angles),
            "mixedness": measures.mixedness(state),
            "geometric": measures.geometric_measure_wlike(state),
            "negativity_max": measures.negativity_max(state),
            "three_pi": measures.three_pi(state),
        }
    return _emit_summary(args, "visibility", summary)


def _emit_summary(args, name, summary):
    out = _outdir(args)
    if args.format == "json":
        _write_json(out / f"{name}.json", summary)
    else:
        flat = {k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in summary.items()}
        _write_csv(out / f"{name}.csv", list(flat), [list(flat.values())], _config(args))
    return summary


def cmd_deviation_scan(args):
    if args.step is not None and args.step <= 0:
        raise UsageError("--step must be positive")
    if not (0 < args.u_min < args.u_max):
        raise UsageError("need 0 < --u-min < --u-max")
    if args.step is not None:
        us = np.arange(args.u_min, args.u_max + 0.5 * args.step, args.step)
    else:
        us = np.linspace(args.u_min, args.u_max, args.grid)
    s_list = _floats(args.s)
    cfg = _config(args)
    out = _outdir(args)
    rows = []
    for s in s_list:
        for u in us:
            r = two_atom.deviation_max(s, float(u), n_theta=args.n_theta, n_phi=2 * args.n_theta)
            rows.append((u, s, r.max_dev, r.theta_star, r.phi_star, float(two_atom.s0_visibility(u))))
    _write_csv(out / "deviation_scan.csv", ["u", "s", "max_dev", "theta_star", "phi_star", "s0_analytic"],
               rows, cfg)
    _write_plot(out / "plot_deviation_scan.py", "deviation_scan.csv", "u", "max_dev", group="s")
    return {"file": str(out / "deviation_scan.csv"), "rows": len(rows)}


_MEASURE_FN = {
    "mixedness": measures.mixedness,
    "geometric": measures.geometric_measure_wlike,
    "negativity_max": measures.negativity_max,
    "three_pi": measures.three_pi,
}


def cmd_bounds(args):
    vs = [float(v) for v in np.linspace(0.0, 1.0, args.grid + 1)]
    if vs[0] == 0.0:
        warnings.warn("V = 0 excluded: the c3 > 0 family degenerates there", stacklevel=2)
        vs = vs[1:]
    cfg = _config(args)
    out = _outdir(args)
    scatter = []
    for k, V in enumerate(vs):
        if args.samples:
            for st in bnd.sample_states_at_visibility(V, args.samples, seed=args.seed + k):
                for name, fn in _MEASURE_FN.items():
                    scatter.append((V, name, fn(st)))
    for name in bnd.MEASURES:
        rows = []
        for V in vs:
            b = bnd.bounds(name, V, args.variant)
            rows.append((V, b.lower, b.upper, b.lower_closed, b.upper_closed, b.lower_attainer, b.upper_attainer))
        _write_csv(out / f"bounds_{name}.csv",
                   ["V", "lower", "upper", "lower_closed", "upper_closed", "lower_attainer", "upper_attainer"],
                   rows, cfg)
        _write_plot(out / f"plot_bounds_{name}.py", f"bounds_{name}.csv", "V", "upper")
    outside = 0
    for V, name, val in scatter:
        if not bnd.bounds(name, V, args.variant).contains(val):
            outside += 1
    _write_csv(out / "bounds_scatter.csv", ["V", "measure", "value"], scatter, cfg)
    return {"rows": len(vs), "scatter": len(scatter), "outside": outside}


def _simulated_two_atom_samples(state, u, photons, seed, bins=32, omega_bins=16):
    ph = photon_sim.sample_photons_two(state, u, photons, seed=seed, omega_mode="spectral", model="resolvent")
    ce = np.linspace(-u, u, bins + 1)
    oe = np.linspace(-2.0, 2.0, omega_bins + 1)
    H, _, _ = np.histogram2d(ph.phase, ph.omega, bins=[ce, oe])
    C, O = np.meshgrid(np.arange(bins), np.arange(omega_bins), indexing="ij")
    return tomography.FringeSampleSet(
        0.5 * (ce[C] + ce[C + 1]).ravel(), H.ravel(), u=u,
        omegas=0.5 * (oe[O] + oe[O + 1]).ravel(), weights=1.0 / np.maximum(H.ravel(), 1.0),
        bin_edges=np.column_stack([ce[C].ravel(), ce[C + 1].ravel()]),
        omega_edges=np.column_stack([oe[O].ravel(), oe[O + 1].ravel()]))


def _simulated_three_atom_samples(state, u, photons, seed, bins=12):
    ph = photon_sim.sample_photons_three(state, three_atom.TriangleGeometry(u), photons, seed=seed)
    th = np.mod(ph.phase[:, :2], 2 * np.pi)
    H, e1, e2 = np.histogram2d(th[:, 0], th[:, 1], bins=bins, range=[[0, 2 * np.pi]] * 2)
    i, j = np.meshgrid(np.arange(bins), np.arange(bins), indexing="ij")
    i, j = i.ravel(), j.ravel()
    return tomography.FringeSampleSet(
        np.column_stack([0.5 * (e1[i] + e1[i + 1]), 0.5 * (e2[j] + e2[j + 1])]), H.ravel(),
        weights=1.0 / np.maximum(H.ravel(), 1.0),
        bin_edges=np.column_stack([e1[i], e1[i + 1], e2[j], e2[j + 1]]))


def _read_samples_csv(path, atoms):
    try:
        data = np.genfromtxt(path, delimiter=",", names=True, comments="#")
    except OSError as exc:
        raise UsageError(f"cannot read samples: {exc}") from exc
    names = data.dtype.names or ()
    if atoms == 2:
        if "chi" not in names or "intensity" not in names:
            raise UsageError("two-atom sample CSV needs columns chi, intensity[, omega, weight]")
        om = data["omega"] if "omega" in names else None
        w = data["weight"] if "weight" in names else None
        return tomography.FringeSampleSet(data["chi"], data["intensity"], u=float("inf"), omegas=om, weights=w)
    if not {"theta1", "theta2", "intensity"} <= set(names):
        raise UsageError("three-atom sample CSV needs columns theta1, theta2, intensity")
    w = data["weight"] if "weight" in names else None
    return tomography.FringeSampleSet(np.column_stack([data["theta1"], data["theta2"]]), data["intensity"], weights=w)


def cmd_tomography(args):
    state = _state(args, required=False)
    atoms = args.atoms
    if state is not None:
        atoms = 2 if isinstance(state, TwoQubitBlochState) else 3
    if args.simulate:
        if state is None:
            state = (TwoQubitBlochState(0.6, 1.0, 0.7) if atoms == 2
                     else canonicalize(np.array([0.9, 0.4, 0.173205]) * np.exp(1j * np.array([0, 0.3, -1.1])))[0])
        u = _u(args)
        if atoms == 2:
            samples = _simulated_two_atom_samples(state, u, args.photons, args.seed)
        else:
            samples = _simulated_three_atom_samples(state, u, args.photons, args.seed)
    elif args.input:
        samples = _read_samples_csv(args.input, atoms)
        if atoms == 2:
            samples.u = _u(args)
    else:
        raise UsageError("tomography needs --input CSV or --simulate")
    if atoms == 2:
        r = tomography.tomography_two_exact(samples)
        summary = {"state": state_to_record(r.state), "vector": list(r.vector), "stderr": list(r.stderr),
                   "residual": r.residual, "projected": r.projected}
    else:
        r = tomography.tomography_three(samples, norm_tol=args.norm_tol)
        summary = {"state": state_to_record(r.state), "products": list(r.products), "phases": list(r.phases),
                   "residual": r.residual, "norm_residual": r.norm_residual}
    if state is not None:
        summary["truth"] = state_to_record(state)
    return _emit_summary(args, "tomography", summary)


def cmd_simulate(args):
    state = _state(args)
    u = _u(args)
    cfg = _config(args)
    out = _outdir(args)
    if isinstance(state, TwoQubitBlochState):
        om = float(_floats(args.omega)[0]) if args.omega else 0.0
        ph = photon_sim.sample_photons_two(state, u, args.photons, seed=args.seed,
                                           omega_mode=args.omega_mode, omega=om, model=args.model)
        hist = photon_sim.fringe_histogram(ph, bins=args.bins)
        _write_csv(out / "histogram.csv", ["bin_lo", "bin_hi", "count", "intensity", "stderr"], hist.rows(), cfg)
        v, sig = photon_sim.estimate_visibility(hist, seed=args.seed)
        summary = {"photons": len(ph), "V_hat": v, "sigma": sig,
                   "V_physical": two_atom.visibility_two(state, u, om, "physical")}
    else:
        ph = photon_sim.sample_photons_three(state, three_atom.TriangleGeometry(u), args.photons,
                                             seed=args.seed, omega_mode=args.omega_mode)
        summary = {"photons": len(ph)}
    _write_csv(out / "photons.csv", ["omega", "dx", "dy", "dz"], ph.rows(), cfg)
    _emit_summary(args, "simulate", summary)
    return summary


# --- parser -------------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", help="JSON state record")
    common.add_argument("--u", type=float, help="separation k0 r (dimensionless)")
    common.add_argument("--omega", help="detuning(s): 'a,b,c' or 'lo:hi:n'")
    common.add_argument("--grid", type=int, default=201, help="grid points")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--mode", choices=("formal", "physical"), default="formal")
    common.add_argument("--model", choices=("lorentzian", "resolvent"), default="lorentzian")

    p = argparse.ArgumentParser(prog="fringent", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="emission spectrum on a grid")
    s.add_argument("--direction", default="0,0,1", help="photon direction for three atoms")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("visibility", parents=[common], help="visibility and fringe parameters")
    s.set_defaults(func=cmd_visibility)

    s = sub.add_parser("deviation-scan", parents=[common], help="max |V - C| against separation")
    s.add_argument("--s", default="0,0.1,0.5,1.0", help="purities")
    s.add_argument("--u-min", type=float, default=0.1)
    s.add_argument("--u-max", type=float, default=20 * math.pi)
    s.add_argument("--step", type=float, default=None)
    s.add_argument("--n-theta", type=int, default=64)
    s.set_defaults(func=cmd_deviation_scan)

    s = sub.add_parser("bounds", parents=[common], help="entanglement ranges against visibility")
    s.add_argument("--samples", type=int, default=0, help="sampled states per V for the scatter file")
    s.add_argument("--variant", choices=bnd.VARIANTS, default="derived")
    s.set_defaults(func=cmd_bounds, grid=100)

    s = sub.add_parser("tomography", parents=[common], help="state reconstruction")
    s.add_argument("--input", help="CSV of samples")
    s.add_argument("--simulate", action="store_true", help="simulate photons first")
    s.add_argument("--atoms", type=int, choices=(2, 3), default=2)
    s.add_argument("--photons", type=int, default=10**6)
    s.add_argument("--norm-tol", type=float, default=0.05)
    s.set_defaults(func=cmd_tomography)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo photons and fringe histogram")
    s.add_argument("--photons", type=int, default=10**5)
    s.add_argument("--bins", type=int, default=64)
    s.add_argument("--omega-mode", choices=("filtered", "spectral"), default="filtered")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "grid", 1) is not None and args.grid < 1:
        print("error: --grid must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        summary = args.func(args)
    except (UsageError, InvalidStateError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FringentError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(summary, sort_keys=True, default=float))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
