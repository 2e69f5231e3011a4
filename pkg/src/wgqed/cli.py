"""Command-line driver: one subcommand per job, CSV tables plus a JSON manifest."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .config import SUBCOMMANDS, ConfigError, RunConfig, load_config
from .modes import FiberSpec, displacement_profiles
from .pipeline import atom_rates, fiber_model, make_chain, resonance, storage
from .resolvent import ControlField
from .scattering import ScatteringSystem, default_grid

FMT = "%.12e"


def write_csv(path, header, rows):
    rows = np.asarray(rows, dtype=float)
    np.savetxt(path, rows, delimiter=",", header=",".join(header), comments="", fmt=FMT)


def _json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _spec(cfg: RunConfig) -> FiberSpec:
    f = cfg.fiber
    return FiberSpec(f.radius_nm, f.n_core, f.n_clad, f.lambda0_nm)


def _control(cfg: RunConfig) -> ControlField:
    c = cfg.control
    return ControlField(c.rabi_over_gamma, c.detuning_over_gamma, c.enabled)


def _chain(cfg: RunConfig, model):
    ch = cfg.chain
    spacing = None if ch.spacing_mode == "half_lambda_wg" else model.spec.from_nm(float(ch.spacing_mode))
    return make_chain(model, ch.n_atoms, spacing, ch.order, ch.seed, ch.rho_over_a, ch.phi0)


def _grid(cfg: RunConfig, control: ControlField):
    g = cfg.engine.freq_grid
    base = default_grid(control, g.points)
    lo = base[0] if g.min is None else g.min
    hi = base[-1] if g.max is None else g.max
    return np.linspace(lo, hi, g.points)


def _system(cfg, model, control=None):
    chain = _chain(cfg, model)
    control = _control(cfg) if control is None else control
    return ScatteringSystem(chain, model.green, cfg.engine.include_spontaneous_raman, control)


def job_modes(cfg, model, out):
    a = model.spec.radius
    x = np.linspace(0.0, cfg.job.modes_rho_max_over_a, cfg.job.modes_points)
    rho = x * a
    e = model.mode.profiles(rho)
    d = displacement_profiles(model.mode, rho)
    cols = [x]
    for arr in (*e, *d):
        arr = np.asarray(arr, dtype=complex)
        cols += [arr.real, arr.imag]
    names = ["rho_over_a"]
    for n in ("E_rho", "E_phi", "E_z", "D_perp", "D_prime", "D_dprime"):
        names += [f"re_{n}", f"im_{n}"]
    write_csv(os.path.join(out, "modes.csv"), names, np.column_stack(cols))
    return {}


def job_chain(cfg, model, out):
    chain = _chain(cfg, model)
    spec = model.spec
    rows = np.column_stack([np.arange(chain.n_atoms), spec.to_nm(chain.rho), chain.phi, spec.to_nm(chain.z)])
    write_csv(os.path.join(out, "chain.csv"), ["index", "rho_nm", "phi_rad", "z_nm"], rows.reshape(-1, 4))
    return {"n_atoms": chain.n_atoms}


def job_greens(cfg, model, out):
    a = model.spec.radius
    rho = cfg.chain.rho_over_a * a
    dz = np.linspace(0.0, cfg.job.greens_dz_max, cfg.job.greens_points)[1:]
    r = np.column_stack([np.full_like(dz, rho), np.zeros_like(dz), dz])
    rp = np.array([rho, 0.0, 0.0])
    g = model.green
    gw, ge = g.guided(r, rp), g.external(r, rp)
    tot = gw + ge
    cols, names = [dz], ["dz"]
    for i, ci in enumerate("xyz"):
        for j, cj in enumerate("xyz"):
            cols += [tot[:, i, j].real, tot[:, i, j].imag]
            names += [f"re_G{ci}{cj}", f"im_G{ci}{cj}"]
    cols += [np.linalg.norm(gw, axis=(1, 2)), np.linalg.norm(ge, axis=(1, 2))]
    names += ["norm_guided", "norm_external"]
    write_csv(os.path.join(out, "greens.csv"), names, np.column_stack(cols))
    return {}


def job_spectrum(cfg, model, out):
    system = _system(cfg, model)
    d = _grid(cfg, system.ham.control if system.ham else _control(cfg))
    if cfg.job.geometry == "single":
        res = system.single_entry(d, workers=cfg.engine.workers)
        names = ["delta_over_gamma", "T", "R", "L"]
    else:
        res = system.symmetric(d, cfg.job.theta, workers=cfg.engine.workers)
        names = ["delta_over_gamma", "T_fwd", "T_bwd", "L"]
    write_csv(os.path.join(out, "spectrum.csv"), names, res.table())
    return {"points": len(d), "theta": res.theta}


def _fit(cfg, model):
    system = _system(cfg, model)
    window = tuple(cfg.job.fit_window) if cfg.job.fit_window else None
    return system, resonance(system, window=window)


def job_fit(cfg, model, out):
    _, p = _fit(cfg, model)
    summary = {"gamma_c_over_gamma": p.gamma_c, "gamma_total_over_gamma": p.width,
               "omega_star_over_gamma": p.omega_star, "residual": p.residual,
               "n_atoms": cfg.chain.n_atoms}
    _json(os.path.join(out, "fit.json"), summary)
    return {"gamma_c": p.gamma_c}


def job_pulse(cfg, model, out):
    system, p = _fit(cfg, model)
    res = storage(system, p, cfg.job.geometry, cfg.job.theta, cfg.job.pulse_samples,
                  cfg.job.pulse_truncation, cfg.engine.workers)
    rows = np.column_stack([res.times, np.abs(res.pulse.envelope) ** 2, res.power(1), res.power(-1)])
    write_csv(os.path.join(out, "pulse.csv"), ["t_gamma", "input", "out_fwd", "out_bwd"], rows)
    summary = {"eta": res.efficiency, "leaked": res.leaked, "gate_time": res.t_gate,
               "delayed_fwd": res.delayed_forward, "delayed_bwd": res.delayed_backward,
               "gamma_total_over_gamma": p.width, "omega_star_over_gamma": p.omega_star}
    _json(os.path.join(out, "pulse.json"), summary)
    return {"gamma_c": p.gamma_c, "eta": res.efficiency}


def job_bench(cfg, model, out):
    system = _system(cfg, model)
    d = _grid(cfg, system.ham.control)
    t0 = time.perf_counter()
    serial = system.single_entry(d, workers=1)
    t1 = time.perf_counter()
    workers = max(cfg.engine.workers, 2)
    parallel = system.single_entry(d, workers=workers)
    t2 = time.perf_counter()
    summary = {"n_atoms": system.n_atoms, "dim": system.ham.dim, "points": len(d),
               "serial_s": t1 - t0, "parallel_s": t2 - t1, "workers": workers,
               "per_frequency_s": (t1 - t0) / len(d),
               "bit_identical": bool(np.array_equal(serial.s, parallel.s))}
    _json(os.path.join(out, "bench.json"), summary)
    return {}


JOBS = {"modes": job_modes, "chain": job_chain, "greens": job_greens, "spectrum": job_spectrum,
        "pulse": job_pulse, "fit": job_fit, "bench": job_bench}


def run_job(cfg: RunConfig, out: str | None = None) -> dict:
    """Run the configured subcommand, write its artifacts and the manifest."""
    out = cfg.out if out is None else out
    os.makedirs(out, exist_ok=True)
    start = time.perf_counter()
    model = fiber_model(_spec(cfg))
    extra = JOBS[cfg.job.subcommand](cfg, model, out)
    rates = atom_rates(model, cfg.chain.rho_over_a)
    derived = {"k_wg": model.mode.k_wg, "n_eff": model.mode.n_eff, "v_g": model.mode.v_g,
               "gamma_wg": rates.gamma_wg, "gamma_wg_signal": rates.signal_wg,
               "gamma_ext": rates.gamma_ext, "beta": rates.beta,
               "waist": model.fit.waist, "rayleigh_range": model.fit.rayleigh_range}
    if "gamma_c" in extra:
        derived["gamma_c"] = extra.pop("gamma_c")
    manifest = {"config": cfg.to_dict(), "version": __version__, "subcommand": cfg.job.subcommand,
                "seed": cfg.chain.seed, "derived": derived, "results": extra,
                "wall_time_s": time.perf_counter() - start}
    _json(os.path.join(out, "manifest.json"), manifest)
    return manifest


def build_parser():
    p = argparse.ArgumentParser(prog="wgqed", description="Single-photon transport through atom chains on a nanofiber.")
    p.add_argument("command", nargs="?", choices=SUBCOMMANDS, help="job to run")
    p.add_argument("--subcommand", choices=SUBCOMMANDS, help="same as the positional command")
    p.add_argument("--config", help="YAML or JSON config (a manifest.json also works)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="chain disorder seed")
    p.add_argument("--workers", type=int, help="frequency-solve worker threads")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    over: dict = {}
    cmd = args.subcommand or args.command
    if args.command and args.subcommand and args.command != args.subcommand:
        print("error: positional command and --subcommand disagree", file=sys.stderr)
        return 2
    if cmd:
        over.setdefault("job", {})["subcommand"] = cmd
    if args.seed is not None:
        over.setdefault("chain", {})["seed"] = args.seed
    if args.workers is not None:
        over.setdefault("engine", {})["workers"] = args.workers
    if args.out is not None:
        over["out"] = args.out
    try:
        cfg = load_config(args.config, overrides=over)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        run_job(cfg)
    except Exception as exc:  # numerical failures surface with their module
        print(f"{type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
