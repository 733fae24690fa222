"""Command-line front end: configs, sweeps, deterministic CSV/JSON emission.

Subcommands map one-to-one onto the library layers::

    spectrum   mode spectra and dark/bright summaries, optional sweeps
    transfer   four-mode or full-array state transfer trajectories
    probe      reflectivity curves with analytic overlays
    analytic   closed-form spot evaluation
    field      emitted-field maps of a chosen mode
    defects    vacancy Monte Carlo against first-order theory
    nonmarkov  retarded dynamics: branch decay or drive-optimization scans

Configs are TOML; presets are configs shipped under ``presets/`` at the
repository root. Output is CSV with '#'-prefixed metadata lines, 17
significant digits, plus a JSON summary (timestamps live only there), so
re-running a preset with the same seed is byte-identical.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, analytics, dynamics, geometry, hamiltonian, probe, spectrum
from .analytics import DetuningScheme, TransferParams
from .geometry import GaussianMode, LatticeSpec
from .seeding import task_seed

OUTDIR_ENV = "DARKLATTICE_OUTDIR"

EXIT_CONFIG = 3
EXIT_RUNTIME = 4


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# config plumbing


def _load_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")


def _presets_dir() -> Path:
    local = Path.cwd() / "presets"
    if local.is_dir():
        return local
    repo = Path(__file__).resolve().parents[2] / "presets"
    if repo.is_dir():
        return repo
    raise ConfigError("no presets/ directory found (looked in cwd and repo root)")


def _apply_set(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set expects a nonempty key in {assignment!r}")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = node.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"--set {key}: {part} is not a table")
        node = nxt
    node[parts[-1]] = value


def load_config(args: argparse.Namespace) -> dict:
    """Effective config: preset or file, then --set overrides, then --seed."""
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.preset:
        cfg = _load_toml(_presets_dir() / f"{args.preset}.toml")
        cfg.setdefault("preset", args.preset)
    elif args.config:
        cfg = _load_toml(Path(args.config))
    else:
        raise ConfigError("one of --config or --preset is required")
    for assignment in args.set or []:
        _apply_set(cfg, assignment)
    if args.seed is not None:
        cfg["seed"] = args.seed
    cfg.setdefault("seed", 0)
    return cfg


def config_digest(command: str, cfg: dict) -> str:
    payload = json.dumps({"command": command, "config": cfg}, sort_keys=True, default=str)
    return "sha256:" + hashlib.sha256(payload.encode()).hexdigest()


def _resolve_out(args: argparse.Namespace, cfg: dict, default_name: str) -> Path:
    out = args.out or cfg.get("output", {}).get("path") or default_name
    path = Path(out)
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir and not path.is_absolute():
        path = Path(outdir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# CSV / JSON emission


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows, metadata: dict) -> None:
    """CSV with '#'-prefixed metadata, header row, 17-significant-digit floats."""
    lines = [f"# {k} = {_fmt(v)}" for k, v in metadata.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_summary(path: Path, payload: dict) -> None:
    payload = dict(payload)
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def _base_metadata(command: str, cfg: dict) -> dict:
    return {
        "tool": f"darklattice {__version__}",
        "command": command,
        "seed": cfg["seed"],
        "config_digest": config_digest(command, cfg),
        "config": json.dumps(cfg, sort_keys=True, default=str),
    }


# ---------------------------------------------------------------------------
# lattice resolution


def _require(cfg: dict, table: str) -> dict:
    block = cfg.get(table)
    if not isinstance(block, dict):
        raise ConfigError(f"missing [{table}] table")
    return block


def resolve_lattice(lat: dict) -> tuple[LatticeSpec, spectrum.WaistOptimum | None]:
    """LatticeSpec from a [lattice] table; waist = "optimal" runs the optimizer."""
    try:
        n_perp = int(lat["n_perp"])
        spacing = float(lat["spacing"])
        separation = float(lat["separation"])
    except KeyError as exc:
        raise ConfigError(f"[lattice] missing key {exc}")
    waist = lat.get("waist")
    try:
        if waist is None:
            return LatticeSpec(n_perp, spacing, separation), None
        if waist == "optimal":
            base = LatticeSpec(n_perp, spacing, separation)
            opt = spectrum.optimize_waist(base)
            return base.with_waist(opt.waist), opt
        return LatticeSpec(n_perp, spacing, separation, float(waist)), None
    except ValueError as exc:
        raise ConfigError(f"[lattice]: {exc}")


def _pair_observables(spec: LatticeSpec) -> dict:
    _, _, _, pair = spectrum.analyze(spec)
    nan = float("nan")
    return {
        "waist": spec.waist if spec.waist is not None else nan,
        "gamma_d": pair.dark.rate,
        "gamma_b": pair.bright.rate,
        "ratio": pair.ratio,
        "delta_d": pair.shift,
        "qbar_dark": pair.dark.qbar,
        "qbar_bright": pair.bright.qbar,
        "overlap_dark": pair.dark.overlap if pair.dark.overlap is not None else nan,
        "overlap_bright": pair.bright.overlap if pair.bright.overlap is not None else nan,
        "ambiguous": pair.ambiguous,
    }


# ---------------------------------------------------------------------------
# sweep machinery


def _run_points(worker, payloads: list, jobs: int) -> list:
    """Ordered map over independent sweep points, optionally in processes."""
    if jobs <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, payloads))


def _spectrum_worker(payload: dict) -> dict:
    lat = dict(payload["lattice"])
    lat[payload["parameter"]] = payload["value"]
    spec, _ = resolve_lattice(lat)
    obs = _pair_observables(spec)
    return {payload["parameter"]: payload["value"], **obs}


def _transfer_sweep_worker(payload: dict) -> dict:
    ratio = payload["ratio"]
    gamma_b = payload["gamma_b"]
    summary = analytics.transfer_fidelity(ratio * gamma_b, gamma_b)
    params = TransferParams(ratio * gamma_b, gamma_b, summary.omega_opt)
    traj = dynamics.integrate_four_mode(params)
    return {
        "ratio": ratio,
        "fidelity_sim": traj.fidelity,
        "fidelity_formula": summary.fidelity,
        "omega": summary.omega_opt,
        "t_at_max": traj.t_at_max,
    }


def _defects_worker(payload: dict) -> dict:
    spec, _ = resolve_lattice(payload["lattice"])
    stats = spectrum.defect_monte_carlo(
        spec, payload["probability"], payload["realizations"], payload["seed"]
    )
    _, _, _, pair = spectrum.analyze(spec)
    p = payload["probability"]
    return {
        "probability": p,
        "realizations": stats.realizations,
        "mean_dark": stats.mean_dark,
        "stderr_dark": stats.stderr_dark,
        "mean_bright": stats.mean_bright,
        "stderr_bright": stats.stderr_bright,
        "predicted_dark": pair.dark.rate * (1.0 - p) + p,
        "predicted_bright": pair.bright.rate * (1.0 - p) + p,
        "resampled": stats.resampled,
    }


def _nonmarkov_worker(payload: dict) -> dict:
    gd, gb, kl = payload["gamma_d"], payload["gamma_b"], payload["kappa_l"]
    gt = payload["gamma_tau"]
    base = analytics.transfer_fidelity(gd, gb)
    guess = base.omega_opt / math.sqrt(1.0 + 0.75 * gt)

    def peak(omega: float):
        params = TransferParams(gd, gb, omega, gt, kl)
        if gt <= 0.1:
            # short delays force tiny DDE steps; the transform inversion is
            # cheaper and equally accurate in this regime
            t = np.linspace(0.0, dynamics.default_horizon(params), 801)
            c2, _ = analytics.delayed_transfer_laplace(t, params)
            return dynamics._parabolic_peak(t, c2**2)
        traj = dynamics.delayed_transfer(params)
        return traj.fidelity, traj.t_at_max

    lo, hi = 0.6 * guess, 1.5 * guess
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    cache: dict[float, tuple[float, float]] = {}

    def value(w: float) -> float:
        if w not in cache:
            cache[w] = peak(w)
        return cache[w][0]

    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    while (hi - lo) > 0.02 * guess:
        if value(c) > value(d):
            hi, d = d, c
            c = hi - invphi * (hi - lo)
        else:
            lo, c = c, d
            d = lo + invphi * (hi - lo)
    best = max(cache, key=lambda w: cache[w][0])
    fid, t_max = cache[best]
    return {
        "gamma_tau": gt,
        "omega_opt": best,
        "fidelity": fid,
        "t_at_max": t_max,
        "omega_scaled": best * math.sqrt(1.0 + 0.75 * gt),
        "t_scaled": t_max / (1.0 + 0.5 * gt),
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args: argparse.Namespace, cfg: dict) -> int:
    meta = _base_metadata("spectrum", cfg)
    sweep = cfg.get("sweep")
    if sweep:
        parameter = sweep.get("parameter")
        values = sweep.get("values", [])
        if parameter not in ("n_perp", "spacing", "separation", "waist"):
            raise ConfigError(f"unknown sweep parameter {parameter!r}")
        lat = _require(cfg, "lattice")
        if not values:
            if parameter not in lat:
                raise ConfigError(f"empty sweep and no [lattice] {parameter} to fall back on")
            values = [lat[parameter]]
        payloads = [
            {"lattice": lat, "parameter": parameter, "value": v} for v in values
        ]
        rows_d = _run_points(_spectrum_worker, payloads, args.jobs)
        header = list(rows_d[0].keys())
        out = _resolve_out(args, cfg, "spectrum_sweep.csv")
        write_csv(out, header, [[r[k] for k in header] for r in rows_d], meta)
        print(out)
        return 0

    lat = _require(cfg, "lattice")
    spec, opt = resolve_lattice(lat)
    variant = cfg.get("spectrum", {}).get("variant", "scalar")
    sites = geometry.build_arrays(spec)
    if variant == "vector":
        ham = hamiltonian.build_vector(sites)
    elif variant == "scalar":
        ham = hamiltonian.build_scalar(sites)
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    modes = spectrum.diagonalize(ham)
    nan = float("nan")
    rows = [
        [
            i,
            m.rate,
            m.shift,
            m.qbar if m.qbar is not None else nan,
            m.parity if m.parity is not None else 0,
            m.ipr if m.ipr is not None else nan,
        ]
        for i, m in enumerate(modes)
    ]
    if variant == "scalar":
        pair = spectrum.find_dark_bright(modes)
        meta.update(
            gamma_d=pair.dark.rate,
            gamma_b=pair.bright.rate,
            ratio=pair.ratio,
            delta_d=pair.shift,
        )
    if opt is not None:
        meta["waist_opt"] = opt.waist
    out = _resolve_out(args, cfg, "spectrum_modes.csv")
    write_csv(out, ["mode", "rate", "shift", "qbar", "parity", "ipr"], rows, meta)
    print(out)
    return 0


def _trajectory_rows(traj: dynamics.TransferTrajectory):
    header = [
        "time",
        "pop_s1",
        "pop_s2",
        "pop_e",
        "re_c1",
        "im_c1",
        "re_c2",
        "im_c2",
        "re_cb",
        "im_cb",
        "re_cd",
        "im_cd",
    ]
    cols = np.column_stack(
        [
            traj.times,
            traj.pop_s1,
            traj.pop_s2,
            traj.pop_e,
            traj.c1.real,
            traj.c1.imag,
            traj.c2.real,
            traj.c2.imag,
            traj.cb.real,
            traj.cb.imag,
            traj.cd.real,
            traj.cd.imag,
        ]
    )
    return header, cols


def cmd_transfer(args: argparse.Namespace, cfg: dict) -> int:
    meta = _base_metadata("transfer", cfg)
    tr = cfg.get("transfer", {})
    sweep = cfg.get("sweep")
    if sweep:
        if sweep.get("parameter") != "ratio":
            raise ConfigError("transfer sweeps run over parameter = 'ratio'")
        gamma_b = float(tr.get("gamma_b", 1.0))
        values = sweep.get("values") or [float(tr.get("gamma_d", 1e-3)) / gamma_b]
        payloads = [{"ratio": float(v), "gamma_b": gamma_b} for v in values]
        rows_d = _run_points(_transfer_sweep_worker, payloads, args.jobs)
        header = list(rows_d[0].keys())
        out = _resolve_out(args, cfg, "transfer_sweep.csv")
        write_csv(out, header, [[r[k] for k in header] for r in rows_d], meta)
        print(out)
        return 0

    model = tr.get("model", "four_mode")
    t_end = tr.get("t_end")
    n_samples = int(tr.get("n_samples", 1500))
    if model == "four_mode":
        gamma_d = tr.get("gamma_d")
        gamma_b = tr.get("gamma_b")
        if gamma_d is None or gamma_b is None:
            lat = _require(cfg, "lattice")
            spec, _ = resolve_lattice(lat)
            _, _, _, pair = spectrum.analyze(spec)
            gamma_d, gamma_b = pair.dark.rate, pair.bright.rate
        gamma_d, gamma_b = float(gamma_d), float(gamma_b)
        omega = tr.get("omega", "optimal")
        if omega == "optimal":
            omega = analytics.transfer_fidelity(gamma_d, gamma_b).omega_opt
        traj = dynamics.integrate_four_mode(
            TransferParams(gamma_d, gamma_b, float(omega)),
            t_end=float(t_end) if t_end is not None else None,
            n_samples=n_samples,
        )
        delta_d = float("nan")
    elif model == "full":
        lat = _require(cfg, "lattice")
        spec, _ = resolve_lattice(lat)
        _, ham, _, pair = spectrum.analyze(spec)
        gamma_d, gamma_b = pair.dark.rate, pair.bright.rate
        delta_d = pair.shift
        omega = tr.get("omega", "optimal")
        if omega == "optimal":
            omega = analytics.transfer_fidelity(gamma_d, gamma_b).omega_opt
        traj = dynamics.simulate_transfer_full(
            ham,
            pair,
            float(omega),
            t_end=float(t_end) if t_end is not None else None,
            n_samples=n_samples,
        )
    else:
        raise ConfigError(f"unknown transfer model {model!r}")

    formula = analytics.transfer_fidelity(gamma_d, gamma_b)
    meta.update(gamma_d=gamma_d, gamma_b=gamma_b, omega=float(omega), model=model)
    header, cols = _trajectory_rows(traj)
    out = _resolve_out(args, cfg, "transfer_trajectory.csv")
    write_csv(out, header, cols, meta)
    write_summary(
        out.with_suffix(".json"),
        {
            "command": "transfer",
            "model": model,
            "config_digest": meta["config_digest"],
            "seed": cfg["seed"],
            "gamma_d": gamma_d,
            "gamma_b": gamma_b,
            "delta_d": delta_d,
            "omega": float(omega),
            "fidelity": traj.fidelity,
            "t_at_max": traj.t_at_max,
            "fidelity_formula": formula.fidelity,
        },
    )
    print(out)
    return 0


def cmd_probe(args: argparse.Namespace, cfg: dict) -> int:
    meta = _base_metadata("probe", cfg)
    lat = _require(cfg, "lattice")
    spec, _ = resolve_lattice(lat)
    pb = cfg.get("probe", {})
    scheme_name = pb.get("scheme", "both")
    if scheme_name == "both":
        schemes = [DetuningScheme.SYMMETRIC, DetuningScheme.OPPOSITE]
    else:
        try:
            schemes = [DetuningScheme(scheme_name)]
        except ValueError:
            raise ConfigError(f"unknown detuning scheme {scheme_name!r}")
    n_points = int(pb.get("n_points", 161))
    span = float(pb.get("span", 4.0))
    waist = pb.get("waist", spec.waist)
    if waist is None:
        raise ConfigError("[probe] waist required for flat lattices")
    mode = GaussianMode(float(waist))

    _, ham, _, pair = spectrum.analyze(spec)
    gamma_d, gamma_b = pair.dark.rate, pair.bright.rate
    delta_d = float(pb.get("delta_d", pair.shift))
    meta.update(gamma_d=gamma_d, gamma_b=gamma_b, delta_d=delta_d)

    rows = []
    for scheme in schemes:
        width = gamma_b if scheme is DetuningScheme.SYMMETRIC else math.sqrt(
            gamma_d * gamma_b
        )
        deltas = np.linspace(-span * width, span * width, n_points)
        curve = probe.reflectivity_numeric(
            probe.ProbeConfig(spec, mode, delta_d, scheme, tuple(deltas)), ham
        )
        for delta, value in zip(curve.deltas, curve.values):
            rows.append(
                [
                    scheme.value,
                    delta,
                    value,
                    analytics.reflectivity_analytic(delta, gamma_d, gamma_b, scheme),
                ]
            )
    out = _resolve_out(args, cfg, "probe_reflectivity.csv")
    write_csv(out, ["scheme", "delta", "reflectivity", "analytic"], rows, meta)
    print(out)
    return 0


def cmd_analytic(args: argparse.Namespace, cfg: dict) -> int:
    meta = _base_metadata("analytic", cfg)
    an = _require(cfg, "analytic")
    kind = an.get("kind")
    if kind == "fidelity":
        s = analytics.transfer_fidelity(float(an["gamma_d"]), float(an["gamma_b"]))
        header = ["fidelity", "omega_opt", "t_max"]
        rows = [[s.fidelity, s.omega_opt, s.t_max]]
    elif kind == "pair_rates":
        spacing = float(an["spacing"])
        separation = float(an["separation"])
        rates = []
        for parity in (+1, -1):
            r = analytics.gamma_infinite(
                analytics.InfiniteArrayParams(spacing, separation, parity=parity)
            )
            rates.append(float("nan") if r is None else r)
        header = ["big_gamma", "rate_sym", "rate_antisym"]
        rows = [[analytics.big_gamma(spacing), rates[0], rates[1]]]
    elif kind == "memory":
        g, pf, pb_ = analytics.memory_emission(
            float(an["omega"]),
            float(an["big_gamma_pair"]),
            float(an["gamma_d"]),
            float(an["k0l"]),
        )
        header = ["gamma_tilde", "p_forward", "p_backward"]
        rows = [[g, pf, pb_]]
    elif kind == "reflectivity":
        try:
            scheme = DetuningScheme(an.get("scheme", "symmetric"))
        except ValueError:
            raise ConfigError(f"unknown detuning scheme {an.get('scheme')!r}")
        gd, gb = float(an["gamma_d"]), float(an["gamma_b"])
        header = ["delta", "reflectivity"]
        rows = [
            [float(d), analytics.reflectivity_analytic(float(d), gd, gb, scheme)]
            for d in an.get("deltas", [0.0])
        ]
    else:
        raise ConfigError(f"unknown analytic kind {kind!r}")
    out = _resolve_out(args, cfg, "analytic.csv")
    write_csv(out, header, rows, meta)
    print(out)
    return 0


def cmd_field(args: argparse.Namespace, cfg: dict) -> int:
    meta = _base_metadata("field", cfg)
    lat = _require(cfg, "lattice")
    spec, _ = resolve_lattice(lat)
    fd = cfg.get("field", {})
    which = fd.get("mode", "dark")
    if which not in ("dark", "bright"):
        raise ConfigError("field mode must be 'dark' or 'bright'")
    sites, _, _, pair = spectrum.analyze(spec)
    amplitudes = (pair.dark if which == "dark" else pair.bright).vector

    half_l = 0.5 * spec.separation
    x_min = float(fd.get("x_min", -0.75 * spec.transverse_size))
    x_max = float(fd.get("x_max", 0.75 * spec.transverse_size))
    z_min = float(fd.get("z_min", -0.9 * half_l))
    z_max = float(fd.get("z_max", 0.9 * half_l))
    n_x = int(fd.get("n_x", 81))
    n_z = int(fd.get("n_z", 161))
    y = float(fd.get("y", 0.25 * spec.spacing))

    xs = np.linspace(x_min, x_max, n_x)
    zs = np.linspace(z_min, z_max, n_z)
    gx, gz = np.meshgrid(xs, zs, indexing="ij")
    grid = np.column_stack([gx.ravel(), np.full(gx.size, y), gz.ravel()])
    psi = spectrum.field_profile(amplitudes, sites, grid)
    meta.update(mode=which, y=y)
    rows = np.column_stack(
        [grid[:, 0], grid[:, 1], grid[:, 2], np.abs(psi), np.angle(psi)]
    )
    out = _resolve_out(args, cfg, "field_map.csv")
    write_csv(out, ["x", "y", "z", "abs_psi", "arg_psi"], rows, meta)
    print(out)
    return 0


def cmd_defects(args: argparse.Namespace, cfg: dict) -> int:
    meta = _base_metadata("defects", cfg)
    lat = _require(cfg, "lattice")
    df = cfg.get("defects", {})
    fractions = [float(p) for p in df.get("fractions", [0.01, 0.02, 0.05])]
    realizations = int(df.get("realizations", 100))
    master = int(cfg["seed"])
    payloads = [
        {
            "lattice": lat,
            "probability": p,
            "realizations": realizations,
            "seed": task_seed(master, i),
        }
        for i, p in enumerate(fractions)
    ]
    rows_d = _run_points(_defects_worker, payloads, args.jobs)
    header = list(rows_d[0].keys())
    out = _resolve_out(args, cfg, "defects_scan.csv")
    write_csv(out, header, [[r[k] for k in header] for r in rows_d], meta)
    print(out)
    return 0


def cmd_nonmarkov(args: argparse.Namespace, cfg: dict) -> int:
    meta = _base_metadata("nonmarkov", cfg)
    nm = _require(cfg, "nonmarkov")
    mode = nm.get("mode", "branch")
    if mode == "branch":
        branch = nm.get("branch", "dark")
        big_g = float(nm.get("big_gamma_pair", 0.5))
        gamma_d = float(nm.get("gamma_d", 0.0))
        gamma_tau = float(nm.get("gamma_tau", 0.05))
        kappa_l = float(nm.get("kappa_l", 0.0))
        t_end = float(nm.get("t_end", 10.0 / max(big_g, 1e-12)))
        times, values = dynamics.integrate_delay(
            big_g, gamma_d, gamma_tau, kappa_l, branch, t_end
        )
        first = analytics.nonmarkov_amplitudes(
            times, big_g, gamma_d, gamma_tau, kappa_l, branch
        )
        meta.update(branch=branch, gamma_tau=gamma_tau)
        rows = np.column_stack([times, values, first])
        out = _resolve_out(args, cfg, "nonmarkov_branch.csv")
        write_csv(out, ["time", "delayed", "first_order"], rows, meta)
    elif mode == "transfer_scan":
        gamma_d = float(nm.get("gamma_d", 1e-3))
        gamma_b = float(nm.get("gamma_b", 1.0))
        kappa_l = float(nm.get("kappa_l", 0.0))
        gamma_taus = [float(v) for v in nm.get("gamma_taus", [0.01, 1.0, 10.0])]
        payloads = [
            {"gamma_d": gamma_d, "gamma_b": gamma_b, "kappa_l": kappa_l, "gamma_tau": gt}
            for gt in gamma_taus
        ]
        rows_d = _run_points(_nonmarkov_worker, payloads, args.jobs)
        header = list(rows_d[0].keys())
        meta.update(gamma_d=gamma_d, gamma_b=gamma_b)
        out = _resolve_out(args, cfg, "nonmarkov_scan.csv")
        write_csv(out, header, [[r[k] for k in header] for r in rows_d], meta)
    else:
        raise ConfigError(f"unknown nonmarkov mode {mode!r}")
    print(out)
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "transfer": cmd_transfer,
    "probe": cmd_probe,
    "analytic": cmd_analytic,
    "field": cmd_field,
    "defects": cmd_defects,
    "nonmarkov": cmd_nonmarkov,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darklattice",
        description="Collective-emission simulations of paired 2D atomic arrays.",
    )
    parser.add_argument("--version", action="version", version=f"darklattice {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--preset", help="named config from presets/")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config entry (dotted keys, TOML values)",
        )
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--seed", type=int, help="master seed override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # computation failures map to a distinct code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
