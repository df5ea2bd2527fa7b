"""Command line interface and deterministic output files.

Subcommands: simulate | squeeze | determine | bounds | inequalities | gauss.
Every run writes its resolved configuration, delimited data files, rendered
figures and a MANIFEST of sha256 content hashes into the output directory;
reruns with the same configuration and seed produce identical hashes.

Exit codes: 0 ok, 2 config error, 3 numerical blow-up, 4 unresolved
threshold.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import plots
from .bounds import build_bound_report, gauss_constant, record_norms
from .config import RANDOMIZED, ConfigError, RunConfig, parse_config, resolved_text
from .dynamics import FlowState, make_forcing
from .experiments import (
    ExperimentConfig,
    run_determining_modes,
    run_squeezing,
)
from .inequalities import (
    check_commutator,
    check_interpolation,
    check_kato_ponce,
    check_poincare,
    check_sobolev,
    product_band,
    random_samples,
    run_uniform_gronwall_sweep,
)
from .integrate import BlowUpError, Stepper, cfl_dt
from .serialize import dump_spectrum_csv, load_checkpoint, save_checkpoint
from .spectral import SpectralField, make_grid, random_field, zero_field

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_UNRESOLVED = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bouss2d",
        description="2D Boussinesq pseudospectral solver and attractor diagnostics",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, needs_config in (
        ("simulate", True),
        ("squeeze", True),
        ("determine", True),
        ("bounds", True),
        ("inequalities", True),
        ("gauss", False),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config, help="run configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (required for randomized runs)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for experiments")
        p.add_argument(
            "--allow-out-of-range-exponents",
            action="store_true",
            help="accept dissipation exponents outside (1/2, 1) for exploratory runs",
        )
        if name == "gauss":
            p.add_argument("--digits", type=int, default=None, help="digits to print (1..15)")
    return parser


def _fail_config(message: str, out_dir: Path | None) -> int:
    record = {"error": "config", "message": message}
    print(json.dumps(record), file=sys.stderr)
    if out_dir is not None and out_dir.is_dir():
        (out_dir / "error.json").write_text(json.dumps(record, indent=2) + "\n")
    return EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)

    config_text = ""
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            return _fail_config(f"config file not found: {path}", None)
        config_text = path.read_text()
    try:
        cfg = parse_config(config_text, args.subcommand, args.allow_out_of_range_exponents)
        cfg.out_dir = str(out_dir)
        cfg.seed = args.seed
        cfg.threads = max(1, args.threads)
        if args.subcommand == "gauss" and getattr(args, "digits", None) is not None:
            if not 1 <= args.digits <= 15:
                raise ConfigError("--digits must lie in 1..15")
            cfg.gauss_digits = args.digits
        if args.subcommand in RANDOMIZED and cfg.seed is None:
            raise ConfigError(f"subcommand {args.subcommand!r} is randomized; --seed is required")
    except ConfigError as e:
        return _fail_config(str(e), None)

    out_dir.mkdir(parents=True, exist_ok=True)
    writer = OutputWriter(out_dir)
    try:
        code = _dispatch(cfg, writer)
    except BlowUpError as e:
        record = {"error": "blow-up", "message": str(e), "t": e.t}
        print(json.dumps(record), file=sys.stderr)
        writer.write_json("error.json", record)
        writer.write_manifest()
        return EXIT_BLOWUP
    writer.write_manifest()
    return code


class OutputWriter:
    """Single writer for all output files; collects hashes for the MANIFEST."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def register(self, name: str) -> None:
        if name not in self.files:
            self.files.append(name)

    def write_text(self, name: str, text: str) -> None:
        self.path(name).write_text(text)
        self.register(name)

    def write_json(self, name: str, payload) -> None:
        self.write_text(name, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")

    def write_csv(self, name: str, header: list[str], rows) -> None:
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_csv_cell(v) for v in row])
        self.register(name)

    def write_manifest(self) -> None:
        lines = []
        for name in sorted(self.files):
            digest = hashlib.sha256(self.path(name).read_bytes()).hexdigest()
            lines.append(f"{digest}  {name}")
        self.path("MANIFEST").write_text("\n".join(lines) + "\n")


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _dispatch(cfg: RunConfig, writer: OutputWriter) -> int:
    writer.write_text("resolved_config.ini", resolved_text(cfg))
    handler = {
        "simulate": _run_simulate,
        "squeeze": _run_squeeze,
        "determine": _run_determine,
        "bounds": _run_bounds,
        "inequalities": _run_inequalities,
        "gauss": _run_gauss,
    }[cfg.subcommand]
    return handler(cfg, writer)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _initial_state(cfg: RunConfig, grid) -> FlowState:
    init = cfg.initial
    if init.type == "zero":
        return FlowState(zero_field(grid), zero_field(grid), 0.0)
    if init.type == "random":
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
        theta = init.amplitude * random_field(grid, rng, decay=init.decay)
        omega = init.amplitude * random_field(grid, rng, decay=init.decay)
        return FlowState(theta, omega, 0.0)
    if init.type == "modes":
        f = make_forcing(init.modes, grid, cfg.params, s1=1.0)
        return FlowState(f.field, zero_field(grid), 0.0)
    state, _ = load_checkpoint(init.checkpoint, allow_out_of_range=True)
    if state.grid.n != grid.n:
        raise ConfigError(
            f"checkpoint resolution n={state.grid.n} does not match [grid] n={grid.n}"
        )
    return state


def _run_simulate(cfg: RunConfig, writer: OutputWriter) -> int:
    grid = make_grid(cfg.n)
    forcing = make_forcing(cfg.forcing_modes, grid, cfg.params)
    state = _initial_state(cfg, grid)
    ic = cfg.integrator
    dt = ic.dt if ic.dt is not None else cfl_dt(state, cfg.params, ic.cfl_safety, ic.cfl_cap)
    n_steps = max(1, int(round(ic.t_end / dt)))
    stepper = Stepper(
        grid,
        cfg.params,
        forcing,
        dt,
        ic.scheme,
        include_advection=not ic.linear_only,
        include_buoyancy=not ic.linear_only,
    )
    records = [record_norms(state, cfg.params)]

    def cb(s, i):
        if i % cfg.record_interval == 0 or i == n_steps:
            records.append(record_norms(s, cfg.params))

    final, flags = stepper.run(state, n_steps, callback=cb, cfl_recheck=True)

    writer.write_csv(
        "norms.csv",
        ["t", "theta_l2", "theta_hbeta", "theta_h2beta", "theta_hs1",
         "u_l2", "u_halpha", "u_h2alpha", "u_hs2"],
        [
            (r.t, r.theta_l2, r.theta_hbeta, r.theta_h2beta, r.theta_hs1,
             r.u_l2, r.u_halpha, r.u_h2alpha, r.u_hs2)
            for r in records
        ],
    )
    dump_spectrum_csv(final.theta, writer.path("theta_spectrum.csv"))
    writer.register("theta_spectrum.csv")
    dump_spectrum_csv(final.omega, writer.path("omega_spectrum.csv"))
    writer.register("omega_spectrum.csv")
    save_checkpoint(final, cfg.params, writer.path("checkpoint.bin"))
    writer.register("checkpoint.bin")
    plots.save_norms_figure(writer.path("fig_norms.png"), records)
    writer.register("fig_norms.png")
    last = records[-1]
    writer.write_json(
        "summary.json",
        {
            "subcommand": "simulate",
            "dt": dt,
            "steps": n_steps,
            "t_final": final.t,
            "cfl_violations": flags["cfl_violations"],
            "final_norms": {
                "theta_l2": last.theta_l2,
                "theta_hbeta": last.theta_hbeta,
                "u_l2": last.u_l2,
                "u_halpha": last.u_halpha,
            },
        },
    )
    print(f"simulate: {n_steps} steps of dt={dt:.6g}, final ‖θ‖={last.theta_l2:.6g}, ‖u‖={last.u_l2:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _experiment_config(cfg: RunConfig) -> ExperimentConfig:
    ex = cfg.experiment
    return ExperimentConfig(
        n=cfg.n,
        params=cfg.params,
        forcing_modes=cfg.forcing_modes,
        spin_up=ex.spin_up,
        horizon=ex.horizon,
        eps=ex.eps,
        m_list=ex.m_list,
        pairs=ex.pairs,
        seed=cfg.seed,
        dt=cfg.integrator.dt,
        scheme=cfg.integrator.scheme,
        cfl_safety=cfg.integrator.cfl_safety,
        s1=ex.s1,
        s2=ex.s2,
        record_interval=ex.record_interval,
        sync_tol=ex.sync_tol,
        init_amplitude=ex.init_amplitude,
        init_decay=ex.init_decay,
    )


def _run_squeeze(cfg: RunConfig, writer: OutputWriter) -> int:
    result = run_squeezing(_experiment_config(cfg), threads=cfg.threads)
    rows = []
    for p in result.pairs:
        for m in sorted(p.z_end):
            ratio_y = p.y_end / p.y0 if p.y0 > 0 else ""
            ratio_z = p.z_end[m] / p.y0 if p.y0 > 0 else ""
            rows.append((p.pair, m, p.y0, p.y_end, p.z_end[m], ratio_y, ratio_z, p.blew_up))
    writer.write_csv(
        "squeeze.csv",
        ["pair", "m", "y0", "yT", "zT", "yT_over_y0", "zT_over_y0", "blew_up"],
        rows,
    )
    dim = result.dimension_inputs()
    dim_payload = None
    if dim is not None:
        from .bounds import dimension_bound

        m_sq, l_used, d_used = dim
        dim_payload = {
            "m": m_sq,
            "l": l_used,
            "delta": d_used,
            "bound": dimension_bound(m_sq, l_used, d_used),
        }
    writer.write_json(
        "summary.json",
        {
            "subcommand": "squeeze",
            "pairs": len(result.pairs),
            "l_hat": result.l_hat,
            "delta_hat": {str(m): v for m, v in result.delta_hat.items()},
            "delta_spearman": result.delta_spearman,
            "undefined_pairs": sum(p.undefined for p in result.pairs),
            "blown_up_pairs": sum(p.blew_up for p in result.pairs),
            "dimension": dim_payload,
        },
    )
    plots.save_squeezing_figure(writer.path("fig_squeezing.png"), result)
    writer.register("fig_squeezing.png")
    l_txt = "undefined" if result.l_hat is None else f"{result.l_hat:.4g}"
    print(f"squeeze: l_hat={l_txt}, delta spearman={result.delta_spearman:+.3f}")
    return EXIT_OK


def _run_determine(cfg: RunConfig, writer: OutputWriter) -> int:
    result = run_determining_modes(_experiment_config(cfg), threads=cfg.threads)
    ms = sorted(result.runs)
    # shared time base: runs may stop early when marked non-determining
    t_ref = max((result.runs[m].t_series for m in ms), key=len)
    rows = []
    for i, t in enumerate(t_ref):
        row = [t]
        for m in ms:
            series = result.runs[m].d_series
            row.append(series[i] if i < len(series) else "")
        rows.append(row)
    writer.write_csv("determine_series.csv", ["t"] + [f"d_m{m}" for m in ms], rows)
    writer.write_csv(
        "determine_rates.csv",
        ["m", "rate", "synchronized", "non_determining", "d0", "dT"],
        [
            (m, result.runs[m].rate, result.runs[m].synchronized,
             result.runs[m].non_determining, result.runs[m].d_series[0],
             result.runs[m].d_series[-1])
            for m in ms
        ],
    )
    writer.write_json(
        "summary.json",
        {
            "subcommand": "determine",
            "m_star": result.m_star,
            "rate_spearman": result.rate_spearman,
            "plateaued": result.plateaued,
            "rates": {str(m): result.runs[m].rate for m in ms},
            "synchronized": {str(m): result.runs[m].synchronized for m in ms},
        },
    )
    plots.save_determining_figure(writer.path("fig_determining.png"), result)
    writer.register("fig_determining.png")
    print(f"determine: m_star={result.m_star}, rate spearman={result.rate_spearman:+.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds / inequalities / gauss
# ---------------------------------------------------------------------------

def _default_rho_at(eigen) -> tuple[int, ...]:
    """A few shell boundaries spanning the resolved eigenvalues."""
    picks = np.unique(np.round(np.geomspace(1, eigen.count, 8)).astype(int))
    return tuple(int(p) for p in picks)


def _run_bounds(cfg: RunConfig, writer: OutputWriter) -> int:
    grid = make_grid(cfg.n)
    eigen = grid.eigen_index()
    forcing = make_forcing(cfg.forcing_modes, grid, cfg.params)
    rho_at = cfg.rho_at if cfg.rho_at else _default_rho_at(eigen)
    report = build_bound_report(eigen, cfg.params, forcing, cfg.c_free, rho_at)
    payload = report.to_dict()
    payload["gauss_constant"] = gauss_constant()
    payload["resolved_eigenvalues"] = eigen.count
    writer.write_json("bounds.json", payload)
    plots.save_threshold_figure(
        writer.path("fig_threshold.png"),
        eigen,
        cfg.params.alpha,
        report.threshold ** (cfg.params.alpha - 0.5) if math.isfinite(report.threshold) else math.inf,
        report.m_star,
    )
    writer.register("fig_threshold.png")
    writer.write_json("summary.json", {"subcommand": "bounds", "m_star": report.m_star,
                                       "N": report.n_agg, "N_overflow": report.n_overflow})
    print(f"bounds: A={report.a:.6g} B={report.b:.6g} A1={report.a1:.6g}")
    print(f"bounds: M1={report.m1:.6g} M2={report.m2:.6g} M={report.m:.6g}")
    print(f"bounds: N={report.n_agg:.6g} (overflow={report.n_overflow}) threshold={report.threshold:.6g}")
    if report.m_star is None:
        print(f"bounds: threshold unresolved at n={cfg.n} ({eigen.count} eigenfunctions)")
        return EXIT_UNRESOLVED
    print(f"bounds: m_star={report.m_star}")
    return EXIT_OK


def _run_inequalities(cfg: RunConfig, writer: OutputWriter) -> int:
    grid = make_grid(cfg.n)
    children = np.random.SeedSequence(cfg.seed).spawn(4)
    rng_fields = np.random.default_rng(children[0])
    band = product_band(grid)
    reports = []
    s1_i, s_i, s2_i = cfg.ineq_interp_s
    for name in cfg.ineq_checks:
        if name == "poincare":
            fields = random_samples(grid, cfg.ineq_samples, rng_fields, cfg.ineq_decay, band)
            reports.append(check_poincare(fields, s1_i, s2_i))
        elif name == "interpolation":
            fields = random_samples(grid, cfg.ineq_samples, rng_fields, cfg.ineq_decay, band)
            reports.append(check_interpolation(fields, s1_i, s_i, s2_i))
        elif name == "sobolev":
            fields = random_samples(grid, cfg.ineq_samples, rng_fields, cfg.ineq_decay, band)
            reports.append(check_sobolev(fields, cfg.ineq_s))
        elif name == "kato_ponce":
            rng = np.random.default_rng(children[1])
            pairs = [
                (random_field(grid, rng, cfg.ineq_decay, band),
                 random_field(grid, rng, cfg.ineq_decay, band))
                for _ in range(cfg.ineq_samples)
            ]
            reports.append(check_kato_ponce(pairs, cfg.ineq_s))
        elif name == "commutator":
            rng = np.random.default_rng(children[2])
            pairs = [
                (random_field(grid, rng, cfg.ineq_decay, band),
                 random_field(grid, rng, cfg.ineq_decay, band))
                for _ in range(cfg.ineq_samples)
            ]
            reports.append(check_commutator(pairs, cfg.ineq_s))
        elif name == "uniform_gronwall":
            rng = np.random.default_rng(children[3])
            reports.append(run_uniform_gronwall_sweep(rng, cases=max(1, cfg.ineq_samples // 2)))
    writer.write_csv(
        "inequalities.csv",
        ["inequality", "samples", "worst_margin", "fitted_constant", "violations", "note"],
        [
            (r.inequality, r.samples, r.worst_margin,
             r.fitted_constant if r.fitted_constant is not None else "",
             r.violations, r.note)
            for r in reports
        ],
    )
    writer.write_json(
        "summary.json",
        {
            "subcommand": "inequalities",
            "reports": [
                {
                    "inequality": r.inequality,
                    "samples": r.samples,
                    "worst_margin": r.worst_margin,
                    "fitted_constant": r.fitted_constant,
                    "violations": r.violations,
                    "details": r.details,
                }
                for r in reports
            ],
        },
    )
    plots.save_inequalities_figure(writer.path("fig_inequalities.png"), reports)
    writer.register("fig_inequalities.png")
    width = max(len(r.inequality) for r in reports)
    print(f"{'inequality':<{width}}  {'samples':>7}  {'worst margin':>13}  {'fitted C':>10}  viol")
    for r in reports:
        fitted = f"{r.fitted_constant:.4g}" if r.fitted_constant is not None else "-"
        print(f"{r.inequality:<{width}}  {r.samples:>7}  {r.worst_margin:>13.4e}  {fitted:>10}  {r.violations}")
    return EXIT_OK


def _run_gauss(cfg: RunConfig, writer: OutputWriter) -> int:
    value = gauss_constant()
    text = f"{value:.{cfg.gauss_digits}f}"
    print(text)
    writer.write_text("gauss.txt", text + "\n")
    writer.write_json("summary.json", {"subcommand": "gauss", "value": value, "digits": cfg.gauss_digits})
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
