"""Run configuration: sectioned key=value text, strictly validated.

Example::

    [grid]
    n = 64

    [params]
    viscosity = 0.1
    diffusivity = 0.1
    alpha = 0.75
    beta = 0.75

    [forcing]
    modes = sin 1 0 0.02; cos 0 1 0.02

    [initial]
    type = random
    amplitude = 0.5

    [integrator]
    dt = 0.02
    t_end = 10
    scheme = ifrk4

Unknown keys are rejected with a closest-match suggestion; constraint
violations name the violated constraint.  The subcommand decides which
sections are required.
"""

from __future__ import annotations

import configparser
import difflib
from dataclasses import dataclass, field

from .dynamics import EXPONENT_RANGE_MSG, ForcingMode, PhysParams
from .integrate import DEFAULT_CFL_CAP, IntegratorConfig


class ConfigError(ValueError):
    """Malformed or constraint-violating run configuration."""


_SCHEMA: dict[str, set[str]] = {
    "grid": {"n"},
    "params": {"viscosity", "diffusivity", "alpha", "beta"},
    "forcing": {"modes"},
    "initial": {"type", "amplitude", "decay", "modes", "checkpoint"},
    "integrator": {
        "dt",
        "scheme",
        "cfl_safety",
        "cfl_cap",
        "t_end",
        "linear_only",
        "record_interval",
    },
    "experiment": {
        "spin_up",
        "horizon",
        "eps",
        "m_list",
        "pairs",
        "s1",
        "s2",
        "sync_tol",
        "record_interval",
        "init_amplitude",
        "init_decay",
    },
    "bounds": {"c_free", "rho_at"},
    "inequalities": {"samples", "s", "decay", "checks", "interp_s"},
    "gauss": {"digits"},
}

_REQUIRED_SECTIONS: dict[str, tuple[str, ...]] = {
    "simulate": ("grid", "params", "forcing", "integrator"),
    "squeeze": ("grid", "params", "forcing", "experiment"),
    "determine": ("grid", "params", "forcing", "experiment"),
    "bounds": ("grid", "params", "forcing"),
    "inequalities": ("grid",),
    "gauss": (),
}

#: Subcommands that consume random numbers and therefore need --seed.
RANDOMIZED = {"simulate", "squeeze", "determine", "inequalities"}

_INEQUALITY_CHECKS = (
    "poincare",
    "interpolation",
    "sobolev",
    "kato_ponce",
    "commutator",
    "uniform_gronwall",
)


@dataclass
class InitialSpec:
    type: str = "random"  # random | modes | zero | checkpoint
    amplitude: float = 0.5
    decay: float = 2.0
    modes: tuple[ForcingMode, ...] = ()
    checkpoint: str | None = None


@dataclass
class ExperimentSettings:
    spin_up: float = 0.0
    horizon: float = 10.0
    eps: float = 1e-3
    m_list: tuple[int, ...] = ()
    pairs: int = 1
    s1: float = 1.0
    s2: float = 1.0
    sync_tol: float = 1e-6
    record_interval: int = 5
    init_amplitude: float = 0.5
    init_decay: float = 2.0


@dataclass
class RunConfig:
    subcommand: str
    n: int = 0
    params: PhysParams | None = None
    forcing_modes: tuple[ForcingMode, ...] = ()
    initial: InitialSpec = field(default_factory=InitialSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)
    record_interval: int = 10
    c_free: float = 1.0
    rho_at: tuple[int, ...] = ()
    ineq_samples: int = 200
    ineq_s: float = 0.75
    ineq_decay: float = 2.0
    ineq_checks: tuple[str, ...] = _INEQUALITY_CHECKS
    ineq_interp_s: tuple[float, float, float] = (0.0, 0.5, 1.0)
    gauss_digits: int = 10
    out_dir: str = "."
    seed: int | None = None
    threads: int = 1
    allow_out_of_range: bool = False


def _suggest(key: str, allowed) -> str:
    close = difflib.get_close_matches(key, sorted(allowed), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from None


def _parse_bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")


def parse_modes(raw: str, section: str) -> tuple[ForcingMode, ...]:
    """Parse 'sin 1 0 0.5; cos 2 1 0.25' into mode tuples."""
    modes = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) != 4:
            raise ConfigError(
                f"[{section}] mode entry {chunk!r} must be 'phase k1 k2 amplitude'"
            )
        phase, k1s, k2s, amps = parts
        if phase not in ("sin", "cos"):
            raise ConfigError(f"[{section}] mode phase must be sin or cos, got {phase!r}")
        k1 = _parse_int(section, "modes", k1s)
        k2 = _parse_int(section, "modes", k2s)
        amp = _parse_float(section, "modes", amps)
        if k1 == 0 and k2 == 0:
            raise ConfigError(f"[{section}] mode at k=0 violates the mean-zero requirement")
        modes.append(ForcingMode(k1, k2, amp, phase))
    if not modes:
        raise ConfigError(f"[{section}] empty mode list")
    return tuple(modes)


def parse_config(
    text: str, subcommand: str, allow_out_of_range: bool = False
) -> RunConfig:
    """Parse and fully validate a config for the given subcommand."""
    if subcommand not in _REQUIRED_SECTIONS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str  # keep key case
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]{_suggest(section, _SCHEMA)}")
        allowed = _SCHEMA[section]
        for key in cp[section]:
            if key not in allowed:
                raise ConfigError(
                    f"unknown key {key!r} in [{section}]{_suggest(key, allowed)}"
                )
    for section in _REQUIRED_SECTIONS[subcommand]:
        if section not in cp:
            raise ConfigError(f"subcommand {subcommand!r} requires section [{section}]")

    cfg = RunConfig(subcommand=subcommand, allow_out_of_range=allow_out_of_range)

    if "grid" in cp:
        n = _parse_int("grid", "n", _require(cp, "grid", "n"))
        if n < 8 or n % 2:
            raise ConfigError(f"[grid] n must be even and >= 8, got {n}")
        cfg.n = n

    if "params" in cp:
        nu = _parse_float("params", "viscosity", _require(cp, "params", "viscosity"))
        kappa = _parse_float("params", "diffusivity", _require(cp, "params", "diffusivity"))
        alpha = _parse_float("params", "alpha", _require(cp, "params", "alpha"))
        beta = _parse_float("params", "beta", _require(cp, "params", "beta"))
        if nu <= 0 or kappa <= 0:
            raise ConfigError(
                f"[params] viscosity and diffusivity must be positive, got {nu}, {kappa}"
            )
        in_range = 0.5 < alpha < 1.0 and 0.5 < beta < 1.0
        if not in_range and not allow_out_of_range:
            raise ConfigError(
                f"[params] alpha={alpha}, beta={beta}: {EXPONENT_RANGE_MSG}"
            )
        cfg.params = PhysParams(nu, kappa, alpha, beta, allow_out_of_range=not in_range)

    if "forcing" in cp:
        cfg.forcing_modes = parse_modes(_require(cp, "forcing", "modes"), "forcing")

    if "initial" in cp:
        sec = cp["initial"]
        init = InitialSpec()
        init.type = sec.get("type", "random").strip()
        if init.type not in ("random", "modes", "zero", "checkpoint"):
            raise ConfigError(f"[initial] type must be random|modes|zero|checkpoint, got {init.type!r}")
        if "amplitude" in sec:
            init.amplitude = _parse_float("initial", "amplitude", sec["amplitude"])
        if "decay" in sec:
            init.decay = _parse_float("initial", "decay", sec["decay"])
        if "modes" in sec:
            init.modes = parse_modes(sec["modes"], "initial")
        if "checkpoint" in sec:
            init.checkpoint = sec["checkpoint"].strip()
        if init.type == "modes" and not init.modes:
            raise ConfigError("[initial] type=modes requires a modes list")
        if init.type == "checkpoint" and not init.checkpoint:
            raise ConfigError("[initial] type=checkpoint requires a checkpoint path")
        cfg.initial = init

    if "integrator" in cp:
        sec = cp["integrator"]
        kw = {}
        if "dt" in sec:
            kw["dt"] = _parse_float("integrator", "dt", sec["dt"])
            if kw["dt"] <= 0:
                raise ConfigError(f"[integrator] dt must be positive, got {kw['dt']}")
        if "scheme" in sec:
            kw["scheme"] = sec["scheme"].strip()
            if kw["scheme"] not in ("ifrk2", "ifrk4"):
                raise ConfigError(f"[integrator] scheme must be ifrk2 or ifrk4, got {kw['scheme']!r}")
        if "cfl_safety" in sec:
            kw["cfl_safety"] = _parse_float("integrator", "cfl_safety", sec["cfl_safety"])
            if not 0 < kw["cfl_safety"] <= 1:
                raise ConfigError(
                    f"[integrator] cfl_safety must lie in (0, 1], got {kw['cfl_safety']}"
                )
        if "cfl_cap" in sec:
            kw["cfl_cap"] = _parse_float("integrator", "cfl_cap", sec["cfl_cap"])
            if kw["cfl_cap"] <= 0:
                raise ConfigError(f"[integrator] cfl_cap must be positive, got {kw['cfl_cap']}")
        if "t_end" in sec:
            kw["t_end"] = _parse_float("integrator", "t_end", sec["t_end"])
            if kw["t_end"] < 0:
                raise ConfigError(f"[integrator] t_end must be nonnegative, got {kw['t_end']}")
        if "linear_only" in sec:
            kw["linear_only"] = _parse_bool("integrator", "linear_only", sec["linear_only"])
        cfg.integrator = IntegratorConfig(**kw)
        if "record_interval" in sec:
            cfg.record_interval = _parse_int("integrator", "record_interval", sec["record_interval"])
            if cfg.record_interval < 1:
                raise ConfigError("[integrator] record_interval must be >= 1")

    if "experiment" in cp:
        sec = cp["experiment"]
        ex = ExperimentSettings()
        for key, conv, attr in (
            ("spin_up", _parse_float, "spin_up"),
            ("horizon", _parse_float, "horizon"),
            ("eps", _parse_float, "eps"),
            ("s1", _parse_float, "s1"),
            ("s2", _parse_float, "s2"),
            ("sync_tol", _parse_float, "sync_tol"),
            ("init_amplitude", _parse_float, "init_amplitude"),
            ("init_decay", _parse_float, "init_decay"),
            ("pairs", _parse_int, "pairs"),
            ("record_interval", _parse_int, "record_interval"),
        ):
            if key in sec:
                setattr(ex, attr, conv("experiment", key, sec[key]))
        if "m_list" in sec:
            try:
                ex.m_list = tuple(int(v) for v in sec["m_list"].split())
            except ValueError:
                raise ConfigError(f"[experiment] m_list must be whitespace-separated integers") from None
        if ex.eps <= 0:
            raise ConfigError(f"[experiment] eps must be positive, got {ex.eps}")
        if ex.horizon <= 0:
            raise ConfigError(f"[experiment] horizon must be positive, got {ex.horizon}")
        if ex.spin_up < 0:
            raise ConfigError(f"[experiment] spin_up must be nonnegative, got {ex.spin_up}")
        if ex.pairs < 1:
            raise ConfigError(f"[experiment] pairs must be >= 1, got {ex.pairs}")
        if any(m < 0 for m in ex.m_list):
            raise ConfigError("[experiment] m_list entries must be nonnegative")
        cfg.experiment = ex

    if "bounds" in cp:
        sec = cp["bounds"]
        if "c_free" in sec:
            cfg.c_free = _parse_float("bounds", "c_free", sec["c_free"])
            if cfg.c_free <= 0:
                raise ConfigError(f"[bounds] c_free must be positive, got {cfg.c_free}")
        if "rho_at" in sec:
            try:
                cfg.rho_at = tuple(int(v) for v in sec["rho_at"].split())
            except ValueError:
                raise ConfigError("[bounds] rho_at must be whitespace-separated integers") from None

    if "inequalities" in cp:
        sec = cp["inequalities"]
        if "samples" in sec:
            cfg.ineq_samples = _parse_int("inequalities", "samples", sec["samples"])
            if cfg.ineq_samples < 1:
                raise ConfigError("[inequalities] samples must be >= 1")
        if "s" in sec:
            cfg.ineq_s = _parse_float("inequalities", "s", sec["s"])
            if not 0 < cfg.ineq_s < 1:
                raise ConfigError(f"[inequalities] s must lie in (0, 1), got {cfg.ineq_s}")
        if "decay" in sec:
            cfg.ineq_decay = _parse_float("inequalities", "decay", sec["decay"])
        if "interp_s" in sec:
            vals = tuple(float(v) for v in sec["interp_s"].split())
            if len(vals) != 3 or not vals[0] <= vals[1] <= vals[2]:
                raise ConfigError("[inequalities] interp_s must be three ordered values s1 s s2")
            cfg.ineq_interp_s = vals
        if "checks" in sec:
            checks = tuple(sec["checks"].split())
            for c in checks:
                if c not in _INEQUALITY_CHECKS:
                    raise ConfigError(
                        f"[inequalities] unknown check {c!r}{_suggest(c, _INEQUALITY_CHECKS)}"
                    )
            cfg.ineq_checks = checks

    if "gauss" in cp:
        sec = cp["gauss"]
        if "digits" in sec:
            cfg.gauss_digits = _parse_int("gauss", "digits", sec["digits"])
            if not 1 <= cfg.gauss_digits <= 15:
                raise ConfigError("[gauss] digits must lie in 1..15")

    _cross_validate(cfg, cp)
    return cfg


def _require(cp, section: str, key: str) -> str:
    if key not in cp[section]:
        raise ConfigError(f"missing required key {key!r} in [{section}]")
    return cp[section][key]


def _cross_validate(cfg: RunConfig, cp) -> None:
    if cfg.subcommand in ("squeeze", "determine") and not cfg.experiment.m_list:
        raise ConfigError(f"subcommand {cfg.subcommand!r} requires [experiment] m_list")
    if cfg.n and cfg.forcing_modes:
        cut = cfg.n // 3
        for m in cfg.forcing_modes:
            if max(abs(m.k1), abs(m.k2)) > cut:
                raise ConfigError(
                    f"forcing mode k=({m.k1},{m.k2}) lies outside the dealias cut {cut} of n={cfg.n}"
                )
    if cfg.n and cfg.experiment.m_list:
        cut = cfg.n // 3
        count = (2 * cut + 1) ** 2 - 1
        for m in cfg.experiment.m_list:
            if m > count:
                raise ConfigError(
                    f"[experiment] m={m} exceeds the {count} resolved eigenfunctions at n={cfg.n}"
                )
    if cfg.subcommand == "simulate" and "integrator" in cp:
        if cfg.integrator.t_end <= 0:
            raise ConfigError("[integrator] simulate requires t_end > 0")


def resolved_text(cfg: RunConfig) -> str:
    """Render the fully resolved configuration (written next to the outputs)."""
    lines = [f"# resolved configuration (subcommand: {cfg.subcommand})"]
    if cfg.seed is not None:
        lines.append(f"# seed = {cfg.seed}")
    lines.append(f"# threads = {cfg.threads}")
    if cfg.n:
        lines += ["", "[grid]", f"n = {cfg.n}"]
    if cfg.params is not None:
        p = cfg.params
        lines += [
            "",
            "[params]",
            f"viscosity = {p.nu!r}",
            f"diffusivity = {p.kappa!r}",
            f"alpha = {p.alpha!r}",
            f"beta = {p.beta!r}",
        ]
    if cfg.forcing_modes:
        entries = "; ".join(f"{m.phase} {m.k1} {m.k2} {m.amplitude!r}" for m in cfg.forcing_modes)
        lines += ["", "[forcing]", f"modes = {entries}"]
    if cfg.subcommand == "simulate":
        init = cfg.initial
        lines += ["", "[initial]", f"type = {init.type}"]
        if init.type == "random":
            lines += [f"amplitude = {init.amplitude!r}", f"decay = {init.decay!r}"]
        elif init.type == "modes":
            entries = "; ".join(f"{m.phase} {m.k1} {m.k2} {m.amplitude!r}" for m in init.modes)
            lines += [f"modes = {entries}"]
        elif init.type == "checkpoint":
            lines += [f"checkpoint = {init.checkpoint}"]
        ic = cfg.integrator
        lines += [
            "",
            "[integrator]",
            f"dt = {ic.dt!r}" if ic.dt is not None else "# dt chosen from the CFL bound",
            f"scheme = {ic.scheme}",
            f"cfl_safety = {ic.cfl_safety!r}",
            f"cfl_cap = {ic.cfl_cap!r}",
            f"t_end = {ic.t_end!r}",
            f"linear_only = {str(ic.linear_only).lower()}",
            f"record_interval = {cfg.record_interval}",
        ]
    if cfg.subcommand in ("squeeze", "determine"):
        ex = cfg.experiment
        lines += [
            "",
            "[experiment]",
            f"spin_up = {ex.spin_up!r}",
            f"horizon = {ex.horizon!r}",
            f"eps = {ex.eps!r}",
            f"m_list = {' '.join(str(m) for m in ex.m_list)}",
            f"pairs = {ex.pairs}",
            f"s1 = {ex.s1!r}",
            f"s2 = {ex.s2!r}",
            f"sync_tol = {ex.sync_tol!r}",
            f"record_interval = {ex.record_interval}",
            f"init_amplitude = {ex.init_amplitude!r}",
            f"init_decay = {ex.init_decay!r}",
        ]
    if cfg.subcommand == "bounds":
        lines += ["", "[bounds]", f"c_free = {cfg.c_free!r}"]
        if cfg.rho_at:
            lines += [f"rho_at = {' '.join(str(m) for m in cfg.rho_at)}"]
    if cfg.subcommand == "inequalities":
        lines += [
            "",
            "[inequalities]",
            f"samples = {cfg.ineq_samples}",
            f"s = {cfg.ineq_s!r}",
            f"decay = {cfg.ineq_decay!r}",
            f"interp_s = {' '.join(repr(v) for v in cfg.ineq_interp_s)}",
            f"checks = {' '.join(cfg.ineq_checks)}",
        ]
    if cfg.subcommand == "gauss":
        lines += ["", "[gauss]", f"digits = {cfg.gauss_digits}"]
    return "\n".join(lines) + "\n"
