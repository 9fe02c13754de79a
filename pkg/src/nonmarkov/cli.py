"""Experiment runner: INI config in, CSV out.

    nonmarkov run --config configs/fig2_max.ini [--profile ci|full] [--out path]
    nonmarkov collision --epsilon 1 --steps 100 [--out path]

Exit codes: 0 success, 1 a bound check failed, 2 bad config or unwritable
output. ``NONMARKOV_THREADS`` sets the number of worker threads used per
time grid.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    CollisionModel,
    collision_candidates,
    run_collision_model,
    sampled_eps_separable_diameter,
    verify_bound,
)
from .channels import AmplitudeDampingFamily, PhaseDampingFamily
from .errors import ConfigurationError, FreshQubitsExhausted, InvalidChannelError
from .measures import DISTANCES, MODES, certified_epsilon, divisible_candidates, measure_curve
from .sampling import AUX_STREAM, SampleConfig, cell_rng, sample_states

MEASURE_HEADER = ("time_axis", "value", "mode", "epsilon", "argmin_param", "probe_param", "seed")
BOUND_HEADER = ("time_axis", "N", "E", "d", "slack")
COLLISION_HEADER = ("step", "I_Q")
TASKS = ("measure", "bound", "collision")
AXES = ("gt/i", "omega_c_t", "t")
CI_PROFILE = {"n_states": 200, "n_maps": 200, "points": 50}
PROFILES = ("ci", "full")
D_SAMPLES = 2000


def fmt(x) -> str:
    """Floats with 17 significant digits, everything else via ``str``."""
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "measure"
    family: str = "amplitude_damping"
    probe: dict = field(default_factory=dict)
    mode: str = "max"
    epsilon: float = 0.0
    distance: str = "trace"
    start: float = 0.0
    stop: float = 1.0
    points: int = 50
    axis: str = "t"
    sampling: SampleConfig = field(default_factory=SampleConfig)
    include_divisible: bool = True
    collision_periods: tuple = ()
    collision_steps: int = 100
    n_fresh: int = 1000
    output: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigurationError(f"unknown task {self.task!r}")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        if self.distance not in DISTANCES:
            raise ConfigurationError(f"unknown distance {self.distance!r}")
        if self.axis not in AXES:
            raise ConfigurationError(f"unknown axis {self.axis!r}")
        if self.points < 2:
            raise ConfigurationError("a grid needs at least 2 points")
        if not 0.0 <= self.epsilon <= 2.0:
            raise ConfigurationError(f"epsilon={self.epsilon} outside [0, 2]")
        if self.task == "bound" and self.mode == "cjks":
            raise ConfigurationError("bound reports need an input state; use mode max or min")
        if self.task == "bound" and self.distance != "trace":
            raise ConfigurationError("bound reports need the trace distance")
        if self.task != "collision" and self.epsilon > 0 and not self.collision_periods:
            raise ConfigurationError("epsilon > 0 needs collision_periods in [candidates]")


def _get(section, key, conv, default):
    if section is None or key not in section:
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigurationError(f"[{section.name}] {key} = {raw!r}: {exc}") from None


def _bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean")


def _floats(raw: str) -> tuple:
    return tuple(float(x) for x in raw.replace(",", " ").split())


def load_config(path: str, profile: str = "ci") -> ExperimentConfig:
    """Parse an INI file; the ``ci`` profile overlays ``[profile.ci]``."""
    if profile not in PROFILES:
        raise ConfigurationError(f"unknown profile {profile!r}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return config_from_parser(parser, profile)


def config_from_parser(parser: configparser.ConfigParser, profile: str = "ci") -> ExperimentConfig:
    sec = lambda name: parser[name] if parser.has_section(name) else None  # noqa: E731
    exp, probe, grid, samp, cand, coll, out = (
        sec(n) for n in ("experiment", "probe", "grid", "sampling", "candidates", "collision", "output")
    )
    if exp is None:
        raise ConfigurationError("missing [experiment] section")
    n_states = _get(samp, "n_states", int, 2000)
    n_maps = _get(samp, "n_maps", int, 2000)
    points = _get(grid, "points", int, 50)
    if profile == "ci":
        ci = sec("profile.ci")
        n_states = _get(ci, "n_states", int, CI_PROFILE["n_states"])
        n_maps = _get(ci, "n_maps", int, CI_PROFILE["n_maps"])
        points = _get(ci, "points", int, CI_PROFILE["points"])
    try:
        sampling = SampleConfig(
            seed=_get(samp, "seed", int, 0),
            n_states=n_states,
            n_maps=n_maps,
            gamma_min=_get(samp, "gamma_min", float, 1e-3),
            gamma_margin=_get(samp, "gamma_margin", float, 1e-3),
            s_min=_get(samp, "s_min", float, 0.05),
            s_max=_get(samp, "s_max", float, 2.0),
            stratified=_get(samp, "stratified", _bool, True),
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    params = {k: _get(probe, k, float, None) for k in probe if k != "family"} if probe is not None else {}
    return ExperimentConfig(
        task=_get(exp, "task", str, "measure"),
        family=_get(probe, "family", str, "amplitude_damping"),
        probe=params,
        mode=_get(exp, "mode", str, "max"),
        epsilon=_get(exp, "epsilon", float, 0.0),
        distance=_get(exp, "distance", str, "trace"),
        start=_get(grid, "start", float, 0.0),
        stop=_get(grid, "stop", float, 1.0),
        points=points,
        axis=_get(grid, "axis", str, "t"),
        sampling=sampling,
        include_divisible=_get(cand, "include_divisible", _bool, True),
        collision_periods=_get(cand, "collision_periods", _floats, ()),
        collision_steps=_get(coll, "steps", int, 100),
        n_fresh=_get(coll, "n_fresh", int, 1000),
        output=_get(out, "path", str, None),
    )


def build_probe(cfg: ExperimentConfig):
    p = cfg.probe
    try:
        if cfg.family == "amplitude_damping":
            return AmplitudeDampingFamily(p["gamma0"], p["lam"])
        if cfg.family == "phase_damping":
            return PhaseDampingFamily(p["s"], p.get("omega_c", 1.0))
    except KeyError as exc:
        raise ConfigurationError(f"[probe] is missing {exc}") from None
    except (ValueError, InvalidChannelError) as exc:
        raise ConfigurationError(f"invalid probe: {exc}") from None
    raise ConfigurationError(f"unknown probe family {cfg.family!r}")


def time_grid(cfg: ExperimentConfig, probe) -> tuple[np.ndarray, np.ndarray]:
    """Axis values and physical times. ``gt/i`` is ``|g| t``, ``omega_c_t`` is ``omega_c t``."""
    axis = np.linspace(cfg.start, cfg.stop, cfg.points)
    if cfg.axis == "t":
        return axis, axis
    if cfg.axis == "gt/i" and not isinstance(probe, AmplitudeDampingFamily):
        raise ConfigurationError("axis gt/i needs an amplitude-damping probe")
    if cfg.axis == "omega_c_t" and not isinstance(probe, PhaseDampingFamily):
        raise ConfigurationError("axis omega_c_t needs a phase-damping probe")
    scale = probe.axis_scale()
    if not scale > 0:
        raise ConfigurationError("axis scale vanishes for this probe; use axis = t")
    return axis, axis / scale


def build_candidates(cfg: ExperimentConfig, probe):
    """Sampled divisible maps, collision maps, and the probe itself when it qualifies."""
    cands = divisible_candidates(probe, cfg.sampling) if cfg.include_divisible else None
    own = certified_epsilon(probe)
    if cands is not None and own is not None and own <= cfg.epsilon:
        cands = cands.union([probe])
    if cfg.collision_periods:
        coll = collision_candidates(cfg.epsilon, cfg.collision_periods, cfg.n_fresh)
        cands = coll if cands is None else cands.union(coll)
    if cands is None:
        raise ConfigurationError("candidate set is empty")
    return cands


def measure_rows(cfg: ExperimentConfig) -> list[tuple]:
    probe = build_probe(cfg)
    axis, times = time_grid(cfg, probe)
    cands = build_candidates(cfg, probe)
    states = None if cfg.mode == "cjks" else sample_states(cfg.sampling)
    results = measure_curve(probe, times, cands, states, mode=cfg.mode, distance=cfg.distance)
    return [
        (float(a), r.value, r.mode, float(cfg.epsilon), r.argmin_param, float(probe.param), cfg.sampling.seed)
        for a, r in zip(axis, results)
    ]


def bound_reports(cfg: ExperimentConfig) -> list:
    probe = build_probe(cfg)
    axis, times = time_grid(cfg, probe)
    cands = build_candidates(cfg, probe)
    states = sample_states(cfg.sampling)
    results = measure_curve(probe, times, cands, states, mode=cfg.mode, distance=cfg.distance)
    d_eps = None
    if cfg.epsilon > 0:
        d_eps = sampled_eps_separable_diameter(cfg.epsilon, D_SAMPLES, cell_rng(cfg.sampling.seed, AUX_STREAM, 0))
    return [
        (float(a), verify_bound(probe, t, r, d_samples=D_SAMPLES, d_eps=d_eps))
        for a, t, r in zip(axis, times, results)
    ]


def _render(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_experiment(cfg: ExperimentConfig, out: str | None = None) -> int:
    _emit(_render(MEASURE_HEADER, measure_rows(cfg)), out or cfg.output)
    return 0


def run_bound_report(cfg: ExperimentConfig, out: str | None = None) -> int:
    reports = bound_reports(cfg)
    rows = [(a, r.N, r.E, r.d, r.slack) for a, r in reports]
    _emit(_render(BOUND_HEADER, rows), out or cfg.output)
    bad = [a for a, r in reports if not r.holds]
    if bad:
        print(f"bound violated at {len(bad)} grid point(s), first at {bad[0]:.6g}", file=sys.stderr)
        return 1
    return 0


def run_collision_demo(epsilon: float, steps: int, out: str | None = None, n_fresh: int = 1000) -> int:
    try:
        model = CollisionModel(float(epsilon), int(n_fresh))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    trace = run_collision_model(model, int(steps))
    rows = [(s.step, s.mutual_information) for s in trace.steps]
    _emit(_render(COLLISION_HEADER, rows), out)
    return 0


def run_config(cfg: ExperimentConfig, out: str | None = None) -> int:
    if cfg.task == "measure":
        return run_experiment(cfg, out)
    if cfg.task == "bound":
        return run_bound_report(cfg, out)
    return run_collision_demo(cfg.epsilon, cfg.collision_steps, out or cfg.output, cfg.n_fresh)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nonmarkov", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--profile", choices=PROFILES, default="ci")
    run.add_argument("--out", default=None, help="CSV path ('-' for stdout)")
    col = sub.add_parser("collision", help="trace the collision model's mutual information")
    col.add_argument("--epsilon", type=float, required=True)
    col.add_argument("--steps", type=int, default=100)
    col.add_argument("--n-fresh", type=int, default=1000)
    col.add_argument("--out", default=None)
    return ap


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "run":
            return run_config(load_config(args.config, args.profile), args.out)
        return run_collision_demo(args.epsilon, args.steps, args.out, args.n_fresh)
    except (ConfigurationError, FreshQubitsExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
