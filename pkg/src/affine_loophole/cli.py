"""Command-line runner producing JSON/CSV artifacts.

Exit codes: 0 success, 2 invalid input, 3 saturated device or degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .affine import pseudo_pure_split
from .bellharness import ChshSettings, angular_sweep, chsh_exact, chsh_sampled, distorted_table
from .distortion import DistortionPipeline, analyze_counts, equivalent_affine, theta_for_affine
from .errors import DegenerateDataError, DeviceSaturatedError, LoopholeError
from .lhv import RandomStream, exact_probabilities, model_from_decomposition, run_trials
from .measurement import MeasurementSetting, projective_probabilities
from .qstate import (
    bell_singlet,
    check_density,
    density_from_bloch,
    maximally_mixed,
    validate_density,
)
from .separability import qdice_decomposition, separate
from .serialization import dumps, load_matrix_file, matrix_to_json

log = logging.getLogger("affine_loophole")

SEED_ENV = "AFFINE_LOOPHOLE_SEED"
DEFAULT_SEED = 2003
COMMANDS = ("separate", "mimic", "chsh", "curve", "pseudopure", "validate")
SOURCES = ("singlet", "qdice", "separated")


@dataclass
class RunConfig:
    command: str = "validate"
    state: str = "bell-singlet"
    qubits: int = 2
    source: str = "qdice"
    pipeline: str | None = None
    scale: float = 1.0
    background: float = 0.0
    epsilon: float = 0.0
    theta: float | None = None
    mode: str = "expected"
    trials: int = 1_200_000
    seed: int | None = None
    points: int = 64
    strategy: str = "batch"
    out: str | None = None
    format: str = "json"

    def to_json(self) -> str:
        return dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise LoopholeError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# State and source resolution ---------------------------------------------


def resolve_state(name: str, qubits: int = 2) -> np.ndarray:
    """Named constant, ``bloch:x,y,z`` or a path to a JSON matrix file."""
    if name == "bell-singlet":
        return bell_singlet()
    if name == "qdice-sigma":
        return qdice_decomposition().state()
    if name == "maximally-mixed":
        return maximally_mixed(qubits)
    if name.startswith("bloch:"):
        try:
            v = [float(x) for x in name[len("bloch:"):].split(",")]
        except ValueError as exc:
            raise LoopholeError(f"bad Bloch vector {name!r}") from exc
        return density_from_bloch(v)
    return load_matrix_file(name)


def resolve_source(name: str):
    if name == "singlet":
        return bell_singlet()
    if name == "qdice":
        return model_from_decomposition(qdice_decomposition())
    if name == "separated":
        return model_from_decomposition(separate(bell_singlet()))
    raise LoopholeError(f"unknown source {name!r}; choose from {SOURCES}")


def resolve_pipeline(cfg: RunConfig) -> DistortionPipeline | None:
    """``--pipeline aK`` picks the threshold realizing a = K; explicit flags add to it."""
    theta = cfg.theta or 0.0
    if cfg.pipeline not in (None, "none"):
        if not cfg.pipeline.startswith("a"):
            raise LoopholeError(f"pipeline preset must look like 'a3', got {cfg.pipeline!r}")
        try:
            a = float(cfg.pipeline[1:])
        except ValueError as exc:
            raise LoopholeError(f"bad pipeline preset {cfg.pipeline!r}") from exc
        theta += theta_for_affine(a, cfg.trials, 4)
    if theta == 0 and cfg.scale == 1 and cfg.background == 0 and cfg.epsilon == 0:
        return None
    return DistortionPipeline(cfg.scale, cfg.background, cfg.epsilon, theta, cfg.mode)


# Commands ----------------------------------------------------------------


def cmd_separate(cfg: RunConfig) -> dict:
    rho = check_density(resolve_state(cfg.state, cfg.qubits))
    d = separate(rho, cfg.strategy)
    result = d.to_dict()
    result["n_qubits"] = d.n_qubits
    result["n_terms"] = len(d.products)
    result["reconstruction_error"] = float(np.linalg.norm(d.reconstruct() - rho))
    return result


def _zz_report(model, pipeline, trials, seed) -> dict:
    zz = [MeasurementSetting.from_angle(0.0)] * 2
    counts = run_trials(model, zz, trials, RandomStream(seed, 0))
    sampled = pipeline.process(counts)
    exact_distorted, exact_clipped = distorted_table(model, zz, pipeline, trials)
    return {
        "raw_counts": counts.to_dict(),
        "raw_frequencies": analyze_counts(counts).to_list(),
        "distorted_sampled": sampled.table.to_list(),
        "distorted_sampled_clipped": sampled.clipped,
        "raw_exact": exact_probabilities(model, zz).to_list(),
        "distorted_exact": exact_distorted.to_list(),
        "distorted_exact_clipped": exact_clipped,
        "quantum": projective_probabilities(bell_singlet(), zz).to_list(),
    }


def cmd_mimic(cfg: RunConfig) -> dict:
    trials = cfg.trials
    theta = cfg.theta if cfg.theta is not None else trials / 6
    amap = equivalent_affine(theta, trials, 4)
    model = resolve_source("qdice" if cfg.source == "singlet" else cfg.source)
    pipeline = DistortionPipeline(theta=theta, mode="sampled")
    return {
        "theta": theta,
        "equivalent_a": amap.a,
        "z_z": _zz_report(model, pipeline, trials, cfg.seed),
        "chsh": {
            "quantum": chsh_exact(bell_singlet()).to_dict(),
            "raw_sampled": chsh_sampled(model, None, trials=trials, seed=cfg.seed).to_dict(),
            "distorted_sampled": chsh_sampled(model, pipeline, trials=trials, seed=cfg.seed).to_dict(),
            "distorted_exact": chsh_exact(model, pipeline=pipeline, trials=trials).to_dict(),
        },
        "settings": ChshSettings.canonical().to_dict(),
    }


def cmd_chsh(cfg: RunConfig) -> dict:
    source = resolve_source(cfg.source)
    pipeline = resolve_pipeline(cfg)
    if cfg.mode == "sampled":
        if not hasattr(source, "weights"):
            raise LoopholeError("sampled mode needs a classical source")
        result = chsh_sampled(source, pipeline, trials=cfg.trials, seed=cfg.seed)
    else:
        result = chsh_exact(source, pipeline=pipeline, trials=cfg.trials)
    out = result.to_dict()
    out["settings"] = ChshSettings.canonical().to_dict()
    out["pipeline"] = None if pipeline is None else pipeline.to_dict()
    return out


def cmd_curve(cfg: RunConfig) -> dict:
    pipeline = resolve_pipeline(cfg)
    curve = angular_sweep(resolve_source(cfg.source), pipeline, cfg.points, cfg.trials)
    return {"theta": [float(t) for t in curve.theta], "E": [float(e) for e in curve.E], "source": curve.source}


def cmd_pseudopure(cfg: RunConfig) -> dict:
    rho = check_density(resolve_state(cfg.state, cfg.qubits))
    split = pseudo_pure_split(rho)
    if split is None:
        return {"pseudo_pure": False, "a": None, "pure_state": None}
    return {"pseudo_pure": True, "a": split.a, "pure_state": matrix_to_json(split.pure_state)}


def cmd_validate(cfg: RunConfig) -> dict:
    report = validate_density(resolve_state(cfg.state, cfg.qubits))
    report["valid"] = bool(report["power_of_two"] and report["hermitian"] and report["unit_trace"] and report["psd"])
    return report


HANDLERS = {
    "separate": cmd_separate,
    "mimic": cmd_mimic,
    "chsh": cmd_chsh,
    "curve": cmd_curve,
    "pseudopure": cmd_pseudopure,
    "validate": cmd_validate,
}


# Artifact rendering --------------------------------------------------------


def render(cfg: RunConfig, result: dict, duration: float | None) -> str:
    meta = {"tool": "affine-loophole", "version": __version__, "seed": cfg.seed, "config": asdict(cfg)}
    if duration is not None:
        meta["duration_s"] = duration
    if cfg.format == "csv":
        buf = io.StringIO()
        for key in ("tool", "version", "seed"):
            buf.write(f"# {key}={meta[key]}\n")
        buf.write(f"# config={json.dumps(meta['config'], sort_keys=True)}\n")
        if duration is not None:
            buf.write(f"# duration_s={duration}\n")
        writer = csv.writer(buf, lineterminator="\n")
        if cfg.command == "curve":
            writer.writerow(["theta", "E", "source"])
            for t, e in zip(result["theta"], result["E"]):
                writer.writerow([repr(t), repr(e), result["source"]])
        elif cfg.command in ("chsh",):
            writer.writerow(["arm", "E", "E_error"])
            for i, (e, s) in enumerate(zip(result["E"], result["E_errors"])):
                writer.writerow([i, repr(e), repr(s)])
            writer.writerow(["S", repr(result["S"]), repr(result["S_error"])])
        else:
            raise LoopholeError(f"csv output is available for curve and chsh, not {cfg.command}")
        return buf.getvalue()
    return dumps({**meta, "command": cfg.command, "result": result})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affine-loophole", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="RunConfig JSON file; explicit flags override it")
        p.add_argument("--save-config", help="write the effective RunConfig here")
        p.add_argument("--state", help="bell-singlet | qdice-sigma | maximally-mixed | bloch:x,y,z | matrix.json")
        p.add_argument("--qubits", type=int)
        p.add_argument("--source", choices=SOURCES)
        p.add_argument("--pipeline", help="threshold preset such as a3, or none")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--theta", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--scale", type=float)
        p.add_argument("--background", type=float)
        p.add_argument("--mode", choices=("expected", "sampled"))
        p.add_argument("--points", type=int)
        p.add_argument("--strategy", choices=("batch", "sequential"))
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--timing", action="store_true", help="embed wall-clock duration (breaks byte-identity)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_json(Path(args.config).read_text()) if args.config else RunConfig()
    cfg.command = args.command
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None and f.name != "command":
            setattr(cfg, f.name, value)
    if cfg.seed is None:
        cfg.seed = int(os.environ.get(SEED_ENV, DEFAULT_SEED))
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.save_config:
            Path(args.save_config).write_text(cfg.to_json())
        start = time.perf_counter()
        result = HANDLERS[cfg.command](cfg)
        duration = time.perf_counter() - start
        log.info("%s finished in %.3f s", cfg.command, duration)
        text = render(cfg, result, duration if args.timing else None)
    except (DeviceSaturatedError, DegenerateDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (LoopholeError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.command == "validate" and not result["valid"]:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
