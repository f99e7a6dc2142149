"""Command-line entry point.

Every subcommand takes a configuration document first, then positional
file paths. Successful commands exit 0; failures print one JSON error
object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace

from . import config as cfgmod
from .evaluate import aggregate, evaluate, interpolate_ground_truth
from .logio import (
    LogFormatError,
    read_estimates,
    read_sensor_log,
    write_estimates,
    write_sensor_log,
)
from .mclcore import MODES
from .render import render_frame, save_frame
from .replay import replay_log
from .semantics import stability_scores
from .simulate.run import simulate_run
from .worldmap import (
    MapSchemaError,
    build_visibility_index,
    compute_distance_field,
    load_or_build_visibility_index,
    load_semantic_map,
    save_visibility_index,
)


def _dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _build_index(grid, smap, cfg, excluded_override=None):
    opts = cfgmod.index_options_from_config(cfg)
    excluded = excluded_override if excluded_override is not None else opts["excluded_classes"]
    return load_or_build_visibility_index(
        grid,
        smap,
        angular_resolution=opts["angular_resolution"],
        excluded_classes=excluded,
        cache_path=opts["cache"],
    )


def _cmd_simulate(args) -> int:
    cfg = cfgmod.load_config(args.config)
    spec = cfgmod.world_spec_from_config(cfg)
    grid, smap = cfgmod.build_world_from_config(cfg)
    index = _build_index(grid, smap, cfg)
    trajectory = cfgmod.trajectory_from_config(cfg)
    seed = args.seed if args.seed is not None else cfgmod.seeds_from_config(cfg)[0]
    log = simulate_run(
        grid,
        smap,
        index,
        trajectory,
        noise=cfgmod.noise_from_config(cfg),
        cameras=cfgmod.cameras_from_config(cfg),
        seed=seed,
        rates=cfgmod.rates_from_config(cfg),
        world_name=spec.name,
    )
    write_sensor_log(log, args.out)
    print(
        f"wrote {len(log)} records covering {log.duration():.1f} s to {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_build_index(args) -> int:
    cfg = cfgmod.load_config(args.config)
    grid, smap = cfgmod.build_world_from_config(cfg)
    opts = cfgmod.index_options_from_config(cfg)
    t0 = time.perf_counter()
    index = build_visibility_index(
        grid,
        smap,
        angular_resolution=opts["angular_resolution"],
        excluded_classes=opts["excluded_classes"],
    )
    save_visibility_index(index, args.out)
    print(
        f"indexed {index.entry_count()} (cell, class) bearings across "
        f"{len(index.classes)} classes in {time.perf_counter() - t0:.1f} s",
        file=sys.stderr,
    )
    return 0


def _cmd_localize(args) -> int:
    cfg = cfgmod.load_config(args.config)
    grid, smap = cfgmod.build_world_from_config(cfg)
    fc = cfgmod.filter_from_config(cfg)
    if args.mode is not None:
        fc = replace(fc, mode=args.mode)
    seed = args.seed if args.seed is not None else cfgmod.seeds_from_config(cfg)[0]
    log = read_sensor_log(args.log)
    dist = compute_distance_field(grid, r_max=fc.r_max)
    index = _build_index(grid, smap, cfg) if fc.mode in ("SMCL", "HSMCL") else None
    classifier = None
    if fc.mode in ("HMCL", "HSMCL") and fc.init == "auto":
        classifier = cfgmod.classifier_from_config(cfg, smap.class_vocabulary)

    frame_cb = None
    if args.frames:
        os.makedirs(args.frames, exist_ok=True)
        gt = log.gt_array()
        state = {"count": 0, "written": 0}

        def frame_cb(filt, est):
            i = state["count"]
            state["count"] += 1
            if i % max(args.frame_every, 1) != 0:
                return
            truth = None
            if gt.shape[0] >= 2 and gt[0, 0] <= est.timestamp <= gt[-1, 0]:
                truth = interpolate_ground_truth(gt, [est.timestamp])[0]
            img = render_frame(
                grid, smap, particles=filt.particles, estimate=est, truth=truth
            )
            save_frame(img, os.path.join(args.frames, f"frame_{i:06d}.png"))
            state["written"] += 1

    result = replay_log(
        log,
        fc,
        grid,
        dist,
        smap=smap,
        vis_index=index,
        classifier=classifier,
        seed=seed,
        frame_callback=frame_cb,
    )
    write_estimates(
        args.out,
        result.estimates,
        meta={"mode": fc.mode, "seed": seed, "log": os.path.basename(args.log)},
    )
    print(f"wrote {len(result.estimates)} estimates to {args.out}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    cfg = cfgmod.load_config(args.config)
    criteria = cfgmod.criteria_from_config(cfg)
    log = read_sensor_log(args.log)
    gt = log.gt_array()
    if gt.shape[0] < 2:
        raise LogFormatError("log carries no usable ground truth")
    results = []
    for path in args.estimates:
        _, ests = read_estimates(path)
        results.append(evaluate(ests, gt, criteria))
    report = aggregate(results)
    sys.stdout.write(_dumps(report.to_document()) + "\n")
    print(report.table(), file=sys.stderr)
    return 0


def _cmd_stability(args) -> int:
    cfg = cfgmod.load_config(args.config)
    grid, smap = cfgmod.build_world_from_config(cfg)
    # score every class, including ones normally excluded from the
    # runtime index; exclusion decisions are this command's output
    index = _build_index(grid, smap, cfg, excluded_override=())
    fc = cfgmod.filter_from_config(cfg)
    log = read_sensor_log(args.log)
    report = stability_scores(
        log, smap, index, tau_s=fc.tau_stability, tau_conf=fc.tau_conf
    )
    sys.stdout.write(_dumps(report.to_document()) + "\n")
    print(report.table(), file=sys.stderr)
    return 0


def _cmd_validate_map(args) -> int:
    cfg = cfgmod.load_config(args.config)
    spec = cfgmod.world_spec_from_config(cfg)
    grid, smap = cfgmod.build_world_from_config(cfg)
    checked = {
        "world": spec.name,
        "cells": list(grid.cells.shape),
        "rooms": len(smap.rooms),
        "objects": len(smap.objects),
        "classes": len(smap.class_vocabulary),
    }
    if args.semantic is not None:
        external = load_semantic_map(args.semantic)
        checked["external_objects"] = len(external.objects)
    if args.preview is not None:
        save_frame(render_frame(grid, smap), args.preview)
        checked["preview"] = args.preview
    sys.stdout.write(_dumps({"ok": True, **checked}) + "\n")
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="semloc",
        description="Semantic Monte Carlo localization toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate a sensor log from a configured world")
    sp.add_argument("config")
    sp.add_argument("out")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("build-index", help="precompute the semantic visibility index")
    sp.add_argument("config")
    sp.add_argument("out")
    sp.set_defaults(func=_cmd_build_index)

    sp = sub.add_parser("localize", help="replay a sensor log through the filter")
    sp.add_argument("config")
    sp.add_argument("log")
    sp.add_argument("out")
    sp.add_argument("--mode", choices=MODES, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--frames", default=None, help="directory for rendered frames")
    sp.add_argument("--frame-every", type=int, default=10)
    sp.set_defaults(func=_cmd_localize)

    sp = sub.add_parser("eval", help="score estimate files against logged ground truth")
    sp.add_argument("config")
    sp.add_argument("log")
    sp.add_argument("estimates", nargs="+")
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("stability", help="per-class map consistency of a logged run")
    sp.add_argument("config")
    sp.add_argument("log")
    sp.set_defaults(func=_cmd_stability)

    sp = sub.add_parser("validate-map", help="schema-check a world and render a preview")
    sp.add_argument("config")
    sp.add_argument("semantic", nargs="?", default=None)
    sp.add_argument("--preview", default=None)
    sp.set_defaults(func=_cmd_validate_map)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        cfgmod.ConfigError,
        LogFormatError,
        MapSchemaError,
        ValueError,
        OSError,
    ) as exc:
        print(
            _dumps({"error": str(exc), "kind": type(exc).__name__}), file=sys.stderr
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
