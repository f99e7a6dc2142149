"""Regenerate the packaged room-classifier training rows.

Samples random poses inside every room of the default world, simulates a
short detection window at each pose with the stock sensor noise, and
turns each window into a detection-count feature vector. The resulting
rows are what `semloc.config.classifier_from_config` loads when a config
names no training file of its own.

Run with --write to overwrite the packaged JSON in the source tree;
without it the script just reports leave-one-out accuracy of the rows it
would write.
"""

import argparse
import json
from pathlib import Path

import numpy as np

import semloc
from semloc.config import TRAINING_RESOURCE
from semloc.semantics import RoomClassifier, build_feature_vector
from semloc.sensormodels import default_cameras
from semloc.simulate import SensorNoiseSpec, generate_world, preset_world, simulate_detections
from semloc.worldmap import load_or_build_visibility_index
from semloc.worldmap.grid import FREE

WINDOW = 5  # detection frames per training row, matches FilterConfig.class_window
FRAME_DT = 0.2


def sample_pose(rng, room_rect, grid):
    """Uniform free pose inside the room, inset from the walls."""
    inset = room_rect.expanded(-0.35)
    for _ in range(200):
        x = rng.uniform(inset.xmin, inset.xmax)
        y = rng.uniform(inset.ymin, inset.ymax)
        if grid.state_at(x, y) == FREE:
            return x, y, rng.uniform(0.0, 2.0 * np.pi)
    raise RuntimeError(f"no free pose found in room at ({room_rect.cx}, {room_rect.cy})")


def window_counts(index, smap, grid, pose, cameras, noise, rng):
    window = [
        simulate_detections(
            index, smap, pose, cameras, noise, rng, grid=grid, timestamp=i * FRAME_DT
        )
        for i in range(WINDOW)
    ]
    return build_feature_vector(window, smap.class_vocabulary, tau_conf=0.5)


def leave_one_out(rows, vocabulary):
    clf = RoomClassifier.from_document(rows, vocabulary, k=1)
    correct = 0
    per_cat = {}
    for i in range(clf.n_samples):
        keep = np.arange(clf.n_samples) != i
        sub = RoomClassifier(
            vocabulary,
            clf.vectors[keep],
            tuple(c for j, c in enumerate(clf.categories) if j != i),
            k=1,
        )
        got = sub.classify(clf.vectors[i])
        want = clf.categories[i]
        hit = got == want
        correct += hit
        n_ok, n_all = per_cat.get(want, (0, 0))
        per_cat[want] = (n_ok + hit, n_all + 1)
    return correct / clf.n_samples, per_cat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=20240811)
    ap.add_argument("--poses-per-room", type=int, default=24)
    ap.add_argument("--cache", default=".cache/default_index.npz", help="visibility index cache")
    ap.add_argument("--write", action="store_true", help="overwrite the packaged training rows")
    args = ap.parse_args()

    grid, smap = generate_world(preset_world("default"))
    print("building (or loading) the default-world visibility index ...")
    index = load_or_build_visibility_index(grid, smap, cache_path=args.cache)

    rng = np.random.default_rng(args.seed)
    cameras = default_cameras()
    noise = SensorNoiseSpec()
    rows = []
    for room in smap.rooms:
        n = args.poses_per_room
        if room.category == "corridor":
            # corridors are thin; fewer poses keep the classes balanced
            n = max(args.poses_per_room // 2, 1)
        for _ in range(n):
            pose = sample_pose(rng, room.rect, grid)
            fv = window_counts(index, smap, grid, pose, cameras, noise, rng)
            counts = {
                smap.class_vocabulary[j]: int(fv[j])
                for j in range(len(fv))
                if fv[j] != 0
            }
            rows.append({"counts": counts, "category": room.category})

    acc, per_cat = leave_one_out(rows, smap.class_vocabulary)
    print(f"{len(rows)} rows, leave-one-out accuracy {acc:.3f}")
    for cat in sorted(per_cat):
        ok, total = per_cat[cat]
        print(f"  {cat:<10} {ok}/{total}")

    if args.write:
        out = Path(semloc.__file__).parent / "data" / TRAINING_RESOURCE
        out.write_text(json.dumps(rows, sort_keys=True, separators=(",", ":")) + "\n")
        print(f"wrote {out}")
    else:
        print("dry run (use --write to update the packaged rows)")


if __name__ == "__main__":
    main()
