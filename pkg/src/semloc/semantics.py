"""Room-category classification from detection counts, and per-class
map-consistency (stability) analysis of a logged run."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_angle_2pi

# a class is stable when more than this fraction of its confident
# detections agree with the map; strict so a score exactly at the
# threshold stays unstable
STABILITY_RATIO = 0.6


def build_feature_vector(window, vocabulary, tau_conf: float = 0.5) -> np.ndarray:
    """Counts of confident detections per vocabulary class, accumulated
    over a window of detection sets. Classes outside the vocabulary are
    ignored with a warning."""
    idx = {c: i for i, c in enumerate(vocabulary)}
    counts = np.zeros(len(vocabulary), dtype=np.float64)
    unknown = set()
    for dset in window:
        for det in dset:
            if det.confidence < tau_conf:
                continue
            i = idx.get(det.class_label)
            if i is None:
                unknown.add(det.class_label)
                continue
            counts[i] += 1.0
    if unknown:
        warnings.warn(f"ignoring detections of unknown classes: {sorted(unknown)}")
    return counts


@dataclass
class RoomClassifier:
    """k-nearest-neighbor classifier over detection-count vectors."""

    vocabulary: tuple
    vectors: np.ndarray  # (n, len(vocabulary)) float64
    categories: tuple
    k: int = 1

    def __post_init__(self):
        self.vocabulary = tuple(self.vocabulary)
        self.categories = tuple(self.categories)
        self.vectors = np.asarray(self.vectors, dtype=np.float64).reshape(
            len(self.categories), len(self.vocabulary)
        )
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def n_samples(self) -> int:
        return len(self.categories)

    def classify(self, feature: np.ndarray) -> str:
        if self.n_samples == 0:
            raise ValueError("classifier has no training samples")
        q = np.asarray(feature, dtype=np.float64).reshape(-1)
        if q.shape[0] != len(self.vocabulary):
            raise ValueError("feature length does not match vocabulary")
        d2 = np.sum((self.vectors - q) ** 2, axis=1)
        order = np.argsort(d2, kind="stable")[: min(self.k, self.n_samples)]
        votes = {}
        for rank, i in enumerate(order):
            cat = self.categories[int(i)]
            cnt, best_i = votes.get(cat, (0, int(i)))
            votes[cat] = (cnt + 1, min(best_i, int(i)))
        # majority vote; ties go to the category holding the smallest
        # training index among the neighbors
        return max(votes.items(), key=lambda kv: (kv[1][0], -kv[1][1]))[0]

    def to_document(self) -> list:
        rows = []
        for vec, cat in zip(self.vectors, self.categories):
            counts = {
                self.vocabulary[j]: int(vec[j])
                for j in range(len(self.vocabulary))
                if vec[j] != 0.0
            }
            rows.append({"counts": counts, "category": cat})
        return rows

    @staticmethod
    def from_document(rows: list, vocabulary, k: int = 1) -> "RoomClassifier":
        vocabulary = tuple(vocabulary)
        idx = {c: i for i, c in enumerate(vocabulary)}
        vectors = np.zeros((len(rows), len(vocabulary)), dtype=np.float64)
        categories = []
        unknown = set()
        for r, row in enumerate(rows):
            for label, count in row["counts"].items():
                i = idx.get(label)
                if i is None:
                    unknown.add(label)
                    continue
                vectors[r, i] = float(count)
            categories.append(str(row["category"]))
        if unknown:
            warnings.warn(f"training rows reference unknown classes: {sorted(unknown)}")
        return RoomClassifier(vocabulary, vectors, tuple(categories), k=k)


def classify_room(classifier: RoomClassifier, feature: np.ndarray) -> str:
    return classifier.classify(feature)


@dataclass
class StabilityReport:
    """Per-class fraction of logged detections consistent with the map."""

    classes: tuple
    totals: np.ndarray
    consistent: np.ndarray
    tau_s: float
    ratio_threshold: float = STABILITY_RATIO

    def score(self, class_label: str):
        """Consistency ratio, or None for classes never detected."""
        i = self.classes.index(class_label)
        if self.totals[i] == 0:
            return None
        return float(self.consistent[i] / self.totals[i])

    def is_stable(self, class_label: str):
        """True/False, or None when the class has no detections."""
        s = self.score(class_label)
        if s is None:
            return None
        return s > self.ratio_threshold

    def stable_classes(self) -> set:
        return {c for c in self.classes if self.is_stable(c) is True}

    def unstable_classes(self) -> set:
        return {c for c in self.classes if self.is_stable(c) is False}

    def to_document(self) -> dict:
        rows = []
        for i, c in enumerate(self.classes):
            s = self.score(c)
            rows.append(
                {
                    "class": c,
                    "detections": int(self.totals[i]),
                    "consistent": int(self.consistent[i]),
                    "score": s,
                    "stable": self.is_stable(c),
                }
            )
        return {
            "tau_s": self.tau_s,
            "ratio_threshold": self.ratio_threshold,
            "classes": rows,
        }

    def table(self) -> str:
        lines = [f"{'class':<14}{'detections':>11}{'consistent':>11}{'score':>8}  stable"]
        for row in self.to_document()["classes"]:
            score = "-" if row["score"] is None else f"{row['score']:.2f}"
            stable = {True: "yes", False: "no", None: "no-data"}[row["stable"]]
            lines.append(
                f"{row['class']:<14}{row['detections']:>11}{row['consistent']:>11}"
                f"{score:>8}  {stable}"
            )
        return "\n".join(lines)


def stable_class_set(report: StabilityReport) -> set:
    return report.stable_classes()


def _interp_poses(gt: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Linear interpolation of (t, x, y, theta) ground truth rows at the
    requested times; heading interpolates along the shortest arc."""
    out = np.empty((times.shape[0], 3), dtype=np.float64)
    out[:, 0] = np.interp(times, gt[:, 0], gt[:, 1])
    out[:, 1] = np.interp(times, gt[:, 0], gt[:, 2])
    out[:, 2] = np.interp(times, gt[:, 0], np.unwrap(gt[:, 3]))
    return out


def stability_scores(log, smap, index, tau_s: float = 0.6, tau_conf: float = 0.5) -> StabilityReport:
    """Score every vocabulary class by how often its confident
    detections, evaluated at the interpolated ground-truth pose, land
    within bearing distance tau_s of the class bearings stored in the
    index. Raises when a detection frame has no bracketing ground truth.
    """
    gt = log.gt_array()
    if gt.shape[0] < 2:
        raise ValueError("log does not carry enough ground truth to interpolate")
    classes = tuple(smap.class_vocabulary)
    class_idx = {c: i for i, c in enumerate(classes)}
    totals = np.zeros(len(classes), dtype=np.int64)
    consistent = np.zeros(len(classes), dtype=np.int64)
    unknown = set()
    eps = 1e-9
    for t, kind, payload in log:
        if kind != "detections" or len(payload) == 0:
            continue
        if t < gt[0, 0] - eps or t > gt[-1, 0] + eps:
            raise ValueError(
                f"detections at t={t:.3f} have no interpolatable ground truth"
            )
        pose = _interp_poses(gt, np.array([t]))[0]
        cid = index.cell_ids(pose[0], pose[1])
        for det in payload:
            if det.confidence < tau_conf:
                continue
            i = class_idx.get(det.class_label)
            if i is None:
                unknown.add(det.class_label)
                continue
            totals[i] += 1
            q = np.array([wrap_angle_2pi(pose[2] + det.bearing_angle)])
            d = index.nearest_distances(det.class_label, np.array([cid]), q, 2.0)[0]
            if d < tau_s:
                consistent[i] += 1
    if unknown:
        warnings.warn(f"ignoring detections of unknown classes: {sorted(unknown)}")
    return StabilityReport(classes, totals, consistent, tau_s)
