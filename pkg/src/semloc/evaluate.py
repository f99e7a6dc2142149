"""Trajectory scoring: convergence detection, post-convergence ATE, and
aggregation across seeds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import angle_diff


@dataclass(frozen=True)
class ConvergenceCriteria:
    position_radius: float = 0.3
    angle_tolerance: float = np.pi / 4
    deadline_fraction: float = 0.95
    divergence_budget: float = 0.01

    def __post_init__(self):
        if self.position_radius <= 0.0 or self.angle_tolerance <= 0.0:
            raise ValueError("tolerances must be positive")
        for name in ("deadline_fraction", "divergence_budget"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must be in (0, 1]")

    def to_document(self) -> dict:
        return {
            "position_radius": self.position_radius,
            "angle_tolerance": self.angle_tolerance,
            "deadline_fraction": self.deadline_fraction,
            "divergence_budget": self.divergence_budget,
        }

    @staticmethod
    def from_document(doc: dict) -> "ConvergenceCriteria":
        base = ConvergenceCriteria()
        kwargs = {
            key: float(doc[key]) for key in base.to_document() if key in doc
        }
        return ConvergenceCriteria(**kwargs)


@dataclass
class RunEvaluation:
    converged: bool
    success: bool
    convergence_time: float = None
    ate_pos: float = None  # RMSE meters over post-convergence samples
    ate_ang: float = None  # RMSE radians over post-convergence samples
    mae_pos: float = None
    mae_ang: float = None
    divergence_fraction: float = None
    n_samples: int = 0

    def to_document(self) -> dict:
        return {
            "converged": self.converged,
            "success": self.success,
            "convergence_time": self.convergence_time,
            "ate_pos": self.ate_pos,
            "ate_ang": self.ate_ang,
            "mae_pos": self.mae_pos,
            "mae_ang": self.mae_ang,
            "divergence_fraction": self.divergence_fraction,
            "n_samples": self.n_samples,
        }


@dataclass
class EvalReport:
    runs: list
    success_rate: float
    mean_ate_pos: float = None  # over successful runs; None when none succeed
    mean_ate_ang: float = None

    def to_document(self) -> dict:
        return {
            "runs": [r.to_document() for r in self.runs],
            "success_rate": self.success_rate,
            "mean_ate_pos": self.mean_ate_pos,
            "mean_ate_ang": self.mean_ate_ang,
        }

    def table(self) -> str:
        lines = [
            f"{'run':>4}{'converged':>11}{'success':>9}{'t_conv':>9}"
            f"{'ate_pos':>9}{'ate_ang':>9}"
        ]
        for i, r in enumerate(self.runs):
            tc = "-" if r.convergence_time is None else f"{r.convergence_time:.1f}"
            ap = "-" if r.ate_pos is None else f"{r.ate_pos:.3f}"
            aa = "-" if r.ate_ang is None else f"{r.ate_ang:.3f}"
            lines.append(
                f"{i:>4}{str(r.converged):>11}{str(r.success):>9}{tc:>9}"
                f"{ap:>9}{aa:>9}"
            )
        ap = "-" if self.mean_ate_pos is None else f"{self.mean_ate_pos:.3f}"
        aa = "-" if self.mean_ate_ang is None else f"{self.mean_ate_ang:.3f}"
        lines.append(
            f"success rate {self.success_rate:.2f}, "
            f"mean ATE over successes {ap} m / {aa} rad"
        )
        return "\n".join(lines)


def interpolate_ground_truth(gt: np.ndarray, times) -> np.ndarray:
    """(n, 3) poses at the given times from (m, 4) [t, x, y, theta] rows;
    linear in position, shortest-arc in heading."""
    times = np.asarray(times, dtype=np.float64)
    out = np.empty((times.shape[0], 3), dtype=np.float64)
    out[:, 0] = np.interp(times, gt[:, 0], gt[:, 1])
    out[:, 1] = np.interp(times, gt[:, 0], gt[:, 2])
    out[:, 2] = np.interp(times, gt[:, 0], np.unwrap(gt[:, 3]))
    return out


def evaluate(estimates, ground_truth: np.ndarray, criteria: ConvergenceCriteria = None) -> RunEvaluation:
    """Score one run.

    Convergence happens at the first in-tolerance sample after which the
    fraction of out-of-tolerance samples stays within the divergence
    budget. The run succeeds when that happens before the deadline
    fraction of the overlapping timeline. ATE is RMSE over samples from
    convergence onward. Estimates outside the ground-truth time span are
    dropped; an empty overlap is an error.
    """
    criteria = criteria if criteria is not None else ConvergenceCriteria()
    gt = np.asarray(ground_truth, dtype=np.float64)
    if gt.ndim != 2 or gt.shape[1] != 4 or gt.shape[0] < 1:
        raise ValueError("ground truth must be (n, 4) rows of [t, x, y, theta]")
    times = np.array([float(e.timestamp) for e in estimates], dtype=np.float64)
    poses = np.array([[e.pose[0], e.pose[1], e.pose[2]] for e in estimates], dtype=np.float64)
    keep = (times >= gt[0, 0]) & (times <= gt[-1, 0])
    times, poses = times[keep], poses[keep]
    if times.shape[0] == 0:
        raise ValueError("no estimates overlap the ground-truth timeline")
    truth = interpolate_ground_truth(gt, times)
    pos_err = np.hypot(poses[:, 0] - truth[:, 0], poses[:, 1] - truth[:, 1])
    ang_err = np.abs(angle_diff(poses[:, 2], truth[:, 2]))
    within = (pos_err <= criteria.position_radius) & (ang_err <= criteria.angle_tolerance)

    n = within.shape[0]
    viol_suffix = np.cumsum((~within)[::-1])[::-1]
    lengths = n - np.arange(n)
    ok = within & (viol_suffix <= criteria.divergence_budget * lengths)
    idx = int(np.argmax(ok)) if ok.any() else -1
    if idx < 0:
        return RunEvaluation(converged=False, success=False, n_samples=n)

    t0, t1 = float(times[0]), float(times[-1])
    conv_t = float(times[idx])
    deadline = t0 + criteria.deadline_fraction * (t1 - t0)
    tail_pos = pos_err[idx:]
    tail_ang = ang_err[idx:]
    return RunEvaluation(
        converged=True,
        success=conv_t <= deadline,
        convergence_time=conv_t - t0,
        ate_pos=float(np.sqrt(np.mean(tail_pos**2))),
        ate_ang=float(np.sqrt(np.mean(tail_ang**2))),
        mae_pos=float(np.mean(tail_pos)),
        mae_ang=float(np.mean(tail_ang)),
        divergence_fraction=float(viol_suffix[idx] / lengths[idx]),
        n_samples=n,
    )


def aggregate(results) -> EvalReport:
    """Combine per-seed evaluations: success rate over all runs, mean
    ATE over successful runs only (absent when nothing succeeded)."""
    results = list(results)
    if not results:
        raise ValueError("aggregate needs at least one run")
    successes = [r for r in results if r.success]
    rate = len(successes) / len(results)
    if successes:
        mean_pos = float(np.mean([r.ate_pos for r in successes]))
        mean_ang = float(np.mean([r.ate_ang for r in successes]))
    else:
        mean_pos = mean_ang = None
    return EvalReport(
        runs=results,
        success_rate=rate,
        mean_ate_pos=mean_pos,
        mean_ate_ang=mean_ang,
    )
