"""Classification benchmarking (DET/EER) and FR utility prediction (EDC/pAUC).

Conventions: neutral is the positive class and the decision rule is
score >= threshold => neutral, so FNR(t) is the fraction of neutral scores
below t and FPR(t) the fraction of non-neutral scores at or above t. EDC
pair quality is the minimum of the two sample confidences; discards are by
ascending pair quality with lexicographic (probe_id, reference_id)
tie-breaking, exactly floor(d * P) pairs at each grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codec import FeatureRecord


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class MatedComparison:
    probe_id: str
    reference_id: str
    similarity: float

    def __post_init__(self):
        if self.probe_id == self.reference_id:
            raise EvalError(f"mated comparison must pair distinct samples, got {self.probe_id!r} twice")


@dataclass
class DetCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    fnr: np.ndarray
    eer: float


@dataclass
class EdcCurve:
    discard_fractions: np.ndarray
    fnmr_values: np.ndarray
    threshold: float
    pauc: float
    pauc_normalized: float
    truncated: bool = False


@dataclass
class ClassFlow:
    discard_fractions: np.ndarray
    proportions: dict[str, np.ndarray] = field(default_factory=dict)


def det_curve(scores: np.ndarray, is_neutral: np.ndarray) -> DetCurve:
    """Full threshold sweep over distinct scores plus infinite sentinels."""
    scores = np.asarray(scores, dtype=np.float64)
    is_neutral = np.asarray(is_neutral, dtype=bool)
    pos = np.sort(scores[is_neutral])
    neg = np.sort(scores[~is_neutral])
    if len(pos) == 0 or len(neg) == 0:
        raise EvalError("DET requires both classes")

    thresholds = np.concatenate(([-np.inf], np.unique(scores), [np.inf]))
    # FNR(t) = #{pos < t}/|pos|; FPR(t) = #{neg >= t}/|neg|
    fnr = np.searchsorted(pos, thresholds, side="left") / len(pos)
    fpr = (len(neg) - np.searchsorted(neg, thresholds, side="left")) / len(neg)
    return DetCurve(thresholds=thresholds, fpr=fpr, fnr=fnr, eer=_eer(fnr, fpr))


def _eer(fnr: np.ndarray, fpr: np.ndarray) -> float:
    """EER at the FNR/FPR crossing, linearly interpolated between brackets."""
    diff = fnr - fpr
    idx = int(np.argmax(diff >= 0.0))  # first nonnegative; diff[0] = -1 unless degenerate
    if diff[idx] == 0.0:
        return float(fnr[idx])
    if idx == 0:
        return float(fnr[0])
    d0, d1 = diff[idx - 1], diff[idx]
    lam = -d0 / (d1 - d0)
    return float(fnr[idx - 1] + lam * (fnr[idx] - fnr[idx - 1]))


def _discard_grid(d_max: float, grid_step: float) -> np.ndarray:
    if d_max <= 0 or grid_step <= 0:
        raise EvalError("d_max and grid_step must be positive")
    n_steps = int(math.floor(d_max / grid_step + 1e-9))
    grid = [i * grid_step for i in range(n_steps + 1)]
    if grid[-1] < d_max - 1e-12:
        grid.append(d_max)
    return np.asarray(grid)


def _discard_count(d: float, n: int) -> int:
    return min(n, int(math.floor(d * n + 1e-9)))


def solve_threshold(similarities: np.ndarray, starting_fnmr: float) -> float:
    """Smallest threshold with FNMR >= starting_fnmr at zero discard.

    FNMR(t) counts similarities strictly below t, so the threshold is the
    smallest similarity value preceded by at least ceil(f0 * P) scores.
    """
    sims = np.sort(np.asarray(similarities, dtype=np.float64))
    n = len(sims)
    need = int(math.ceil(starting_fnmr * n - 1e-9))
    if need <= 0:
        return -np.inf
    for v in np.unique(sims):
        if np.searchsorted(sims, v, side="left") >= need:
            return float(v)
    return np.inf


def edc_curve(
    qualities: dict[str, float],
    comparisons: list[MatedComparison],
    d_max: float = 0.20,
    grid_step: float = 0.01,
    threshold: float | None = None,
    starting_fnmr: float | None = None,
) -> EdcCurve:
    """Error-vs-discard curve over mated comparisons."""
    if not comparisons:
        raise EvalError("EDC requires at least one comparison")
    if (threshold is None) == (starting_fnmr is None):
        raise EvalError("exactly one of threshold / starting_fnmr must be given")
    missing = [
        sid
        for c in comparisons
        for sid in (c.probe_id, c.reference_id)
        if sid not in qualities
    ]
    if missing:
        raise EvalError(f"comparisons reference samples without quality scores: {sorted(set(missing))[:5]}")

    ordered = sorted(
        comparisons,
        key=lambda c: (min(qualities[c.probe_id], qualities[c.reference_id]), c.probe_id, c.reference_id),
    )
    sims = np.asarray([c.similarity for c in ordered], dtype=np.float64)
    n = len(sims)

    tau = float(threshold) if threshold is not None else solve_threshold(sims, starting_fnmr)
    below = sims < tau

    grid = _discard_grid(d_max, grid_step)
    fnmr = []
    truncated = False
    kept_grid = []
    for d in grid:
        k = _discard_count(float(d), n)
        if k >= n:
            truncated = True
            break
        kept_grid.append(float(d))
        fnmr.append(float(below[k:].sum()) / (n - k))
    grid = np.asarray(kept_grid)
    fnmr = np.asarray(fnmr)
    if len(grid) < 2:
        raise EvalError("retained set empties before the second grid point")

    area = float(np.trapezoid(fnmr, grid))
    return EdcCurve(
        discard_fractions=grid,
        fnmr_values=fnmr,
        threshold=tau,
        pauc=area,
        pauc_normalized=area / float(grid[-1]),
        truncated=truncated,
    )


def pauc(curve: EdcCurve) -> float:
    """Trapezoidal area of the curve over its discard range."""
    if len(curve.discard_fractions) < 2:
        raise EvalError("pAUC requires at least 2 grid points")
    return float(np.trapezoid(curve.fnmr_values, curve.discard_fractions))


def class_flow(
    qualities: dict[str, float],
    records: list[FeatureRecord],
    grid: np.ndarray,
) -> ClassFlow:
    """Per-expression-label proportions of the retained set along the discard grid."""
    missing = [r.sample_id for r in records if r.sample_id not in qualities]
    if missing:
        raise EvalError(f"records without quality scores: {missing[:5]}")
    if not records:
        raise EvalError("class flow requires at least one record")

    ordered = sorted(records, key=lambda r: (qualities[r.sample_id], r.sample_id))
    labels_ordered = [r.expression_label for r in ordered]
    labels = sorted(set(labels_ordered))
    n = len(ordered)

    grid = np.asarray(grid, dtype=np.float64)
    flow = ClassFlow(
        discard_fractions=grid,
        proportions={lab: np.zeros(len(grid)) for lab in labels},
    )
    for gi, d in enumerate(grid):
        k = _discard_count(float(d), n)
        retained = labels_ordered[k:]
        if not retained:
            for lab in labels:
                flow.proportions[lab][gi] = math.nan
            continue
        for lab in labels:
            flow.proportions[lab][gi] = sum(1 for x in retained if x == lab) / len(retained)
    return flow


# --- CSV interfaces -------------------------------------------------------

def read_comparisons_csv(path: str | Path) -> list[MatedComparison]:
    comparisons = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "probe_id,reference_id,similarity":
            raise EvalError(f"{path}: unexpected comparisons header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            probe, ref, sim = line.split(",")
            comparisons.append(MatedComparison(probe_id=probe, reference_id=ref, similarity=float(sim)))
    return comparisons


def write_comparisons_csv(path: str | Path, comparisons: list[MatedComparison]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("probe_id,reference_id,similarity\n")
        for c in comparisons:
            fh.write(f"{c.probe_id},{c.reference_id},{c.similarity:.9g}\n")


def write_det_csv(path: str | Path, curve: DetCurve) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("threshold,fpr,fnr\n")
        for t, fp, fn in zip(curve.thresholds, curve.fpr, curve.fnr):
            fh.write(f"{t:.9g},{fp:.9g},{fn:.9g}\n")


def write_edc_csv(path: str | Path, curve: EdcCurve) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("discard_fraction,fnmr\n")
        for d, f in zip(curve.discard_fractions, curve.fnmr_values):
            fh.write(f"{d:.9g},{f:.9g}\n")


def write_flow_csv(path: str | Path, flow: ClassFlow) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("discard_fraction,label,proportion\n")
        for gi, d in enumerate(flow.discard_fractions):
            for lab in sorted(flow.proportions):
                fh.write(f"{d:.9g},{lab},{flow.proportions[lab][gi]:.9g}\n")
