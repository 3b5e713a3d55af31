"""Imbalance measures for multilabel datasets.

IRLbl is the per-label imbalance ratio: the most frequent label's positive
count divided by this label's count, so the most frequent label scores exactly
1 and rarer labels score higher. MeanIR averages IRLbl over labels that occur
at least once, and splits the alphabet into minority labels (IRLbl strictly
above MeanIR) and majority labels (at or below). SCUMBLE measures how strongly
minority and majority labels co-occur inside the same instances: per instance
it is one minus the ratio of the geometric to the arithmetic mean of the
IRLbl values of its active labels, which is 0 when the instance carries at
most one label and grows toward 1 as the label frequencies diverge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MultiLabelDataset, label_counts
from .exceptions import MetricError


@dataclass(frozen=True)
class ImbalanceProfile:
    """Snapshot of every imbalance measure for one dataset value.

    ``irlbl`` holds NaN for labels that never occur (their ratio is
    undefined); such labels belong to neither the minority nor the majority
    set. ``scumble`` is the arithmetic mean of ``scumble_ins`` over all
    instances, empty-labelset instances contributing 0.
    """

    irlbl: np.ndarray
    mean_ir: float
    scumble_ins: np.ndarray
    scumble: float
    minority: frozenset[int]
    majority: frozenset[int]

    def __post_init__(self) -> None:
        self.irlbl.setflags(write=False)
        self.scumble_ins.setflags(write=False)


def _irlbl_from_counts(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    if counts.size == 0 or counts.max() <= 0:
        raise MetricError("no active labels")
    out = np.full(counts.shape, np.nan)
    positive = counts > 0
    out[positive] = counts.max() / counts[positive]
    return out


def irlbl(dataset: MultiLabelDataset) -> np.ndarray:
    """Per-label imbalance ratio; NaN marks labels with zero count.

    Raises
    ------
    MetricError
        If every label has a zero count (including the empty dataset).
    """
    return _irlbl_from_counts(label_counts(dataset))


def _mean_ir_from_irlbl(ratios: np.ndarray) -> float:
    return float(ratios[~np.isnan(ratios)].mean())


def mean_ir(dataset: MultiLabelDataset) -> float:
    """Arithmetic mean of IRLbl over labels with at least one occurrence."""
    return _mean_ir_from_irlbl(irlbl(dataset))


def _scumble_from_parts(Y: np.ndarray, ratios: np.ndarray) -> tuple[np.ndarray, float]:
    # Labels with zero count are never active, so substituting 1 for their
    # NaN ratio cannot touch any instance's value.
    safe = np.where(np.isnan(ratios), 1.0, ratios)
    active = Y.sum(axis=1).astype(np.float64)
    per_instance = np.zeros(Y.shape[0], dtype=np.float64)
    multi = active >= 2
    if multi.any():
        Ym = Y[multi].astype(np.float64)
        k = active[multi]
        geo = np.exp((Ym @ np.log(safe)) / k)
        arith = (Ym @ safe) / k
        # AM >= GM; clamp the roundoff dust so values stay in [0, 1]
        per_instance[multi] = np.maximum(1.0 - geo / arith, 0.0)
    dataset_mean = float(per_instance.mean()) if per_instance.size else 0.0
    return per_instance, dataset_mean


def scumble(dataset: MultiLabelDataset) -> tuple[np.ndarray, float]:
    """Per-instance SCUMBLE values and their dataset mean.

    Instances with zero or one active label score 0; the dataset value
    averages over *all* instances.
    """
    return _scumble_from_parts(dataset.Y, irlbl(dataset))


def minority_majority_split(
    profile: ImbalanceProfile,
) -> tuple[frozenset[int], frozenset[int]]:
    """Split labels into (minority, majority) sets by the MeanIR cut.

    Minority labels satisfy IRLbl > MeanIR strictly; majority labels have a
    defined IRLbl at or below MeanIR. Zero-count labels appear in neither
    set. Ties at exactly MeanIR count as majority, which keeps the most
    frequent label out of the minority set even in uniform datasets.
    """
    ratios = profile.irlbl
    defined = ~np.isnan(ratios)
    minority = np.flatnonzero(defined & (ratios > profile.mean_ir))
    majority = np.flatnonzero(defined & (ratios <= profile.mean_ir))
    return frozenset(int(i) for i in minority), frozenset(int(i) for i in majority)


def imbalance_profile(dataset: MultiLabelDataset) -> ImbalanceProfile:
    """Compute IRLbl, MeanIR, SCUMBLE and the minority/majority label sets."""
    ratios = irlbl(dataset)
    mean = _mean_ir_from_irlbl(ratios)
    per_instance, dataset_scumble = _scumble_from_parts(dataset.Y, ratios)
    defined = ~np.isnan(ratios)
    minority = frozenset(
        int(i) for i in np.flatnonzero(defined & (ratios > mean))
    )
    majority = frozenset(
        int(i) for i in np.flatnonzero(defined & (ratios <= mean))
    )
    return ImbalanceProfile(
        irlbl=ratios,
        mean_ir=mean,
        scumble_ins=per_instance,
        scumble=dataset_scumble,
        minority=minority,
        majority=majority,
    )
