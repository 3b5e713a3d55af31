"""The five undersampling algorithms.

Every algorithm removes whole instances and never edits the survivors, so
each output is an order-preserving subsequence of its input. The heuristic
cleaners (MLeNN, MLTL) and MLRUS freeze the minority label set on the input
and never delete an instance carrying a minority label; MLUL additionally
protects the last carrier of any label.
"""

from __future__ import annotations

import math

import numpy as np

from .dataset import MultiLabelDataset, edit_instances, label_counts, labelset_bags
from .exceptions import AlgorithmError
from .metrics import imbalance_profile
from .base import BaseResampler
from .neighbors import knn
from ._util import round_half_away


def adjusted_hamming(y1: np.ndarray, y2: np.ndarray) -> float:
    """Labelset difference scaled by the pair's active label count.

    Counts the labels present in exactly one of the two instances and divides
    by the total number of active labels across both; two empty labelsets
    score 0. Always lies in [0, 1] and is symmetric.
    """
    y1 = np.asarray(y1)
    y2 = np.asarray(y2)
    if y1.shape != y2.shape:
        raise ValueError("labelsets must have the same arity")
    active = int(y1.sum()) + int(y2.sum())
    if active == 0:
        return 0.0
    return float(np.sum(y1 != y2)) / active


class LPRUS(BaseResampler):
    """Random undersampling of majority labelsets.

    The mirror image of LPROS: bags larger than the mean bag size lose
    uniformly chosen members (without replacement) until either
    ``round(n * percentage / 100)`` deletions happened or every bag has
    shrunk to ``ceil(mean size)``. Bags are processed in rounds, largest
    first, each turn removing the fair share ``ceil(remaining / bags left)``
    capped by the bag's own excess.

    Draw order: one without-replacement member draw per bag turn.
    """

    _uses_rng = True

    def __init__(self, percentage: float = 25.0, random_state=None):
        self.percentage = percentage
        self.random_state = random_state

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_percentage(upper_open=100.0)

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        n = dataset.n_instances
        target = round_half_away(n * float(self.percentage) / 100.0)
        if target == 0 or n == 0:
            return edit_instances(dataset)
        bags = labelset_bags(dataset)
        mean_size = n / len(bags)
        floor_size = math.ceil(mean_size)
        active = sorted(
            (list(members) for members in bags.values()
             if len(members) > mean_size),
            key=len,
            reverse=True,
        )
        remaining = target
        removals: list[int] = []
        while remaining > 0 and active:
            survivors = []
            for position, members in enumerate(active):
                if remaining <= 0:
                    survivors.extend(active[position:])
                    break
                share = min(
                    math.ceil(remaining / (len(active) - position)),
                    len(members) - floor_size,
                )
                if share > 0:
                    picks = rng.choice(len(members), size=share, replace=False)
                    for p in sorted(picks, reverse=True):
                        removals.append(members.pop(p))
                    remaining -= share
                if len(members) > floor_size:
                    survivors.append(members)
            active = survivors
        return edit_instances(dataset, removals=removals)


class MLRUS(BaseResampler):
    """Random undersampling of individual majority labels.

    MeanIR and the minority label set are frozen from the input. Only
    instances that carry at least one majority label and no minority label
    are eligible. Majority labels take turns in dataset label order; each
    turn deletes one uniformly chosen surviving eligible carrier of the
    label and updates every affected label count. A label retires when its
    recomputed IRLbl reaches MeanIR or when it has no eligible carriers
    left; the loop stops after ``round(n * percentage / 100)`` deletions or
    when no label remains.

    Draw order: one uniform index per deletion.
    """

    _uses_rng = True

    def __init__(self, percentage: float = 25.0, random_state=None):
        self.percentage = percentage
        self.random_state = random_state

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_percentage(upper_open=100.0)

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        n = dataset.n_instances
        target = round_half_away(n * float(self.percentage) / 100.0)
        if target == 0 or n == 0:
            return edit_instances(dataset)
        profile = imbalance_profile(dataset)
        minority = sorted(profile.minority)
        majority = [l for l in range(dataset.n_labels) if l in profile.majority]
        Y = dataset.Y
        carries_minority = (
            Y[:, minority].any(axis=1) if minority else np.zeros(n, dtype=bool)
        )
        eligible = ~carries_minority & (
            Y[:, majority].any(axis=1) if majority else np.zeros(n, dtype=bool)
        )
        alive = np.ones(n, dtype=bool)
        counts = label_counts(dataset).astype(np.float64)
        active = list(majority)
        removed = 0
        while removed < target and active:
            for label in list(active):
                if removed >= target:
                    break
                current_max = counts.max()
                if counts[label] <= 0 or current_max / counts[label] >= profile.mean_ir:
                    active.remove(label)
                    continue
                pool = np.flatnonzero(alive & eligible & (Y[:, label] == 1))
                if pool.size == 0:
                    active.remove(label)
                    continue
                victim = int(pool[rng.integers(pool.size)])
                alive[victim] = False
                counts -= Y[victim]
                removed += 1
        return edit_instances(dataset, removals=np.flatnonzero(~alive))


class MLeNN(BaseResampler):
    """Edited-nearest-neighbor cleaning of purely-majority instances.

    Candidates are instances that carry no minority label (minority frozen
    from the input profile). A candidate is marked when at least half
    (``ceil(k/2)``) of its k global nearest neighbors differ from it by an
    adjusted Hamming distance above the threshold. Marked instances are
    removed in one batch, so neighbor queries always see the input dataset.
    """

    _needs_neighbors = True
    _uses_rng = False

    def __init__(self, threshold: float = 0.5, k: int = 3):
        self.threshold = threshold
        self.k = k

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_threshold()
        self._check_k()
        if dataset.n_instances <= int(self.k):
            raise AlgorithmError(
                "MLeNN requires more instances than neighbors "
                f"({dataset.n_instances} <= k={self.k})"
            )

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        threshold = float(self.threshold)
        k = int(self.k)
        profile = imbalance_profile(dataset)
        minority = sorted(profile.minority)
        cache = self._ensure_cache(dataset, neighbors, vdm_table)
        carries_minority = (
            dataset.Y[:, minority].any(axis=1)
            if minority
            else np.zeros(dataset.n_instances, dtype=bool)
        )
        needed_votes = math.ceil(k / 2)
        removals = []
        for i in np.flatnonzero(~carries_minority):
            votes = 0
            for j in knn(cache, int(i), k):
                if adjusted_hamming(dataset.Y[i], dataset.Y[j]) > threshold:
                    votes += 1
            if votes >= needed_votes:
                removals.append(int(i))
        return edit_instances(dataset, removals=removals)


class MLTL(BaseResampler):
    """Tomek-link cleaning.

    A pair of instances forms a link when each is the other's global nearest
    neighbor and their adjusted Hamming distance reaches the threshold. From
    every link, the members that carry no minority label (frozen from the
    input) are removed: one, both, or neither.
    """

    _needs_neighbors = True
    _uses_rng = False

    def __init__(self, threshold: float = 0.5):
        self.threshold = threshold

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_threshold()
        if dataset.n_instances < 2:
            raise AlgorithmError("MLTL requires at least two instances")

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        threshold = float(self.threshold)
        profile = imbalance_profile(dataset)
        minority = sorted(profile.minority)
        cache = self._ensure_cache(dataset, neighbors, vdm_table)
        carries_minority = (
            dataset.Y[:, minority].any(axis=1)
            if minority
            else np.zeros(dataset.n_instances, dtype=bool)
        )
        nearest = cache.indices[:, 0]
        removals = set()
        for a in range(dataset.n_instances):
            b = int(nearest[a])
            if b <= a or int(nearest[b]) != a:
                continue
            if adjusted_hamming(dataset.Y[a], dataset.Y[b]) < threshold:
                continue
            for member in (a, b):
                if not carries_minority[member]:
                    removals.add(member)
        return edit_instances(dataset, removals=removals)


class MLUL(BaseResampler):
    """Undersampling of locally harmful instances.

    Each label's minority value is the rarer of {present, absent}. Whenever
    an instance appears among the k nearest neighbors of some instance ``q``
    and disagrees with ``q`` on a label for which ``q`` holds the minority
    value, it accumulates ``1/k`` harm. The ``round(n * percentage / 100)``
    highest-harm instances are removed (ties keep the lower index), except
    that the sole remaining carrier of any label is always kept; skipped
    slots fall to the next instance in the ranking.
    """

    _needs_neighbors = True
    _uses_rng = False

    def __init__(self, percentage: float = 25.0, k: int = 3):
        self.percentage = percentage
        self.k = k

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_percentage(upper_open=100.0)
        self._check_k()
        if dataset.n_instances <= int(self.k):
            raise AlgorithmError(
                "MLUL requires more instances than neighbors "
                f"({dataset.n_instances} <= k={self.k})"
            )

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        n = dataset.n_instances
        target = round_half_away(n * float(self.percentage) / 100.0)
        if target == 0:
            return edit_instances(dataset)
        k = int(self.k)
        cache = self._ensure_cache(dataset, neighbors, vdm_table)
        Y = dataset.Y
        counts = label_counts(dataset)
        minority_value = (counts * 2 <= n).astype(np.uint8)

        harm = np.zeros(n, dtype=np.float64)
        for q in range(n):
            q_holds = Y[q] == minority_value
            if not q_holds.any():
                continue
            for i in knn(cache, q, k):
                disagrees = q_holds & (Y[int(i)] != Y[q])
                harm[int(i)] += disagrees.sum() / k

        order = sorted(range(n), key=lambda i: (-harm[i], -i))
        remaining = counts.astype(np.int64).copy()
        removals = []
        for i in order:
            if len(removals) >= target:
                break
            held = np.flatnonzero(Y[i])
            if held.size and (remaining[held] <= 1).any():
                continue
            removals.append(i)
            remaining[held] -= 1
        return edit_instances(dataset, removals=removals)
