"""The five oversampling algorithms.

All of them append to the input dataset and never touch existing instances,
so the first ``n_instances`` rows of every output equal the input. Percentage
targets translate to instance counts via round-half-away-from-zero. Random
draws always come from a PCG64 generator seeded with ``random_state``, and
each algorithm documents its draw order so runs are reproducible.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import MultiLabelDataset, edit_instances, label_counts, labelset_bags
from .exceptions import AlgorithmError, ResampleWarning
from .metrics import imbalance_profile
from .base import BaseResampler
from .neighbors import knn, reverse_neighbors
from ._util import round_half_away

_EPSILON = 1e-5


def _interpolated_row(
    X: np.ndarray, numeric: np.ndarray, seed: int, ref: int, t: float
) -> np.ndarray:
    """Seed's feature row with numeric entries moved toward the reference."""
    row = X[seed].copy()
    row[numeric] = X[seed, numeric] + t * (X[ref, numeric] - X[seed, numeric])
    return row


def _as_addition(features: np.ndarray, labels: np.ndarray) -> tuple[list, list]:
    return features.tolist(), [int(v) for v in labels]


class LPROS(BaseResampler):
    """Random oversampling of minority labelsets.

    Instances are grouped into bags by exact labelset. Bags smaller than the
    mean bag size receive clones of uniformly chosen members (with
    replacement) until either ``round(n * percentage / 100)`` clones exist or
    every bag has grown to ``floor(mean size)``. Bags are processed in
    rounds, smallest first; at each turn a bag receives its fair share of the
    remaining budget, ``ceil(remaining / bags left in the round)``, capped by
    its own remaining capacity, and drops out once full.

    Draw order: one uniform member-index batch per bag turn.

    Parameters
    ----------
    percentage : float
        Target size increase, in percent of the input instance count.
    random_state : int, Generator or None
        Seed for the PCG64 generator.
    """

    _uses_rng = True

    def __init__(self, percentage: float = 25.0, random_state=None):
        self.percentage = percentage
        self.random_state = random_state

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_percentage()
        if dataset.n_instances == 0:
            raise AlgorithmError("cannot oversample an empty dataset")

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        n = dataset.n_instances
        target = round_half_away(n * float(self.percentage) / 100.0)
        bags = labelset_bags(dataset)
        mean_size = n / len(bags)
        capacity = math.floor(mean_size)
        # [members, current size]; stable sort keeps first-occurrence order
        active = sorted(
            ([members, len(members)] for members in bags.values()
             if len(members) < mean_size),
            key=lambda bag: bag[1],
        )
        remaining = target
        clones: list[int] = []
        while remaining > 0 and active:
            survivors = []
            for position, bag in enumerate(active):
                if remaining <= 0:
                    survivors.extend(active[position:])
                    break
                members, size = bag
                share = min(
                    math.ceil(remaining / (len(active) - position)),
                    capacity - size,
                )
                if share > 0:
                    picks = rng.integers(0, len(members), size=share)
                    clones.extend(members[p] for p in picks)
                    bag[1] = size + share
                    remaining -= share
                if bag[1] < capacity:
                    survivors.append(bag)
            active = survivors
        additions = [
            (dataset.X[i].tolist(), [int(v) for v in dataset.Y[i]]) for i in clones
        ]
        return edit_instances(dataset, additions=additions)


class MLROS(BaseResampler):
    """Random oversampling of individual minority labels.

    MeanIR is frozen from the input. Minority labels take turns in dataset
    label order; each turn clones one uniformly chosen input instance
    carrying the label and re-evaluates only that label's IRLbl (with the
    input's majority count as numerator). A label retires once its IRLbl
    falls to MeanIR or below; the loop stops after
    ``round(n * percentage / 100)`` clones or when no label remains.

    Draw order: one uniform member index per clone.
    """

    _uses_rng = True

    def __init__(self, percentage: float = 25.0, random_state=None):
        self.percentage = percentage
        self.random_state = random_state

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_percentage()

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        n = dataset.n_instances
        target = round_half_away(n * float(self.percentage) / 100.0)
        if target == 0 or n == 0:
            return edit_instances(dataset)
        profile = imbalance_profile(dataset)
        counts = label_counts(dataset).astype(np.float64)
        max_count = counts.max()
        active = [l for l in range(dataset.n_labels) if l in profile.minority]
        pools = {l: np.flatnonzero(dataset.Y[:, l]) for l in active}
        clones: list[int] = []
        while len(clones) < target and active:
            for label in list(active):
                if len(clones) >= target:
                    break
                pool = pools[label]
                clones.append(int(pool[rng.integers(pool.size)]))
                counts[label] += 1
                if max_count / counts[label] <= profile.mean_ir:
                    active.remove(label)
        additions = [
            (dataset.X[i].tolist(), [int(v) for v in dataset.Y[i]]) for i in clones
        ]
        return edit_instances(dataset, additions=additions)


class MLSMOTE(BaseResampler):
    """Synthetic oversampling from within-bag nearest neighbors.

    The imbalance profile is frozen on the input. Every minority label (in
    dataset label order) contributes one synthetic instance per bag member:
    the member seeds an interpolation toward a uniformly chosen reference
    among its k nearest neighbors inside the label's bag. Numeric features
    use one shared interpolation scalar per synthetic instance; nominal
    features take the most frequent value among the seed and its neighbors
    (ties resolve to the seed's value); the synthetic labelset keeps the
    labels present in strictly more than half of that same group. Labels
    whose bag is a singleton generate nothing.

    Draw order per bag member: one reference draw, then one interpolation
    draw.

    Parameters
    ----------
    k : int
        Neighborhood size (the usual working value is 5).
    """

    _needs_neighbors = True
    _uses_rng = True

    def __init__(self, k: int = 5, random_state=None):
        self.k = k
        self.random_state = random_state

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_k()

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        k = int(self.k)
        profile = imbalance_profile(dataset)
        minority = [
            l for l in range(dataset.n_labels) if l in profile.minority
        ]
        if not minority:
            return edit_instances(dataset)
        cache = self._ensure_cache(dataset, neighbors, vdm_table)
        numeric = np.asarray(dataset.numeric_indices, dtype=np.intp)
        nominal = np.asarray(dataset.nominal_indices, dtype=np.intp)
        additions = []
        for label in minority:
            bag = np.flatnonzero(dataset.Y[:, label])
            if bag.size < 2:
                continue
            for seed in bag:
                neigh = knn(cache, int(seed), k, bag)
                if neigh.size == 0:
                    continue
                ref = int(neigh[rng.integers(neigh.size)])
                t = rng.random()
                row = _interpolated_row(dataset.X, numeric, int(seed), ref, t)
                group = np.concatenate(([seed], neigh))
                for j in nominal:
                    values = dataset.X[group, j].astype(np.int64)
                    freq = np.bincount(values)
                    top = np.flatnonzero(freq == freq.max())
                    row[j] = top[0] if top.size == 1 else dataset.X[seed, j]
                votes = dataset.Y[group].sum(axis=0)
                labels = (votes * 2 > group.size).astype(np.uint8)
                additions.append(_as_addition(row, labels))
        return edit_instances(dataset, additions=additions)


class MLSOL(BaseResampler):
    """Synthetic oversampling concentrated on locally difficult instances.

    For every label, the rarer of {present, absent} is that label's minority
    value. For each instance holding the minority value of a label, the
    disagreement score is the fraction of its k nearest neighbors holding
    the opposite value; an instance's sampling weight sums its scores below
    1 (pure outliers contribute nothing). Exactly
    ``round(n * percentage / 100)`` instances are generated: a seed is drawn
    with probability proportional to its weight, a reference uniformly among
    the seed's k neighbors. Numeric features interpolate with one shared
    scalar; nominal features copy from whichever parent ends up closer (by
    the metric over the interpolated numeric dimensions). Labels copy the
    parents' value where they agree; where they disagree, the parent holding
    the minority value acts as the seed side and donates its value when the
    synthetic instance lies within a type-dependent reach (safe 0.5,
    borderline 0.75, rare always, outlier never).

    Draw order per synthetic instance: seed draw, reference draw, then the
    interpolation draw.
    """

    _needs_neighbors = True
    _uses_rng = True

    def __init__(self, percentage: float = 25.0, k: int = 3, random_state=None):
        self.percentage = percentage
        self.k = k
        self.random_state = random_state

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_percentage()
        self._check_k()
        if dataset.n_instances <= int(self.k):
            raise AlgorithmError(
                "MLSOL requires more instances than neighbors "
                f"({dataset.n_instances} <= k={self.k})"
            )

    @staticmethod
    def _theta(score: float) -> float:
        if score < 0.3:
            return 0.5
        if score < 0.7:
            return 0.75
        if score < 1.0:
            return 1.0 + _EPSILON
        return -_EPSILON

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        n = dataset.n_instances
        n_labels = dataset.n_labels
        target = round_half_away(n * float(self.percentage) / 100.0)
        if target == 0:
            return edit_instances(dataset)
        k = int(self.k)
        cache = self._ensure_cache(dataset, neighbors, vdm_table)

        counts = label_counts(dataset)
        minority_value = (counts * 2 <= n).astype(np.uint8)

        neigh = np.vstack([knn(cache, i, k) for i in range(n)])
        neigh_labels = dataset.Y[neigh]  # (n, k, L)
        disagreement = (neigh_labels != dataset.Y[:, None, :]).mean(axis=1)
        holds_minority = dataset.Y == minority_value[None, :]
        score = np.where(holds_minority, disagreement, np.nan)

        weight = np.where(
            holds_minority & (disagreement < 1.0), disagreement, 0.0
        ).sum(axis=1)
        total = float(weight.sum())
        if total <= 0.0:
            warnings.warn(
                "no difficult instances: every candidate's neighbors agree; "
                "dataset returned unchanged",
                ResampleWarning,
                stacklevel=3,
            )
            return dataset

        cumulative = np.cumsum(weight)
        numeric = np.asarray(dataset.numeric_indices, dtype=np.intp)
        nominal = np.asarray(dataset.nominal_indices, dtype=np.intp)
        embedding = cache.embedding
        numeric_matrix = embedding.matrix[:, embedding.numeric_columns]

        additions = []
        for _ in range(target):
            pick = rng.random() * total
            seed = int(np.searchsorted(cumulative, pick, side="right"))
            seed = min(seed, n - 1)
            options = neigh[seed]
            ref = int(options[rng.integers(options.size)])
            t = rng.random()

            row = _interpolated_row(dataset.X, numeric, seed, ref, t)
            embedded = embedding.embed(row[None, :])[0][embedding.numeric_columns]
            d_seed = float(
                cdist(embedded[None, :], numeric_matrix[seed][None, :])[0, 0]
            )
            d_ref = float(
                cdist(embedded[None, :], numeric_matrix[ref][None, :])[0, 0]
            )
            span = d_seed + d_ref
            closeness = 0.0 if span == 0.0 else d_seed / span

            donor = seed if closeness <= 0.5 else ref
            row[nominal] = dataset.X[donor, nominal]

            labels = np.empty(n_labels, dtype=np.uint8)
            for l in range(n_labels):
                ys, yr = int(dataset.Y[seed, l]), int(dataset.Y[ref, l])
                if ys == yr:
                    labels[l] = ys
                    continue
                holder = seed if ys == minority_value[l] else ref
                reach = closeness if holder == seed else 1.0 - closeness
                theta = self._theta(float(score[holder, l]))
                labels[l] = (
                    minority_value[l] if reach <= theta else 1 - minority_value[l]
                )
            additions.append(_as_addition(row, labels))
        return edit_instances(dataset, additions=additions)


class MLRkNNOS(BaseResampler):
    """Oversampling seeded by reverse nearest neighborhoods.

    The profile is frozen on the input. For each minority label with at
    least two carriers, bag members whose within-bag reverse k-neighborhood
    is non-empty act as seeds, cycled in ascending index order. Each turn
    draws a uniform reference from the seed's reverse neighborhood and
    interpolates numeric features toward it (nominal features copy from the
    seed); the synthetic instance inherits the seed's full labelset. The
    label stops once ``ceil(majority count / MeanIR) - count(label)``
    instances exist, or immediately when it has no seeds.

    Draw order per synthetic instance: one reference draw, then one
    interpolation draw.
    """

    _needs_neighbors = True
    _uses_rng = True

    def __init__(self, k: int = 3, random_state=None):
        self.k = k
        self.random_state = random_state

    def _check_params(self, dataset: MultiLabelDataset) -> None:
        self._check_k()

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        k = int(self.k)
        profile = imbalance_profile(dataset)
        minority = [
            l for l in range(dataset.n_labels) if l in profile.minority
        ]
        if not minority:
            return edit_instances(dataset)
        cache = self._ensure_cache(dataset, neighbors, vdm_table)
        counts = label_counts(dataset)
        max_count = int(counts.max())
        numeric = np.asarray(dataset.numeric_indices, dtype=np.intp)
        additions = []
        for label in minority:
            bag = np.flatnonzero(dataset.Y[:, label])
            if bag.size < 2:
                continue
            reverse = reverse_neighbors(cache, k, bag)
            seeds = [int(i) for i in bag if reverse[int(i)]]
            needed = max(
                0, math.ceil(max_count / profile.mean_ir) - int(counts[label])
            )
            if not seeds or needed == 0:
                continue
            for made in range(needed):
                seed = seeds[made % len(seeds)]
                pool = sorted(reverse[seed])
                ref = pool[rng.integers(len(pool))]
                t = rng.random()
                row = _interpolated_row(dataset.X, numeric, seed, int(ref), t)
                additions.append(_as_addition(row, dataset.Y[seed]))
        return edit_instances(dataset, additions=additions)
