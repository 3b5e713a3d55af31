"""Independent brute-force oracles and synthetic dataset generation.

Everything here re-derives its answers from first principles with naive
loops and deliberately shares no arithmetic code with the package, so that
agreement between the two is meaningful evidence. Test-only; not shipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from mlbalance.dataset import NOMINAL, NUMERIC, FeatureSpec, MultiLabelDataset, build_dataset


# ---------------------------------------------------------------------------
# metrics recomputed by direct definition


def recount_metrics(dataset: MultiLabelDataset) -> SimpleNamespace:
    """IRLbl, MeanIR and SCUMBLE via plain loops over the raw rows."""
    n = dataset.n_instances
    n_labels = dataset.n_labels
    counts = [0] * n_labels
    for i in range(n):
        for l in range(n_labels):
            counts[l] += int(dataset.Y[i, l])
    top = max(counts) if counts else 0
    if top == 0:
        raise ValueError("no active labels")
    ratios = [top / c if c > 0 else None for c in counts]
    defined = [r for r in ratios if r is not None]
    mean = sum(defined) / len(defined)

    per_instance = []
    for i in range(n):
        active = [ratios[l] for l in range(n_labels) if dataset.Y[i, l]]
        if len(active) <= 1:
            per_instance.append(0.0)
            continue
        product = 1.0
        for r in active:
            product *= r
        geometric = product ** (1.0 / len(active))
        arithmetic = sum(active) / len(active)
        per_instance.append(1.0 - geometric / arithmetic)
    overall = sum(per_instance) / n if n else 0.0

    minority = {l for l in range(n_labels) if ratios[l] is not None and ratios[l] > mean}
    majority = {
        l for l in range(n_labels)
        if ratios[l] is not None and ratios[l] <= mean
    }
    return SimpleNamespace(
        irlbl=ratios,
        mean_ir=mean,
        scumble_ins=per_instance,
        scumble=overall,
        minority=minority,
        majority=majority,
    )


# ---------------------------------------------------------------------------
# brute-force nearest neighbors


def _conditional_probabilities(dataset: MultiLabelDataset) -> dict:
    """p(label | feature = value) per nominal feature, counted by hand."""
    tables = {}
    for j, spec in enumerate(dataset.feature_specs):
        if spec.kind != NOMINAL:
            continue
        table = {}
        for v in range(len(spec.domain)):
            holders = [i for i in range(dataset.n_instances)
                       if int(dataset.X[i, j]) == v]
            if holders:
                probs = [
                    sum(int(dataset.Y[i, l]) for i in holders) / len(holders)
                    for l in range(dataset.n_labels)
                ]
            else:
                probs = [0.0] * dataset.n_labels
            table[v] = probs
        tables[j] = table
    return tables


def pairwise_distance(
    dataset: MultiLabelDataset, a: int, b: int, tables: dict | None = None
) -> float:
    """Mixed metric between two instances, transcribed independently."""
    if tables is None:
        tables = _conditional_probabilities(dataset)
    total = 0.0
    for j, spec in enumerate(dataset.feature_specs):
        if spec.kind == NUMERIC:
            span = spec.maximum - spec.minimum
            if span > 0:
                total += ((dataset.X[a, j] - dataset.X[b, j]) / span) ** 2
        else:
            pa = tables[j][int(dataset.X[a, j])]
            pb = tables[j][int(dataset.X[b, j])]
            for l in range(dataset.n_labels):
                total += (pa[l] - pb[l]) ** 2
    return math.sqrt(total)


def brute_force_knn(
    dataset: MultiLabelDataset,
    i: int,
    k: int,
    bag: list[int] | None = None,
    tables: dict | None = None,
) -> list[int]:
    """All-pairs distances, sorted by (distance, index), first k."""
    if tables is None:
        tables = _conditional_probabilities(dataset)
    candidates = (
        [j for j in range(dataset.n_instances) if j != i]
        if bag is None
        else [j for j in sorted(set(bag)) if j != i]
    )
    scored = sorted(
        ((pairwise_distance(dataset, i, j, tables), j) for j in candidates),
    )
    return [j for _, j in scored[:k]]


# ---------------------------------------------------------------------------
# synthetic datasets


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic random dataset with fixed label counts."""

    instances: int
    numeric_features: int = 3
    nominal_features: int = 0
    labels: int = 3
    frequencies: tuple[float, ...] = ()
    seed: int = 0


def make_synthetic(spec: SyntheticSpec) -> MultiLabelDataset:
    """Build a dataset whose label counts hit round(frequency * n) exactly."""
    frequencies = spec.frequencies or tuple(
        0.5 / (l + 1) for l in range(spec.labels)
    )
    if len(frequencies) != spec.labels:
        raise ValueError("one frequency per label required")
    if any(not 0.0 <= f <= 1.0 for f in frequencies):
        raise ValueError(f"infeasible label frequencies {frequencies}")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = spec.instances

    specs = []
    columns = []
    for j in range(spec.numeric_features):
        low = float(rng.uniform(-5, 0))
        high = low + float(rng.uniform(0.5, 10))
        specs.append(FeatureSpec(f"x{j}", NUMERIC))
        columns.append(rng.uniform(low, high, size=n))
    for j in range(spec.nominal_features):
        size = int(rng.integers(2, 5))
        domain = tuple(f"v{v}" for v in range(size))
        specs.append(FeatureSpec(f"c{j}", NOMINAL, domain))
        columns.append(rng.integers(0, size, size=n))

    Y = np.zeros((n, spec.labels), dtype=np.uint8)
    for l, freq in enumerate(frequencies):
        count = int(math.floor(freq * n + 0.5))
        holders = rng.permutation(n)[:count]
        Y[holders, l] = 1

    rows = []
    for i in range(n):
        feats = [
            float(columns[j][i]) if specs[j].kind == NUMERIC
            else int(columns[j][i])
            for j in range(len(specs))
        ]
        rows.append((feats, Y[i].tolist()))
    return build_dataset(specs, [f"label{l}" for l in range(spec.labels)],
                         rows, name=f"synthetic{spec.seed}")
