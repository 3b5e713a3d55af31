"""In-memory model of a multilabel dataset and elementary edits.

A dataset couples a feature matrix of mixed numeric/nominal columns with a
binary label matrix over a fixed label alphabet. Dataset values are immutable
after construction: every edit produces a new value, and instance order is
significant (positional indices identify instances for neighbor caches).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError, StructuralError

NUMERIC = "numeric"
NOMINAL = "nominal"


@dataclass(frozen=True)
class FeatureSpec:
    """Schema of a single input feature.

    Parameters
    ----------
    name : str
        Attribute name.
    kind : {"numeric", "nominal"}
        Value type of the feature.
    domain : tuple of str
        For nominal features, the ordered, duplicate-free list of value
        symbols. Instances store positions into this tuple.
    minimum, maximum : float
        For numeric features, the observed value range recorded when the
        dataset was built. The range is frozen afterwards and reused to
        normalize distances, even while resampling grows the dataset.
    """

    name: str
    kind: str
    domain: tuple[str, ...] = ()
    minimum: float = 0.0
    maximum: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, NOMINAL):
            raise StructuralError(f"unknown feature kind {self.kind!r}")
        if self.kind == NOMINAL:
            if not self.domain:
                raise StructuralError(
                    f"nominal feature {self.name!r} has an empty domain"
                )
            if len(set(self.domain)) != len(self.domain):
                raise StructuralError(
                    f"nominal feature {self.name!r} has duplicate domain values"
                )
        elif self.minimum > self.maximum:
            raise StructuralError(
                f"numeric feature {self.name!r} has minimum > maximum"
            )

    @property
    def span(self) -> float:
        """Width of the recorded numeric range (0 for constant features)."""
        return self.maximum - self.minimum


class Instance(NamedTuple):
    """One data pattern: feature values plus a 0/1 label membership vector.

    Numeric features are floats; nominal features are integer positions into
    the feature's domain. The label vector always has one entry per label of
    the owning dataset, and an all-zero vector (empty labelset) is legal.
    """

    features: tuple
    labels: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class MultiLabelDataset:
    """Immutable multilabel dataset value.

    Attributes
    ----------
    name : str
        Relation name, used for output file naming.
    feature_specs : tuple of FeatureSpec
    label_names : tuple of str
        Ordered, duplicate-free label alphabet.
    X : ndarray of shape (n_instances, n_features), float64
        Feature matrix; nominal columns hold domain positions.
    Y : ndarray of shape (n_instances, n_labels), uint8
        Binary label membership matrix.
    """

    name: str
    feature_specs: tuple[FeatureSpec, ...]
    label_names: tuple[str, ...]
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self) -> None:
        if len(set(self.label_names)) != len(self.label_names):
            raise StructuralError("duplicate label names")
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        Y = np.ascontiguousarray(self.Y, dtype=np.uint8)
        if X.ndim != 2 or Y.ndim != 2:
            raise StructuralError("X and Y must be 2-dimensional")
        if X.shape[0] != Y.shape[0]:
            raise StructuralError("X and Y disagree on the instance count")
        if X.shape[1] != len(self.feature_specs):
            raise StructuralError("X width does not match the feature specs")
        if Y.shape[1] != len(self.label_names):
            raise StructuralError("Y width does not match the label names")
        if Y.size and not np.isin(Y, (0, 1)).all():
            raise StructuralError("label matrix entries must be 0 or 1")
        for j, spec in enumerate(self.feature_specs):
            if spec.kind == NOMINAL and X.shape[0]:
                col = X[:, j]
                if ((col != np.floor(col)) | (col < 0) | (col >= len(spec.domain))).any():
                    raise DomainError(
                        f"feature {spec.name!r} holds values outside its domain"
                    )
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    # -- basic shape ------------------------------------------------------

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return len(self.feature_specs)

    @property
    def n_labels(self) -> int:
        return len(self.label_names)

    @cached_property
    def numeric_indices(self) -> tuple[int, ...]:
        return tuple(
            j for j, s in enumerate(self.feature_specs) if s.kind == NUMERIC
        )

    @cached_property
    def nominal_indices(self) -> tuple[int, ...]:
        return tuple(
            j for j, s in enumerate(self.feature_specs) if s.kind == NOMINAL
        )

    @cached_property
    def fingerprint(self) -> bytes:
        """16-byte digest binding caches to this exact dataset value."""
        h = hashlib.blake2b(digest_size=16)
        for spec in self.feature_specs:
            h.update(spec.kind.encode())
            h.update(repr(spec.domain).encode())
            h.update(np.float64(spec.minimum).tobytes())
            h.update(np.float64(spec.maximum).tobytes())
        h.update(repr(self.label_names).encode())
        h.update(np.asarray(self.X.shape, dtype=np.int64).tobytes())
        h.update(self.X.tobytes())
        h.update(self.Y.tobytes())
        return h.digest()

    def instance(self, i: int) -> Instance:
        """Return instance `i` as a value object (nominal values as positions)."""
        if not 0 <= i < self.n_instances:
            raise StructuralError(f"instance index {i} out of range")
        feats = tuple(
            int(self.X[i, j]) if s.kind == NOMINAL else float(self.X[i, j])
            for j, s in enumerate(self.feature_specs)
        )
        return Instance(feats, tuple(int(v) for v in self.Y[i]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiLabelDataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.feature_specs == other.feature_specs
            and self.label_names == other.label_names
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.Y, other.Y)
        )

    def __repr__(self) -> str:
        return (
            f"MultiLabelDataset({self.name!r}, instances={self.n_instances}, "
            f"features={self.n_features}, labels={self.n_labels})"
        )


def _coerce_row(
    specs: Sequence[FeatureSpec],
    n_labels: int,
    row: Instance | tuple,
    where: str,
) -> tuple[list[float], list[int]]:
    """Validate one (features, labels) pair against the dataset schema."""
    features, labels = row
    if len(features) != len(specs):
        raise StructuralError(
            f"{where}: expected {len(specs)} feature values, got {len(features)}"
        )
    if len(labels) != n_labels:
        raise StructuralError(
            f"{where}: expected {n_labels} label flags, got {len(labels)}"
        )
    out: list[float] = []
    for j, (spec, value) in enumerate(zip(specs, features)):
        if spec.kind == NOMINAL:
            if isinstance(value, str):
                try:
                    value = spec.domain.index(value)
                except ValueError:
                    raise DomainError(
                        f"{where}: value {value!r} not in domain of feature "
                        f"{spec.name!r}"
                    ) from None
            else:
                value = float(value)
                if value != int(value) or not 0 <= value < len(spec.domain):
                    raise DomainError(
                        f"{where}: position {value!r} outside domain of feature "
                        f"{spec.name!r}"
                    )
            out.append(float(value))
        else:
            out.append(float(value))
    lab = []
    for flag in labels:
        flag = int(flag)
        if flag not in (0, 1):
            raise StructuralError(f"{where}: label flags must be 0 or 1")
        lab.append(flag)
    return out, lab


def build_dataset(
    feature_specs: Sequence[FeatureSpec],
    label_names: Sequence[str],
    rows: Iterable[Instance | tuple],
    name: str = "data",
) -> MultiLabelDataset:
    """Assemble a dataset from raw rows.

    Rows are (features, labels) pairs. Nominal feature values may be given
    either as domain symbols or as integer positions; numeric min/max on the
    returned specs are recomputed from the rows (zero rows are permitted, in
    which case ranges collapse to [0, 0]).

    Raises
    ------
    StructuralError
        If a row has the wrong arity, naming the row index.
    DomainError
        If a nominal value is not in the declared domain.
    """
    specs = tuple(feature_specs)
    labels = tuple(label_names)
    feat_rows: list[list[float]] = []
    lab_rows: list[list[int]] = []
    for i, row in enumerate(rows):
        f, l = _coerce_row(specs, len(labels), row, f"row {i}")
        feat_rows.append(f)
        lab_rows.append(l)
    X = np.asarray(feat_rows, dtype=np.float64).reshape(len(feat_rows), len(specs))
    Y = np.asarray(lab_rows, dtype=np.uint8).reshape(len(lab_rows), len(labels))
    refreshed = []
    for j, spec in enumerate(specs):
        if spec.kind == NUMERIC:
            lo = float(X[:, j].min()) if len(X) else 0.0
            hi = float(X[:, j].max()) if len(X) else 0.0
            refreshed.append(
                FeatureSpec(spec.name, NUMERIC, minimum=lo, maximum=hi)
            )
        else:
            refreshed.append(spec)
    return MultiLabelDataset(name, tuple(refreshed), labels, X, Y)


def label_counts(dataset: MultiLabelDataset) -> np.ndarray:
    """Number of positive instances per label (int64 vector)."""
    return dataset.Y.sum(axis=0, dtype=np.int64)


def labelset_bags(dataset: MultiLabelDataset) -> dict[tuple[int, ...], list[int]]:
    """Partition instance indices by exact labelset.

    Keys are tuples of active label indices (the empty tuple is a valid key);
    bags appear in order of first occurrence and each instance index occurs in
    exactly one bag.
    """
    bags: dict[tuple[int, ...], list[int]] = {}
    for i, row in enumerate(dataset.Y):
        key = tuple(np.flatnonzero(row).tolist())
        bags.setdefault(key, []).append(i)
    return bags


def edit_instances(
    dataset: MultiLabelDataset,
    removals: Iterable[int] = (),
    additions: Iterable[Instance | tuple] = (),
    relabels: Mapping[int, Sequence[int]] | None = None,
) -> MultiLabelDataset:
    """Produce a new dataset with instances removed, relabeled and appended.

    Removal and relabel indices refer to the input dataset. Survivors keep
    their relative order, additions are appended afterwards in the given
    order, and the input dataset is left untouched. Numeric feature ranges
    are *not* recomputed: they stay frozen at their build-time values.
    """
    n = dataset.n_instances
    removal_set = set()
    for idx in removals:
        if not 0 <= idx < n:
            raise StructuralError(f"removal index {idx} out of range")
        removal_set.add(int(idx))

    Y = dataset.Y.copy()
    if relabels:
        for idx, flags in relabels.items():
            if not 0 <= idx < n:
                raise StructuralError(f"relabel index {idx} out of range")
            if len(flags) != dataset.n_labels:
                raise StructuralError(
                    f"relabel for index {idx} has wrong label arity"
                )
            flags = [int(f) for f in flags]
            if any(f not in (0, 1) for f in flags):
                raise StructuralError("relabel flags must be 0 or 1")
            Y[idx] = flags

    keep = [i for i in range(n) if i not in removal_set]
    X_parts = [dataset.X[keep]]
    Y_parts = [Y[keep]]

    added_f: list[list[float]] = []
    added_l: list[list[int]] = []
    for pos, row in enumerate(additions):
        f, l = _coerce_row(
            dataset.feature_specs, dataset.n_labels, row, f"addition {pos}"
        )
        added_f.append(f)
        added_l.append(l)
    if added_f:
        X_parts.append(np.asarray(added_f, dtype=np.float64))
        Y_parts.append(np.asarray(added_l, dtype=np.uint8))

    return MultiLabelDataset(
        dataset.name,
        dataset.feature_specs,
        dataset.label_names,
        np.vstack(X_parts),
        np.vstack(Y_parts),
    )
