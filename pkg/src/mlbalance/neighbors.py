"""Mixed-metric distances, the shared nearest-neighbor cache, and its
parallel construction.

Numeric features contribute squared range-normalized differences; nominal
features contribute, per label, the squared difference of the conditional
label-presence probabilities of the two values (the Value Difference Metric
with exponent 2). Both parts live under one square root, which lets the whole
metric be expressed as plain Euclidean distance over an embedded feature
matrix: numeric columns scaled by 1/range and nominal columns expanded into
their probability vectors. All neighbor queries in the package go through
this embedding, so cached and on-demand computations agree bit for bit.

The cache stores, per instance, every other instance ordered by (distance,
index). Construction partitions rows into fixed-size blocks; blocks may be
computed by worker processes that write disjoint slices of shared output
arrays, so results are identical for any worker count.
"""

from __future__ import annotations

import multiprocessing as mp
import struct
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from multiprocessing import shared_memory
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import NUMERIC, MultiLabelDataset
from .exceptions import CacheError, DataFormatError

_BLOCK_ROWS = 256
_MAGIC = b"MLBNC\x01\x00\x00"


@dataclass(frozen=True)
class VDMTable:
    """Conditional label-presence probabilities per nominal feature value.

    ``probabilities[j]`` has one row per domain value of feature ``j`` and one
    column per label: the fraction of instances holding that value which carry
    the label. Values never seen in the data keep a zero row. Datasets without
    nominal features yield an empty table.
    """

    probabilities: dict[int, np.ndarray]
    occurrences: dict[int, np.ndarray]

    @property
    def is_empty(self) -> bool:
        return not self.probabilities


def build_vdm_table(dataset: MultiLabelDataset) -> VDMTable:
    """Count value/label co-occurrences for every nominal feature."""
    probabilities: dict[int, np.ndarray] = {}
    occurrences: dict[int, np.ndarray] = {}
    Y = dataset.Y.astype(np.float64)
    for j in dataset.nominal_indices:
        size = len(dataset.feature_specs[j].domain)
        values = dataset.X[:, j].astype(np.int64)
        counts = np.bincount(values, minlength=size).astype(np.float64)
        joint = np.zeros((size, dataset.n_labels), dtype=np.float64)
        np.add.at(joint, values, Y)
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = np.where(counts[:, None] > 0, joint / counts[:, None], 0.0)
        probs.setflags(write=False)
        counts.setflags(write=False)
        probabilities[j] = probs
        occurrences[j] = counts
    return VDMTable(probabilities, occurrences)


class FeatureEmbedding:
    """Linearization of the mixed metric into Euclidean space.

    ``embed`` maps raw feature rows (numeric values, nominal positions) to
    vectors whose pairwise Euclidean distances equal the package metric.
    """

    def __init__(self, dataset: MultiLabelDataset, vdm: VDMTable):
        self._specs = dataset.feature_specs
        self._vdm = vdm
        numeric_cols: list[int] = []
        width = 0
        for j, spec in enumerate(self._specs):
            if spec.kind == NUMERIC:
                numeric_cols.append(width)
                width += 1
            else:
                if j not in vdm.probabilities:
                    raise CacheError(
                        "VDM table does not cover nominal feature "
                        f"{spec.name!r}"
                    )
                width += vdm.probabilities[j].shape[1]
        self.width = width
        self.numeric_columns = np.asarray(numeric_cols, dtype=np.intp)
        self.matrix = self.embed(dataset.X)
        self.matrix.setflags(write=False)

    def embed(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        out = np.empty((rows.shape[0], self.width), dtype=np.float64)
        col = 0
        for j, spec in enumerate(self._specs):
            if spec.kind == NUMERIC:
                span = spec.span
                scale = 1.0 / span if span > 0 else 0.0
                out[:, col] = rows[:, j] * scale
                col += 1
            else:
                probs = self._vdm.probabilities[j]
                out[:, col:col + probs.shape[1]] = probs[rows[:, j].astype(np.int64)]
                col += probs.shape[1]
        return out


def distance(
    dataset: MultiLabelDataset, a: int, b: int, vdm: VDMTable | None = None
) -> float:
    """Mixed-metric distance between two instances of one dataset."""
    if vdm is None:
        vdm = build_vdm_table(dataset)
    embedding = FeatureEmbedding(dataset, vdm)
    pair = embedding.matrix[[a, b]]
    return float(cdist(pair[:1], pair[1:])[0, 0])


def _fix_ties(order: np.ndarray, dists: np.ndarray) -> None:
    """Re-sort runs of equal distances by ascending instance index."""
    eq = dists[1:] == dists[:-1]
    if not eq.any():
        return
    i = 0
    n = dists.size
    while i < n - 1:
        if eq[i]:
            j = i + 1
            while j < n - 1 and eq[j]:
                j += 1
            order[i:j + 1] = np.sort(order[i:j + 1])
            i = j + 1
        else:
            i += 1


def _rank_block(
    E: np.ndarray, start: int, stop: int, depth: int
) -> tuple[np.ndarray, np.ndarray]:
    """Rank all instances against rows [start, stop) of the embedding."""
    d = cdist(E[start:stop], E)
    order = np.argsort(d, axis=1, kind="quicksort")
    sorted_d = np.take_along_axis(d, order, axis=1)
    m = stop - start
    idx = np.empty((m, depth), dtype=np.int32)
    dist = np.empty((m, depth), dtype=np.float64)
    for r in range(m):
        row_order = order[r]
        row_d = sorted_d[r]
        _fix_ties(row_order, row_d)
        self_pos = int(np.flatnonzero(row_order == start + r)[0])
        keep = np.delete(row_order, self_pos)
        kept_d = np.delete(row_d, self_pos)
        idx[r] = keep[:depth]
        dist[r] = kept_d[:depth]
    return idx, dist


@dataclass(frozen=True)
class NeighborCache:
    """Distance-ordered rankings of all instances, bound to one dataset.

    ``indices[i]`` lists the ``depth`` nearest other instances of instance
    ``i`` sorted by ascending (distance, index); ``distances[i]`` holds the
    matching distance values. The embedding is retained so that queries which
    outrun a truncated ranking can fall back to direct computation with the
    identical metric.
    """

    fingerprint: bytes
    indices: np.ndarray
    distances: np.ndarray
    depth: int
    embedding: FeatureEmbedding

    def __post_init__(self) -> None:
        self.indices.setflags(write=False)
        self.distances.setflags(write=False)

    @property
    def n_instances(self) -> int:
        return self.indices.shape[0]


# Worker-side state for process pools; populated before the pool forks.
_POOL_STATE: dict = {}


def _pool_block(args: tuple[int, int]) -> int:
    start, stop = args
    state = _POOL_STATE
    idx, dist = _rank_block(state["E"], start, stop, state["depth"])
    shm_i = shared_memory.SharedMemory(name=state["idx_name"])
    shm_d = shared_memory.SharedMemory(name=state["dist_name"])
    try:
        I = np.ndarray(state["shape"], dtype=np.int32, buffer=shm_i.buf)
        D = np.ndarray(state["shape"], dtype=np.float64, buffer=shm_d.buf)
        I[start:stop] = idx
        D[start:stop] = dist
    finally:
        shm_i.close()
        shm_d.close()
    return stop - start


def _build_parallel(
    E: np.ndarray,
    blocks: list[tuple[int, int]],
    depth: int,
    workers: int,
    progress: Callable[[float], None] | None,
) -> tuple[np.ndarray, np.ndarray]:
    n = E.shape[0]
    shm_i = shared_memory.SharedMemory(create=True, size=max(n * depth * 4, 1))
    shm_d = shared_memory.SharedMemory(create=True, size=max(n * depth * 8, 1))
    try:
        _POOL_STATE.update(
            E=E,
            depth=depth,
            idx_name=shm_i.name,
            dist_name=shm_d.name,
            shape=(n, depth),
        )
        if "fork" in mp.get_all_start_methods():
            pool_cls = ProcessPoolExecutor
            pool_kwargs = {"mp_context": mp.get_context("fork")}
        else:
            # no fork: fall back to threads (cdist releases the GIL)
            pool_cls = ThreadPoolExecutor
            pool_kwargs = {}
        done = 0
        with pool_cls(max_workers=workers, **pool_kwargs) as pool:
            futures = [pool.submit(_pool_block, b) for b in blocks]
            for fut in as_completed(futures):
                done += fut.result()
                if progress is not None:
                    progress(done / n)
        I = np.ndarray((n, depth), dtype=np.int32, buffer=shm_i.buf).copy()
        D = np.ndarray((n, depth), dtype=np.float64, buffer=shm_d.buf).copy()
    finally:
        _POOL_STATE.clear()
        shm_i.close()
        shm_i.unlink()
        shm_d.close()
        shm_d.unlink()
    return I, D


def build_neighbor_cache(
    dataset: MultiLabelDataset,
    vdm: VDMTable | None = None,
    depth: int | None = None,
    workers: int = 1,
    progress: Callable[[float], None] | None = None,
) -> NeighborCache:
    """Precompute distance-ordered rankings for every instance.

    Parameters
    ----------
    depth : int, optional
        Ranking length per instance, between 1 and ``n_instances - 1``
        (the default keeps the full ranking, which lets one cache serve
        both global and bag-restricted queries).
    workers : int
        Number of parallel workers; results are bit-identical for any
        value because rows are processed in fixed blocks.
    progress : callable, optional
        Called with the fraction of rows completed, monotonically.
    """
    n = dataset.n_instances
    if n < 2:
        raise CacheError("insufficient instances to build a neighbor cache")
    if vdm is None:
        vdm = build_vdm_table(dataset)
    if depth is None:
        depth = n - 1
    if not 1 <= depth <= n - 1:
        raise CacheError(f"depth {depth} outside [1, {n - 1}]")

    embedding = FeatureEmbedding(dataset, vdm)
    E = embedding.matrix
    blocks = [(s, min(s + _BLOCK_ROWS, n)) for s in range(0, n, _BLOCK_ROWS)]

    if workers <= 1 or len(blocks) == 1:
        idx = np.empty((n, depth), dtype=np.int32)
        dist = np.empty((n, depth), dtype=np.float64)
        done = 0
        for start, stop in blocks:
            idx[start:stop], dist[start:stop] = _rank_block(E, start, stop, depth)
            done += stop - start
            if progress is not None:
                progress(done / n)
        indices, distances = idx, dist
    else:
        indices, distances = _build_parallel(E, blocks, depth, workers, progress)

    return NeighborCache(
        fingerprint=dataset.fingerprint,
        indices=indices,
        distances=distances,
        depth=depth,
        embedding=embedding,
    )


def _check_cache(cache: NeighborCache, dataset: MultiLabelDataset | None) -> None:
    if dataset is not None and cache.fingerprint != dataset.fingerprint:
        raise CacheError("neighbor cache does not match the dataset")


def _direct_bag_ranking(
    cache: NeighborCache, i: int, pool: np.ndarray
) -> np.ndarray:
    """Rank ``pool`` (ascending indices, i excluded) against instance ``i``."""
    if pool.size == 0:
        return pool
    E = cache.embedding.matrix
    d = cdist(E[i:i + 1], E[pool])[0]
    order = np.argsort(d, kind="stable")
    return pool[order]


def knn(
    cache: NeighborCache,
    i: int,
    k: int,
    bag: Iterable[int] | None = None,
    dataset: MultiLabelDataset | None = None,
) -> np.ndarray:
    """First ``k`` neighbors of instance ``i``, optionally within a bag.

    With a bag, the ranking is filtered to bag members other than ``i``;
    fewer than ``k`` indices are returned when the filtered ranking is
    shorter. If the cache was built with a truncated depth and the truncation
    is exhausted, the ranking is recomputed directly inside the bag with the
    same metric. Pass the dataset to verify the cache fingerprint.
    """
    _check_cache(cache, dataset)
    if k < 1:
        raise ValueError("k must be at least 1")
    n = cache.n_instances
    if not 0 <= i < n:
        raise ValueError(f"instance index {i} out of range")
    row = cache.indices[i]
    if bag is None:
        return row[:k].astype(np.int64)
    bag_arr = np.unique(np.fromiter(bag, dtype=np.int64))
    if i not in bag_arr:
        raise ValueError("bag queries require i to be a bag member")
    pool = bag_arr[bag_arr != i]
    hits = row[np.isin(row, pool)]
    if hits.size < min(k, pool.size) and cache.depth < n - 1:
        return _direct_bag_ranking(cache, i, pool)[:k].astype(np.int64)
    return hits[:k].astype(np.int64)


def reverse_neighbors(
    cache: NeighborCache,
    k: int,
    bag: Iterable[int] | None = None,
    dataset: MultiLabelDataset | None = None,
) -> dict[int, set[int]]:
    """Reverse k-nearest-neighbor sets: who lists each instance among its kNN.

    Restricted to ``bag`` members when a bag is given (both as query sources
    and as potential reverse neighbors).
    """
    _check_cache(cache, dataset)
    members = (
        range(cache.n_instances)
        if bag is None
        else np.unique(np.fromiter(bag, dtype=np.int64)).tolist()
    )
    out: dict[int, set[int]] = {int(m): set() for m in members}
    for q in members:
        for target in knn(cache, int(q), k, bag):
            out[int(target)].add(int(q))
    return out


def save_cache(cache: NeighborCache, path: str | Path) -> Path:
    """Persist rankings to a little-endian binary sidecar file."""
    path = Path(path)
    n = cache.n_instances
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(cache.fingerprint)
        fh.write(struct.pack("<QQ", n, cache.depth))
        fh.write(np.ascontiguousarray(cache.indices, dtype="<i4").tobytes())
        fh.write(np.ascontiguousarray(cache.distances, dtype="<f8").tobytes())
    return path


def load_cache(path: str | Path, dataset: MultiLabelDataset) -> NeighborCache:
    """Load a sidecar cache, verifying it belongs to ``dataset``.

    Raises
    ------
    DataFormatError
        If the file is not a cache sidecar.
    CacheError
        If the stored fingerprint does not match the dataset.
    """
    raw = Path(path).read_bytes()
    header = len(_MAGIC) + 16 + 16
    if len(raw) < header or raw[: len(_MAGIC)] != _MAGIC:
        raise DataFormatError(f"{path} is not a neighbor cache file")
    fingerprint = raw[len(_MAGIC):len(_MAGIC) + 16]
    if fingerprint != dataset.fingerprint:
        raise CacheError("cached rankings belong to a different dataset")
    n, depth = struct.unpack_from("<QQ", raw, len(_MAGIC) + 16)
    expected = header + n * depth * 4 + n * depth * 8
    if len(raw) != expected or n != dataset.n_instances:
        raise DataFormatError(f"{path} is truncated or corrupted")
    idx_bytes = raw[header:header + n * depth * 4]
    dist_bytes = raw[header + n * depth * 4:]
    indices = np.frombuffer(idx_bytes, dtype="<i4").reshape(n, depth).astype(np.int32)
    distances = (
        np.frombuffer(dist_bytes, dtype="<f8").reshape(n, depth).astype(np.float64)
    )
    vdm = build_vdm_table(dataset)
    embedding = FeatureEmbedding(dataset, vdm)
    return NeighborCache(
        fingerprint=dataset.fingerprint,
        indices=indices,
        distances=distances,
        depth=int(depth),
        embedding=embedding,
    )
