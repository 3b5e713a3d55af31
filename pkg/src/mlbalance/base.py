"""Shared estimator machinery for the resampling algorithms.

Every algorithm is a scikit-learn style estimator: constructor arguments are
stored verbatim (so ``get_params``/``set_params``/``clone`` work), validation
happens inside ``fit_resample``, and the single entry point is

    resampled = SomeResampler(...).fit_resample(dataset)

``fit_resample`` accepts optional precomputed ``neighbors``/``vdm_table``
structures; algorithms that need them and do not receive them build their own
with identical code, so supplying a cache never changes the output, only the
running time.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator

from .dataset import MultiLabelDataset
from .exceptions import CacheError
from .neighbors import NeighborCache, VDMTable, build_neighbor_cache, build_vdm_table


class BaseResampler(BaseEstimator):
    """Base class for all resamplers; subclasses implement ``_resample``."""

    _needs_neighbors = False
    _uses_rng = True

    def fit_resample(
        self,
        dataset: MultiLabelDataset,
        *,
        neighbors: NeighborCache | None = None,
        vdm_table: VDMTable | None = None,
    ) -> MultiLabelDataset:
        """Return the resampled dataset; the input value is never modified."""
        if not isinstance(dataset, MultiLabelDataset):
            raise TypeError("fit_resample expects a MultiLabelDataset")
        if neighbors is not None and neighbors.fingerprint != dataset.fingerprint:
            raise CacheError("neighbor cache does not match the dataset")
        self._check_params(dataset)
        rng = self._make_rng() if self._uses_rng else None
        return self._resample(
            dataset, rng=rng, neighbors=neighbors, vdm_table=vdm_table
        )

    # subclasses override
    def _check_params(self, dataset: MultiLabelDataset) -> None:
        pass

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        raise NotImplementedError

    def _make_rng(self) -> np.random.Generator:
        state = getattr(self, "random_state", None)
        if isinstance(state, np.random.Generator):
            return state
        return np.random.Generator(np.random.PCG64(state))

    def _ensure_cache(
        self,
        dataset: MultiLabelDataset,
        neighbors: NeighborCache | None,
        vdm_table: VDMTable | None,
    ) -> NeighborCache:
        if neighbors is not None:
            return neighbors
        if vdm_table is None:
            vdm_table = build_vdm_table(dataset)
        return build_neighbor_cache(dataset, vdm_table)

    # -- parameter validators ------------------------------------------------

    def _check_percentage(self, upper_open: float | None = None) -> float:
        p = self.percentage
        if not isinstance(p, numbers.Real) or not p > 0:
            raise ValueError(f"percentage must be positive, got {p!r}")
        if upper_open is not None and not p < upper_open:
            raise ValueError(f"percentage must be below {upper_open}, got {p!r}")
        return float(p)

    def _check_k(self) -> int:
        k = self.k
        if not isinstance(k, numbers.Integral) or k < 1:
            raise ValueError(f"k must be a positive integer, got {k!r}")
        return int(k)

    def _check_threshold(self) -> float:
        t = self.threshold
        if not isinstance(t, numbers.Real) or not 0 < t <= 1:
            raise ValueError(f"threshold must lie in (0, 1], got {t!r}")
        return float(t)
