"""Decoupling of concurrent minority and majority labels."""

from __future__ import annotations

import warnings

import numpy as np

from .dataset import edit_instances
from .exceptions import ResampleWarning
from .metrics import imbalance_profile
from .base import BaseResampler


class REMEDIAL(BaseResampler):
    """Split instances whose minority and majority labels are tightly coupled.

    The imbalance profile (IRLbl, MeanIR and SCUMBLE) is frozen on the input.
    Every instance whose per-instance SCUMBLE strictly exceeds the dataset
    SCUMBLE is decoupled: the instance keeps only its majority labels (IRLbl
    at or below MeanIR) and a new instance with identical features and only
    the minority labels is appended, appended instances ordered by the index
    of the instance they came from. Each split pair therefore carries
    disjoint labelsets whose union is the original labelset.

    Instances whose labels all sit on one side of the MeanIR cut are left
    untouched (splitting them would create an empty labelset); a warning
    reports how many were skipped.
    """

    _uses_rng = False

    def __init__(self):
        pass

    def _resample(self, dataset, *, rng, neighbors, vdm_table):
        profile = imbalance_profile(dataset)
        ratios = profile.irlbl
        majority_mask = ~np.isnan(ratios) & (ratios <= profile.mean_ir)
        relabels = {}
        additions = []
        skipped = 0
        for i in np.flatnonzero(profile.scumble_ins > profile.scumble):
            labels = dataset.Y[i].astype(bool)
            majority_part = labels & majority_mask
            minority_part = labels & ~majority_mask
            if not majority_part.any() or not minority_part.any():
                skipped += 1
                continue
            relabels[int(i)] = majority_part.astype(np.uint8)
            additions.append(
                (dataset.X[i].tolist(), minority_part.astype(np.uint8).tolist())
            )
        if skipped:
            warnings.warn(
                f"left {skipped} instance(s) whose labels are all minority or "
                "all majority unsplit",
                ResampleWarning,
                stacklevel=3,
            )
        return edit_instances(dataset, additions=additions, relabels=relabels)
