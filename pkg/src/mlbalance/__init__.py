"""Resampling algorithms, imbalance metrics and neighbor caching for
multilabel datasets.

The package models a multilabel dataset as instances over mixed
numeric/nominal features plus a binary label matrix, measures its imbalance
(IRLbl, MeanIR, SCUMBLE), and rebalances it with eleven resampling
algorithms: five oversamplers (LPROS, MLROS, MLSMOTE, MLSOL, MLRkNNOS), five
undersamplers (LPRUS, MLRUS, MLeNN, MLTL, MLUL) and the REMEDIAL decoupler.
Neighbor-based algorithms share one precomputed distance ranking cache that
can be built in parallel and persisted to disk.
"""

from .arff import DatasetSource, output_name, read_dataset, write_dataset
from .dataset import (
    FeatureSpec,
    Instance,
    MultiLabelDataset,
    build_dataset,
    edit_instances,
    label_counts,
    labelset_bags,
)
from .exceptions import (
    AlgorithmError,
    CacheError,
    DataFormatError,
    DomainError,
    MetricError,
    MLBalanceError,
    ResampleWarning,
    StructuralError,
)
from .metrics import (
    ImbalanceProfile,
    imbalance_profile,
    irlbl,
    mean_ir,
    minority_majority_split,
    scumble,
)
from .neighbors import (
    FeatureEmbedding,
    NeighborCache,
    VDMTable,
    build_neighbor_cache,
    build_vdm_table,
    distance,
    knn,
    load_cache,
    reverse_neighbors,
    save_cache,
)
from .oversampling import LPROS, MLROS, MLRkNNOS, MLSMOTE, MLSOL
from .remedial import REMEDIAL
from .runner import (
    AlgorithmSpec,
    ResampleReport,
    RunResult,
    algorithm_names,
    derive_subseed,
    effective_workers,
    run_algorithm,
    run_batch,
)
from .undersampling import LPRUS, MLRUS, MLTL, MLUL, MLeNN, adjusted_hamming

__version__ = "0.1.0"

__all__ = [
    "AlgorithmError",
    "AlgorithmSpec",
    "CacheError",
    "DataFormatError",
    "DatasetSource",
    "DomainError",
    "FeatureEmbedding",
    "FeatureSpec",
    "ImbalanceProfile",
    "Instance",
    "LPROS",
    "LPRUS",
    "MLBalanceError",
    "MLROS",
    "MLRUS",
    "MLRkNNOS",
    "MLSMOTE",
    "MLSOL",
    "MLTL",
    "MLUL",
    "MLeNN",
    "MetricError",
    "MultiLabelDataset",
    "NeighborCache",
    "REMEDIAL",
    "ResampleReport",
    "ResampleWarning",
    "RunResult",
    "StructuralError",
    "VDMTable",
    "adjusted_hamming",
    "algorithm_names",
    "build_dataset",
    "build_neighbor_cache",
    "build_vdm_table",
    "derive_subseed",
    "distance",
    "edit_instances",
    "effective_workers",
    "imbalance_profile",
    "irlbl",
    "knn",
    "label_counts",
    "labelset_bags",
    "load_cache",
    "mean_ir",
    "minority_majority_split",
    "output_name",
    "read_dataset",
    "reverse_neighbors",
    "run_algorithm",
    "run_batch",
    "save_cache",
    "scumble",
    "write_dataset",
]
