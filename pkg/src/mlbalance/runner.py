"""Batch execution: algorithm registry, sub-seeding, timing and reports.

A batch builds the VDM table and neighbor cache once (and only when some
requested algorithm actually queries neighbors), hands them to every
algorithm, and writes one output file per algorithm. Each algorithm draws
from its own generator seeded by hashing the master seed with the algorithm
name, so a batch member's output is bit-identical to a standalone run with
the same master seed.
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .arff import output_name, write_dataset
from .dataset import MultiLabelDataset
from .exceptions import MLBalanceError
from .base import BaseResampler
from .neighbors import (
    NeighborCache,
    VDMTable,
    build_neighbor_cache,
    build_vdm_table,
    load_cache,
    save_cache,
)
from .oversampling import LPROS, MLROS, MLRkNNOS, MLSMOTE, MLSOL
from .remedial import REMEDIAL
from .undersampling import LPRUS, MLRUS, MLTL, MLUL, MLeNN

_REGISTRY: dict[str, type[BaseResampler]] = {
    "LPROS": LPROS,
    "MLROS": MLROS,
    "MLRKNNOS": MLRkNNOS,
    "MLSMOTE": MLSMOTE,
    "MLSOL": MLSOL,
    "LPRUS": LPRUS,
    "MLRUS": MLRUS,
    "MLENN": MLeNN,
    "MLTL": MLTL,
    "MLUL": MLUL,
    "REMEDIAL": REMEDIAL,
}

_DISPLAY = {
    "MLRKNNOS": "MLRkNNOS",
    "MLENN": "MLeNN",
}

#: algorithms whose core loop queries nearest neighbors
NEIGHBOR_BASED = frozenset(
    key for key, cls in _REGISTRY.items() if cls._needs_neighbors
)

_ACCEPTED = {
    "LPROS": ("percentage",),
    "MLROS": ("percentage",),
    "MLRKNNOS": ("k",),
    "MLSMOTE": ("k",),
    "MLSOL": ("percentage", "k"),
    "LPRUS": ("percentage",),
    "MLRUS": ("percentage",),
    "MLENN": ("threshold", "k"),
    "MLTL": ("threshold",),
    "MLUL": ("percentage", "k"),
    "REMEDIAL": (),
}

_RANDOMIZED = {
    "LPROS", "MLROS", "MLRKNNOS", "MLSMOTE", "MLSOL", "LPRUS", "MLRUS",
}

_DEFAULTS = {"percentage": 25.0, "k": 3, "threshold": 0.5}


def algorithm_names() -> tuple[str, ...]:
    """Canonical display names of all available algorithms."""
    return tuple(_DISPLAY.get(key, key) for key in _REGISTRY)


@dataclass(frozen=True)
class AlgorithmSpec:
    """A validated algorithm request: canonical name plus full parameters."""

    name: str
    params: dict

    @classmethod
    def create(
        cls,
        name: str,
        percentage: float | None = None,
        k: int | None = None,
        threshold: float | None = None,
        strict: bool = True,
    ) -> "AlgorithmSpec":
        """Validate an algorithm request and fill parameter defaults.

        With ``strict`` (single runs), parameters the algorithm does not
        accept are rejected; without it (batch-wide defaults), inapplicable
        parameters are silently dropped.
        """
        key = name.upper()
        if key not in _REGISTRY:
            raise ValueError(f"unknown algorithm {name!r}")
        accepted = _ACCEPTED[key]
        given = {"percentage": percentage, "k": k, "threshold": threshold}
        params = {}
        for param in accepted:
            value = given.pop(param)
            if value is None:
                value = _DEFAULTS[param]
                if param == "k" and key == "MLSMOTE":
                    value = 5
            params[param] = value
        if strict:
            extras = [p for p, v in given.items() if v is not None]
            if extras:
                raise ValueError(
                    f"{_DISPLAY.get(key, key)} does not accept parameter(s) "
                    f"{', '.join(extras)}"
                )
        return cls(_DISPLAY.get(key, key), params)

    @property
    def key(self) -> str:
        return self.name.upper()

    @property
    def needs_neighbors(self) -> bool:
        return self.key in NEIGHBOR_BASED

    def build(self, seed: int | None) -> BaseResampler:
        kwargs = dict(self.params)
        if self.key in _RANDOMIZED:
            kwargs["random_state"] = seed
        return _REGISTRY[self.key](**kwargs)


def derive_subseed(seed: int, algorithm: str) -> int:
    """Stable per-algorithm seed: hash of the master seed and the name."""
    digest = hashlib.blake2b(
        f"{seed}:{algorithm.upper()}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


def effective_workers(requested: int) -> int:
    """Worker count that cache construction will use.

    0 requests auto-detection (all cores); values above the available core
    count clamp down to it.
    """
    available = os.cpu_count() or 1
    if requested <= 0:
        return available
    return min(requested, available)


@dataclass
class RunResult:
    """Outcome of one algorithm within a batch."""

    algorithm: str
    instances_before: int
    instances_after: int | None = None
    seconds: float = 0.0
    output_path: Path | None = None
    error: str | None = None


@dataclass
class ResampleReport:
    """Timings and outcomes of a batch run."""

    dataset: str
    workers: int
    results: list[RunResult] = field(default_factory=list)
    vdm_seconds: float = 0.0
    cache_seconds: float = 0.0
    cache_reused: bool = False

    @property
    def failed(self) -> bool:
        return any(r.error for r in self.results)


def _echo_nothing(message: str) -> None:
    pass


def prepare_structures(
    dataset: MultiLabelDataset,
    specs: list[AlgorithmSpec],
    workers: int,
    report: ResampleReport,
    cache_file: str | Path | None = None,
    echo: Callable[[str], None] = _echo_nothing,
    progress: Callable[[float], None] | None = None,
) -> tuple[VDMTable | None, NeighborCache | None]:
    """Build (or load) the VDM table and neighbor cache a batch will share.

    Skipped entirely when no requested algorithm queries neighbors.
    """
    if not any(spec.needs_neighbors for spec in specs):
        return None, None
    echo(f"building shared neighbor structures for {dataset.name}")
    start = time.perf_counter()
    vdm = build_vdm_table(dataset)
    report.vdm_seconds = time.perf_counter() - start
    echo(f"VDM table ready in {report.vdm_seconds:.4f} s")

    cache = None
    if cache_file is not None and Path(cache_file).exists():
        start = time.perf_counter()
        cache = load_cache(cache_file, dataset)
        report.cache_seconds = time.perf_counter() - start
        report.cache_reused = True
        echo(
            f"neighbor cache loaded from {cache_file} in "
            f"{report.cache_seconds:.4f} s"
        )
    if cache is None:
        start = time.perf_counter()
        cache = build_neighbor_cache(dataset, vdm, workers=workers, progress=progress)
        report.cache_seconds = time.perf_counter() - start
        echo(f"neighbor cache built in {report.cache_seconds:.4f} s")
        if cache_file is not None:
            save_cache(cache, cache_file)
            echo(f"neighbor cache saved to {cache_file}")
    return vdm, cache


def run_algorithm(
    dataset: MultiLabelDataset,
    spec: AlgorithmSpec,
    output_dir: str | Path,
    seed: int,
    vdm: VDMTable | None = None,
    cache: NeighborCache | None = None,
) -> RunResult:
    """Run one algorithm and write its output file.

    The wall-clock time covers the algorithm only, not I/O. The output file
    name combines the dataset name, the algorithm and its parameters.
    """
    result = RunResult(spec.name, dataset.n_instances)
    estimator = spec.build(derive_subseed(seed, spec.name))
    use_cache = cache if spec.needs_neighbors else None
    use_vdm = vdm if spec.needs_neighbors else None
    start = time.perf_counter()
    resampled = estimator.fit_resample(
        dataset, neighbors=use_cache, vdm_table=use_vdm
    )
    result.seconds = time.perf_counter() - start
    result.instances_after = resampled.n_instances
    file_name = output_name(dataset.name, spec.name, spec.params)
    result.output_path = write_dataset(
        resampled, output_dir, file_name[: -len(".arff")]
    )
    return result


def run_batch(
    dataset: MultiLabelDataset,
    specs: list[AlgorithmSpec],
    output_dir: str | Path,
    seed: int = 0,
    workers: int = 1,
    cache_file: str | Path | None = None,
    echo: Callable[[str], None] = _echo_nothing,
    progress: Callable[[float], None] | None = None,
) -> ResampleReport:
    """Apply several algorithms to one dataset, sharing neighbor structures.

    Individual algorithm failures are recorded in the report and do not stop
    the remaining algorithms.
    """
    report = ResampleReport(dataset=dataset.name, workers=workers)
    vdm, cache = prepare_structures(
        dataset, specs, workers, report, cache_file, echo, progress
    )
    for spec in specs:
        rendered = ", ".join(f"{k}={v}" for k, v in spec.params.items())
        echo(f"running {spec.name} on {dataset.name}"
             + (f" ({rendered})" if rendered else ""))
        if spec.needs_neighbors and cache is not None:
            echo("  neighbor cache reused")
        try:
            result = run_algorithm(
                dataset, spec, output_dir, seed, vdm, cache
            )
            echo(f"  finished in {result.seconds:.4f} s "
                 f"({result.instances_before} -> {result.instances_after} instances)")
        except MLBalanceError as exc:
            result = RunResult(
                spec.name, dataset.n_instances, error=str(exc)
            )
            echo(f"  failed: {exc}")
        report.results.append(result)
    return report
