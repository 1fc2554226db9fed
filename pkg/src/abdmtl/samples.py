"""Core sample types: instances, per-annotator noisy label samples, and the
pairwise-diversity gate that admits a set of label samples for abduction.

Diversity between two label samples is measured by normalized Hamming
distance and binarized by a strict threshold: samples are diverse when the
distance exceeds ``tau_div``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import EmptySample, InvalidThreshold, LengthMismatch
from .validation import check_binary_labels


@dataclass(frozen=True)
class Instance:
    """One data point: its position in the sample and its feature vector."""

    index: int
    features: tuple[float, ...]

    def __post_init__(self):
        if len(self.features) < 1:
            raise ValueError("an instance needs at least one feature")
        if not all(math.isfinite(v) for v in self.features):
            raise ValueError(f"instance {self.index} has non-finite features")


@dataclass(frozen=True)
class InstanceSample:
    """Ordered collection of instances sharing one feature width."""

    instances: tuple[Instance, ...]

    def __post_init__(self):
        if not self.instances:
            raise EmptySample("instance sample must contain at least one instance")
        k = len(self.instances[0].features)
        for pos, inst in enumerate(self.instances):
            if inst.index != pos:
                raise ValueError(f"instance at position {pos} carries index {inst.index}")
            if len(inst.features) != k:
                raise LengthMismatch(
                    f"instance {pos} has {len(inst.features)} features, expected {k}"
                )

    @property
    def n(self) -> int:
        return len(self.instances)

    @property
    def k(self) -> int:
        return len(self.instances[0].features)

    def feature_matrix(self) -> np.ndarray:
        """Features stacked into an (n, k) float array."""
        return np.array([inst.features for inst in self.instances], dtype=float)

    @classmethod
    def from_features(cls, features) -> "InstanceSample":
        arr = np.asarray(features, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        return cls(tuple(Instance(i, tuple(row)) for i, row in enumerate(arr.tolist())))


@dataclass(frozen=True)
class NoisyLabelSample:
    """One annotator's full binary labeling of an instance sample."""

    annotator_id: str
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", check_binary_labels(self.labels, "labels"))

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class DiverseNoisyLabels:
    """Several annotators' label samples over one instance sample.

    Pairwise diversity is a *requirement* on the data, not a construction
    invariant: build the object freely, then gate it with
    :func:`validate_diversity`, which reports violations as data.
    """

    samples: tuple[NoisyLabelSample, ...]
    tau_div: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.tau_div < 1.0:
            raise InvalidThreshold(f"tau_div must lie in [0, 1), got {self.tau_div}")

    @property
    def d(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class Dataset:
    """An instance sample, its diverse noisy label samples, and (for synthetic
    data) the ground-truth labels."""

    instances: InstanceSample
    labels: DiverseNoisyLabels
    true_labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.true_labels is not None:
            truth = check_binary_labels(self.true_labels, "true_labels")
            if len(truth) != self.instances.n:
                raise LengthMismatch(
                    f"true_labels has length {len(truth)}, expected {self.instances.n}"
                )
            object.__setattr__(self, "true_labels", truth)

    @property
    def n(self) -> int:
        return self.instances.n

    @property
    def k(self) -> int:
        return self.instances.k

    @property
    def d(self) -> int:
        return self.labels.d


# ---------------------------------------------------------------------------
# diversity metric and validation
# ---------------------------------------------------------------------------


def _as_labels(obj) -> tuple[int, ...]:
    if isinstance(obj, NoisyLabelSample):
        return obj.labels
    return check_binary_labels(obj)


def differentiate(a, b) -> float:
    """Normalized Hamming distance between two label samples, in [0, 1]."""
    la, lb = _as_labels(a), _as_labels(b)
    if len(la) != len(lb):
        raise LengthMismatch(f"label samples have lengths {len(la)} and {len(lb)}")
    if not la:
        raise EmptySample("cannot differentiate empty label samples")
    mismatches = sum(1 for x, y in zip(la, lb) if x != y)
    return mismatches / len(la)


def is_diverse(a, b, tau_div: float = 0.0) -> int:
    """1 when the pair's distance strictly exceeds ``tau_div``, else 0."""
    if not 0.0 <= tau_div < 1.0:
        raise InvalidThreshold(f"tau_div must lie in [0, 1), got {tau_div}")
    return 1 if differentiate(a, b) > tau_div else 0


@dataclass(frozen=True)
class TooFewSamples:
    count: int

    def describe(self) -> str:
        return f"too few label samples (d={self.count}, need at least 2)"


@dataclass(frozen=True)
class LengthViolation:
    sample_index: int
    expected: int
    actual: int

    def describe(self) -> str:
        return (
            f"label sample {self.sample_index} has length {self.actual}, "
            f"expected {self.expected}"
        )


@dataclass(frozen=True)
class DiversityViolation:
    pair: tuple[int, int]
    diversity: float

    def describe(self) -> str:
        a, b = self.pair
        return f"samples {a} and {b} are not diverse (distance {self.diversity:.6g})"


Violation = Union[TooFewSamples, LengthViolation, DiversityViolation]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(v.describe() for v in self.violations)


def validate_diversity(ds: Dataset) -> ValidationReport:
    """Gate a dataset: at least two label samples, all lengths equal to n,
    and every unordered pair strictly diverse at the dataset's tau_div.

    Violations are data, not exceptions.
    """
    violations: list[Violation] = []
    n = ds.n
    samples = ds.labels.samples
    if len(samples) < 2:
        violations.append(TooFewSamples(len(samples)))
    usable = []
    for idx, sample in enumerate(samples):
        if sample.n != n:
            violations.append(LengthViolation(idx, n, sample.n))
        else:
            usable.append(idx)
    for pos, a in enumerate(usable):
        for b in usable[pos + 1 :]:
            dist = differentiate(samples[a], samples[b])
            if not dist > ds.labels.tau_div:
                violations.append(DiversityViolation((a, b), dist))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def pairwise_diversity(ds: Dataset) -> np.ndarray:
    """(d, d) matrix of normalized Hamming distances; zero diagonal."""
    d = ds.d
    out = np.zeros((d, d), dtype=float)
    for a in range(d):
        for b in range(a + 1, d):
            dist = differentiate(ds.labels.samples[a], ds.labels.samples[b])
            out[a, b] = out[b, a] = dist
    return out


# ---------------------------------------------------------------------------
# dataset JSON (shared with the CLI)
# ---------------------------------------------------------------------------


def dataset_to_dict(ds: Dataset) -> dict:
    out = {
        "n": ds.n,
        "k": ds.k,
        "features": [list(inst.features) for inst in ds.instances.instances],
        "nls": [
            {"annotator_id": s.annotator_id, "labels": list(s.labels)}
            for s in ds.labels.samples
        ],
        "tau_div": ds.labels.tau_div,
    }
    if ds.true_labels is not None:
        out["true_labels"] = list(ds.true_labels)
    return out


def dataset_from_dict(obj: dict) -> Dataset:
    for key in ("n", "k", "features", "nls", "tau_div"):
        if key not in obj:
            raise ValueError(f"dataset object is missing field {key!r}")
    instances = InstanceSample.from_features(obj["features"])
    if instances.n != obj["n"] or instances.k != obj["k"]:
        raise ValueError(
            f"declared shape ({obj['n']}, {obj['k']}) does not match features "
            f"({instances.n}, {instances.k})"
        )
    samples = tuple(
        NoisyLabelSample(str(e["annotator_id"]), tuple(e["labels"])) for e in obj["nls"]
    )
    truth = obj.get("true_labels")
    return Dataset(
        instances=instances,
        labels=DiverseNoisyLabels(samples=samples, tau_div=float(obj["tau_div"])),
        true_labels=tuple(truth) if truth is not None else None,
    )
