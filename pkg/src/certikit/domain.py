"""Core data model: points, labeled examples, datasets, and certificates.

All types are immutable after construction and safe to share across threads.
Labels are normalized to the integers +1/-1; ``flip(y) == -y`` everywhere.
Datasets are ordered sequences (duplicates allowed, zero-based indexing);
subsets are taken by index sets and remember their original positions in the
``source_indices`` provenance field.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError

Label = int


def flip(label: Label) -> Label:
    return -label


def _check_label(label) -> int:
    if label not in (-1, 1):
        raise InputError(f"label must be +1 or -1, got {label!r}")
    return int(label)


@dataclass(frozen=True)
class Point:
    """A domain point: exactly one of ``discrete`` (an id) or ``vector`` is set."""

    discrete: Optional[int] = None
    vector: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if (self.discrete is None) == (self.vector is None):
            raise InputError("exactly one of discrete/vector must be populated")
        if self.discrete is not None:
            if self.discrete < 0:
                raise InputError("discrete point ids are natural numbers")
            object.__setattr__(self, "discrete", int(self.discrete))
        else:
            object.__setattr__(self, "vector", tuple(float(v) for v in self.vector))

    @property
    def is_discrete(self) -> bool:
        return self.discrete is not None

    @property
    def dim(self) -> int:
        if self.vector is None:
            raise InputError("discrete points have no vector dimension")
        return len(self.vector)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=float)


def dpoint(i: int) -> Point:
    return Point(discrete=i)


def vpoint(*coords: float) -> Point:
    return Point(vector=tuple(coords))


@dataclass(frozen=True)
class LabeledExample:
    point: Point
    label: Label

    def __post_init__(self):
        object.__setattr__(self, "label", _check_label(self.label))


@dataclass(frozen=True)
class WeightedExample:
    point: Point
    label: Label
    weight: int

    def __post_init__(self):
        object.__setattr__(self, "label", _check_label(self.label))
        if self.weight < 1:
            raise InputError(f"weight must be >= 1, got {self.weight}")
        object.__setattr__(self, "weight", int(self.weight))


@dataclass(frozen=True)
class Dataset:
    """Ordered sequence of labeled examples.

    ``source_indices`` records, for datasets produced by :func:`subsequence`,
    the positions the examples held in the original dataset.
    ``flipped_indices`` records label flips applied by the adversary module.
    """

    examples: Tuple[LabeledExample, ...]
    source_indices: Optional[Tuple[int, ...]] = None
    flipped_indices: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        if self.source_indices is not None:
            object.__setattr__(self, "source_indices", tuple(self.source_indices))
        object.__setattr__(self, "flipped_indices", tuple(self.flipped_indices))
        dims = {ex.point.dim for ex in self.examples if not ex.point.is_discrete}
        if len(dims) > 1:
            raise InputError(f"mixed vector dimensions in dataset: {sorted(dims)}")

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i: int) -> LabeledExample:
        return self.examples[i]

    @property
    def points(self) -> Tuple[Point, ...]:
        return tuple(ex.point for ex in self.examples)

    def labels_array(self) -> np.ndarray:
        return np.array([ex.label for ex in self.examples], dtype=np.int8)

    def as_matrix(self) -> np.ndarray:
        """Stack vector points into an (n, d) array."""
        if any(ex.point.is_discrete for ex in self.examples):
            raise InputError("as_matrix requires vector points")
        return np.array([ex.point.vector for ex in self.examples], dtype=float)


def dataset(pairs: Iterable[Tuple[Point, Label]]) -> Dataset:
    return Dataset(tuple(LabeledExample(p, y) for p, y in pairs))


def subsequence(data: Dataset, indices: Iterable[int]) -> Dataset:
    """Ordered subsequence of ``data``; original positions kept as provenance."""
    idx = sorted(set(int(i) for i in indices))
    n = len(data)
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise InputError(f"indices out of range [0, {n}): {idx}")
    examples = tuple(data.examples[i] for i in idx)
    if data.source_indices is not None:
        src = tuple(data.source_indices[i] for i in idx)
    else:
        src = tuple(idx)
    flipped = tuple(sorted(set(data.flipped_indices) & set(idx)))
    return Dataset(examples, source_indices=src, flipped_indices=flipped)


def weighted_view(
    data: Dataset,
    heavy_index: Optional[int] = None,
    heavy_weight: int = 1,
) -> Tuple[WeightedExample, ...]:
    """Weighted form of a dataset: all weights 1 except one designated element."""
    if heavy_weight < 1:
        raise InputError(f"heavy_weight must be >= 1, got {heavy_weight}")
    if heavy_index is not None and not (0 <= heavy_index < len(data)):
        raise InputError(f"heavy_index {heavy_index} out of range [0, {len(data)})")
    out = []
    for i, ex in enumerate(data):
        w = heavy_weight if i == heavy_index else 1
        out.append(WeightedExample(ex.point, ex.label, w))
    return tuple(out)


def plain_weights(examples: Iterable[LabeledExample]) -> Tuple[WeightedExample, ...]:
    return tuple(WeightedExample(ex.point, ex.label, 1) for ex in examples)


@dataclass(frozen=True)
class Certificate:
    """An index subset of a source dataset claimed to certify (test, label)
    against every hypothesis making at most ``budget`` mistakes on it."""

    source: Dataset
    indices: Tuple[int, ...]
    budget: int
    test: Point
    claimed_label: Label
    minimal_flag: bool = False

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "claimed_label", _check_label(self.claimed_label))
        if self.budget < 0:
            raise InputError("budget must be >= 0")
        n = len(self.source)
        if idx and (idx[0] < 0 or idx[-1] >= n):
            raise InputError(f"certificate indices out of range [0, {n})")

    @property
    def size(self) -> int:
        return len(self.indices)

    def subset(self) -> Dataset:
        return subsequence(self.source, self.indices)

    def to_json(self) -> str:
        test = self.test.discrete if self.test.is_discrete else list(self.test.vector)
        return json.dumps(
            {
                "indices": list(self.indices),
                "b": self.budget,
                "test": test,
                "label": self.claimed_label,
                "minimal": self.minimal_flag,
            }
        )

    @classmethod
    def from_json(cls, text: str, source: Dataset) -> "Certificate":
        obj = json.loads(text)
        test = obj["test"]
        point = dpoint(test) if isinstance(test, int) else vpoint(*test)
        return cls(
            source=source,
            indices=tuple(obj["indices"]),
            budget=int(obj["b"]),
            test=point,
            claimed_label=int(obj["label"]),
            minimal_flag=bool(obj["minimal"]),
        )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_dataset(data: Dataset, path) -> None:
    """CSV: header ``point,label`` for discrete domains, ``x1,...,xd,label``
    for vector domains."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if not data.examples or data.examples[0].point.is_discrete:
            writer.writerow(["point", "label"])
            for ex in data:
                writer.writerow([ex.point.discrete, ex.label])
        else:
            d = data.examples[0].point.dim
            writer.writerow([f"x{i + 1}" for i in range(d)] + ["label"])
            for ex in data:
                writer.writerow([_fmt(v) for v in ex.point.vector] + [ex.label])


def load_dataset(path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"empty dataset file: {path}")
    header = [h.strip() for h in rows[0]]
    examples = []
    if header == ["point", "label"]:
        for row in rows[1:]:
            if not row:
                continue
            examples.append(LabeledExample(dpoint(int(row[0])), int(row[1])))
    elif header[-1] == "label" and all(h == f"x{i + 1}" for i, h in enumerate(header[:-1])):
        for row in rows[1:]:
            if not row:
                continue
            coords = tuple(float(v) for v in row[:-1])
            examples.append(LabeledExample(vpoint(*coords), int(row[-1])))
    else:
        raise InputError(f"unrecognized dataset header: {header}")
    return Dataset(tuple(examples))
