"""Certificate extraction: greedy minimal, exact minimum, conic
(halfspaces, budget 0), and the chunk-and-concatenate construction that
trades sample size for a certificate of size (b+1)(s0-1).
"""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .conic import ConicInstance, caratheodory_reduce, conic_membership
from .domain import (
    Certificate,
    Dataset,
    LabeledExample,
    Point,
    flip,
    subsequence,
)
from .errors import (
    CapacityError,
    InputError,
    InsufficientSampleError,
    NotCertifiableError,
)
from .hypoclasses import HalfspaceFamily, HypothesisFamily
from .oracles import disagreement_witness, is_certificate, is_minimal_certificate
from .stars import HollowStar

MINIMUM_DATA_GUARD = 24
MINIMUM_SIZE_CAP_GUARD = 6
CHUNK_SIZE_CAP = 2**14


def _require_certificate(family, data, b, test, label) -> None:
    witness = disagreement_witness(family, data, b, test, label)
    if witness:
        raise NotCertifiableError(
            f"({test}, {label:+d}) is not in the {b}-robust agreement region",
            witness=witness.witness,
        )
    from .oracles import is_robustly_realizable
    from .domain import plain_weights

    if not is_robustly_realizable(family, plain_weights(data), b):
        raise NotCertifiableError(f"dataset is not {b}-robustly realizable")


def minimal_certificate(
    family: HypothesisFamily,
    data: Dataset,
    b: int,
    test: Point,
    label: int,
    order: str = "descending",
) -> Certificate:
    """Single-pass greedy deletion: drop each index in turn, keeping the drop
    whenever the remainder still certifies.  The result is minimal (the
    certificate property is monotone on subsets of a realizable sequence, so
    a failed drop can never succeed later)."""
    _require_certificate(family, data, b, test, label)
    if order == "descending":
        scan = range(len(data) - 1, -1, -1)
    elif order == "ascending":
        scan = range(len(data))
    else:
        raise InputError(f"unknown deletion order {order!r}")
    keep = set(range(len(data)))
    for i in scan:
        trial = sorted(keep - {i})
        if is_certificate(family, data, trial, b, test, label, trusted_superset=True):
            keep.discard(i)
    indices = tuple(sorted(keep))
    if not is_minimal_certificate(family, data, indices, b, test, label):
        raise NotCertifiableError("greedy deletion produced a non-minimal result")
    return Certificate(data, indices, b, test, label, minimal_flag=True)


def minimum_certificate(
    family: HypothesisFamily,
    data: Dataset,
    b: int,
    test: Point,
    label: int,
    size_cap: Optional[int] = None,
) -> Certificate:
    """Guaranteed minimum-size certificate by subset enumeration in
    increasing cardinality (ties broken lexicographically)."""
    n = len(data)
    if n > MINIMUM_DATA_GUARD and (size_cap is None or size_cap > MINIMUM_SIZE_CAP_GUARD):
        raise CapacityError(
            f"minimum_certificate guard: |data| = {n} > {MINIMUM_DATA_GUARD} "
            f"needs size_cap <= {MINIMUM_SIZE_CAP_GUARD}"
        )
    _require_certificate(family, data, b, test, label)
    top = n if size_cap is None else min(size_cap, n)
    for k in range(top + 1):
        for combo in itertools.combinations(range(n), k):
            if is_certificate(
                family, data, combo, b, test, label, trusted_superset=True
            ):
                return Certificate(data, combo, b, test, label, minimal_flag=True)
    raise CapacityError(f"no certificate of size <= {top} (size_cap too small)")


def caratheodory_certificate(
    family: HalfspaceFamily, data: Dataset, test: Point, label: int
) -> Certificate:
    """Budget-0 halfspace certificate of size at most the (lifted) dimension.

    Signed generators z_i = y_i x_i reduce agreement to conic membership of
    label * test; a basic solution plus support reduction pins the
    certificate to at most d generators."""
    if not isinstance(family, HalfspaceFamily):
        raise InputError("conic certificates require a halfspace family")
    points = family.lift_matrix([ex.point for ex in data])
    labels = data.labels_array()
    generators = points * labels[:, None]
    target = float(label) * family.lift(test)
    instance = ConicInstance(
        tuple(map(tuple, generators)), tuple(float(v) for v in target)
    )
    sol = conic_membership(instance)
    if not sol.feasible:
        raise NotCertifiableError(
            f"({test}, {label:+d}) is outside the agreement cone",
            witness=sol.separator,
        )
    reduced = caratheodory_reduce(instance, sol.coefficients)
    indices = tuple(sorted(reduced.support))
    if not is_certificate(family, data, indices, 0, test, label):
        raise NotCertifiableError(
            "conic support failed certificate validation (degenerate boundary case)"
        )
    return Certificate(data, indices, 0, test, label, minimal_flag=False)


def _take_chunk(stream: Iterator[LabeledExample], size: int) -> List[LabeledExample]:
    chunk = list(itertools.islice(stream, size))
    return chunk


def _chunk_qualifies(family, chunk, test, label) -> bool:
    from .domain import plain_weights
    from .oracles import is_robustly_realizable, in_robust_agreement

    data = Dataset(tuple(chunk))
    if not is_robustly_realizable(family, plain_weights(data), 0):
        return False
    return in_robust_agreement(family, data, 0, test, label)


def _auto_chunk_size(family, stream, test, label, consumed) -> int:
    """Double the chunk size from 4 until at least half of a 20-chunk probe
    batch qualifies, capped; probe chunks are consumed from the stream."""
    size = 4
    while True:
        batch = []
        for _ in range(20):
            chunk = _take_chunk(stream, size)
            consumed.extend(chunk)
            if len(chunk) < size:
                raise InsufficientSampleError(
                    "stream exhausted while probing for a chunk size",
                    chunks_scanned=len(batch),
                )
            batch.append(chunk)
        qualifying = sum(
            1 for chunk in batch if _chunk_qualifies(family, chunk, test, label)
        )
        if qualifying >= 10 or size >= CHUNK_SIZE_CAP:
            return min(size, CHUNK_SIZE_CAP)
        size *= 2


def chunked_certificate(
    family: HypothesisFamily,
    sample_stream: Iterable[LabeledExample],
    b: int,
    test: Point,
    label: int,
    chunk_size: Optional[int] = None,
    chunks_needed: Optional[int] = None,
) -> Certificate:
    """Concatenate b+1 per-chunk minimal budget-0 certificates.

    Chunks are retained when they are 0-realizable and already place
    (test, label) in their plain agreement region.  Any hypothesis within
    budget b on the concatenation is consistent with at least one retained
    certificate (pigeonhole over b+1 disjoint parts), so it must predict the
    claimed label; copies are deliberately never deduplicated.
    """
    needed = chunks_needed if chunks_needed is not None else b + 1
    if needed < 1:
        raise InputError("chunks_needed must be >= 1")
    stream = iter(sample_stream)
    consumed: List[LabeledExample] = []

    if chunk_size is None:
        chunk_size = _auto_chunk_size(family, stream, test, label, consumed)
        # reuse probe chunks: replay the consumed prefix ahead of the stream
        stream = itertools.chain(list(consumed), stream)
        consumed = []

    retained: List[Tuple[int, List[LabeledExample]]] = []
    scanned = 0
    while len(retained) < needed:
        offset = len(consumed)
        chunk = _take_chunk(stream, chunk_size)
        consumed.extend(chunk)
        if len(chunk) < chunk_size:
            raise InsufficientSampleError(
                f"stream exhausted after {scanned} chunks "
                f"({len(retained)}/{needed} qualifying)",
                chunks_scanned=scanned,
            )
        scanned += 1
        if _chunk_qualifies(family, chunk, test, label):
            retained.append((offset, chunk))

    source = Dataset(tuple(consumed))
    indices: List[int] = []
    for offset, chunk in retained:
        chunk_data = Dataset(tuple(chunk))
        cert = minimal_certificate(family, chunk_data, 0, test, label)
        indices.extend(offset + i for i in cert.indices)

    result = Certificate(source, tuple(sorted(indices)), b, test, label)
    if not is_certificate(family, source, result.indices, b, test, label):
        raise NotCertifiableError(
            "chunk concatenation failed validation (corruption exceeded budget?)"
        )
    return result


def chunk_lower_instance(
    family: HypothesisFamily, hollow_star: HollowStar, b: int
) -> Tuple[Dataset, Point, int]:
    """Instance on which no b-robust certificate smaller than
    (b+1)(s0-1) exists: b+1 copies of each star-body element, tested at the
    star's designated element with the flipped label."""
    if hollow_star.budget != 0:
        raise InputError("chunk_lower_instance expects a budget-0 star")
    if not hollow_star.verified:
        raise InputError("chunk_lower_instance expects a verified star")
    heavy = hollow_star.elements[hollow_star.heavy_index]
    body = tuple(
        ex for i, ex in enumerate(hollow_star.elements) if i != hollow_star.heavy_index
    )
    examples: List[LabeledExample] = []
    for ex in body:
        examples.extend([ex] * (b + 1))
    return Dataset(tuple(examples)), heavy.point, flip(heavy.label)
