"""Symbol confusion matrices: accumulation, pruning, normalization, JSD.

Rows describe which other symbols a reference symbol gets confused with, so
insertions and deletions never enter the matrix, and the diagonal (correct
recognitions) is dropped before normalization for distance computation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .align import MATCH, SUBSTITUTION
from .errors import (
    DegenerateRowError,
    InvalidDistributionError,
    TooFewLabelsError,
)

_DIST_ATOL = 1e-9


@dataclass
class ConfusionMatrix:
    labels: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)  # (ref, hyp) -> int

    def __post_init__(self):
        self._label_set = set(self.labels)

    def add(self, ref, hyp, count=1):
        if count < 0:
            raise ValueError("confusion counts must be non-negative")
        for sym in (ref, hyp):
            if sym not in self._label_set:
                self.labels.append(sym)
                self._label_set.add(sym)
        self.counts[(ref, hyp)] = self.counts.get((ref, hyp), 0) + count

    def get(self, ref, hyp):
        return self.counts.get((ref, hyp), 0)

    def total(self, off_diagonal_only=False):
        return sum(
            c
            for (r, h), c in self.counts.items()
            if not (off_diagonal_only and r == h)
        )

    def to_array(self, labels=None):
        labels = list(self.labels if labels is None else labels)
        index = {sym: i for i, sym in enumerate(labels)}
        out = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for (r, h), c in self.counts.items():
            if r in index and h in index:
                out[index[r], index[h]] = c
        return out

    def to_csv(self):
        lines = ["," + ",".join(self.labels)]
        arr = self.to_array()
        for i, sym in enumerate(self.labels):
            lines.append(sym + "," + ",".join(str(int(v)) for v in arr[i]))
        return "\n".join(lines) + "\n"


def accumulate_confusions(alignments):
    """Count (ref, hyp) pairs over match and substitution ops."""
    matrix = ConfusionMatrix()
    for alignment in alignments:
        for op in alignment.ops:
            if op.kind == MATCH:
                matrix.add(op.ref, op.ref)
            elif op.kind == SUBSTITUTION:
                matrix.add(op.ref, op.hyp)
    matrix.labels.sort()
    return matrix


@dataclass
class PruneSummary:
    removed_mass_fraction: float
    removed_type_fraction: float
    kept_labels: list

    def to_dict(self):
        return {
            "removed_mass_fraction": self.removed_mass_fraction,
            "removed_type_fraction": self.removed_type_fraction,
            "kept_labels": list(self.kept_labels),
        }


def prune(matrix, min_count, empty_rule="and"):
    """Zero out rare off-diagonal confusions, then drop emptied labels.

    A label is dropped when its off-diagonal row and column are both empty
    (empty_rule="and", the default) or when either is (empty_rule="or").
    Fractions in the summary are over off-diagonal confusion mass and over
    distinct nonzero off-diagonal confusion types.
    """
    if min_count < 0:
        raise ValueError("min_count must be >= 0")
    if empty_rule not in ("and", "or"):
        raise ValueError("empty_rule must be 'and' or 'or'")
    offdiag = {k: c for k, c in matrix.counts.items() if k[0] != k[1] and c > 0}
    total_mass = sum(offdiag.values())
    kept = {k: c for k, c in offdiag.items() if c >= min_count}
    removed_mass = total_mass - sum(kept.values())

    row_nonempty = {sym: False for sym in matrix.labels}
    col_nonempty = {sym: False for sym in matrix.labels}
    for (r, h) in kept:
        row_nonempty[r] = True
        col_nonempty[h] = True
    if empty_rule == "and":
        keep_label = {s for s in matrix.labels if row_nonempty[s] or col_nonempty[s]}
    else:
        keep_label = {s for s in matrix.labels if row_nonempty[s] and col_nonempty[s]}

    pruned = ConfusionMatrix(labels=[s for s in matrix.labels if s in keep_label])
    for (r, h), c in matrix.counts.items():
        if r not in keep_label or h not in keep_label:
            continue
        if r != h and (r, h) not in kept:
            continue
        pruned.counts[(r, h)] = c
    summary = PruneSummary(
        removed_mass_fraction=removed_mass / total_mass if total_mass else 0.0,
        removed_type_fraction=(
            (len(offdiag) - len(kept)) / len(offdiag) if offdiag else 0.0
        ),
        kept_labels=list(pruned.labels),
    )
    return pruned, summary


@dataclass
class RowStochasticMatrix:
    labels: list
    rows: np.ndarray  # shape (n, n), each row sums to 1

    def row(self, symbol):
        return self.rows[self.labels.index(symbol)]


def row_normalize(matrix, drop_diagonal=True):
    """Convert counts to per-row categorical distributions.

    With drop_diagonal (the default) the diagonal is zeroed first, so each
    row describes the error pattern of its symbol.
    """
    labels = list(matrix.labels)
    arr = matrix.to_array(labels).astype(float)
    if drop_diagonal:
        np.fill_diagonal(arr, 0.0)
    sums = arr.sum(axis=1)
    for i, total in enumerate(sums):
        if total <= 0:
            raise DegenerateRowError(
                "row for symbol %r sums to zero; prune it first" % labels[i]
            )
    return RowStochasticMatrix(labels=labels, rows=arr / sums[:, None])


def _check_distribution(p, name):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise InvalidDistributionError("%s must be a vector" % name)
    if np.any(p < 0):
        raise InvalidDistributionError("%s has negative entries" % name)
    if not math.isclose(p.sum(), 1.0, abs_tol=_DIST_ATOL):
        raise InvalidDistributionError(
            "%s sums to %.12g, expected 1" % (name, p.sum())
        )
    return p


def jsd(p, q):
    """Jensen-Shannon divergence, base-2 logs, range [0, 1]; 0*log0 == 0."""
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.shape != q.shape:
        raise InvalidDistributionError("p and q have different lengths")
    m = 0.5 * (p + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_pm = np.where(p > 0, p * (np.log2(p) - np.log2(m)), 0.0)
        kl_qm = np.where(q > 0, q * (np.log2(q) - np.log2(m)), 0.0)
    value = 0.5 * float(kl_pm.sum()) + 0.5 * float(kl_qm.sum())
    # Clip float noise; exact symmetry comes from the symmetric formula.
    return min(max(value, 0.0), 1.0)


@dataclass
class DistanceMatrix:
    labels: list
    values: np.ndarray  # symmetric, zero diagonal, entries in [0, 1]

    def __len__(self):
        return len(self.labels)


def distance_matrix(rows):
    """Pairwise JSD between the row distributions."""
    n = len(rows.labels)
    if n < 2:
        raise TooFewLabelsError("need at least 2 labels, got %d" % n)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = jsd(rows.rows[i], rows.rows[j])
            values[i, j] = values[j, i] = d
    return DistanceMatrix(labels=list(rows.labels), values=values)
