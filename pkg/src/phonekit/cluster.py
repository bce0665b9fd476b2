"""Agglomerative clustering over distance matrices, plus a 2-D embedding.

The clustering is the textbook pairwise-update algorithm with single,
complete, or average (UPGMA) linkage.  When two candidate merges tie on
height, the pair whose clusters have the lexicographically smallest member
labels wins, making dendrograms deterministic.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import TooFewLabelsError

LINKAGES = ("average", "complete", "single")


@dataclass(frozen=True)
class Merge:
    a: int
    b: int
    height: float
    new_id: int


@dataclass
class Dendrogram:
    leaves: list  # labels; leaf i has cluster id i
    merges: list  # Merge, heights non-decreasing

    def to_json(self):
        return json.dumps(
            {
                "leaves": list(self.leaves),
                "merges": [
                    {"a": m.a, "b": m.b, "height": m.height, "id": m.new_id}
                    for m in self.merges
                ],
            },
            ensure_ascii=False,
            indent=2,
        )

    def to_newick(self):
        """Newick string with branch lengths from merge heights."""
        n = len(self.leaves)
        text = {i: self.leaves[i] for i in range(n)}
        height = {i: 0.0 for i in range(n)}
        for m in self.merges:
            la = max(m.height - height[m.a], 0.0)
            lb = max(m.height - height[m.b], 0.0)
            text[m.new_id] = "(%s:%g,%s:%g)" % (text[m.a], la, text[m.b], lb)
            height[m.new_id] = m.height
        root = self.merges[-1].new_id if self.merges else 0
        return text[root] + ";"


def agglomerative_cluster(distances, linkage="average"):
    if linkage not in LINKAGES:
        raise ValueError("linkage must be one of %s" % (LINKAGES,))
    labels = list(distances.labels)
    n = len(labels)
    if n < 2:
        raise TooFewLabelsError("need at least 2 labels to cluster")
    dist = {}
    for i in range(n):
        for j in range(i + 1, n):
            dist[(i, j)] = float(distances.values[i, j])
    size = {i: 1 for i in range(n)}
    min_label = {i: labels[i] for i in range(n)}
    active = set(range(n))
    merges = []
    next_id = n
    while len(active) > 1:
        best = None
        for (i, j), d in dist.items():
            key = (d, tuple(sorted((min_label[i], min_label[j]))))
            if best is None or key < best[0]:
                best = (key, i, j)
        key, i, j = best
        height = key[0]
        new_id = next_id
        next_id += 1
        merges.append(Merge(a=i, b=j, height=height, new_id=new_id))
        active.discard(i)
        active.discard(j)
        new_dists = {}
        for k in active:
            d_ik = dist.pop(_key(i, k))
            d_jk = dist.pop(_key(j, k))
            if linkage == "single":
                d_new = min(d_ik, d_jk)
            elif linkage == "complete":
                d_new = max(d_ik, d_jk)
            else:
                d_new = (size[i] * d_ik + size[j] * d_jk) / (size[i] + size[j])
            new_dists[_key(new_id, k)] = d_new
        dist.pop((i, j), None)
        dist.update(new_dists)
        size[new_id] = size[i] + size[j]
        min_label[new_id] = min(min_label[i], min_label[j])
        active.add(new_id)
    return Dendrogram(leaves=labels, merges=merges)


def _key(i, j):
    return (i, j) if i < j else (j, i)


def flat_clusters(dendrogram, height):
    """Cut the tree: merges at or below the cut are applied.

    Returns a partition as a list of sorted label lists, sorted by first label.
    """
    if height < 0:
        raise ValueError("cut height must be >= 0")
    n = len(dendrogram.leaves)
    members = {i: [dendrogram.leaves[i]] for i in range(n)}
    for m in dendrogram.merges:
        if m.height <= height:
            members[m.new_id] = members.pop(m.a) + members.pop(m.b)
        else:
            break
    clusters = [sorted(v) for v in members.values()]
    clusters.sort(key=lambda c: c[0])
    return clusters


def project_2d(distances, seed=0):
    """Deterministic 2-D embedding of a distance matrix (classical MDS).

    The embedding is a pure function of the input; the seed is accepted for
    interface stability with stochastic embedders and ignored here.
    """
    n = len(distances.labels)
    if n < 3:
        raise TooFewLabelsError("need at least 3 labels to project, got %d" % n)
    d2 = np.asarray(distances.values, dtype=float) ** 2
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ d2 @ j
    eigvals, eigvecs = np.linalg.eigh(b)
    order = np.argsort(eigvals)[::-1][:2]
    coords = np.zeros((n, 2))
    for axis, idx in enumerate(order):
        lam = max(eigvals[idx], 0.0)
        vec = eigvecs[:, idx] * np.sqrt(lam)
        # Fix the eigenvector sign so output is reproducible across BLAS builds.
        anchor = int(np.argmax(np.abs(vec)))
        if vec[anchor] < 0:
            vec = -vec
        coords[:, axis] = vec
    return {label: (float(x), float(y)) for label, (x, y) in zip(distances.labels, coords)}
