"""Single-linkage clustering of converged solutions.

Two points belong to the same cluster when they are connected by a chain
of merges at distance <= tol, i.e. clusters are the connected components
of the threshold graph.  Order-independent by construction.
"""
from __future__ import annotations

import numpy as np

__all__ = ["cluster_count", "cluster_labels", "cluster_centers"]


def _union_find_labels(points: np.ndarray, tol: float) -> np.ndarray:
    n = points.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(points[i] - points[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    roots = np.array([find(i) for i in range(n)])
    # relabel to consecutive ids in order of first appearance
    labels = np.empty(n, dtype=int)
    seen: dict[int, int] = {}
    for i, r in enumerate(roots):
        if r not in seen:
            seen[r] = len(seen)
        labels[i] = seen[r]
    return labels


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def cluster_labels(points, tol: float) -> np.ndarray:
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    arr = _as_points(points)
    if arr.shape[0] == 0:
        return np.empty(0, dtype=int)
    return _union_find_labels(arr, tol)


def cluster_count(points, tol: float) -> int:
    labels = cluster_labels(points, tol)
    return int(labels.max()) + 1 if labels.size else 0


def cluster_centers(points, tol: float) -> np.ndarray:
    """Mean point of each cluster, ordered by first appearance."""
    arr = _as_points(points)
    labels = cluster_labels(points, tol)
    k = int(labels.max()) + 1 if labels.size else 0
    return np.array([arr[labels == i].mean(axis=0) for i in range(k)])
