"""Spectral co-clustering with debiased sums of Gram matrices.

Sender labels come from the leading eigenvectors of
``sum_l (A_l A_l^T - D_l^out)``, receiver labels from
``sum_l (A_l^T A_l - D_l^in)``.  Subtracting the degree diagonal removes the
bias that the diagonal of each Gram matrix would otherwise add.  Both sides
embed into ``min(K_s0, K_r0)`` dimensions and run k-means on the raw rows.
"""
from dataclasses import dataclass

import numpy as np

from mlnet._rng import as_generator
from mlnet.exceptions import DegenerateInputError, NumericalFailureError
from mlnet.model import CommunityLabels

__all__ = [
    "Embedding",
    "CoClusterResult",
    "KMeansResult",
    "debiased_gram_sum",
    "top_eigenvectors",
    "krylov_top_eigs",
    "kmeans",
    "kmeans_objective",
    "dsog_cocluster",
    "SpectralCache",
]

DENSE_EIG_MAX_N = 2048


@dataclass(frozen=True)
class Embedding:
    vectors: np.ndarray
    values: np.ndarray

    @property
    def dims(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class CoClusterResult:
    sender: CommunityLabels
    receiver: CommunityLabels


def debiased_gram_sum(net, side):
    """Layer-summed Gram matrix with the degree diagonal removed.

    Parameters
    ----------
    net : MultiLayerNetwork
    side : {"sender", "receiver"}

    Returns
    -------
    ndarray of shape (n, n)
        Exactly symmetric; zero diagonal for binary zero-diagonal input.
    """
    n, L = net.n, net.L
    A = net.layers.astype(np.float64)
    if side == "sender":
        # rows of A_l concatenated over layers: H H^T = sum_l A_l A_l^T
        H = A.transpose(1, 0, 2).reshape(n, L * n)
        deg = A.sum(axis=(0, 2))
    elif side == "receiver":
        H = A.transpose(2, 0, 1).reshape(n, L * n)
        deg = A.sum(axis=(0, 1))
    else:
        raise ValueError(f"side must be 'sender' or 'receiver', got {side!r}")
    S = H @ H.T
    S[np.diag_indices(n)] -= deg
    return 0.5 * (S + S.T)


def _canonicalize_signs(V):
    V = V.copy()
    for c in range(V.shape[1]):
        col = V[:, c]
        big = np.flatnonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))
        if big.size and col[big[0]] < 0:
            V[:, c] = -col
    return V


def krylov_top_eigs(matvec, n, d, tol=1e-10, max_matvecs=None, max_basis=None, rng=0):
    """Largest-algebraic eigenpairs of a symmetric operator.

    Lanczos-type Krylov iteration with full reorthogonalization and thick
    restarts: the basis is expanded one vector at a time, Rayleigh-Ritz is
    applied to the projected matrix, and when the basis is full it is
    truncated to the leading Ritz vectors.

    Converged when every wanted Ritz pair has residual
    ``||S x - theta x|| <= tol * max(1, |theta|_max)``.

    Returns
    -------
    values : ndarray (d,), descending
    vectors : ndarray (n, d)
    info : dict
        ``matvecs``, ``restarts`` and final ``residuals``.
    """
    if not 1 <= d <= n:
        raise DegenerateInputError(f"need 1 <= d <= n, got d={d}, n={n}")
    rng = as_generator(rng)
    if max_matvecs is None:
        max_matvecs = 10 * n
    if max_basis is None:
        max_basis = min(n, max(2 * d + 20, 40))
    max_basis = max(min(max_basis, n), d)
    keep = min(max_basis - 1, d + max(2, d // 2)) if max_basis > d else d

    V = np.zeros((n, max_basis))
    AV = np.zeros((n, max_basis))
    k = 0
    matvecs = 0
    restarts = 0
    pending = rng.standard_normal(n)
    residuals = np.full(d, np.inf)

    def orthonormalize(v, k):
        for _ in range(2):
            v = v - V[:, :k] @ (V[:, :k].T @ v)
        nrm = np.linalg.norm(v)
        return v, nrm

    while True:
        # expand
        while k < max_basis:
            v, nrm = orthonormalize(pending, k)
            if nrm < 1e-10 * max(1.0, np.linalg.norm(pending)):
                # invariant subspace reached; continue from a fresh direction
                v, nrm = orthonormalize(rng.standard_normal(n), k)
                if nrm < 1e-12:
                    break
            V[:, k] = v / nrm
            AV[:, k] = matvec(V[:, k])
            matvecs += 1
            pending = AV[:, k]
            k += 1
            if k >= d and (k == max_basis or k == n or k % 5 == 0):
                break

        H = V[:, :k].T @ AV[:, :k]
        H = 0.5 * (H + H.T)
        theta, Y = np.linalg.eigh(H)
        order = np.argsort(theta)[::-1]
        theta, Y = theta[order], Y[:, order]
        if k >= d:
            X = V[:, :k] @ Y[:, :d]
            R = AV[:, :k] @ Y[:, :d] - X * theta[:d]
            residuals = np.linalg.norm(R, axis=0)
            scale = max(1.0, np.abs(theta).max())
            if np.all(residuals <= tol * scale) or k == n:
                return theta[:d], X, {"matvecs": matvecs, "restarts": restarts,
                                      "residuals": residuals}
        if matvecs >= max_matvecs:
            raise NumericalFailureError(
                "Krylov eigensolver did not converge",
                {"matvecs": matvecs, "restarts": restarts, "residuals": residuals.tolist(),
                 "basis": k, "tol": tol},
            )
        if k == max_basis:
            # thick restart on the leading Ritz vectors
            Yk = Y[:, :keep]
            V[:, :keep] = V[:, :k] @ Yk
            AV[:, :keep] = AV[:, :k] @ Yk
            V[:, keep:] = 0.0
            AV[:, keep:] = 0.0
            # continue from the residual of the worst unconverged wanted pair
            worst = int(np.argmax(residuals)) if np.isfinite(residuals).all() else 0
            pending = AV[:, worst] - theta[worst] * V[:, worst]
            k = keep
            restarts += 1


def top_eigenvectors(S, d, method="auto", tol=1e-10, rng=0):
    """Eigenvectors of the ``d`` largest algebraic eigenvalues of symmetric ``S``.

    Columns are orthonormal, ordered by descending eigenvalue, and each column's
    first non-negligible entry is positive.  ``method`` is ``"dense"``,
    ``"lanczos"`` or ``"auto"`` (dense up to 2048 rows).
    """
    S = np.asarray(S, dtype=np.float64)
    n = S.shape[0]
    if S.ndim != 2 or S.shape[1] != n:
        raise DegenerateInputError("S must be square")
    if not 1 <= d <= n:
        raise DegenerateInputError(f"need 1 <= d <= n, got d={d}, n={n}")
    if method == "auto":
        method = "dense" if n <= DENSE_EIG_MAX_N else "lanczos"
    if method == "dense":
        w, V = np.linalg.eigh(S)
        w, V = w[::-1][:d], V[:, ::-1][:, :d]
    elif method == "lanczos":
        w, V, _ = krylov_top_eigs(lambda x: S @ x, n, d, tol=tol, rng=rng)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Embedding(_canonicalize_signs(V), np.asarray(w))


@dataclass(frozen=True)
class KMeansResult:
    labels: CommunityLabels
    centers: np.ndarray
    objective: float
    n_iter: int
    history: tuple


def kmeans_objective(points, labels, centers):
    diff = points - centers[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def _sq_dists(points, centers):
    d2 = (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp(points, K, rng):
    n = points.shape[0]
    centers = np.empty((K, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = _sq_dists(points, centers[:1])[:, 0]
    for c in range(1, K):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[c] = points[idx]
        closest = np.minimum(closest, _sq_dists(points, centers[c:c + 1])[:, 0])
    return centers


def _lloyd(points, centers, max_iter):
    n, K = points.shape[0], centers.shape[0]
    labels = np.argmin(_sq_dists(points, centers), axis=1)
    history = [kmeans_objective(points, labels, centers)]
    for it in range(1, max_iter + 1):
        counts = np.bincount(labels, minlength=K)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        new_centers = centers.copy()
        filled = counts > 0
        new_centers[filled] = sums[filled] / counts[filled, None]
        # empty clusters: move to the point farthest from its own center
        if not filled.all():
            dist = np.einsum("ij,ij->i", points - new_centers[labels], points - new_centers[labels])
            taken = set()
            for c in np.flatnonzero(~filled):
                for idx in np.argsort(-dist, kind="stable"):
                    if idx not in taken:
                        break
                taken.add(int(idx))
                new_centers[c] = points[idx]
        centers = new_centers
        new_labels = np.argmin(_sq_dists(points, centers), axis=1)
        obj = kmeans_objective(points, new_labels, centers)
        if obj > history[-1] * (1 + 1e-10) + 1e-12:
            raise NumericalFailureError(
                "k-means objective increased", {"iteration": it, "previous": history[-1], "current": obj}
            )
        history.append(obj)
        if np.array_equal(new_labels, labels):
            return labels, centers, it, history
        labels = new_labels
    return labels, centers, max_iter, history


def kmeans(points, K, rng, n_init=10, max_iter=100):
    """Lloyd's k-means with k-means++ seeding and restarts.

    Keeps the restart with the smallest within-cluster sum of squares (first
    one wins ties).  Nearest-center ties go to the lowest center index.  A
    center that loses all its points is moved to the point farthest from its
    current center.

    Returns
    -------
    KMeansResult
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if K < 1 or n < K:
        raise DegenerateInputError(f"need 1 <= K <= n, got K={K}, n={n}")
    if not np.isfinite(X).all():
        raise NumericalFailureError("k-means input contains non-finite values")
    rng = as_generator(rng)
    if K == 1:
        centers = X.mean(axis=0, keepdims=True)
        labels = np.zeros(n, dtype=np.int64)
        obj = kmeans_objective(X, labels, centers)
        return KMeansResult(CommunityLabels(labels, 1), centers, obj, 0, (obj,))
    best = None
    for _ in range(n_init):
        init = _kmeanspp(X, K, rng)
        labels, centers, n_iter, history = _lloyd(X, init, max_iter)
        obj = history[-1]
        if best is None or obj < best[2]:
            best = (labels, centers, obj, n_iter, tuple(history))
    labels, centers, obj, n_iter, history = best
    return KMeansResult(CommunityLabels(labels, K), centers, obj, n_iter, history)


class SpectralCache:
    """Candidate-independent spectral quantities of one network.

    The debiased Gram sums and their eigendecompositions do not depend on the
    candidate pair, so they are computed once and reused across candidates.
    """

    def __init__(self, net, method="auto"):
        self.net = net
        self.method = method
        self._gram = {}
        self._eig = {}

    def gram(self, side):
        if side not in self._gram:
            self._gram[side] = debiased_gram_sum(self.net, side)
        return self._gram[side]

    def embedding(self, side, d):
        key = (side, d)
        if key not in self._eig:
            method = self.method
            if method == "auto":
                method = "dense" if self.net.n <= DENSE_EIG_MAX_N else "lanczos"
            if method == "dense":
                if (side, "full") not in self._eig:
                    self._eig[(side, "full")] = top_eigenvectors(self.gram(side), self.net.n, "dense")
                full = self._eig[(side, "full")]
                self._eig[key] = Embedding(full.vectors[:, :d], full.values[:d])
            else:
                self._eig[key] = top_eigenvectors(self.gram(side), d, method)
        return self._eig[key]


def dsog_cocluster(net, K_s0, K_r0, rng, cache=None):
    """Estimate sender and receiver labels for a candidate ``(K_s0, K_r0)``.

    Both sides embed into ``min(K_s0, K_r0)`` leading eigenvectors of their
    debiased Gram sum; sender rows are split into ``K_s0`` clusters and
    receiver rows into ``K_r0`` clusters.
    """
    n = net.n
    if not (1 <= K_s0 <= n and 1 <= K_r0 <= n):
        raise DegenerateInputError(f"candidate ({K_s0}, {K_r0}) out of range for n={n}")
    rng = as_generator(rng)
    cache = cache if cache is not None else SpectralCache(net)
    d = min(K_s0, K_r0)
    out = {}
    for side, K in (("sender", K_s0), ("receiver", K_r0)):
        U = cache.embedding(side, d).vectors
        out[side] = kmeans(U, K, rng).labels
    return CoClusterResult(out["sender"], out["receiver"])
