"""Multi-layer stochastic co-block model: data types and sampling.

A multi-layer directed network on ``n`` nodes has ``L`` binary adjacency
matrices sharing one sender labelling and one receiver labelling.  Edge
``i -> j`` in layer ``l`` is an independent Bernoulli draw with probability
``B[l][g_s(i), g_r(j)]``; self-loops are excluded.

Labels are stored 0-based (``0..K-1``) as integer numpy arrays.

Generator preconditions (not checked at runtime): block entries bounded away
from 0 and 1, every community of size proportional to ``n / K``, and
``K_max**2 * L * log(n) / n`` small.  The experiment block construction below
satisfies the first two with high probability.
"""
from dataclasses import dataclass, field

import numpy as np

from mlnet._rng import as_generator, derive_rng
from mlnet.exceptions import DegenerateInputError, DimensionMismatchError

__all__ = [
    "MultiLayerNetwork",
    "CommunityLabels",
    "BlockTensor",
    "BlockDraws",
    "GeneratorConfig",
    "PlantedModel",
    "sample_balanced_labels",
    "build_experiment_blocks",
    "expected_adjacency",
    "sample_network",
    "simulate",
]


@dataclass(frozen=True)
class MultiLayerNetwork:
    """Stack of ``L`` binary ``n x n`` adjacency matrices with zero diagonals.

    ``layers`` has shape ``(L, n, n)`` and dtype ``uint8``.  ``node_ids`` and
    ``layer_ids`` map internal indices back to external identifiers when the
    network was read from a file.
    """

    layers: np.ndarray
    node_ids: tuple = None
    layer_ids: tuple = None

    def __post_init__(self):
        A = np.asarray(self.layers)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise DimensionMismatchError(f"layers must have shape (L, n, n), got {A.shape}")
        if A.shape[0] < 1 or A.shape[1] < 1:
            raise DegenerateInputError("network needs at least one layer and one node")
        if not np.isin(A, (0, 1)).all():
            raise DegenerateInputError("adjacency entries must be 0 or 1")
        A = A.astype(np.uint8, copy=True)
        idx = np.arange(A.shape[1])
        if A[:, idx, idx].any():
            raise DegenerateInputError("adjacency matrices must have zero diagonals")
        A.setflags(write=False)
        object.__setattr__(self, "layers", A)

    @property
    def n(self):
        return self.layers.shape[1]

    @property
    def L(self):
        return self.layers.shape[0]

    def layer_sum(self):
        """Entrywise sum over layers, shape ``(n, n)``, dtype int64."""
        return self.layers.sum(axis=0, dtype=np.int64)

    def permute_nodes(self, perm):
        perm = np.asarray(perm)
        return MultiLayerNetwork(self.layers[:, perm][:, :, perm])

    def permute_layers(self, perm):
        return MultiLayerNetwork(self.layers[np.asarray(perm)])


@dataclass(frozen=True)
class CommunityLabels:
    """Community assignment of ``n`` nodes into ``K`` groups (0-based)."""

    labels: np.ndarray
    K: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64).copy()
        if lab.ndim != 1:
            raise DimensionMismatchError("labels must be one-dimensional")
        if self.K < 1:
            raise DegenerateInputError("K must be positive")
        if lab.size and (lab.min() < 0 or lab.max() >= self.K):
            raise DimensionMismatchError(f"labels must lie in 0..{self.K - 1}")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "K", int(self.K))

    @property
    def n(self):
        return self.labels.size

    def sizes(self):
        return np.bincount(self.labels, minlength=self.K)

    def one_hot(self):
        Z = np.zeros((self.n, self.K))
        Z[np.arange(self.n), self.labels] = 1.0
        return Z


@dataclass(frozen=True)
class BlockDraws:
    """Per-layer random parameters used by :func:`build_experiment_blocks`."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    perturbation: np.ndarray


@dataclass(frozen=True)
class BlockTensor:
    """``L`` block probability matrices of shape ``(K_s, K_r)``."""

    blocks: np.ndarray
    draws: BlockDraws = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        B = np.asarray(self.blocks, dtype=np.float64)
        if B.ndim == 2:
            B = B[None]
        if B.ndim != 3:
            raise DimensionMismatchError(f"blocks must have shape (L, K_s, K_r), got {B.shape}")
        if not np.all((B >= 0.0) & (B <= 1.0)):
            raise DegenerateInputError("block probabilities must lie in [0, 1]")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "blocks", B)

    @property
    def L(self):
        return self.blocks.shape[0]

    @property
    def K_s(self):
        return self.blocks.shape[1]

    @property
    def K_r(self):
        return self.blocks.shape[2]


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    L: int
    K_s: int
    K_r: int
    rho: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise DegenerateInputError(f"rho must lie in (0, 1), got {self.rho}")
        if self.K_s < 1 or self.K_r < 1:
            raise DegenerateInputError("K_s and K_r must be positive")
        if self.L < 1:
            raise DegenerateInputError("L must be positive")
        if self.n < max(self.K_s, self.K_r):
            raise DegenerateInputError("n must be at least max(K_s, K_r)")


@dataclass(frozen=True)
class PlantedModel:
    """A sampled network together with the parameters that generated it."""

    network: MultiLayerNetwork
    sender: CommunityLabels
    receiver: CommunityLabels
    blocks: BlockTensor
    config: GeneratorConfig


def sample_balanced_labels(n, K, rng, strict=False):
    """Draw ``n`` labels independently and uniformly from ``0..K-1``.

    With ``strict=True`` the community sizes differ by at most one (a random
    permutation of ``0, 1, ..., K-1, 0, 1, ...``).
    """
    if n < 1 or K < 1:
        raise DegenerateInputError("n and K must be positive")
    if K > n:
        raise DegenerateInputError(f"cannot place {n} nodes into K={K} nonempty communities")
    rng = as_generator(rng)
    if strict:
        lab = rng.permutation(np.arange(n) % K)
    else:
        lab = rng.integers(0, K, size=n)
    return CommunityLabels(lab, K)


def _base_pattern(K_s, K_r):
    # 0 = off-diagonal base, 1 = diagonal, 2 = medium strength
    k = np.arange(K_s)[:, None]
    l = np.arange(K_r)[None, :]
    pattern = np.zeros((K_s, K_r), dtype=np.int8)
    pattern[l == (k + K_s) % K_r] = 2
    pattern[k == l] = 1
    return pattern


def build_experiment_blocks(K_s, K_r, L, rho, rng):
    """Random block tensor following the simulation design.

    For each layer draw ``alpha ~ U[0.6, 0.8]``, ``beta ~ U[0.1, 0.3]`` and
    ``gamma ~ U[0.4, 0.6]``; the base matrix is ``alpha`` on the diagonal,
    ``gamma`` where the receiver index is the sender index cyclically shifted
    by ``K_s`` (mod ``K_r``), and ``beta`` elsewhere.  A ``U[-0.1, 0.1]``
    perturbation is added, the result clipped to ``[0, 1]`` and scaled by
    ``rho``.
    """
    if not 0.0 < rho < 1.0:
        raise DegenerateInputError(f"rho must lie in (0, 1), got {rho}")
    if K_s < 1 or K_r < 1 or L < 1:
        raise DegenerateInputError("K_s, K_r and L must be positive")
    rng = as_generator(rng)
    pattern = _base_pattern(K_s, K_r)
    alpha = np.empty(L)
    beta = np.empty(L)
    gamma = np.empty(L)
    pert = np.empty((L, K_s, K_r))
    blocks = np.empty((L, K_s, K_r))
    for ell in range(L):
        alpha[ell] = rng.uniform(0.6, 0.8)
        beta[ell] = rng.uniform(0.1, 0.3)
        gamma[ell] = rng.uniform(0.4, 0.6)
        pert[ell] = rng.uniform(-0.1, 0.1, size=(K_s, K_r))
        base = np.choose(pattern, (beta[ell], alpha[ell], gamma[ell]))
        blocks[ell] = rho * np.clip(base + pert[ell], 0.0, 1.0)
    return BlockTensor(blocks, draws=BlockDraws(alpha, beta, gamma, pert))


def _check_labels_blocks(labels_s, labels_r, blocks):
    if labels_s.n != labels_r.n:
        raise DimensionMismatchError("sender and receiver labels have different lengths")
    if labels_s.K != blocks.K_s or labels_r.K != blocks.K_r:
        raise DimensionMismatchError(
            f"label ranges ({labels_s.K}, {labels_r.K}) do not match block shape "
            f"({blocks.K_s}, {blocks.K_r})"
        )


def expected_adjacency(labels_s, labels_r, blocks, layer):
    """Edge-probability matrix of one layer, with zero diagonal."""
    _check_labels_blocks(labels_s, labels_r, blocks)
    B = blocks.blocks[layer]
    omega = B[labels_s.labels][:, labels_r.labels]
    np.fill_diagonal(omega, 0.0)
    return omega


def sample_network(labels_s, labels_r, blocks, rng):
    """Draw every off-diagonal edge of every layer independently."""
    _check_labels_blocks(labels_s, labels_r, blocks)
    rng = as_generator(rng)
    n = labels_s.n
    out = np.empty((blocks.L, n, n), dtype=np.uint8)
    for ell in range(blocks.L):
        omega = expected_adjacency(labels_s, labels_r, blocks, ell)
        out[ell] = rng.random((n, n)) < omega
    return MultiLayerNetwork(out)


def simulate(config):
    """Sample a planted network from a :class:`GeneratorConfig`.

    Each random component uses its own stream derived from ``config.seed``.
    """
    seed = config.seed
    sender = sample_balanced_labels(config.n, config.K_s, derive_rng(seed, "labels-sender"))
    receiver = sample_balanced_labels(config.n, config.K_r, derive_rng(seed, "labels-receiver"))
    blocks = build_experiment_blocks(
        config.K_s, config.K_r, config.L, config.rho, derive_rng(seed, "blocks")
    )
    network = sample_network(sender, receiver, blocks, derive_rng(seed, "edges"))
    return PlantedModel(network, sender, receiver, blocks, config)
