import functools
import itertools

import numpy as np
import pytest

from mlnet.model import GeneratorConfig, simulate


@functools.lru_cache(maxsize=64)
def planted(n, L, ks, kr, rho, seed):
    return simulate(GeneratorConfig(n, L, ks, kr, rho, seed))


def random_network_array(rng, n, L, p=0.4):
    A = (rng.random((L, n, n)) < p).astype(np.uint8)
    for ell in range(L):
        np.fill_diagonal(A[ell], 0)
    return A


def best_permutation_agreement(est, truth, K):
    """Fraction of nodes matching after the best relabelling of ``est`` (exhaustive over K!)."""
    best = 0
    for perm in itertools.permutations(range(K)):
        mapped = np.asarray(perm)[est]
        best = max(best, int((mapped == truth).sum()))
    return best / len(truth)


def gram_oracle(A, side):
    L, n, _ = A.shape
    S = np.zeros((n, n))
    for ell in range(L):
        for i in range(n):
            for j in range(n):
                acc = 0
                for k in range(n):
                    if side == "sender":
                        acc += int(A[ell, i, k]) * int(A[ell, j, k])
                    else:
                        acc += int(A[ell, k, i]) * int(A[ell, k, j])
                S[i, j] += acc
            deg = A[ell, i, :].sum() if side == "sender" else A[ell, :, i].sum()
            S[i, i] -= deg
    return S


def block_oracle(A, gs, gr, ks, kr):
    L, n, _ = A.shape
    B = np.zeros((L, ks, kr))
    for ell in range(L):
        for k in range(ks):
            for l in range(kr):
                total = 0
                cnt_s = sum(1 for i in range(n) if gs[i] == k)
                cnt_r = sum(1 for j in range(n) if gr[j] == l)
                for i in range(n):
                    for j in range(n):
                        if gs[i] == k and gr[j] == l:
                            total += int(A[ell, i, j])
                B[ell, k, l] = total / (cnt_s * cnt_r) if cnt_s * cnt_r else 0.0
    return B


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
