import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20140315)


def random_table(rng, shape, sparsity=0.0):
    """Random probability table; ``sparsity`` zeroes a fraction of the cells."""
    t = rng.random(shape) ** 3
    if sparsity:
        t[rng.random(shape) < sparsity] = 0.0
    if t.sum() == 0:
        t.flat[0] = 1.0
    return t / t.sum()


def shannon(p):
    """Reference Shannon entropy written out term by term."""
    total = 0.0
    for x in np.ravel(p):
        if x > 0:
            total -= x * np.log(x)
    return total


def tsallis_ref(p, q):
    """Reference Tsallis entropy from the power-sum definition."""
    p = np.ravel(p)
    p = p[p > 0]
    if q == 1:
        return shannon(p)
    return (np.sum(p**q) - 1.0) / (1.0 - q)


def conditional_ref(table, q):
    """H_q(A|B) by looping over columns with explicit Bayes-rule conditionals."""
    table = np.asarray(table)
    total = 0.0
    for b in range(table.shape[1]):
        pb = table[:, b].sum()
        if pb == 0:
            continue
        total += pb**q * tsallis_ref(table[:, b] / pb, q)
    return total
