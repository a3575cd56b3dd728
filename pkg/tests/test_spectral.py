import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdext.kernel import DomainSet
from pdext.operators import BumpFunction
from pdext.spectral import (
    ExponentialFamily,
    exponential_gram,
    interval_integral,
    lambda_pattern,
    max_offdiag,
    parseval_defect,
)

PAIR = DomainSet([(0.0, 1.0), (2.0, 3.0)])
NONPAIR = DomainSet([(0.0, 1.0), (3.0, 5.0)])


def test_patterns():
    q = lambda_pattern("quarter", 5)
    assert q.size == 21 and 0.25 in q and 4.25 in q and -4.75 in q
    h = lambda_pattern("half", 5)
    assert h.size == 21 and np.allclose(np.diff(h), 0.5)


def test_single_frequency():
    G = exponential_gram(ExponentialFamily(PAIR, [0.7]))
    assert G.shape == (1, 1) and G[0, 0] == 1.0


def test_spectral_pair_gram_is_identity():
    G = exponential_gram(ExponentialFamily(PAIR, lambda_pattern("quarter", 5)))
    assert np.max(np.abs(G - np.eye(G.shape[0]))) <= 1e-12


def test_non_pair_has_large_offdiagonal():
    G = exponential_gram(ExponentialFamily(NONPAIR, lambda_pattern("half", 5)))
    assert max_offdiag(G) >= 0.1


def test_interval_integral():
    assert interval_integral(0.0, 1.0, 3.0) == 2.0
    d = 0.3
    exact = (np.exp(2j * np.pi * d * 2.0) - np.exp(2j * np.pi * d * 0.5)) / (2j * np.pi * d)
    assert abs(interval_integral(d, 0.5, 2.0) - exact) < 1e-15


def test_parseval_member_and_zero():
    fam = ExponentialFamily(PAIR, lambda_pattern("quarter", 5))
    e = lambda x: np.exp(2j * np.pi * 0.25 * x) / math.sqrt(2.0)
    assert abs(parseval_defect(fam, e)) <= 1e-8
    assert parseval_defect(fam, lambda x: np.zeros_like(x)) == 0.0


def test_parseval_pair_vs_non_pair():
    bump = BumpFunction(0.5, 0.4)
    d_pair = [parseval_defect(ExponentialFamily(PAIR, lambda_pattern("quarter", r)), bump) for r in (5, 10, 20)]
    d_non = [parseval_defect(ExponentialFamily(NONPAIR, lambda_pattern("half", r)), bump) for r in (5, 10, 20)]
    assert d_pair[0] > d_pair[1] > d_pair[2] >= -1e-12
    assert d_pair[2] < 1e-7
    assert min(d_non) > 100 * d_pair[-1] and d_non[-1] > 0.01


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6, unique=True))
def test_gram_hermitian_unit_diagonal(lams):
    G = exponential_gram(ExponentialFamily(NONPAIR, lams))
    assert np.array_equal(G, G.conj().T)
    assert np.all(np.diag(G) == 1.0)
    assert np.linalg.eigvalsh(G)[0] > -1e-10
