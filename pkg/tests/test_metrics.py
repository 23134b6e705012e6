import numpy as np
import pytest
from hypothesis import given, strategies as st

from nnshift import Clustering, DataError, contingency, nmi, rand_index

from oracles import dict_nmi, pair_rand

labels = st.lists(st.integers(0, 5), min_size=2, max_size=40)


def test_contingency_examples():
    assert contingency([0, 0, 1], [0, 0, 1]).counts.tolist() == [[2, 0], [0, 1]]
    assert contingency([0, 0, 1, 1], [0, 1, 0, 1]).counts.tolist() == [[1, 1], [1, 1]]
    assert contingency([0], [0]).counts.tolist() == [[1]]
    t = contingency([0, 0, 1, 1], [0, 0, 0, 1])
    assert t.n == 4 and t.rows.tolist() == [2, 2] and t.cols.tolist() == [3, 1]


def test_length_mismatch():
    with pytest.raises(DataError):
        contingency([0, 1], [0])
    with pytest.raises(DataError):
        nmi([0, 1], [0])


def test_nmi_examples():
    assert nmi([0, 0, 1, 2], [5, 5, 3, 1]) == pytest.approx(1.0)
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)
    # H(a) = ln 2, H(b) = 2 ln 2 - 0.75 ln 3, I = H(b) - 0.5 ln 2
    ha = np.log(2)
    hb = 2 * np.log(2) - 0.75 * np.log(3)
    want = (hb - 0.5 * np.log(2)) / np.sqrt(ha * hb)
    assert nmi([0, 0, 1, 1], [0, 0, 0, 1]) == pytest.approx(want, abs=1e-6)
    assert want == pytest.approx(0.345592, abs=1e-6)


def test_nmi_degenerate_entropies():
    assert nmi([0, 0, 0], [1, 1, 1]) == 1.0
    assert nmi([0, 0, 0], [0, 1, 2]) == 0.0


def test_rand_examples():
    assert rand_index([0, 1, 1], [0, 1, 1]) == 1.0
    assert rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(2 / 6)
    assert rand_index([0, 0, 0, 0], [0, 1, 2, 3]) == 0.0
    with pytest.raises(DataError):
        rand_index([0], [0])


def test_noise_points_are_singletons():
    truth = [0, 0, 1, 1]
    noisy = Clustering([0, -1, 1, -1])
    assert nmi(truth, noisy) == pytest.approx(nmi(truth, [0, 2, 1, 3]))
    assert rand_index(truth, noisy) == pytest.approx(rand_index(truth, [0, 2, 1, 3]))
    # two noise points are never co-clustered with each other
    assert rand_index([0, 0], Clustering([-1, -1])) == 0.0


@given(labels, st.data())
def test_against_oracles_and_symmetry(a, data):
    b = data.draw(st.lists(st.integers(0, 5), min_size=len(a), max_size=len(a)))
    assert nmi(a, b) == pytest.approx(dict_nmi(a, b), abs=1e-9)
    assert rand_index(a, b) == pytest.approx(pair_rand(a, b), abs=1e-12)
    assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)
    assert rand_index(a, b) == rand_index(b, a)
    assert 0 <= nmi(a, b) <= 1 and 0 <= rand_index(a, b) <= 1


@given(labels, st.permutations(range(6)))
def test_permutation_invariance(a, perm):
    b = [perm[x] for x in a]
    rng = np.random.default_rng(len(a))
    c = rng.integers(0, 4, len(a))
    assert nmi(a, c) == pytest.approx(nmi(b, c), abs=1e-12)
    assert rand_index(a, c) == pytest.approx(rand_index(b, c), abs=1e-12)
