import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heisenlab.montecarlo import (
    RNGStream,
    agree,
    estimate,
    get_workers,
    log_mean_exp,
    normals,
    one_sided,
    replica_map,
    workers,
)


def test_streams_are_per_replica():
    rng = RNGStream(42, 3)
    whole = normals(rng, range(0, 10), (4,))
    part = normals(rng, range(5, 10), (4,))
    assert np.array_equal(whole[5:], part)
    assert not np.array_equal(normals(RNGStream(42, 4), range(1), (4,)), whole[:1])
    assert rng.child(1) != rng.child(2)
    assert rng.child(1) == RNGStream(42, 3).child(1)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 3000), st.sampled_from([1, 2, 8]))
def test_replica_map_independent_of_workers(total, count):
    rng = RNGStream(7)
    func = lambda rr: normals(rng, rr, (3,)).sum(axis=1)
    base = replica_map(func, total)
    with workers(count):
        assert get_workers() == count
        assert np.array_equal(replica_map(func, total, chunk=97), base)
    assert get_workers() == 1


def test_estimators():
    est = estimate([1.0, 2.0, 3.0])
    assert est.mean == 2.0 and est.n == 3
    assert est.stderr == pytest.approx(np.std([1, 2, 3], ddof=1) / np.sqrt(3))
    lme = log_mean_exp(np.log([1.0, 2.0, 3.0]) + 600.0)
    assert np.isfinite(lme.stderr) and lme.mean == pytest.approx(2.0 * np.exp(600.0))
    assert agree(1.0, 1.0)["pass"]
    assert not agree(estimate([0.0, 0.1, 0.0, 0.1]), 5.0)["pass"]
    assert one_sided(1.0, 2.0)["pass"] and not one_sided(3.0, 2.0)["pass"]
    with pytest.raises(ValueError):
        replica_map(lambda rr: np.zeros(len(rr)), 0)
