import numpy as np
import pytest

from mcvd.distance import DistanceDistribution
from mcvd.exceptions import DomainError


def test_constructors_and_validation():
    assert DistanceDistribution.fixed(10).mean == 10.0
    assert DistanceDistribution.uniform(4.1, 10).mean == pytest.approx(7.05)
    with pytest.raises(DomainError):
        DistanceDistribution.uniform(5, 5)
    with pytest.raises(DomainError):
        DistanceDistribution.uniform(3.0, 6.0).validate(4.0)
    DistanceDistribution.uniform(4.1, 6.0).validate(4.0)


def test_custom_density():
    tri = DistanceDistribution.custom(lambda r: 2 * (r - 5.0) / 9.0, 5.0, 8.0)
    assert tri.mean == pytest.approx(7.0, rel=1e-10)
    with pytest.raises(DomainError):
        DistanceDistribution.custom(lambda r: np.ones_like(r), 5.0, 8.0)
    rng = np.random.default_rng(0)
    samples = tri.sample(rng, 50_000)
    assert samples.min() >= 5.0 and samples.max() <= 8.0
    assert samples.mean() == pytest.approx(7.0, abs=0.02)


def test_expect_and_sample():
    u = DistanceDistribution.uniform(4.0, 8.0)
    assert u.expect(lambda r: r[None, :] ** 2)[0] == pytest.approx((8**3 - 4**3) / 3 / 4, rel=1e-12)
    f = DistanceDistribution.fixed(6.0)
    assert f.expect(lambda r: r**2) == pytest.approx(36.0)
    rng = np.random.default_rng(1)
    assert f.sample(rng) == 6.0
    assert np.all(f.sample(rng, 3) == 6.0)
    s = u.sample(rng, 1000)
    assert s.min() >= 4.0 and s.max() < 8.0
