import numpy as np
import pytest
from scipy import stats

from lpep.pg import MAX_ROUNDS, make_rng, pg1_mean, pg1_var, sample_pg1, sample_pg1_rounds


def pg_moment_check(c, draws=100_000, seed=7):
    """(sample mean, closed-form mean, standard error) for PG(1, c)."""
    x = sample_pg1(np.full(draws, c), make_rng(seed, int(10 * c)))
    return x.mean(), pg1_mean(c), x.std(ddof=1) / np.sqrt(draws)


def test_rng_streams_reproducible_and_distinct():
    a = make_rng(5, 0).random(4)
    np.testing.assert_array_equal(a, make_rng(5, 0).random(4))
    assert not np.array_equal(a, make_rng(5, 1).random(4))
    assert not np.array_equal(a, make_rng(6, 0).random(4))
    with pytest.raises(ValueError):
        make_rng(-1)


def test_mean_formula_values():
    assert pg1_mean(0.0) == 0.25
    assert pg1_mean(1e-6) == pytest.approx(0.25, abs=1e-12)
    assert pg1_mean(2.0) == pytest.approx(0.19039853898894122, abs=1e-15)
    assert pg1_mean(-2.0) == pg1_mean(2.0)
    assert pg1_var(0.0) == pytest.approx(1 / 24)


def test_variance_formula_continuity():
    for c in (1e-5, 1e-4, 2e-4):
        assert pg1_var(c) == pytest.approx(1 / 24, rel=1e-6)
    # closed form at c=3 from the cumulant series of the Laplace transform
    c = 3.0
    ref = (np.sinh(c) - c) / (4 * c**3 * np.cosh(c / 2) ** 2)
    assert pg1_var(c) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("c", [0.0, 1.0, 2.0, 2.5, 7.0])
def test_sample_mean(c):
    m, ref, se = pg_moment_check(c)
    assert abs(m - ref) < 3 * se


def test_sample_variance_at_zero():
    x = sample_pg1(np.zeros(100_000), make_rng(3))
    # se of the sample variance from the fourth central moment
    m4 = np.mean((x - x.mean()) ** 4)
    se = np.sqrt((m4 - x.var() ** 2) / x.size)
    assert abs(x.var(ddof=1) - 1 / 24) < 3 * se


@pytest.mark.parametrize("c,t", [(0.0, 1.0), (1.5, 0.5), (1.5, 4.0), (6.0, 2.0)])
def test_laplace_transform(c, t):
    # E exp(-t w) = cosh(c/2) / cosh(sqrt((c^2/2 + t) / 2))
    x = sample_pg1(np.full(100_000, c), make_rng(11, int(c * 10 + t)))
    v = np.exp(-t * x)
    ref = np.cosh(c / 2) / np.cosh(np.sqrt((c * c / 2 + t) / 2))
    assert abs(v.mean() - ref) < 4 * v.std() / np.sqrt(v.size)


@pytest.mark.parametrize("c", [0.7, 3.0])
def test_symmetric_in_c(c):
    a = sample_pg1(np.full(10_000, c), make_rng(1, 0))
    b = sample_pg1(np.full(10_000, -c), make_rng(1, 1))
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_positive_and_shape():
    c = np.linspace(-30, 30, 12).reshape(3, 4)
    x = sample_pg1(c, make_rng(0))
    assert x.shape == (3, 4) and np.all(x > 0)
    assert isinstance(sample_pg1(1.0, make_rng(0)), float)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        sample_pg1(np.array([1.0, np.inf]), make_rng(0))


def test_same_stream_same_draws():
    c = np.array([0.1, 2.0, 40.0])
    np.testing.assert_array_equal(sample_pg1(c, make_rng(9, 2)), sample_pg1(c, make_rng(9, 2)))


def test_round_cap_never_hit():
    worst = 0
    for k, c in enumerate((0.0, 0.5, 2.0, 10.0, 50.0)):
        _, w = sample_pg1_rounds(np.full(2_000_000, c), make_rng(123, k))
        worst = max(worst, w)
    assert worst < MAX_ROUNDS
    assert worst <= 10  # acceptance probability exceeds 0.99 per proposal
