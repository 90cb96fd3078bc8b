import math

import pytest

from mixtail.asymptotics import av_dependent_optimal, covariance_r
from mixtail.errors import DomainError
from mixtail.kernels import Kernel, av_iid

THETA_GRID = tuple(t / 10.0 for t in range(1, 10))
GAMMA_GRID = (0.5, 1.0, 2.0)
RHO_GRID = (-2.0, -1.0, -0.5)


def test_covariance_iid_is_min():
    assert covariance_r("iid", 1.0, 0.3, 0.8) == 0.3
    assert covariance_r("iid", 2.0, 1.0, 1.0) == 1.0


def test_covariance_closed_sums_at_unit_arguments():
    # ar1: 1 + 2 w/(1-w) with w = 0.3; ma1: 1 + 2 w/(1+w)
    got_ar = covariance_r("ar1", 1.0, 1.0, 1.0, theta=0.3)
    got_ma = covariance_r("ma1", 1.0, 1.0, 1.0, theta=0.3)
    assert abs(got_ar - 13.0 / 7.0) < 1e-12
    assert abs(got_ma - 19.0 / 13.0) < 1e-12


def test_covariance_ar1_offdiagonal_closed_sum():
    # x=1, y=2, w=0.3: base 1, first reflection 0.9, geometric tail from
    # the second lag onward 3 w^2/(1-w); total 160/70
    got = covariance_r("ar1", 1.0, 1.0, 2.0, theta=0.3)
    assert abs(got - 16.0 / 7.0) < 1e-12


def test_covariance_ma1_offdiagonal():
    got = covariance_r("ma1", 1.0, 1.0, 2.0, theta=0.3)
    expected = 1.0 + (min(1.0, 2.0 * 0.3) + min(2.0, 0.3)) / 1.3
    assert abs(got - expected) < 1e-14


def test_covariance_is_symmetric():
    for model, theta in (("iid", None), ("ar1", 0.4), ("ma1", 0.7)):
        a = covariance_r(model, 0.8, 0.2, 1.7, theta=theta)
        b = covariance_r(model, 0.8, 1.7, 0.2, theta=theta)
        assert a == pytest.approx(b, rel=1e-14)


def test_covariance_dependence_orders_models():
    # the ar1 series contains the ma1 reflection terms plus more
    for theta in THETA_GRID:
        iid = covariance_r("iid", 1.0, 1.0, 1.0)
        ma = covariance_r("ma1", 1.0, 1.0, 1.0, theta=theta)
        ar = covariance_r("ar1", 1.0, 1.0, 1.0, theta=theta)
        assert iid < ma < ar


def test_covariance_validation():
    with pytest.raises(DomainError):
        covariance_r("arma", 1.0, 1.0, 1.0, theta=0.3)
    with pytest.raises(DomainError):
        covariance_r("ar1", 1.0, 1.0, 1.0)  # theta missing
    with pytest.raises(DomainError):
        covariance_r("ar1", 1.0, 1.0, 1.0, theta=1.0)
    with pytest.raises(DomainError):
        covariance_r("ma1", 0.0, 1.0, 1.0, theta=0.3)  # gamma must be > 0
    with pytest.raises(DomainError):
        covariance_r("iid", 1.0, -0.1, 1.0)


def test_av_dependent_ar1_frozen_pair():
    got = av_dependent_optimal("ar1", 0.3, 1.0, -1.0)
    assert got.av_optimal == pytest.approx(52.0 / 7.0, rel=1e-13)
    # competitor variance assembled by hand: core 5 * 13/7 plus the
    # dependence term -4 w log w / (1-w)^2 at w = 0.3
    expected = 65.0 / 7.0 - 4.0 * (0.3 * math.log(0.3)) / 0.49
    assert got.sigma2_competitor == pytest.approx(expected, rel=1e-13)


def test_av_dependent_iid_matches_quadrature_route():
    for gamma in GAMMA_GRID:
        for rho in RHO_GRID:
            closed = av_dependent_optimal("iid", None, gamma, rho).av_optimal
            integral = av_iid(Kernel.optimal_mixture(rho), gamma)
            assert closed == pytest.approx(integral, rel=1e-6)


def test_av_never_exceeds_competitor_on_grid():
    for model in ("ar1", "ma1"):
        for theta in THETA_GRID:
            for gamma in GAMMA_GRID:
                for rho in RHO_GRID:
                    av, sigma2 = av_dependent_optimal(model, theta, gamma,
                                                      rho)
                    assert av <= sigma2 + 1e-12
    for gamma in GAMMA_GRID:
        for rho in RHO_GRID:
            av, sigma2 = av_dependent_optimal("iid", None, gamma, rho)
            assert av <= sigma2 + 1e-12


def test_av_degenerate_gamma():
    assert av_dependent_optimal("ar1", 0.5, 0.0, -1.0) == (0.0, 0.0)


def test_av_validation():
    with pytest.raises(DomainError):
        av_dependent_optimal("ar1", 0.3, 1.0, 0.0)
    with pytest.raises(DomainError):
        av_dependent_optimal("ar1", 0.3, -1.0, -1.0)
    with pytest.raises(DomainError):
        av_dependent_optimal("garch", 0.3, 1.0, -1.0)
