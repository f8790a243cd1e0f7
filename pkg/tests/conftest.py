"""Shared fixtures: the desk-scale parameter points and cached tables."""

import mpmath as mp
import pytest

from dlaguerre import PrecisionCtx, WeightParams, table_for


@pytest.fixture(scope="session")
def prec():
    return PrecisionCtx()


@pytest.fixture(scope="session")
def params_main():
    """The main acceptance point: alpha=2, mu=2, zeta=0.5, t=0.3."""
    return WeightParams(2, 2, "0.5", "0.3")


@pytest.fixture(scope="session")
def params_origin():
    """Classical limit t = 0 at the same (alpha, mu, zeta)."""
    return WeightParams(2, 2, "0.5", 0)


@pytest.fixture(scope="session")
def tables_main(params_main, prec):
    """(moments, recurrence table) at the main point, n_max = 6."""
    return table_for(params_main, 6, prec)


@pytest.fixture(scope="session")
def tables_origin(params_origin, prec):
    return table_for(params_origin, 6, prec)


def rel_err(got, want):
    with mp.extraprec(20):
        got = mp.mpf(got) if not isinstance(got, (mp.mpf, mp.mpc)) else got
        want = mp.mpf(want) if not isinstance(want, (mp.mpf, mp.mpc)) else want
        scale = max(abs(want), mp.mpf(1e-30))
        return float(abs(got - want) / scale)


@pytest.fixture(scope="session")
def relerr():
    return rel_err
