"""Brute-force oracles: tensor integrals, Gram-Schmidt, finite differences."""

import mpmath as mp
import pytest

from dlaguerre import (PrecisionCtx, UnsupportedParameters, WeightParams,
                       dN_by_quadrature, delta_by_quadrature,
                       finite_difference, hankel_determinant, dN_kernel)
from dlaguerre.oracle import default_spec, gram_schmidt_recurrence, inner_product
from dlaguerre.quadrature import weight_value
from conftest import rel_err


class TestQuadratureSpec:
    def test_splits_increase(self, params_main, prec):
        spec = default_spec(params_main, prec)
        pts = list(spec.splits)
        assert all(b > a for a, b in zip(pts[:-1], pts[1:]))

    def test_bad_splits_rejected(self, prec):
        from dlaguerre.oracle import QuadratureSpec
        with pytest.raises(ValueError):
            QuadratureSpec((0, 1, 1), 40, prec)


class TestDeltaByQuadrature:
    def test_n1_is_mu0_origin(self, params_origin, prec):
        res = delta_by_quadrature(params_origin, 1, prec)
        assert rel_err(res.value, 12) < 1e-25

    def test_n2_origin_trivial(self, params_origin, prec):
        res = delta_by_quadrature(params_origin, 2, prec)
        assert rel_err(res.value, 720) < 1e-20

    def test_n2_matches_determinant(self, params_main, tables_main, prec):
        mom, _ = tables_main
        res = delta_by_quadrature(params_main, 2, prec)
        det = hankel_determinant(mom, 2, prec)
        assert rel_err(res.value, det) < 1e-12

    def test_n3_float_oracle(self, params_main, tables_main, prec):
        mom, _ = tables_main
        res = delta_by_quadrature(params_main, 3, prec)
        det = hankel_determinant(mom, 3, prec)
        assert rel_err(res.value, det) < 1e-10
        assert float(res.error) > 0

    def test_n4_unsupported(self, params_main, prec):
        with pytest.raises(UnsupportedParameters):
            delta_by_quadrature(params_main, 4, prec)

    def test_node_doubling_shrinks_estimate(self, params_main, prec):
        """Error estimates decrease monotonically beyond the asymptotic regime."""
        ests = [float(delta_by_quadrature(params_main, 1, prec, nodes=m).error)
                for m in (10, 20, 40)]
        assert ests[0] > ests[1] > ests[2]


class TestDNByQuadrature:
    def test_n1_explicit_expansion(self, params_main, tables_main, prec):
        mom, _ = tables_main
        res = dN_by_quadrature(params_main, 1, 5, 7, prec)
        with mp.workprec(256):
            want = 35 * mom[0] - 12 * mom[1] + mom[2]
        assert rel_err(res.value, want) < 1e-15

    def test_symmetry(self, params_main, prec):
        a = dN_by_quadrature(params_main, 2, 5, 7, prec, nodes=40)
        b = dN_by_quadrature(params_main, 2, 7, 5, prec, nodes=40)
        assert rel_err(a.value, b.value) < 1e-20

    def test_n2_matches_kernel(self, params_main, tables_main, prec):
        _, tab = tables_main
        res = dN_by_quadrature(params_main, 2, 5, 7, prec)
        want = dN_kernel(tab, 2, 5, 7)
        assert rel_err(res.value, want) < 1e-10

    def test_confluent_matches_kernel(self, params_main, tables_main, prec):
        _, tab = tables_main
        s = mp.mpf(4)
        res = dN_by_quadrature(params_main, 2, s, s, prec)
        want = dN_kernel(tab, 2, s, s)
        assert rel_err(res.value, want) < 1e-10


class TestInnerProduct:
    def test_normalization(self, tables_main, prec):
        mom, tab = tables_main
        v = inner_product((0, 0), tab, mom, PrecisionCtx(192, "1e-25"))
        assert rel_err(v, 1) < 1e-22

    def test_off_diagonal(self, tables_main):
        mom, tab = tables_main
        v = inner_product((1, 3), tab, mom, PrecisionCtx(192, "1e-25"))
        assert abs(v) < 1e-18

    def test_recurrence_projection(self, tables_main, params_main):
        """<x p_2, p_3> = a_3 by direct quadrature."""
        from dlaguerre.quadrature import integrate_weighted, weight_nucleus
        from dlaguerre.hankel import orthopoly_eval
        mom, tab = tables_main
        qp = PrecisionCtx(192, "1e-25")
        from dlaguerre.precision import workprec
        with workprec(qp, 20):
            def fn(s):
                p3 = orthopoly_eval(tab, 3, s)
                return s * p3.value_nm1 * p3.value_n * weight_nucleus(
                    s, params_main)

            got = integrate_weighted(fn, params_main, qp, extra_degree=6,
                                     rel_scale=1).value
            assert rel_err(got, tab.a(3)) < 1e-15


class TestFiniteDifference:
    def test_polynomial_derivative(self):
        with mp.workprec(128):
            fd = finite_difference(lambda t: t * t, 3, mp.mpf(2) ** -20)
            assert rel_err(fd.value, 6) < 1e-25
            assert float(fd.error) < 1e-20

    def test_second_derivative(self):
        with mp.workprec(192):
            fd = finite_difference(mp.exp, 1, mp.mpf(2) ** -22, order=2)
            assert rel_err(fd.value, mp.exp(1)) < 1e-22

    def test_plateau_under_h_sweep(self, params_main, prec):
        """Delta_2(t) derivative stabilizes across a dyadic h sweep."""
        from dlaguerre import build_moment_table

        def delta2(t):
            pars = params_main.replace_t(t)
            mom = build_moment_table(pars, 2, prec, cross_check=False)
            return hankel_determinant(mom, 2, prec)

        with mp.workprec(256):
            vals = [finite_difference(delta2, mp.mpf("0.3"), mp.mpf(2) ** -e).value
                    for e in (30, 36, 42)]
            assert rel_err(vals[0], vals[1]) < 1e-20
            assert rel_err(vals[1], vals[2]) < 1e-20

    def test_bad_order(self):
        with pytest.raises(UnsupportedParameters):
            finite_difference(lambda t: t, 1, "1e-6", order=3)


class TestGramSchmidt:
    def test_quadrature_moment_route(self, params_main, tables_main):
        """GS on quadrature moments reproduces the determinant recurrence."""
        _, tab = tables_main
        gs = gram_schmidt_recurrence(params_main, 4, PrecisionCtx(256, "1e-45"))
        with mp.workprec(256):
            for n in range(1, 5):
                assert rel_err(gs["a"][n], tab.a(n)) < 1e-18
                assert rel_err(gs["b"][n - 1], tab.b[n - 1]) < 1e-18
