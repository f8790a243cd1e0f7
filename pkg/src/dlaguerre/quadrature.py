"""Split quadrature for integrals against the jump-deformed weight.

The weight w(x) = (1 - zeta*H(x-t)) (x-t)^alpha x^mu e^{-x} on [0, inf) is
smooth on (0, t) and (t, inf) separately but jumps at x = t when zeta != 0
and alpha = 0, and has a mild endpoint singularity at 0 for non-integer mu.
Every integral here is therefore split exactly at x = t, the tail is cut at

    T = t + 50 + 20*(alpha + mu + deg)

and the remainder is bounded rigorously by the incomplete-gamma estimate
int_T^inf x^s e^{-x} dx <= 2 T^s e^{-T}  (valid for T >= 2s), which the
cutoff above always satisfies at desk scale.  tanh-sinh quadrature handles
the endpoint behaviour; its internal level doubling provides the
step-doubling error estimate the results carry.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import QuadratureFailure
from .precision import PrecisionCtx, to_mpf, workprec


@dataclass(frozen=True)
class QuadResult:
    """Value plus the error estimate that every quadrature result carries."""

    value: object
    error: object

    def __iter__(self):
        yield self.value
        yield self.error


def tail_cutoff(params, extra_degree=0):
    """Truncation point for the e^{-x}-damped tail at polynomial degree extra_degree."""
    with mp.extraprec(10):
        deg = to_mpf(params.alpha) + to_mpf(params.mu) + extra_degree
        return to_mpf(params.t) + 50 + 20 * deg


def tail_bound(params, extra_degree=0):
    """Bound on |int_T^inf (x-t)^alpha x^(mu+deg) e^-x dx| past the cutoff."""
    with mp.extraprec(30):
        T = tail_cutoff(params, extra_degree)
        s = to_mpf(params.alpha) + to_mpf(params.mu) + extra_degree
        return 2 * mp.power(T, s) * mp.exp(-T) * (1 + abs(to_mpf(params.zeta)))


def _segments(params, extend_to):
    t = to_mpf(params.t)
    pts = [mp.mpf(0)]
    if t > 0:
        pts.append(t)
    # a few interior splits keep tanh-sinh levels low on the long tail
    for cut in (5, 20, 60):
        c = t + cut
        if c < extend_to:
            pts.append(c)
    pts.append(extend_to)
    return pts


def integrate_weighted(fn, params, prec: PrecisionCtx, extra_degree=0,
                       rel_scale=None, head_factor=1, tail_factor=None,
                       extra_digits=0, tail_weight=1):
    """Integrate fn(x)*|nucleus|(x) dx over [0, inf) split at x = t.

    fn receives x and must already include the weight nucleus
    (x-t)^alpha x^mu e^{-x}; the jump factor is applied here through
    head_factor on [0, t] and tail_factor on [t, inf) (default 1 - zeta).
    extra_degree bounds the polynomial growth of fn beyond the nucleus and
    sizes the tail cutoff.  rel_scale, when given, is the magnitude against
    which the relative tolerance is judged (else the result itself).
    extra_digits widens the working precision when the caller expects
    cancellation between segments (Cauchy transforms far from the support);
    tail_weight bounds any extra decay of fn beyond the nucleus past the
    cutoff (e.g. 1/|x - T| for Cauchy kernels).

    Returns QuadResult; raises QuadratureFailure when the combined estimate
    (quadrature + tail bound) exceeds prec.tol relative to the scale.
    """
    if tail_factor is None:
        tail_factor = 1 - to_mpf(params.zeta)
    tol = prec.tol_mpf()
    # precision needed is set by tol, not by the full context width
    digits = int(-mp.log10(tol)) + 15 + max(0, int(extra_digits))
    with mp.workdps(max(digits, 30)):
        T = tail_cutoff(params, extra_degree)
        pts = _segments(params, T)
        t = to_mpf(params.t)
        total = mp.mpf(0)
        err = mp.mpf(0)
        for a, b in zip(pts[:-1], pts[1:]):
            fac = head_factor if b <= t else tail_factor
            if fac == 0:
                continue
            val, e = mp.quad(fn, [a, b], error=True)
            total += fac * val
            err += abs(to_mpf(fac)) * to_mpf(e)
        err += (tail_bound(params, extra_degree) * abs(to_mpf(tail_factor))
                * abs(to_mpf(tail_weight)))
        scale = abs(total) if rel_scale is None else abs(to_mpf(rel_scale))
        if scale > 0 and err > tol * scale * 100:
            raise QuadratureFailure(
                f"estimated error {mp.nstr(err, 5)} exceeds tolerance at scale "
                f"{mp.nstr(scale, 5)}")
    with workprec(prec):
        return QuadResult(+total, +err)


def weight_nucleus(x, params):
    """(x-t)^alpha * x^mu * e^{-x}; alpha is an integer, mu may be real."""
    a = int(params.alpha)
    mu = to_mpf(params.mu)
    xm = x ** mu if mu else mp.mpf(1)
    return (x - to_mpf(params.t)) ** a * xm * mp.exp(-x)


def weight_value(x, params):
    """Full weight including the jump factor (1 - zeta) past x = t."""
    x = to_mpf(x)
    w = weight_nucleus(x, params)
    if x > to_mpf(params.t):
        w = (1 - to_mpf(params.zeta)) * w
    return w
