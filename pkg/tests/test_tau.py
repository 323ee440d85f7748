"""Tau machinery: shifts, Baker assembly, the shift theorem, the limit."""

from fractions import Fraction as F

import pytest

from qakns.matseries import MatSeries
from qakns.series import XSeries
from qakns.tau import (
    TauCheckError,
    TauSpec,
    TimeContext,
    baker_from_tau,
    classical_limit_check,
    classical_precheck,
    miwa_shift,
    q_bilinear_on_tau,
    q_shift_coeff,
    q_shift_times,
    substitution_commutes,
    taylor_agreement,
    vacuum_spec,
    verify_expqo,
    verify_tau_theorem,
)
from qakns.bilinear import lambda_pool

N = 8
QS = [F(2), F(1, 2), F(3, 5)]


def ctx2(tmax=6):
    return TimeContext(tuple((k, a) for k in (1, 2) for a in range(2)), tmax, N)


def test_shift_coefficients():
    for q in QS:
        assert q_shift_coeff(1, q) == 1
    assert q_shift_coeff(2, F(2)) == F(-1, 6)


def test_q_shift_times_examples():
    ctx = ctx2()
    t11 = ctx.variable((1, 0))
    shifted = q_shift_times(t11, [1, -1], F(2))
    expect = t11 + ctx.constant(XSeries.monomial(1, 1, N))
    assert (shifted - expect).is_zero()
    t21 = ctx.variable((2, 0))
    shifted2 = q_shift_times(t21, [1, -1], F(2))
    expect2 = t21 + ctx.constant(XSeries.monomial(F(-1, 6), 2, N))
    assert (shifted2 - expect2).is_zero()
    one = ctx.constant(1)
    assert (q_shift_times(one, [1, -1], F(2)) - one).is_zero()


def test_miwa_examples():
    ctx = ctx2()
    one = ctx.constant(1)
    out, zv = miwa_shift(one, 0, 4)
    assert set(out) == {0} and (out[0] - one).is_zero()
    t = ctx.variable((1, 1))
    out, _ = miwa_shift(t, 1, 4)
    assert (out[0] - t).is_zero()
    assert (out[-1] + one).is_zero()
    sq = t * t
    out, _ = miwa_shift(sq, 1, 4)
    assert (out[0] - sq).is_zero()
    assert (out[-1] + t.scale(2)).is_zero()
    assert (out[-2] - one).is_zero()
    # unaffected channel
    out0, _ = miwa_shift(t, 0, 4)
    assert set(out0) == {0}


def test_baker_from_tau_examples():
    ctx = ctx2()
    vac = baker_from_tau(ctx.constant(1), {}, 2, 4)
    ident = MatSeries.identity(2, vac.proto)
    assert (vac.coeff(0) - ident).is_zero()
    for d in vac.terms:
        if d != 0:
            assert vac.terms[d].is_zero()
    # diagonal entry for tau = 1 + t11: (1 + t - z^-1)/(1 + t)
    tau = ctx.constant(1) + ctx.variable((1, 0))
    w = baker_from_tau(tau, {}, 2, 4)
    inv = tau.invert()
    entry = w.coeff(-1)[0, 0]
    assert (entry + inv).is_zero()
    assert (w.coeff(0) - ident).is_zero()
    # off-diagonal companions enter with the z^-1 prefactor
    comp = {(0, 1): ctx.variable((1, 1))}
    w2 = baker_from_tau(tau, comp, 2, 4)
    assert (w2.coeff(-1)[0, 1] - (ctx.variable((1, 1)) * inv)).is_zero()
    top = max(d for d in w2.terms if not w2.terms[d].is_zero())
    assert top == 0


def test_baker_rejects_zero_constant():
    ctx = ctx2()
    with pytest.raises(ZeroDivisionError):
        baker_from_tau(ctx.variable((1, 0)), {}, 2, 4)


@pytest.mark.parametrize("q", QS)
def test_expqo_exact(q):
    results = verify_expqo([1, -1], q, ctx2(), 4)
    assert all(ok for _, ok, _ in results)


def test_expqo_z1_exponent():
    # at order z the shifted generator is t_(1 a) + a x
    ctx = ctx2()
    from qakns.tau import _zexp_poly
    t = ctx.variable((1, 0))
    shift = ctx.constant(XSeries.monomial(1, 1, N))
    gens = {1: t + shift, 2: ctx.variable((2, 0))}
    rhs = _zexp_poly(gens, 2)
    assert (rhs[1] - (t + shift)).is_zero()


@pytest.mark.parametrize("q", QS)
def test_vacuum_passes_everything(q):
    ctx = ctx2()
    vac = vacuum_spec(ctx, 2)
    lams = lambda_pool([(1, 0), (1, 1)], 2)
    out = verify_tau_theorem(vac, [1, -1], q, 3, lams, 6, ctx, 4)
    assert out["substitution_commutes"]
    assert all(ok for _, ok, _ in out["expqo"])
    assert all(r[3] for r in out["q_bilinear"])
    assert all(r["two_term_ok"] and r["taylor_ok"] for r in out["taylor"])


def test_classical_precheck_rejects_non_solution():
    ctx = ctx2()
    bad = TauSpec(ctx.constant(1) + ctx.variable((1, 0)), {}, 2)
    records = classical_precheck(bad, [1, -1], 2, [((1, 0),)], 5)
    assert any(not r[2] for r in records)
    with pytest.raises(TauCheckError):
        verify_tau_theorem(bad, [1, -1], F(2), 2, [(), ((1, 0),)], 5, ctx, 3)


def test_substitutions_commute_generally():
    ctx = ctx2()
    t = ctx.variable((1, 0))
    s = ctx.variable((2, 1))
    spec = TauSpec(ctx.constant(1) + t * s + s, {}, 2)
    assert substitution_commutes(spec, [1, -1], F(2), 5)


def test_mechanism_agreement_on_non_solution():
    # the two-term and Taylor reductions are identities of the machinery:
    # they hold even for data that fails the bilinear residues
    ctx = TimeContext(tuple((k, a) for k in (1, 2) for a in range(2)), 4, 6)
    bad = TauSpec(ctx.constant(1) + ctx.variable((1, 0)), {}, 2)
    recs = taylor_agreement(bad, [1, -1], F(2), 1, [(), ((1, 0),)], 5)
    assert recs and all(r["two_term_ok"] and r["taylor_ok"] for r in recs)
    qrecs = q_bilinear_on_tau(bad, [1, -1], F(2), 2, [()], 5)
    assert any(not r[3] for r in qrecs)  # while the residues do fail


def test_classical_limit_cases():
    qs = [F(1) + F(1, 2**m) for m in (3, 4, 5, 6)]
    ctx = TimeContext(((1, 0), (2, 0)), 6, N)
    t1, t2 = ctx.variable((1, 0)), ctx.variable((2, 0))
    norms, _ = classical_limit_check(t1, [1], qs)
    assert all(v == 0 for v in norms)
    _, ratios = classical_limit_check(t1 * t1, [1], qs)
    assert all(r == F(1, 2) for r in ratios)
    _, ratios2 = classical_limit_check(t2, [1], qs)
    assert all(r == F(1, 2) for r in ratios2)
    _, ratios3 = classical_limit_check(t1 * t1 * t2 + ctx.constant(1), [1], qs)
    lo, hi = F(45, 100), F(55, 100)
    assert all(lo <= r <= hi for r in ratios3)


def test_classical_limit_vacuum_zero():
    qs = [F(9, 8), F(17, 16)]
    ctx = TimeContext(((1, 0),), 4, N)
    norms, _ = classical_limit_check(ctx.constant(1), [1], qs)
    assert all(v == 0 for v in norms)
