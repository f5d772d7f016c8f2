#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <random>
#include <vector>

#include "gevrey/series.hpp"
#include "test_util.hpp"

using namespace gevrey;
using testutil::contains_decimal;
using testutil::intersects_bracket;
using testutil::rad_leq_2exp;

namespace {

// Independent oracle for [x^n] log(1+x)^k: sum over ordered compositions
// (m_1,...,m_k), m_i >= 1, sum m_i = n, of prod (-1)^{m_i+1}/m_i.
Rational logpow_coeff_bruteforce(long k, unsigned long n) {
    if (k == 0) return Rational(n == 0 ? 1 : 0);
    std::function<Rational(long, unsigned long)> rec = [&](long slots,
                                                           unsigned long left) -> Rational {
        if (slots == 1) {
            if (left < 1) return Rational(0);
            return Rational((left % 2 == 1) ? 1 : -1, static_cast<long>(left));
        }
        Rational total(0);
        for (unsigned long m = 1; m + (slots - 1) <= left; ++m) {
            Rational factor((m % 2 == 1) ? 1 : -1, static_cast<long>(m));
            total += factor * rec(slots - 1, left - m);
        }
        return total;
    };
    return rec(k, n);
}

Rational powerlog_bruteforce(const Rational& a, long k, unsigned long n) {
    Rational sum(0);
    for (unsigned long j = 0; j <= n; ++j)
        sum += binomial(a - Rational(1), n - j) * logpow_coeff_bruteforce(k, j);
    return sum;
}

ComplexBall creal(const Rational& q, mpfr_prec_t prec) {
    return ComplexBall::from_rational(q, prec);
}

// Alternating-series bracket for E_{a,s}(-1): consecutive partial sums
// bracket the limit once terms decrease in magnitude.
std::pair<Rational, Rational> eas_at_minus1_bracket(const Rational& a, long s, int terms) {
    Rational lo(0), hi(0), sum(0);
    for (int n = 0; n <= terms; ++n) {
        Rational t = coeff_Eas(a, s, n);
        sum += (n % 2 == 0) ? t : -t;
        if (n >= terms - 1) {
            if (n % 2 == 0) hi = sum;
            else lo = sum;
        }
    }
    return {lo, hi};
}

}  // namespace

TEST_CASE("E_{a,s} coefficients are exact", "[series]") {
    REQUIRE(coeff_Eas(Rational(1), 1, 0) == Rational(1));
    REQUIRE(coeff_Eas(Rational(1), 2, 1) == Rational(1, 4));
    REQUIRE(coeff_Eas(Rational(1, 2), 1, 2) == Rational(1, 5));
    REQUIRE_THROWS_AS(coeff_Eas(Rational(-2), 1, 0), parameter_error);
}

TEST_CASE("power-log coefficients match spec examples", "[series]") {
    REQUIRE(coeff_powerlog(Rational(5, 7), 1, 0) == Rational(0));
    REQUIRE(coeff_powerlog(Rational(3), 2, 0) == Rational(0));
    REQUIRE(coeff_powerlog(Rational(2), 0, 1) == Rational(1));
    REQUIRE(coeff_powerlog(Rational(1), 1, 3) == Rational(1, 3));
}

TEST_CASE("power-log coefficients match brute-force expansion", "[series]") {
    std::vector<Rational> as = {Rational(1), Rational(2), Rational(1, 2), Rational(-1, 3),
                                Rational(5, 2)};
    for (const Rational& a : as)
        for (long k = 0; k <= 3; ++k)
            for (unsigned long n = 0; n <= 12; ++n)
                REQUIRE(coeff_powerlog(a, k, n) == powerlog_bruteforce(a, k, n));
}

TEST_CASE("binomial falling-factorial coefficients", "[series]") {
    REQUIRE(coeff_binomial(Rational(-1), 3) == Rational(-6));
    REQUIRE(coeff_binomial(Rational(17, 13), 0) == Rational(1));
    REQUIRE(coeff_binomial(Rational(1, 2), 2) == Rational(-1, 4));
}

TEST_CASE("E-function evaluation at 0 and closed forms", "[series]") {
    PrecisionContext ctx(128);
    EFunctionSpec e12 = EFunctionSpec::eas(Rational(1, 2), 2);
    ComplexBall v0 = eval_E(e12, ComplexBall::zero(128), ctx);
    REQUIRE(v0.re().contains(Rational(4)));

    // E_{1,1}(z) = (e^z - 1)/z, so E_{1,1}(-1) = 1 - 1/e.
    EFunctionSpec e11 = EFunctionSpec::eas(Rational(1), 1);
    ComplexBall v = eval_E(e11, creal(Rational(-1), 128), ctx);
    Ball closed = bsub(Ball::from_long(1, 128), bexp(Ball::from_long(-1, 128), 128), 128);
    REQUIRE(v.re().intersects(closed));
    REQUIRE(contains_decimal(v, "0.63212056", 8));
}

TEST_CASE("E_{1,2}(-1) against alternating-series bracket", "[series]") {
    PrecisionContext ctx(128);
    EFunctionSpec spec = EFunctionSpec::eas(Rational(1), 2);
    ComplexBall v = eval_E(spec, creal(Rational(-1), 128), ctx);
    auto [lo, hi] = eas_at_minus1_bracket(Rational(1), 2, 25);
    REQUIRE(lo < hi);
    REQUIRE(intersects_bracket(v.re(), lo, hi));
    REQUIRE(contains_decimal(v, "0.7965995992970531", 15));
}

TEST_CASE("derivatives of E-functions", "[series]") {
    PrecisionContext ctx(128);
    ComplexBall d3 = deriv_E(EFunctionSpec::exponential(Rational(1)),
                             ComplexBall::zero(128), 3, ctx);
    REQUIRE(d3.re().contains(Rational(1)));
    REQUIRE(rad_leq_2exp(d3.re(), -100));

    ComplexBall d1 = deriv_E(EFunctionSpec::eas(Rational(1), 1),
                             ComplexBall::zero(128), 1, ctx);
    REQUIRE(d1.re().contains(Rational(1, 2)));

    // d/dz I0(z) at 1 equals I1(1); bracket from the positive series
    // I1(1) = sum (1/2)^{2n+1} / (n! (n+1)!) with a doubled-next-term tail.
    ComplexBall di0 = deriv_E(EFunctionSpec::bessel_i0(), creal(Rational(1), 128), 1, ctx);
    Rational partial(0);
    for (long n = 0; n <= 20; ++n)
        partial += Rational(1, 2).pow(2 * n + 1) / (factorial(n) * factorial(n + 1));
    Rational tail = Rational(1, 2).pow(43) / (factorial(21) * factorial(22)) * Rational(2);
    REQUIRE(intersects_bracket(di0.re(), partial, partial + tail));
    REQUIRE(contains_decimal(di0, "0.56515910", 8));
}

TEST_CASE("psi recurrence residual encloses zero", "[series]") {
    PrecisionContext ctx(192);
    ComplexBall r = psi_residual(Rational(1), 1, creal(Rational(1), 192), ctx);
    REQUIRE(r.contains_zero());
    REQUIRE(rad_leq_2exp(r.re(), -(192 - 40)));

    REQUIRE(psi_residual(Rational(1, 2), 2, creal(Rational(2), 192), ctx).contains_zero());
    REQUIRE(psi_residual(Rational(3), 1, creal(Rational(1, 2), 192), ctx).contains_zero());
    REQUIRE_THROWS_AS(psi_residual(Rational(1), 1, ComplexBall::zero(192), ctx),
                      domain_error);
}

TEST_CASE("psi recurrence residual over the parameter grid", "[series]") {
    PrecisionContext ctx(160);
    std::vector<Rational> as = {Rational(1, 3), Rational(1, 2), Rational(1), Rational(5, 2)};
    std::vector<Rational> zs = {Rational(1, 4), Rational(1), Rational(3), Rational(-2),
                                Rational(5, 2)};
    for (const Rational& a : as)
        for (long j = 1; j <= 4; ++j)
            for (const Rational& z : zs) {
                ComplexBall r = psi_residual(a, j, creal(z, 160), ctx);
                INFO("a=" << a.str() << " j=" << j << " z=" << z.str());
                REQUIRE(r.contains_zero());
            }
}

TEST_CASE("psi_1 closed form for a=1 at ten sample points", "[series]") {
    PrecisionContext ctx(160);
    EFunctionSpec e11 = EFunctionSpec::eas(Rational(1), 1);
    for (long j = 1; j <= 10; ++j) {
        Rational z(j, 2);
        ComplexBall zb = creal(z, 160);
        ComplexBall psi1 = cmul(cexp(zb, 160), eval_E(e11, cneg(zb), ctx), 160);
        ComplexBall closed =
            cdiv(csub(cexp(zb, 160), ComplexBall::from_long(1, 160), 160), zb, 160);
        REQUIRE(csub(psi1, closed, 160).contains_zero());
    }
}

TEST_CASE("Wronskian determinants", "[series]") {
    PrecisionContext ctx(128);
    DerivFn one = [](const ComplexBall&, unsigned long order, const PrecisionContext& c) {
        return order == 0 ? ComplexBall::from_long(1, c.work_bits)
                          : ComplexBall::zero(c.work_bits);
    };
    DerivFn expz = [](const ComplexBall& z, unsigned long, const PrecisionContext& c) {
        return cexp(z, c.work_bits);
    };
    ComplexBall z1 = ComplexBall::from_long(1, 128);

    ComplexBall det2 = wronskian_det({one, expz}, z1, ctx);
    Ball e = bexp(Ball::from_long(1, 128), 128);
    REQUIRE(det2.re().intersects(e));
    REQUIRE(contains_decimal(det2, "2.71828183", 8));

    ComplexBall det_repeat = wronskian_det({expz, expz}, z1, ctx);
    REQUIRE(det_repeat.contains_zero());

    // psi_1 for a = 1/2 via the Leibniz rule on e^z E(-z).
    EFunctionSpec spec = EFunctionSpec::eas(Rational(1, 2), 1);
    DerivFn psi1 = [spec](const ComplexBall& z, unsigned long order,
                          const PrecisionContext& c) {
        mpfr_prec_t p = c.work_bits;
        ComplexBall acc = ComplexBall::zero(p);
        for (unsigned long i = 0; i <= order; ++i) {
            Rational coef = binomial(Rational(static_cast<long>(order)), i) *
                            Rational(i % 2 == 0 ? 1 : -1);
            ComplexBall term = cmul(ComplexBall::from_rational(coef, p),
                                    deriv_E(spec, cneg(z), i, c), p);
            acc = cadd(acc, term, p);
        }
        return cmul(cexp(z, p), acc, p);
    };
    ComplexBall det3 = wronskian_det({one, expz, psi1}, z1, ctx);
    REQUIRE(!det3.re().contains_zero());
}

TEST_CASE("tail bound soundness on random truncations", "[series]") {
    std::mt19937_64 rng(0x5eed0003);
    std::vector<EFunctionSpec> specs = {EFunctionSpec::eas(Rational(1, 2), 1),
                                        EFunctionSpec::bessel_i0(),
                                        EFunctionSpec::exponential(Rational(3, 2))};
    int checked = 0;
    for (int iter = 0; iter < 120; ++iter) {
        const EFunctionSpec& spec = specs[iter % specs.size()];
        Rational zr = testutil::random_rational(rng, 4, 2);
        Rational zi = testutil::random_rational(rng, 2, 2);
        ComplexBall z(Ball::from_rational(zr, 256), Ball::from_rational(zi, 256));
        Real az = z.abs_ub();
        unsigned long N = 20 + rng() % 40;
        auto bound = detail::geometric_tail(spec.growth(), az, N);
        if (!bound) continue;
        // Exact tail enclosure at doubled precision: full sum minus partial sum.
        PrecisionContext deep(512);
        ComplexBall full = eval_E(spec, z, deep);
        ComplexBall partial = ComplexBall::zero(512);
        const auto& cb = spec.stream().coeff_balls(N, 512);
        for (unsigned long i = N; i-- > 0;) {
            partial = cmul(partial, z, 512);
            partial = cadd(partial, ComplexBall(cb[i], Ball::zero(512)), 512);
        }
        ComplexBall tail = csub(full, partial, 512);
        Real tail_ub(kRadPrec);
        {
            Real a = tail.re().abs_ub(), b = tail.im().abs_ub();
            mpfr_hypot(tail_ub.raw(), a.raw(), b.raw(), MPFR_RNDU);
        }
        INFO("N=" << N << " |z|=" << az.str(6));
        REQUIRE(mpfr_cmp(tail_ub.raw(), bound->raw()) <= 0);
        ++checked;
    }
    REQUIRE(checked > 60);
}
