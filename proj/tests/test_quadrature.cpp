#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gevrey/quadrature.hpp"
#include "gevrey/series.hpp"
#include "test_util.hpp"

using namespace gevrey;
using testutil::contains_decimal;
using testutil::rad_leq_2exp;

namespace {

IntegrandFn exp_decay(const Rational& lambda) {
    return [lambda](const ComplexBall& t, mpfr_prec_t p) {
        ComplexBall lt = cmul(ComplexBall::from_rational(lambda, p), t, p);
        return cexp(cneg(lt), p);
    };
}

Real tol2(long e) { return Real::pow2(1, e, kRadPrec); }

}  // namespace

TEST_CASE("Clenshaw-Curtis rule basics", "[quadrature]") {
    const auto& r2 = quad_detail::cc_rule(2, 96);
    REQUIRE(r2.weights[0].contains(Rational(1, 3)));
    REQUIRE(r2.weights[1].contains(Rational(4, 3)));
    REQUIRE(r2.weights[2].contains(Rational(1, 3)));

    const auto& r32 = quad_detail::cc_rule(32, 96);
    Ball sum = Ball::zero(96);
    for (const Ball& w : r32.weights) sum = badd(sum, w, 96);
    REQUIRE(sum.contains(Rational(2)));
    REQUIRE(rad_leq_2exp(sum, -80));
}

TEST_CASE("finite quadrature: arctangent integral", "[quadrature]") {
    // int_0^1 dx/(1+x^2) = pi/4
    IntegrandFn f = [](const ComplexBall& x, mpfr_prec_t p) {
        ComplexBall den = cadd(ComplexBall::from_long(1, p), cmul(x, x, p), p);
        return cdiv(ComplexBall::from_long(1, p), den, p);
    };
    ComplexBall v = quad_finite(f, Real::from_long(0, 64), Real::from_long(1, 64),
                                tol2(-140), 192);
    Ball quarter_pi = bmul_2exp(bconst_pi(192), -2);
    REQUIRE(v.re().intersects(quarter_pi));
    REQUIRE(rad_leq_2exp(v.re(), -130));
    REQUIRE(v.im().contains_zero());
}

TEST_CASE("semi-infinite quadrature: pure exponential", "[quadrature]") {
    TailMajorant maj{Ball::from_long(1, 64), 0, Ball::from_long(1, 64), 0.0};
    ComplexBall v = quad_semiinfinite(exp_decay(Rational(1)), maj, tol2(-120), 192);
    REQUIRE(v.re().contains(Rational(1)));
    REQUIRE(rad_leq_2exp(v.re(), -120));
}

TEST_CASE("semi-infinite quadrature: two routes to the same constant", "[quadrature]") {
    // Route A: int_0^inf e^{-t}/(1+t^2) dt.
    IntegrandFn fa = [](const ComplexBall& t, mpfr_prec_t p) {
        ComplexBall den = cadd(ComplexBall::from_long(1, p), cmul(t, t, p), p);
        return cdiv(cexp(cneg(t), p), den, p);
    };
    TailMajorant maj{Ball::from_long(1, 64), 0, Ball::from_long(1, 64), 0.0};
    ComplexBall va = quad_semiinfinite(fa, maj, tol2(-130), 224);

    // Route B (Laplace dual): int_0^inf sin(x)/(1+x) dx, truncated at R = 40
    // with an integration-by-parts tail.
    IntegrandFn fb = [](const ComplexBall& x, mpfr_prec_t p) {
        ComplexBall den = cadd(ComplexBall::from_long(1, p), x, p);
        return cdiv(csin(x, p), den, p);
    };
    Rational R(40);
    ComplexBall head = quad_finite(fb, Real::from_long(0, 64), Real::from_long(40, 64),
                                   tol2(-120), 224);
    RationalFun g{Poly{{Rational(1)}}, Poly{{Rational(1), Rational(1)}}};  // 1/(1+x)
    Ball tail = oscillatory_tail(g, R, Trig::sin, 30, 224);
    ComplexBall vb = cadd(head, ComplexBall(tail, Ball::zero(224)), 224);

    REQUIRE(va.re().intersects(vb.re()));
    // Frozen digits verified by the independent route agreement above.
    REQUIRE(contains_decimal(va, "0.621449624235813357639265728215", 28));
    REQUIRE(contains_decimal(vb, "0.621449624235813357639265728215", 25));
}

TEST_CASE("semi-infinite quadrature: Bessel kernel against closed form", "[quadrature]") {
    // int_0^inf I0(t) e^{-3t} dt = 1/sqrt(p^2-1) at p=3, i.e. 1/sqrt(8).
    EFunctionSpec i0 = EFunctionSpec::bessel_i0();
    IntegrandFn f = [i0](const ComplexBall& t, mpfr_prec_t p) {
        PrecisionContext c(std::max<mpfr_prec_t>(p, 64));
        ComplexBall bessel = eval_E(i0, t, c);
        ComplexBall m3t = cmul(ComplexBall::from_long(-3, p), t, p);
        return cmul(bessel, cexp(m3t, p), p);
    };
    // |I0(t) e^{-3t}| <= e^{-2t}
    TailMajorant maj{Ball::from_long(1, 64), 0, Ball::from_long(2, 64), 0.0};
    ComplexBall v = quad_semiinfinite(f, maj, tol2(-110), 192);
    Ball closed = bdiv(Ball::from_long(1, 192), bsqrt(Ball::from_long(8, 192), 192), 192);
    REQUIRE(v.re().intersects(closed));
    REQUIRE(contains_decimal(v, "0.35355339", 8));
}

TEST_CASE("quadrature soundness on random polynomial-exponential kernels", "[quadrature]") {
    // int_0^inf P(t) e^{-lambda t} dt = sum_j p_j j! / lambda^{j+1}, exact.
    std::mt19937_64 rng(0x5eed0004);
    for (int iter = 0; iter < 1000; ++iter) {
        std::uniform_int_distribution<long> num(-8, 8), den(1, 6), lam_num(1, 8),
            lam_den(1, 2);
        std::vector<Rational> p_coef;
        unsigned long deg = rng() % 4;
        for (unsigned long j = 0; j <= deg; ++j)
            p_coef.emplace_back(num(rng), den(rng));
        Rational lambda(lam_num(rng), lam_den(rng));

        Rational closed(0);
        Rational abs_sum(0);
        for (unsigned long j = 0; j <= deg; ++j) {
            closed += p_coef[j] * factorial(j) / lambda.pow(static_cast<long>(j) + 1);
            abs_sum += p_coef[j].abs();
        }
        IntegrandFn f = [p_coef, lambda](const ComplexBall& t, mpfr_prec_t p) {
            ComplexBall acc = ComplexBall::zero(p);
            for (size_t j = p_coef.size(); j-- > 0;) {
                acc = cmul(acc, t, p);
                acc = cadd(acc, ComplexBall::from_rational(p_coef[j], p), p);
            }
            ComplexBall lt = cmul(ComplexBall::from_rational(lambda, p), t, p);
            return cmul(acc, cexp(cneg(lt), p), p);
        };
        TailMajorant maj{Ball::from_rational(abs_sum, 64), deg,
                         Ball::from_rational(lambda, 64), 0.0};
        ComplexBall v = quad_semiinfinite(f, maj, tol2(-34), 72);
        INFO("iter=" << iter << " lambda=" << lambda.str());
        REQUIRE(v.re().contains(closed));
    }
}

TEST_CASE("oscillatory tail matches a deep direct evaluation", "[quadrature]") {
    // int_R^inf cos(x)/(1+x^2) dx computed two ways: parts tail at R=40 vs
    // direct panels on [40, 1500] plus a coarse parts tail far out.
    RationalFun g{Poly{{Rational(1)}}, Poly{{Rational(1), Rational(0), Rational(1)}}};
    Ball tail40 = oscillatory_tail(g, Rational(40), Trig::cos, 38, 160);

    IntegrandFn f = [](const ComplexBall& x, mpfr_prec_t p) {
        ComplexBall den = cadd(ComplexBall::from_long(1, p), cmul(x, x, p), p);
        return cdiv(ccos(x, p), den, p);
    };
    ComplexBall mid = quad_finite(f, Real::from_long(40, 64), Real::from_long(1500, 64),
                                  tol2(-48), 96);
    Ball far = oscillatory_tail(g, Rational(1500), Trig::cos, 4, 96);
    Ball direct = badd(mid.re(), far, 96);
    REQUIRE(tail40.intersects(direct));
    REQUIRE(rad_leq_2exp(tail40, -45));
}
