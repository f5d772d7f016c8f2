#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "gevrey/ball.hpp"
#include "gevrey/rational.hpp"

namespace testutil {

using gevrey::Ball;
using gevrey::ComplexBall;
using gevrey::Rational;
using gevrey::Real;

inline Rational random_rational(std::mt19937_64& rng, long max_num = 1000,
                                long max_den = 1000) {
    std::uniform_int_distribution<long> num(-max_num, max_num);
    std::uniform_int_distribution<long> den(1, max_den);
    return Rational(num(rng), den(rng));
}

/// Parses a decimal literal into an exact rational (for frozen reference values).
inline Rational ref(const std::string& decimal) { return Rational::parse(decimal); }

/// Checks that the ball contains the point `v`.
inline bool contains(const Ball& b, const Rational& v) { return b.contains(v); }

/// Checks that a ball contains some point of the exact bracket [lo, hi];
/// since the ball must contain the true value and the bracket does too,
/// failure to intersect proves a bug.
inline bool intersects_bracket(const Ball& b, const Rational& lo, const Rational& hi) {
    Real bu = b.upper(), bl = b.lower();
    return mpfr_cmp_q(bu.raw(), lo.q().get_mpq_t()) >= 0 &&
           mpfr_cmp_q(bl.raw(), hi.q().get_mpq_t()) <= 0;
}

/// True when |mid| <= bound and rad <= bound for `bound` given as decimal string.
inline bool rad_leq(const Ball& b, const std::string& bound) {
    Rational q = Rational::parse(bound);
    Real t = q.to_real(64);
    return mpfr_cmp(b.rad().raw(), t.raw()) <= 0;
}
inline bool rad_leq_2exp(const Ball& b, long e) {
    Real t = Real::pow2(1, e, 32);
    return mpfr_cmp(b.rad().raw(), t.raw()) <= 0;
}
inline bool crad_leq_2exp(const ComplexBall& b, long e) {
    Real t = Real::pow2(1, e, 32);
    return mpfr_cmp(b.rad_ub().raw(), t.raw()) <= 0;
}

/// Containment check for a real reference value given as decimal string with
/// an extra slack of 10^{-slack_digits} (the string is a truncation).
inline bool contains_decimal(const Ball& b, const std::string& decimal, int slack_digits) {
    Rational v = Rational::parse(decimal);
    Rational eps = Rational(1) / Rational(10).pow(slack_digits);
    return intersects_bracket(b, v - eps, v + eps);
}
inline bool contains_decimal(const ComplexBall& b, const std::string& decimal,
                             int slack_digits) {
    return contains_decimal(b.re(), decimal, slack_digits) && b.im().contains_zero();
}

}  // namespace testutil
