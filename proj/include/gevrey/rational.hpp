#pragma once

#include <gmp.h>
#include <gmpxx.h>

#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "gevrey/real.hpp"

namespace gevrey {

/// Exact rational with canonical form (gcd(num,den)=1, den>0), on top of GMP.
/// Coefficient streams, PSLQ inputs and tail-bound constants all stay exact
/// until the final conversion to a ball.
class Rational {
  public:
    Rational() : q_(0) {}
    Rational(long n) : q_(n) {}
    Rational(long n, long d) : q_(n, d) {
        if (d == 0) throw parameter_error("rational with zero denominator");
        q_.canonicalize();
    }
    explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }
    explicit Rational(const mpz_class& n) : q_(n) {}

    /// Accepts "p", "p/q", and plain decimal strings like "-0.125" (exact).
    static Rational parse(const std::string& s) {
        auto dot = s.find('.');
        if (dot == std::string::npos) {
            mpq_class q;
            if (q.set_str(s, 10) != 0)
                throw parameter_error("cannot parse rational: " + s);
            if (q.get_den() == 0)
                throw parameter_error("rational with zero denominator: " + s);
            q.canonicalize();
            return Rational(std::move(q));
        }
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        size_t frac_len = s.size() - dot - 1;
        if (frac_len == 0 || digits.empty())
            throw parameter_error("cannot parse decimal: " + s);
        mpz_class num;
        if (num.set_str(digits, 10) != 0)
            throw parameter_error("cannot parse decimal: " + s);
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
        mpq_class q(num, den);
        q.canonicalize();
        return Rational(std::move(q));
    }

    const mpq_class& q() const { return q_; }
    mpz_class num() const { return q_.get_num(); }
    mpz_class den() const { return q_.get_den(); }

    bool is_zero() const { return q_ == 0; }
    bool is_integer() const { return q_.get_den() == 1; }
    /// True when the value lies in {0, -1, -2, ...}.
    bool is_nonpositive_integer() const { return is_integer() && q_ <= 0; }
    int sign() const { return sgn(q_); }
    long to_long() const {
        if (!is_integer() || !q_.get_num().fits_slong_p())
            throw parameter_error("rational does not fit a long");
        return q_.get_num().get_si();
    }
    double to_double() const { return q_.get_d(); }

    Rational operator-() const { return Rational(mpq_class(-q_)); }
    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.q_ == 0) throw domain_error("rational division by zero");
        return Rational(mpq_class(a.q_ / b.q_));
    }
    Rational& operator+=(const Rational& b) { q_ += b.q_; return *this; }
    Rational& operator-=(const Rational& b) { q_ -= b.q_; return *this; }
    Rational& operator*=(const Rational& b) { q_ *= b.q_; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

    Rational abs() const { return Rational(mpq_class(::abs(q_))); }

    /// Integer power, n may be negative (then *this must be nonzero).
    Rational pow(long e) const {
        if (e == 0) return Rational(1);
        if (q_ == 0 && e < 0) throw domain_error("0^negative");
        mpq_class base = e > 0 ? q_ : mpq_class(1 / q_);
        unsigned long n = static_cast<unsigned long>(e > 0 ? e : -e);
        mpq_class acc(1);
        mpq_class p = base;
        while (n) {
            if (n & 1) acc *= p;
            n >>= 1;
            if (n) p *= p;
        }
        return Rational(std::move(acc));
    }

    std::string str() const { return q_.get_str(); }

    /// Midpoint at `prec` bits, plus a flag telling whether the conversion was exact.
    Real to_real(mpfr_prec_t prec, int* ternary = nullptr) const {
        Real r(prec);
        int t = mpfr_set_q(r.raw(), q_.get_mpq_t(), MPFR_RNDN);
        if (ternary) *ternary = t;
        return r;
    }

  private:
    mpq_class q_;
};

inline Rational factorial(unsigned long n) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return Rational(f);
}

/// Generalized binomial coefficient: r(r-1)...(r-k+1)/k! for rational r.
inline Rational binomial(const Rational& r, unsigned long k) {
    mpq_class acc(1);
    mpq_class term = r.q();
    for (unsigned long i = 0; i < k; ++i) {
        acc *= term;
        term -= 1;
    }
    mpz_class kf;
    mpz_fac_ui(kf.get_mpz_t(), k);
    acc /= kf;
    return Rational(std::move(acc));
}

/// Falling factorial r(r-1)...(r-k+1).
inline Rational falling_factorial(const Rational& r, unsigned long k) {
    mpq_class acc(1);
    mpq_class term = r.q();
    for (unsigned long i = 0; i < k; ++i) {
        acc *= term;
        term -= 1;
    }
    return Rational(std::move(acc));
}

/// Bernoulli numbers B_0, B_1, B_2, ... (B_1 = -1/2), exact, cached.
/// Recurrence: sum_{j=0}^{m} binom(m+1, j) B_j = 0 for m >= 1.
inline const Rational& bernoulli(unsigned long n) {
    static std::vector<Rational> cache = {Rational(1), Rational(-1, 2)};
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    while (cache.size() <= n) {
        unsigned long m = cache.size();
        mpq_class s(0);
        for (unsigned long j = 0; j < m; ++j) {
            mpz_class c;
            mpz_bin_uiui(c.get_mpz_t(), m + 1, j);
            s += mpq_class(c) * cache[j].q();
        }
        s /= -mpz_class(m + 1);
        cache.emplace_back(mpq_class(std::move(s)));
    }
    return cache[n];
}

}  // namespace gevrey
