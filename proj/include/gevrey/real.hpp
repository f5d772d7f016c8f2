#pragma once

#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace gevrey {

// Thrown when an input ball touches a branch cut, contains a pole, or
// otherwise leaves the mathematical domain of an operation.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a requested summation direction is (too close to) anti-Stokes
// or outside the validity sector.
struct direction_error : domain_error {
    using domain_error::domain_error;
};

struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// RAII wrapper around mpfr_t. Everything heavier lives in ball.hpp.
class Real {
  public:
    explicit Real(mpfr_prec_t prec) { mpfr_init2(x_, prec); mpfr_set_zero(x_, 1); }
    Real() : Real(64) {}
    Real(const Real& o) {
        mpfr_init2(x_, mpfr_get_prec(o.x_));
        mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept {
        mpfr_init2(x_, 2);
        mpfr_swap(x_, o.x_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(x_, mpfr_get_prec(o.x_));
            mpfr_set(x_, o.x_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        mpfr_swap(x_, o.x_);
        return *this;
    }
    ~Real() { mpfr_clear(x_); }

    mpfr_ptr raw() { return x_; }
    mpfr_srcptr raw() const { return x_; }

    mpfr_prec_t prec() const { return mpfr_get_prec(x_); }
    bool is_zero() const { return mpfr_zero_p(x_) != 0; }
    bool is_finite() const { return mpfr_number_p(x_) != 0; }
    int sign() const { return mpfr_sgn(x_); }
    int cmp(const Real& o) const { return mpfr_cmp(x_, o.x_); }
    int cmp_ui(unsigned long v) const { return mpfr_cmp_ui(x_, v); }
    mpfr_exp_t exponent() const { return mpfr_get_exp(x_); }
    double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }

    static Real from_long(long v, mpfr_prec_t prec = 64) {
        Real r(prec);
        mpfr_set_si(r.x_, v, MPFR_RNDN);
        return r;
    }
    /// Exact power of two: m * 2^e.
    static Real pow2(long m, mpfr_exp_t e, mpfr_prec_t prec = 64) {
        Real r(prec);
        mpfr_set_si_2exp(r.x_, m, e, MPFR_RNDN);
        return r;
    }

    std::string str(size_t digits = 20) const {
        char* s = nullptr;
        if (mpfr_asprintf(&s, "%.*Rg", static_cast<int>(digits), x_) < 0)
            return "<fmt-error>";
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

  private:
    mpfr_t x_;
};

}  // namespace gevrey
