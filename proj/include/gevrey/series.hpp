#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "gevrey/ball.hpp"
#include "gevrey/rational.hpp"

namespace gevrey {

/// Certified coefficient growth |coef(n)| <= C * rho^n / n!.
struct GrowthBound {
    Rational C;
    Rational rho;
};

/// Geometric growth |coef(n)| <= C * r^n, used for G-function streams.
struct GeometricBound {
    Rational C;
    Rational r;
};

/// Deterministic exact-rational Taylor coefficient stream with a certified
/// growth bound. Value-semantic handle; the memo is shared and synchronized.
class CoeffStream {
  public:
    CoeffStream() = default;
    CoeffStream(std::function<Rational(unsigned long)> gen, GrowthBound growth,
                std::optional<GeometricBound> geometric = std::nullopt)
        : impl_(std::make_shared<Impl>(std::move(gen), std::move(growth),
                                       std::move(geometric))) {}

    const GrowthBound& growth() const { return impl_->growth; }
    const std::optional<GeometricBound>& geometric() const { return impl_->geometric; }

    Rational coeff(unsigned long n) const {
        std::lock_guard<std::mutex> lock(impl_->mu);
        auto& memo = impl_->memo;
        while (memo.size() <= n) memo.push_back(impl_->gen(memo.size()));
        return memo[n];
    }

    /// Coefficients 0..n-1 as balls at `prec` bits, cached per precision.
    const std::vector<Ball>& coeff_balls(unsigned long n, mpfr_prec_t prec) const {
        std::lock_guard<std::mutex> lock(impl_->mu);
        auto& memo = impl_->memo;
        while (memo.size() < n) memo.push_back(impl_->gen(memo.size()));
        auto& balls = impl_->ball_memo[prec];
        while (balls.size() < n)
            balls.push_back(Ball::from_rational(memo[balls.size()], prec));
        return balls;
    }

  private:
    struct Impl {
        Impl(std::function<Rational(unsigned long)> g, GrowthBound gr,
             std::optional<GeometricBound> geo)
            : gen(std::move(g)), growth(std::move(gr)), geometric(std::move(geo)) {}
        std::function<Rational(unsigned long)> gen;
        GrowthBound growth;
        std::optional<GeometricBound> geometric;
        std::vector<Rational> memo;
        std::map<mpfr_prec_t, std::vector<Ball>> ball_memo;
        std::mutex mu;
    };
    std::shared_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Exact coefficient operations.

/// Taylor coefficient of E_{a,s}(z) = sum z^n / (n! (n+a)^s): exactly
/// 1/(n! (n+a)^s). Requires a outside {0, -1, -2, ...}.
inline Rational coeff_Eas(const Rational& a, long s, unsigned long n) {
    if (a.is_nonpositive_integer())
        throw parameter_error("E_{a,s}: a must not be a non-positive integer");
    if (s < 1) throw parameter_error("E_{a,s}: s must be >= 1");
    Rational shifted = a + Rational(static_cast<long>(n));
    return Rational(1) / (factorial(n) * shifted.pow(s));
}

namespace detail {

/// Coefficients 0..n of log(1+x)^k by repeated exact Cauchy products.
inline std::vector<Rational> logpow_coeffs(long k, unsigned long n) {
    std::vector<Rational> base(n + 1, Rational(0));
    for (unsigned long m = 1; m <= n; ++m)
        base[m] = Rational((m % 2 == 1) ? 1 : -1, static_cast<long>(m));
    std::vector<Rational> acc(n + 1, Rational(0));
    acc[0] = Rational(1);
    for (long rep = 0; rep < k; ++rep) {
        std::vector<Rational> next(n + 1, Rational(0));
        for (unsigned long i = 0; i <= n; ++i) {
            if (acc[i].is_zero()) continue;
            for (unsigned long j = 0; i + j <= n; ++j) {
                if (base[j].is_zero()) continue;
                next[i + j] += acc[i] * base[j];
            }
        }
        acc = std::move(next);
    }
    return acc;
}

}  // namespace detail

/// Taylor coefficient u_{a,k,n} of (1+x)^{a-1} log(1+x)^k.
inline Rational coeff_powerlog(const Rational& a, long k, unsigned long n) {
    if (k < 0) throw parameter_error("coeff_powerlog: k must be >= 0");
    std::vector<Rational> lp = detail::logpow_coeffs(k, n);
    Rational am1 = a - Rational(1);
    Rational sum(0);
    for (unsigned long j = 0; j <= n; ++j) {
        if (lp[j].is_zero()) continue;
        sum += binomial(am1, n - j) * lp[j];
    }
    return sum;
}

/// Falling-factorial coefficient s(s-1)...(s-n+1) of the binomial anti-E family.
inline Rational coeff_binomial(const Rational& s, unsigned long n) {
    return falling_factorial(s, n);
}

// ---------------------------------------------------------------------------
// E-function specifications.

struct EasFamily {
    Rational a;
    long s;
};
struct ExpFamily {
    Rational beta;
};
struct BesselI0Family {};

/// One of the paper-relevant E-function families, or a generic stream.
/// Carries the coefficient stream and its certified growth bound.
class EFunctionSpec {
  public:
    static EFunctionSpec eas(const Rational& a, long s) {
        if (a.is_nonpositive_integer())
            throw parameter_error("E_{a,s}: a must not be a non-positive integer");
        if (s < 1) throw parameter_error("E_{a,s}: s must be >= 1");
        // C = max(1, max over the finitely many n with |n+a| < 1 of |n+a|^{-s}).
        Rational C(1);
        double ad = -a.to_double();
        long lo = static_cast<long>(ad) - 2;
        for (long n = std::max(0L, lo); n <= std::max(0L, lo + 4); ++n) {
            Rational d = (a + Rational(n)).abs();
            if (d < Rational(1)) {
                Rational inv = Rational(1) / d.pow(s);
                if (inv > C) C = inv;
            }
        }
        CoeffStream stream(
            [a, s](unsigned long n) { return coeff_Eas(a, s, n); },
            GrowthBound{C, Rational(1)});
        return EFunctionSpec(EasFamily{a, s}, std::move(stream));
    }

    static EFunctionSpec exponential(const Rational& beta) {
        CoeffStream stream(
            [beta](unsigned long n) { return beta.pow(static_cast<long>(n)) / factorial(n); },
            GrowthBound{Rational(1), beta.abs()});
        return EFunctionSpec(ExpFamily{beta}, std::move(stream));
    }

    /// J0(iz) = I0(z): coefficient of z^n is 1/(4^{n/2} ((n/2)!)^2) for even n.
    static EFunctionSpec bessel_i0() {
        CoeffStream stream(
            [](unsigned long n) {
                if (n % 2 == 1) return Rational(0);
                unsigned long m = n / 2;
                Rational f = factorial(m);
                return Rational(1) / (Rational(4).pow(static_cast<long>(m)) * f * f);
            },
            GrowthBound{Rational(1), Rational(1)});
        return EFunctionSpec(BesselI0Family{}, std::move(stream));
    }

    static EFunctionSpec generic(CoeffStream stream) {
        return EFunctionSpec(std::monostate{}, std::move(stream));
    }

    const CoeffStream& stream() const { return stream_; }
    const GrowthBound& growth() const { return stream_.growth(); }

    template <typename T>
    const T* family() const {
        return std::get_if<T>(&family_);
    }

  private:
    using Family = std::variant<std::monostate, EasFamily, ExpFamily, BesselI0Family>;
    EFunctionSpec(Family f, CoeffStream s) : family_(std::move(f)), stream_(std::move(s)) {}
    Family family_;
    CoeffStream stream_;
};

// ---------------------------------------------------------------------------
// Evaluation with certified tails.

struct TailBound {
    unsigned long N;
    Real bound;  // majorizes |sum_{n>=N} coef(n) z^n|
};

namespace detail {

inline Real rho_abs_z(const GrowthBound& g, const Real& abs_z) {
    Real rho = g.rho.abs().to_real(kRadPrec);
    mpfr_nextabove(rho.raw());
    Real rz(kRadPrec);
    mpfr_mul(rz.raw(), rho.raw(), abs_z.raw(), MPFR_RNDU);
    return rz;
}

/// Tail majorant 2 C (rho|z|)^N / N! for |sum_{n>=N} coef(n) z^n|, valid once
/// the term ratio rho|z|/(N+1) is at most 1/2. Returns an upper bound, or
/// nothing when N is below that threshold.
inline std::optional<Real> geometric_tail(const GrowthBound& g, const Real& abs_z,
                                          unsigned long N) {
    Real rz = rho_abs_z(g, abs_z);
    if (mpfr_get_d(rz.raw(), MPFR_RNDU) * 2.0 + 1.0 > static_cast<double>(N + 1))
        return std::nullopt;
    Real term = g.C.abs().to_real(kRadPrec);
    mpfr_nextabove(term.raw());
    for (unsigned long n = 1; n <= N; ++n) {
        mpfr_mul(term.raw(), term.raw(), rz.raw(), MPFR_RNDU);
        mpfr_div_ui(term.raw(), term.raw(), n, MPFR_RNDU);
    }
    mpfr_mul_2ui(term.raw(), term.raw(), 1, MPFR_RNDU);
    return term;
}

/// Smallest N with geometric-majorant tail <= tol.
inline TailBound choose_truncation(const GrowthBound& g, const Real& abs_z,
                                   const Real& tol) {
    Real rz = rho_abs_z(g, abs_z);
    double start = 2.0 * mpfr_get_d(rz.raw(), MPFR_RNDU) + 4.0;
    unsigned long N0 = start > 8.0 ? static_cast<unsigned long>(start) : 8;
    Real term = g.C.abs().to_real(kRadPrec);
    mpfr_nextabove(term.raw());
    for (unsigned long n = 1; n <= N0; ++n) {
        mpfr_mul(term.raw(), term.raw(), rz.raw(), MPFR_RNDU);
        mpfr_div_ui(term.raw(), term.raw(), n, MPFR_RNDU);
    }
    unsigned long N = N0;
    Real bound(kRadPrec);
    for (;; ++N) {
        if (N > 2000000) throw domain_error("series truncation did not converge");
        mpfr_mul_2ui(bound.raw(), term.raw(), 1, MPFR_RNDU);
        if (mpfr_cmp(bound.raw(), tol.raw()) <= 0) break;
        mpfr_mul(term.raw(), term.raw(), rz.raw(), MPFR_RNDU);
        mpfr_div_ui(term.raw(), term.raw(), N + 1, MPFR_RNDU);
    }
    return TailBound{N, std::move(bound)};
}

}  // namespace detail

/// Horner evaluation of sum_{n<N} coef(n) z^n plus the certified tail.
inline ComplexBall eval_series(const CoeffStream& stream, const ComplexBall& z,
                               const PrecisionContext& ctx) {
    Real tol = ctx.target_radius();
    mpfr_div_2ui(tol.raw(), tol.raw(), 2, MPFR_RNDD);  // reserve 3/4 for rounding
    TailBound tail = detail::choose_truncation(stream.growth(), z.abs_ub(), tol);
    const std::vector<Ball>& c = stream.coeff_balls(tail.N, ctx.work_bits);
    ComplexBall acc = ComplexBall::zero(ctx.work_bits);
    for (unsigned long i = tail.N; i-- > 0;) {
        acc = cmul(acc, z, ctx.work_bits);
        acc = cadd(acc, ComplexBall(c[i], Ball::zero(ctx.work_bits)), ctx.work_bits);
    }
    acc.re().add_error(tail.bound);
    acc.im().add_error(tail.bound);
    return acc;
}

inline ComplexBall eval_E(const EFunctionSpec& spec, const ComplexBall& z,
                          const PrecisionContext& ctx) {
    return eval_series(spec.stream(), z, ctx);
}

/// Stream of the order-th termwise derivative: coefficient of z^n becomes
/// coef(n+order) * (n+order)!/n!, with growth (C rho^order, rho).
inline CoeffStream derivative_stream(const CoeffStream& s, unsigned long order) {
    if (order == 0) return s;
    GrowthBound g{s.growth().C * s.growth().rho.abs().pow(static_cast<long>(order)),
                  s.growth().rho};
    CoeffStream base = s;
    return CoeffStream(
        [base, order](unsigned long n) {
            Rational c = base.coeff(n + order);
            return c * falling_factorial(Rational(static_cast<long>(n + order)), order);
        },
        std::move(g));
}

inline ComplexBall deriv_E(const EFunctionSpec& spec, const ComplexBall& z,
                           unsigned long order, const PrecisionContext& ctx) {
    if (order == 0) return eval_E(spec, z, ctx);
    return eval_series(derivative_stream(spec.stream(), order), z, ctx);
}

// ---------------------------------------------------------------------------
// psi recurrence residual and Wronskians.

/// psi_j(z) = e^z E_{a,j}(-z), psi_0 = 1. Encloses
/// psi_j'(z) - (1 - a/z) psi_j(z) - (1/z) psi_{j-1}(z); must contain 0.
inline ComplexBall psi_residual(const Rational& a, long j, const ComplexBall& z,
                                const PrecisionContext& ctx) {
    if (j < 1) throw parameter_error("psi_residual: j must be >= 1");
    if (z.abs_lb().sign() <= 0) throw domain_error("psi_residual: z must exclude 0");
    // Deepen the series target so the residual radius lands well below
    // 2^{-(work_bits-40)} after the arithmetic on top.
    PrecisionContext inner(ctx.work_bits,
                           std::min<mpfr_exp_t>(ctx.target_exp,
                                                -(static_cast<mpfr_exp_t>(ctx.work_bits) - 30)));
    const PrecisionContext& c = inner;
    mpfr_prec_t p = c.work_bits;
    ComplexBall ez = cexp(z, p);
    ComplexBall mz = cneg(z);
    EFunctionSpec Ej = EFunctionSpec::eas(a, j);
    ComplexBall psi_j = cmul(ez, eval_E(Ej, mz, c), p);
    // psi_j' = psi_j - e^z E'(-z)
    ComplexBall psi_j_prime = csub(psi_j, cmul(ez, deriv_E(Ej, mz, 1, c), p), p);
    ComplexBall psi_prev =
        (j == 1) ? ComplexBall::from_long(1, p)
                 : cmul(ez, eval_E(EFunctionSpec::eas(a, j - 1), mz, c), p);
    ComplexBall a_over_z = cdiv(ComplexBall::from_rational(a, p), z, p);
    ComplexBall factor = csub(ComplexBall::from_long(1, p), a_over_z, p);
    ComplexBall rhs = cadd(cmul(factor, psi_j, p), cdiv(psi_prev, z, p), p);
    return csub(psi_j_prime, rhs, p);
}

/// A function handle providing the order-th derivative at a point.
using DerivFn =
    std::function<ComplexBall(const ComplexBall&, unsigned long, const PrecisionContext&)>;

/// Determinant of the m x m matrix M[i][j] = d^i/dz^i f_j(z0), i = 0..m-1,
/// by subset dynamic programming (no divisions, so zero-containing entries
/// are handled gracefully).
inline ComplexBall wronskian_det(const std::vector<DerivFn>& fns, const ComplexBall& z0,
                                 const PrecisionContext& ctx) {
    size_t m = fns.size();
    if (m == 0 || m > 8) throw parameter_error("wronskian_det: need 1..8 functions");
    mpfr_prec_t p = ctx.work_bits;
    std::vector<std::vector<ComplexBall>> M(m, std::vector<ComplexBall>(m));
    for (size_t j = 0; j < m; ++j)
        for (size_t i = 0; i < m; ++i) M[i][j] = fns[j](z0, i, ctx);

    std::vector<ComplexBall> dp(size_t{1} << m, ComplexBall::zero(p));
    dp[0] = ComplexBall::from_long(1, p);
    for (size_t mask = 1; mask < dp.size(); ++mask) {
        size_t row = static_cast<size_t>(std::popcount(mask)) - 1;
        ComplexBall acc = ComplexBall::zero(p);
        size_t pos = 0;
        for (size_t j = 0; j < m; ++j) {
            if (!(mask & (size_t{1} << j))) continue;
            // Laplace expansion along the last row: cofactor sign (-1)^{row+pos}.
            ComplexBall term = cmul(M[row][j], dp[mask ^ (size_t{1} << j)], p);
            acc = ((row + pos) % 2 == 0) ? cadd(acc, term, p) : csub(acc, term, p);
            ++pos;
        }
        dp[mask] = std::move(acc);
    }
    return dp.back();
}

}  // namespace gevrey
