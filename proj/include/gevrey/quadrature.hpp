#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "gevrey/ball.hpp"
#include "gevrey/rational.hpp"
#include "gevrey/trace.hpp"

namespace gevrey {

/// Enclosure-valued integrand. Must accept any complex ball whose box lies in
/// the integrand's analyticity domain and throw domain_error otherwise; the
/// quadrature probes wide balls covering whole panels to obtain sup bounds.
using IntegrandFn = std::function<ComplexBall(const ComplexBall&, mpfr_prec_t)>;

/// Certified bound |f(t)| <= A (1+t)^q e^{-lambda t} for real t >= t_min,
/// used to truncate semi-infinite integrals.
struct TailMajorant {
    Ball A;
    unsigned long q;
    Ball lambda;
    double t_min = 0.0;
};

namespace quad_detail {

struct CCRule {
    std::vector<Ball> nodes;    // cos(k pi / n), k = 0..n
    std::vector<Ball> weights;  // positive, summing to 2
};

/// Clenshaw-Curtis nodes and weights for n+1 points (n even), enclosed in
/// balls at `prec` bits. Cached per (n, prec).
inline const CCRule& cc_rule(unsigned long n, mpfr_prec_t prec) {
    static std::map<std::pair<unsigned long, mpfr_prec_t>, CCRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, prec);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (n < 2 || n % 2 != 0) throw parameter_error("cc_rule: n must be even and >= 2");

    CCRule rule;
    Ball pi = bconst_pi(prec);
    // cos(m pi / n) for m = 0..n; values for m in (n, 2n) fold back by symmetry.
    std::vector<Ball> table(n + 1);
    for (unsigned long m = 0; m <= n; ++m) {
        Ball theta = bdiv_long(bmul_long(pi, static_cast<long>(m), prec),
                               static_cast<long>(n), prec);
        table[m] = bcos(theta, prec);
    }
    auto cos_at = [&](unsigned long m) -> const Ball& {
        m %= 2 * n;
        return table[m <= n ? m : 2 * n - m];
    };

    rule.nodes = table;
    rule.weights.resize(n + 1);
    for (unsigned long k = 0; k <= n / 2; ++k) {
        Ball s = Ball::zero(prec);
        for (unsigned long j = 1; j <= n / 2; ++j) {
            long bj = (j == n / 2) ? 1 : 2;
            Rational coef(bj, static_cast<long>(4 * j * j - 1));
            s = badd(s, bmul(Ball::from_rational(coef, prec), cos_at(2 * j * k), prec),
                     prec);
        }
        Ball w = bsub(Ball::from_long(1, prec), s, prec);
        long ck = (k == 0 || k == n) ? 1 : 2;
        w = bmul(w, Ball::from_rational(Rational(ck, static_cast<long>(n)), prec), prec);
        if (!w.is_strictly_positive())
            throw domain_error("cc_rule: weight enclosure not positive");
        rule.weights[k] = w;
        rule.weights[n - k] = w;  // symmetric rule, c_0 = c_n
    }
    return cache.emplace(key, std::move(rule)).first->second;
}

inline double log2_up(const Real& x) {
    if (x.sign() <= 0) return -1e9;
    long exp = 0;
    double d = mpfr_get_d_2exp(&exp, x.raw(), MPFR_RNDU);
    return std::log2(std::fabs(d)) + static_cast<double>(exp) + 1e-9;
}

struct PanelChoice {
    Rational rho;
    unsigned long n;
    Real M;  // sup bound of |f| on the panel disc
};

inline Real ball_modulus_ub(const ComplexBall& v) {
    Real a = v.re().abs_ub(), b = v.im().abs_ub(), h(kRadPrec);
    mpfr_hypot(h.raw(), a.raw(), b.raw(), MPFR_RNDU);
    return h;
}

/// Rigorous Clenshaw-Curtis error bound (16/3) M rho^{-n} / (rho - 1), scaled
/// by the panel half-width h, derived from |a_k| <= 2 M rho^{-k} for the
/// Chebyshev coefficients of a function bounded by M on the Bernstein ellipse.
inline Real cc_error_bound(const Real& M, const Rational& rho, unsigned long n,
                           const Real& h) {
    Ball m{Real(M), Real(kRadPrec)};
    Ball r = Ball::from_rational(rho, 64);
    Ball pw = bdiv(Ball::from_long(1, 64), bpow_long(r, static_cast<long>(n), 64), 64);
    Ball denom = Ball::from_rational(rho - Rational(1), 64);
    Ball e = bmul(bmul(m, pw, 64), Ball::from_rational(Rational(16, 3), 64), 64);
    e = bdiv(e, denom, 64);
    e = bmul(e, Ball{Real(h), Real(kRadPrec)}, 64);
    return e.upper();
}

}  // namespace quad_detail

/// Adaptive finite-interval quadrature with certified error: each panel is
/// integrated by Clenshaw-Curtis whose truncation error is bounded through a
/// sup bound of |f| on a disc covering the panel's Bernstein ellipse.
inline ComplexBall quad_finite(const IntegrandFn& f, const Real& a, const Real& b,
                               const Real& tol, mpfr_prec_t prec) {
    trace::quadrature_calls.fetch_add(1, std::memory_order_relaxed);
    static const std::vector<Rational> kRhos = {Rational(8), Rational(4), Rational(3),
                                                Rational(2), Rational(7, 5)};
    const unsigned long n_max = 1600;
    const int depth_max = 56;
    const mpfr_prec_t ep = 256;  // panel endpoints stay exact dyadics

    Real width(ep);
    mpfr_sub(width.raw(), b.raw(), a.raw(), MPFR_RNDN);
    if (width.sign() <= 0) return ComplexBall::zero(prec);

    struct Panel {
        Real a, b;
        int depth;
    };
    std::vector<Panel> stack;
    {
        Real a0(ep), b0(ep);
        mpfr_set(a0.raw(), a.raw(), MPFR_RNDN);
        mpfr_set(b0.raw(), b.raw(), MPFR_RNDN);
        stack.push_back({std::move(a0), std::move(b0), 0});
    }
    ComplexBall total = ComplexBall::zero(prec);

    while (!stack.empty()) {
        Panel p = std::move(stack.back());
        stack.pop_back();
        Real c(ep), h(ep);
        mpfr_add(c.raw(), p.a.raw(), p.b.raw(), MPFR_RNDN);
        mpfr_div_2ui(c.raw(), c.raw(), 1, MPFR_RNDN);
        mpfr_sub(h.raw(), p.b.raw(), p.a.raw(), MPFR_RNDN);
        mpfr_div_2ui(h.raw(), h.raw(), 1, MPFR_RNDN);

        // Panel tolerance proportional to width (budgets sum to <= tol).
        Real tol_panel(kRadPrec);
        mpfr_mul_2ui(tol_panel.raw(), h.raw(), 1, MPFR_RNDD);
        mpfr_div(tol_panel.raw(), tol_panel.raw(), width.raw(), MPFR_RNDD);
        mpfr_mul(tol_panel.raw(), tol_panel.raw(), tol.raw(), MPFR_RNDD);

        std::optional<quad_detail::PanelChoice> best;
        for (const Rational& rho : kRhos) {
            // Disc radius h*(rho + 1/rho)/2 covers the Bernstein ellipse.
            Rational half_axis = (rho + Rational(1) / rho) / Rational(2);
            Real rdisc(64);
            mpfr_mul_q(rdisc.raw(), h.raw(), half_axis.q().get_mpq_t(), MPFR_RNDU);
            Ball re_part{Real(c), Real(rdisc)};
            Ball im_part{Real(prec), Real(rdisc)};
            ComplexBall wide(std::move(re_part), std::move(im_part));
            Real M(kRadPrec);
            try {
                M = quad_detail::ball_modulus_ub(f(wide, 64));
            } catch (const domain_error&) {
                continue;
            }
            if (!M.is_finite()) continue;
            double log2_need = quad_detail::log2_up(M) + quad_detail::log2_up(h) +
                               std::log2(16.0 / 3.0) -
                               std::log2(rho.to_double() - 1.0) -
                               quad_detail::log2_up(tol_panel);
            double n_d = log2_need / std::log2(rho.to_double());
            unsigned long n_req =
                n_d <= 32.0 ? 32 : static_cast<unsigned long>((n_d + 31.0) / 32.0) * 32;
            if (!best || n_req < best->n)
                best = quad_detail::PanelChoice{rho, n_req, std::move(M)};
        }

        if (!best || best->n > n_max) {
            if (p.depth >= depth_max)
                throw precision_exhausted("quad_finite: panel refinement stalled", total);
            Real mid(ep);
            mpfr_add(mid.raw(), p.a.raw(), p.b.raw(), MPFR_RNDN);
            mpfr_div_2ui(mid.raw(), mid.raw(), 1, MPFR_RNDN);
            stack.push_back({mid, p.b, p.depth + 1});
            stack.push_back({p.a, std::move(mid), p.depth + 1});
            continue;
        }

        const quad_detail::CCRule& rule = quad_detail::cc_rule(best->n, prec);
        Ball hb{Real(h), Real(kRadPrec)};
        Ball cb{Real(c), Real(kRadPrec)};
        ComplexBall acc = ComplexBall::zero(prec);
        for (unsigned long k = 0; k <= best->n; ++k) {
            Ball x = badd(cb, bmul(hb, rule.nodes[k], prec), prec);
            ComplexBall fx = f(ComplexBall(std::move(x), Ball::zero(prec)), prec);
            acc = cadd(acc, cmul_real(fx, rule.weights[k], prec), prec);
        }
        acc = cmul_real(acc, hb, prec);
        Real err = quad_detail::cc_error_bound(best->M, best->rho, best->n, h);
        acc.re().add_error(err);
        acc.im().add_error(err);
        total = cadd(total, acc, prec);
    }
    return total;
}

/// Upper bound of A * integral_T^inf (1+t)^q e^{-lambda t} dt via the exact
/// closed form A q! lambda^{-(q+1)} e^{-lambda T} sum_{j<=q} (lambda(1+T))^j / j!.
inline Real majorant_tail_bound(const TailMajorant& maj, const Real& T) {
    mpfr_prec_t p = 64;
    Ball Tb{Real(T), Real(kRadPrec)};
    Ball x = bmul(maj.lambda, badd(Tb, Ball::from_long(1, p), p), p);
    Ball sum = Ball::zero(p);
    Ball term = Ball::from_long(1, p);
    for (unsigned long j = 0; j <= maj.q; ++j) {
        if (j > 0) term = bdiv_long(bmul(term, x, p), static_cast<long>(j), p);
        sum = badd(sum, term, p);
    }
    Ball res = bmul(maj.A, sum, p);
    res = bmul(res, bexp(bneg(bmul(maj.lambda, Tb, p)), p), p);
    Ball lam_pow = bpow_long(maj.lambda, static_cast<long>(maj.q) + 1, p);
    res = bdiv(res, lam_pow, p);
    res = bmul(res, Ball::from_rational(factorial(maj.q), p), p);
    return res.upper();
}

/// Integral over [0, inf): certified truncation at T from the majorant, then
/// adaptive panel quadrature on [0, T].
inline ComplexBall quad_semiinfinite(const IntegrandFn& f, const TailMajorant& maj,
                                     const Real& tol, mpfr_prec_t prec) {
    if (!maj.lambda.is_strictly_positive())
        throw parameter_error("quad_semiinfinite: decay rate must be positive");
    Real quarter_tol(kRadPrec);
    mpfr_div_2ui(quarter_tol.raw(), tol.raw(), 2, MPFR_RNDD);
    double t0 = maj.t_min > 8.0 ? maj.t_min : 8.0;
    Real T = Real::from_long(static_cast<long>(t0) + 1, 64);
    Real tail(kRadPrec);
    for (int i = 0;; ++i) {
        if (i > 120)
            throw precision_exhausted("quad_semiinfinite: tail does not shrink",
                                      ComplexBall::zero(prec));
        tail = majorant_tail_bound(maj, T);
        if (tail.is_finite() && mpfr_cmp(tail.raw(), quarter_tol.raw()) <= 0) break;
        mpfr_mul_2ui(T.raw(), T.raw(), 1, MPFR_RNDN);
    }
    Real inner_tol(kRadPrec);
    mpfr_sub(inner_tol.raw(), tol.raw(), quarter_tol.raw(), MPFR_RNDD);
    ComplexBall out = quad_finite(f, Real::from_long(0, 64), T, inner_tol, prec);
    out.re().add_error(tail);
    out.im().add_error(tail);
    return out;
}

// ---------------------------------------------------------------------------
// Exact rational-function machinery for oscillatory tails.

/// Dense polynomial with exact rational coefficients.
struct Poly {
    std::vector<Rational> c;  // c[i] * x^i

    static Poly constant(const Rational& v) { return Poly{{v}}; }
    Rational eval(const Rational& x) const {
        Rational acc(0);
        for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
        return acc;
    }
    Poly derivative() const {
        if (c.size() <= 1) return Poly{{Rational(0)}};
        Poly d;
        d.c.resize(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i)
            d.c[i - 1] = c[i] * Rational(static_cast<long>(i));
        return d;
    }
    Poly mul(const Poly& o) const {
        Poly r;
        r.c.assign(c.size() + o.c.size() - 1, Rational(0));
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = 0; j < o.c.size(); ++j) r.c[i + j] += c[i] * o.c[j];
        return r;
    }
    Poly sub(const Poly& o) const {
        Poly r = *this;
        if (o.c.size() > r.c.size()) r.c.resize(o.c.size(), Rational(0));
        for (size_t j = 0; j < o.c.size(); ++j) r.c[j] -= o.c[j];
        return r;
    }
};

/// Exact rational function num / den^den_pow; keeping the base polynomial
/// fixed makes repeated differentiation cost linear in the order.
struct RationalFun {
    Poly num;
    Poly den;
    unsigned long den_pow = 1;

    Rational eval(const Rational& x) const {
        Rational d = den.eval(x);
        if (d.is_zero()) throw domain_error("rational function pole");
        return num.eval(x) / d.pow(static_cast<long>(den_pow));
    }
    /// (P / D^k)' = (P' D - k P D') / D^{k+1}.
    RationalFun derivative() const {
        Poly kpd = num.mul(den.derivative());
        for (Rational& c : kpd.c) c *= Rational(static_cast<long>(den_pow));
        return {num.derivative().mul(den).sub(kpd), den, den_pow + 1};
    }
};

enum class Trig { cos, sin };

/// Enclosure of integral_R^inf g(x) * trig(x) dx by m-fold integration by
/// parts with exact boundary derivatives, plus the remainder bound
/// m!/(m R^m). Precondition: |g^{(j)}(x)| <= j!/x^{j+1} on [R, inf) for all
/// j <= m (true for 1/(1+x^2) and 1/(1+x), whose poles keep distance >= 1
/// from the positive axis).
inline Ball oscillatory_tail(const RationalFun& g, const Rational& R, Trig w,
                             unsigned long m, mpfr_prec_t prec) {
    if (m < 1 || R.sign() <= 0) throw parameter_error("oscillatory_tail: need m>=1, R>0");
    Ball Rb = Ball::from_rational(R, prec);
    Ball sinR, cosR;
    bsincos(Rb, prec, &sinR, &cosR);
    Ball acc = Ball::zero(prec);
    RationalFun gj = g;
    bool negate = false;
    Trig cur = w;
    for (unsigned long j = 0; j < m; ++j) {
        Rational gval = gj.eval(R);
        Ball term;
        if (cur == Trig::cos) {
            // I(g, cos) = -g(R) sin R - I(g', sin)
            term = bneg(bmul(Ball::from_rational(gval, prec), sinR, prec));
            acc = badd(acc, negate ? bneg(term) : term, prec);
            negate = !negate;
            cur = Trig::sin;
        } else {
            // I(g, sin) = g(R) cos R + I(g', cos)
            term = bmul(Ball::from_rational(gval, prec), cosR, prec);
            acc = badd(acc, negate ? bneg(term) : term, prec);
            cur = Trig::cos;
        }
        gj = gj.derivative();
    }
    Rational rem = factorial(m) / (Rational(static_cast<long>(m)) * R.pow(static_cast<long>(m)));
    acc.add_error(Ball::from_rational(rem, 64).abs_ub());
    return acc;
}

}  // namespace gevrey
