#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "gevrey/rational.hpp"
#include "gevrey/real.hpp"

namespace gevrey {

// Radii are kept at a small fixed precision and always rounded upward, so a
// ball is cheap to carry around while the midpoint carries the working bits.
inline constexpr mpfr_prec_t kRadPrec = 32;

/// Working precision plus the requested output radius (a power of two).
struct PrecisionContext {
    mpfr_prec_t work_bits;
    mpfr_exp_t target_exp;  // requested radius = 2^target_exp

    explicit PrecisionContext(mpfr_prec_t bits)
        : PrecisionContext(bits, -(static_cast<mpfr_exp_t>(bits) - 56)) {}
    PrecisionContext(mpfr_prec_t bits, mpfr_exp_t target)
        : work_bits(bits), target_exp(target) {
        if (bits < 64) throw parameter_error("work_bits must be >= 64");
    }

    Real target_radius() const { return Real::pow2(1, target_exp, kRadPrec); }
    PrecisionContext with_bits(mpfr_prec_t bits) const { return {bits, target_exp}; }
    PrecisionContext deeper(mpfr_prec_t extra_bits, mpfr_exp_t extra_target) const {
        return {work_bits + extra_bits, target_exp - extra_target};
    }
};

/// Midpoint-radius enclosure of a real number: the set [mid-rad, mid+rad].
class Ball {
  public:
    Ball() : mid_(64), rad_(kRadPrec) {}
    Ball(Real mid, Real rad) : mid_(std::move(mid)), rad_(std::move(rad)) {
        if (rad_.sign() < 0 || !rad_.is_finite())
            throw domain_error("ball radius must be finite and >= 0");
    }

    static Ball zero(mpfr_prec_t prec) {
        return Ball(Real(prec), Real(kRadPrec));
    }
    static Ball from_long(long v, mpfr_prec_t prec) {
        return Ball(Real::from_long(v, prec), Real(kRadPrec));
    }
    static Ball from_rational(const Rational& q, mpfr_prec_t prec) {
        int t = 0;
        Real m = q.to_real(prec, &t);
        Ball b(std::move(m), Real(kRadPrec));
        b.add_round_error(t);
        return b;
    }
    /// Exact power of two m*2^e as a zero-radius ball.
    static Ball pow2(long m, mpfr_exp_t e, mpfr_prec_t prec) {
        return Ball(Real::pow2(m, e, prec), Real(kRadPrec));
    }

    const Real& mid() const { return mid_; }
    const Real& rad() const { return rad_; }
    mpfr_prec_t prec() const { return mid_.prec(); }

    bool is_exact() const { return rad_.is_zero(); }
    bool contains_zero() const {
        Real a = abs_mid_up();
        return mpfr_cmp(a.raw(), rad_.raw()) <= 0;
    }
    bool is_strictly_positive() const {
        if (mid_.sign() <= 0) return false;
        Real lo(kRadPrec);
        mpfr_sub(lo.raw(), mid_.raw(), rad_.raw(), MPFR_RNDD);
        return lo.sign() > 0;
    }
    bool is_strictly_negative() const {
        if (mid_.sign() >= 0) return false;
        Real hi(kRadPrec);
        mpfr_add(hi.raw(), mid_.raw(), rad_.raw(), MPFR_RNDU);
        return hi.sign() < 0;
    }

    /// Upper bound of |x| over the ball.
    Real abs_ub() const {
        Real a = abs_mid_up();
        mpfr_add(a.raw(), a.raw(), rad_.raw(), MPFR_RNDU);
        return a;
    }
    /// Lower bound of |x| over the ball (0 if the ball contains 0).
    Real abs_lb() const {
        Real a(kRadPrec);
        mpfr_abs(a.raw(), mid_.raw(), MPFR_RNDD);
        mpfr_sub(a.raw(), a.raw(), rad_.raw(), MPFR_RNDD);
        if (a.sign() < 0) mpfr_set_zero(a.raw(), 1);
        return a;
    }
    Real lower() const {  // rounded-down lower endpoint at working precision
        Real lo(mid_.prec());
        mpfr_sub(lo.raw(), mid_.raw(), rad_.raw(), MPFR_RNDD);
        return lo;
    }
    Real upper() const {
        Real hi(mid_.prec());
        mpfr_add(hi.raw(), mid_.raw(), rad_.raw(), MPFR_RNDU);
        return hi;
    }

    bool contains(const Rational& v) const {
        // |mid - v| <= rad, decided with directed rounding.
        Real d(kRadPrec + 16);
        mpfr_sub_q(d.raw(), mid_.raw(), v.q().get_mpq_t(), MPFR_RNDA);
        mpfr_abs(d.raw(), d.raw(), MPFR_RNDU);
        return mpfr_cmp(d.raw(), rad_.raw()) <= 0;
    }
    /// True when this ball's set is contained in `outer`'s set.
    bool contained_in(const Ball& outer) const {
        Real d(kRadPrec);
        mpfr_sub(d.raw(), mid_.raw(), outer.mid_.raw(), MPFR_RNDA);
        mpfr_abs(d.raw(), d.raw(), MPFR_RNDU);
        mpfr_add(d.raw(), d.raw(), rad_.raw(), MPFR_RNDU);
        return mpfr_cmp(d.raw(), outer.rad_.raw()) <= 0;
    }
    bool intersects(const Ball& o) const {
        Real d(kRadPrec);
        mpfr_sub(d.raw(), mid_.raw(), o.mid_.raw(), MPFR_RNDZ);  // toward zero: lower |diff|
        mpfr_abs(d.raw(), d.raw(), MPFR_RNDZ);
        Real s(kRadPrec);
        mpfr_add(s.raw(), rad_.raw(), o.rad_.raw(), MPFR_RNDU);
        return mpfr_cmp(d.raw(), s.raw()) <= 0;
    }

    /// Inflate the radius by an upper bound on the rounding error recorded in
    /// a ternary result for the midpoint (no-op when the operation was exact).
    void add_round_error(int ternary) {
        if (ternary == 0 || mid_.is_zero()) return;
        Real e = Real::pow2(1, mid_.exponent() - mid_.prec(), kRadPrec);
        mpfr_add(rad_.raw(), rad_.raw(), e.raw(), MPFR_RNDU);
    }
    void add_error(const Real& e) {
        if (e.sign() < 0 || !e.is_finite()) throw domain_error("bad error term");
        mpfr_add(rad_.raw(), rad_.raw(), e.raw(), MPFR_RNDU);
    }

    std::string str(size_t digits = 20) const {
        return mid_.str(digits) + " +/- " + rad_.str(3);
    }

  private:
    Real abs_mid_up() const {
        Real a(kRadPrec);
        mpfr_abs(a.raw(), mid_.raw(), MPFR_RNDU);
        return a;
    }

    Real mid_;
    Real rad_;
};

// ---------------------------------------------------------------------------
// Real ball arithmetic. All radius computations round upward.

inline Ball badd(const Ball& x, const Ball& y, mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_add(m.raw(), x.mid().raw(), y.mid().raw(), MPFR_RNDN);
    Real r(kRadPrec);
    mpfr_add(r.raw(), x.rad().raw(), y.rad().raw(), MPFR_RNDU);
    Ball b(std::move(m), std::move(r));
    b.add_round_error(t);
    return b;
}

inline Ball bsub(const Ball& x, const Ball& y, mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_sub(m.raw(), x.mid().raw(), y.mid().raw(), MPFR_RNDN);
    Real r(kRadPrec);
    mpfr_add(r.raw(), x.rad().raw(), y.rad().raw(), MPFR_RNDU);
    Ball b(std::move(m), std::move(r));
    b.add_round_error(t);
    return b;
}

inline Ball bneg(const Ball& x) {
    Real m = x.mid();
    mpfr_neg(m.raw(), m.raw(), MPFR_RNDN);  // exact
    return Ball(std::move(m), x.rad());
}

inline Ball bmul(const Ball& x, const Ball& y, mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_mul(m.raw(), x.mid().raw(), y.mid().raw(), MPFR_RNDN);
    // rad <= |xm|*yr + |ym|*xr + xr*yr
    Real ax(kRadPrec), ay(kRadPrec), r(kRadPrec), tmp(kRadPrec);
    mpfr_abs(ax.raw(), x.mid().raw(), MPFR_RNDU);
    mpfr_abs(ay.raw(), y.mid().raw(), MPFR_RNDU);
    mpfr_mul(r.raw(), ax.raw(), y.rad().raw(), MPFR_RNDU);
    mpfr_mul(tmp.raw(), ay.raw(), x.rad().raw(), MPFR_RNDU);
    mpfr_add(r.raw(), r.raw(), tmp.raw(), MPFR_RNDU);
    mpfr_mul(tmp.raw(), x.rad().raw(), y.rad().raw(), MPFR_RNDU);
    mpfr_add(r.raw(), r.raw(), tmp.raw(), MPFR_RNDU);
    Ball b(std::move(m), std::move(r));
    b.add_round_error(t);
    return b;
}

inline Ball bmul_long(const Ball& x, long v, mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_mul_si(m.raw(), x.mid().raw(), v, MPFR_RNDN);
    Real r(kRadPrec);
    Real av(kRadPrec);
    mpfr_set_si(av.raw(), v < 0 ? -v : v, MPFR_RNDU);
    mpfr_mul(r.raw(), x.rad().raw(), av.raw(), MPFR_RNDU);
    Ball b(std::move(m), std::move(r));
    b.add_round_error(t);
    return b;
}

/// Exact scaling by 2^e.
inline Ball bmul_2exp(const Ball& x, mpfr_exp_t e) {
    Real m = x.mid();
    mpfr_mul_2si(m.raw(), m.raw(), e, MPFR_RNDN);
    Real r = x.rad();
    mpfr_mul_2si(r.raw(), r.raw(), e, MPFR_RNDU);
    return Ball(std::move(m), std::move(r));
}

inline Ball bdiv(const Ball& x, const Ball& y, mpfr_prec_t prec) {
    // Lower bound of |y| must clear zero.
    Real dlo = y.abs_lb();
    if (dlo.sign() <= 0) throw domain_error("division by a ball containing zero");
    Real m(prec);
    int t = mpfr_div(m.raw(), x.mid().raw(), y.mid().raw(), MPFR_RNDN);
    // |x'/y' - xm/ym| <= (xr*|ym| + |xm|*yr) / (|ym| * (|ym|-yr))
    Real ax(kRadPrec), ay_up(kRadPrec), ay_dn(kRadPrec), num(kRadPrec), tmp(kRadPrec), den(kRadPrec);
    mpfr_abs(ax.raw(), x.mid().raw(), MPFR_RNDU);
    mpfr_abs(ay_up.raw(), y.mid().raw(), MPFR_RNDU);
    mpfr_abs(ay_dn.raw(), y.mid().raw(), MPFR_RNDD);
    mpfr_mul(num.raw(), x.rad().raw(), ay_up.raw(), MPFR_RNDU);
    mpfr_mul(tmp.raw(), ax.raw(), y.rad().raw(), MPFR_RNDU);
    mpfr_add(num.raw(), num.raw(), tmp.raw(), MPFR_RNDU);
    mpfr_mul(den.raw(), ay_dn.raw(), dlo.raw(), MPFR_RNDD);
    Real r(kRadPrec);
    mpfr_div(r.raw(), num.raw(), den.raw(), MPFR_RNDU);
    Ball b(std::move(m), std::move(r));
    b.add_round_error(t);
    return b;
}

inline Ball bdiv_long(const Ball& x, long v, mpfr_prec_t prec) {
    if (v == 0) throw domain_error("division by zero");
    return bdiv(x, Ball::from_long(v, 64), prec);
}

/// Enclosure of a monotone-increasing function given rounded endpoint values.
inline Ball ball_from_endpoints(const Real& lo, const Real& hi, mpfr_prec_t prec) {
    Real m(prec);
    mpfr_add(m.raw(), lo.raw(), hi.raw(), MPFR_RNDN);
    mpfr_div_2ui(m.raw(), m.raw(), 1, MPFR_RNDN);
    Real r1(kRadPrec), r2(kRadPrec);
    mpfr_sub(r1.raw(), hi.raw(), m.raw(), MPFR_RNDU);
    mpfr_sub(r2.raw(), m.raw(), lo.raw(), MPFR_RNDU);
    if (mpfr_cmp(r2.raw(), r1.raw()) > 0) mpfr_swap(r1.raw(), r2.raw());
    if (r1.sign() < 0) mpfr_set_zero(r1.raw(), 1);
    return Ball(std::move(m), std::move(r1));
}

inline Ball bexp(const Ball& x, mpfr_prec_t prec) {
    Real lo(prec), hi(prec);
    mpfr_sub(lo.raw(), x.mid().raw(), x.rad().raw(), MPFR_RNDD);
    mpfr_add(hi.raw(), x.mid().raw(), x.rad().raw(), MPFR_RNDU);
    mpfr_exp(lo.raw(), lo.raw(), MPFR_RNDD);
    mpfr_exp(hi.raw(), hi.raw(), MPFR_RNDU);
    return ball_from_endpoints(lo, hi, prec);
}

inline Ball blog(const Ball& x, mpfr_prec_t prec) {
    if (!x.is_strictly_positive())
        throw domain_error("log of a ball touching (-inf, 0]");
    Real lo(prec), hi(prec);
    mpfr_sub(lo.raw(), x.mid().raw(), x.rad().raw(), MPFR_RNDD);
    mpfr_add(hi.raw(), x.mid().raw(), x.rad().raw(), MPFR_RNDU);
    mpfr_log(lo.raw(), lo.raw(), MPFR_RNDD);
    mpfr_log(hi.raw(), hi.raw(), MPFR_RNDU);
    return ball_from_endpoints(lo, hi, prec);
}

inline Ball bsqrt(const Ball& x, mpfr_prec_t prec) {
    if (!x.is_strictly_positive())
        throw domain_error("sqrt of a ball touching (-inf, 0]");
    Real lo(prec), hi(prec);
    mpfr_sub(lo.raw(), x.mid().raw(), x.rad().raw(), MPFR_RNDD);
    mpfr_add(hi.raw(), x.mid().raw(), x.rad().raw(), MPFR_RNDU);
    mpfr_sqrt(lo.raw(), lo.raw(), MPFR_RNDD);
    mpfr_sqrt(hi.raw(), hi.raw(), MPFR_RNDU);
    return ball_from_endpoints(lo, hi, prec);
}

// sin/cos/atan are 1-Lipschitz: midpoint value plus transported radius.
inline Ball bsin(const Ball& x, mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_sin(m.raw(), x.mid().raw(), MPFR_RNDN);
    Ball b(std::move(m), x.rad());
    b.add_round_error(t);
    return b;
}
inline Ball bcos(const Ball& x, mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_cos(m.raw(), x.mid().raw(), MPFR_RNDN);
    Ball b(std::move(m), x.rad());
    b.add_round_error(t);
    return b;
}
inline void bsincos(const Ball& x, mpfr_prec_t prec, Ball* s, Ball* c) {
    Real ms(prec), mc(prec);
    mpfr_sin_cos(ms.raw(), mc.raw(), x.mid().raw(), MPFR_RNDN);
    Ball bs(std::move(ms), x.rad());
    bs.add_round_error(1);
    Ball bc(std::move(mc), x.rad());
    bc.add_round_error(1);
    *s = std::move(bs);
    *c = std::move(bc);
}
inline Ball batan(const Ball& x, mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_atan(m.raw(), x.mid().raw(), MPFR_RNDN);
    Ball b(std::move(m), x.rad());
    b.add_round_error(t);
    return b;
}

inline Ball bconst_pi(mpfr_prec_t prec) {
    Real m(prec);
    int t = mpfr_const_pi(m.raw(), MPFR_RNDN);
    Ball b(std::move(m), Real(kRadPrec));
    b.add_round_error(t ? t : 1);
    return b;
}

/// x^e for integer e by binary powering (x must exclude 0 when e < 0).
inline Ball bpow_long(const Ball& x, long e, mpfr_prec_t prec) {
    if (e == 0) return Ball::from_long(1, prec);
    bool inv = e < 0;
    unsigned long n = static_cast<unsigned long>(inv ? -e : e);
    Ball acc = Ball::from_long(1, prec);
    Ball p = x;
    while (n) {
        if (n & 1) acc = bmul(acc, p, prec);
        n >>= 1;
        if (n) p = bmul(p, p, prec);
    }
    if (inv) acc = bdiv(Ball::from_long(1, prec), acc, prec);
    return acc;
}

// ---------------------------------------------------------------------------
// Complex balls.

/// Rectangular enclosure of a complex value: re and im are independent balls.
class ComplexBall {
  public:
    ComplexBall() = default;
    ComplexBall(Ball re, Ball im) : re_(std::move(re)), im_(std::move(im)) {}
    explicit ComplexBall(Ball re)
        : re_(std::move(re)), im_(Ball::zero(64)) {}

    static ComplexBall zero(mpfr_prec_t prec) {
        return ComplexBall(Ball::zero(prec), Ball::zero(prec));
    }
    static ComplexBall from_long(long v, mpfr_prec_t prec) {
        return ComplexBall(Ball::from_long(v, prec), Ball::zero(prec));
    }
    static ComplexBall from_rational(const Rational& q, mpfr_prec_t prec) {
        return ComplexBall(Ball::from_rational(q, prec), Ball::zero(prec));
    }

    const Ball& re() const { return re_; }
    const Ball& im() const { return im_; }
    Ball& re() { return re_; }
    Ball& im() { return im_; }

    bool is_real_exact() const { return im_.mid().is_zero() && im_.is_exact(); }
    bool contains_zero() const { return re_.contains_zero() && im_.contains_zero(); }

    /// Upper bound of |z| over the enclosure box.
    Real abs_ub() const {
        Real a = re_.abs_ub(), b = im_.abs_ub(), h(kRadPrec);
        mpfr_hypot(h.raw(), a.raw(), b.raw(), MPFR_RNDU);
        return h;
    }
    /// Lower bound of |z| over the box (distance from 0 to the box).
    Real abs_lb() const {
        Real a = re_.abs_lb(), b = im_.abs_lb(), h(kRadPrec);
        mpfr_hypot(h.raw(), a.raw(), b.raw(), MPFR_RNDD);
        return h;
    }
    /// Upper bound of the distance between the two midpoints.
    Real mid_distance_ub(const ComplexBall& o) const {
        Real dr(kRadPrec), di(kRadPrec), h(kRadPrec);
        mpfr_sub(dr.raw(), re_.mid().raw(), o.re_.mid().raw(), MPFR_RNDA);
        mpfr_sub(di.raw(), im_.mid().raw(), o.im_.mid().raw(), MPFR_RNDA);
        mpfr_abs(dr.raw(), dr.raw(), MPFR_RNDU);
        mpfr_abs(di.raw(), di.raw(), MPFR_RNDU);
        mpfr_hypot(h.raw(), dr.raw(), di.raw(), MPFR_RNDU);
        return h;
    }
    Real rad_ub() const {
        Real h(kRadPrec);
        mpfr_hypot(h.raw(), re_.rad().raw(), im_.rad().raw(), MPFR_RNDU);
        return h;
    }
    bool intersects(const ComplexBall& o) const {
        return re_.intersects(o.re_) && im_.intersects(o.im_);
    }
    bool contained_in(const ComplexBall& o) const {
        return re_.contained_in(o.re_) && im_.contained_in(o.im_);
    }

    std::string str(size_t digits = 20) const {
        if (is_real_exact()) return re_.str(digits);
        return "(" + re_.str(digits) + ") + i*(" + im_.str(digits) + ")";
    }

  private:
    Ball re_;
    Ball im_;
};

inline ComplexBall cadd(const ComplexBall& x, const ComplexBall& y, mpfr_prec_t prec) {
    return {badd(x.re(), y.re(), prec), badd(x.im(), y.im(), prec)};
}
inline ComplexBall csub(const ComplexBall& x, const ComplexBall& y, mpfr_prec_t prec) {
    return {bsub(x.re(), y.re(), prec), bsub(x.im(), y.im(), prec)};
}
inline ComplexBall cneg(const ComplexBall& x) { return {bneg(x.re()), bneg(x.im())}; }
inline ComplexBall cconj(const ComplexBall& x) { return {x.re(), bneg(x.im())}; }

inline ComplexBall cmul(const ComplexBall& x, const ComplexBall& y, mpfr_prec_t prec) {
    Ball rr = bmul(x.re(), y.re(), prec);
    Ball ii = bmul(x.im(), y.im(), prec);
    Ball ri = bmul(x.re(), y.im(), prec);
    Ball ir = bmul(x.im(), y.re(), prec);
    return {bsub(rr, ii, prec), badd(ri, ir, prec)};
}

inline ComplexBall cmul_real(const ComplexBall& x, const Ball& s, mpfr_prec_t prec) {
    return {bmul(x.re(), s, prec), bmul(x.im(), s, prec)};
}

inline Ball cnorm2(const ComplexBall& x, mpfr_prec_t prec) {
    return badd(bmul(x.re(), x.re(), prec), bmul(x.im(), x.im(), prec), prec);
}

inline ComplexBall cinv(const ComplexBall& y, mpfr_prec_t prec) {
    Ball n2 = cnorm2(y, prec);
    if (!n2.is_strictly_positive())
        throw domain_error("division by a complex ball containing zero");
    return {bdiv(y.re(), n2, prec), bneg(bdiv(y.im(), n2, prec))};
}

inline ComplexBall cdiv(const ComplexBall& x, const ComplexBall& y, mpfr_prec_t prec) {
    return cmul(x, cinv(y, prec), prec);
}

inline ComplexBall cexp(const ComplexBall& z, mpfr_prec_t prec) {
    Ball e = bexp(z.re(), prec);
    if (z.im().mid().is_zero() && z.im().is_exact())
        return ComplexBall(std::move(e), Ball::zero(prec));
    Ball s, c;
    bsincos(z.im(), prec, &s, &c);
    return {bmul(e, c, prec), bmul(e, s, prec)};
}

inline ComplexBall cmul_i(const ComplexBall& z) { return {bneg(z.im()), z.re()}; }

inline ComplexBall cmul_2exp(const ComplexBall& z, mpfr_exp_t e) {
    return {bmul_2exp(z.re(), e), bmul_2exp(z.im(), e)};
}

inline ComplexBall csin(const ComplexBall& z, mpfr_prec_t prec) {
    if (z.is_real_exact())
        return ComplexBall(bsin(z.re(), prec), Ball::zero(prec));
    // sin z = (e^{iz} - e^{-iz}) / (2i)
    ComplexBall iz = cmul_i(z);
    ComplexBall diff = csub(cexp(iz, prec), cexp(cneg(iz), prec), prec);
    return cneg(cmul_i(cmul_2exp(diff, -1)));
}

inline ComplexBall ccos(const ComplexBall& z, mpfr_prec_t prec) {
    if (z.is_real_exact())
        return ComplexBall(bcos(z.re(), prec), Ball::zero(prec));
    ComplexBall iz = cmul_i(z);
    ComplexBall sum = cadd(cexp(iz, prec), cexp(cneg(iz), prec), prec);
    return cmul_2exp(sum, -1);
}

/// Principal-branch logarithm. The enclosure box must avoid the cut (-inf, 0].
inline ComplexBall clog(const ComplexBall& z, mpfr_prec_t prec) {
    bool off_cut = z.re().is_strictly_positive() || z.im().is_strictly_positive() ||
                   z.im().is_strictly_negative();
    if (!off_cut)
        throw domain_error("log/pow of a complex ball touching the branch cut (-inf, 0]");
    Ball n2 = cnorm2(z, prec);
    Ball re_part = bmul_2exp(blog(n2, prec), -1);
    if (z.im().mid().is_zero() && z.im().is_exact() && z.re().is_strictly_positive())
        return ComplexBall(std::move(re_part), Ball::zero(prec));
    // arg: midpoint atan2 plus Lipschitz transport bounded by rho / min|z|.
    Real zmin = z.abs_lb();
    Real rho(kRadPrec);
    mpfr_hypot(rho.raw(), z.re().rad().raw(), z.im().rad().raw(), MPFR_RNDU);
    Real am(prec);
    int t = mpfr_atan2(am.raw(), z.im().mid().raw(), z.re().mid().raw(), MPFR_RNDN);
    Real ar(kRadPrec);
    mpfr_div(ar.raw(), rho.raw(), zmin.raw(), MPFR_RNDU);
    Ball arg(std::move(am), std::move(ar));
    arg.add_round_error(t);
    return {std::move(re_part), std::move(arg)};
}

/// Principal branch z^p with a real-ball exponent (covers rational exponents).
inline ComplexBall cpow(const ComplexBall& z, const Ball& p, mpfr_prec_t prec) {
    if (z.is_real_exact() && z.re().is_strictly_positive())
        return ComplexBall(bexp(bmul(p, blog(z.re(), prec), prec), prec), Ball::zero(prec));
    ComplexBall lg = clog(z, prec);
    return cexp(cmul_real(lg, p, prec), prec);
}

inline ComplexBall cpow(const ComplexBall& z, const ComplexBall& p, mpfr_prec_t prec) {
    return cexp(cmul(clog(z, prec), p, prec), prec);
}

inline ComplexBall cpow_long(const ComplexBall& z, long e, mpfr_prec_t prec) {
    if (e == 0) return ComplexBall::from_long(1, prec);
    bool inv = e < 0;
    unsigned long n = static_cast<unsigned long>(inv ? -e : e);
    ComplexBall acc = ComplexBall::from_long(1, prec);
    ComplexBall pw = z;
    while (n) {
        if (n & 1) acc = cmul(acc, pw, prec);
        n >>= 1;
        if (n) pw = cmul(pw, pw, prec);
    }
    if (inv) acc = cinv(acc, prec);
    return acc;
}

// ---------------------------------------------------------------------------
// Spec-facing operation wrappers.

enum class ArithOp { add, sub, mul, div };

inline ComplexBall arith(ArithOp op, const ComplexBall& x, const ComplexBall& y,
                         const PrecisionContext& ctx) {
    switch (op) {
        case ArithOp::add: return cadd(x, y, ctx.work_bits);
        case ArithOp::sub: return csub(x, y, ctx.work_bits);
        case ArithOp::mul: return cmul(x, y, ctx.work_bits);
        case ArithOp::div: return cdiv(x, y, ctx.work_bits);
    }
    throw parameter_error("unknown arith op");
}

enum class ElementaryFn { exp, log, pow_principal };

inline ComplexBall elementary(ElementaryFn fn, const ComplexBall& z,
                              const PrecisionContext& ctx) {
    switch (fn) {
        case ElementaryFn::exp: return cexp(z, ctx.work_bits);
        case ElementaryFn::log: return clog(z, ctx.work_bits);
        default: throw parameter_error("pow_principal needs an exponent");
    }
}

inline ComplexBall elementary(ElementaryFn fn, const ComplexBall& z, const Rational& p,
                              const PrecisionContext& ctx) {
    if (fn != ElementaryFn::pow_principal) return elementary(fn, z, ctx);
    return cpow(z, Ball::from_rational(p, ctx.work_bits), ctx.work_bits);
}

/// Raised by refine() when the iteration cap is reached; carries the best
/// enclosure obtained so far.
struct precision_exhausted : std::runtime_error {
    precision_exhausted(std::string msg, ComplexBall b)
        : std::runtime_error(std::move(msg)), best(std::move(b)) {}
    ComplexBall best;
};

using EvalPlan = std::function<ComplexBall(const PrecisionContext&)>;

/// Re-runs a pure plan at increasing precision until the output radius meets
/// the target or the bit cap is exceeded.
inline ComplexBall refine(const EvalPlan& plan, mpfr_exp_t target_exp,
                          mpfr_prec_t start_bits = 64, mpfr_prec_t cap_bits = 1 << 20) {
    Real target = Real::pow2(1, target_exp, kRadPrec);
    ComplexBall best;
    bool have_best = false;
    for (mpfr_prec_t bits = start_bits;; bits *= 2) {
        if (bits > cap_bits) {
            if (!have_best) best = ComplexBall::zero(64);
            throw precision_exhausted("refine: precision cap reached", best);
        }
        PrecisionContext ctx(std::max<mpfr_prec_t>(64, bits), target_exp);
        ComplexBall out = plan(ctx);
        Real r = out.rad_ub();
        if (!have_best || mpfr_cmp(r.raw(), best.rad_ub().raw()) < 0) {
            best = out;
            have_best = true;
        }
        if (mpfr_cmp(r.raw(), target.raw()) <= 0) return best;
    }
}

}  // namespace gevrey
