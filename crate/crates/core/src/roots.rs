//! Bracketing and one-dimensional search helpers.

use crate::scalar::Real;

/// Root tolerance `1e-10 max(1, |lambda|)`.
pub fn tau_root<T: Real>(lambda: T) -> T {
    T::tol(1e-10) * lambda.scale()
}

/// Pole standoff `1e-7 max(1, |lambda'|)`.
pub fn tau_pole<T: Real>(pole: T) -> T {
    T::tol(1e-7) * pole.scale()
}

/// Bisection for `f` increasing with `f(lo) < 0 < f(hi)`. Wide negative brackets are split
/// geometrically so that roots near `-1e300` cost as little as roots near zero.
pub fn bisect_increasing<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T) -> T {
    for _ in 0..400 {
        let mid = if hi < T::zero() && lo / hi > T::lit(4.0) {
            -((-lo).sqrt() * (-hi).sqrt())
        } else {
            lo + (hi - lo) * T::lit(0.5)
        };
        if hi - lo <= tau_root(mid) || mid <= lo || mid >= hi {
            return mid;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) * T::lit(0.5)
}

/// Where an increasing function crosses zero relative to a bracket search.
pub enum Bracket<T> {
    Found(T, T),
    /// No sign change before reaching the standoff limit; the root is within it of this end.
    AtEnd(T),
}

/// Brackets the zero of an increasing `f` on `(lo_end, hi_end)` whose limits are `-inf` at `lo_end`
/// and `+inf` at `hi_end`, halving the standoff from `w/8` down to the pole tolerance.
pub fn bracket_in_gap<T: Real, F: FnMut(T) -> T>(mut f: F, lo_end: T, hi_end: T) -> Bracket<T> {
    let w = hi_end - lo_end;
    let mut dl = w / T::lit(8.0);
    let mut dh = dl;
    let (ml, mh) = (tau_pole(lo_end), tau_pole(hi_end));
    let mut lo = lo_end + dl;
    let mut hi = hi_end - dh;
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..60 {
        if flo < T::zero() && fhi > T::zero() {
            return Bracket::Found(lo, hi);
        }
        if flo >= T::zero() {
            if dl <= ml {
                return Bracket::AtEnd(lo_end + ml);
            }
            hi = lo;
            fhi = flo;
            dl = (dl * T::lit(0.5)).max(ml);
            lo = lo_end + dl;
            flo = f(lo);
        } else {
            if dh <= mh {
                return Bracket::AtEnd(hi_end - mh);
            }
            lo = hi;
            flo = fhi;
            dh = (dh * T::lit(0.5)).max(mh);
            hi = hi_end - dh;
            fhi = f(hi);
        }
    }
    if flo < T::zero() && fhi > T::zero() {
        Bracket::Found(lo, hi)
    } else if flo >= T::zero() {
        Bracket::AtEnd(lo_end + ml)
    } else {
        Bracket::AtEnd(hi_end - mh)
    }
}

/// Zero of an increasing `f` on `(-inf, hi_end)` with `f -> -inf` at the left and `+inf` at
/// `hi_end`. Returns `-inf` when the root lies beyond the representable range.
pub fn solve_lowest<T: Real, F: FnMut(T) -> T>(mut f: F, hi_end: T) -> T {
    let mh = tau_pole(hi_end);
    let mut dh = T::one().max(hi_end.abs()) / T::lit(8.0);
    let mut hi = hi_end - dh;
    let mut fhi = f(hi);
    while fhi <= T::zero() {
        if dh <= mh {
            return hi_end - mh;
        }
        dh = (dh * T::lit(0.5)).max(mh);
        hi = hi_end - dh;
        fhi = f(hi);
    }
    let mut d = T::one().max(hi_end.abs());
    let mut lo = hi_end - d;
    while f(lo) >= T::zero() {
        hi = lo;
        d = d * T::lit(16.0);
        lo = hi_end - d;
        if !lo.is_finite() || lo < -T::max_value() / T::lit(32.0) {
            return T::neg_infinity();
        }
    }
    bisect_increasing(f, lo, hi)
}

/// Golden-section minimum of `f` on `[a, b]`.
pub fn golden_min<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let g = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * g;
    let mut d = a + (b - a) * g;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * g;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * g;
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
