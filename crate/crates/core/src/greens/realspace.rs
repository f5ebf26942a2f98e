//! Exponentially convergent real-space sums for negative spectral parameter.

use num_complex::Complex;

use crate::bessel::k0;
use crate::lattice::{LatticeConfig, Vec2};
use crate::scalar::Real;

/// `K0` is below `1e-20` past this argument.
const BESSEL_REACH: f64 = 45.0;

/// `sum_v K0(sqrt(s) |x + v|) e^{-i k.v} / 2pi` over lattice vectors `v`, skipping `x + v = 0`.
pub(crate) fn bessel_sum<T: Real>(
    cfg: &LatticeConfig<T>,
    s: T,
    x: Vec2<T>,
    k: Vec2<T>,
) -> Complex<T> {
    let rs = s.sqrt();
    let reach = T::lit(BESSEL_REACH) / rs;
    let (cs, ct) = cfg.direct_coords(-x);
    let span = (reach / (cfg.a * T::lit(3f64.sqrt() / 2.0)))
        .ceil()
        .to_i64()
        .unwrap_or(0)
        + 1;
    let (c1, c2) = (
        cs.round().to_i64().unwrap_or(0),
        ct.round().to_i64().unwrap_or(0),
    );
    let tiny = cfg.a * T::lit(1e-12);
    let mut acc = Complex::new(T::zero(), T::zero());
    for n1 in c1 - span..=c1 + span {
        for n2 in c2 - span..=c2 + span {
            let v = cfg.site(n1, n2);
            let d = (x + v).norm();
            if d > reach || d < tiny {
                continue;
            }
            let ph = -k.dot(v);
            acc = acc + Complex::new(ph.cos(), ph.sin()) * k0(rs * d);
        }
    }
    acc / T::TAU()
}

/// Diagonal value at `lambda = -s`.
pub(crate) fn diag<T: Real>(cfg: &LatticeConfig<T>, s: T, k: Vec2<T>) -> T {
    bessel_sum(cfg, s, Vec2::zero(), k).re - s.ln() / (T::lit(4.0) * T::PI())
}

/// Off-diagonal value at `lambda = -s`.
pub(crate) fn offdiag<T: Real>(cfg: &LatticeConfig<T>, s: T, x: Vec2<T>, k: Vec2<T>) -> Complex<T> {
    bessel_sum(cfg, s, x, k)
}
