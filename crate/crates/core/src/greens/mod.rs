//! The regularized Floquet Green's function `g_lambda(x, k)`, its renormalization constant and its
//! pole data.
//!
//! Two independent routes are available. The diagonal is defined by the log-free sum
//!
//! ```text
//! g(0, k) = (1/|cell|) sum_m [ 1/(|xi_m + k|^2 - lambda) - |xi_m|^2/(|xi_m|^4 + 1) ] - alpha0
//! ```
//!
//! which [`FloquetKernel`] evaluates; the log-subtracted cutoff form is exposed as
//! [`g_diag_cutoff`] for cross-checking. For `lambda < 0` both also agree with the real-space sum of
//! `K0(sqrt(-lambda) |x + v|) / 2pi`.

mod kernel;
mod realspace;

use num_complex::Complex;
use serde::Serialize;

pub(crate) use kernel::smooth_weight;
use kernel::PhaseMap;
pub use kernel::{FloquetKernel, KernelLevel};

use crate::error::{Error, Result};
use crate::lattice::{free_eigenvalues, LatticeConfig, Momentum, Vec2};
use crate::scalar::Real;

/// Default momentum cutoff of the kernel sums, in units of `|k1|`.
pub const DEFAULT_SHELLS: f64 = 96.0;

/// Tolerance for `|alpha - limit|` and `|phase sum| = mu` decisions.
pub const TAU_DISC: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreensEval<T> {
    pub value: Complex<T>,
    pub lambda: T,
    pub k: Momentum<T>,
    pub x: Vec2<T>,
    pub cutoff_radius: T,
    pub tail_bound: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoleData<T> {
    pub lambda_pole: T,
    pub mu: usize,
    pub phase_sum_abs: T,
    pub regular_diag: T,
    pub regular_offdiag: Complex<T>,
    /// `lim_{lambda -> lambda'-} g(0) - |g(x0)|`; `+inf` unless the phase sum has modulus `mu`.
    pub left_limit_minus: T,
}

impl<T: Real> PoleData<T> {
    /// True when the pole terms of `g(0)` and `|g(x0)|` cancel.
    pub fn aligned(&self) -> bool {
        (T::lit(self.mu as f64) - self.phase_sum_abs).abs() <= T::tol(TAU_DISC)
    }
}

/// Smooth radial cutoff: 1 up to `r`, 0 beyond `2r`, a raised-cosine ramp in `log2(rho/r)` between.
pub(crate) fn window_weight<T: Real>(rho: T, r: T) -> T {
    if rho <= r {
        return T::one();
    }
    if rho > r + r {
        return T::zero();
    }
    let t = (rho / r).log2();
    T::one() - (t - (T::TAU() * t).sin() / T::TAU())
}

/// Window average of `ln(rho) / 2pi` over `[r, 2r]`.
fn window_log<T: Real>(r: T) -> T {
    (r.ln() + T::LN_2() * T::lit(0.5)) / T::TAU()
}

/// Renormalization constant with an error estimate.
///
/// The log-divergent part reduces to `lim [ (1/|cell|) sum'_{|xi|<=rho} |xi|^-2 - ln(rho)/2pi ]`,
/// evaluated with the smooth window at `r` and `2r`; the rest converges like `|xi|^-6`.
pub fn alpha0_with_bound<T: Real>(cfg: &LatticeConfig<T>, shells: T) -> (T, T) {
    let kn = cfg.dual_norm();
    let area = cfg.cell_area();
    let r = shells * kn;
    let (mut e1, mut e2) = (T::zero(), T::zero());
    cfg.for_each_dual_in_disk(Vec2::zero(), T::lit(4.0) * r, |m, xi| {
        if m.m1 == 0 && m.m2 == 0 {
            return;
        }
        let p = xi.norm();
        let inv = T::one() / (p * p);
        e1 = e1 + inv * window_weight(p, r);
        e2 = e2 + inv * window_weight(p, r + r);
    });
    let e1 = e1 / area - window_log(r);
    let e2 = e2 / area - window_log(r + r);

    let big_p = (T::lit(16.0) * kn).max(T::lit(16.0));
    let mut rem = T::zero();
    cfg.for_each_dual_in_disk(Vec2::zero(), big_p, |m, xi| {
        if m.m1 == 0 && m.m2 == 0 {
            return;
        }
        let p2 = xi.norm_sqr();
        rem = rem + T::one() / (p2 * (p2 * p2 + T::one()));
    });
    rem = rem + T::PI() / (T::lit(2.0) * cfg.bz_area() * big_p.powi(4));
    (rem / area - e2, (e2 - e1).abs())
}

/// Renormalization constant; the cutoff is doubled up to twice while the estimate exceeds `tol`.
pub fn alpha0<T: Real>(cfg: &LatticeConfig<T>, tol: T) -> T {
    let mut shells = T::lit(32.0);
    let mut best = alpha0_with_bound(cfg, shells);
    for _ in 0..2 {
        if best.1 <= tol {
            break;
        }
        shells = shells + shells;
        best = alpha0_with_bound(cfg, shells);
    }
    best.0
}

/// Log-subtracted cutoff form of the diagonal, `(1/|cell|) sum_{|xi+k|<=rho} 1/(q - lambda) - ln(rho)/2pi`,
/// window-averaged over `rho in [r, 2r]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffEstimate<T> {
    pub at_r: T,
    pub at_2r: T,
    /// Richardson combination assuming a `c/r^2` tail.
    pub extrapolated: T,
}

pub fn g_diag_cutoff<T: Real>(
    cfg: &LatticeConfig<T>,
    lambda: T,
    k: &Momentum<T>,
    r: T,
) -> CutoffEstimate<T> {
    let kv = k.k();
    let (mut s1, mut s2) = (T::zero(), T::zero());
    cfg.for_each_dual_in_disk(-kv, T::lit(4.0) * r, |_, xi| {
        let q = (xi + kv).norm_sqr();
        let rho = q.sqrt();
        let t = T::one() / (q - lambda);
        s1 = s1 + t * window_weight(rho, r);
        s2 = s2 + t * window_weight(rho, r + r);
    });
    let area = cfg.cell_area();
    let at_r = s1 / area - window_log(r);
    let at_2r = s2 / area - window_log(r + r);
    CutoffEstimate {
        at_r,
        at_2r,
        extrapolated: at_2r + (at_2r - at_r) / T::lit(3.0),
    }
}

/// Shared state for Green's function evaluations on one lattice: the renormalization constant and
/// the kernel cutoff.
#[derive(Clone, Copy, Debug)]
pub struct Greens<T> {
    cfg: LatticeConfig<T>,
    alpha0: T,
    alpha0_bound: T,
    shells: T,
}

impl<T: Real> Greens<T> {
    pub fn new(cfg: &LatticeConfig<T>) -> Result<Self> {
        Self::with_shells(cfg, T::lit(DEFAULT_SHELLS))
    }

    /// `shells` sets the kernel cutoff radius in units of `|k1|`.
    pub fn with_shells(cfg: &LatticeConfig<T>, shells: T) -> Result<Self> {
        if !(shells >= T::lit(4.0)) {
            return Err(Error::InvalidArgument(format!(
                "cutoff of {} shells is too small",
                shells
            )));
        }
        let (alpha0, alpha0_bound) = alpha0_with_bound(cfg, T::lit(32.0));
        let g = Greens {
            cfg: *cfg,
            alpha0,
            alpha0_bound,
            shells,
        };
        g.self_check()?;
        Ok(g)
    }

    pub fn cfg(&self) -> &LatticeConfig<T> {
        &self.cfg
    }

    pub fn alpha0(&self) -> T {
        self.alpha0
    }

    pub fn alpha0_bound(&self) -> T {
        self.alpha0_bound
    }

    pub fn radius(&self) -> T {
        self.shells * self.cfg.dual_norm()
    }

    /// Compares the real-space and momentum-space values at `lambda = -5`, `k = 0`.
    fn self_check(&self) -> Result<()> {
        let cfg = &self.cfg;
        let s = T::lit(5.0);
        let allowed = T::lit(1e-8).max(T::epsilon() * T::lit(1e3));
        let x0 = cfg.x0;
        let pm = PhaseMap::new(cfg, x0);
        let r = T::lit(32.0) * cfg.dual_norm();
        let mut acc = Complex::new(T::zero(), T::zero());
        cfg.for_each_dual_in_disk(Vec2::zero(), r + r, |m, xi| {
            let p2 = xi.norm_sqr();
            acc = acc + pm.phase(m) * (smooth_weight(p2.sqrt(), r) / (p2 + s));
        });
        let momentum = acc / cfg.cell_area();
        let real = realspace::offdiag(cfg, s, x0, Vec2::zero());
        if (momentum - real).norm() > allowed {
            return Err(Error::RepresentationMismatch {
                real_space: real.re.as_f64(),
                momentum_space: momentum.re.as_f64(),
                allowed: allowed.as_f64(),
            });
        }
        let kern = self.kernel(&Momentum::gamma(), None, T::zero());
        let d_mom = kern.diag(-s);
        let d_real = realspace::diag(cfg, s, Vec2::zero());
        if (d_mom - d_real).abs() > allowed {
            return Err(Error::RepresentationMismatch {
                real_space: d_real.as_f64(),
                momentum_space: d_mom.as_f64(),
                allowed: allowed.as_f64(),
            });
        }
        Ok(())
    }

    /// Kernel at `k` valid up to `lambda_hi`, with off-diagonal data at `offsite` if given.
    pub fn kernel(
        &self,
        k: &Momentum<T>,
        offsite: Option<Vec2<T>>,
        lambda_hi: T,
    ) -> FloquetKernel<T> {
        FloquetKernel::build(
            &self.cfg,
            self.alpha0,
            *k,
            offsite,
            lambda_hi,
            self.radius(),
        )
    }

    fn kernel_with_radius(
        &self,
        k: &Momentum<T>,
        offsite: Option<Vec2<T>>,
        lambda_hi: T,
        radius: T,
    ) -> FloquetKernel<T> {
        FloquetKernel::build(&self.cfg, self.alpha0, *k, offsite, lambda_hi, radius)
    }

    /// The `n`-th free eigenvalue at `k` counted with multiplicity (1-based).
    pub fn free_level_with_multiplicity(&self, k: &Momentum<T>, n: usize) -> T {
        let area_b = self.cfg.bz_area();
        let kn = self.cfg.dual_norm();
        let guess = k.k().norm() + (T::lit(n as f64) * area_b / T::PI()).sqrt() + kn;
        let mut lim = guess * guess;
        loop {
            let levels = free_eigenvalues(&self.cfg, k, lim).expect("limit exceeds |k|^2");
            let mut count = 0;
            for l in &levels {
                count += l.mu();
                if count >= n {
                    return l.value;
                }
            }
            lim = lim * T::lit(2.0);
        }
    }

    /// Kernel whose window covers the `(jmax + 6)`-th free level.
    pub fn band_kernel(
        &self,
        k: &Momentum<T>,
        offsite: Option<Vec2<T>>,
        jmax: usize,
    ) -> FloquetKernel<T> {
        let hi = self.free_level_with_multiplicity(k, jmax + 6);
        self.kernel(k, offsite, hi)
    }

    fn adaptive<F>(
        &self,
        k: &Momentum<T>,
        offsite: Option<Vec2<T>>,
        lambda: T,
        tol: T,
        f: F,
    ) -> Result<GreensEval<T>>
    where
        F: Fn(&FloquetKernel<T>) -> (Complex<T>, T),
    {
        let hi = lambda.abs() + T::lit(2.0);
        let mut radius = self.radius();
        let mut best: Option<GreensEval<T>> = None;
        for _ in 0..3 {
            let kern = self.kernel_with_radius(k, offsite, hi, radius);
            kern.check(lambda)?;
            let (value, tail_bound) = f(&kern);
            let ev = GreensEval {
                value,
                lambda,
                k: *k,
                x: offsite.unwrap_or_else(Vec2::zero),
                cutoff_radius: kern.radius(),
                tail_bound,
            };
            let done = tail_bound <= tol;
            if best.is_none_or(|b| tail_bound < b.tail_bound) {
                best = Some(ev);
            }
            if done {
                break;
            }
            radius = radius + radius;
        }
        Ok(best.expect("at least one attempt"))
    }

    /// `g_lambda(0, k)`.
    pub fn g_diag(&self, lambda: T, k: &Momentum<T>, tol: T) -> Result<GreensEval<T>> {
        self.adaptive(k, None, lambda, tol, |kern| {
            (
                Complex::new(kern.diag(lambda), T::zero()),
                kern.diag_tail(lambda),
            )
        })
    }

    /// `g_lambda(x, k)` for `x` off the lattice.
    pub fn g_offdiag(
        &self,
        lambda: T,
        k: &Momentum<T>,
        x: Vec2<T>,
        tol: T,
    ) -> Result<GreensEval<T>> {
        let d = self.cfg.lattice_distance(x);
        if d < T::lit(1e-9) * self.cfg.a {
            return Err(Error::OnLattice(x.x.as_f64(), x.y.as_f64()));
        }
        self.adaptive(k, Some(x), lambda, tol, |kern| {
            (kern.off(lambda), kern.off_tail(lambda))
        })
    }

    /// Laurent data of `g` at the free eigenvalue `lambda_pole`, with `x0` as the off-lattice point.
    pub fn pole_data(&self, k: &Momentum<T>, lambda_pole: T) -> Result<PoleData<T>> {
        let kern = self.kernel(k, Some(self.cfg.x0), lambda_pole.abs() + T::lit(2.0));
        let j = kern
            .nearest_level(lambda_pole)
            .ok_or(Error::NotAFreeEigenvalue(lambda_pole.as_f64()))?;
        if (kern.levels()[j].value - lambda_pole).abs() > T::tol(1e-8) * lambda_pole.scale() {
            return Err(Error::NotAFreeEigenvalue(lambda_pole.as_f64()));
        }
        Ok(pole_data_at(&kern, j))
    }
}

/// Pole data for level `j` of a kernel built with `x0` as its off-lattice point.
pub fn pole_data_at<T: Real>(kern: &FloquetKernel<T>, j: usize) -> PoleData<T> {
    let lvl = &kern.levels()[j];
    let lp = lvl.value;
    let p = kern.level_phase_sum(j);
    let rd = kern.diag_regular(lp, j);
    let ro = kern.off_regular(lp, j);
    let mut pd = PoleData {
        lambda_pole: lp,
        mu: lvl.mu(),
        phase_sum_abs: p.norm(),
        regular_diag: rd,
        regular_offdiag: ro,
        left_limit_minus: T::infinity(),
    };
    if pd.aligned() {
        pd.left_limit_minus = rd - (p.conj() * ro).re / p.norm();
    }
    pd
}

pub fn g_diag<T: Real>(
    cfg: &LatticeConfig<T>,
    lambda: T,
    k: &Momentum<T>,
    tol: T,
) -> Result<GreensEval<T>> {
    Greens::new(cfg)?.g_diag(lambda, k, tol)
}

pub fn g_offdiag<T: Real>(
    cfg: &LatticeConfig<T>,
    lambda: T,
    k: &Momentum<T>,
    x: Vec2<T>,
    tol: T,
) -> Result<GreensEval<T>> {
    Greens::new(cfg)?.g_offdiag(lambda, k, x, tol)
}

pub fn pole_data<T: Real>(
    cfg: &LatticeConfig<T>,
    k: &Momentum<T>,
    lambda_pole: T,
) -> Result<PoleData<T>> {
    Greens::new(cfg)?.pole_data(k, lambda_pole)
}
