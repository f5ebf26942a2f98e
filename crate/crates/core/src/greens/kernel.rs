//! Per-momentum precomputation of the Floquet Green's function on a spectral window.
//!
//! Terms with `q = |xi + k|^2` below a cutoff are kept explicitly. The remaining terms are expanded in
//! powers of `lambda`, so that after one pass over the dual lattice every evaluation inside the window
//! costs a few hundred flops. Below the window the real-space Bessel sums take over.

use num_complex::Complex;

use super::realspace;
use crate::error::{Error, Result};
use crate::lattice::{group_levels, DualIndex, LatticeConfig, Momentum, Vec2};
use crate::scalar::Real;

const MAX_MOMENTS: usize = 64;

/// A free level inside the kernel's explicit set.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelLevel<T> {
    pub value: T,
    pub indices: Vec<DualIndex>,
    range: (usize, usize),
}

impl<T> KernelLevel<T> {
    pub fn mu(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Clone, Debug)]
pub struct FloquetKernel<T> {
    cfg: LatticeConfig<T>,
    k: Momentum<T>,
    offsite: Option<Vec2<T>>,
    alpha0: T,
    window: T,
    radius: T,
    near_q: Vec<T>,
    near_w: Vec<Complex<T>>,
    near_f: T,
    levels: Vec<KernelLevel<T>>,
    diag_c: Vec<T>,
    diag_step: Vec<T>,
    off_c: Vec<Complex<T>>,
    off_step: Vec<T>,
    s0: T,
    anchor: Complex<T>,
}

/// `|xi|^2 / (|xi|^4 + 1)`.
#[inline]
pub(crate) fn reg<T: Real>(p2: T) -> T {
    p2 / (p2 * p2 + T::one())
}

/// `e^{i xi.x}` with the dual phase reduced mod 2pi before the trig call.
pub(crate) struct PhaseMap<T> {
    st: (T, T),
    exact_x0: bool,
}

impl<T: Real> PhaseMap<T> {
    pub(crate) fn new(cfg: &LatticeConfig<T>, x: Vec2<T>) -> Self {
        PhaseMap {
            st: cfg.direct_coords(x),
            exact_x0: x == cfg.x0,
        }
    }

    pub(crate) fn phase(&self, m: DualIndex) -> Complex<T> {
        if self.exact_x0 {
            return m.x0_phase();
        }
        let (s, t) = self.st;
        let u = T::lit(m.m1 as f64) * s;
        let v = T::lit(m.m2 as f64) * t;
        let f = (u - u.round()) + (v - v.round());
        let th = T::TAU() * f;
        Complex::new(th.cos(), th.sin())
    }
}

/// `C^inf` ramp from 1 at `r` to 0 at `2r`.
pub(crate) fn smooth_weight<T: Real>(rho: T, r: T) -> T {
    if rho <= r {
        return T::one();
    }
    if rho >= r + r {
        return T::zero();
    }
    let t = (rho - r) / r;
    let psi = |u: T| (-T::one() / u).exp();
    let (a, b) = (psi(t), psi(T::one() - t));
    b / (a + b)
}

fn richardson<T: Real>(full: T, half: T, p: i32) -> T {
    full + (full - half) / (T::lit(2.0).powi(p) - T::one())
}

/// Extrapolated value from the `(R/2, R)` pair, and its distance to the `(R/4, R/2)` estimate.
fn extrapolate<T: Real>(full: T, half: T, quarter: T, p: i32) -> (T, T) {
    let e1 = richardson(full, half, p);
    let e2 = richardson(half, quarter, p);
    (e1, (e1 - e2).abs())
}

fn order(n: usize) -> i32 {
    (2 * n).max(2) as i32
}

impl<T: Real> FloquetKernel<T> {
    /// Builds the kernel at `k` valid for `|lambda| <= window` (and every `lambda < -window`).
    pub(crate) fn build(
        cfg: &LatticeConfig<T>,
        alpha0: T,
        k: Momentum<T>,
        offsite: Option<Vec2<T>>,
        lambda_hi: T,
        radius: T,
    ) -> Self {
        let kv = k.k();
        let kn = cfg.dual_norm();
        let window = lambda_hi.abs().max(T::lit(2.0) * kn * kn);
        let q_keep = T::lit(3.0) * window;
        let q_probe = T::lit(3.3) * window;
        let radius = radius.max(T::lit(8.0) * (q_probe.sqrt() + kv.norm()));
        let phases = offsite.map(|x| {
            (
                PhaseMap::new(cfg, x),
                Complex::from_polar(T::one(), kv.dot(x)),
            )
        });
        let w_of = |m: DualIndex| match &phases {
            Some((pm, ek)) => pm.phase(m) * ek,
            None => Complex::new(T::one(), T::zero()),
        };

        let mut cand = Vec::new();
        cfg.for_each_dual_in_disk(-kv, q_probe.sqrt(), |m, xi| {
            cand.push(((xi + kv).norm_sqr(), m))
        });
        let groups = group_levels(cand);
        let kept = groups.iter().take_while(|g| g.value <= q_keep).count();
        let q_cut = match (groups.get(kept.wrapping_sub(1)), groups.get(kept)) {
            (Some(a), Some(b)) => (a.value + b.value) * T::lit(0.5),
            _ => q_probe,
        };

        let mut near_q = Vec::new();
        let mut near_w = Vec::new();
        let mut near_f = T::zero();
        let mut levels = Vec::with_capacity(kept);
        for g in groups.into_iter().take(kept) {
            let start = near_q.len();
            for &m in &g.indices {
                let xi = cfg.dual(m);
                near_q.push((xi + kv).norm_sqr());
                near_f = near_f + reg(xi.norm_sqr());
                if offsite.is_some() {
                    near_w.push(w_of(m));
                }
            }
            levels.push(KernelLevel {
                value: g.value,
                indices: g.indices,
                range: (start, near_q.len()),
            });
        }

        let s0 = T::lit(10.0).max(T::lit(2.0) * window);
        let small = T::epsilon() * T::lit(1e-3);
        let ratio = window / q_cut;
        let nmom = ((small.ln() / ratio.ln())
            .ceil()
            .to_usize()
            .unwrap_or(MAX_MOMENTS)
            + 1)
        .min(MAX_MOMENTS);

        let zero_c = Complex::new(T::zero(), T::zero());
        let mut d_full = vec![T::zero(); nmom + 1];
        let mut d_half = vec![T::zero(); nmom + 1];
        let mut o_full = vec![zero_c; nmom + 1];
        let mut o_half = vec![zero_c; nmom + 1];
        let mut d_quarter = vec![T::zero(); nmom + 1];
        let mut o_quarter = vec![zero_c; nmom + 1];
        let r2 = radius * radius;
        let (rf, rh, rq) = (
            radius * T::lit(0.5),
            radius * T::lit(0.25),
            radius * T::lit(0.125),
        );
        cfg.for_each_dual_in_disk(Vec2::zero(), radius + kv.norm(), |m, xi| {
            let q = (xi + kv).norm_sqr();
            if q <= q_cut {
                return;
            }
            let p2 = xi.norm_sqr();
            if p2 <= r2 {
                let p = p2.sqrt();
                let t = T::one() / q - reg(p2);
                d_full[0] = d_full[0] + t * smooth_weight(p, rf);
                d_half[0] = d_half[0] + t * smooth_weight(p, rh);
                d_quarter[0] = d_quarter[0] + t * smooth_weight(p, rq);
            }
            if q > r2 {
                return;
            }
            let rho = q.sqrt();
            let (cf, ch, cq) = (
                smooth_weight(rho, rf),
                smooth_weight(rho, rh),
                smooth_weight(rho, rq),
            );
            let w = if offsite.is_some() {
                Some(w_of(m))
            } else {
                None
            };
            if let Some(w) = w {
                let t = w * (s0 / (q * (q + s0)));
                o_full[0] = o_full[0] + t * cf;
                o_half[0] = o_half[0] + t * ch;
                o_quarter[0] = o_quarter[0] + t * cq;
            }
            let r = window / q;
            let mut t = T::one() / q;
            let mut pw = T::one();
            for n in 1..=nmom {
                t = t / q;
                pw = pw * r;
                d_full[n] = d_full[n] + t * cf;
                d_half[n] = d_half[n] + t * ch;
                d_quarter[n] = d_quarter[n] + t * cq;
                if let Some(w) = w {
                    o_full[n] = o_full[n] + w * (t * cf);
                    o_half[n] = o_half[n] + w * (t * ch);
                    o_quarter[n] = o_quarter[n] + w * (t * cq);
                }
                if pw < small {
                    break;
                }
            }
        });

        let mut diag_c = Vec::with_capacity(nmom + 1);
        let mut diag_step = Vec::with_capacity(nmom + 1);
        let mut off_c = Vec::new();
        let mut off_step = Vec::new();
        for n in 0..=nmom {
            let (v, s) = extrapolate(d_full[n], d_half[n], d_quarter[n], order(n));
            diag_c.push(v);
            diag_step.push(s);
            if offsite.is_some() {
                let (re, sr) = extrapolate(o_full[n].re, o_half[n].re, o_quarter[n].re, order(n));
                let (im, si) = extrapolate(o_full[n].im, o_half[n].im, o_quarter[n].im, order(n));
                off_c.push(Complex::new(re, im));
                off_step.push(sr.hypot(si));
            }
        }
        let anchor = match offsite {
            Some(x) => realspace::offdiag(cfg, s0, x, kv),
            None => zero_c,
        };
        FloquetKernel {
            cfg: *cfg,
            k,
            offsite,
            alpha0,
            window,
            radius,
            near_q,
            near_w,
            near_f,
            levels,
            diag_c,
            diag_step,
            off_c,
            off_step,
            s0,
            anchor,
        }
    }

    pub fn k(&self) -> Momentum<T> {
        self.k
    }

    pub fn cfg(&self) -> &LatticeConfig<T> {
        &self.cfg
    }

    pub fn offsite(&self) -> Option<Vec2<T>> {
        self.offsite
    }

    /// Evaluations are valid for `lambda <= window`.
    pub fn window(&self) -> T {
        self.window
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn alpha0(&self) -> T {
        self.alpha0
    }

    /// Free levels held explicitly, ascending; every level below `window` is present.
    pub fn levels(&self) -> &[KernelLevel<T>] {
        &self.levels
    }

    fn below_window(&self, lambda: T) -> bool {
        lambda < -self.window
    }

    fn far<C>(c: &[C], lambda: T) -> C
    where
        C: Copy + std::ops::Mul<T, Output = C> + std::ops::Add<Output = C>,
    {
        let n = c.len() - 1;
        let mut acc = c[n];
        for j in (1..n).rev() {
            acc = acc * lambda + c[j];
        }
        acc * lambda + c[0]
    }

    fn tail(step: &[T], lambda: T) -> T {
        let l = lambda.abs();
        let mut pw = T::one();
        let mut acc = T::zero();
        for &s in step {
            acc = acc + s * pw;
            pw = pw * l;
        }
        acc
    }

    fn diag_impl(&self, lambda: T, skip: Option<usize>) -> T {
        if self.below_window(lambda) {
            return realspace::diag(&self.cfg, -lambda, self.k.k());
        }
        let (a, b) = skip.map(|j| self.levels[j].range).unwrap_or((0, 0));
        let mut near = T::zero();
        for (i, &q) in self.near_q.iter().enumerate() {
            if i < a || i >= b {
                near = near + T::one() / (q - lambda);
            }
        }
        (near - self.near_f + Self::far(&self.diag_c, lambda)) / self.cfg.cell_area() - self.alpha0
    }

    fn off_impl(&self, lambda: T, skip: Option<usize>) -> Complex<T> {
        let x = match self.offsite {
            Some(x) => x,
            None => return Complex::new(T::nan(), T::nan()),
        };
        if self.below_window(lambda) {
            return realspace::offdiag(&self.cfg, -lambda, x, self.k.k());
        }
        let (a, b) = skip.map(|j| self.levels[j].range).unwrap_or((0, 0));
        let mut near = Complex::new(T::zero(), T::zero());
        for (i, (&q, &w)) in self.near_q.iter().zip(&self.near_w).enumerate() {
            let anchor = -T::one() / (q + self.s0);
            let t = if i < a || i >= b {
                T::one() / (q - lambda) + anchor
            } else {
                anchor
            };
            near = near + w * t;
        }
        self.anchor + (near + Self::far(&self.off_c, lambda)) / self.cfg.cell_area()
    }

    /// `g_lambda(0, k)`; no pole check.
    pub fn diag(&self, lambda: T) -> T {
        self.diag_impl(lambda, None)
    }

    /// `g_lambda(x, k)` at the kernel's off-lattice point; no pole check. NaN without one.
    pub fn off(&self, lambda: T) -> Complex<T> {
        self.off_impl(lambda, None)
    }

    /// Diagonal value with the pole terms of level `j` removed.
    pub fn diag_regular(&self, lambda: T, j: usize) -> T {
        self.diag_impl(lambda, Some(j))
    }

    /// Off-diagonal value with the pole terms of level `j` removed.
    pub fn off_regular(&self, lambda: T, j: usize) -> Complex<T> {
        self.off_impl(lambda, Some(j))
    }

    /// `sum_j e^{i (xi_j + k).x}` over level `j`.
    pub fn level_phase_sum(&self, j: usize) -> Complex<T> {
        let (a, b) = self.levels[j].range;
        self.near_w[a..b]
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |s, &w| s + w)
    }

    pub fn diag_tail(&self, lambda: T) -> T {
        if self.below_window(lambda) {
            return T::zero();
        }
        Self::tail(&self.diag_step, lambda) / self.cfg.cell_area()
    }

    pub fn off_tail(&self, lambda: T) -> T {
        if self.below_window(lambda) || self.offsite.is_none() {
            return T::zero();
        }
        Self::tail(&self.off_step, lambda) / self.cfg.cell_area()
    }

    /// Index of the level nearest to `lambda`.
    pub fn nearest_level(&self, lambda: T) -> Option<usize> {
        let i = self.levels.partition_point(|l| l.value < lambda);
        let mut best: Option<usize> = None;
        for j in [i.wrapping_sub(1), i] {
            if let Some(l) = self.levels.get(j) {
                match best {
                    Some(b)
                        if (self.levels[b].value - lambda).abs() <= (l.value - lambda).abs() => {}
                    _ => best = Some(j),
                }
            }
        }
        best
    }

    /// Rejects `lambda` within `1e-7 max(1, |lambda'|)` of a free level, or outside the window.
    pub fn check(&self, lambda: T) -> Result<()> {
        if lambda > self.window {
            return Err(Error::InvalidArgument(format!(
                "lambda = {} above the kernel window {}",
                lambda, self.window
            )));
        }
        if let Some(j) = self.nearest_level(lambda) {
            let p = self.levels[j].value;
            let d = (lambda - p).abs();
            if d < T::tol(1e-7) * p.scale() {
                return Err(Error::NearPole {
                    lambda: lambda.as_f64(),
                    pole: p.as_f64(),
                    distance: d.as_f64(),
                });
            }
        }
        Ok(())
    }
}
