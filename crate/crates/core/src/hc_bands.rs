//! Equal-strength point scatterers on both sublattices of the honeycomb lattice.
//!
//! Perturbed eigenvalues solve `alpha = g(0) - |g(x0)|` ([`HcProvenance::BranchMinus`]) or
//! `alpha = g(0) + |g(x0)|` ([`HcProvenance::BranchPlus`]). Both branch functions increase on every
//! gap of the free spectrum, since `|d/dlambda g(x0)| <= d/dlambda g(0)` term by term; the scan
//! below still verifies the sign pattern instead of relying on it.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::{pole_data_at, smooth_weight, FloquetKernel, Greens, PoleData, TAU_DISC};
use crate::lattice::{rotation_orbit, LatticeConfig, Momentum};
use crate::roots::tau_pole;
use crate::roots::{bisect_increasing, bracket_in_gap, solve_lowest, Bracket};
use crate::scalar::Real;
use crate::tri_bands::{free_spectrum, levels_needed, truncate, Bands, Eigenvalue};

/// Sample count per gap in the sign scan.
pub const GAP_SCAN_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HcProvenance {
    /// Root of `alpha = g(0) - |g(x0)|`.
    BranchMinus,
    /// Root of `alpha = g(0) + |g(x0)|`.
    BranchPlus,
    /// Common root of both branches (`g(x0) = 0`), multiplicity 2.
    BothBranches,
    UnperturbedCase1,
    UnperturbedCase2,
    UnperturbedCase3,
    /// `alpha = inf`.
    Free,
}

pub type HcBandSolution<T> = Bands<T, HcProvenance>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UnperturbedCase {
    Case1,
    Case2,
    Case3,
}

/// Case and multiplicity of a free level given its pole data.
pub fn classify_pole<T: Real>(pd: &PoleData<T>, alpha: T) -> (UnperturbedCase, usize) {
    let mu = pd.mu;
    if !pd.aligned() {
        (UnperturbedCase::Case1, mu.saturating_sub(2))
    } else if (alpha - pd.left_limit_minus).abs() <= T::tol(TAU_DISC) {
        (UnperturbedCase::Case3, mu)
    } else {
        (UnperturbedCase::Case2, mu - 1)
    }
}

/// Case and multiplicity of the free level `lambda_pole` at `k`; multiplicity 0 means the level is
/// not in the spectrum.
pub fn classify_unperturbed<T: Real>(
    greens: &Greens<T>,
    k: &Momentum<T>,
    lambda_pole: T,
    alpha: T,
) -> Result<(UnperturbedCase, usize)> {
    let pd = greens.pole_data(k, lambda_pole)?;
    Ok(classify_pole(&pd, alpha))
}

fn branch<T: Real>(kern: &FloquetKernel<T>, sign: T) -> impl Fn(T) -> T + '_ {
    move |l| kern.diag(l) + sign * kern.off(l).norm()
}

/// Counts sign changes of `f - alpha` on a uniform interior grid of `(lo, hi)`.
fn scan<T: Real, F: Fn(T) -> T>(f: &F, alpha: T, lo: T, hi: T) -> (usize, bool, bool) {
    let n = GAP_SCAN_POINTS;
    let w = hi - lo;
    let mut changes = 0;
    let mut first = None;
    let mut prev = None;
    for i in 0..n {
        let l = lo + w * (T::lit(i as f64) + T::lit(0.5)) / T::lit(n as f64);
        let s = f(l) > alpha;
        if first.is_none() {
            first = Some(s);
        }
        if let Some(p) = prev {
            if p != s {
                changes += 1;
            }
        }
        prev = Some(s);
    }
    (changes, first.unwrap_or(false), prev.unwrap_or(false))
}

/// Root of branch `f` on the gap `(lo, hi)` when one is expected, after verifying the scan.
fn branch_root_in_gap<T: Real, F: Fn(T) -> T>(
    f: F,
    alpha: T,
    lo: T,
    hi: T,
    expected: bool,
    name: &'static str,
) -> Result<Option<T>> {
    let (changes, first_above, last_above) = scan(&f, alpha, lo, hi);
    let fail = |detail: String| Error::UnresolvedRootCount {
        branch: name,
        lo: lo.as_f64(),
        hi: hi.as_f64(),
        detail,
    };
    if changes > 1 {
        return Err(fail(format!("{} sign changes on the scan grid", changes)));
    }
    if !expected {
        if changes == 1 {
            return Err(fail(
                "sign change where the pole limits allow no root".into(),
            ));
        }
        return Ok(None);
    }
    if changes == 1 && (first_above || !last_above) {
        return Err(fail("decreasing sign change".into()));
    }
    let g = |l: T| f(l) - alpha;
    let root = match bracket_in_gap(g, lo, hi) {
        Bracket::Found(a, b) => bisect_increasing(g, a, b),
        Bracket::AtEnd(x) => x,
    };
    Ok(Some(root))
}

fn push_perturbed<T: Real>(
    ev: &mut Vec<Eigenvalue<T, HcProvenance>>,
    kern: &FloquetKernel<T>,
    minus: Option<T>,
    plus: Option<T>,
) {
    let tiny = T::tol(TAU_DISC);
    match (minus, plus) {
        (Some(a), Some(b)) if kern.off(a).norm() < tiny || kern.off(b).norm() < tiny => {
            let v = if kern.off(a).norm() <= kern.off(b).norm() {
                a
            } else {
                b
            };
            ev.push(Eigenvalue {
                value: v,
                multiplicity: 2,
                provenance: HcProvenance::BothBranches,
            });
        }
        _ => {
            if let Some(a) = minus {
                ev.push(Eigenvalue {
                    value: a,
                    multiplicity: 1,
                    provenance: HcProvenance::BranchMinus,
                });
            }
            if let Some(b) = plus {
                ev.push(Eigenvalue {
                    value: b,
                    multiplicity: 1,
                    provenance: HcProvenance::BranchPlus,
                });
            }
        }
    }
}

/// Bands from a kernel built at `k` with `x0` as its off-lattice point.
pub fn solve_hc_kernel<T: Real>(
    kern: &FloquetKernel<T>,
    alpha: T,
    jmax: usize,
) -> Result<HcBandSolution<T>> {
    if jmax == 0 {
        return Err(Error::InvalidArgument("jmax must be at least 1".into()));
    }
    if alpha.is_nan() || alpha == T::neg_infinity() {
        return Err(Error::InvalidArgument(format!(
            "alpha = {} is not allowed",
            alpha
        )));
    }
    if kern.offsite() != Some(kern.cfg().x0) {
        return Err(Error::InvalidArgument(
            "honeycomb kernel needs x0 as its off-lattice point".into(),
        ));
    }
    let k = kern.k();
    if alpha == T::infinity() {
        return Ok(Bands {
            k,
            alpha,
            eigenvalues: free_spectrum(kern, jmax, HcProvenance::Free)?,
        });
    }
    let n = levels_needed(kern, jmax)?;
    let levels = kern.levels();
    let poles: Vec<PoleData<T>> = (0..n).map(|j| pole_data_at(kern, j)).collect();
    let tiny = T::tol(TAU_DISC);
    // Finite limit of F- at the left of a pole (= limit of F+ at its right), if any.
    let limit = |j: usize| {
        if poles[j].aligned() {
            Some(poles[j].left_limit_minus)
        } else {
            None
        }
    };
    let below = |c: Option<T>| c.is_none_or(|c| alpha < c - tiny);
    let above = |c: Option<T>| c.is_none_or(|c| alpha > c + tiny);

    let fm = branch(kern, -T::one());
    let fp = branch(kern, T::one());
    let mut ev = Vec::with_capacity(3 * n);

    let l1 = levels[0].value;
    let plus = solve_lowest(|l| fp(l) - alpha, l1);
    let minus = if below(limit(0)) {
        Some(solve_lowest(|l| fm(l) - alpha, l1))
    } else {
        None
    };
    push_perturbed(&mut ev, kern, minus, Some(plus));

    for i in 0..n {
        let (case, mult) = classify_pole(&poles[i], alpha);
        if mult > 0 {
            let provenance = match case {
                UnperturbedCase::Case1 => HcProvenance::UnperturbedCase1,
                UnperturbedCase::Case2 => HcProvenance::UnperturbedCase2,
                UnperturbedCase::Case3 => HcProvenance::UnperturbedCase3,
            };
            ev.push(Eigenvalue {
                value: levels[i].value,
                multiplicity: mult,
                provenance,
            });
        }
        if i + 1 < n {
            let (lo, hi) = (levels[i].value, levels[i + 1].value);
            let minus = branch_root_in_gap(&fm, alpha, lo, hi, below(limit(i + 1)), "g - |g(x0)|")?;
            let plus = branch_root_in_gap(&fp, alpha, lo, hi, above(limit(i)), "g + |g(x0)|")?;
            push_perturbed(&mut ev, kern, minus, plus);
        }
    }
    Ok(Bands {
        k,
        alpha,
        eigenvalues: truncate(ev, jmax)?,
    })
}

/// Lowest `jmax` eigenvalues (with multiplicity) of the honeycomb operator at `(k, alpha)`.
pub fn solve_bands_hc<T: Real>(
    greens: &Greens<T>,
    k: &Momentum<T>,
    alpha: T,
    jmax: usize,
) -> Result<HcBandSolution<T>> {
    let x0 = greens.cfg().x0;
    let mut extra = 0;
    loop {
        let kern = greens.band_kernel(k, Some(x0), jmax + extra);
        match solve_hc_kernel(&kern, alpha, jmax) {
            Err(Error::InsufficientLevels { .. }) if extra < 2 * (jmax + 6) => {
                extra = 2 * extra + jmax + 6
            }
            r => return r,
        }
    }
}

/// Cone slope `c(lambda')` at `K` from orbit-grouped sums over `|xi + K| <= cutoff |k1|`.
///
/// Both sums use the smooth radial window at `R/2` and `R` with a `c/R^2` Richardson step.
pub fn cone_slope_hc<T: Real>(cfg: &LatticeConfig<T>, lambda_prime: T, cutoff: u32) -> Result<T> {
    let kv = cfg.dirac;
    let nearest = {
        let mut best = (T::infinity(), T::zero());
        cfg.for_each_dual_in_disk(-kv, lambda_prime.abs().sqrt() + cfg.dual_norm(), |_, xi| {
            let q = (xi + kv).norm_sqr();
            if (q - lambda_prime).abs() < best.0 {
                best = ((q - lambda_prime).abs(), q);
            }
        });
        best
    };
    if nearest.0 < tau_pole(nearest.1) {
        return Err(Error::NearPole {
            lambda: lambda_prime.as_f64(),
            pole: nearest.1.as_f64(),
            distance: nearest.0.as_f64(),
        });
    }
    let radius = T::lit(cutoff.max(4) as f64) * cfg.dual_norm();
    let (rf, rh) = (radius * T::lit(0.5), radius * T::lit(0.25));
    let zero = Complex::new(T::zero(), T::zero());
    let (mut nf, mut nh, mut df, mut dh) = (zero, zero, T::zero(), T::zero());
    cfg.for_each_dual_in_disk(-kv, radius, |m, xi| {
        let orbit = rotation_orbit(m);
        if orbit.iter().any(|o| *o < m) {
            return;
        }
        let q = (xi + kv).norm_sqr();
        let inv2 = T::one() / ((q - lambda_prime) * (q - lambda_prime));
        let num = orbit
            .iter()
            .fold(zero, |s, o| s + o.x0_phase::<T>() * T::lit(o.m1 as f64))
            * inv2;
        let den = T::lit(3.0) * inv2;
        let rho = q.sqrt();
        let (wf, wh) = (smooth_weight(rho, rf), smooth_weight(rho, rh));
        nf = nf + num * wf;
        nh = nh + num * wh;
        df = df + den * wf;
        dh = dh + den * wh;
    });
    let third = T::one() / T::lit(3.0);
    let num = nf + (nf - nh) * third;
    let den = df + (df - dh) * third;
    Ok(T::lit(4.0) * T::PI() / cfg.a * num.norm() / den)
}
