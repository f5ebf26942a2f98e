//! Finite-difference diagnostics of the Dirac cones at `K`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::Greens;
use crate::hc_bands::cone_slope_hc;
use crate::lattice::Vec2;
use crate::scalar::Real;
use crate::spectrum::{solve_lowest, LatticeKind};
use crate::tri_bands::{cone_slope_tri, eight_directions};

/// Cutoff (in `|k1|`) for the `c(lambda')` sums used by [`cone_report`].
pub const CONE_CUTOFF: u32 = 128;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeSample<T> {
    pub delta: T,
    pub directions: Vec<T>,
    /// One-sided slopes of the lower band of the pair, per direction.
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// `(max - min) / mean` of the slope magnitudes, worst of the two bands.
    pub isotropy_spread: T,
    /// Largest of `|lower + c| / c` and `|upper - c| / c`.
    pub max_rel_error: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeReport<T> {
    pub lattice: LatticeKind,
    pub alpha: T,
    /// 1-based band indices of the pair meeting at `K`.
    pub bands: (usize, usize),
    pub lambda_prime: T,
    pub c_formula: T,
    pub samples: Vec<ConeSample<T>>,
    /// `log(e1 / e2) / log(d1 / d2)` from the last two samples, when both errors are nonzero.
    pub convergence_order: Option<T>,
}

fn spread<T: Real>(v: &[T]) -> T {
    let mags: Vec<T> = v.iter().map(|x| x.abs()).collect();
    let lo = mags.iter().copied().fold(T::infinity(), T::min);
    let hi = mags.iter().copied().fold(T::zero(), T::max);
    let mean = mags.iter().copied().sum::<T>() / T::lit(mags.len() as f64);
    (hi - lo) / mean
}

/// Slopes of bands `(lower_band, lower_band + 1)` at `K` along eight directions for each `delta`,
/// compared against the predicted cone slope (`4pi/3a` triangular, `c(lambda')` honeycomb).
pub fn cone_report<T: Real>(
    greens: &Greens<T>,
    kind: LatticeKind,
    alpha: T,
    lower_band: usize,
    deltas: &[T],
) -> Result<ConeReport<T>> {
    if lower_band == 0 {
        return Err(Error::InvalidArgument("bands are numbered from 1".into()));
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > T::zero())) {
        return Err(Error::InvalidArgument("deltas must be positive".into()));
    }
    let cfg = greens.cfg();
    let jmax = lower_band + 1;
    let at_k = solve_lowest(greens, kind, &cfg.momentum(cfg.dirac), alpha, jmax)?;
    let lambda_prime = at_k[lower_band - 1];
    let other = at_k[lower_band];
    if !lambda_prime.is_finite()
        || (other - lambda_prime).abs() > T::tol(1e-8) * lambda_prime.scale()
    {
        return Err(Error::InvalidArgument(format!(
            "bands {} and {} do not meet at K ({} vs {})",
            lower_band, jmax, lambda_prime, other
        )));
    }
    let c_formula = match kind {
        LatticeKind::Triangular => cone_slope_tri(cfg),
        LatticeKind::Honeycomb => cone_slope_hc(cfg, lambda_prime, CONE_CUTOFF)?,
    };
    let directions = eight_directions::<T>();
    let mut samples = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let (mut lower, mut upper) = (Vec::new(), Vec::new());
        for &th in &directions {
            let k = cfg.momentum(cfg.dirac + Vec2::polar(th) * delta);
            let v = solve_lowest(greens, kind, &k, alpha, jmax)?;
            lower.push((v[lower_band - 1] - lambda_prime) / delta);
            upper.push((v[lower_band] - lambda_prime) / delta);
        }
        let isotropy_spread = spread(&lower).max(spread(&upper));
        let max_rel_error = lower
            .iter()
            .map(|s| (*s + c_formula).abs())
            .chain(upper.iter().map(|s| (*s - c_formula).abs()))
            .fold(T::zero(), T::max)
            / c_formula;
        samples.push(ConeSample {
            delta,
            directions: directions.clone(),
            lower,
            upper,
            isotropy_spread,
            max_rel_error,
        });
    }
    let convergence_order = match samples.as_slice() {
        [.., a, b]
            if a.max_rel_error > T::zero() && b.max_rel_error > T::zero() && a.delta != b.delta =>
        {
            Some((a.max_rel_error / b.max_rel_error).ln() / (a.delta / b.delta).ln())
        }
        _ => None,
    };
    Ok(ConeReport {
        lattice: kind,
        alpha,
        bands: (lower_band, jmax),
        lambda_prime,
        c_formula,
        samples,
        convergence_order,
    })
}
