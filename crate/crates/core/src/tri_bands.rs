//! One point scatterer per cell of the triangular lattice.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::{FloquetKernel, Greens};
use crate::lattice::{LatticeConfig, Momentum, Vec2};
use crate::roots::{bisect_increasing, bracket_in_gap, solve_lowest, Bracket};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TriProvenance {
    Perturbed,
    Unperturbed,
    /// `alpha = inf`: a free level with its full multiplicity.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eigenvalue<T, P> {
    pub value: T,
    pub multiplicity: usize,
    pub provenance: P,
}

/// Eigenvalues at one `(k, alpha)`, ascending. The last entry may carry multiplicity past `jmax`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bands<T, P> {
    pub k: Momentum<T>,
    pub alpha: T,
    pub eigenvalues: Vec<Eigenvalue<T, P>>,
}

pub type BandSolution<T> = Bands<T, TriProvenance>;

impl<T: Real, P: Copy> Bands<T, P> {
    /// Values repeated by multiplicity.
    pub fn expanded(&self) -> Vec<T> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect()
    }

    /// `(value, multiplicity, provenance)` of band `j` (1-based).
    pub fn band(&self, j: usize) -> Option<&Eigenvalue<T, P>> {
        let mut n = 0;
        for e in &self.eigenvalues {
            n += e.multiplicity;
            if n >= j {
                return Some(e);
            }
        }
        None
    }

    /// The first `jmax` values repeated by multiplicity.
    pub fn lowest(&self, jmax: usize) -> Vec<T> {
        let mut v = self.expanded();
        v.truncate(jmax);
        v
    }
}

/// Drops entries once `jmax` values are covered.
pub(crate) fn truncate<T: Real, P>(
    mut ev: Vec<Eigenvalue<T, P>>,
    jmax: usize,
) -> Result<Vec<Eigenvalue<T, P>>> {
    ev.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("ordered eigenvalues"));
    let mut n = 0;
    let mut keep = 0;
    for e in &ev {
        if n >= jmax {
            break;
        }
        n += e.multiplicity;
        keep += 1;
    }
    if n < jmax {
        return Err(Error::InsufficientLevels {
            needed: jmax,
            found: n,
        });
    }
    ev.truncate(keep);
    Ok(ev)
}

/// Number of kernel levels whose gaps and poles can hold the lowest `jmax` eigenvalues, i.e. levels
/// up to `lambda_jmax^inf` plus the one after it.
pub(crate) fn levels_needed<T: Real>(kern: &FloquetKernel<T>, jmax: usize) -> Result<usize> {
    let levels = kern.levels();
    let mut count = 0;
    for (i, l) in levels.iter().enumerate() {
        count += l.mu();
        if count >= jmax {
            if i + 1 >= levels.len() || levels[i + 1].value > kern.window() {
                return Err(Error::InsufficientLevels {
                    needed: jmax,
                    found: count,
                });
            }
            return Ok(i + 2);
        }
    }
    Err(Error::InsufficientLevels {
        needed: jmax,
        found: count,
    })
}

pub(crate) fn free_spectrum<T: Real, P: Copy>(
    kern: &FloquetKernel<T>,
    jmax: usize,
    free: P,
) -> Result<Vec<Eigenvalue<T, P>>> {
    let n = levels_needed(kern, jmax)?;
    let ev = kern.levels()[..n]
        .iter()
        .map(|l| Eigenvalue {
            value: l.value,
            multiplicity: l.mu(),
            provenance: free,
        })
        .collect();
    truncate(ev, jmax)
}

/// Root of `alpha = F(lambda)` on `(lo, hi)` for `F` increasing from `-inf` to `+inf`.
pub(crate) fn gap_root<T: Real, F: Fn(T) -> T>(f: F, alpha: T, lo: T, hi: T) -> T {
    let g = |l: T| f(l) - alpha;
    match bracket_in_gap(g, lo, hi) {
        Bracket::Found(a, b) => bisect_increasing(g, a, b),
        Bracket::AtEnd(x) => x,
    }
}

/// Bands from a kernel built at `k` without an off-lattice point.
pub fn solve_tri_kernel<T: Real>(
    kern: &FloquetKernel<T>,
    alpha: T,
    jmax: usize,
) -> Result<BandSolution<T>> {
    if jmax == 0 {
        return Err(Error::InvalidArgument("jmax must be at least 1".into()));
    }
    if alpha.is_nan() || alpha == T::neg_infinity() {
        return Err(Error::InvalidArgument(format!(
            "alpha = {} is not allowed",
            alpha
        )));
    }
    let k = kern.k();
    if alpha == T::infinity() {
        return Ok(Bands {
            k,
            alpha,
            eigenvalues: free_spectrum(kern, jmax, TriProvenance::Free)?,
        });
    }
    let n = levels_needed(kern, jmax)?;
    let levels = kern.levels();
    let f = |l: T| kern.diag(l);
    let mut ev = Vec::with_capacity(2 * n);
    ev.push(Eigenvalue {
        value: solve_lowest(|l| f(l) - alpha, levels[0].value),
        multiplicity: 1,
        provenance: TriProvenance::Perturbed,
    });
    for i in 0..n {
        let l = &levels[i];
        if l.mu() >= 2 {
            ev.push(Eigenvalue {
                value: l.value,
                multiplicity: l.mu() - 1,
                provenance: TriProvenance::Unperturbed,
            });
        }
        if i + 1 < n {
            ev.push(Eigenvalue {
                value: gap_root(f, alpha, l.value, levels[i + 1].value),
                multiplicity: 1,
                provenance: TriProvenance::Perturbed,
            });
        }
    }
    Ok(Bands {
        k,
        alpha,
        eigenvalues: truncate(ev, jmax)?,
    })
}

/// Lowest `jmax` eigenvalues (with multiplicity) at `(k, alpha)`; `alpha = inf` gives the free spectrum.
pub fn solve_bands_tri<T: Real>(
    greens: &Greens<T>,
    k: &Momentum<T>,
    alpha: T,
    jmax: usize,
) -> Result<BandSolution<T>> {
    let mut extra = 0;
    loop {
        let kern = greens.band_kernel(k, None, jmax + extra);
        match solve_tri_kernel(&kern, alpha, jmax) {
            Err(Error::InsufficientLevels { .. }) if extra < 2 * (jmax + 6) => {
                extra = 2 * extra + jmax + 6
            }
            r => return r,
        }
    }
}

/// Slope of the Dirac cone at `K`, `4pi / 3a`.
pub fn cone_slope_tri<T: Real>(cfg: &LatticeConfig<T>) -> T {
    T::lit(4.0) * T::PI() / (T::lit(3.0) * cfg.a)
}

/// One-sided slopes `(nu_j(K + delta u) - nu_j(K)) / delta` along `directions` angles.
pub fn band_slopes_at<T: Real, S>(
    greens: &Greens<T>,
    solve: S,
    j: usize,
    delta: T,
    directions: &[T],
) -> Result<Vec<T>>
where
    S: Fn(&Greens<T>, &Momentum<T>) -> Result<Vec<T>>,
{
    let cfg = greens.cfg();
    let at_k = solve(greens, &cfg.momentum(cfg.dirac))?;
    let base = at_k[j - 1];
    directions
        .iter()
        .map(|&th| {
            let kv = cfg.dirac + Vec2::polar(th) * delta;
            let v = solve(greens, &cfg.momentum(kv))?;
            Ok((v[j - 1] - base) / delta)
        })
        .collect()
}

/// Angles `(i + 1/2) pi / 4`, `i = 0..8`.
pub fn eight_directions<T: Real>() -> Vec<T> {
    (0..8)
        .map(|i| (T::lit(i as f64) + T::lit(0.5)) * T::FRAC_PI_4())
        .collect()
}
