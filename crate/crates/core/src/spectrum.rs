//! Band spectra over the Brillouin zone: mesh extrema, predicted intervals, and the alpha scans
//! built on them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::{FloquetKernel, Greens};
use crate::hc_bands::{solve_bands_hc, solve_hc_kernel};
use crate::lattice::{bz_mesh, Momentum, Vec2};
use crate::roots::golden_min;
use crate::scalar::Real;
use crate::tri_bands::{solve_bands_tri, solve_tri_kernel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Triangular,
    Honeycomb,
}

impl LatticeKind {
    /// Largest number of disjoint intervals the spectrum may have.
    pub fn max_intervals(self) -> usize {
        match self {
            LatticeKind::Triangular => 2,
            LatticeKind::Honeycomb => 3,
        }
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" | "tri" => Ok(LatticeKind::Triangular),
            "honeycomb" | "hc" => Ok(LatticeKind::Honeycomb),
            _ => Err(Error::InvalidArgument(format!("unknown lattice '{}'", s))),
        }
    }
}

/// Lowest `jmax` eigenvalues with multiplicity at `(k, alpha)`.
pub fn solve_lowest<T: Real>(
    greens: &Greens<T>,
    kind: LatticeKind,
    k: &Momentum<T>,
    alpha: T,
    jmax: usize,
) -> Result<Vec<T>> {
    Ok(match kind {
        LatticeKind::Triangular => solve_bands_tri(greens, k, alpha, jmax)?.lowest(jmax),
        LatticeKind::Honeycomb => solve_bands_hc(greens, k, alpha, jmax)?.lowest(jmax),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    /// `+inf` for the final ray.
    pub hi: T,
}

/// Observed range of band `band` (1-based) over the mesh after polishing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandRange<T> {
    pub band: usize,
    pub min: T,
    pub max: T,
    pub argmin: Vec2<T>,
    pub argmax: Vec2<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport<T> {
    pub lattice: LatticeKind,
    pub alpha: T,
    pub mesh_n: usize,
    pub jmax: usize,
    /// Intervals predicted from the values at the special points.
    pub predicted: Vec<Interval<T>>,
    pub observed: Vec<BandRange<T>>,
    /// Union of the observed ranges, the top band extended to `+inf`.
    pub intervals: Vec<Interval<T>>,
    pub flags: Vec<String>,
}

impl<T: Real> SpectrumReport<T> {
    /// Widths of the gaps between consecutive merged intervals.
    pub fn gaps(&self) -> Vec<T> {
        self.intervals
            .windows(2)
            .map(|w| w[1].lo - w[0].hi)
            .collect()
    }

    /// Gap between band 1 and band 2 (zero when they overlap).
    pub fn gap_1_2(&self) -> T {
        match (self.observed.first(), self.observed.get(1)) {
            (Some(b1), Some(b2)) => (b2.min - b1.max).max(T::zero()),
            _ => T::zero(),
        }
    }
}

/// Merges closed intervals that overlap or touch within `tol` times the local scale.
pub fn merge_intervals<T: Real>(mut v: Vec<Interval<T>>, tol: T) -> Vec<Interval<T>> {
    v.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("ordered endpoints"));
    let mut out: Vec<Interval<T>> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi + tol * last.hi.scale() => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

fn merge_tol<T: Real>() -> T {
    T::tol(1e-9)
}

/// Band solutions over [`bz_mesh`], with kernels built once and reused for every `alpha`.
pub struct BandMesh<T> {
    greens: Greens<T>,
    mesh_n: usize,
    jmax: usize,
    points: Vec<Momentum<T>>,
    kernels: Vec<FloquetKernel<T>>,
}

impl<T: Real> BandMesh<T> {
    pub fn new(greens: &Greens<T>, mesh_n: usize, jmax: usize) -> Result<Self> {
        if mesh_n < 2 {
            return Err(Error::InvalidArgument(format!(
                "mesh_n = {} is below 2",
                mesh_n
            )));
        }
        if jmax == 0 {
            return Err(Error::InvalidArgument("jmax must be at least 1".into()));
        }
        let x0 = greens.cfg().x0;
        let points = bz_mesh(greens.cfg(), mesh_n);
        let kernels = points
            .par_iter()
            .map(|k| greens.band_kernel(k, Some(x0), jmax))
            .collect();
        Ok(BandMesh {
            greens: *greens,
            mesh_n,
            jmax,
            points,
            kernels,
        })
    }

    pub fn greens(&self) -> &Greens<T> {
        &self.greens
    }

    pub fn points(&self) -> &[Momentum<T>] {
        &self.points
    }

    pub fn jmax(&self) -> usize {
        self.jmax
    }

    pub fn mesh_n(&self) -> usize {
        self.mesh_n
    }

    fn solve_point(&self, i: usize, kind: LatticeKind, alpha: T) -> Result<Vec<T>> {
        let kern = &self.kernels[i];
        let r = match kind {
            LatticeKind::Triangular => {
                solve_tri_kernel(kern, alpha, self.jmax).map(|b| b.lowest(self.jmax))
            }
            LatticeKind::Honeycomb => {
                solve_hc_kernel(kern, alpha, self.jmax).map(|b| b.lowest(self.jmax))
            }
        };
        match r {
            Err(Error::InsufficientLevels { .. }) => {
                solve_lowest(&self.greens, kind, &self.points[i], alpha, self.jmax)
            }
            r => r,
        }
    }

    /// Lowest `jmax` eigenvalues at every mesh point, in mesh order.
    pub fn solve(&self, kind: LatticeKind, alpha: T) -> Result<Vec<Vec<T>>> {
        (0..self.points.len())
            .into_par_iter()
            .map(|i| self.solve_point(i, kind, alpha))
            .collect()
    }

    /// Golden-section refinement of a band extremum along both mesh axes through `k`.
    fn polish(
        &self,
        kind: LatticeKind,
        alpha: T,
        band: usize,
        k: Vec2<T>,
        value: T,
        maximize: bool,
    ) -> Result<(Vec2<T>, T)> {
        let cfg = self.greens.cfg();
        let sign = if maximize { -T::one() } else { T::one() };
        let h = T::one() / T::lit(self.mesh_n as f64);
        let mut best = (k, value);
        for axis in [cfg.k1, cfg.k2] {
            let centre = best.0;
            let mut failure = None;
            let f = |u: T| {
                let p = cfg.momentum(centre + axis * u);
                match solve_lowest(&self.greens, kind, &p, alpha, band) {
                    Ok(v) => sign * v[band - 1],
                    Err(e) => {
                        failure.get_or_insert(e);
                        T::infinity()
                    }
                }
            };
            let (u, fu) = golden_min(f, -h, h, 16);
            if let Some(e) = failure {
                return Err(e);
            }
            // Improvements below the root tolerance are noise.
            if fu < sign * best.1 - T::tol(1e-10) * best.1.scale() {
                best = (cfg.fold(centre + axis * u), sign * fu);
            }
        }
        Ok(best)
    }

    /// Observed per-band ranges. Bands `1..=polish_bands` have their extrema polished.
    pub fn band_ranges(
        &self,
        kind: LatticeKind,
        alpha: T,
        polish_bands: usize,
    ) -> Result<Vec<BandRange<T>>> {
        let values = self.solve(kind, alpha)?;
        let mut ranges = Vec::with_capacity(self.jmax);
        for j in 0..self.jmax {
            let (mut imin, mut imax) = (0, 0);
            for (i, v) in values.iter().enumerate() {
                if v[j] < values[imin][j] {
                    imin = i;
                }
                if v[j] > values[imax][j] {
                    imax = i;
                }
            }
            let mut r = BandRange {
                band: j + 1,
                min: values[imin][j],
                max: values[imax][j],
                argmin: self.points[imin].k(),
                argmax: self.points[imax].k(),
            };
            if j < polish_bands && r.min.is_finite() {
                (r.argmin, r.min) = self.polish(kind, alpha, j + 1, r.argmin, r.min, false)?;
                (r.argmax, r.max) = self.polish(kind, alpha, j + 1, r.argmax, r.max, true)?;
            }
            ranges.push(r);
        }
        Ok(ranges)
    }

    /// Spectrum report with every band polished.
    pub fn spectrum(&self, kind: LatticeKind, alpha: T) -> Result<SpectrumReport<T>> {
        self.spectrum_with(kind, alpha, self.jmax)
    }

    pub fn spectrum_with(
        &self,
        kind: LatticeKind,
        alpha: T,
        polish_bands: usize,
    ) -> Result<SpectrumReport<T>> {
        let min_jmax = match kind {
            LatticeKind::Triangular => 2,
            LatticeKind::Honeycomb => 5,
        };
        if self.jmax < min_jmax {
            return Err(Error::InvalidArgument(format!(
                "spectrum needs jmax >= {}",
                min_jmax
            )));
        }
        let observed = self.band_ranges(kind, alpha, polish_bands)?;
        let mut pieces: Vec<Interval<T>> = observed[..self.jmax - 1]
            .iter()
            .map(|r| Interval {
                lo: r.min,
                hi: r.max,
            })
            .collect();
        pieces.push(Interval {
            lo: observed[self.jmax - 1].min,
            hi: T::infinity(),
        });
        let intervals = merge_intervals(pieces, merge_tol());
        let (predicted, mut flags) = match kind {
            LatticeKind::Triangular => self.tri_checks(alpha, &observed)?,
            LatticeKind::Honeycomb => {
                let cfg = self.greens.cfg();
                let at_gamma =
                    solve_lowest(&self.greens, kind, &cfg.momentum(cfg.gamma()), alpha, 1)?[0];
                hc_checks(at_gamma, &observed)
            }
        };
        if intervals.len() > kind.max_intervals() {
            flags.push(format!("too-many-intervals: {} observed", intervals.len()));
        }
        Ok(SpectrumReport {
            lattice: kind,
            alpha,
            mesh_n: self.mesh_n,
            jmax: self.jmax,
            predicted,
            observed,
            intervals,
            flags,
        })
    }

    fn tri_checks(
        &self,
        alpha: T,
        observed: &[BandRange<T>],
    ) -> Result<(Vec<Interval<T>>, Vec<String>)> {
        let cfg = self.greens.cfg();
        let kind = LatticeKind::Triangular;
        let at = |k: Vec2<T>| solve_lowest(&self.greens, kind, &cfg.momentum(k), alpha, 2);
        let (g, kk, m) = (at(cfg.gamma())?, at(cfg.dirac)?, at(cfg.m_point())?);
        let nu2 = g[1].min(m[1]);
        let tol = |x: T| merge_tol::<T>() * x.scale();
        let predicted = merge_intervals(
            vec![
                Interval {
                    lo: g[0],
                    hi: kk[0],
                },
                Interval {
                    lo: nu2,
                    hi: T::infinity(),
                },
            ],
            merge_tol(),
        );
        let mut flags = Vec::new();
        let b1 = &observed[0];
        if b1.min < g[0] - tol(g[0]) {
            flags.push(format!(
                "band1-min-off-gamma: {:e} at ({:e}, {:e})",
                b1.min, b1.argmin.x, b1.argmin.y
            ));
        }
        if b1.max > kk[0] + tol(kk[0]) {
            flags.push(format!("band1-max-above-K: {:e}", b1.max));
        }
        for r in &observed[1..] {
            if r.min < nu2 - tol(nu2) {
                flags.push(format!("band{}-below-nu2: {:e} < {:e}", r.band, r.min, nu2));
            }
        }
        if (observed[1].min - nu2).abs() > T::lit(1e-3) * nu2.scale() {
            flags.push(format!(
                "band2-min-mismatch: observed {:e}, predicted {:e}",
                observed[1].min, nu2
            ));
        }
        Ok((predicted, flags))
    }
}

fn hc_checks<T: Real>(at_gamma: T, observed: &[BandRange<T>]) -> (Vec<Interval<T>>, Vec<String>) {
    let tol = |x: T| merge_tol::<T>() * x.scale();
    let (b1, b2, b3, b4) = (&observed[0], &observed[1], &observed[2], &observed[3]);
    let predicted = merge_intervals(
        vec![
            Interval {
                lo: b1.min,
                hi: b2.max,
            },
            Interval {
                lo: b3.min,
                hi: b3.max,
            },
            Interval {
                lo: b4.min,
                hi: T::infinity(),
            },
        ],
        merge_tol(),
    );
    let mut flags = Vec::new();
    if b1.min < at_gamma - tol(at_gamma) {
        flags.push(format!(
            "band1-min-off-gamma: {:e} at ({:e}, {:e})",
            b1.min, b1.argmin.x, b1.argmin.y
        ));
    }
    for r in &observed[3..] {
        if r.min < b4.min - tol(b4.min) {
            flags.push(format!("band{}-leaves-I3: {:e}", r.band, r.min));
        }
    }
    let upper: Vec<Interval<T>> = observed[3..]
        .iter()
        .map(|r| Interval {
            lo: r.min,
            hi: r.max,
        })
        .collect();
    let n = merge_intervals(upper, merge_tol()).len();
    if n > 1 {
        flags.push(format!("upper-bands-disconnected: {} pieces", n));
    }
    (predicted, flags)
}

/// Spectrum reports for each `alpha`, polishing bands `1..=polish_bands`.
pub fn spectrum_scan<T: Real>(
    mesh: &BandMesh<T>,
    kind: LatticeKind,
    alphas: &[T],
    polish_bands: usize,
) -> Result<Vec<SpectrumReport<T>>> {
    alphas
        .iter()
        .map(|&a| mesh.spectrum_with(kind, a, polish_bands))
        .collect()
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * T::lit(i as f64) / T::lit((n - 1) as f64))
        .collect()
}

/// First scanned `alpha` from which the band-1/band-2 gap stays closed to the end of the scan.
pub fn gap_closing_alpha<T: Real>(reports: &[SpectrumReport<T>]) -> Option<T> {
    let open = |r: &SpectrumReport<T>| r.gap_1_2() > merge_tol::<T>() * r.observed[1].min.scale();
    let last_open = reports.iter().rposition(open);
    match last_open {
        None => reports.first().map(|r| r.alpha),
        Some(i) if i + 1 < reports.len() => Some(reports[i + 1].alpha),
        Some(_) => None,
    }
}

/// Eigenvalues at one `k` for a decreasing list of `alpha`, with the limits they should approach.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsTable<T> {
    pub lattice: LatticeKind,
    pub k: Vec2<T>,
    pub alphas: Vec<T>,
    /// `rows[i]` holds the lowest `jmax` eigenvalues at `alphas[i]`.
    pub rows: Vec<Vec<T>>,
    /// Free eigenvalues with multiplicity.
    pub free: Vec<T>,
    /// Every band is nonincreasing along the (decreasing) alpha list.
    pub monotone: bool,
    /// `free[j - s] <= value[j] <= free[j]` with `s` = 1 (triangular) or 2 (honeycomb).
    pub sandwich: bool,
    /// `|value[j + s] - free[j]|` at the most negative alpha.
    pub lower_gap: Vec<T>,
    /// `|value[j] - free[j]|` at the most positive alpha.
    pub upper_gap: Vec<T>,
}

pub fn asymptotics_check<T: Real>(
    greens: &Greens<T>,
    kind: LatticeKind,
    k: &Momentum<T>,
    alphas: &[T],
    jmax: usize,
) -> Result<AsymptoticsTable<T>> {
    if alphas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidArgument(
            "alphas must be strictly decreasing".into(),
        ));
    }
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("no alpha values".into()));
    }
    let shift = match kind {
        LatticeKind::Triangular => 1,
        LatticeKind::Honeycomb => 2,
    };
    let rows: Vec<Vec<T>> = alphas
        .par_iter()
        .map(|&a| solve_lowest(greens, kind, k, a, jmax))
        .collect::<Result<_>>()?;
    let free = solve_lowest(greens, kind, k, T::infinity(), jmax)?;
    let slack = |x: T| T::tol(1e-10) * x.scale();
    let monotone = rows
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| *b <= *a + slack(*a)));
    let sandwich = rows.iter().all(|row| {
        row.iter().enumerate().all(|(j, &v)| {
            v <= free[j] + slack(free[j]) && (j < shift || free[j - shift] <= v + slack(v))
        })
    });
    let last = rows.last().expect("nonempty");
    let lower_gap = (0..jmax.saturating_sub(shift))
        .map(|j| (last[j + shift] - free[j]).abs())
        .collect();
    let upper_gap = (0..jmax).map(|j| (rows[0][j] - free[j]).abs()).collect();
    Ok(AsymptoticsTable {
        lattice: kind,
        k: k.k(),
        alphas: alphas.to_vec(),
        rows,
        free,
        monotone,
        sandwich,
        lower_gap,
        upper_gap,
    })
}
