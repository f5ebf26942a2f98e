//! Triangular/honeycomb geometry, the dual lattice and the hexagonal Brillouin zone.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 {
            x: T::zero(),
            y: T::zero(),
        }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sqr(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    /// Unit vector at angle `theta` from the x axis.
    pub fn polar(theta: T) -> Self {
        Vec2 {
            x: theta.cos(),
            y: theta.sin(),
        }
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2 {
            x: self.x + o.x,
            y: self.y + o.y,
        }
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2 {
            x: self.x - o.x,
            y: self.y - o.y,
        }
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2 {
            x: -self.x,
            y: -self.y,
        }
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec2 {
            x: self.x * s,
            y: self.y * s,
        }
    }
}

/// Index `m` of the dual lattice vector `xi_m = m1 k1 + m2 k2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualIndex {
    pub m1: i64,
    pub m2: i64,
}

impl DualIndex {
    pub const fn new(m1: i64, m2: i64) -> Self {
        DualIndex { m1, m2 }
    }

    /// Index action of the 2pi/3 rotation about `-K`.
    pub const fn rotated(self) -> Self {
        DualIndex {
            m1: -self.m1 + self.m2 - 1,
            m2: -self.m1 - 1,
        }
    }

    /// `e^{i xi_m . x0}`, exact: the phase only depends on `(m1 + m2) mod 3`.
    pub fn x0_phase<T: Real>(self) -> Complex<T> {
        let half = T::lit(0.5);
        let s = T::lit(3f64.sqrt() / 2.0);
        match (self.m1 + self.m2).rem_euclid(3) {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(-half, -s),
            _ => Complex::new(-half, s),
        }
    }
}

/// `(m, R~m, R~^2 m)`.
pub fn rotation_orbit(m: DualIndex) -> [DualIndex; 3] {
    let r1 = m.rotated();
    [m, r1, r1.rotated()]
}

/// The rotation `R` by 2pi/3 together with its index action on the dual lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationMatrices<T> {
    pub r: [[T; 2]; 2],
}

impl<T: Real> Default for RotationMatrices<T> {
    fn default() -> Self {
        let h = T::lit(0.5);
        let s = T::lit(3f64.sqrt() / 2.0);
        RotationMatrices {
            r: [[-h, -s], [s, -h]],
        }
    }
}

impl<T: Real> RotationMatrices<T> {
    pub fn apply(&self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(
            self.r[0][0] * v.x + self.r[0][1] * v.y,
            self.r[1][0] * v.x + self.r[1][1] * v.y,
        )
    }

    pub fn apply_index(&self, m: DualIndex) -> DualIndex {
        m.rotated()
    }
}

/// Geometry of a triangular lattice with constant `a` and its honeycomb companion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeConfig<T> {
    pub a: T,
    pub v1: Vec2<T>,
    pub v2: Vec2<T>,
    pub k1: Vec2<T>,
    pub k2: Vec2<T>,
    pub x0: Vec2<T>,
    /// The Dirac point `K = (2/3) k1 + (1/3) k2`.
    pub dirac: Vec2<T>,
}

pub fn build_lattice<T: Real>(a: T) -> Result<LatticeConfig<T>> {
    LatticeConfig::new(a)
}

impl<T: Real> LatticeConfig<T> {
    pub fn new(a: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::NonPositiveLatticeConstant(a.as_f64()));
        }
        let half = T::lit(0.5);
        let s3h = T::lit(3f64.sqrt() / 2.0);
        let v1 = Vec2::new(s3h, half) * a;
        let v2 = Vec2::new(s3h, -half) * a;
        let c = T::lit(4.0) * T::PI() / (a * T::lit(3f64.sqrt()));
        let k1 = Vec2::new(half, s3h) * c;
        let k2 = Vec2::new(half, -s3h) * c;
        let two3 = T::lit(2.0) / T::lit(3.0);
        let x0 = (v1 + v2) * two3;
        let dirac = k1 * two3 + k2 * (T::one() / T::lit(3.0));
        Ok(LatticeConfig {
            a,
            v1,
            v2,
            k1,
            k2,
            x0,
            dirac,
        })
    }

    /// Area of the fundamental cell.
    pub fn cell_area(&self) -> T {
        self.a * self.a * T::lit(3f64.sqrt() / 2.0)
    }

    /// Area of the Brillouin zone.
    pub fn bz_area(&self) -> T {
        let tp = T::TAU();
        tp * tp / self.cell_area()
    }

    /// `|k1| = |k2|`.
    pub fn dual_norm(&self) -> T {
        T::lit(4.0) * T::PI() / (self.a * T::lit(3f64.sqrt()))
    }

    pub fn dual(&self, m: DualIndex) -> Vec2<T> {
        self.k1 * T::lit(m.m1 as f64) + self.k2 * T::lit(m.m2 as f64)
    }

    pub fn site(&self, n1: i64, n2: i64) -> Vec2<T> {
        self.v1 * T::lit(n1 as f64) + self.v2 * T::lit(n2 as f64)
    }

    /// Coordinates of `x` in the direct basis.
    pub fn direct_coords(&self, x: Vec2<T>) -> (T, T) {
        let tp = T::TAU();
        (x.dot(self.k1) / tp, x.dot(self.k2) / tp)
    }

    /// Coordinates of `k` in the dual basis.
    pub fn dual_coords(&self, k: Vec2<T>) -> (T, T) {
        let tp = T::TAU();
        (k.dot(self.v1) / tp, k.dot(self.v2) / tp)
    }

    pub fn gamma(&self) -> Vec2<T> {
        Vec2::zero()
    }

    /// Edge midpoint `M = (k1 + k2) / 2`.
    pub fn m_point(&self) -> Vec2<T> {
        (self.k1 + self.k2) * T::lit(0.5)
    }

    /// Distance from `x` to the nearest lattice point.
    pub fn lattice_distance(&self, x: Vec2<T>) -> T {
        let (s, t) = self.direct_coords(x);
        let (s0, t0) = (s.floor(), t.floor());
        let mut best = T::infinity();
        for i in 0..2 {
            for j in 0..2 {
                let p = self.v1 * (s0 + T::lit(i as f64)) + self.v2 * (t0 + T::lit(j as f64));
                best = best.min((x - p).norm());
            }
        }
        best
    }

    /// Hexagon test with the three dual directions `k1`, `k2`, `k1 + k2`.
    pub fn in_bz(&self, k: Vec2<T>) -> bool {
        let lim = self.dual_norm().powi(2) * T::lit(0.5) * (T::one() + T::lit(1e-12));
        [self.k1, self.k2, self.k1 + self.k2]
            .iter()
            .all(|&u| k.dot(u).abs() <= lim)
    }

    /// Translates `k` by a dual lattice vector into the Brillouin zone. Points already in the
    /// zone (boundary included) are returned unchanged.
    pub fn fold(&self, k: Vec2<T>) -> Vec2<T> {
        if self.in_bz(k) {
            return k;
        }
        let (s, t) = self.dual_coords(k);
        let base = k - self.k1 * s.round() - self.k2 * t.round();
        let mut best = base;
        let mut best_n = T::infinity();
        for i in -1..=1 {
            for j in -1..=1 {
                let c = base - self.k1 * T::lit(i as f64) - self.k2 * T::lit(j as f64);
                if self.in_bz(c) && c.norm_sqr() < best_n {
                    best = c;
                    best_n = c.norm_sqr();
                }
            }
        }
        best
    }

    pub fn momentum(&self, k: Vec2<T>) -> Momentum<T> {
        Momentum { k: self.fold(k) }
    }

    /// Calls `f` for every dual vector with `|xi - center| <= radius`, in a fixed order.
    pub fn for_each_dual_in_disk<F: FnMut(DualIndex, Vec2<T>)>(
        &self,
        center: Vec2<T>,
        radius: T,
        mut f: F,
    ) {
        let reach = ((center.norm() + radius) * self.a / T::TAU())
            .ceil()
            .to_i64()
            .unwrap_or(0)
            + 1;
        let r2 = radius * radius;
        for m1 in -reach..=reach {
            for m2 in -reach..=reach {
                let m = DualIndex::new(m1, m2);
                let xi = self.dual(m);
                if (xi - center).norm_sqr() <= r2 {
                    f(m, xi);
                }
            }
        }
    }
}

/// Quasi-momentum inside the closed Brillouin zone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Momentum<T> {
    k: Vec2<T>,
}

impl<T: Real> Momentum<T> {
    pub fn k(&self) -> Vec2<T> {
        self.k
    }

    pub fn gamma() -> Self {
        Momentum { k: Vec2::zero() }
    }
}

/// A free level `|xi_m + k|^2` with every index attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeLevel<T> {
    pub value: T,
    pub indices: Vec<DualIndex>,
}

impl<T> FreeLevel<T> {
    pub fn mu(&self) -> usize {
        self.indices.len()
    }
}

/// Groups sorted `(q, m)` pairs into degeneracy classes.
pub(crate) fn group_levels<T: Real>(mut pts: Vec<(T, DualIndex)>) -> Vec<FreeLevel<T>> {
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let tau = T::tol(1e-8);
    let mut out: Vec<FreeLevel<T>> = Vec::new();
    let mut start = T::zero();
    for (q, m) in pts {
        match out.last_mut() {
            Some(l) if q - start <= tau * start.scale() => l.indices.push(m),
            _ => {
                start = q;
                out.push(FreeLevel {
                    value: q,
                    indices: vec![m],
                });
            }
        }
    }
    out
}

/// Free eigenvalues `|xi_m + k|^2 <= lambda_max`, ascending, grouped by degeneracy.
pub fn free_eigenvalues<T: Real>(
    cfg: &LatticeConfig<T>,
    k: &Momentum<T>,
    lambda_max: T,
) -> Result<Vec<FreeLevel<T>>> {
    let k = k.k();
    if !(lambda_max >= k.norm_sqr()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_max = {} is below |k|^2 = {}",
            lambda_max,
            k.norm_sqr()
        )));
    }
    let mut pts = Vec::new();
    cfg.for_each_dual_in_disk(-k, lambda_max.sqrt(), |m, xi| {
        pts.push(((xi + k).norm_sqr(), m))
    });
    Ok(group_levels(pts))
}

/// `n x n` samples of the parallelogram `s k1 + t k2`, `s, t in [-1/2, 1/2)`, folded into the zone,
/// followed by `Gamma`, `K` and `M`.
pub fn bz_mesh<T: Real>(cfg: &LatticeConfig<T>, n: usize) -> Vec<Momentum<T>> {
    let n = n.max(1);
    let nf = T::lit(n as f64);
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(n * n + 3);
    for i in 0..n {
        for j in 0..n {
            let s = T::lit(i as f64) / nf - half;
            let t = T::lit(j as f64) / nf - half;
            out.push(cfg.momentum(cfg.k1 * s + cfg.k2 * t));
        }
    }
    out.push(cfg.momentum(cfg.gamma()));
    out.push(cfg.momentum(cfg.dirac));
    out.push(cfg.momentum(cfg.m_point()));
    out
}

/// Piecewise-linear path with `steps` points per segment; shared waypoints appear once.
pub fn bz_path<T: Real>(
    cfg: &LatticeConfig<T>,
    waypoints: &[Vec2<T>],
    steps: usize,
) -> Vec<Momentum<T>> {
    let steps = steps.max(2);
    let mut out: Vec<Momentum<T>> = Vec::new();
    if waypoints.len() == 1 {
        out.push(cfg.momentum(waypoints[0]));
        return out;
    }
    for (seg, w) in waypoints.windows(2).enumerate() {
        for i in 0..steps {
            if seg > 0 && i == 0 {
                continue;
            }
            let t = T::lit(i as f64) / T::lit((steps - 1) as f64);
            out.push(cfg.momentum(w[0] + (w[1] - w[0]) * t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duality_holds() {
        for a in [0.5, 1.0, 2.0] {
            let c = LatticeConfig::<f64>::new(a).unwrap();
            let tp = std::f64::consts::TAU;
            assert!((c.k1.dot(c.v1) - tp).abs() < 1e-12);
            assert!((c.k2.dot(c.v2) - tp).abs() < 1e-12);
            assert!(c.k1.dot(c.v2).abs() < 1e-12);
            assert!(c.k2.dot(c.v1).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_constant() {
        assert!(LatticeConfig::<f64>::new(0.0).is_err());
        assert!(LatticeConfig::<f64>::new(-1.0).is_err());
        assert!(LatticeConfig::<f64>::new(f64::NAN).is_err());
    }

    #[test]
    fn orbit_of_origin() {
        let o = rotation_orbit(DualIndex::new(0, 0));
        assert_eq!(
            o,
            [
                DualIndex::new(0, 0),
                DualIndex::new(-1, -1),
                DualIndex::new(-1, 0)
            ]
        );
        assert_eq!(o[2].rotated(), o[0]);
    }

    #[test]
    fn special_points_stay_put() {
        let c = LatticeConfig::<f64>::new(1.0).unwrap();
        assert_eq!(c.fold(c.dirac), c.dirac);
        assert_eq!(c.fold(c.m_point()), c.m_point());
        assert!(!c.in_bz(c.k1));
        assert!(c.fold(c.k1 + c.k2 * 0.1).norm() < 1.0);
    }

    #[test]
    fn path_dedups_waypoints() {
        let c = LatticeConfig::<f64>::new(1.0).unwrap();
        assert_eq!(bz_path(&c, &[c.gamma(), c.dirac], 2).len(), 2);
        assert_eq!(bz_path(&c, &[c.gamma(), c.dirac, c.m_point()], 3).len(), 5);
        assert_eq!(bz_path(&c, &[c.dirac], 10).len(), 1);
    }
}
