//! Ground spaces, convex-geometry constants and small linear algebra.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Coordinate storage, inline up to dimension 4.
pub type Coords = SmallVec<[f64; 4]>;

/// A point of ℝ^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Coords,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("coords", "dimension must be at least 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coords", "entries must be finite"));
        }
        Ok(Self {
            coords: Coords::from_slice(coords),
        })
    }

    /// Construct without validation; callers guarantee finite, non-empty input.
    pub fn from_coords(coords: Coords) -> Self {
        Self { coords }
    }

    pub fn origin(d: usize) -> Self {
        Self {
            coords: SmallVec::from_elem(0.0, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.coords, &other.coords)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Ground domain carrying a finite reference measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// Axis-parallel cube `[0, side]^d`.
    Cube { d: usize, side: f64 },
    /// Centered ball of the given radius.
    Ball { d: usize, radius: f64 },
    /// Unit sphere S^{d-1} ⊂ ℝ^d with normalized surface measure.
    Sphere { d: usize },
    /// Box window `[lo, hi]` coordinatewise.
    Window { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn unit_cube(d: usize) -> Self {
        Domain::Cube { d, side: 1.0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Cube { d, .. } | Domain::Ball { d, .. } | Domain::Sphere { d } => *d,
            Domain::Window { lo, .. } => lo.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        match self {
            Domain::Cube { side, .. } if !(*side > 0.0 && side.is_finite()) => {
                Err(invalid("side", "must be positive and finite"))
            }
            Domain::Ball { radius, .. } if !(*radius > 0.0 && radius.is_finite()) => {
                Err(invalid("radius", "must be positive and finite"))
            }
            Domain::Sphere { d } if *d < 2 => Err(invalid("d", "sphere needs d >= 2")),
            Domain::Window { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::DimensionMismatch {
                        expected: lo.len(),
                        got: hi.len(),
                    });
                }
                if lo.iter().zip(hi).any(|(l, h)| !(h > l) || !l.is_finite() || !h.is_finite()) {
                    return Err(invalid("window", "need finite lo < hi in every coordinate"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Total mass of the reference measure.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Cube { d, side } => side.powi(*d as i32),
            Domain::Ball { d, radius } => kappa(*d) * radius.powi(*d as i32),
            Domain::Sphere { .. } => 1.0,
            Domain::Window { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
        }
    }

    /// Draw one point from the normalized reference measure.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::from_coords(self.sample_coords(rng))
    }

    pub(crate) fn sample_coords<R: Rng + ?Sized>(&self, rng: &mut R) -> Coords {
        match self {
            Domain::Cube { d, side } => (0..*d).map(|_| side * rng.random::<f64>()).collect(),
            Domain::Ball { d, radius } => uniform_in_ball(*d, *radius, rng),
            Domain::Sphere { d } => uniform_on_sphere(*d, rng),
            Domain::Window { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l + (h - l) * rng.random::<f64>())
                .collect(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Cube { side, .. } => x.iter().all(|c| (0.0..=*side).contains(c)),
            Domain::Ball { radius, .. } => norm(x) <= *radius,
            Domain::Sphere { .. } => (norm(x) - 1.0).abs() < 1e-9,
            Domain::Window { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (l, h))| (*l..=*h).contains(c)),
        }
    }
}

pub(crate) fn uniform_on_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Coords {
    loop {
        let g: Coords = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&g);
        if n > 1e-300 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

pub(crate) fn uniform_in_ball<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Coords {
    if d == 0 {
        return Coords::new();
    }
    let dir = uniform_on_sphere(d, rng);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * r).collect()
}

/// κ_d, with the convention κ_0 = 1.
pub(crate) fn kappa(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        _ => PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0),
    }
}

/// Volume κ_d of the d-dimensional unit ball.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    Ok(kappa(d))
}

pub(crate) fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Intrinsic volumes V_0..V_d of a cube or ball.
pub fn intrinsic_volumes(domain: &Domain) -> Result<Vec<f64>> {
    domain.validate()?;
    match domain {
        Domain::Cube { d, side } => Ok((0..=*d)
            .map(|i| binom(*d, i) * side.powi(i as i32))
            .collect()),
        Domain::Ball { d, radius } => Ok((0..=*d)
            .map(|i| binom(*d, i) * kappa(*d) / kappa(d - i) * radius.powi(i as i32))
            .collect()),
        _ => Err(Error::UnsupportedDomain("intrinsic volumes")),
    }
}

/// Volume of the parallel set K + rB^d via Steiner's formula.
pub fn steiner_volume(domain: &Domain, r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid("r", "must be nonnegative and finite"));
    }
    let v = intrinsic_volumes(domain)?;
    let d = domain.dim();
    Ok(v.iter()
        .enumerate()
        .map(|(i, vi)| kappa(d - i) * vi * r.powi((d - i) as i32))
        .sum())
}

/// An m-dimensional affine subspace `base + span(directions)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFlat {
    pub base: Coords,
    pub directions: Vec<Coords>,
}

impl AffineFlat {
    pub fn new(base: &[f64], directions: Vec<Vec<f64>>) -> Result<Self> {
        let d = base.len();
        if d == 0 {
            return Err(invalid("base", "dimension must be at least 1"));
        }
        for v in &directions {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
        }
        let flat = Self {
            base: Coords::from_slice(base),
            directions: directions.iter().map(|v| Coords::from_slice(v)).collect(),
        };
        let dev = flat.orthonormality_defect();
        if dev > 1e-12 {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(flat)
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn flat_dim(&self) -> usize {
        self.directions.len()
    }

    fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, u) in self.directions.iter().enumerate() {
            for (j, v) in self.directions.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, v) - target).abs());
            }
        }
        worst
    }

    /// The point `base + Σ c_i e_i`.
    pub fn point_at(&self, coeffs: &[f64]) -> Coords {
        let mut p = self.base.clone();
        for (c, e) in coeffs.iter().zip(&self.directions) {
            for (pi, ei) in p.iter_mut().zip(e) {
                *pi += c * ei;
            }
        }
        p
    }
}

/// Orthonormalize the rows in place (modified Gram–Schmidt). Returns false on rank loss.
pub(crate) fn gram_schmidt(rows: &mut [Coords]) -> bool {
    for i in 0..rows.len() {
        for j in 0..i {
            let (head, tail) = rows.split_at_mut(i);
            let p = dot(&tail[0], &head[j]);
            for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= p * b;
            }
        }
        let n = norm(&rows[i]);
        if n < 1e-12 {
            return false;
        }
        for a in rows[i].iter_mut() {
            *a /= n;
        }
    }
    true
}

/// Haar-distributed orthonormal m-frame in ℝ^d.
pub fn haar_subspace<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Vec<Coords> {
    loop {
        let mut rows: Vec<Coords> = (0..m)
            .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        if gram_schmidt(&mut rows) {
            return rows;
        }
    }
}

/// Determinant of a small dense matrix (row-major, n×n) by partial pivoting.
pub(crate) fn det(mut a: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

/// Solve `a x = b` for a small dense system by partial pivoting.
pub(crate) fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

/// Volume of the parallelepiped spanned by two orthonormal m-frames.
pub fn subspace_determinant(l: &[Coords], m: &[Coords]) -> Result<f64> {
    if l.len() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: l.len(),
            got: m.len(),
        });
    }
    let k = l.len();
    if k == 0 {
        return Ok(1.0);
    }
    let d = l[0].len();
    for v in l.iter().chain(m) {
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
    }
    if 2 * k > d {
        return Err(invalid("m", "need 2m <= d"));
    }
    let vecs: Vec<&Coords> = l.iter().chain(m).collect();
    let n = 2 * k;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = dot(vecs[i], vecs[j]);
        }
    }
    Ok(det(g, n).max(0.0).sqrt().min(1.0))
}

/// Mean subspace determinant of two independent Haar m-subspaces of ℝ^d.
pub fn integrated_subspace_determinant(d: usize, m: usize) -> Result<f64> {
    if 2 * m > d {
        return Err(invalid("m", "need 2m <= d"));
    }
    if m == 0 {
        return Ok(1.0);
    }
    Ok(binom(d - m, m) / binom(d, m) * kappa(d - m).powi(2) / (kappa(d) * kappa(d - 2 * m)))
}

/// Distance between two flats in general position and the midpoint of the shortest segment.
pub fn flat_distance_midpoint(e: &AffineFlat, f: &AffineFlat) -> Result<(f64, Point)> {
    let d = e.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.dim(),
        });
    }
    let (p, q) = (e.flat_dim(), f.flat_dim());
    if p + q > d {
        return Err(Error::DegeneratePosition);
    }
    let sd = if p == q {
        subspace_determinant(&e.directions, &f.directions)?
    } else {
        let mut rows: Vec<Coords> = e.directions.iter().chain(&f.directions).cloned().collect();
        if gram_schmidt(&mut rows) { 1.0 } else { 0.0 }
    };
    if sd < 1e-10 {
        return Err(Error::DegeneratePosition);
    }
    // Minimize ‖w + A u − B v‖² with w = a − b: normal equations in (u, v).
    let n = p + q;
    let mut lhs = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let w: Coords = e.base.iter().zip(&f.base).map(|(a, b)| a - b).collect();
    for i in 0..n {
        let (vi, si) = if i < p { (&e.directions[i], 1.0) } else { (&f.directions[i - p], -1.0) };
        rhs[i] = -si * dot(vi, &w);
        for j in 0..n {
            let (vj, sj) = if j < p { (&e.directions[j], 1.0) } else { (&f.directions[j - p], -1.0) };
            lhs[i * n + j] = si * sj * dot(vi, vj);
        }
    }
    let x = solve(lhs, rhs, n).ok_or(Error::DegeneratePosition)?;
    let pe = e.point_at(&x[..p]);
    let pf = f.point_at(&x[p..]);
    let dist = dist(&pe, &pf);
    if dist < 1e-10 {
        return Err(Error::DegeneratePosition);
    }
    let mid: Coords = pe.iter().zip(&pf).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok((dist, Point::from_coords(mid)))
}

/// Lebesgue measure of {(x, y) ∈ [0,1]^d × [0,1]^d : ‖x − y‖ ≤ r} for 0 ≤ r ≤ 1.
///
/// Expanding the set covariance of the unit cube, ∏(1 − |z_i|), in the
/// integral over the ball of radius r gives a finite alternating sum.
pub fn cube_pair_content(d: usize, r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    let mut s = 0.0;
    for j in 0..=d {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let e = (d + j) as f64;
        let c = ((d - j) as f64 / 2.0 * PI.ln() - ln_gamma(e / 2.0 + 1.0)).exp();
        s += sign * binom(d, j) * c * r.powi((d + j) as i32);
    }
    s.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(6).unwrap() - PI.powi(3) / 6.0).abs() < 1e-12);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn ball_volume_six_against_series() {
        // Γ(4) = 6 by the factorial identity; compare to a direct product.
        let oracle = PI * PI * PI / (1.0 * 2.0 * 3.0);
        assert!((unit_ball_volume(6).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 5.16771).abs() < 1e-5);
    }

    #[test]
    fn kappa_recursion() {
        for d in 3..20 {
            let lhs = kappa(d);
            let rhs = 2.0 * PI / d as f64 * kappa(d - 2);
            assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1.0));
        }
    }

    #[test]
    fn steiner_square() {
        let sq = Domain::unit_cube(2);
        for r in [0.0, 0.3, 1.0, 2.5] {
            let v = steiner_volume(&sq, r).unwrap();
            assert!((v - (PI * r * r + 4.0 * r + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn steiner_cube_monte_carlo() {
        let cube = Domain::unit_cube(3);
        let r = 0.1;
        let expect = 1.0 + 6.0 * 0.1 + 3.0 * PI * 0.01 + 4.0 * PI / 3.0 * 0.001;
        let v = steiner_volume(&cube, r).unwrap();
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 1.698437).abs() < 1e-6);

        // Parallel set lies in [-r, 1+r]^3; count points within r of the cube.
        let n = 2_000_000;
        let side = 1.0 + 2.0 * r;
        let mut g = rng();
        let mut hits = 0u64;
        for _ in 0..n {
            let mut d2 = 0.0;
            for _ in 0..3 {
                let x = -r + side * g.random::<f64>();
                let e = if x < 0.0 { -x } else if x > 1.0 { x - 1.0 } else { 0.0 };
                d2 += e * e;
            }
            if d2 <= r * r {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let est = p * side.powi(3);
        let sigma = (p * (1.0 - p) / n as f64).sqrt() * side.powi(3);
        assert!((est - v).abs() < 3.0 * sigma, "{est} vs {v} (σ={sigma})");
    }

    #[test]
    fn steiner_ball_is_bigger_ball() {
        let b = Domain::Ball { d: 3, radius: 0.7 };
        let v = steiner_volume(&b, 0.4).unwrap();
        assert!((v - kappa(3) * 1.1f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn steiner_rejects_sphere() {
        assert!(matches!(
            steiner_volume(&Domain::Sphere { d: 3 }, 0.1),
            Err(Error::UnsupportedDomain(_))
        ));
    }

    fn cv(v: &[f64]) -> Coords {
        Coords::from_slice(v)
    }

    #[test]
    fn subspace_det_trivial() {
        let x = vec![cv(&[1.0, 0.0])];
        let y = vec![cv(&[0.0, 1.0])];
        assert!((subspace_determinant(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(subspace_determinant(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn subspace_det_is_sine_in_r3() {
        let mut g = rng();
        for _ in 0..100 {
            let a = haar_subspace(3, 1, &mut g);
            let b = haar_subspace(3, 1, &mut g);
            let (u, v) = (&a[0], &b[0]);
            let cross = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            let sd = subspace_determinant(&a, &b).unwrap();
            assert!((sd - norm(&cross)).abs() < 1e-10);
        }
    }

    fn haar_mc(d: usize, m: usize, n: usize) -> (f64, f64) {
        let mut g = rng();
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let a = haar_subspace(d, m, &mut g);
            let b = haar_subspace(d, m, &mut g);
            let v = subspace_determinant(&a, &b).unwrap();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn integrated_determinant_monte_carlo() {
        let v31 = integrated_subspace_determinant(3, 1).unwrap();
        assert!((v31 - PI / 4.0).abs() < 1e-12);
        let (mean, se) = haar_mc(3, 1, 1_000_000);
        assert!((mean - v31).abs() < 3.0 * se, "{mean} vs {v31}");

        let v21 = integrated_subspace_determinant(2, 1).unwrap();
        assert!((v21 - 2.0 / PI).abs() < 1e-12);
        let (mean, se) = haar_mc(2, 1, 200_000);
        assert!((mean - v21).abs() < 3.0 * se);

        let v42 = integrated_subspace_determinant(4, 2).unwrap();
        let (mean, se) = haar_mc(4, 2, 200_000);
        assert!((mean - v42).abs() < 3.0 * se, "{mean} vs {v42}");

        assert_eq!(integrated_subspace_determinant(5, 0).unwrap(), 1.0);
        assert!(integrated_subspace_determinant(3, 2).is_err());
    }

    #[test]
    fn skew_lines() {
        let e = AffineFlat::new(&[0.0, 0.0, 0.0], vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let f = AffineFlat::new(&[0.0, 0.0, 1.0], vec![vec![0.0, 1.0, 0.0]]).unwrap();
        let (dist, mid) = flat_distance_midpoint(&e, &f).unwrap();
        assert!((dist - 1.0).abs() < 1e-12);
        assert!(mid.dist(&Point::new(&[0.0, 0.0, 0.5]).unwrap()) < 1e-12);
    }

    #[test]
    fn parallel_and_intersecting_rejected() {
        let e = AffineFlat::new(&[0.0, 0.0, 0.0], vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let f = AffineFlat::new(&[0.0, 2.0, 0.0], vec![vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            flat_distance_midpoint(&e, &f),
            Err(Error::DegeneratePosition)
        ));
        let g = AffineFlat::new(&[0.0, 0.0, 0.0], vec![vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            flat_distance_midpoint(&e, &g),
            Err(Error::DegeneratePosition)
        ));
    }

    #[test]
    fn non_orthonormal_rejected() {
        let r = AffineFlat::new(&[0.0, 0.0, 0.0], vec![vec![1.0, 1e-6, 0.0]]);
        assert!(matches!(r, Err(Error::NotOrthonormal(_))));
    }

    fn random_flat(d: usize, m: usize, g: &mut ChaCha8Rng) -> AffineFlat {
        let dirs = haar_subspace(d, m, g);
        let base: Coords = (0..d).map(|_| g.random::<f64>() * 2.0 - 1.0).collect();
        AffineFlat {
            base,
            directions: dirs,
        }
    }

    /// Coordinate-wise grid refinement around the best point found so far.
    fn grid_min(e: &AffineFlat, f: &AffineFlat) -> f64 {
        let n = e.flat_dim() + f.flat_dim();
        let eval = |x: &[f64]| dist(&e.point_at(&x[..e.flat_dim()]), &f.point_at(&x[e.flat_dim()..]));
        let mut best = vec![0.0; n];
        let mut step = 4.0;
        let mut cur = eval(&best);
        while step > 1e-9 {
            let mut improved = true;
            while improved {
                improved = false;
                for i in 0..n {
                    for s in [-step, step] {
                        let mut x = best.clone();
                        x[i] += s;
                        let v = eval(&x);
                        if v < cur {
                            cur = v;
                            best = x;
                            improved = true;
                        }
                    }
                }
            }
            step *= 0.5;
        }
        cur
    }

    #[test]
    fn random_flats_match_grid_search() {
        let mut g = rng();
        for _ in 0..10 {
            let e = random_flat(5, 2, &mut g);
            let f = random_flat(5, 2, &mut g);
            let (dist, _) = flat_distance_midpoint(&e, &f).unwrap();
            let brute = grid_min(&e, &f);
            assert!((dist - brute).abs() < 1e-6, "{dist} vs {brute}");
        }
    }

    #[test]
    fn pair_content_square() {
        for r in [0.0, 0.1, 0.5, 1.0] {
            let v = cube_pair_content(2, r);
            let oracle = PI * r * r - 8.0 / 3.0 * r.powi(3) + 0.5 * r.powi(4);
            assert!((v - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_content_monte_carlo_3d() {
        let mut g = rng();
        let r = 0.4;
        let n = 400_000;
        let hits = (0..n)
            .filter(|_| {
                let x = Domain::unit_cube(3).sample_coords(&mut g);
                let y = Domain::unit_cube(3).sample_coords(&mut g);
                dist(&x, &y) <= r
            })
            .count();
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - cube_pair_content(3, r)).abs() < 4.0 * se);
    }

    #[test]
    fn domains_sample_inside() {
        let mut g = rng();
        let ds = [
            Domain::unit_cube(3),
            Domain::Ball { d: 2, radius: 2.0 },
            Domain::Sphere { d: 4 },
            Domain::Window {
                lo: vec![-1.0, 0.5],
                hi: vec![0.0, 2.0],
            },
        ];
        for dom in &ds {
            dom.validate().unwrap();
            for _ in 0..100 {
                assert!(dom.contains(&dom.sample_coords(&mut g)));
            }
        }
    }
}
