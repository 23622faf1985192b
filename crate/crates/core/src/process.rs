//! Finite counting measures, Poisson and binomial samplers, Mecke checks.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{haar_subspace, kappa, uniform_in_ball, AffineFlat, Coords, Domain, Point};
use crate::rng::SeededRng;

/// Space a configuration lives on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceTag {
    Real,
    Euclidean(usize),
    Sphere(usize),
    Flats { d: usize, m: usize },
    Named(String),
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceTag::Real => write!(f, "R"),
            SpaceTag::Euclidean(d) => write!(f, "R^{d}"),
            SpaceTag::Sphere(d) => write!(f, "S^{}", d - 1),
            SpaceTag::Flats { d, m } => write!(f, "A({d},{m})"),
            SpaceTag::Named(s) => write!(f, "{s}"),
        }
    }
}

impl SpaceTag {
    pub fn of_domain(domain: &Domain) -> Self {
        match domain {
            Domain::Sphere { d } => SpaceTag::Sphere(*d),
            other => SpaceTag::Euclidean(other.dim()),
        }
    }
}

/// Locations that can be atoms of a configuration. Atoms compare equal
/// only when bit-identical under `total_cmp`.
pub trait Location: Clone + fmt::Debug + Send + Sync {
    fn total_cmp(&self, other: &Self) -> Ordering;
}

fn cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl Location for f64 {
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

impl Location for i64 {
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Location for Point {
    fn total_cmp(&self, other: &Self) -> Ordering {
        cmp_slices(&self.coords, &other.coords)
    }
}

impl Location for Coords {
    fn total_cmp(&self, other: &Self) -> Ordering {
        cmp_slices(self, other)
    }
}

impl Location for AffineFlat {
    fn total_cmp(&self, other: &Self) -> Ordering {
        cmp_slices(&self.base, &other.base).then_with(|| {
            for (u, v) in self.directions.iter().zip(&other.directions) {
                match cmp_slices(u, v) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            self.directions.len().cmp(&other.directions.len())
        })
    }
}

/// Finite counting measure Σ m_i δ_{x_i} with distinct x_i and m_i ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration<T> {
    pub space: SpaceTag,
    atoms: Vec<(T, u64)>,
}

impl<T: Location> Configuration<T> {
    pub fn empty(space: SpaceTag) -> Self {
        Self {
            space,
            atoms: Vec::new(),
        }
    }

    /// Build from (location, multiplicity) pairs; zero multiplicities are dropped
    /// and coincident locations merged.
    pub fn from_atoms(space: SpaceTag, atoms: impl IntoIterator<Item = (T, u64)>) -> Self {
        let mut atoms: Vec<(T, u64)> = atoms.into_iter().filter(|a| a.1 > 0).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(T, u64)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0.total_cmp(&x) == Ordering::Equal => last.1 += m,
                _ => merged.push((x, m)),
            }
        }
        Self {
            space,
            atoms: merged,
        }
    }

    pub fn from_points(space: SpaceTag, points: impl IntoIterator<Item = T>) -> Self {
        Self::from_atoms(space, points.into_iter().map(|x| (x, 1)))
    }

    pub fn atoms(&self) -> &[(T, u64)] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<(T, u64)> {
        self.atoms
    }

    /// Total number of points counted with multiplicity.
    pub fn total_count(&self) -> u64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn add(&mut self, x: T, m: u64) {
        if m == 0 {
            return;
        }
        match self.atoms.binary_search_by(|a| a.0.total_cmp(&x)) {
            Ok(i) => self.atoms[i].1 += m,
            Err(i) => self.atoms.insert(i, (x, m)),
        }
    }

    /// Superposition μ + ν.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                self.space.to_string(),
                other.space.to_string(),
            ));
        }
        Ok(Self::from_atoms(
            self.space.clone(),
            self.atoms.iter().chain(&other.atoms).cloned(),
        ))
    }

    /// μ(B) for a set given by its indicator.
    pub fn count_in(&self, pred: impl Fn(&T) -> bool) -> u64 {
        self.atoms.iter().filter(|a| pred(&a.0)).map(|a| a.1).sum()
    }

    /// Restriction μ|_B.
    pub fn restrict(&self, pred: impl Fn(&T) -> bool) -> Self {
        Self {
            space: self.space.clone(),
            atoms: self.atoms.iter().filter(|a| pred(&a.0)).cloned().collect(),
        }
    }

    /// Push forward under a location map, merging coincident images.
    pub fn map<U: Location>(&self, space: SpaceTag, f: impl Fn(&T) -> U) -> Configuration<U> {
        Configuration::from_atoms(space, self.atoms.iter().map(|(x, m)| (f(x), *m)))
    }

    /// Every point repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<T> {
        self.atoms
            .iter()
            .flat_map(|(x, m)| std::iter::repeat_n(x.clone(), *m as usize))
            .collect()
    }
}

fn poisson_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite mean").sample(rng) as usize
}

/// Draw a Poisson(λ) variate.
pub fn sample_poisson_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "must be nonnegative and finite"));
    }
    Ok(poisson_count(lambda, rng) as u64)
}

/// Raw coordinates of a Poisson process with intensity t·(reference measure).
pub fn sample_poisson_points<R: Rng + ?Sized>(
    domain: &Domain,
    t: f64,
    rng: &mut R,
) -> Result<Vec<Coords>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", "intensity multiplier must be nonnegative and finite"));
    }
    domain.validate()?;
    let n = poisson_count(t * domain.measure(), rng);
    Ok((0..n).map(|_| domain.sample_coords(rng)).collect())
}

/// Poisson process on `domain` with intensity t times the reference measure.
pub fn sample_poisson<R: Rng + ?Sized>(
    domain: &Domain,
    t: f64,
    rng: &mut R,
) -> Result<Configuration<Point>> {
    let pts = sample_poisson_points(domain, t, rng)?;
    Ok(Configuration::from_points(
        SpaceTag::of_domain(domain),
        pts.into_iter().map(Point::from_coords),
    ))
}

/// Binomial process: n i.i.d. points from the normalized reference measure.
pub fn sample_binomial<R: Rng + ?Sized>(
    domain: &Domain,
    n: usize,
    rng: &mut R,
) -> Result<Configuration<Point>> {
    domain.validate()?;
    Ok(Configuration::from_points(
        SpaceTag::of_domain(domain),
        (0..n).map(|_| domain.sample_uniform(rng)),
    ))
}

/// Poisson process of m-flats in ℝ^d with Haar directions, restricted to the
/// flats hitting the centered ball of the given radius.
pub fn sample_poisson_flats<R: Rng + ?Sized>(
    d: usize,
    m: usize,
    t: f64,
    radius: f64,
    rng: &mut R,
) -> Result<Vec<AffineFlat>> {
    if m == 0 || 2 * m >= d {
        return Err(invalid("m", "need 1 <= m < d/2"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", "must be nonnegative and finite"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius", "must be positive and finite"));
    }
    let n = poisson_count(t * kappa(d - m) * radius.powi((d - m) as i32), rng);
    Ok((0..n)
        .map(|_| {
            let frame = haar_subspace(d, d, rng);
            let c = uniform_in_ball(d - m, radius, rng);
            let mut base = Coords::from_elem(0.0, d);
            for (ci, e) in c.iter().zip(&frame[m..]) {
                for (b, ei) in base.iter_mut().zip(e) {
                    *b += ci * ei;
                }
            }
            AffineFlat {
                base,
                directions: frame[..m].to_vec(),
            }
        })
        .collect())
}

/// Underlying process of a Mecke check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessModel {
    /// Intensity t times the reference measure.
    Poisson { t: f64 },
    /// n i.i.d. points.
    Binomial { n: usize },
}

/// Test function g(x_1..x_k, μ) with a declared bound: 0 ≤ g ≤ bound.
pub struct TestFunction<'a> {
    pub k: usize,
    pub bound: f64,
    pub g: &'a (dyn Fn(&[&[f64]], &[Coords]) -> f64 + Sync),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeckeResult {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
}

impl MeckeResult {
    pub fn pooled_stderr(&self) -> f64 {
        self.lhs_stderr.hypot(self.rhs_stderr)
    }

    pub fn z_score(&self) -> f64 {
        let se = self.pooled_stderr();
        if se == 0.0 {
            if self.lhs == self.rhs { 0.0 } else { f64::INFINITY }
        } else {
            (self.lhs - self.rhs) / se
        }
    }
}

fn checked(g: &TestFunction<'_>, xs: &[&[f64]], mu: &[Coords]) -> Result<f64> {
    let v = (g.g)(xs, mu);
    if !(0.0..=g.bound).contains(&v) {
        return Err(Error::UnboundedTestFunction {
            value: v,
            bound: g.bound,
        });
    }
    Ok(v)
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn sample_model(domain: &Domain, model: ProcessModel, drop: usize, rng: &mut dyn RngCore) -> Vec<Coords> {
    let n = match model {
        ProcessModel::Poisson { t } => poisson_count(t * domain.measure(), rng),
        ProcessModel::Binomial { n } => n - drop,
    };
    (0..n).map(|_| domain.sample_coords(rng)).collect()
}

/// Monte Carlo check of the Mecke identity (Poisson) or its binomial counterpart.
///
/// The left side sums g over ordered k-tuples of distinct points of μ. The right
/// side integrates E g(x, μ' + δ_x) against the k-th power of the intensity,
/// where μ' is μ itself (Poisson) or the binomial process with n − k points;
/// the integral is estimated with `inner` uniform tuples per replication.
pub fn mecke_check(
    domain: &Domain,
    model: ProcessModel,
    g: &TestFunction<'_>,
    reps: usize,
    inner: usize,
    seed: u64,
) -> Result<MeckeResult> {
    domain.validate()?;
    let k = g.k;
    if !(1..=2).contains(&k) {
        return Err(invalid("k", "Mecke checks support k in {1, 2}"));
    }
    if !(g.bound.is_finite() && g.bound >= 0.0) {
        return Err(invalid("bound", "test function needs a finite nonnegative bound"));
    }
    if reps < 2 || inner == 0 {
        return Err(invalid("reps", "need at least two replications and one inner sample"));
    }
    let factor = match model {
        ProcessModel::Poisson { t } => {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid("t", "must be nonnegative and finite"));
            }
            (t * domain.measure()).powi(k as i32)
        }
        ProcessModel::Binomial { n } => {
            if n < k {
                0.0
            } else {
                (0..k).map(|i| (n - i) as f64).product()
            }
        }
    };
    let rows: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64)> {
            let mut rng = SeededRng::new(seed, 2 * rep).rng();
            let mu = sample_model(domain, model, 0, &mut rng);
            let mut lhs = 0.0;
            for i in 0..mu.len() {
                if k == 1 {
                    lhs += checked(g, &[&mu[i]], &mu)?;
                } else {
                    for j in 0..mu.len() {
                        if i != j {
                            lhs += checked(g, &[&mu[i], &mu[j]], &mu)?;
                        }
                    }
                }
            }
            let mut rng = SeededRng::new(seed, 2 * rep + 1).rng();
            let mut rhs = 0.0;
            if factor > 0.0 {
                for _ in 0..inner {
                    let mut mu = sample_model(domain, model, k, &mut rng);
                    for _ in 0..k {
                        mu.push(domain.sample_coords(&mut rng));
                    }
                    let n = mu.len();
                    let xs: Vec<&[f64]> = mu[n - k..].iter().map(|c| c.as_slice()).collect();
                    rhs += checked(g, &xs, &mu)?;
                }
                rhs *= factor / inner as f64;
            }
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let (l, r): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let (lhs, lhs_stderr) = mean_se(&l);
    let (rhs, rhs_stderr) = mean_se(&r);
    Ok(MeckeResult {
        lhs,
        lhs_stderr,
        rhs,
        rhs_stderr,
    })
}
