//! Induced processes of k-subsets, U-statistics, rescalings and Gilbert-graph
//! functionals.

use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{binom, dist, dist2, AffineFlat, Coords, Point};
use crate::process::{Configuration, Location, SpaceTag};

/// Largest supported kernel arity.
pub const MAX_ARITY: usize = 4;
/// Guard rail on the number of subsets a single induce call may enumerate.
pub const MAX_SUBSETS: f64 = 5e9;

/// Locations with Euclidean coordinates, used for grid bucketing.
pub trait Positioned {
    fn position(&self) -> Option<&[f64]>;
}

impl Positioned for Point {
    fn position(&self) -> Option<&[f64]> {
        Some(&self.coords)
    }
}

impl Positioned for Coords {
    fn position(&self) -> Option<&[f64]> {
        Some(self)
    }
}

impl Positioned for f64 {
    fn position(&self) -> Option<&[f64]> {
        Some(std::slice::from_ref(self))
    }
}

impl Positioned for AffineFlat {
    fn position(&self) -> Option<&[f64]> {
        None
    }
}

/// Symmetric map f: X^k → Y together with its symmetric domain.
pub trait SymmetricKernel<X>: Sync {
    type Output: Location;

    fn arity(&self) -> usize;

    fn in_domain(&self, xs: &[&X]) -> bool;

    fn eval(&self, xs: &[&X]) -> Self::Output;

    fn target_space(&self, input: &SpaceTag) -> SpaceTag;

    /// For pair kernels: the domain is contained in {‖x − y‖ ≤ cutoff}.
    fn pair_cutoff(&self) -> Option<f64> {
        None
    }
}

/// k = 1 identity kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl<X: Location> SymmetricKernel<X> for Identity {
    type Output = X;
    fn arity(&self) -> usize {
        1
    }
    fn in_domain(&self, _: &[&X]) -> bool {
        true
    }
    fn eval(&self, xs: &[&X]) -> X {
        xs[0].clone()
    }
    fn target_space(&self, input: &SpaceTag) -> SpaceTag {
        input.clone()
    }
}

/// Pair distance ‖x − y‖, optionally restricted to pairs within a cutoff.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairDistance {
    pub cutoff: Option<f64>,
}

impl SymmetricKernel<Point> for PairDistance {
    type Output = f64;
    fn arity(&self) -> usize {
        2
    }
    fn in_domain(&self, xs: &[&Point]) -> bool {
        self.cutoff
            .is_none_or(|c| dist2(&xs[0].coords, &xs[1].coords) <= c * c)
    }
    fn eval(&self, xs: &[&Point]) -> f64 {
        xs[0].dist(xs[1])
    }
    fn target_space(&self, _: &SpaceTag) -> SpaceTag {
        SpaceTag::Real
    }
    fn pair_cutoff(&self) -> Option<f64> {
        self.cutoff
    }
}

/// Edge midpoint (x + y)/2 of pairs within the cutoff.
#[derive(Debug, Clone, Copy)]
pub struct Midpoint {
    pub cutoff: f64,
}

impl SymmetricKernel<Point> for Midpoint {
    type Output = Point;
    fn arity(&self) -> usize {
        2
    }
    fn in_domain(&self, xs: &[&Point]) -> bool {
        dist2(&xs[0].coords, &xs[1].coords) <= self.cutoff * self.cutoff
    }
    fn eval(&self, xs: &[&Point]) -> Point {
        Point::from_coords(
            xs[0]
                .coords
                .iter()
                .zip(&xs[1].coords)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }
    fn target_space(&self, input: &SpaceTag) -> SpaceTag {
        input.clone()
    }
    fn pair_cutoff(&self) -> Option<f64> {
        Some(self.cutoff)
    }
}

/// Kernel built from closures. The caller guarantees symmetry.
pub struct FnKernel<X, Y, F, D> {
    k: usize,
    f: F,
    dom: D,
    space: SpaceTag,
    cutoff: Option<f64>,
    _marker: PhantomData<fn(&X) -> Y>,
}

impl<X, Y, F, D> FnKernel<X, Y, F, D>
where
    F: Fn(&[&X]) -> Y + Sync,
    D: Fn(&[&X]) -> bool + Sync,
{
    pub fn new(k: usize, space: SpaceTag, f: F, dom: D) -> Self {
        Self {
            k,
            f,
            dom,
            space,
            cutoff: None,
            _marker: PhantomData,
        }
    }

    /// Declare that the domain lies inside {‖x − y‖ ≤ cutoff} (pair kernels only).
    pub fn with_pair_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }
}

impl<X, Y, F, D> SymmetricKernel<X> for FnKernel<X, Y, F, D>
where
    Y: Location,
    F: Fn(&[&X]) -> Y + Sync,
    D: Fn(&[&X]) -> bool + Sync,
{
    type Output = Y;
    fn arity(&self) -> usize {
        self.k
    }
    fn in_domain(&self, xs: &[&X]) -> bool {
        (self.dom)(xs)
    }
    fn eval(&self, xs: &[&X]) -> Y {
        (self.f)(xs)
    }
    fn target_space(&self, _: &SpaceTag) -> SpaceTag {
        self.space.clone()
    }
    fn pair_cutoff(&self) -> Option<f64> {
        self.cutoff
    }
}

/// Visit every pair (i < j) of points within `cutoff`, using a uniform grid
/// with cell side `cutoff`. Pairs come in no particular order.
pub fn for_each_pair_within(points: &[Coords], cutoff: f64, mut visit: impl FnMut(usize, usize, f64)) {
    let n = points.len();
    if n < 2 || cutoff <= 0.0 {
        if cutoff == 0.0 {
            brute_pairs(points, cutoff, visit);
        }
        return;
    }
    let d = points[0].len();
    let c2 = cutoff * cutoff;
    // Very sparse or very dense grids degrade to the quadratic loop.
    let extent = (0..d)
        .map(|k| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[k]), hi.max(p[k]))
            });
            hi - lo
        })
        .fold(0.0_f64, f64::max);
    if n < 32 || extent <= 2.0 * cutoff || d > 6 {
        brute_pairs(points, cutoff, visit);
        return;
    }
    let key = |p: &[f64]| -> Coords { p.iter().map(|x| (x / cutoff).floor()).collect() };
    let mut order: Vec<(Coords, usize)> = points.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    order.sort_by(|a, b| crate::process::Location::total_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
    let keys: Vec<&Coords> = order.iter().map(|o| &o.0).collect();
    let offsets = neighbor_offsets(d);
    let mut probe = Coords::from_elem(0.0, d);
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && order[end].0 == order[start].0 {
            end += 1;
        }
        let cell = &order[start].0;
        for off in &offsets {
            for (p, (c, o)) in probe.iter_mut().zip(cell.iter().zip(off)) {
                *p = c + o;
            }
            // Each unordered pair of cells is handled from its lexicographically smaller side.
            let ord = crate::process::Location::total_cmp(&probe, cell);
            if ord == std::cmp::Ordering::Less {
                continue;
            }
            let lo = keys.partition_point(|k| crate::process::Location::total_cmp(*k, &probe).is_lt());
            let mut hi = lo;
            while hi < keys.len() && *keys[hi] == probe {
                hi += 1;
            }
            for a in start..end {
                let i = order[a].1;
                let from = if ord == std::cmp::Ordering::Equal { a + 1 } else { lo };
                for b in from.max(lo)..hi {
                    let j = order[b].1;
                    let d2 = dist2(&points[i], &points[j]);
                    if d2 <= c2 {
                        visit(i.min(j), i.max(j), d2.sqrt());
                    }
                }
            }
        }
        start = end;
    }
}

fn neighbor_offsets(d: usize) -> Vec<Coords> {
    let mut out = vec![Coords::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1.0, 0.0, 1.0].into_iter().map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

/// Quadratic reference implementation of [`for_each_pair_within`].
pub fn brute_pairs(points: &[Coords], cutoff: f64, mut visit: impl FnMut(usize, usize, f64)) {
    let c2 = cutoff * cutoff;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2 = dist2(&points[i], &points[j]);
            if d2 <= c2 {
                visit(i, j, d2.sqrt());
            }
        }
    }
}

/// Number of unordered pairs within `cutoff`.
pub fn count_pairs_within(points: &[Coords], cutoff: f64) -> u64 {
    let mut n = 0;
    for_each_pair_within(points, cutoff, |_, _, _| n += 1);
    n
}

fn check_arity(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > MAX_ARITY {
        return Err(invalid("k", format!("arity must be in 1..={MAX_ARITY}")));
    }
    let subsets = binom(n, k);
    if subsets > MAX_SUBSETS {
        return Err(Error::EnumerationTooLarge { arity: k, subsets });
    }
    Ok(())
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Visit f(subset) for every unordered k-subset of distinct points inside dom f.
/// Points of multiplicity m count as m distinct points.
pub fn for_each_subset<X, K>(
    config: &Configuration<X>,
    kernel: &K,
    brute_force: bool,
    mut visit: impl FnMut(K::Output),
) -> Result<()>
where
    X: Location + Positioned,
    K: SymmetricKernel<X>,
{
    let pts = config.expanded();
    let k = kernel.arity();
    check_arity(k, pts.len())?;
    if pts.len() < k {
        return Ok(());
    }
    if let (2, Some(c), false) = (k, kernel.pair_cutoff(), brute_force) {
        if let Some(coords) = pts
            .iter()
            .map(|p| p.position().map(Coords::from_slice))
            .collect::<Option<Vec<Coords>>>()
        {
            for_each_pair_within(&coords, c, |i, j, _| {
                let xs = [&pts[i], &pts[j]];
                if kernel.in_domain(&xs) {
                    visit(kernel.eval(&xs));
                }
            });
            return Ok(());
        }
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut xs: Vec<&X> = Vec::with_capacity(k);
    loop {
        xs.clear();
        xs.extend(idx.iter().map(|&i| &pts[i]));
        if kernel.in_domain(&xs) {
            visit(kernel.eval(&xs));
        }
        if !next_combination(&mut idx, pts.len()) {
            break;
        }
    }
    Ok(())
}

/// Induced process ξ = Σ over k-subsets in dom f of δ_{f(subset)}.
pub fn induce<X, K>(config: &Configuration<X>, kernel: &K) -> Result<Configuration<K::Output>>
where
    X: Location + Positioned,
    K: SymmetricKernel<X>,
{
    let mut out = Vec::new();
    for_each_subset(config, kernel, false, |y| out.push(y))?;
    Ok(Configuration::from_points(kernel.target_space(&config.space), out))
}

/// Same as [`induce`] but always by plain enumeration.
pub fn induce_brute_force<X, K>(config: &Configuration<X>, kernel: &K) -> Result<Configuration<K::Output>>
where
    X: Location + Positioned,
    K: SymmetricKernel<X>,
{
    let mut out = Vec::new();
    for_each_subset(config, kernel, true, |y| out.push(y))?;
    Ok(Configuration::from_points(kernel.target_space(&config.space), out))
}

/// Target Borel set for U-statistic counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetSet {
    Whole,
    /// Closed interval [lo, hi] on ℝ.
    Interval(f64, f64),
    /// Closed box on ℝ^d.
    Box(Vec<f64>, Vec<f64>),
}

/// Values that can be tested for membership in a [`TargetSet`].
pub trait TargetValue {
    fn in_set(&self, set: &TargetSet) -> bool;
}

impl TargetValue for f64 {
    fn in_set(&self, set: &TargetSet) -> bool {
        match set {
            TargetSet::Whole => true,
            TargetSet::Interval(lo, hi) => (*lo..=*hi).contains(self),
            TargetSet::Box(lo, hi) => lo.len() == 1 && (lo[0]..=hi[0]).contains(self),
        }
    }
}

impl TargetValue for Point {
    fn in_set(&self, set: &TargetSet) -> bool {
        match set {
            TargetSet::Whole => true,
            TargetSet::Interval(lo, hi) => self.dim() == 1 && (*lo..=*hi).contains(&self.coords[0]),
            TargetSet::Box(lo, hi) => {
                lo.len() == self.dim()
                    && self
                        .coords
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(x, (l, h))| (*l..=*h).contains(x))
            }
        }
    }
}

/// S(B): number of k-subsets in dom f whose image lies in B.
pub fn u_statistic_count<X, K>(config: &Configuration<X>, kernel: &K, target: &TargetSet) -> Result<u64>
where
    X: Location + Positioned,
    K: SymmetricKernel<X>,
    K::Output: TargetValue,
{
    let mut n = 0;
    for_each_subset(config, kernel, false, |y| {
        if y.in_set(target) {
            n += 1;
        }
    })?;
    Ok(n)
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Σ h over unordered k-subsets in dom h.
pub fn u_statistic_sum<X, K>(config: &Configuration<X>, kernel: &K) -> Result<f64>
where
    X: Location + Positioned,
    K: SymmetricKernel<X, Output = f64>,
{
    let mut acc = KahanSum::default();
    for_each_subset(config, kernel, false, |y| acc.add(y))?;
    Ok(acc.value())
}

/// Midpoints of all pairs within the cutoff.
pub fn edge_midpoint_process(config: &Configuration<Point>, cutoff: f64) -> Result<Configuration<Point>> {
    if !(cutoff >= 0.0) {
        return Err(invalid("cutoff", "must be nonnegative"));
    }
    induce(config, &Midpoint { cutoff })
}

/// Rescaling y ↦ t^γ y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleLaw {
    pub gamma: f64,
    pub t: f64,
}

impl RescaleLaw {
    pub fn factor(&self) -> f64 {
        self.t.powf(self.gamma)
    }
}

/// Locations that can be multiplied by a scalar.
pub trait Scalable: Location {
    fn scaled(&self, c: f64) -> Self;
}

impl Scalable for f64 {
    fn scaled(&self, c: f64) -> Self {
        self * c
    }
}

impl Scalable for Point {
    fn scaled(&self, c: f64) -> Self {
        Point::from_coords(self.coords.iter().map(|x| x * c).collect())
    }
}

/// t^γ • ξ: every atom multiplied by t^γ, multiplicities preserved.
pub fn rescale<T: Scalable>(config: &Configuration<T>, law: RescaleLaw) -> Configuration<T> {
    let c = law.factor();
    config.map(config.space.clone(), |x| x.scaled(c))
}

/// Atoms h ≠ 0 mapped to sign(h) t^γ |h|^{−α}.
pub fn signed_power_transform(
    config: &Configuration<f64>,
    alpha: f64,
    gamma: f64,
    t: f64,
) -> Result<Configuration<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", "need 0 < alpha < 1"));
    }
    let c = t.powf(gamma);
    Ok(Configuration::from_atoms(
        SpaceTag::Real,
        config
            .atoms()
            .iter()
            .filter(|(h, _)| *h != 0.0)
            .map(|(h, m)| (h.signum() * c * h.abs().powf(-alpha), *m)),
    ))
}

/// Sum of ‖x − y‖^b over pairs within `cutoff`.
pub fn edge_length_sum(points: &[Coords], cutoff: f64, b: f64) -> f64 {
    let mut acc = KahanSum::default();
    for_each_pair_within(points, cutoff, |_, _, r| acc.add(if b == 0.0 { 1.0 } else { r.powf(b) }));
    acc.value()
}

/// Plain pairwise distance helper for callers holding raw coordinates.
pub fn pair_distance(a: &[f64], b: &[f64]) -> f64 {
    dist(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::process::sample_poisson;
    use crate::rng::SeededRng;
    use rand::seq::SliceRandom;

    fn line(xs: &[f64]) -> Configuration<Point> {
        Configuration::from_points(
            SpaceTag::Euclidean(1),
            xs.iter().map(|x| Point::new(&[*x]).unwrap()),
        )
    }

    #[test]
    fn identity_reproduces_input() {
        let c = line(&[0.1, 0.5, 0.5, 0.9]);
        assert_eq!(induce(&c, &Identity).unwrap(), c);
    }

    #[test]
    fn collinear_distances() {
        let c = line(&[0.0, 1.0, 2.0]);
        let out = induce(&c, &PairDistance::default()).unwrap();
        assert_eq!(out.atoms(), &[(1.0, 2), (2.0, 1)]);
    }

    #[test]
    fn multiplicity_counts_as_distinct_points() {
        let c = line(&[0.0, 0.0, 1.0]);
        let out = induce(&c, &PairDistance::default()).unwrap();
        assert_eq!(out.atoms(), &[(0.0, 1), (1.0, 2)]);
    }

    #[test]
    fn total_mass_matches_ordered_loop() {
        let mut r = SeededRng::new(1, 0).rng();
        let c = crate::process::sample_binomial(&Domain::unit_cube(2), 10, &mut r).unwrap();
        let pts = c.expanded();
        let kernel = PairDistance { cutoff: Some(0.4) };
        let mut ordered = 0;
        for (i, x) in pts.iter().enumerate() {
            for (j, y) in pts.iter().enumerate() {
                if i != j && x.dist(y) <= 0.4 {
                    ordered += 1;
                }
            }
        }
        assert_eq!(induce(&c, &kernel).unwrap().total_count(), ordered / 2);
    }

    #[test]
    fn grid_matches_brute_force() {
        for (d, t, c) in [(1, 400.0, 0.01), (2, 400.0, 0.05), (3, 500.0, 0.12), (2, 50.0, 0.7)] {
            let mut r = SeededRng::new(2, d as u64).rng();
            let pts = crate::process::sample_poisson_points(&Domain::unit_cube(d), t, &mut r).unwrap();
            let mut fast = Vec::new();
            for_each_pair_within(&pts, c, |i, j, _| fast.push((i, j)));
            let mut slow = Vec::new();
            brute_pairs(&pts, c, |i, j, _| slow.push((i, j)));
            fast.sort();
            assert_eq!(fast, slow, "d={d}");
        }
    }

    #[test]
    fn permutation_invariance() {
        let mut r = SeededRng::new(3, 0).rng();
        let c = sample_poisson(&Domain::unit_cube(2), 60.0, &mut r).unwrap();
        let mut pts = c.expanded();
        pts.shuffle(&mut r);
        let shuffled = Configuration::from_points(c.space.clone(), pts);
        let k = Midpoint { cutoff: 0.2 };
        assert_eq!(induce(&c, &k).unwrap(), induce(&shuffled, &k).unwrap());
        assert_eq!(induce(&c, &k).unwrap(), induce_brute_force(&c, &k).unwrap());
    }

    #[test]
    fn triple_kernel() {
        let c = line(&[0.0, 1.0, 2.0, 3.0]);
        let span = FnKernel::new(
            3,
            SpaceTag::Real,
            |xs: &[&Point]| {
                let v: Vec<f64> = xs.iter().map(|p| p.coords[0]).collect();
                v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
            },
            |_: &[&Point]| true,
        );
        let out = induce(&c, &span).unwrap();
        assert_eq!(out.atoms(), &[(2.0, 2), (3.0, 2)]);
    }

    #[test]
    fn arity_guard() {
        let c = line(&[0.0; 3]);
        let k5 = FnKernel::new(5, SpaceTag::Real, |_: &[&Point]| 0.0, |_: &[&Point]| true);
        assert!(induce(&c, &k5).is_err());
        let k2 = FnKernel::new(2, SpaceTag::Real, |_: &[&Point]| 0.0, |_: &[&Point]| true);
        assert!(induce(&line(&[0.5]), &k2).unwrap().is_empty());
    }

    #[test]
    fn counts_and_sums() {
        let mut r = SeededRng::new(4, 0).rng();
        let c = sample_poisson(&Domain::unit_cube(2), 40.0, &mut r).unwrap();
        let n = c.total_count();
        let all = FnKernel::new(2, SpaceTag::Real, |_: &[&Point]| 1.0, |_: &[&Point]| true);
        assert_eq!(u_statistic_sum(&c, &all).unwrap(), binom(n as usize, 2));
        assert_eq!(
            u_statistic_count(&c, &PairDistance::default(), &TargetSet::Whole).unwrap(),
            binom(n as usize, 2) as u64
        );
        let theta = 0.15;
        let pts = c.expanded();
        let mut brute = 0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[i].dist(&pts[j]) <= theta {
                    brute += 1;
                }
            }
        }
        let edges = u_statistic_count(&c, &PairDistance { cutoff: Some(theta) }, &TargetSet::Whole).unwrap();
        assert_eq!(edges, brute);
        let coords: Vec<Coords> = pts.iter().map(|p| p.coords.clone()).collect();
        assert_eq!(edge_length_sum(&coords, theta, 0.0), brute as f64);
        assert_eq!(count_pairs_within(&coords, theta), brute);
        let short = u_statistic_count(&c, &PairDistance::default(), &TargetSet::Interval(0.0, theta)).unwrap();
        assert_eq!(short, brute);
        assert_eq!(u_statistic_count(&line(&[]), &PairDistance::default(), &TargetSet::Whole).unwrap(), 0);
    }

    #[test]
    fn inverse_power_sum() {
        let mut r = SeededRng::new(5, 0).rng();
        let c = crate::process::sample_binomial(&Domain::unit_cube(2), 5, &mut r).unwrap();
        let tau = 4.0;
        let h = FnKernel::new(2, SpaceTag::Real, move |xs: &[&Point]| xs[0].dist(xs[1]).powf(-tau), |_: &[&Point]| true);
        let pts = c.expanded();
        let mut direct = 0.0;
        for i in 0..5 {
            for j in i + 1..5 {
                direct += pts[i].dist(&pts[j]).powf(-tau);
            }
        }
        let v = u_statistic_sum(&c, &h).unwrap();
        assert!((v - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn midpoints() {
        let c = line(&[0.1, 0.5]);
        let m = edge_midpoint_process(&c, 0.5).unwrap();
        assert_eq!(m.total_count(), 1);
        assert!((m.atoms()[0].0.coords[0] - 0.3).abs() < 1e-15);
        let mut r = SeededRng::new(6, 0).rng();
        let c = sample_poisson(&Domain::unit_cube(2), 100.0, &mut r).unwrap();
        assert!(edge_midpoint_process(&c, 0.0).unwrap().is_empty());
        let coords: Vec<Coords> = c.expanded().iter().map(|p| p.coords.clone()).collect();
        let mut slow = 0;
        brute_pairs(&coords, 0.1, |_, _, _| slow += 1);
        assert_eq!(edge_midpoint_process(&c, 0.1).unwrap().total_count(), slow);
    }

    #[test]
    fn rescaling() {
        let c = Configuration::from_points(SpaceTag::Real, vec![2.0, 5.0]);
        assert_eq!(rescale(&c, RescaleLaw { gamma: 0.0, t: 7.0 }), c);
        let one = Configuration::from_points(SpaceTag::Real, vec![2.0]);
        assert_eq!(rescale(&one, RescaleLaw { gamma: 1.0, t: 3.0 }).atoms(), &[(6.0, 1)]);
        assert_eq!(rescale(&c, RescaleLaw { gamma: -0.7, t: 3.0 }).total_count(), 2);
    }

    #[test]
    fn signed_powers() {
        let c = Configuration::from_points(SpaceTag::Real, vec![1.0, -4.0, 0.0]);
        let out = signed_power_transform(&c, 0.5, 0.0, 10.0).unwrap();
        assert_eq!(out.atoms(), &[(-0.5, 1), (1.0, 1)]);
        assert!(signed_power_transform(&c, 1.0, 0.0, 1.0).is_err());

        let mut r = SeededRng::new(7, 0).rng();
        let pts = crate::process::sample_binomial(&Domain::unit_cube(2), 6, &mut r).unwrap();
        let dists = induce(&pts, &PairDistance::default()).unwrap();
        let (tau, d, t) = (4.0, 2.0, 50.0);
        let alpha = d / tau;
        let gamma = 2.0;
        let out = signed_power_transform(&dists, alpha, gamma, t).unwrap();
        let e = pts.expanded();
        let mut direct: Vec<f64> = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                direct.push(t * t * e[i].dist(&e[j]).powf(-alpha));
            }
        }
        direct.sort_by(f64::total_cmp);
        let got = out.expanded();
        for (a, b) in got.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
