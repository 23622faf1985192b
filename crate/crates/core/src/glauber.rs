//! Spatial birth–death (Glauber) dynamics with a Poisson invariant law.

use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::{Domain, Point};
use crate::metrics::{poisson_pmf, tv_integer, EmpiricalDistribution};
use crate::process::{Configuration, Location, SpaceTag};
use crate::rng::SeededRng;

type Sampler<T> = Arc<dyn Fn(&mut dyn RngCore) -> T + Send + Sync>;

/// Finite intensity measure M: total mass plus a sampler of M(·)/M(Y).
#[derive(Clone)]
pub struct TargetIntensity<T> {
    pub mass: f64,
    pub space: SpaceTag,
    sampler: Sampler<T>,
}

impl<T> std::fmt::Debug for TargetIntensity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetIntensity")
            .field("mass", &self.mass)
            .field("space", &self.space)
            .finish()
    }
}

impl<T: Location> TargetIntensity<T> {
    pub fn new(mass: f64, space: SpaceTag, sampler: Sampler<T>) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", "must be positive and finite"));
        }
        Ok(Self { mass, space, sampler })
    }

    pub fn sample_location(&self, rng: &mut dyn RngCore) -> T {
        (self.sampler)(rng)
    }

    fn poisson_sample(&self, scale: f64, rng: &mut dyn RngCore) -> Vec<T> {
        let lambda = self.mass * scale;
        let n = if lambda > 0.0 {
            Poisson::new(lambda).unwrap().sample(rng) as usize
        } else {
            0
        };
        (0..n).map(|_| self.sample_location(rng)).collect()
    }
}

impl TargetIntensity<Point> {
    /// t times the reference measure of `domain`.
    pub fn uniform(domain: Domain, t: f64) -> Result<Self> {
        domain.validate()?;
        let space = SpaceTag::of_domain(&domain);
        let mass = t * domain.measure();
        Self::new(mass, space, Arc::new(move |rng| domain.sample_uniform(rng)))
    }
}

/// One event of a birth–death path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Event<T> {
    Birth(T),
    /// Death of the particle with this location.
    Death(T),
}

/// A simulated path on [0, horizon].
#[derive(Debug, Clone, Serialize)]
pub struct BirthDeathTrajectory<T> {
    pub initial: Configuration<T>,
    pub events: Vec<(f64, Event<T>)>,
    pub horizon: f64,
}

impl<T: Location> BirthDeathTrajectory<T> {
    /// Configuration at time `s` (≤ horizon), replaying the event log.
    pub fn state_at(&self, s: f64) -> Configuration<T> {
        let mut pop = self.initial.expanded();
        for (time, ev) in &self.events {
            if *time > s {
                break;
            }
            match ev {
                Event::Birth(x) => pop.push(x.clone()),
                Event::Death(x) => {
                    let i = pop
                        .iter()
                        .position(|p| p.total_cmp(x).is_eq())
                        .expect("death of a living particle");
                    pop.swap_remove(i);
                }
            }
        }
        Configuration::from_points(self.initial.space.clone(), pop)
    }
}

fn check_horizon(s: f64) -> Result<()> {
    if !(s >= 0.0) || s.is_nan() {
        return Err(invalid("s", "horizon must be nonnegative"));
    }
    Ok(())
}

/// Gillespie simulation: births at rate M(Y), each particle dies at rate 1.
pub fn simulate_trajectory<T: Location>(
    omega: &Configuration<T>,
    target: &TargetIntensity<T>,
    s: f64,
    rng: &mut dyn RngCore,
) -> Result<BirthDeathTrajectory<T>> {
    check_horizon(s)?;
    let mut pop = omega.expanded();
    let mut events = Vec::new();
    let mut time = 0.0;
    loop {
        let rate = target.mass + pop.len() as f64;
        let e: f64 = Exp1.sample(rng);
        time += e / rate;
        if time > s || !time.is_finite() {
            break;
        }
        if rng.random::<f64>() * rate < target.mass {
            let x = target.sample_location(rng);
            pop.push(x.clone());
            events.push((time, Event::Birth(x)));
        } else {
            let i = rng.random_range(0..pop.len());
            events.push((time, Event::Death(pop.swap_remove(i))));
        }
    }
    Ok(BirthDeathTrajectory {
        initial: omega.clone(),
        events,
        horizon: s,
    })
}

/// G(s) started from ω, by event-driven simulation.
pub fn simulate_event_driven<T: Location>(
    omega: &Configuration<T>,
    target: &TargetIntensity<T>,
    s: f64,
    rng: &mut dyn RngCore,
) -> Result<Configuration<T>> {
    check_horizon(s)?;
    let mut pop = omega.expanded();
    let mut time = 0.0;
    loop {
        let rate = target.mass + pop.len() as f64;
        let e: f64 = Exp1.sample(rng);
        time += e / rate;
        if time > s || !time.is_finite() {
            break;
        }
        if rng.random::<f64>() * rate < target.mass {
            pop.push(target.sample_location(rng));
        } else {
            let i = rng.random_range(0..pop.len());
            pop.swap_remove(i);
        }
    }
    Ok(Configuration::from_points(omega.space.clone(), pop))
}

/// G(s) in law: ω thinned with retention e^{−s} plus an independent Poisson
/// process with intensity (1 − e^{−s})M.
pub fn simulate_exact_law<T: Location>(
    omega: &Configuration<T>,
    target: &TargetIntensity<T>,
    s: f64,
    rng: &mut dyn RngCore,
) -> Result<Configuration<T>> {
    check_horizon(s)?;
    let keep = (-s).exp();
    let mut pop: Vec<T> = omega
        .expanded()
        .into_iter()
        .filter(|_| rng.random::<f64>() < keep)
        .collect();
    pop.extend(target.poisson_sample(1.0 - keep, rng));
    Ok(Configuration::from_points(omega.space.clone(), pop))
}

/// G(s) from explicit lifetimes: every particle gets an Exp(1) lifetime, births
/// form a rate-M(Y) Poisson process on [0, s]. Used for couplings.
fn simulate_lifetimes<T: Location>(
    initial: &[T],
    target: &TargetIntensity<T>,
    s: f64,
    rng: &mut dyn RngCore,
) -> Vec<T> {
    let mut pop: Vec<T> = initial
        .iter()
        .filter(|_| rng.sample::<f64, _>(Exp1) > s)
        .cloned()
        .collect();
    let lambda = target.mass * s;
    let n = if lambda > 0.0 {
        Poisson::new(lambda).unwrap().sample(rng) as usize
    } else {
        0
    };
    for _ in 0..n {
        let born = s * rng.random::<f64>();
        let x = target.sample_location(rng);
        let life: f64 = Exp1.sample(rng);
        if life > s - born {
            pop.push(x);
        }
    }
    pop
}

/// Which simulator to use for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Simulator {
    EventDriven,
    ExactLaw,
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

fn estimate_of(v: &[f64]) -> Estimate {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Estimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

/// Functional of configurations; Lipschitz-1 with respect to total variation.
pub type Functional<'a, T> = &'a (dyn Fn(&Configuration<T>) -> f64 + Sync);

/// P_s h(ω) = E[h(G(s)) | G(0) = ω].
pub fn estimate_semigroup<T: Location>(
    omega: &Configuration<T>,
    target: &TargetIntensity<T>,
    h: Functional<'_, T>,
    s: f64,
    reps: usize,
    seed: u64,
    sim: Simulator,
) -> Result<Estimate> {
    check_horizon(s)?;
    if s == 0.0 {
        return Ok(Estimate {
            mean: h(omega),
            stderr: 0.0,
        });
    }
    if reps < 2 {
        return Err(invalid("reps", "need at least two replications"));
    }
    let vals: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = SeededRng::new(seed, rep).rng();
            let g = match sim {
                Simulator::EventDriven => simulate_event_driven(omega, target, s, &mut rng),
                Simulator::ExactLaw => simulate_exact_law(omega, target, s, &mut rng),
            }?;
            Ok(h(&g))
        })
        .collect::<Result<_>>()?;
    Ok(estimate_of(&vals))
}

/// Both sides of D_y P_s h(ω) = e^{−s} P_s(D_y h)(ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutationResult {
    pub lhs: Estimate,
    pub rhs: Estimate,
}

impl CommutationResult {
    pub fn pooled_stderr(&self) -> f64 {
        self.lhs.stderr.hypot(self.rhs.stderr)
    }

    pub fn z_score(&self) -> f64 {
        let se = self.pooled_stderr();
        let gap = self.lhs.mean - self.rhs.mean;
        if se == 0.0 {
            if gap.abs() < 1e-12 { 0.0 } else { f64::INFINITY }
        } else {
            gap / se
        }
    }
}

fn with_point<T: Location>(omega: &[T], y: &T, space: &SpaceTag) -> Configuration<T> {
    let mut v = omega.to_vec();
    v.push(y.clone());
    Configuration::from_points(space.clone(), v)
}

/// Monte Carlo check of the gradient/semigroup commutation relation.
///
/// The left side couples the paths from ω and ω + δ_y through shared lifetimes
/// and births; the extra particle has its own lifetime. The right side
/// averages D_y h over independent paths from ω.
pub fn commutation_check<T: Location>(
    omega: &Configuration<T>,
    y: &T,
    target: &TargetIntensity<T>,
    h: Functional<'_, T>,
    s: f64,
    reps: usize,
    seed: u64,
) -> Result<CommutationResult> {
    check_horizon(s)?;
    if reps < 2 {
        return Err(invalid("reps", "need at least two replications"));
    }
    let start = omega.expanded();
    let space = &omega.space;
    let rows: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = SeededRng::new(seed, 2 * rep).rng();
            let g = simulate_lifetimes(&start, target, s, &mut rng);
            let alive = rng.sample::<f64, _>(Exp1) > s;
            let base = Configuration::from_points(space.clone(), g.clone());
            let lhs = if alive {
                h(&with_point(&g, y, space)) - h(&base)
            } else {
                0.0
            };
            let mut rng = SeededRng::new(seed, 2 * rep + 1).rng();
            let g = simulate_lifetimes(&start, target, s, &mut rng);
            let base = Configuration::from_points(space.clone(), g.clone());
            let rhs = (-s).exp() * (h(&with_point(&g, y, space)) - h(&base));
            (lhs, rhs)
        })
        .collect();
    let (l, r): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(CommutationResult {
        lhs: estimate_of(&l),
        rhs: estimate_of(&r),
    })
}

/// Coupled estimate of P_s h(ω₁) − P_s h(ω₂) for ω₂ ⊂ ω₁ (shared randomness for ω₂,
/// independent lifetimes for the particles of ω₁ ∖ ω₂).
pub fn coupled_difference<T: Location>(
    omega1: &Configuration<T>,
    omega2: &Configuration<T>,
    target: &TargetIntensity<T>,
    h: Functional<'_, T>,
    s: f64,
    reps: usize,
    seed: u64,
) -> Result<Estimate> {
    check_horizon(s)?;
    let small = omega2.expanded();
    let mut extra = omega1.expanded();
    for x in &small {
        let i = extra
            .iter()
            .position(|p| p.total_cmp(x).is_eq())
            .ok_or_else(|| invalid("omega2", "must be contained in omega1"))?;
        extra.swap_remove(i);
    }
    let vals: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = SeededRng::new(seed, rep).rng();
            let g = simulate_lifetimes(&small, target, s, &mut rng);
            let mut g1 = g.clone();
            g1.extend(extra.iter().filter(|_| rng.sample::<f64, _>(Exp1) > s).cloned());
            h(&Configuration::from_points(omega1.space.clone(), g1))
                - h(&Configuration::from_points(omega1.space.clone(), g))
        })
        .collect();
    Ok(estimate_of(&vals))
}

/// Empirical count pmf of G(s) over `reps` paths.
pub fn count_law<T: Location>(
    omega: &Configuration<T>,
    target: &TargetIntensity<T>,
    s: f64,
    reps: usize,
    seed: u64,
    sim: Simulator,
) -> Result<Vec<f64>> {
    check_horizon(s)?;
    if reps == 0 {
        return Err(invalid("reps", "need at least one replication"));
    }
    let counts: Vec<u64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = SeededRng::new(seed, rep).rng();
            let g = match sim {
                Simulator::EventDriven => simulate_event_driven(omega, target, s, &mut rng),
                Simulator::ExactLaw => simulate_exact_law(omega, target, s, &mut rng),
            }?;
            Ok(g.total_count())
        })
        .collect::<Result<_>>()?;
    EmpiricalDistribution::from_counts(&counts)?.to_pmf()
}

/// TV distance between the count law of G(s) and Poisson(M(Y)), per grid point.
pub fn ergodicity_check<T: Location>(
    omega: &Configuration<T>,
    target: &TargetIntensity<T>,
    s_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("s_grid", "must be strictly increasing"));
    }
    let limit = poisson_pmf(target.mass)?;
    s_grid
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let pmf = count_law(omega, target, s, reps, crate::rng::mix(seed, i as u64), Simulator::EventDriven)?;
            Ok((s, tv_integer(&pmf, &limit)))
        })
        .collect()
}

/// Randomized spot check of |h(ω + δ_x) − h(ω)| ≤ 1. Logs a warning and returns
/// false on the first violation.
pub fn lipschitz_spot_check<T: Location>(
    h: Functional<'_, T>,
    omega: &Configuration<T>,
    target: &TargetIntensity<T>,
    trials: usize,
    rng: &mut dyn RngCore,
) -> bool {
    let mut cur = omega.expanded();
    for _ in 0..trials {
        let x = target.sample_location(rng);
        let a = Configuration::from_points(omega.space.clone(), cur.clone());
        let b = with_point(&cur, &x, &omega.space);
        let gap = (h(&b) - h(&a)).abs();
        if gap > 1.0 + 1e-12 {
            log::warn!("functional is not Lipschitz-1: |D_x h| = {gap}");
            return false;
        }
        if rng.random::<bool>() || cur.is_empty() {
            cur.push(x);
        } else {
            let i = rng.random_range(0..cur.len());
            cur.swap_remove(i);
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_target(mass: f64) -> TargetIntensity<Point> {
        TargetIntensity::uniform(Domain::unit_cube(2), mass).unwrap()
    }

    fn empty() -> Configuration<Point> {
        Configuration::empty(SpaceTag::Euclidean(2))
    }

    fn pts(xs: &[[f64; 2]]) -> Configuration<Point> {
        Configuration::from_points(SpaceTag::Euclidean(2), xs.iter().map(|x| Point::new(x).unwrap()))
    }

    #[test]
    fn zero_horizon_is_identity() {
        let w = pts(&[[0.1, 0.2], [0.5, 0.5]]);
        let m = unit_target(3.0);
        let mut r = SeededRng::new(1, 0).rng();
        assert_eq!(simulate_event_driven(&w, &m, 0.0, &mut r).unwrap(), w);
        assert_eq!(simulate_exact_law(&w, &m, 0.0, &mut r).unwrap(), w);
        assert!(simulate_event_driven(&w, &m, -1.0, &mut r).is_err());
    }

    #[test]
    fn trajectory_replays_to_final_state() {
        let w = pts(&[[0.1, 0.2], [0.5, 0.5]]);
        let m = unit_target(4.0);
        let mut r = SeededRng::new(2, 0).rng();
        let tr = simulate_trajectory(&w, &m, 3.0, &mut r).unwrap();
        assert!(tr.events.windows(2).all(|e| e[0].0 < e[1].0));
        let mut r2 = SeededRng::new(2, 0).rng();
        let direct = simulate_event_driven(&w, &m, 3.0, &mut r2).unwrap();
        assert_eq!(tr.state_at(3.0), direct);
        assert_eq!(tr.state_at(0.0), w);
    }

    #[test]
    fn survival_probability() {
        let w = pts(&[[0.3, 0.3]]);
        let y = w.atoms()[0].0.clone();
        let m = unit_target(2.0);
        let s = 0.7;
        let alive = |c: &Configuration<Point>| c.count_in(|p| *p == y) as f64;
        let est = estimate_semigroup(&w, &m, &alive, s, 100_000, 3, Simulator::EventDriven).unwrap();
        assert!((est.mean - (-s).exp()).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn mean_count_from_empty() {
        let m = unit_target(5.0);
        let count = |c: &Configuration<Point>| c.total_count() as f64;
        let s = 0.8;
        for sim in [Simulator::EventDriven, Simulator::ExactLaw] {
            let est = estimate_semigroup(&empty(), &m, &count, s, 20_000, 4, sim).unwrap();
            let exact = (1.0 - (-s).exp()) * 5.0;
            assert!((est.mean - exact).abs() < 3.0 * est.stderr, "{sim:?} {est:?}");
        }
        let at0 = estimate_semigroup(&pts(&[[0.5, 0.5]]), &m, &count, 0.0, 10, 4, Simulator::ExactLaw).unwrap();
        assert_eq!((at0.mean, at0.stderr), (1.0, 0.0));
    }

    #[test]
    fn simulators_agree_on_capped_functional() {
        let w = pts(&[[0.1, 0.1], [0.2, 0.9], [0.7, 0.4], [0.8, 0.8]]);
        let m = unit_target(6.0);
        let h = |c: &Configuration<Point>| c.count_in(|p| p.coords[0] < 0.5).min(10) as f64;
        let a = estimate_semigroup(&w, &m, &h, 0.6, 20_000, 5, Simulator::EventDriven).unwrap();
        let b = estimate_semigroup(&w, &m, &h, 0.6, 20_000, 6, Simulator::ExactLaw).unwrap();
        assert!((a.mean - b.mean).abs() < 3.0 * a.stderr.hypot(b.stderr));
    }

    #[test]
    fn commutation_exact_cases() {
        let m = unit_target(3.0);
        let y = Point::new(&[0.5, 0.5]).unwrap();
        let count = |c: &Configuration<Point>| c.total_count() as f64;
        let w = pts(&[[0.2, 0.2]]);
        let r0 = commutation_check(&w, &y, &m, &count, 0.0, 100, 7).unwrap();
        assert_eq!((r0.lhs.mean, r0.rhs.mean), (1.0, 1.0));
        let s = 1.0;
        let r = commutation_check(&w, &y, &m, &count, s, 20_000, 8).unwrap();
        assert!((r.rhs.mean - (-s).exp()).abs() < 1e-12);
        assert!((r.lhs.mean - (-s).exp()).abs() < 3.0 * r.lhs.stderr);
    }

    #[test]
    fn coupling_bound_for_counts() {
        let m = unit_target(2.0);
        let w1 = pts(&[[0.1, 0.1], [0.2, 0.2], [0.3, 0.3]]);
        let w2 = pts(&[[0.2, 0.2]]);
        let count = |c: &Configuration<Point>| c.total_count() as f64;
        let s = 0.5;
        let d = coupled_difference(&w1, &w2, &m, &count, s, 20_000, 9).unwrap();
        let bound = 2.0 * (-s).exp();
        assert!((d.mean - bound).abs() < 3.0 * d.stderr);
        assert!(coupled_difference(&w2, &w1, &m, &count, s, 10, 9).is_err());
    }

    #[test]
    fn ergodicity_from_empty() {
        let m = unit_target(2.0);
        let table = ergodicity_check(&empty(), &m, &[0.0, 0.5, 2.0, 8.0], 20_000, 10).unwrap();
        assert!((table[0].1 - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
        assert!(table.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(table[3].1 < 0.03);
        assert!(ergodicity_check(&empty(), &m, &[1.0, 1.0], 10, 0).is_err());
    }

    #[test]
    fn lipschitz_spot_check_flags_violations() {
        let m = unit_target(2.0);
        let mut r = SeededRng::new(11, 0).rng();
        let good = |c: &Configuration<Point>| c.total_count().min(3) as f64;
        assert!(lipschitz_spot_check(&good, &empty(), &m, 200, &mut r));
        let bad = |c: &Configuration<Point>| 2.0 * c.total_count() as f64;
        assert!(!lipschitz_spot_check(&bad, &empty(), &m, 200, &mut r));
    }
}
