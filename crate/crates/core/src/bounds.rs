//! Explicit approximation bounds and limit constants.
//!
//! Every bound is assembled from nonnegative terms; each term records whether
//! it came from a closed form, from quadrature or from Monte Carlo.

use std::f64::consts::PI;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{binom, cube_pair_content, kappa, Coords, Domain};
use crate::metrics::{AnalyticLaw, JumpLaw};
use crate::quad::{integrate, integrate_pieces};
use crate::rng::SeededRng;

const QUAD_TOL: f64 = 1e-10;

/// How a term was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Quadrature,
    MonteCarlo,
}

/// Underlying process of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    Poisson,
    Binomial { n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub value: f64,
    pub provenance: Provenance,
}

impl Term {
    pub fn analytic(value: f64) -> Self {
        Term {
            value,
            provenance: Provenance::Analytic,
        }
    }

    fn zero() -> Self {
        Term::analytic(0.0)
    }
}

/// Which combination produced the assembled bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    /// dtv + 2^{k+1}/k!·r (+ binomial term).
    RTerm,
    /// dtv + 2·(second-moment excess) (+ binomial term).
    Moment,
    /// Binomial process with fewer than k points: ξ is empty.
    Trivial,
}

impl BoundForm {
    pub fn name(&self) -> &'static str {
        match self {
            BoundForm::RTerm => "r-form",
            BoundForm::Moment => "moment-form",
            BoundForm::Trivial => "trivial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub dtv: Term,
    pub r: Term,
    pub second_moment: Term,
    pub binomial_extra: Term,
    pub bound: f64,
    pub form: BoundForm,
}

/// First two moments of ξ(Y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub mean: f64,
    pub second: f64,
    pub method: Provenance,
    /// Standard errors of the two moments for Monte Carlo estimates.
    pub stderr: Option<(f64, f64)>,
}

impl MomentPair {
    pub fn exact(mean: f64, second: f64, method: Provenance) -> Self {
        MomentPair {
            mean,
            second,
            method,
            stderr: None,
        }
    }

    /// E ξ² − (E ξ)², which Jensen keeps nonnegative.
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

/// Falling factorial (n)_k.
pub fn falling(n: u64, k: usize) -> f64 {
    (0..k as u64).map(|i| n as f64 - i as f64).product::<f64>().max(0.0)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be nonnegative and finite"))
    }
}

fn binomial_extra(k: usize, n: u64, mass: f64) -> f64 {
    6f64.powi(k as i32) * factorial(k) * mass * mass / n as f64
}

/// Main KR bound in its r-form: dtv + 2^{k+1}/k!·r, plus 6^k k!·L(Y)²/n for
/// binomial input. A binomial process with n < k induces the empty process,
/// for which dtv = M(Y) is itself the distance.
pub fn thm_main_bound(dtv: f64, r: f64, k: usize, mode: Mode, mass_l: f64) -> Result<BoundReport> {
    nonneg("dtv", dtv)?;
    nonneg("r", r)?;
    nonneg("mass_l", mass_l)?;
    if k == 0 {
        return Err(invalid("k", "arity must be at least 1"));
    }
    if let Mode::Binomial { n } = mode {
        if n < k as u64 {
            return Ok(BoundReport {
                dtv: Term::analytic(dtv),
                r: Term::zero(),
                second_moment: Term::zero(),
                binomial_extra: Term::zero(),
                bound: dtv,
                form: BoundForm::Trivial,
            });
        }
    }
    let r = if k == 1 { 0.0 } else { r };
    let r_part = 2f64.powi(k as i32 + 1) / factorial(k) * r;
    let extra = match mode {
        Mode::Poisson => 0.0,
        Mode::Binomial { n } => binomial_extra(k, n, mass_l),
    };
    Ok(BoundReport {
        dtv: Term::analytic(dtv),
        r: Term::analytic(r),
        second_moment: Term::zero(),
        binomial_extra: Term::analytic(extra),
        bound: dtv + r_part + extra,
        form: BoundForm::RTerm,
    })
}

/// Second-moment excess E ξ² − E ξ − c·(E ξ)², with c = 1 (Poisson) or
/// (n−k)_k/(n)_k (binomial). Monte Carlo noise can push it below zero; it is
/// clamped at zero since the exact quantity is nonnegative.
pub fn moment_excess(moments: &MomentPair, k: usize, mode: Mode) -> f64 {
    let c = match mode {
        Mode::Poisson => 1.0,
        Mode::Binomial { n } => {
            if n < 2 * k as u64 {
                0.0
            } else {
                falling(n - k as u64, k) / falling(n, k)
            }
        }
    };
    (moments.second - moments.mean - c * moments.mean * moments.mean).max(0.0)
}

/// Main KR bound in its sharper moment form.
pub fn thm_main_moment_bound(dtv: f64, moments: &MomentPair, k: usize, mode: Mode) -> Result<BoundReport> {
    nonneg("dtv", dtv)?;
    nonneg("mean", moments.mean)?;
    nonneg("second", moments.second)?;
    if k == 0 {
        return Err(invalid("k", "arity must be at least 1"));
    }
    if let Mode::Binomial { n } = mode {
        if n < k as u64 {
            return thm_main_bound(dtv, 0.0, k, mode, 0.0);
        }
    }
    let excess = moment_excess(moments, k, mode);
    let extra = match mode {
        Mode::Poisson => 0.0,
        Mode::Binomial { n } => binomial_extra(k, n, moments.mean),
    };
    Ok(BoundReport {
        dtv: Term::analytic(dtv),
        r: Term::zero(),
        second_moment: Term {
            value: 2.0 * excess,
            provenance: moments.method,
        },
        binomial_extra: Term {
            value: extra,
            provenance: moments.method,
        },
        bound: dtv + 2.0 * excess + extra,
        form: BoundForm::Moment,
    })
}

/// Wasserstein bound between a U-statistic count and Poisson(λ), moment form:
/// |E ξ − λ| + 2·(second-moment excess), plus 6^k k!(E ξ)²/n for binomial input.
pub fn ustat_poisson_bound(moments: &MomentPair, lambda: f64, mode: Mode, k: usize) -> Result<f64> {
    nonneg("lambda", lambda)?;
    if !(moments.mean.is_finite() && moments.second.is_finite()) {
        return Err(invalid("moments", "must be finite"));
    }
    let shift = (moments.mean - lambda).abs();
    let excess = moment_excess(moments, k, mode);
    let extra = match mode {
        Mode::Poisson => 0.0,
        Mode::Binomial { n } => {
            if n < k as u64 {
                0.0
            } else {
                binomial_extra(k, n, moments.mean)
            }
        }
    };
    Ok(shift + 2.0 * excess + extra)
}

/// Kernels for which r can be evaluated.
pub enum RSpec<'a> {
    /// k = 1: r vanishes.
    Unary,
    /// Pairs of the unit cube [0,1]^d within distance `cutoff`; covers edge
    /// counts, edge-length functionals and midpoint processes with B = K.
    GilbertCube { d: usize, cutoff: f64 },
    /// Arbitrary k-ary indicator of f(x) ∈ t^{−γ}B on a domain, by nested
    /// Monte Carlo.
    Generic {
        k: usize,
        domain: &'a Domain,
        indicator: &'a (dyn Fn(&[&[f64]]) -> bool + Sync),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RTerm {
    pub value: f64,
    pub stderr: Option<f64>,
    pub provenance: Provenance,
    /// k!·L(B)·r̂(B), an upper bound for r when available.
    pub hat_bound: Option<f64>,
    /// Quadrature was requested but did not apply or converge.
    pub fell_back: bool,
}

/// Outer and inner sample sizes of the nested Monte Carlo fallback.
pub const MC_OUTER: usize = 100_000;
pub const MC_INNER: usize = 1_000;

/// r for the given kernel with intensity measure `intensity`·vol (Poisson: t,
/// binomial: n).
pub fn r_term(spec: &RSpec<'_>, intensity: f64, seed: u64) -> Result<RTerm> {
    nonneg("intensity", intensity)?;
    match *spec {
        RSpec::Unary => Ok(RTerm {
            value: 0.0,
            stderr: None,
            provenance: Provenance::Analytic,
            hat_bound: Some(0.0),
            fell_back: false,
        }),
        RSpec::GilbertCube { d, cutoff } => {
            if d == 0 {
                return Err(invalid("d", "dimension must be at least 1"));
            }
            nonneg("cutoff", cutoff)?;
            let mass = intensity * intensity / 2.0 * cube_pair_content(d, cutoff);
            let hat = 2.0 * mass * intensity * kappa(d) * cutoff.powi(d as i32);
            match cube_overlap_square_integral(d, cutoff) {
                Ok(v) => Ok(RTerm {
                    value: intensity.powi(3) * v,
                    stderr: None,
                    provenance: Provenance::Quadrature,
                    hat_bound: Some(hat),
                    fell_back: false,
                }),
                Err(e) => {
                    warn!("r term: quadrature unavailable ({e}); using nested Monte Carlo");
                    let domain = Domain::unit_cube(d);
                    let c2 = cutoff * cutoff;
                    let ind = move |x: &[&[f64]]| crate::geometry::dist2(x[0], x[1]) <= c2;
                    let mut out = nested_mc(2, &domain, &ind, intensity, MC_OUTER, MC_INNER, seed)?;
                    out.hat_bound = Some(hat);
                    out.fell_back = true;
                    Ok(out)
                }
            }
        }
        RSpec::Generic { k, domain, indicator } => {
            if k == 0 {
                return Err(invalid("k", "arity must be at least 1"));
            }
            if k == 1 {
                return r_term(&RSpec::Unary, intensity, seed);
            }
            nested_mc(k, domain, indicator, intensity, MC_OUTER, MC_INNER, seed)
        }
    }
}

/// Nested Monte Carlo for max_ℓ ∫(∫ 1 dK^{k−ℓ})² dK^ℓ. The square of the inner
/// integral is estimated without bias as the product of two independent halves.
pub fn nested_mc(
    k: usize,
    domain: &Domain,
    indicator: &(dyn Fn(&[&[f64]]) -> bool + Sync),
    intensity: f64,
    outer: usize,
    inner: usize,
    seed: u64,
) -> Result<RTerm> {
    domain.validate()?;
    if outer < 2 || inner < 2 {
        return Err(invalid("samples", "need at least two outer and inner samples"));
    }
    let vol = domain.measure();
    let half = inner / 2;
    let mut best: Option<(f64, f64)> = None;
    for ell in 1..k {
        let vals: Vec<f64> = (0..outer as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = SeededRng::new(seed ^ ell as u64, i).rng();
                let xs: Vec<Coords> = (0..ell).map(|_| domain.sample_coords(&mut rng)).collect();
                let mut hits = [0usize; 2];
                for h in hits.iter_mut() {
                    for _ in 0..half {
                        let ys: Vec<Coords> = (ell..k).map(|_| domain.sample_coords(&mut rng)).collect();
                        let refs: Vec<&[f64]> = xs.iter().chain(&ys).map(|c| c.as_slice()).collect();
                        if indicator(&refs) {
                            *h += 1;
                        }
                    }
                }
                hits[0] as f64 * hits[1] as f64 / (half * half) as f64
            })
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let scale = (intensity * vol).powi((2 * k - ell) as i32);
        let est = (scale * mean, scale * (var / n).sqrt());
        if best.is_none_or(|b| est.0 > b.0) {
            best = Some(est);
        }
    }
    let (value, se) = best.unwrap_or((0.0, 0.0));
    Ok(RTerm {
        value,
        stderr: Some(se),
        provenance: Provenance::MonteCarlo,
        hat_bound: None,
        fell_back: false,
    })
}

fn cap_area(r: f64, h: f64) -> f64 {
    // Part of the disc of radius r beyond the chord at distance h from the centre.
    if h >= r {
        return 0.0;
    }
    r * r * (h / r).acos() - h * (r * r - h * h).sqrt()
}

fn corner_area(r: f64, a: f64, b: f64) -> f64 {
    // Disc area in {x > a, y > b}, for a, b ≥ 0.
    if a * a + b * b >= r * r {
        return 0.0;
    }
    let x1 = (r * r - b * b).sqrt();
    let prim = |x: f64| 0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).clamp(-1.0, 1.0).asin());
    prim(x1) - prim(a) - b * (x1 - a)
}

/// Area of B(y, r) ∩ [0,1]² when y is at distances a, b ≤ 1/2 from two
/// adjacent sides and r ≤ 1/2.
fn disc_square_overlap(r: f64, a: f64, b: f64) -> f64 {
    PI * r * r - cap_area(r, a) - cap_area(r, b) + corner_area(r, a, b)
}

/// ∫_K vol(B(y, u) ∩ K)² dy for the unit cube K = [0,1]^d, d ∈ {1, 2}, u ≤ 1/2.
pub fn cube_overlap_square_integral(d: usize, u: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&u) {
        return Err(Error::Regime(format!("cutoff {u} outside [0, 1/2]")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    match d {
        1 => {
            // g(y) = min(y, u) + u on [0, 1/2] by symmetry.
            let near = integrate(|y| (y + u).powi(2), 0.0, u, QUAD_TOL)?;
            Ok(2.0 * (near + (0.5 - u) * 4.0 * u * u))
        }
        2 => {
            let full = PI * u * u;
            let edge = integrate(|a| disc_square_overlap(u, a, u).powi(2), 0.0, u, QUAD_TOL)?;
            let corner = integrate(
                |a| {
                    let kink = (u * u - a * a).max(0.0).sqrt();
                    integrate_pieces(|b| disc_square_overlap(u, a, b).powi(2), &[0.0, kink, u], QUAD_TOL * 1e-2)
                        .unwrap_or(f64::NAN)
                },
                0.0,
                u,
                QUAD_TOL,
            )?;
            if !corner.is_finite() {
                return Err(Error::QuadratureNonConvergent(f64::NAN));
            }
            let h = 0.5 - u;
            Ok(4.0 * (h * h * full * full + 2.0 * h * edge + corner))
        }
        _ => Err(Error::Regime(format!("no radial reduction coded for d = {d}"))),
    }
}

/// Lebesgue measure of {(x, y) ∈ K² : ‖x − y‖ ≤ u} for the unit cube.
pub fn gilbert_pair_content(d: usize, u: f64) -> f64 {
    cube_pair_content(d, u)
}

/// Edge-count moments in the unit cube from the second-moment formula:
/// E ξ = χ/2·G, and E ξ² sums over the overlaps of two pairs.
pub fn gilbert_edge_moments(d: usize, t: f64, theta: f64, mode: Mode) -> Result<MomentPair> {
    nonneg("t", t)?;
    let g = cube_pair_content(d, theta);
    let sq = cube_overlap_square_integral(d, theta)?;
    Ok(match mode {
        Mode::Poisson => {
            let mean = t * t / 2.0 * g;
            MomentPair::exact(mean, mean * mean + mean + t.powi(3) * sq, Provenance::Quadrature)
        }
        Mode::Binomial { n } => {
            let mean = falling(n, 2) * g / 2.0;
            let second = falling(n, 4) * g * g / 4.0 + falling(n, 3) * sq + mean;
            MomentPair::exact(mean, second, Provenance::Quadrature)
        }
    })
}

/// Monte Carlo edge-count moments in the unit cube.
pub fn gilbert_edge_moments_mc(d: usize, t: f64, theta: f64, mode: Mode, reps: usize, seed: u64) -> Result<MomentPair> {
    nonneg("t", t)?;
    if reps < 2 {
        return Err(invalid("reps", "need at least two replications"));
    }
    let domain = Domain::unit_cube(d);
    let counts: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = SeededRng::new(seed, rep).rng();
            let n = match mode {
                Mode::Poisson => crate::process::sample_poisson_count(t, &mut rng).unwrap_or(0),
                Mode::Binomial { n } => n,
            };
            let pts: Vec<Coords> = (0..n).map(|_| domain.sample_coords(&mut rng)).collect();
            crate::transform::count_pairs_within(&pts, theta) as f64
        })
        .collect();
    let n = reps as f64;
    let m1 = counts.iter().sum::<f64>() / n;
    let m2 = counts.iter().map(|c| c * c).sum::<f64>() / n;
    let v1 = counts.iter().map(|c| (c - m1).powi(2)).sum::<f64>() / (n - 1.0);
    let v2 = counts.iter().map(|c| (c * c - m2).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MomentPair {
        mean: m1,
        second: m2,
        method: Provenance::MonteCarlo,
        stderr: Some(((v1 / n).sqrt(), (v2 / n).sqrt())),
    })
}

/// C_K for the unit cube: the outer shell {0 < dist(x, K) ≤ ã} has volume
/// Σ_{i<d} κ_{d−i} binom(d, i) ã^{d−i} ≤ C_K(ã + ã^d) for ã < 1.
pub fn cube_shell_constant(d: usize) -> f64 {
    (0..d).map(|i| kappa(d - i) * binom(d, i)).sum()
}

/// Explicit upper bound on the deviation of the pair intensity from
/// κ_d/2·vol(B)·t²·d∫1(r ∈ Ã)r^{d−1}dr for Ã ⊆ [0, ã], K the unit cube.
pub fn gilbert_intensity_error(d: usize, t: f64, a_tilde: f64) -> Result<f64> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    nonneg("t", t)?;
    if !(0.0..1.0).contains(&a_tilde) {
        return Err(Error::Regime(format!(
            "shell bound needs 0 <= a_tilde < 1, got {a_tilde}"
        )));
    }
    let kd = kappa(d);
    let di = d as i32;
    Ok(2.0 * cube_shell_constant(d) * kd * t * t * (a_tilde.powi(di + 1) + a_tilde.powi(2 * di))
        + kd / 2.0 * t * a_tilde.powi(di))
}

/// Target laws for the Gilbert-graph statistics with t²θ_t^d → λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GilbertLaws {
    /// Number of edges.
    pub edge_count: AnalyticLaw,
    /// t^{2b/d}·Σ‖x − y‖^b over edges.
    pub edge_length: AnalyticLaw,
    /// t^{−2τ/d}·Σ‖x − y‖^{−τ} over all pairs.
    pub distance_power: AnalyticLaw,
}

pub fn gilbert_limit_laws(d: usize, lambda: f64, b: f64, tau: f64) -> Result<GilbertLaws> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    nonneg("lambda", lambda)?;
    if !b.is_finite() {
        return Err(invalid("b", "must be finite"));
    }
    if !(tau > d as f64) || !tau.is_finite() {
        return Err(Error::Regime(format!(
            "tau = {tau} must exceed d = {d}; for tau < d/2 a central limit theorem holds instead"
        )));
    }
    let kd = kappa(d);
    let mass = kd * lambda / 2.0;
    let distance_power = if tau == 2.0 * d as f64 {
        // scale·Σx^{−2} over a unit-rate process is Lévy with c = π·scale/2.
        AnalyticLaw::Levy {
            c: PI * kd * kd / 8.0,
        }
    } else {
        AnalyticLaw::stable_series(d as f64 / tau, (kd / 2.0).powf(tau / d as f64), false)?
    };
    Ok(GilbertLaws {
        edge_count: AnalyticLaw::Poisson { lambda: mass },
        edge_length: AnalyticLaw::CompoundPoisson {
            mass,
            jump: JumpLaw::RadialPower {
                d,
                radius: lambda.powf(1.0 / d as f64),
                b,
            },
        },
        distance_power,
    })
}

/// Rate exponent ϱ = inf_u max{u/2 − τu/(2d), 2u − 1, u + u/d − 2/d} of the
/// Kolmogorov bound for distance-power statistics.
pub fn stable_rate_exponent(d: usize, tau: f64) -> Result<f64> {
    if !(tau > d as f64) {
        return Err(Error::Regime(format!("tau = {tau} must exceed d = {d}")));
    }
    let d = d as f64;
    // Lines c0 + c1·u.
    let lines = [(0.0, 0.5 - tau / (2.0 * d)), (-1.0, 2.0), (-2.0 / d, 1.0 + 1.0 / d)];
    let hull = |u: f64| lines.iter().map(|(c0, c1)| c0 + c1 * u).fold(f64::NEG_INFINITY, f64::max);
    let mut best = f64::INFINITY;
    for i in 0..3 {
        for j in i + 1..3 {
            let (a0, a1) = lines[i];
            let (b0, b1) = lines[j];
            if a1 != b1 {
                let u = (b0 - a0) / (a1 - b1);
                if u > 0.0 {
                    best = best.min(hull(u));
                }
            }
        }
    }
    Ok(best)
}

/// Midpoint intensity constant for isotropic m-flats in ℝ^d.
pub fn flats_constant(d: usize, m: usize) -> Result<f64> {
    if m == 0 || 2 * m >= d {
        return Err(Error::Regime(format!("need 1 <= m < d/2, got d = {d}, m = {m}")));
    }
    Ok(0.5 * binom(d - m, m) / binom(d, m) * kappa(d - m).powi(2) / kappa(d))
}

/// Monte Carlo estimate of (κ_{d−2m}/2)·E[L, M] over independent Haar subspaces.
pub fn flats_constant_mc(d: usize, m: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    flats_constant(d, m)?;
    if samples < 2 {
        return Err(invalid("samples", "need at least two"));
    }
    let vals: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::new(seed, i).rng();
            let l = crate::geometry::haar_subspace(d, m, &mut rng);
            let mm = crate::geometry::haar_subspace(d, m, &mut rng);
            crate::geometry::subspace_determinant(&l, &mm).unwrap_or(0.0)
        })
        .collect();
    let n = samples as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let c = kappa(d - 2 * m) / 2.0;
    Ok((c * mean, c * (var / n).sqrt()))
}

/// Reversed-diameter intensities for the inscribed random polytope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolytopeLaw {
    /// L_t([0, a]) for Poisson input.
    pub l_t: f64,
    /// Limit M([0, a]).
    pub m: f64,
    /// exp(−M([0, a])), the limiting P(t^{4/(d−1)}(2 − D_t) > a).
    pub tail: f64,
}

fn polytope_prefactor(d: usize) -> f64 {
    (d as f64 - 1.0) * kappa(d - 1) / (2.0 * d as f64 * kappa(d))
}

/// M([0, a]) = κ_{d−1}2^{d−2}/(dκ_d)·a^{(d−1)/2}.
pub fn polytope_limit_mass(d: usize, a: f64) -> f64 {
    kappa(d - 1) * 2f64.powi(d as i32 - 2) / (d as f64 * kappa(d)) * a.powf((d as f64 - 1.0) / 2.0)
}

/// Density of M at u.
pub fn polytope_limit_density(d: usize, u: f64) -> f64 {
    (d as f64 - 1.0) / (d as f64 * kappa(d)) * kappa(d - 1) * 2f64.powi(d as i32 - 3) * u.powf((d as f64 - 3.0) / 2.0)
}

pub fn polytope_law(d: usize, t: f64, a: f64) -> Result<PolytopeLaw> {
    if d < 2 {
        return Err(invalid("d", "need d >= 2"));
    }
    if !(t >= 1.0 && t.is_finite()) {
        return Err(invalid("t", "need t >= 1"));
    }
    nonneg("a", a)?;
    let s = t.powf(-4.0 / (d as f64 - 1.0));
    if a * s >= 2.0 {
        return Err(Error::Regime(format!("a·t^(-4/(d-1)) = {} must stay below 2", a * s)));
    }
    if a == 0.0 {
        return Ok(PolytopeLaw {
            l_t: 0.0,
            m: 0.0,
            tail: 1.0,
        });
    }
    let e = (d as f64 - 3.0) / 2.0;
    // u = v² removes the u^{(d−3)/2} singularity at zero for d = 2.
    let f = |v: f64| {
        let u = v * v;
        let w = 2.0 * u - u * u * s / 2.0;
        let base = (4.0 * u - u * u * s - s * w * w).max(0.0);
        let core = if d == 3 { 1.0 } else { base.powf(e) };
        core * (2.0 - u * s) * 2.0 * v
    };
    let l_t = polytope_prefactor(d) * integrate(f, 0.0, a.sqrt(), QUAD_TOL)?;
    let m = polytope_limit_mass(d, a);
    Ok(PolytopeLaw {
        l_t,
        m,
        tail: (-m).exp(),
    })
}

/// KR bound for the rescaled reversed-distance process on [0, a], Poisson
/// input. The cap measure around an antipode is the same for every point, so
/// r = t·(2L_t/t)² exactly; dTV is |M − L_t| since one density dominates.
pub fn polytope_bound(d: usize, t: f64, a: f64) -> Result<BoundReport> {
    let law = polytope_law(d, t, a)?;
    let r = 4.0 * law.l_t * law.l_t / t;
    let mut rep = thm_main_bound((law.m - law.l_t).abs(), r, 2, Mode::Poisson, law.l_t)?;
    rep.dtv.provenance = Provenance::Quadrature;
    rep.r.provenance = Provenance::Quadrature;
    Ok(rep)
}

/// Rate exponent −min{4/(d−1), 1} of the polytope bound.
pub fn polytope_rate_exponent(d: usize) -> f64 {
    -(4.0 / (d as f64 - 1.0)).min(1.0)
}

/// Rate exponent −min{2/d, 1} of the Gilbert-graph bounds.
pub fn gilbert_rate_exponent(d: usize) -> f64 {
    -(2.0 / d as f64).min(1.0)
}

/// Exact KR bound for edge midpoints with length ≤ ã = t^{−2/d}a in the unit
/// cube (Poisson input, d ∈ {1, 2}): the limit intensity dominates, so
/// dTV = t²/2·(κ_d ã^d − G_d(ã)), and r = t³∫g².
pub fn gilbert_midpoint_bound(d: usize, t: f64, a: f64) -> Result<BoundReport> {
    nonneg("a", a)?;
    let at = t.powf(-2.0 / d as f64) * a;
    let dtv = (t * t / 2.0 * (kappa(d) * at.powi(d as i32) - cube_pair_content(d, at))).max(0.0);
    let r = r_term(&RSpec::GilbertCube { d, cutoff: at }, t, 0)?;
    let mass = t * t / 2.0 * cube_pair_content(d, at);
    let mut rep = thm_main_bound(dtv, r.value, 2, Mode::Poisson, mass)?;
    rep.r.provenance = r.provenance;
    Ok(rep)
}

/// Total variation bound between t^{2b/d}L_t^{(b)} and its compound Poisson
/// limit when t²θ^d = λ exactly (Poisson input, unit cube).
pub fn gilbert_length_bound(d: usize, t: f64, lambda: f64) -> Result<BoundReport> {
    nonneg("lambda", lambda)?;
    let theta = (lambda / (t * t)).powf(1.0 / d as f64);
    let mass = t * t / 2.0 * cube_pair_content(d, theta);
    let dtv = (kappa(d) * lambda / 2.0 - mass).max(0.0);
    let r = r_term(&RSpec::GilbertCube { d, cutoff: theta }, t, 0)?;
    let mut rep = thm_main_bound(dtv, r.value, 2, Mode::Poisson, mass)?;
    rep.r.provenance = r.provenance;
    Ok(rep)
}
