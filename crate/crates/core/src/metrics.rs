//! Probability distances, target laws and exact discrete optimal transport.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::process::{Configuration, Location};

/// Empirical law on ℝ: sorted samples, or a pmf on {0, 1, 2, ...}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EmpiricalDistribution {
    Samples(Vec<f64>),
    IntegerPmf(Vec<f64>),
}

impl EmpiricalDistribution {
    pub fn from_samples(mut xs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Empty("samples"));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(invalid("samples", "must be finite"));
        }
        xs.sort_by(f64::total_cmp);
        Ok(Self::Samples(xs))
    }

    /// Empirical pmf of nonnegative integer observations.
    pub fn from_counts(obs: &[u64]) -> Result<Self> {
        if obs.is_empty() {
            return Err(Error::Empty("counts"));
        }
        let max = *obs.iter().max().unwrap() as usize;
        let mut pmf = vec![0.0; max + 1];
        for &o in obs {
            pmf[o as usize] += 1.0;
        }
        let n = obs.len() as f64;
        pmf.iter_mut().for_each(|p| *p /= n);
        Ok(Self::IntegerPmf(pmf))
    }

    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        let total: f64 = pmf.iter().sum();
        if pmf.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(invalid("pmf", format!("must be nonnegative and sum to 1 (sum {total})")));
        }
        Ok(Self::IntegerPmf(pmf))
    }

    /// Weighted atoms (location, mass), sorted by location, with coincident samples merged.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Samples(xs) => {
                let w = 1.0 / xs.len() as f64;
                let mut out: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
                for &x in xs {
                    match out.last_mut() {
                        Some(last) if last.0 == x => last.1 += w,
                        _ => out.push((x, w)),
                    }
                }
                out
            }
            Self::IntegerPmf(p) => p
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(k, w)| (k as f64, *w))
                .collect(),
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        match self {
            Self::Samples(xs) => xs.iter().all(|x| x.fract() == 0.0 && *x >= 0.0),
            Self::IntegerPmf(_) => true,
        }
    }

    /// Pmf on {0, ..., len − 1}, for integer-valued laws.
    pub fn to_pmf(&self) -> Result<Vec<f64>> {
        match self {
            Self::IntegerPmf(p) => Ok(p.clone()),
            Self::Samples(xs) => {
                if !self.is_integer_valued() {
                    return Err(invalid("samples", "not integer valued"));
                }
                let obs: Vec<u64> = xs.iter().map(|x| *x as u64).collect();
                match Self::from_counts(&obs)? {
                    Self::IntegerPmf(p) => Ok(p),
                    Self::Samples(_) => unreachable!(),
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.atoms().iter().map(|(x, w)| x * w).sum()
    }
}

/// Distribution function evaluation.
pub trait Cdf {
    /// P(X ≤ x).
    fn cdf(&self, x: f64) -> f64;
    /// P(X < x).
    fn cdf_left(&self, x: f64) -> f64;
}

impl Cdf for EmpiricalDistribution {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Samples(xs) => xs.partition_point(|s| *s <= x) as f64 / xs.len() as f64,
            Self::IntegerPmf(p) => {
                if x < 0.0 {
                    return 0.0;
                }
                let k = (x.floor() as usize).min(p.len().saturating_sub(1));
                p[..=k].iter().sum::<f64>().min(1.0)
            }
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Self::Samples(xs) => xs.partition_point(|s| *s < x) as f64 / xs.len() as f64,
            Self::IntegerPmf(_) => {
                let k = x.ceil() - 1.0;
                if k < 0.0 {
                    0.0
                } else {
                    self.cdf(k)
                }
            }
        }
    }
}

/// Law of a jump of a compound Poisson variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JumpLaw {
    /// ‖X‖^b with X uniform in the d-ball of the given radius.
    RadialPower { d: usize, radius: f64, b: f64 },
    /// Deterministic jump.
    Constant { value: f64 },
}

impl JumpLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::RadialPower { d, radius, b } => {
                if b == 0.0 {
                    return 1.0;
                }
                let u: f64 = rng.random();
                (radius * u.powf(1.0 / d as f64)).powf(b)
            }
            JumpLaw::Constant { value } => value,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::RadialPower { d, radius, b } => {
                let d = d as f64;
                radius.powf(b) * d / (d + b)
            }
            JumpLaw::Constant { value } => value,
        }
    }

    fn is_unit(&self) -> bool {
        matches!(*self, JumpLaw::RadialPower { b, .. } if b == 0.0)
            || matches!(*self, JumpLaw::Constant { value } if value == 1.0)
    }
}

/// Reference laws for the limit theorems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnalyticLaw {
    Poisson {
        lambda: f64,
    },
    /// Sum of the atoms of a Poisson process with total mass `mass` and jump law `jump`.
    CompoundPoisson {
        mass: f64,
        jump: JumpLaw,
    },
    /// Lévy law with CDF erfc(√(c/(2x))) on x > 0.
    Levy {
        c: f64,
    },
    /// First point of a Poisson process on ℝ₊ with mean measure a·u^b.
    WeibullTail {
        a: f64,
        b: f64,
    },
    /// scale · Σ sign(x)|x|^{−1/α} over a unit-rate Poisson process on (0, ∞)
    /// (or on ℝ when symmetric), truncated to |x| ≤ window.
    StableSeries {
        alpha: f64,
        scale: f64,
        window: f64,
        symmetric: bool,
    },
}

/// Median of the standard Lévy law with c = 1.
fn levy_unit_median() -> f64 {
    1.0 / (2.0 * erfc_inv(0.5).powi(2))
}

impl AnalyticLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            AnalyticLaw::Poisson { lambda } => lambda >= 0.0 && lambda.is_finite(),
            AnalyticLaw::CompoundPoisson { mass, jump } => {
                mass >= 0.0
                    && mass.is_finite()
                    && match jump {
                        JumpLaw::RadialPower { d, radius, b } => d >= 1 && radius >= 0.0 && b.is_finite(),
                        JumpLaw::Constant { value } => value.is_finite(),
                    }
            }
            AnalyticLaw::Levy { c } => c > 0.0 && c.is_finite(),
            AnalyticLaw::WeibullTail { a, b } => a > 0.0 && b > 0.0,
            AnalyticLaw::StableSeries { alpha, scale, window, .. } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(invalid("alpha", "stable series needs 0 < alpha < 1"));
                }
                scale > 0.0 && window > 0.0 && window.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("law", format!("parameters out of range: {self:?}")))
        }
    }

    /// Stable series with the default truncation window: the expected
    /// discarded tail is below 1e-3 times the median of |Z|.
    pub fn stable_series(alpha: f64, scale: f64, symmetric: bool) -> Result<Self> {
        let probe = AnalyticLaw::StableSeries {
            alpha,
            scale,
            window: 1.0,
            symmetric,
        };
        probe.validate()?;
        let median = if alpha == 0.5 && !symmetric {
            // scale · Σ x^{-2} is Lévy with c = π·scale/2
            levy_unit_median() * std::f64::consts::PI * scale / 2.0
        } else {
            let mut rng = crate::rng::SeededRng::new(0x5eed, 0).rng();
            let pilot = AnalyticLaw::StableSeries {
                alpha,
                scale,
                window: 1e4,
                symmetric,
            };
            let mut xs: Vec<f64> = (0..2001).map(|_| pilot.sample(&mut rng).abs()).collect();
            xs.sort_by(f64::total_cmp);
            xs[1000]
        };
        let rate = if symmetric { 2.0 } else { 1.0 };
        // rate · scale · T^{1−1/α}/(1/α − 1) < 1e-3 · median
        let e = 1.0 / alpha - 1.0;
        let window = (1e-3 * median * e / (rate * scale)).powf(-1.0 / e);
        Ok(AnalyticLaw::StableSeries {
            alpha,
            scale,
            window: window.max(1.0),
            symmetric,
        })
    }

    /// Expected absolute contribution of the points beyond the truncation window.
    pub fn truncation_tail_mean(&self) -> Option<f64> {
        match *self {
            AnalyticLaw::StableSeries { alpha, scale, window, symmetric } => {
                let rate = if symmetric { 2.0 } else { 1.0 };
                Some(rate * scale * window.powf(1.0 - 1.0 / alpha) / (1.0 / alpha - 1.0))
            }
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            AnalyticLaw::Poisson { lambda } => lambda,
            AnalyticLaw::CompoundPoisson { mass, jump } => mass * jump.mean(),
            AnalyticLaw::Levy { .. } => f64::INFINITY,
            AnalyticLaw::WeibullTail { a, b } => a.powf(-1.0 / b) * statrs::function::gamma::gamma(1.0 + 1.0 / b),
            AnalyticLaw::StableSeries { symmetric, .. } => {
                if symmetric {
                    f64::NAN
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn has_cdf(&self) -> bool {
        match self {
            AnalyticLaw::Poisson { .. } | AnalyticLaw::Levy { .. } | AnalyticLaw::WeibullTail { .. } => true,
            AnalyticLaw::CompoundPoisson { mass, jump } => *mass == 0.0 || jump.is_unit(),
            AnalyticLaw::StableSeries { .. } => false,
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        match self {
            AnalyticLaw::Poisson { .. } => true,
            AnalyticLaw::CompoundPoisson { mass, jump } => *mass == 0.0 || jump.is_unit(),
            _ => false,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            AnalyticLaw::Poisson { .. } => "poisson",
            AnalyticLaw::CompoundPoisson { .. } => "compound-poisson",
            AnalyticLaw::Levy { .. } => "levy",
            AnalyticLaw::WeibullTail { .. } => "weibull-tail",
            AnalyticLaw::StableSeries { .. } => "stable-series",
        }
    }

    fn poisson_mean(&self) -> Option<f64> {
        match *self {
            AnalyticLaw::Poisson { lambda } => Some(lambda),
            AnalyticLaw::CompoundPoisson { mass, jump } if mass == 0.0 || jump.is_unit() => Some(mass),
            _ => None,
        }
    }

    /// P(X ≤ x), when available in closed form.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !self.has_cdf() {
            return Err(Error::NoCdf(self.name()));
        }
        Ok(match *self {
            AnalyticLaw::Levy { c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    erfc((c / (2.0 * x)).sqrt())
                }
            }
            AnalyticLaw::WeibullTail { a, b } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-a * x.powf(b)).exp()
                }
            }
            _ => poisson_cdf(self.poisson_mean().unwrap(), x),
        })
    }

    /// P(X < x), when available in closed form.
    pub fn cdf_left(&self, x: f64) -> Result<f64> {
        if self.is_integer_valued() {
            let k = x.ceil() - 1.0;
            return if k < 0.0 { Ok(0.0) } else { self.cdf(k) };
        }
        self.cdf(x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AnalyticLaw::Poisson { lambda } => poisson_draw(lambda, rng) as f64,
            AnalyticLaw::CompoundPoisson { mass, jump } => {
                let n = poisson_draw(mass, rng);
                (0..n).map(|_| jump.sample(rng)).sum()
            }
            AnalyticLaw::Levy { c } => {
                let u: f64 = rng.random();
                let z = erfc_inv(u.max(f64::MIN_POSITIVE));
                c / (2.0 * z * z)
            }
            AnalyticLaw::WeibullTail { a, b } => {
                let e: f64 = rng.sample(Exp1);
                (e / a).powf(1.0 / b)
            }
            AnalyticLaw::StableSeries { alpha, scale, window, symmetric } => {
                let rate = if symmetric { 2.0 } else { 1.0 };
                let p = -1.0 / alpha;
                let mut x = 0.0;
                let mut sum = 0.0;
                loop {
                    let e: f64 = rng.sample(Exp1);
                    x += e / rate;
                    if x > window {
                        break;
                    }
                    let s = if symmetric && rng.random::<bool>() { -1.0 } else { 1.0 };
                    sum += s * x.powf(p);
                }
                scale * sum
            }
        }
    }
}

fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        0
    } else {
        Poisson::new(lambda).expect("positive finite mean").sample(rng) as u64
    }
}

/// P(N = k) for N ~ Poisson(λ).
pub fn poisson_pmf_at(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)).exp()
}

fn poisson_cdf(lambda: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let kmax = poisson_support_end(lambda);
    let k = x.floor().min(kmax as f64) as u64;
    let s: f64 = (0..=k).map(|j| poisson_pmf_at(lambda, j)).sum();
    if k >= kmax {
        1.0
    } else {
        s.min(1.0)
    }
}

fn poisson_support_end(lambda: f64) -> u64 {
    (lambda + 40.0 * lambda.sqrt() + 40.0).ceil() as u64
}

/// Poisson(λ) pmf on {0, ..., K} with K = ⌈λ + 40√λ + 40⌉ and the tail mass folded into K.
pub fn poisson_pmf(lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "must be nonnegative and finite"));
    }
    let kmax = poisson_support_end(lambda);
    let mut p: Vec<f64> = (0..=kmax).map(|k| poisson_pmf_at(lambda, k)).collect();
    let head: f64 = p[..kmax as usize].iter().sum();
    p[kmax as usize] = (1.0 - head).max(0.0);
    Ok(p)
}

/// Pmf of a law on ℤ₊ as an [`EmpiricalDistribution`], for integer-valued analytic laws.
pub fn law_pmf(law: &AnalyticLaw) -> Result<EmpiricalDistribution> {
    law.validate()?;
    let lambda = law
        .poisson_mean()
        .ok_or_else(|| invalid("law", "pmf only for integer-valued laws"))?;
    Ok(EmpiricalDistribution::IntegerPmf(poisson_pmf(lambda)?))
}

/// sup_x |F_emp(x) − F_law(x)|.
pub fn kolmogorov(emp: &EmpiricalDistribution, law: &AnalyticLaw) -> Result<f64> {
    law.validate()?;
    if !law.has_cdf() {
        return Err(Error::NoCdf(law.name()));
    }
    if law.is_integer_valued() {
        return Ok(kolmogorov_between(emp, &law_pmf(law)?));
    }
    let mut worst = 0.0_f64;
    let mut below = 0.0;
    for (x, w) in emp.atoms() {
        let fl = law.cdf_left(x)?;
        let f = law.cdf(x)?;
        worst = worst.max((below - fl).abs());
        below += w;
        worst = worst.max((below.min(1.0) - f).abs());
    }
    Ok(worst)
}

/// Merge the atoms of two discrete laws: (location, mass in p, mass in q).
fn merged_atoms(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Vec<(f64, f64, f64)> {
    let (a, b) = (p.atoms(), q.atoms());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 <= a[i].0);
        let x = if take_a { a[i].0 } else { b[j].0 };
        let wa = if take_a { a[i].1 } else { 0.0 };
        let wb = if take_b { b[j].1 } else { 0.0 };
        out.push((x, wa, wb));
        if take_a {
            i += 1;
        }
        if take_b {
            j += 1;
        }
    }
    out
}

/// sup_x |F_p(x) − F_q(x)| between two discrete laws (two-sample Kolmogorov–Smirnov).
pub fn kolmogorov_between(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let (mut fp, mut fq) = (0.0, 0.0);
    let mut worst = 0.0_f64;
    for (_, wa, wb) in merged_atoms(p, q) {
        fp += wa;
        fq += wb;
        worst = worst.max((fp - fq).abs());
    }
    worst
}

/// (1/2) Σ_k |p_k − q_k|.
pub fn tv_integer(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// ∫ |F_p − F_q| between two discrete laws on ℝ.
pub fn wasserstein1(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let atoms = merged_atoms(p, q);
    let (mut fp, mut fq) = (0.0, 0.0);
    let mut acc = crate::transform::KahanSum::default();
    for w in atoms.windows(2) {
        fp += w[0].1;
        fq += w[0].2;
        acc.add((fp - fq).abs() * (w[1].0 - w[0].0));
    }
    acc.value()
}

/// Wasserstein-1 distance between an empirical law and an analytic law.
///
/// Integer-valued laws use the (truncated) pmf; otherwise the law must be
/// approximated by the caller through samples.
pub fn wasserstein1_to_law(emp: &EmpiricalDistribution, law: &AnalyticLaw) -> Result<f64> {
    Ok(wasserstein1(emp, &law_pmf(law)?))
}

/// Total variation distance between two finite counting measures on the same space:
/// the larger of the two unmatched masses.
pub fn config_tv_cost<T: Location>(a: &Configuration<T>, b: &Configuration<T>) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch(a.space.to_string(), b.space.to_string()));
    }
    let (xa, xb) = (a.atoms(), b.atoms());
    let (mut i, mut j) = (0, 0);
    let mut common = 0u64;
    while i < xa.len() && j < xb.len() {
        match xa[i].0.total_cmp(&xb[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += xa[i].1.min(xb[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    let ea = a.total_count() - common;
    let eb = b.total_count() - common;
    Ok(ea.max(eb) as f64)
}

/// Optimal coupling of two discrete marginals with certifying dual potentials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// Row-major coupling matrix.
    pub plan: Vec<f64>,
    pub row_marginal: Vec<f64>,
    pub col_marginal: Vec<f64>,
    pub cost: f64,
    /// Dual variables with u_i + v_j ≤ c_ij.
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
    pub duality_gap: f64,
    /// Largest |c_ij − u_i − v_j| over the support of the plan, or dual infeasibility.
    pub slackness_residual: f64,
}

impl TransportPlan {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.plan[i * self.cols + j]
    }

    pub fn dual_objective(&self) -> f64 {
        self.row_marginal.iter().zip(&self.row_potentials).map(|(a, u)| a * u).sum::<f64>()
            + self.col_marginal.iter().zip(&self.col_potentials).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Reference optimum of a small transport problem by enumerating every basis of
/// n + m − 1 cells and keeping the cheapest feasible vertex. Exponential; meant
/// as an oracle for instances with a handful of rows and columns.
pub fn ot_vertex_enumeration(cost: &[f64], mu: &[f64], nu: &[f64]) -> Result<f64> {
    let (n, m) = (mu.len(), nu.len());
    if n == 0 || m == 0 {
        return Err(Error::Empty("marginals"));
    }
    if cost.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: cost.len(),
        });
    }
    if n * m > 25 {
        return Err(Error::EnumerationTooLarge {
            arity: n + m - 1,
            subsets: crate::geometry::binom(n * m, n + m - 1),
        });
    }
    let r = n + m - 1;
    // Equations: all row sums and the first m − 1 column sums (one is redundant).
    let rhs: Vec<f64> = mu.iter().chain(&nu[..m - 1]).copied().collect();
    let mut best = f64::INFINITY;
    let mut basis: Vec<usize> = (0..r).collect();
    loop {
        let mut a = vec![0.0; r * r];
        for (col, &cell) in basis.iter().enumerate() {
            let (i, j) = (cell / m, cell % m);
            a[i * r + col] = 1.0;
            if j < m - 1 {
                a[(n + j) * r + col] = 1.0;
            }
        }
        if let Some(x) = crate::geometry::solve(a, rhs.clone(), r) {
            if x.iter().all(|v| *v >= -1e-12) {
                let c: f64 = basis.iter().zip(&x).map(|(&cell, v)| cost[cell] * v.max(0.0)).sum();
                best = best.min(c);
            }
        }
        // Next r-subset of 0..n·m in lexicographic order.
        let mut k = r;
        while k > 0 && basis[k - 1] == n * m - r + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        basis[k - 1] += 1;
        for q in k..r {
            basis[q] = basis[q - 1] + 1;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InfeasibleMarginals(mu.iter().sum(), nu.iter().sum()))
    }
}

/// Exact optimal transport between `mu` (rows) and `nu` (columns) for a row-major
/// cost matrix, by successive shortest augmenting paths with Dijkstra on reduced costs.
pub fn ot_exact(cost: &[f64], mu: &[f64], nu: &[f64]) -> Result<TransportPlan> {
    let (n, m) = (mu.len(), nu.len());
    if n == 0 || m == 0 {
        return Err(Error::Empty("marginals"));
    }
    if cost.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            got: cost.len(),
        });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(invalid("cost", "entries must be finite"));
    }
    if mu.iter().chain(nu).any(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(invalid("marginals", "must be nonnegative and finite"));
    }
    let (sa, sb): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
    if (sa - sb).abs() > 1e-9 * sa.max(sb).max(1.0) {
        return Err(Error::InfeasibleMarginals(sa, sb));
    }
    let c = |i: usize, j: usize| cost[i * m + j];
    let rows: Vec<usize> = (0..n).filter(|&i| mu[i] > 0.0).collect();
    let cols: Vec<usize> = (0..m).filter(|&j| nu[j] > 0.0).collect();
    let mut plan = vec![0.0; n * m];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];

    if !rows.is_empty() {
        let (rn, cn) = (rows.len(), cols.len());
        let mut supply: Vec<f64> = rows.iter().map(|&i| mu[i]).collect();
        let mut demand: Vec<f64> = cols.iter().map(|&j| nu[j]).collect();
        // Match the totals exactly so the last augmentation closes both sides.
        let scale = supply.iter().sum::<f64>() / demand.iter().sum::<f64>();
        demand.iter_mut().for_each(|x| *x *= scale);
        let tol = 1e-14 * sa.max(f64::MIN_POSITIVE);
        let mut flow = vec![0.0; rn * cn];
        // Potentials: reduced cost c_ij + pr_i − pc_j ≥ 0, zero on the support.
        let mut pr = vec![0.0; rn];
        let mut pc: Vec<f64> = (0..cn)
            .map(|b| rows.iter().map(|&i| c(i, cols[b])).fold(f64::INFINITY, f64::min))
            .collect();
        let nodes = rn + cn;
        let mut dist = vec![0.0; nodes];
        let mut done = vec![false; nodes];
        let mut prev = vec![usize::MAX; nodes];
        loop {
            if supply.iter().all(|s| *s <= tol) {
                break;
            }
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            done.iter_mut().for_each(|d| *d = false);
            prev.iter_mut().for_each(|p| *p = usize::MAX);
            for a in 0..rn {
                if supply[a] > tol {
                    dist[a] = 0.0;
                }
            }
            loop {
                let mut best = usize::MAX;
                let mut bd = f64::INFINITY;
                for x in 0..nodes {
                    if !done[x] && dist[x] < bd {
                        bd = dist[x];
                        best = x;
                    }
                }
                if best == usize::MAX {
                    break;
                }
                done[best] = true;
                if best < rn {
                    let a = best;
                    for b in 0..cn {
                        let y = rn + b;
                        if done[y] {
                            continue;
                        }
                        let rc = (c(rows[a], cols[b]) + pr[a] - pc[b]).max(0.0);
                        if bd + rc < dist[y] {
                            dist[y] = bd + rc;
                            prev[y] = a;
                        }
                    }
                } else {
                    let b = best - rn;
                    for a in 0..rn {
                        if done[a] || flow[a * cn + b] <= tol {
                            continue;
                        }
                        let rc = (pc[b] - pr[a] - c(rows[a], cols[b])).max(0.0);
                        if bd + rc < dist[a] {
                            dist[a] = bd + rc;
                            prev[a] = best;
                        }
                    }
                }
            }
            let target = (0..cn)
                .filter(|&b| demand[b] > tol && dist[rn + b].is_finite())
                .min_by(|&x, &y| dist[rn + x].total_cmp(&dist[rn + y]));
            let Some(tb) = target else {
                break;
            };
            let reach = dist[rn + tb];
            for x in 0..nodes {
                let dx = dist[x].min(reach);
                if x < rn {
                    pr[x] += dx;
                } else {
                    pc[x - rn] += dx;
                }
            }
            let mut delta = demand[tb];
            let mut y = rn + tb;
            loop {
                let a = prev[y];
                if a >= rn {
                    unreachable!("column predecessor of a column");
                }
                let py = prev[a];
                if py == usize::MAX {
                    delta = delta.min(supply[a]);
                    break;
                }
                delta = delta.min(flow[a * cn + (py - rn)]);
                y = py;
            }
            let mut y = rn + tb;
            demand[tb] -= delta;
            loop {
                let a = prev[y];
                flow[a * cn + (y - rn)] += delta;
                let py = prev[a];
                if py == usize::MAX {
                    supply[a] -= delta;
                    break;
                }
                flow[a * cn + (py - rn)] -= delta;
                y = py;
            }
        }
        for (a, &i) in rows.iter().enumerate() {
            u[i] = -pr[a];
            for (b, &j) in cols.iter().enumerate() {
                plan[i * m + j] = flow[a * cn + b].max(0.0);
            }
        }
        for (b, &j) in cols.iter().enumerate() {
            v[j] = pc[b];
        }
    }
    // Dual values for rows/columns without mass do not affect the objective.
    let active_rows: Vec<usize> = (0..n).filter(|&i| mu[i] > 0.0).collect();
    for j in 0..m {
        if nu[j] == 0.0 {
            v[j] = active_rows
                .iter()
                .map(|&i| c(i, j) - u[i])
                .fold(f64::INFINITY, f64::min);
            if !v[j].is_finite() {
                v[j] = (0..n).map(|i| c(i, j)).fold(f64::INFINITY, f64::min);
            }
        }
    }
    for i in 0..n {
        if mu[i] == 0.0 {
            u[i] = (0..m).map(|j| c(i, j) - v[j]).fold(f64::INFINITY, f64::min);
        }
    }
    let mut total = crate::transform::KahanSum::default();
    let mut resid = 0.0_f64;
    for i in 0..n {
        for j in 0..m {
            let p = plan[i * m + j];
            total.add(p * c(i, j));
            let slack = c(i, j) - u[i] - v[j];
            resid = resid.max((-slack).max(0.0));
            if p > 1e-12 * sa.max(1e-300) {
                resid = resid.max(slack.abs());
            }
        }
    }
    let mut out = TransportPlan {
        rows: n,
        cols: m,
        plan,
        row_marginal: mu.to_vec(),
        col_marginal: nu.to_vec(),
        cost: total.value(),
        row_potentials: u,
        col_potentials: v,
        duality_gap: 0.0,
        slackness_residual: resid,
    };
    out.duality_gap = out.cost - out.dual_objective();
    Ok(out)
}

/// Empirical Kantorovich–Rubinstein surrogate between two configuration laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrEstimate {
    /// OT cost between the two uniform empirical measures.
    pub estimate: f64,
    /// Same statistic between two independent halves of the first sample.
    pub noise_floor: f64,
    /// Standard error of the estimate from per-sample transported costs.
    pub estimate_stderr: f64,
    /// Standard error of the noise floor.
    pub floor_stderr: f64,
}

impl KrEstimate {
    pub fn pooled_stderr(&self) -> f64 {
        self.estimate_stderr.hypot(self.floor_stderr)
    }

    /// (estimate − floor) in units of the pooled standard error.
    pub fn excess_z(&self) -> f64 {
        let se = self.pooled_stderr();
        let gap = self.estimate - self.noise_floor;
        if se == 0.0 {
            if gap <= 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            gap / se
        }
    }
}

fn config_cmp<T: Location>(a: &Configuration<T>, b: &Configuration<T>) -> std::cmp::Ordering {
    let (xa, xb) = (a.atoms(), b.atoms());
    for ((x, m), (y, n)) in xa.iter().zip(xb) {
        let o = x.total_cmp(y).then(m.cmp(n));
        if o.is_ne() {
            return o;
        }
    }
    xa.len().cmp(&xb.len())
}

/// Distinct configurations with their multiplicities, plus the group index of each sample.
fn group<T: Location>(xs: &[Configuration<T>]) -> (Vec<usize>, Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| config_cmp(&xs[i], &xs[j]));
    let (mut reps, mut weights, mut of) = (Vec::new(), Vec::new(), vec![0; xs.len()]);
    for &i in &idx {
        let fresh = reps.last().is_none_or(|&r: &usize| config_cmp(&xs[r], &xs[i]).is_ne());
        if fresh {
            reps.push(i);
            weights.push(0.0);
        }
        *weights.last_mut().unwrap() += 1.0;
        of[i] = reps.len() - 1;
    }
    (reps, weights, of)
}

/// OT between two uniform empirical measures; returns the cost and the
/// transported cost carried by each sample of `a`.
fn uniform_ot<T: Location>(a: &[Configuration<T>], b: &[Configuration<T>]) -> Result<(f64, Vec<f64>)> {
    let (ra, wa, of) = group(a);
    let (rb, wb, _) = group(b);
    let (n, m) = (ra.len(), rb.len());
    let mut cost = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            cost[i * m + j] = config_tv_cost(&a[ra[i]], &b[rb[j]])?;
        }
    }
    let mu: Vec<f64> = wa.iter().map(|w| w / a.len() as f64).collect();
    let nu: Vec<f64> = wb.iter().map(|w| w / b.len() as f64).collect();
    let plan = ot_exact(&cost, &mu, &nu)?;
    let per_group: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|j| plan.at(i, j) * cost[i * m + j]).sum::<f64>() / mu[i])
        .collect();
    Ok((plan.cost, of.iter().map(|&g| per_group[g]).collect()))
}

fn mean_stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (var / n).sqrt()
}

/// Empirical KR surrogate with configuration-TV ground cost, reported with its
/// same-law noise floor. Both samples are split in halves; the estimate averages
/// the two cross-law OT costs and the floor the two same-law costs, so every
/// term is computed at the same sample size N/2.
pub fn empirical_kr<T: Location>(a: &[Configuration<T>], b: &[Configuration<T>]) -> Result<KrEstimate> {
    if a.len() != b.len() {
        return Err(Error::SampleSizeMismatch(a.len(), b.len()));
    }
    if a.len() < 100 {
        return Err(invalid("N", "need at least 100 configurations per side"));
    }
    let h = a.len() / 2;
    let (a1, a2, b1, b2) = (&a[..h], &a[h..2 * h], &b[..h], &b[h..2 * h]);
    let (c1, r1) = uniform_ot(a1, b2)?;
    let (c2, r2) = uniform_ot(b1, a2)?;
    let (f1, s1) = uniform_ot(a1, a2)?;
    let (f2, s2) = uniform_ot(b1, b2)?;
    let pair = |x: Vec<f64>, y: Vec<f64>| -> f64 {
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| 0.5 * (p + q)).collect();
        mean_stderr(&z)
    };
    Ok(KrEstimate {
        estimate: 0.5 * (c1 + c2),
        noise_floor: 0.5 * (f1 + f2),
        estimate_stderr: pair(r1, r2),
        floor_stderr: pair(s1, s2),
    })
}
