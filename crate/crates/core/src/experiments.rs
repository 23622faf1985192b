//! Scenario runner: simulate replications per t, measure a distance to the
//! limit law, and put the matching explicit bound next to it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, Mode, MomentPair, Provenance};
use crate::error::{Error, Result};
use crate::geometry::{self, dist2, dot, kappa, uniform_on_sphere, AffineFlat, Coords, Domain, Point};
use crate::glauber::{self, Simulator, TargetIntensity};
use crate::metrics::{self, AnalyticLaw, EmpiricalDistribution};
use crate::process::{self, Configuration, ProcessModel, SpaceTag, TestFunction};
use crate::rng::SeededRng;
use crate::transform::{self, FnKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GilbertEdges,
    GilbertLengths,
    GilbertMidpoints,
    DistancePower,
    Flats,
    Polytope,
    GlauberVerify,
    MeckeVerify,
    KrEstimate,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::GilbertEdges,
        Scenario::GilbertLengths,
        Scenario::GilbertMidpoints,
        Scenario::DistancePower,
        Scenario::Flats,
        Scenario::Polytope,
        Scenario::GlauberVerify,
        Scenario::MeckeVerify,
        Scenario::KrEstimate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::GilbertEdges => "gilbert-edges",
            Scenario::GilbertLengths => "gilbert-lengths",
            Scenario::GilbertMidpoints => "gilbert-midpoints",
            Scenario::DistancePower => "distance-power",
            Scenario::Flats => "flats",
            Scenario::Polytope => "polytope",
            Scenario::GlauberVerify => "glauber-verify",
            Scenario::MeckeVerify => "mecke-verify",
            Scenario::KrEstimate => "kr-estimate",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Scenario::GilbertEdges => "edge count of the random geometric graph vs Poisson, Wasserstein distance",
            Scenario::GilbertLengths => "edge-length functional vs compound Poisson, discretized total variation",
            Scenario::GilbertMidpoints => "short-edge midpoint process vs Poisson process, empirical KR surrogate",
            Scenario::DistancePower => "distance-power sum vs stable law, Kolmogorov distance",
            Scenario::Flats => "midpoints of close Poisson flats, mean count vs limit constant",
            Scenario::Polytope => "diameter of the inscribed random polytope vs Weibull tail",
            Scenario::GlauberVerify => "birth-death dynamics: simulator agreement, commutation, ergodicity",
            Scenario::MeckeVerify => "Mecke identities for Poisson and binomial input, k = 1, 2",
            Scenario::KrEstimate => "k = 1 mapping theorem, empirical KR surrogate vs pushforward process",
        }
    }

    /// Scenarios whose rows estimate a distance from replications.
    pub fn estimates_distance(&self) -> bool {
        !matches!(self, Scenario::GlauberVerify | Scenario::MeckeVerify)
    }

    fn salt(&self) -> u64 {
        Scenario::ALL.iter().position(|s| s == self).unwrap() as u64 + 1
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Distance parameter θ_t of the geometric graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThetaRule {
    /// θ_t = λ^{1/d} t^{−2/d}, so t²θ_t^d = λ.
    Scaling { lambda: f64 },
    /// One explicit θ per grid point.
    Table { values: Vec<f64> },
}

impl Default for ThetaRule {
    fn default() -> Self {
        ThetaRule::Scaling { lambda: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    GnuplotDat,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "gnuplot-dat" => Ok(OutputFormat::GnuplotDat),
            _ => Err(Error::Config(format!("unknown output format `{s}`"))),
        }
    }
}

fn default_d() -> usize {
    2
}
fn default_one() -> f64 {
    1.0
}
fn default_m() -> usize {
    1
}
fn default_snap() -> usize {
    4
}

/// Minimum replications for scenarios that estimate a distance.
pub const MIN_DISTANCE_REPS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default = "default_d")]
    pub d: usize,
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub theta: ThetaRule,
    /// Edge-length exponent.
    #[serde(default = "default_one")]
    pub b: f64,
    /// Distance-power exponent; defaults to 2d.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Scale of the short-edge, close-flat and diameter windows.
    #[serde(default = "default_one")]
    pub a: f64,
    /// Flat dimension.
    #[serde(default = "default_m")]
    pub m: usize,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Grid cells per axis used to discretize point configurations before the
    /// empirical KR surrogate.
    #[serde(default = "default_snap")]
    pub snap: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Shipped default configuration of a scenario.
    pub fn example(s: Scenario) -> Self {
        let mut c = ScenarioConfig {
            scenario: s.name().into(),
            d: 2,
            t_grid: vec![50.0, 100.0, 200.0],
            theta: ThetaRule::default(),
            b: 1.0,
            tau: None,
            a: 1.0,
            m: 1,
            replications: 20_000,
            seed: 1,
            snap: 4,
            output: None,
            format: OutputFormat::Csv,
        };
        match s {
            Scenario::GilbertEdges => c.t_grid = vec![50.0, 100.0, 200.0, 400.0],
            Scenario::DistancePower => {
                c.tau = Some(4.0);
                c.replications = 10_000;
            }
            Scenario::GilbertMidpoints => {
                c.t_grid = vec![50.0, 200.0];
                c.replications = 1000;
            }
            Scenario::Flats => {
                c.d = 3;
                c.t_grid = vec![25.0, 50.0, 100.0];
                c.replications = 10_000;
            }
            Scenario::Polytope => {
                c.d = 3;
                c.t_grid = vec![100.0, 200.0, 400.0];
            }
            Scenario::GlauberVerify => {
                c.t_grid = vec![5.0];
                c.replications = 100_000;
            }
            Scenario::MeckeVerify => {
                c.t_grid = vec![20.0];
                c.replications = 10_000;
            }
            Scenario::KrEstimate => {
                c.t_grid = vec![2.0, 5.0];
                c.replications = 1000;
            }
            Scenario::GilbertLengths => {}
        }
        c
    }

    /// Check the configuration before any sampling.
    pub fn validate(&self) -> Result<Scenario> {
        let s: Scenario = self.scenario.parse()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.replications == 0 {
            return bad("replications must be positive".into());
        }
        if s.estimates_distance() && self.replications < MIN_DISTANCE_REPS {
            return bad(format!(
                "{s} estimates a distance and needs at least {MIN_DISTANCE_REPS} replications"
            ));
        }
        if self.t_grid.is_empty() {
            return bad("t_grid is empty".into());
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t >= 1.0)) {
            return bad("every t must be finite and at least 1".into());
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("t_grid must be strictly increasing".into());
        }
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if self.snap == 0 {
            return bad("snap must be positive".into());
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad("a must be positive".into());
        }
        match &self.theta {
            ThetaRule::Scaling { lambda } if !(*lambda >= 0.0 && lambda.is_finite()) => {
                return bad("theta.lambda must be nonnegative".into())
            }
            ThetaRule::Table { values } => {
                if values.len() != self.t_grid.len() {
                    return bad("theta table must have one value per t".into());
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("theta table values must be positive".into());
                }
                if matches!(s, Scenario::GilbertEdges | Scenario::GilbertLengths) {
                    return bad(format!("{s} needs the scaling theta rule"));
                }
            }
            _ => {}
        }
        match s {
            Scenario::DistancePower if self.tau() <= self.d as f64 => {
                return Err(Error::Regime(format!(
                    "tau = {} must exceed d = {}",
                    self.tau(),
                    self.d
                )))
            }
            Scenario::Flats if self.m == 0 || 2 * self.m >= self.d => {
                return Err(Error::Regime(format!("need 1 <= m < d/2, got d = {}, m = {}", self.d, self.m)))
            }
            Scenario::Polytope if self.d < 2 => return Err(Error::Regime("polytope needs d >= 2".into())),
            Scenario::KrEstimate if self.d != 2 => return bad("kr-estimate is defined for d = 2".into()),
            _ => {}
        }
        Ok(s)
    }

    fn tau(&self) -> f64 {
        self.tau.unwrap_or(2.0 * self.d as f64)
    }

    fn lambda(&self) -> f64 {
        match self.theta {
            ThetaRule::Scaling { lambda } => lambda,
            ThetaRule::Table { .. } => f64::NAN,
        }
    }

    fn theta_at(&self, i: usize, t: f64) -> f64 {
        match &self.theta {
            ThetaRule::Scaling { lambda } => (lambda / (t * t)).powf(1.0 / self.d as f64),
            ThetaRule::Table { values } => values[i],
        }
    }
}

/// One line of output. Column order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub d: usize,
    pub t: f64,
    pub statistic: String,
    pub distance_name: String,
    pub distance: f64,
    pub stderr: Option<f64>,
    pub bound: Option<f64>,
    pub bound_form: Option<String>,
    pub rate_pred: Option<f64>,
    pub seed: u64,
    /// Not emitted: output must be byte-identical across runs.
    #[serde(skip)]
    pub wall_seconds: f64,
}

pub const COLUMNS: [&str; 11] = [
    "scenario",
    "d",
    "t",
    "statistic",
    "distance_name",
    "distance",
    "stderr",
    "bound",
    "bound_form",
    "rate_pred",
    "seed",
];

impl ResultRow {
    /// Measured distance exceeds the bound even after subtracting 3σ.
    pub fn violates_bound(&self) -> bool {
        match self.bound {
            Some(b) if b.is_finite() => self.distance - 3.0 * self.stderr.unwrap_or(0.0) > b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    /// Least-squares slope of log distance against log t.
    pub slope: Option<f64>,
    pub rate_pred: Option<f64>,
    /// Indices of rows whose distance exceeds the bound beyond 3σ.
    pub violations: Vec<usize>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// Slope of the least-squares line through (ln t, ln distance), over rows with
/// positive distance. Needs two distinct t values.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t > 0.0 && *y > 0.0)
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Run a scenario over its t-grid.
pub fn run(config: &ScenarioConfig) -> Result<RunReport> {
    let s = config.validate()?;
    let start = Instant::now();
    let mut rows = Vec::new();
    for (i, &t) in config.t_grid.iter().enumerate() {
        let t0 = Instant::now();
        let mut new = match s {
            Scenario::GilbertEdges => vec![gilbert_edges(config, s, i, t)?],
            Scenario::GilbertLengths => vec![gilbert_lengths(config, s, i, t)?],
            Scenario::GilbertMidpoints => vec![gilbert_midpoints(config, s, i, t)?],
            Scenario::DistancePower => vec![distance_power(config, s, t)?],
            Scenario::Flats => vec![flats(config, s, t)?],
            Scenario::Polytope => vec![polytope(config, s, t)?],
            Scenario::GlauberVerify => glauber_verify(config, s, t)?,
            Scenario::MeckeVerify => mecke_verify(config, s, t)?,
            Scenario::KrEstimate => vec![kr_estimate(config, s, t)?],
        };
        let secs = t0.elapsed().as_secs_f64();
        for r in &mut new {
            r.wall_seconds = secs;
            info!("{} t={} {}={} bound={:?}", r.scenario, r.t, r.distance_name, r.distance, r.bound);
        }
        rows.extend(new);
    }
    let violations: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.violates_bound())
        .map(|(i, _)| i)
        .collect();
    for &i in &violations {
        let r = &rows[i];
        warn!("{} t={} {}: {} = {} exceeds bound {:?}", r.scenario, r.t, r.statistic, r.distance_name, r.distance, r.bound);
    }
    let slope = if s.estimates_distance() {
        log_log_slope(&rows.iter().map(|r| (r.t, r.distance)).collect::<Vec<_>>())
    } else {
        None
    };
    let rate_pred = rows.first().and_then(|r| r.rate_pred);
    Ok(RunReport {
        summary: Summary {
            scenario: s.name().into(),
            slope,
            rate_pred,
            violations,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        },
        rows,
    })
}

fn row(c: &ScenarioConfig, s: Scenario, t: f64, statistic: &str, distance_name: &str, distance: f64) -> ResultRow {
    ResultRow {
        scenario: s.name().into(),
        d: c.d,
        t,
        statistic: statistic.into(),
        distance_name: distance_name.into(),
        distance,
        stderr: None,
        bound: None,
        bound_form: None,
        rate_pred: None,
        seed: c.seed,
        wall_seconds: 0.0,
    }
}

/// Run `reps` replications in parallel. Replication `rep` always uses the same
/// stream, so the same draws are reused across the t-grid.
fn replicate<X: Send>(seed: u64, salt: u64, reps: usize, f: impl Fn(&mut ChaCha8Rng) -> X + Sync) -> Vec<X> {
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| f(&mut SeededRng::derive(seed, salt, rep)))
        .collect()
}

const BOOTSTRAP: usize = 200;

/// Bootstrap standard error of a statistic of resampled index sets.
fn bootstrap_se(n: usize, seed: u64, stat: impl Fn(&[usize]) -> f64 + Sync) -> f64 {
    let vals: Vec<f64> = (0..BOOTSTRAP as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = SeededRng::derive(seed, 0xb007, b);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            stat(&idx)
        })
        .collect();
    let m = vals.iter().sum::<f64>() / vals.len() as f64;
    (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
}

fn uniform_points(d: usize, t: f64, rng: &mut ChaCha8Rng) -> Vec<Coords> {
    process::sample_poisson_points(&Domain::unit_cube(d), t, rng).expect("validated intensity")
}

fn gilbert_edges(c: &ScenarioConfig, s: Scenario, i: usize, t: f64) -> Result<ResultRow> {
    let d = c.d;
    let theta = c.theta_at(i, t);
    let counts: Vec<u64> = replicate(c.seed, s.salt(), c.replications, |rng| {
        transform::count_pairs_within(&uniform_points(d, t, rng), theta)
    });
    let lambda = kappa(d) * c.lambda() / 2.0;
    let law = AnalyticLaw::Poisson { lambda };
    let w1 = |cs: &[u64]| -> f64 {
        EmpiricalDistribution::from_counts(cs)
            .and_then(|e| metrics::wasserstein1_to_law(&e, &law))
            .unwrap_or(f64::NAN)
    };
    let distance = w1(&counts);
    let stderr = bootstrap_se(counts.len(), c.seed, |idx| {
        w1(&idx.iter().map(|&j| counts[j]).collect::<Vec<_>>())
    });
    let moments = match bounds::gilbert_edge_moments(d, t, theta, Mode::Poisson) {
        Ok(m) => m,
        Err(e) => {
            info!("analytic moments unavailable ({e}); using the simulated counts");
            let n = counts.len() as f64;
            let m1 = counts.iter().map(|&x| x as f64).sum::<f64>() / n;
            let m2 = counts.iter().map(|&x| (x * x) as f64).sum::<f64>() / n;
            MomentPair::exact(m1, m2, Provenance::MonteCarlo)
        }
    };
    let mut r = row(c, s, t, "edge-count", "wasserstein", distance);
    r.stderr = Some(stderr);
    r.bound = Some(bounds::ustat_poisson_bound(&moments, lambda, Mode::Poisson, 2)?);
    r.bound_form = Some("moment-form".into());
    r.rate_pred = Some(bounds::gilbert_rate_exponent(d));
    Ok(r)
}

/// Histogram on 64 cells: the atom at zero, 62 equal cells on (0, hi], overflow.
pub fn histogram64(xs: &[f64], hi: f64) -> [f64; 64] {
    let mut h = [0.0; 64];
    for &x in xs {
        let k = if x == 0.0 {
            0
        } else if x > hi {
            63
        } else {
            ((x / hi) * 62.0).ceil().clamp(1.0, 62.0) as usize
        };
        h[k] += 1.0;
    }
    let n = xs.len() as f64;
    h.iter_mut().for_each(|v| *v /= n);
    h
}

fn tv64(a: &[f64], b: &[f64], hi: f64) -> f64 {
    let (p, q) = (histogram64(a, hi), histogram64(b, hi));
    0.5 * p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn gilbert_lengths(c: &ScenarioConfig, s: Scenario, i: usize, t: f64) -> Result<ResultRow> {
    let d = c.d;
    let theta = c.theta_at(i, t);
    let scale = t.powf(2.0 * c.b / d as f64);
    let b = c.b;
    let stat: Vec<f64> = replicate(c.seed, s.salt(), c.replications, |rng| {
        scale * transform::edge_length_sum(&uniform_points(d, t, rng), theta, b)
    });
    let law = bounds::gilbert_limit_laws(d, c.lambda(), b, 2.0 * d as f64 + 1.0)?.edge_length;
    // Target draws are shared by every t.
    let target: Vec<f64> = replicate(c.seed, s.salt() + 100, c.replications, |rng| law.sample(rng));
    let mut sorted = target.clone();
    sorted.sort_by(f64::total_cmp);
    let hi = sorted[(sorted.len() as f64 * 0.995) as usize].max(f64::MIN_POSITIVE);
    let distance = tv64(&stat, &target, hi);
    let n = stat.len();
    let stderr = bootstrap_se(n, c.seed, |idx| {
        let a: Vec<f64> = idx.iter().map(|&j| stat[j]).collect();
        let bb: Vec<f64> = idx.iter().map(|&j| target[(j * 7919 + 13) % n]).collect();
        tv64(&a, &bb, hi)
    });
    let mut r = row(c, s, t, "edge-length-sum", "tv-64-cells", distance);
    r.stderr = Some(stderr);
    if d <= 2 {
        let rep = bounds::gilbert_length_bound(d, t, c.lambda())?;
        r.bound = Some(rep.bound);
        r.bound_form = Some(rep.form.name().into());
    }
    r.rate_pred = Some(bounds::gilbert_rate_exponent(d));
    Ok(r)
}

/// Cell index of x ∈ [lo, lo + side·cells)^d on a grid of `cells` per axis.
fn snap_cell(x: &[f64], lo: f64, width: f64, cells: usize) -> i64 {
    x.iter().fold(0i64, |acc, &v| {
        let k = (((v - lo) / width).floor() as i64).clamp(0, cells as i64 - 1);
        acc * cells as i64 + k
    })
}

fn snapped(points: impl IntoIterator<Item = Coords>, lo: f64, width: f64, cells: usize) -> Configuration<i64> {
    Configuration::from_points(
        SpaceTag::Named(format!("grid{cells}")),
        points.into_iter().map(|p| snap_cell(&p, lo, width, cells)),
    )
}

/// Empirical KR surrogate between the short-edge midpoint process (edges of
/// length ≤ cutoff among Poisson(t) points in [0,1]^d) and a Poisson process
/// with intensity (κ_d/2)a^d on the cube. Both sides are snapped to `cells`
/// grid cells per axis and use `n` configurations each.
pub fn midpoint_kr(d: usize, t: f64, a: f64, cutoff: f64, cells: usize, n: usize, seed: u64) -> Result<metrics::KrEstimate> {
    let salt = Scenario::GilbertMidpoints.salt();
    let width = 1.0 / cells as f64;
    let xi: Vec<Configuration<i64>> = replicate(seed, salt, n, |rng| {
        let pts = uniform_points(d, t, rng);
        let mut mids = Vec::new();
        transform::for_each_pair_within(&pts, cutoff, |i, j, _| {
            mids.push(pts[i].iter().zip(&pts[j]).map(|(x, y)| 0.5 * (x + y)).collect::<Coords>())
        });
        snapped(mids, 0.0, width, cells)
    });
    let mass = kappa(d) / 2.0 * a.powi(d as i32);
    let zeta: Vec<Configuration<i64>> = replicate(seed, salt + 100, n, |rng| {
        snapped(uniform_points(d, mass, rng), 0.0, width, cells)
    });
    metrics::empirical_kr(&xi, &zeta)
}

fn gilbert_midpoints(c: &ScenarioConfig, s: Scenario, i: usize, t: f64) -> Result<ResultRow> {
    let d = c.d;
    let short = t.powf(-2.0 / d as f64) * c.a;
    let cutoff = match c.theta {
        ThetaRule::Table { .. } => c.theta_at(i, t).min(short),
        ThetaRule::Scaling { .. } => short,
    };
    let kr = midpoint_kr(d, t, c.a, cutoff, c.snap, c.replications, c.seed)?;
    let mut r = row(c, s, t, "midpoint-process", "kr-surrogate-excess", kr.estimate - kr.noise_floor);
    r.stderr = Some(kr.pooled_stderr());
    if d <= 2 && cutoff == short {
        let rep = bounds::gilbert_midpoint_bound(d, t, c.a)?;
        r.bound = Some(rep.bound);
        r.bound_form = Some(rep.form.name().into());
    }
    r.rate_pred = Some(bounds::gilbert_rate_exponent(d));
    Ok(r)
}

fn kolmogorov_to(emp: &EmpiricalDistribution, law: &AnalyticLaw, reference: &Option<EmpiricalDistribution>) -> f64 {
    match reference {
        None => metrics::kolmogorov(emp, law).unwrap_or(f64::NAN),
        Some(r) => metrics::kolmogorov_between(emp, r),
    }
}

fn distance_power(c: &ScenarioConfig, s: Scenario, t: f64) -> Result<ResultRow> {
    let d = c.d;
    let tau = c.tau();
    let scale = t.powf(-2.0 * tau / d as f64);
    let half_tau = tau / 2.0;
    let stat: Vec<f64> = replicate(c.seed, s.salt(), c.replications, |rng| {
        let pts = uniform_points(d, t, rng);
        let mut acc = transform::KahanSum::default();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                acc.add(dist2(&pts[a], &pts[b]).powf(-half_tau));
            }
        }
        scale * acc.value()
    });
    let law = bounds::gilbert_limit_laws(d, 1.0, 1.0, tau)?.distance_power;
    let reference = if law.has_cdf() {
        None
    } else {
        let draws = replicate(c.seed, s.salt() + 100, c.replications, |rng| law.sample(rng));
        Some(EmpiricalDistribution::from_samples(draws)?)
    };
    let emp = EmpiricalDistribution::from_samples(stat.clone())?;
    let distance = kolmogorov_to(&emp, &law, &reference);
    let stderr = bootstrap_se(stat.len(), c.seed, |idx| {
        let xs: Vec<f64> = idx.iter().map(|&j| stat[j]).collect();
        EmpiricalDistribution::from_samples(xs)
            .map(|e| kolmogorov_to(&e, &law, &reference))
            .unwrap_or(f64::NAN)
    });
    let mut r = row(c, s, t, "distance-power-sum", "kolmogorov", distance);
    r.stderr = Some(stderr);
    r.rate_pred = Some(bounds::stable_rate_exponent(d, tau)?);
    Ok(r)
}

/// Distance and midpoint of two lines p + s·u, q + r·v with unit directions;
/// None when they are (nearly) parallel.
fn line_distance_midpoint(p: &[f64], u: &[f64], q: &[f64], v: &[f64]) -> Option<(f64, Coords)> {
    let w: Coords = p.iter().zip(q).map(|(a, b)| a - b).collect();
    let cuv = dot(u, v);
    let den = 1.0 - cuv * cuv;
    if den < 1e-12 {
        return None;
    }
    let (uw, vw) = (dot(u, &w), dot(v, &w));
    let s = (cuv * vw - uw) / den;
    let r = (vw - cuv * uw) / den;
    let mut mid = Coords::with_capacity(p.len());
    let mut d2 = 0.0;
    for k in 0..p.len() {
        let a = p[k] + s * u[k];
        let b = q[k] + r * v[k];
        d2 += (a - b) * (a - b);
        mid.push(0.5 * (a + b));
    }
    Some((d2.sqrt(), mid))
}

/// Number of pairs of flats at distance ≤ eps whose midpoint lies in [−½, ½]^d.
pub fn close_flat_pairs(flats: &[AffineFlat], eps: f64) -> u64 {
    let inside = |x: &[f64]| x.iter().all(|v| v.abs() <= 0.5);
    let mut n = 0;
    for i in 0..flats.len() {
        for j in i + 1..flats.len() {
            let (e, f) = (&flats[i], &flats[j]);
            let hit = if e.flat_dim() == 1 {
                line_distance_midpoint(&e.base, &e.directions[0], &f.base, &f.directions[0])
            } else {
                geometry::flat_distance_midpoint(e, f).ok().map(|(dd, m)| (dd, m.coords))
            };
            if let Some((dd, mid)) = hit {
                if dd <= eps && inside(&mid) {
                    n += 1;
                }
            }
        }
    }
    n
}

fn flats(c: &ScenarioConfig, s: Scenario, t: f64) -> Result<ResultRow> {
    let (d, m) = (c.d, c.m);
    let eps = c.a * t.powf(-2.0 / (d - 2 * m) as f64);
    // A flat carrying a midpoint in K passes within eps/2 of K.
    let radius = (d as f64).sqrt() / 2.0 + eps;
    let counts: Vec<f64> = replicate(c.seed, s.salt(), c.replications, |rng| {
        let fl = process::sample_poisson_flats(d, m, t, radius, rng).expect("validated flats");
        close_flat_pairs(&fl, eps) as f64
    });
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let target = bounds::flats_constant(d, m)? * c.a.powi((d - 2 * m) as i32);
    let mut r = row(c, s, t, "close-flat-midpoints", "mean-abs-error", (mean - target).abs());
    r.stderr = Some((var / n).sqrt());
    r.rate_pred = Some(-1.0);
    Ok(r)
}

/// Whether some pair of unit vectors satisfies ‖x + y‖ ≤ rho, i.e. is within
/// the near-antipodal window.
pub fn has_near_antipodal_pair(points: &[Coords], rho: f64) -> bool {
    let n = points.len();
    if n < 2 {
        return false;
    }
    let mut both: Vec<Coords> = points.to_vec();
    both.extend(points.iter().map(|p| p.iter().map(|x| -x).collect::<Coords>()));
    let mut found = false;
    transform::for_each_pair_within(&both, rho, |a, b, _| {
        let (lo, hi) = (a.min(b), a.max(b));
        if lo < n && hi >= n && hi - n != lo {
            found = true;
        }
    });
    found
}

fn polytope(c: &ScenarioConfig, s: Scenario, t: f64) -> Result<ResultRow> {
    let d = c.d;
    let law = bounds::polytope_law(d, t, c.a)?;
    let gap = c.a * t.powf(-4.0 / (d as f64 - 1.0));
    // ‖x − y‖ ≥ 2 − gap  ⇔  ‖x + y‖² ≤ 4 − (2 − gap)² on the unit sphere.
    let rho = (4.0 - (2.0 - gap).powi(2)).max(0.0).sqrt();
    let hits: Vec<bool> = replicate(c.seed, s.salt(), c.replications, |rng| {
        let k = process::sample_poisson_count(t, rng).expect("validated t");
        let pts: Vec<Coords> = (0..k).map(|_| uniform_on_sphere(d, rng)).collect();
        !has_near_antipodal_pair(&pts, rho)
    });
    let n = hits.len() as f64;
    let p = hits.iter().filter(|h| **h).count() as f64 / n;
    let bound = bounds::polytope_bound(d, t, c.a)?;
    let mut r = row(c, s, t, "rescaled-diameter-tail", "tail-abs-error", (p - law.tail).abs());
    r.stderr = Some((p * (1.0 - p) / n).sqrt());
    r.bound = Some(bound.bound);
    r.bound_form = Some(bound.form.name().into());
    r.rate_pred = Some(bounds::polytope_rate_exponent(d));
    Ok(r)
}

/// Acceptance thresholds of the Glauber suite.
pub const GLAUBER_SIM_TV: f64 = 0.02;
pub const GLAUBER_ERGODIC_TV: f64 = 0.03;

fn glauber_verify(c: &ScenarioConfig, s: Scenario, t: f64) -> Result<Vec<ResultRow>> {
    let domain = Domain::unit_cube(c.d);
    let target = TargetIntensity::uniform(domain.clone(), t)?;
    let space = SpaceTag::of_domain(&domain);
    let mut rng = SeededRng::derive(c.seed, s.salt(), u64::MAX);
    let start = Configuration::from_points(space.clone(), (0..3).map(|_| domain.sample_uniform(&mut rng)));
    let reps = c.replications;
    let seed = crate::rng::mix(c.seed, s.salt());
    let mut out = Vec::new();

    let ev = glauber::count_law(&start, &target, 1.0, reps, seed, Simulator::EventDriven)?;
    let ex = glauber::count_law(&start, &target, 1.0, reps, seed ^ 1, Simulator::ExactLaw)?;
    let mut r = row(c, s, t, "count-law-s1", "tv", metrics::tv_integer(&ev, &ex));
    r.bound = Some(GLAUBER_SIM_TV);
    r.bound_form = Some("threshold".into());
    out.push(r);

    let half = |p: &Point| p.coords[0] < 0.5;
    let h_count = |w: &Configuration<Point>| w.total_count() as f64;
    let h_half = move |w: &Configuration<Point>| w.count_in(half) as f64;
    let h_any = move |w: &Configuration<Point>| if w.count_in(half) > 0 { 1.0 } else { 0.0 };
    let fs: [(&str, glauber::Functional<'_, Point>); 3] =
        [("count", &h_count), ("half-count", &h_half), ("half-occupied", &h_any)];
    let y = Point::from_coords(std::iter::repeat_n(0.25, c.d).collect());
    for (j, (name, h)) in fs.iter().enumerate() {
        for (k, &sh) in [0.5, 1.0].iter().enumerate() {
            let res = glauber::commutation_check(&start, &y, &target, *h, sh, reps, seed ^ (16 + 2 * j + k) as u64)?;
            let mut r = row(
                c,
                s,
                t,
                &format!("commutation-{name}-s{sh}"),
                "abs-gap",
                (res.lhs.mean - res.rhs.mean).abs(),
            );
            r.stderr = Some(res.pooled_stderr());
            r.bound = Some(0.0);
            r.bound_form = Some("3-sigma".into());
            out.push(r);
        }
    }

    let empty = Configuration::empty(space);
    let erg = glauber::ergodicity_check(&empty, &target, &[8.0], reps, seed ^ 2)?;
    let mut r = row(c, s, t, "ergodicity-s8", "tv", erg[0].1);
    r.bound = Some(GLAUBER_ERGODIC_TV);
    r.bound_form = Some("threshold".into());
    out.push(r);
    Ok(out)
}

fn mecke_verify(c: &ScenarioConfig, s: Scenario, t: f64) -> Result<Vec<ResultRow>> {
    let domain = Domain::unit_cube(c.d);
    let g1 = |x: &[&[f64]], _: &[Coords]| -> f64 { x[0][0] };
    let g2 = |x: &[&[f64]], mu: &[Coords]| -> f64 {
        let near = mu.iter().filter(|p| dist2(p, x[0]) <= 0.04).count();
        (near.min(4)) as f64 / 4.0
    };
    let g3 = |x: &[&[f64]], _: &[Coords]| -> f64 {
        if dist2(x[0], x[1]) <= 0.09 { 1.0 } else { 0.0 }
    };
    let g4 = |x: &[&[f64]], mu: &[Coords]| -> f64 {
        if dist2(x[0], x[1]) <= 0.16 {
            (mu.len().min(50)) as f64 / 50.0
        } else {
            0.0
        }
    };
    let tests: [(&str, TestFunction<'_>); 4] = [
        ("k1-coordinate", TestFunction { k: 1, bound: 1.0, g: &g1 }),
        ("k1-local-count", TestFunction { k: 1, bound: 1.0, g: &g2 }),
        ("k2-close-pair", TestFunction { k: 2, bound: 1.0, g: &g3 }),
        ("k2-pair-times-size", TestFunction { k: 2, bound: 1.0, g: &g4 }),
    ];
    let n = t.ceil() as usize;
    let mut out = Vec::new();
    for (j, (name, g)) in tests.iter().enumerate() {
        for (label, model) in [("poisson", ProcessModel::Poisson { t }), ("binomial", ProcessModel::Binomial { n })] {
            let seed = crate::rng::mix(c.seed, s.salt() * 64 + 2 * j as u64 + (label == "binomial") as u64);
            let res = process::mecke_check(&domain, model, g, c.replications, 8, seed)?;
            let mut r = row(c, s, t, &format!("{name}-{label}"), "abs-gap", (res.lhs - res.rhs).abs());
            r.stderr = Some(res.pooled_stderr());
            r.bound = Some(0.0);
            r.bound_form = Some("3-sigma".into());
            out.push(r);
        }
    }
    Ok(out)
}

/// Inverse CDF of the law of x₁ + x₂ for x uniform in [0,1]².
fn triangular_quantile(u: f64) -> f64 {
    if u <= 0.5 {
        (2.0 * u).sqrt()
    } else {
        2.0 - (2.0 * (1.0 - u)).sqrt()
    }
}

/// Empirical KR surrogate between the image of Poisson(t) on [0,1]² under
/// x ↦ x₁ + x₂ and a Poisson process sampled directly from the pushforward
/// intensity (t times the triangular law on [0,2]). Values are snapped to
/// `cells` bins and each side has `n` configurations.
pub fn mapping_kr(t: f64, cells: usize, n: usize, seed: u64) -> Result<metrics::KrEstimate> {
    let salt = Scenario::KrEstimate.salt();
    let domain = Domain::unit_cube(2);
    let kernel = FnKernel::new(
        1,
        SpaceTag::Real,
        |x: &[&Point]| x[0].coords[0] + x[0].coords[1],
        |_: &[&Point]| true,
    );
    let width = 2.0 / cells as f64;
    let bin = |v: f64| ((v / width).floor() as i64).clamp(0, cells as i64 - 1);
    let tag = SpaceTag::Named("bins".into());
    let induced: Vec<Configuration<i64>> = replicate(seed, salt, n, |rng| {
        let eta = process::sample_poisson(&domain, t, rng).expect("validated t");
        let img = transform::induce(&eta, &kernel).expect("unary kernel");
        img.map(tag.clone(), |v| bin(*v))
    });
    let direct: Vec<Configuration<i64>> = replicate(seed, salt + 100, n, |rng| {
        let k = process::sample_poisson_count(t, rng).expect("validated t");
        Configuration::from_points(tag.clone(), (0..k).map(|_| bin(triangular_quantile(rng.random()))))
    });
    metrics::empirical_kr(&induced, &direct)
}

fn kr_estimate(c: &ScenarioConfig, s: Scenario, t: f64) -> Result<ResultRow> {
    let kr = mapping_kr(t, c.snap, c.replications, c.seed)?;
    // k = 1 with exact intensity: both bound terms vanish.
    let bound = bounds::thm_main_bound(0.0, 0.0, 1, Mode::Poisson, t)?;
    let mut r = row(c, s, t, "pushforward-process", "kr-surrogate-excess", kr.estimate - kr.noise_floor);
    r.stderr = Some(kr.pooled_stderr());
    r.bound = Some(bound.bound);
    r.bound_form = Some(bound.form.name().into());
    Ok(r)
}

/// Outcome of comparing the exact transport solver against vertex enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OtCheck {
    pub instances: usize,
    pub max_cost_error: f64,
    pub max_duality_gap: f64,
}

/// Random transport instances with at most four rows and columns, random
/// costs and random marginals of equal mass.
pub fn ot_self_check(instances: usize, seed: u64) -> Result<OtCheck> {
    let mut out = OtCheck {
        instances,
        max_cost_error: 0.0,
        max_duality_gap: 0.0,
    };
    for i in 0..instances as u64 {
        let mut rng = SeededRng::derive(seed, 0x07, i);
        let n = rng.random_range(1..=4usize);
        let m = rng.random_range(1..=4usize);
        let cost: Vec<f64> = (0..n * m).map(|_| rng.random_range(0.0..10.0)).collect();
        let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
        let scale = mu.iter().sum::<f64>() / raw.iter().sum::<f64>();
        let nu: Vec<f64> = raw.iter().map(|x| x * scale).collect();
        let plan = metrics::ot_exact(&cost, &mu, &nu)?;
        let brute = metrics::ot_vertex_enumeration(&cost, &mu, &nu)?;
        out.max_cost_error = out.max_cost_error.max((plan.cost - brute).abs());
        out.max_duality_gap = out.max_duality_gap.max(plan.duality_gap.abs());
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serialize rows in the given format.
pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Empty("result rows"));
    }
    Ok(match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?)
                .expect("csv output is UTF-8")
        }
        OutputFormat::Json => serde_json::to_string_pretty(rows)? + "\n",
        OutputFormat::GnuplotDat => {
            let mut out = format!("# {}\n", COLUMNS.join(" "));
            for r in rows {
                let dash = |s: &Option<String>| s.clone().unwrap_or_else(|| "-".into());
                let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "NaN".into());
                out += &format!(
                    "{} {} {} {} {} {} {} {} {} {} {}\n",
                    r.scenario,
                    r.d,
                    r.t,
                    r.statistic,
                    r.distance_name,
                    r.distance,
                    num(r.stderr),
                    num(r.bound),
                    dash(&r.bound_form),
                    num(r.rate_pred),
                    r.seed
                );
            }
            out
        }
    })
}

/// Write rows to `path`; nothing is created when there are no rows.
pub fn emit(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(rows, format)?;
    fs::write(path, text)?;
    Ok(())
}

/// Parse rows written in the CSV format.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    rd.deserialize()
        .map(|r| r.map_err(|e| Error::Config(e.to_string())))
        .collect()
}

/// Parse rows written in the JSON format.
pub fn parse_json(text: &str) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str(text)?)
}

/// Human-readable one-line rendering of a row, used by the CLI.
pub fn describe(r: &ResultRow) -> String {
    format!(
        "{:<18} t={:<6} {:<28} {}={:.5} ± {} bound={} ({})",
        r.scenario,
        r.t,
        r.statistic,
        r.distance_name,
        r.distance,
        opt(r.stderr.map(|x| (x * 1e5).round() / 1e5)),
        opt(r.bound.map(|x| (x * 1e5).round() / 1e5)),
        r.bound_form.as_deref().unwrap_or("-")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ResultRow {
        ResultRow {
            scenario: "gilbert-edges".into(),
            d: 2,
            t: 50.0,
            statistic: "edge-count".into(),
            distance_name: "wasserstein".into(),
            distance: 0.1 + 0.2,
            stderr: Some(1.0 / 3.0),
            bound: None,
            bound_form: Some("moment-form".into()),
            rate_pred: Some(-1.0),
            seed: 7,
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Scenario>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn zero_replications_rejected() {
        let mut c = ScenarioConfig::example(Scenario::GilbertEdges);
        c.replications = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(run(&c).is_err());
        c.replications = 999;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::example(Scenario::GilbertEdges);
        c.t_grid = vec![100.0, 50.0];
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::example(Scenario::DistancePower);
        c.tau = Some(2.0);
        assert!(matches!(c.validate(), Err(Error::Regime(_))));
    }

    #[test]
    fn csv_has_header_and_one_line() {
        let text = render(&[sample_row()], OutputFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], COLUMNS.join(","));
        assert!(lines[1].contains(",,moment-form,"));
    }

    #[test]
    fn csv_json_round_trip() {
        let mut other = sample_row();
        other.stderr = None;
        other.distance = std::f64::consts::PI * 1e-7;
        let rows = vec![sample_row(), other];
        let back = parse_csv(&render(&rows, OutputFormat::Csv).unwrap()).unwrap();
        let again = parse_json(&render(&back, OutputFormat::Json).unwrap()).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert!((a.distance - b.distance).abs() < 1e-12);
            assert_eq!(a.stderr.is_some(), b.stderr.is_some());
            if let (Some(x), Some(y)) = (a.stderr, b.stderr) {
                assert!((x - y).abs() < 1e-12);
            }
            assert_eq!(a.bound, b.bound);
            assert_eq!(a.bound_form, b.bound_form);
            assert_eq!(a.statistic, b.statistic);
        }
    }

    #[test]
    fn gnuplot_header() {
        let text = render(&[sample_row()], OutputFormat::GnuplotDat).unwrap();
        assert!(text.starts_with("# scenario d t "));
        assert_eq!(text.lines().nth(1).unwrap().split_whitespace().count(), 11);
    }

    #[test]
    fn empty_rows_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        assert!(emit(&[], OutputFormat::Csv, &p).is_err());
        assert!(!p.exists());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&t: &f64| (t, 3.0 * t.powf(-0.7))).collect();
        assert!((log_log_slope(&pts).unwrap() + 0.7).abs() < 1e-12);
        assert_eq!(log_log_slope(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn histogram_cells() {
        let h = histogram64(&[0.0, 0.5, 1.0, 2.0], 1.0);
        assert_eq!(h[0], 0.25);
        assert_eq!(h[31], 0.25);
        assert_eq!(h[62], 0.25);
        assert_eq!(h[63], 0.25);
    }

    #[test]
    fn line_midpoint_matches_general_solver() {
        let mut rng = SeededRng::new(3, 0).rng();
        let fl = process::sample_poisson_flats(3, 1, 5.0, 1.0, &mut rng).unwrap();
        for i in 0..fl.len() {
            for j in i + 1..fl.len() {
                let (a, b) = (&fl[i], &fl[j]);
                let fast = line_distance_midpoint(&a.base, &a.directions[0], &b.base, &b.directions[0]).unwrap();
                let (dd, m) = geometry::flat_distance_midpoint(a, b).unwrap();
                assert!((fast.0 - dd).abs() < 1e-9);
                assert!(fast.1.iter().zip(&m.coords).all(|(x, y)| (x - y).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn antipodal_detection_matches_brute_force() {
        let mut rng = SeededRng::new(4, 0).rng();
        for _ in 0..200 {
            let pts: Vec<Coords> = (0..40).map(|_| uniform_on_sphere(3, &mut rng)).collect();
            let rho = 0.3;
            let brute = (0..pts.len()).any(|i| {
                (i + 1..pts.len()).any(|j| pts[i].iter().zip(&pts[j]).map(|(a, b)| (a + b) * (a + b)).sum::<f64>() <= rho * rho)
            });
            assert_eq!(has_near_antipodal_pair(&pts, rho), brute);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let mut c = ScenarioConfig::example(Scenario::GilbertEdges);
        c.t_grid = vec![10.0, 20.0];
        c.replications = 1000;
        let a = render(&run(&c).unwrap().rows, OutputFormat::Csv).unwrap();
        let b = render(&run(&c).unwrap().rows, OutputFormat::Csv).unwrap();
        assert_eq!(a, b);
    }
}
