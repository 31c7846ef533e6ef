//! Monte Carlo engine: per-drop pipeline, outage and rate estimation,
//! boresight grid search and altitude sweeps.
//!
//! All boresights evaluated at one altitude share the same drops (common
//! random numbers): drop `d` is sampled once from its substream and then
//! judged against every boresight. Drops are reduced in fixed-size chunks
//! that are merged in chunk order, so results are bit-identical for any
//! number of worker threads.

use rayon::prelude::*;

use crate::channel::{fejer_kernel, path_loss_linear, PathLossModel};
use crate::error::{ensure, Error, Result};
use crate::geometry::{
    boresight_bounds, covering_boresight_angle, interval_coverage, radiated_interval, required_vertical_angle,
    BeamGeometry, UserRegion,
};
use crate::noma::{drop_outcome, Coverage, DropResult, NomaConfig};
use crate::population::{drop_rng, DropPopulation, Placement, UserCount};

const CHUNK_DROPS: u64 = 512;

/// Default number of boresight grid points.
pub const DEFAULT_GRID_POINTS: usize = 25;

/// Everything needed to simulate one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub region: UserRegion,
    pub users: UserCount,
    pub placement: Placement,
    pub elements: u32,
    /// Vertical beamwidth (rad).
    pub beamwidth: f64,
    pub path_loss: PathLossModel,
    pub noma: NomaConfig,
    pub altitudes: Vec<f64>,
    pub grid_points: usize,
    pub drops: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        ensure(self.elements >= 1, "antenna elements", f64::from(self.elements), "must be >= 1")?;
        ensure(
            self.beamwidth > 0.0 && self.beamwidth < std::f64::consts::PI,
            "vertical beamwidth",
            self.beamwidth,
            "must lie in (0, pi)",
        )?;
        self.path_loss.validate()?;
        ensure(self.drops >= 1, "drops", self.drops as f64, "must be >= 1")?;
        ensure(self.grid_points >= 2, "grid points", self.grid_points as f64, "must be >= 2")?;
        ensure(!self.altitudes.is_empty(), "altitudes", 0.0, "list must not be empty")?;
        for &h in &self.altitudes {
            ensure(h.is_finite() && h > 0.0, "altitude", h, "must be finite and > 0")?;
        }
        match self.users {
            UserCount::Poisson { mean } => {
                ensure(mean.is_finite() && mean >= 0.0, "mean user count", mean, "must be finite and >= 0")?
            }
            UserCount::Fixed(_) => {}
        }
        if let Placement::FixedRadius(r) = self.placement {
            ensure(
                r >= self.region.inner() && r <= self.region.outer(),
                "fixed radius",
                r,
                "must lie inside the user region",
            )?;
        }
        Ok(())
    }

    pub fn required_angle(&self, h: f64) -> Result<f64> {
        required_vertical_angle(h, &self.region)
    }

    /// True when the beam cannot cover the region from altitude `h`.
    pub fn is_scanning(&self, h: f64) -> Result<bool> {
        Ok(self.required_angle(h)? > self.beamwidth)
    }
}

/// Where the beam is pointed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boresight {
    /// Boresight meets the ground at this distance (m).
    Distance(f64),
    /// Centred on the user region, which the beam covers entirely.
    FullCoverage,
}

#[derive(Debug, Clone, Copy)]
struct ResolvedBeam {
    sin_angle: f64,
    coverage: Coverage,
}

fn resolve(scenario: &Scenario, h: f64, boresight: Boresight) -> Result<ResolvedBeam> {
    match boresight {
        Boresight::Distance(d) => {
            let beam = BeamGeometry::new(h, d, scenario.beamwidth)?;
            Ok(ResolvedBeam {
                sin_angle: beam.boresight_angle().sin(),
                coverage: Coverage::Radiated(radiated_interval(&beam)),
            })
        }
        Boresight::FullCoverage => Ok(ResolvedBeam {
            sin_angle: covering_boresight_angle(h, &scenario.region)?.sin(),
            coverage: Coverage::Full,
        }),
    }
}

/// Per-user quantities that do not depend on the boresight.
struct DropState {
    population: DropPopulation,
    sin_elevation: Vec<f64>,
    /// `|alpha|^2 M / PL`
    scale: Vec<f64>,
    gains: Vec<f64>,
}

impl DropState {
    fn sample(scenario: &Scenario, h: f64, drop_index: u64) -> Result<Self> {
        let mut rng = drop_rng(scenario.seed, drop_index);
        let mut population = DropPopulation::sample(&scenario.region, scenario.users, scenario.placement, h, &mut rng);
        let m = f64::from(scenario.elements);
        let mut sin_elevation = Vec::with_capacity(population.count());
        let mut scale = Vec::with_capacity(population.count());
        for user in &mut population.users {
            user.path_loss = path_loss_linear(&scenario.path_loss, user.distance)?;
            sin_elevation.push(user.elevation.sin());
            scale.push(user.fading_power() * m / user.path_loss);
        }
        let gains = vec![0.0; population.count()];
        Ok(Self {
            population,
            sin_elevation,
            scale,
            gains,
        })
    }

    fn judge(&mut self, beam: &ResolvedBeam, scenario: &Scenario, noma: &NomaConfig) -> Result<DropResult> {
        for ((g, &s), &se) in self.gains.iter_mut().zip(&self.scale).zip(&self.sin_elevation) {
            *g = s * fejer_kernel(beam.sin_angle - se, scenario.elements);
        }
        drop_outcome(&self.population, &self.gains, beam.coverage, noma)
    }
}

/// Simulates drop `drop_index` at altitude `h`.
pub fn run_drop(scenario: &Scenario, h: f64, boresight: Boresight, drop_index: u64) -> Result<DropResult> {
    let beam = resolve(scenario, h, boresight)?;
    DropState::sample(scenario, h, drop_index)?.judge(&beam, scenario, &scenario.noma)
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metric {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn metric(&self, n: u64) -> Metric {
        let nf = n as f64;
        let mean = self.sum / nf;
        let se = if n > 1 {
            let var = ((self.sum_sq - self.sum * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        } else {
            0.0
        };
        Metric { mean, se }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: u64,
    noma: Moments,
    oma: Moments,
    outages: [u64; 4],
}

impl Tally {
    fn push(&mut self, r: &DropResult) {
        self.n += 1;
        self.noma.push(r.noma_rate);
        self.oma.push(r.oma_rate);
        let flags = [r.noma_outage_i, r.noma_outage_j, r.oma_outage_i, r.oma_outage_j];
        for (c, f) in self.outages.iter_mut().zip(flags) {
            *c += u64::from(f);
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.n += other.n;
        self.noma.merge(&other.noma);
        self.oma.merge(&other.oma);
        for (c, o) in self.outages.iter_mut().zip(other.outages) {
            *c += o;
        }
    }

    fn proportion(&self, count: u64) -> Metric {
        let n = self.n as f64;
        let p = count as f64 / n;
        let se = if self.n > 1 {
            (p * (1.0 - p) / (n - 1.0)).max(0.0).sqrt()
        } else {
            0.0
        };
        Metric { mean: p, se }
    }

    fn estimate(&self) -> Estimate {
        Estimate {
            drops: self.n,
            noma_rate: self.noma.metric(self.n),
            oma_rate: self.oma.metric(self.n),
            noma_outage_i: self.proportion(self.outages[0]),
            noma_outage_j: self.proportion(self.outages[1]),
            oma_outage_i: self.proportion(self.outages[2]),
            oma_outage_j: self.proportion(self.outages[3]),
        }
    }
}

/// Monte Carlo estimates at one (altitude, boresight) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub drops: u64,
    pub noma_rate: Metric,
    pub oma_rate: Metric,
    pub noma_outage_i: Metric,
    pub noma_outage_j: Metric,
    pub oma_outage_i: Metric,
    pub oma_outage_j: Metric,
}

/// Estimates at several boresights from the same `n_drops` drops.
pub fn estimate_many(scenario: &Scenario, h: f64, boresights: &[Boresight], n_drops: u64) -> Result<Vec<Estimate>> {
    ensure(n_drops >= 1, "drops", n_drops as f64, "must be >= 1")?;
    let beams = boresights
        .iter()
        .map(|&b| resolve(scenario, h, b))
        .collect::<Result<Vec<_>>>()?;
    let chunks = n_drops.div_ceil(CHUNK_DROPS);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tallies = vec![Tally::default(); beams.len()];
            let end = ((c + 1) * CHUNK_DROPS).min(n_drops);
            for d in c * CHUNK_DROPS..end {
                let mut state = DropState::sample(scenario, h, d)?;
                for (tally, beam) in tallies.iter_mut().zip(&beams) {
                    tally.push(&state.judge(beam, scenario, &scenario.noma)?);
                }
            }
            Ok(tallies)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = vec![Tally::default(); beams.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total.iter().map(Tally::estimate).collect())
}

pub fn estimate(scenario: &Scenario, h: f64, boresight: Boresight, n_drops: u64) -> Result<Estimate> {
    Ok(estimate_many(scenario, h, &[boresight], n_drops)?[0])
}

/// `n` equally spaced boresight distances spanning `[D1, D2]`.
pub fn boresight_grid(scenario: &Scenario, h: f64, n: usize) -> Result<Vec<f64>> {
    ensure(n >= 2, "grid points", n as f64, "must be >= 2")?;
    let (d1, d2) = boresight_bounds(h, &scenario.region, scenario.beamwidth)?;
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                d2
            } else {
                d1 + (d2 - d1) * k as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// Result of a boresight grid search at one altitude.
#[derive(Debug, Clone, PartialEq)]
pub struct BoresightScan {
    pub altitude: f64,
    pub points: Vec<(f64, Estimate)>,
    pub best: usize,
}

impl BoresightScan {
    pub fn d_star(&self) -> f64 {
        self.points[self.best].0
    }

    pub fn best_estimate(&self) -> &Estimate {
        &self.points[self.best].1
    }
}

/// Grid search for the boresight distance maximising the NOMA sum rate.
/// Ties go to the smaller distance.
pub fn optimize_boresight(scenario: &Scenario, h: f64, grid_n: usize, n_drops: u64) -> Result<BoresightScan> {
    let grid = boresight_grid(scenario, h, grid_n)?;
    let boresights: Vec<Boresight> = grid.iter().map(|&d| Boresight::Distance(d)).collect();
    let estimates = estimate_many(scenario, h, &boresights, n_drops)?;
    let mut best = 0;
    for (k, e) in estimates.iter().enumerate() {
        if e.noma_rate.mean > estimates[best].noma_rate.mean {
            best = k;
        }
    }
    Ok(BoresightScan {
        altitude: h,
        points: grid.into_iter().zip(estimates).collect(),
        best,
    })
}

/// Aggregated metrics at one altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub altitude: f64,
    pub scanning: bool,
    pub required_angle: f64,
    pub coverage: f64,
    /// Optimal boresight distance, or the covering boresight when the beam
    /// covers the whole region.
    pub d_star: f64,
    pub estimate: Estimate,
}

pub fn sweep_point(scenario: &Scenario, h: f64) -> Result<SweepRow> {
    let required_angle = scenario.required_angle(h)?;
    if required_angle > scenario.beamwidth {
        let scan = optimize_boresight(scenario, h, scenario.grid_points, scenario.drops)?;
        let d_star = scan.d_star();
        let beam = BeamGeometry::new(h, d_star, scenario.beamwidth)?;
        Ok(SweepRow {
            altitude: h,
            scanning: true,
            required_angle,
            coverage: interval_coverage(&radiated_interval(&beam), &scenario.region),
            d_star,
            estimate: *scan.best_estimate(),
        })
    } else {
        let estimate = estimate(scenario, h, Boresight::FullCoverage, scenario.drops)?;
        Ok(SweepRow {
            altitude: h,
            scanning: false,
            required_angle,
            coverage: 1.0,
            d_star: h * covering_boresight_angle(h, &scenario.region)?.tan(),
            estimate,
        })
    }
}

pub fn altitude_sweep(scenario: &Scenario) -> Result<Vec<SweepRow>> {
    scenario.validate()?;
    scenario
        .altitudes
        .par_iter()
        .map(|&h| sweep_point(scenario, h))
        .collect()
}

/// Runs `f` on a dedicated pool with `threads` workers, or on the global
/// pool when `threads` is `None`.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
