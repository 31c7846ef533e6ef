//! Built-in oracle suite behind `uavnoma validate`.
//!
//! Each check compares a quantity measured through the simulator against an
//! independently computed expectation: closed-form outage of a single user
//! under Rayleigh fading, the mean of the array factor, Poisson moments,
//! decoding thresholds found by bisection, and the scanning altitude band.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{fejer_kernel, gain_factor, path_loss_linear, ArrayConfig, PathLossModel};
use crate::error::Result;
use crate::geometry::{required_vertical_angle, UserRegion};
use crate::montecarlo::{estimate, Boresight, Scenario, DEFAULT_GRID_POINTS};
use crate::noma::{
    analytic_single_user_outage, epsilon, noma_pair_outcome, oma_pair_outcome, NomaConfig, OmaDof,
};
use crate::population::{drop_rng, mean_user_count, sample_poisson, Placement, UserCount};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            passed: (measured - expected).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<44} measured {:<14.8e} expected {:<14.8e} tol {:.3e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.expected,
                c.tolerance
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Decoding thresholds on the effective gain, in units of `N0 / P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdTable {
    pub noma_weak: f64,
    pub noma_strong: f64,
    pub oma_weak: f64,
    pub oma_strong: f64,
}

impl ThresholdTable {
    /// Closed-form thresholds for a two-user pair with half-resource OMA.
    pub fn closed_form(cfg: &NomaConfig) -> Self {
        let eps_i = epsilon(cfg.weak_target());
        let eps_j = epsilon(cfg.strong_target());
        let sic = eps_i / (cfg.weak_power() - eps_i * cfg.strong_power());
        Self {
            noma_weak: sic,
            noma_strong: sic.max(eps_j / cfg.strong_power()),
            oma_weak: epsilon(2.0 * cfg.weak_target()),
            oma_strong: epsilon(2.0 * cfg.strong_target()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub drops: u64,
    pub seed: u64,
    /// Expected thresholds; the closed form of the reference pair when `None`.
    pub thresholds: Option<ThresholdTable>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            drops: 100_000,
            seed: 20_171_016,
            thresholds: None,
        }
    }
}

fn reference_pair() -> NomaConfig {
    NomaConfig::new(0.75, 0.5, 6.0, 100.0, 10f64.powf(-3.5), OmaDof::Half).expect("valid reference pair")
}

/// Smallest gain (in `N0/P` units) at which `served` turns true.
fn bisect_threshold(served: impl Fn(f64) -> bool, unit: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1e9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if served(mid * unit) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn threshold_checks(expected: &ThresholdTable, out: &mut Vec<Check>) {
    let cfg = reference_pair();
    let unit = cfg.noise_mw() / cfg.tx_power_mw();
    let big = 1e30;
    let measured = [
        ("NOMA weak-user threshold [N0/P]", bisect_threshold(|g| !noma_pair_outcome(g, big, &cfg).0, unit), expected.noma_weak),
        ("NOMA strong-user threshold [N0/P]", bisect_threshold(|g| !noma_pair_outcome(big, g, &cfg).1, unit), expected.noma_strong),
        ("OMA weak-user threshold [N0/P]", bisect_threshold(|g| !oma_pair_outcome(g, big, 2, &cfg).0, unit), expected.oma_weak),
        ("OMA strong-user threshold [N0/P]", bisect_threshold(|g| !oma_pair_outcome(big, g, 2, &cfg).1, unit), expected.oma_strong),
    ];
    for (name, m, e) in measured {
        out.push(Check::new(name, m, e, 1e-9 * e.abs().max(1.0)));
    }
}

fn single_user_checks(opts: &SuiteOptions, out: &mut Vec<Check>) -> Result<()> {
    // (altitude, user radius, boresight offset, transmit dBm)
    let settings = [(100.0, 70.0, 4.0, 20.0), (140.0, 40.0, -3.0, 10.0), (50.0, 60.0, 2.0, 15.0)];
    let region = UserRegion::new(25.0, 100.0, 0.2f64.to_radians())?;
    let model = PathLossModel::DistancePower { exponent: 2.0 };
    for (h, r, offset, dbm) in settings {
        let noma = reference_pair().with_tx_power_mw(10f64.powf(dbm / 10.0))?;
        let scenario = Scenario {
            region,
            users: UserCount::Fixed(1),
            placement: Placement::FixedRadius(r),
            elements: 10,
            beamwidth: 28f64.to_radians(),
            path_loss: model,
            noma,
            altitudes: vec![h],
            grid_points: DEFAULT_GRID_POINTS,
            drops: opts.drops,
            seed: opts.seed,
        };
        let d = r + offset;
        let e = estimate(&scenario, h, Boresight::Distance(d), opts.drops)?;
        let array = ArrayConfig::new(10, (d / h).atan())?;
        let c = gain_factor((r / h).atan(), path_loss_linear(&model, h.hypot(r))?, &array);
        let p = analytic_single_user_outage(c, epsilon(0.5), noma.tx_power_mw(), noma.noise_mw())?;
        out.push(Check::new(
            format!("single-user outage h={h} r={r} P={dbm}dBm"),
            e.noma_outage_i.mean,
            p,
            4.0 * e.noma_outage_i.se,
        ));
    }
    Ok(())
}

fn array_factor_checks(opts: &SuiteOptions, out: &mut Vec<Check>) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.drops.max(2);
    for m in [4u32, 10, 64] {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let f = fejer_kernel(2.0 * rng.random::<f64>() - 1.0, m);
            s += f;
            s2 += f * f;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        out.push(Check::new(format!("array factor mean, M={m}"), mean, 1.0 / f64::from(m), 4.0 * se));
    }
    out.push(Check::new("array factor at boresight", fejer_kernel(0.0, 10), 1.0, 0.0));
    out.push(Check::new("array factor first null, M=10", fejer_kernel(0.2, 10), 0.0, 1e-12));
}

fn poisson_checks(opts: &SuiteOptions, out: &mut Vec<Check>) {
    let n = opts.drops.max(2);
    for (k, mean) in [5.0, 32.724_923_474_893_68].into_iter().enumerate() {
        let mut rng = drop_rng(opts.seed, k as u64);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_poisson(mean, &mut rng) as f64;
            s += x;
            s2 += x * x;
        }
        let m = s / n as f64;
        let se = ((s2 / n as f64 - m * m) / n as f64).sqrt();
        out.push(Check::new(format!("Poisson sample mean, mu={mean:.4}"), m, mean, 4.0 * se));
    }
}

fn geometry_checks(out: &mut Vec<Check>) -> Result<()> {
    let region = UserRegion::new(25.0, 100.0, 0.2f64.to_radians())?;
    let phi_e = 28f64.to_radians();
    let mut band = Vec::new();
    for h in 1..=300u32 {
        if required_vertical_angle(f64::from(h), &region)? > phi_e {
            band.push(h);
        }
    }
    let first = band.first().copied().unwrap_or(0);
    let last = band.last().copied().unwrap_or(0);
    out.push(Check::new("scanning band lower altitude [m]", f64::from(first), 21.0, 0.0));
    out.push(Check::new("scanning band upper altitude [m]", f64::from(last), 120.0, 0.0));
    out.push(Check::new("mean user count", mean_user_count(&region, 1.0)?, 32.72, 0.01));
    Ok(())
}

pub fn run_suite(opts: &SuiteOptions) -> Result<Report> {
    let mut checks = Vec::new();
    let thresholds = opts
        .thresholds
        .unwrap_or_else(|| ThresholdTable::closed_form(&reference_pair()));
    threshold_checks(&thresholds, &mut checks);
    single_user_checks(opts, &mut checks)?;
    array_factor_checks(opts, &mut checks);
    poisson_checks(opts, &mut checks);
    geometry_checks(&mut checks)?;
    Ok(Report { checks })
}
