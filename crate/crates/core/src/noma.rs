//! Two-user power-domain NOMA with SIC, and its OMA baseline.
//!
//! The weak user `i` (smallest effective gain) and the strong user `j`
//! (largest effective gain) are picked among all users in the region. The
//! strong user must first decode the weak user's message before decoding
//! its own. OMA serves each user on an orthogonal slot with a
//! degrees-of-freedom penalty.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geometry::RadiatedInterval;
use crate::population::DropPopulation;

/// Share of the resource each OMA user gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmaDof {
    /// Two served users, half the resource each.
    #[default]
    Half,
    /// One slot per user present in the region.
    OneOverK,
}

/// Power split, target rates and link budget of the NOMA pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaConfig {
    weak_power: f64,
    strong_power: f64,
    weak_target: f64,
    strong_target: f64,
    tx_power_mw: f64,
    noise_mw: f64,
    oma_dof: OmaDof,
}

impl NomaConfig {
    /// `weak_power` is the weak user's power fraction `beta_i^2`; the strong
    /// user gets the remainder. Powers are linear milliwatts, targets are
    /// bits per channel use.
    pub fn new(
        weak_power: f64,
        weak_target: f64,
        strong_target: f64,
        tx_power_mw: f64,
        noise_mw: f64,
        oma_dof: OmaDof,
    ) -> Result<Self> {
        ensure(
            (0.5..1.0).contains(&weak_power),
            "weak user power fraction",
            weak_power,
            "must lie in [0.5, 1)",
        )?;
        ensure(weak_target.is_finite() && weak_target > 0.0, "weak target rate", weak_target, "must be > 0")?;
        ensure(
            strong_target.is_finite() && strong_target > 0.0,
            "strong target rate",
            strong_target,
            "must be > 0",
        )?;
        ensure(tx_power_mw.is_finite() && tx_power_mw > 0.0, "transmit power", tx_power_mw, "must be > 0")?;
        ensure(noise_mw.is_finite() && noise_mw > 0.0, "noise power", noise_mw, "must be > 0")?;
        Ok(Self {
            weak_power,
            strong_power: 1.0 - weak_power,
            weak_target,
            strong_target,
            tx_power_mw,
            noise_mw,
            oma_dof,
        })
    }

    pub fn weak_power(&self) -> f64 {
        self.weak_power
    }
    pub fn strong_power(&self) -> f64 {
        self.strong_power
    }
    pub fn weak_target(&self) -> f64 {
        self.weak_target
    }
    pub fn strong_target(&self) -> f64 {
        self.strong_target
    }
    pub fn tx_power_mw(&self) -> f64 {
        self.tx_power_mw
    }
    pub fn noise_mw(&self) -> f64 {
        self.noise_mw
    }
    pub fn oma_dof(&self) -> OmaDof {
        self.oma_dof
    }

    pub fn with_tx_power_mw(mut self, tx_power_mw: f64) -> Result<Self> {
        ensure(tx_power_mw.is_finite() && tx_power_mw > 0.0, "transmit power", tx_power_mw, "must be > 0")?;
        self.tx_power_mw = tx_power_mw;
        Ok(self)
    }

    pub fn sum_target(&self) -> f64 {
        self.weak_target + self.strong_target
    }

    fn snr(&self, gain: f64) -> f64 {
        self.tx_power_mw * gain / self.noise_mw
    }
}

/// Indices of the weakest and strongest gains. Ties go to the lowest index
/// for the minimum and the highest index for the maximum.
pub fn order_and_select(gains: &[f64]) -> Result<(usize, usize)> {
    if gains.is_empty() {
        return Err(Error::EmptyGains);
    }
    let mut weak = 0;
    let mut strong = 0;
    for (k, &g) in gains.iter().enumerate().skip(1) {
        if g < gains[weak] {
            weak = k;
        }
        if g >= gains[strong] {
            strong = k;
        }
    }
    Ok((weak, strong))
}

/// SINR threshold `2^R - 1` for target rate `R`.
pub fn epsilon(target: f64) -> f64 {
    target.exp2() - 1.0
}

/// NOMA outage flags `(weak, strong)` for gains given positionally.
pub fn noma_pair_outcome(g_weak: f64, g_strong: f64, cfg: &NomaConfig) -> (bool, bool) {
    let eps_i = epsilon(cfg.weak_target);
    let eps_j = epsilon(cfg.strong_target);
    let (bi, bj) = (cfg.weak_power, cfg.strong_power);
    let p = cfg.tx_power_mw;
    let n0 = cfg.noise_mw;

    let sinr_i = p * g_weak * bi / (p * g_weak * bj + n0);
    let weak_out = !(sinr_i >= eps_i);

    let sinr_i_at_j = p * g_strong * bi / (p * g_strong * bj + n0);
    let sinr_j = p * g_strong * bj / n0;
    let strong_out = !(sinr_i_at_j >= eps_i && sinr_j >= eps_j);
    (weak_out, strong_out)
}

/// Resource share of each OMA user on a drop with `k` users in the region.
pub fn oma_share(dof: OmaDof, k: usize) -> f64 {
    match dof {
        OmaDof::Half => 0.5,
        OmaDof::OneOverK => 1.0 / k.max(1) as f64,
    }
}

/// OMA outage flags `(weak, strong)` on a drop with `k` users.
pub fn oma_pair_outcome(g_weak: f64, g_strong: f64, k: usize, cfg: &NomaConfig) -> (bool, bool) {
    let share = oma_share(cfg.oma_dof, k);
    let out = |g: f64, target: f64| !(share * cfg.snr(g).ln_1p() / std::f64::consts::LN_2 >= target);
    (out(g_weak, cfg.weak_target), out(g_strong, cfg.strong_target))
}

/// Outage of a user served alone with full power and the full resource.
pub fn single_user_outcome(gain: f64, target: f64, cfg: &NomaConfig) -> bool {
    !(cfg.snr(gain).ln_1p() / std::f64::consts::LN_2 >= target)
}

/// `P(log2(1 + P c X / N0) < R)` for `X ~ Exp(1)`, i.e.
/// `1 - exp(-eps N0 / (P c))`.
pub fn analytic_single_user_outage(gain_factor: f64, eps: f64, tx_power_mw: f64, noise_mw: f64) -> Result<f64> {
    ensure(gain_factor > 0.0, "gain factor", gain_factor, "must be > 0")?;
    ensure(eps >= 0.0, "SINR threshold", eps, "must be >= 0")?;
    Ok(-(-eps * noise_mw / (tx_power_mw * gain_factor)).exp_m1())
}

/// Which part of the user region the beam serves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coverage {
    /// The beam covers the whole user region.
    Full,
    /// Only users with radius inside the interval are served.
    Radiated(RadiatedInterval),
}

impl Coverage {
    fn serves(&self, radius: f64) -> bool {
        match self {
            Coverage::Full => true,
            Coverage::Radiated(interval) => interval.contains(radius),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    NoUsers,
    /// One user in the region, served alone.
    Single,
    /// Both selected users inside the radiated region.
    BothIn,
    /// Exactly one selected user inside the radiated region.
    OneIn,
    /// Neither selected user inside the radiated region.
    NoneIn,
}

/// Outcome of one drop for both access schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropResult {
    pub users: usize,
    pub case: CaseId,
    pub noma_outage_i: bool,
    pub noma_outage_j: bool,
    pub oma_outage_i: bool,
    pub oma_outage_j: bool,
    pub noma_rate: f64,
    pub oma_rate: f64,
}

impl DropResult {
    fn all_out(users: usize, case: CaseId) -> Self {
        Self {
            users,
            case,
            noma_outage_i: true,
            noma_outage_j: true,
            oma_outage_i: true,
            oma_outage_j: true,
            noma_rate: 0.0,
            oma_rate: 0.0,
        }
    }
}

fn served(out: bool, target: f64) -> f64 {
    if out {
        0.0
    } else {
        target
    }
}

/// Applies user selection, beam membership and the NOMA/OMA decoding rules
/// to one drop. `gains[k]` belongs to `population.users[k]`.
pub fn drop_outcome(
    population: &DropPopulation,
    gains: &[f64],
    coverage: Coverage,
    cfg: &NomaConfig,
) -> Result<DropResult> {
    let k = population.count();
    if gains.len() != k {
        return Err(Error::GainCountMismatch { users: k, gains: gains.len() });
    }
    match k {
        0 => return Ok(DropResult::all_out(0, CaseId::NoUsers)),
        1 => {
            if !coverage.serves(population.users[0].radius) {
                return Ok(DropResult::all_out(1, CaseId::NoneIn));
            }
            // the lone user is both the weakest and the strongest
            let out = single_user_outcome(gains[0], cfg.weak_target, cfg);
            let rate = served(out, cfg.weak_target);
            return Ok(DropResult {
                users: 1,
                case: CaseId::Single,
                noma_outage_i: out,
                noma_outage_j: out,
                oma_outage_i: out,
                oma_outage_j: out,
                noma_rate: rate,
                oma_rate: rate,
            });
        }
        _ => {}
    }

    let (i, j) = order_and_select(gains)?;
    let (gi, gj) = (gains[i], gains[j]);
    let i_in = coverage.serves(population.users[i].radius);
    let j_in = coverage.serves(population.users[j].radius);

    let result = match (i_in, j_in) {
        (true, true) => {
            let (ni, nj) = noma_pair_outcome(gi, gj, cfg);
            let (oi, oj) = oma_pair_outcome(gi, gj, k, cfg);
            DropResult {
                users: k,
                case: CaseId::BothIn,
                noma_outage_i: ni,
                noma_outage_j: nj,
                oma_outage_i: oi,
                oma_outage_j: oj,
                noma_rate: served(ni, cfg.weak_target) + served(nj, cfg.strong_target),
                oma_rate: served(oi, cfg.weak_target) + served(oj, cfg.strong_target),
            }
        }
        (true, false) => {
            let out = single_user_outcome(gi, cfg.weak_target, cfg);
            let rate = served(out, cfg.weak_target);
            DropResult {
                users: k,
                case: CaseId::OneIn,
                noma_outage_i: out,
                noma_outage_j: true,
                oma_outage_i: out,
                oma_outage_j: true,
                noma_rate: rate,
                oma_rate: rate,
            }
        }
        (false, true) => {
            let out = single_user_outcome(gj, cfg.strong_target, cfg);
            let rate = served(out, cfg.strong_target);
            DropResult {
                users: k,
                case: CaseId::OneIn,
                noma_outage_i: true,
                noma_outage_j: out,
                oma_outage_i: true,
                oma_outage_j: out,
                noma_rate: rate,
                oma_rate: rate,
            }
        }
        (false, false) => DropResult::all_out(k, CaseId::NoneIn),
    };
    Ok(result)
}
