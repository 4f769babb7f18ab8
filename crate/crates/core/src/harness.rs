//! Monte-Carlo campaign driver.
//!
//! One drop runs geometry → long-term fading → pilot-assignment rounds →
//! optional power control → finite-N SINRs → rates, and records the central
//! cell's users. Every drop derives its own seed from the master seed and
//! the drop index; the channel and the random initial assignment use
//! separate streams of that seed, so all methods and antenna counts of a
//! drop see the same channel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assignment::{multicell_rounds, Metric, PaMethod};
use crate::error::{Error, Result};
use crate::geometry::{
    build_hex_layout, compute_large_scale, drop_users, LargeScaleCoeffs, NetworkLayout, UserDrop,
};
use crate::link::{LinkModel, PowerAllocation, ScenarioConfig};
use crate::power::{run_power_control, PcConfig, PcLink, PcMode, Targets, DEFAULT_ITERATIONS};
use crate::stats::{empirical_cdf, likely_rate, mean};

/// Index of the measured cell.
pub const CENTRAL_CELL: usize = 0;

/// Default number of best-response rounds.
pub const DEFAULT_ROUNDS: usize = 3;

const CHANNEL_STREAM: u64 = 0;
const ASSIGNMENT_STREAM: u64 = 1;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of drop `drop_id` in a campaign seeded with `master_seed`.
pub fn drop_seed(master_seed: u64, drop_id: usize) -> u64 {
    mix64(master_seed ^ mix64((drop_id as u64).wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub layout: NetworkLayout,
    pub users: UserDrop,
    pub beta: LargeScaleCoeffs,
}

/// Geometry and long-term fading of one drop. Independent of the method and
/// of the antenna count.
pub fn drop_channel(scenario: &ScenarioConfig, seed: u64) -> Result<Channel> {
    let mut rng = stream_rng(seed, CHANNEL_STREAM);
    let layout = build_hex_layout(scenario.num_cells, scenario.cell_radius_m)?;
    let users = drop_users(&layout, scenario.users, scenario.exclusion_radius_m, &mut rng)?;
    let beta = compute_large_scale(
        &layout,
        &users,
        scenario.pathloss_exponent,
        scenario.shadow_sigma_db,
        scenario.reference_distance_m,
        &mut rng,
    )?;
    Ok(Channel {
        layout,
        users,
        beta,
    })
}

/// Power-control targets per pilot-assignment method, for the user counts
/// where tuned values are known (10 and 32 users).
pub fn preset_targets(users: usize, method: PaMethod) -> Option<Targets> {
    let (dl, ul) = match (users, method) {
        (10, PaMethod::Random) => (-9.0, -10.0),
        (10, PaMethod::HeuristicMaxMin(Metric::Dl)) => (-2.0, -9.0),
        (10, PaMethod::GreedyUl) => (-6.0, -4.0),
        (10, PaMethod::HeuristicMaxMin(Metric::Tc)) => (-3.0, -5.0),
        (32, PaMethod::Random) => (-11.0, -14.0),
        (32, PaMethod::HeuristicMaxMin(Metric::Dl)) => (-7.0, -11.0),
        (32, PaMethod::GreedyUl) => (-9.0, -7.0),
        (32, PaMethod::HeuristicMaxMin(Metric::Tc)) => (-7.0, -8.0),
        _ => return None,
    };
    Some(Targets::sinr_db(dl, ul))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetPolicy {
    /// The same targets for every method.
    Fixed(Targets),
    /// Tuned per-method targets from [`preset_targets`].
    Preset,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerControlPlan {
    pub mode: PcMode,
    pub iterations: usize,
    pub targets: TargetPolicy,
}

impl PowerControlPlan {
    pub fn new(mode: PcMode, targets: TargetPolicy) -> Self {
        Self {
            mode,
            iterations: DEFAULT_ITERATIONS,
            targets,
        }
    }

    pub fn config_for(&self, users: usize, method: PaMethod) -> Result<PcConfig> {
        let targets = match self.targets {
            TargetPolicy::Fixed(t) => t,
            TargetPolicy::Preset => preset_targets(users, method).ok_or_else(|| {
                Error::config(
                    "target_sinr_dl_db",
                    format!("no preset targets for {method} with {users} users; give explicit targets"),
                )
            })?,
        };
        Ok(PcConfig {
            targets,
            max_iterations: self.iterations,
            mode: self.mode,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    /// Scenario; its `antennas` field is replaced by each sweep value.
    pub scenario: ScenarioConfig,
    pub antennas: Vec<usize>,
    pub methods: Vec<PaMethod>,
    pub power_control: Option<PowerControlPlan>,
    pub drops: usize,
    pub master_seed: u64,
    pub rounds: usize,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub ccdf_grid: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            antennas: vec![16, 32, 64, 128, 256],
            methods: vec![PaMethod::Random, PaMethod::HeuristicMaxMin(Metric::Tc)],
            power_control: None,
            drops: 500,
            master_seed: 1,
            rounds: DEFAULT_ROUNDS,
            workers: 0,
            ccdf_grid: 200,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.drops == 0 {
            return Err(Error::config("drops", "must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        if self.antennas.is_empty() || self.antennas.contains(&0) {
            return Err(Error::config("antennas", "need at least one positive antenna count"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("pa", "need at least one method"));
        }
        for m in &self.methods {
            if m.is_exhaustive() && self.scenario.users > crate::assignment::MAX_EXHAUSTIVE_PILOTS {
                return Err(Error::config(
                    "pa",
                    format!(
                        "{m} is exhaustive and limited to {} users, got {}",
                        crate::assignment::MAX_EXHAUSTIVE_PILOTS,
                        self.scenario.users
                    ),
                ));
            }
            if let Some(plan) = &self.power_control {
                plan.config_for(self.scenario.users, *m)?
                    .targets
                    .resolve(&self.scenario)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRecord {
    pub user: usize,
    pub pilot: usize,
    pub ul_sinr: f64,
    pub dl_sinr: f64,
    pub ul_rate: f64,
    pub dl_rate: f64,
    pub total_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub drop_id: usize,
    pub seed: u64,
    pub method: PaMethod,
    pub antennas: usize,
    /// Central-cell users in user order.
    pub records: Vec<UserRecord>,
    pub pa_rounds: usize,
    /// Last-iteration relative power change, when power control ran.
    pub pc_residual: Option<f64>,
    /// Whether every power of every cell lies in `(0, ρ̄]`.
    pub powers_in_bounds: bool,
}

/// Runs one drop. `scenario.antennas` is the evaluated antenna count.
pub fn run_drop(
    scenario: &ScenarioConfig,
    method: PaMethod,
    pc: Option<&PcConfig>,
    rounds: usize,
    drop_id: usize,
    seed: u64,
) -> Result<DropResult> {
    let wrap = |source: Error| Error::Drop {
        drop_id,
        seed,
        source: Box::new(source),
    };
    let channel = drop_channel(scenario, seed).map_err(wrap)?;
    let uniform = PowerAllocation::from_config(scenario);
    let mut pa_rng = stream_rng(seed, ASSIGNMENT_STREAM);
    let outcome = multicell_rounds(&channel.beta, &uniform, scenario, method, rounds, &mut pa_rng)
        .map_err(wrap)?;
    let assignment = outcome.assignment;

    let (powers, pc_residual) = match pc {
        Some(pc) => {
            let out = run_power_control(
                &channel.beta,
                &assignment,
                scenario,
                &uniform,
                pc,
                PcLink::Both,
            )
            .map_err(wrap)?;
            (out.powers, Some(out.residual))
        }
        None => (uniform, None),
    };

    let link = LinkModel::new(&channel.beta, &powers, &assignment, scenario);
    let records = (0..scenario.users)
        .map(|user| {
            let pilot = assignment.pilot_of(CENTRAL_CELL, user);
            let ul_sinr = link.ul_sinr_finite(CENTRAL_CELL, pilot);
            let dl_sinr = link.dl_sinr_finite(CENTRAL_CELL, pilot);
            let ul_rate = scenario.ul_rate(ul_sinr);
            let dl_rate = scenario.dl_rate(dl_sinr);
            UserRecord {
                user,
                pilot,
                ul_sinr,
                dl_sinr,
                ul_rate,
                dl_rate,
                total_rate: ul_rate + dl_rate,
            }
        })
        .collect();
    Ok(DropResult {
        drop_id,
        seed,
        method,
        antennas: scenario.antennas,
        records,
        pa_rounds: outcome.rounds_run,
        pc_residual,
        powers_in_bounds: powers.within_bounds(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateKind {
    Dl,
    Ul,
    Total,
}

impl RateKind {
    pub const ALL: [RateKind; 3] = [RateKind::Dl, RateKind::Ul, RateKind::Total];

    pub fn name(&self) -> &'static str {
        match self {
            RateKind::Dl => "dl",
            RateKind::Ul => "ul",
            RateKind::Total => "total",
        }
    }

    pub fn of(&self, record: &UserRecord) -> f64 {
        match self {
            RateKind::Dl => record.dl_rate,
            RateKind::Ul => record.ul_rate,
            RateKind::Total => record.total_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStatistics {
    pub method: PaMethod,
    pub antennas: usize,
    pub kind: RateKind,
    pub samples: usize,
    pub mean: f64,
    /// `None` when there are too few samples for the 5 % tail.
    pub likely_95: Option<f64>,
    pub ccdf: Vec<(f64, f64)>,
}

/// Pools every user sample of `results` matching `method` and `antennas`.
pub fn pooled_rates(
    results: &[DropResult],
    method: PaMethod,
    antennas: usize,
    kind: RateKind,
) -> Vec<f64> {
    results
        .iter()
        .filter(|r| r.method == method && r.antennas == antennas)
        .flat_map(|r| r.records.iter().map(move |u| kind.of(u)))
        .collect()
}

pub fn rate_statistics(
    results: &[DropResult],
    method: PaMethod,
    antennas: usize,
    kind: RateKind,
    ccdf_grid: usize,
) -> RateStatistics {
    let samples = pooled_rates(results, method, antennas, kind);
    RateStatistics {
        method,
        antennas,
        kind,
        samples: samples.len(),
        mean: mean(&samples),
        likely_95: likely_rate(&samples, 0.95).ok(),
        ccdf: empirical_cdf(&samples, ccdf_grid),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutput {
    /// Ordered by drop, then method, then antenna count.
    pub results: Vec<DropResult>,
    /// Ordered by method, then antenna count, then rate kind.
    pub statistics: Vec<RateStatistics>,
}

fn run_drop_set(campaign: &CampaignConfig, drop_id: usize) -> Result<Vec<DropResult>> {
    let seed = drop_seed(campaign.master_seed, drop_id);
    let mut out = Vec::with_capacity(campaign.methods.len() * campaign.antennas.len());
    for &method in &campaign.methods {
        let pc = campaign
            .power_control
            .as_ref()
            .map(|plan| plan.config_for(campaign.scenario.users, method))
            .transpose()?;
        for &antennas in &campaign.antennas {
            let scenario = ScenarioConfig {
                antennas,
                ..campaign.scenario.clone()
            };
            out.push(run_drop(&scenario, method, pc.as_ref(), campaign.rounds, drop_id, seed)?);
        }
    }
    Ok(out)
}

pub fn run_campaign(campaign: &CampaignConfig) -> Result<CampaignOutput> {
    campaign.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(campaign.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let per_drop: Vec<Result<Vec<DropResult>>> = pool.install(|| {
        (0..campaign.drops)
            .into_par_iter()
            .map(|d| run_drop_set(campaign, d))
            .collect()
    });
    let mut results = Vec::with_capacity(per_drop.len());
    for drop in per_drop {
        results.extend(drop?);
    }
    let mut statistics = Vec::new();
    for &method in &campaign.methods {
        for &antennas in &campaign.antennas {
            for kind in RateKind::ALL {
                statistics.push(rate_statistics(&results, method, antennas, kind, campaign.ccdf_grid));
            }
        }
    }
    Ok(CampaignOutput {
        results,
        statistics,
    })
}
