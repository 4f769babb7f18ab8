//! Distributed target-SINR power control.
//!
//! Each user measures its interference-plus-noise normalized by its own
//! desired gain, `I = ρ(i−1) / ς(i−1)`, and picks its next power from it.
//! Two update rules are available:
//!
//! * target tracking: `min(target·I, ρ̄)`;
//! * gradual removal: `target·I` while that is affordable, otherwise
//!   `ρ̄² / (target·I)`, so users that cannot reach their target back off
//!   instead of saturating.
//!
//! All users of all cells update simultaneously from the previous
//! iteration's powers.

use crate::assignment::PilotAssignment;
use crate::error::{Error, Result};
use crate::geometry::LargeScaleCoeffs;
use crate::link::{db_to_linear, LinkModel, PowerAllocation, ScenarioConfig};

/// Default iteration count of the power-control loop.
pub const DEFAULT_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcMode {
    GradualRemoval,
    TargetTracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcLink {
    Dl,
    Ul,
    Both,
}

impl PcLink {
    fn dl(self) -> bool {
        matches!(self, PcLink::Dl | PcLink::Both)
    }

    fn ul(self) -> bool {
        matches!(self, PcLink::Ul | PcLink::Both)
    }
}

/// Per-link targets, either as SINRs or as per-user rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Targets {
    /// Linear SINR targets.
    Sinr { dl: f64, ul: f64 },
    /// Rate targets in bits/s.
    Rate { dl: f64, ul: f64 },
}

impl Targets {
    pub fn sinr_db(dl_db: f64, ul_db: f64) -> Self {
        Targets::Sinr {
            dl: db_to_linear(dl_db),
            ul: db_to_linear(ul_db),
        }
    }

    /// Linear `(dl, ul)` SINR targets.
    pub fn resolve(&self, config: &ScenarioConfig) -> Result<(f64, f64)> {
        let (dl, ul) = match *self {
            Targets::Sinr { dl, ul } => (dl, ul),
            Targets::Rate { dl, ul } => (
                target_sinr_from_rate(dl, config.xi_dl, config),
                target_sinr_from_rate(ul, config.xi_ul, config),
            ),
        };
        for (key, v) in [("target_dl", dl), ("target_ul", ul)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("target must be positive, got {v}")));
            }
        }
        Ok((dl, ul))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcConfig {
    pub targets: Targets,
    pub max_iterations: usize,
    pub mode: PcMode,
}

impl PcConfig {
    pub fn new(targets: Targets) -> Self {
        Self {
            targets,
            max_iterations: DEFAULT_ITERATIONS,
            mode: PcMode::GradualRemoval,
        }
    }
}

/// Per-link SINR needed to carry `rate` on a link that gets fraction `xi`
/// of the data symbols.
pub fn target_sinr_from_rate(rate: f64, xi: f64, config: &ScenarioConfig) -> f64 {
    let per_bit = config.bandwidth_hz * config.data_fraction() * xi;
    (rate / per_bit).exp2() - 1.0
}

/// Gradual-removal update for the DL.
pub fn pc_update_dl(target: f64, interference: f64, p_max: f64) -> f64 {
    let required = target * interference;
    if interference <= p_max / target {
        required
    } else {
        p_max * p_max / required
    }
}

/// Gradual-removal update for the UL; the scalar rule is link-agnostic.
pub fn pc_update_ul(target: f64, interference: f64, p_max: f64) -> f64 {
    pc_update_dl(target, interference, p_max)
}

pub fn target_tracking_update(target: f64, interference: f64, p_max: f64) -> f64 {
    (target * interference).min(p_max)
}

fn update(mode: PcMode, target: f64, interference: f64, p_max: f64) -> f64 {
    match mode {
        PcMode::GradualRemoval => pc_update_dl(target, interference, p_max),
        PcMode::TargetTracking => target_tracking_update(target, interference, p_max),
    }
}

/// DL interference measure of `user` in `cell` from the given powers.
pub fn dl_interference_measure(
    beta: &LargeScaleCoeffs,
    powers: &PowerAllocation,
    assignment: &PilotAssignment,
    config: &ScenarioConfig,
    cell: usize,
    user: usize,
) -> Result<f64> {
    LinkModel::new(beta, powers, assignment, config).dl_interference(cell, user)
}

/// UL interference measure: the UL SINR denominator over the user's own `β²`.
pub fn ul_interference_measure(
    beta: &LargeScaleCoeffs,
    powers: &PowerAllocation,
    assignment: &PilotAssignment,
    config: &ScenarioConfig,
    cell: usize,
    user: usize,
) -> f64 {
    LinkModel::new(beta, powers, assignment, config).ul_interference(cell, user)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcOutcome {
    pub powers: PowerAllocation,
    /// Largest relative power change in the last iteration, over the
    /// controlled links.
    pub residual: f64,
    /// Residual after each iteration.
    pub residuals: Vec<f64>,
}

/// Runs the power-control loop. Ceilings come from `ceilings` (its current
/// powers are ignored); controlled links start at half their ceiling, the
/// others stay at the ceiling.
pub fn run_power_control(
    beta: &LargeScaleCoeffs,
    assignment: &PilotAssignment,
    config: &ScenarioConfig,
    ceilings: &PowerAllocation,
    pc: &PcConfig,
    link: PcLink,
) -> Result<PcOutcome> {
    let (target_dl, target_ul) = pc.targets.resolve(config)?;
    let mut powers = ceilings.clone();
    powers.ul.clone_from(&ceilings.ul_max);
    powers.dl.clone_from(&ceilings.dl_max);
    if link.dl() {
        powers.dl.iter_mut().for_each(|p| *p *= 0.5);
    }
    if link.ul() {
        powers.ul.iter_mut().for_each(|p| *p *= 0.5);
    }
    let num_cells = beta.num_cells();
    let users = beta.users();
    let mut residuals = Vec::with_capacity(pc.max_iterations);
    for _ in 0..pc.max_iterations {
        let model = LinkModel::new(beta, &powers, assignment, config);
        let mut next = powers.clone();
        for cell in 0..num_cells {
            for user in 0..users {
                if link.dl() {
                    let i = model.dl_interference(cell, user)?;
                    next.set_dl(cell, user, update(pc.mode, target_dl, i, powers.dl_max(cell, user)));
                }
                if link.ul() {
                    let i = model.ul_interference(cell, user);
                    next.set_ul(cell, user, update(pc.mode, target_ul, i, powers.ul_max(cell, user)));
                }
            }
        }
        let change = |old: &[f64], new: &[f64]| {
            old.iter()
                .zip(new)
                .map(|(o, n)| ((n - o) / o).abs())
                .fold(0.0, f64::max)
        };
        let mut residual: f64 = 0.0;
        if link.dl() {
            residual = residual.max(change(&powers.dl, &next.dl));
        }
        if link.ul() {
            residual = residual.max(change(&powers.ul, &next.ul));
        }
        residuals.push(residual);
        powers = next;
    }
    log::trace!("power control residuals: {residuals:?}");
    Ok(PcOutcome {
        powers,
        residual: residuals.last().copied().unwrap_or(0.0),
        residuals,
    })
}
