//! Closed-form SINR and capacity evaluation for MRC uplink / MRT downlink.
//!
//! Users are addressed through their pilot: "the user on pilot `p` in cell
//! `j`" is resolved through that cell's [`PilotAssignment`]. Every SINR also
//! has a `*_for` form that evaluates a hypothesis "user `u` of cell `j` takes
//! pilot `p`", with every other cell's assignment held as-is. That form is
//! what cost-matrix construction needs, and the plain forms delegate to it.
//!
//! All quantities are linear.

use crate::assignment::PilotAssignment;
use crate::error::{Error, Result};
use crate::geometry::LargeScaleCoeffs;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_cells: usize,
    /// Users per cell; also the number of pilots and the pilot length.
    pub users: usize,
    /// BS antennas.
    pub antennas: usize,
    /// Symbols per coherence block.
    pub coherence_symbols: usize,
    pub xi_ul: f64,
    pub xi_dl: f64,
    pub bandwidth_hz: f64,
    pub noise_power: f64,
    pub pilot_power: f64,
    pub ul_power: f64,
    pub dl_power: f64,
    pub pathloss_exponent: f64,
    pub shadow_sigma_db: f64,
    pub cell_radius_m: f64,
    pub exclusion_radius_m: f64,
    /// Distance at which the unshadowed long-term fading equals 1.
    pub reference_distance_m: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let snr = db_to_linear(10.0);
        Self {
            num_cells: 7,
            users: 4,
            antennas: 128,
            coherence_symbols: 100,
            xi_ul: 0.5,
            xi_dl: 0.5,
            bandwidth_hz: 20e6,
            noise_power: 1.0,
            pilot_power: snr,
            ul_power: snr,
            dl_power: snr,
            pathloss_exponent: 3.8,
            shadow_sigma_db: 8.0,
            cell_radius_m: 1000.0,
            exclusion_radius_m: 100.0,
            reference_distance_m: 1000.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive and finite, got {v}")))
            }
        };
        if self.users == 0 {
            return Err(Error::config("users", "must be at least 1"));
        }
        if self.antennas == 0 {
            return Err(Error::config("antennas", "must be at least 1"));
        }
        if self.coherence_symbols <= self.users {
            return Err(Error::config(
                "coherence_symbols",
                format!(
                    "must exceed the pilot length {}, got {}",
                    self.users, self.coherence_symbols
                ),
            ));
        }
        for (key, xi) in [("xi_ul", self.xi_ul), ("xi_dl", self.xi_dl)] {
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Error::config(key, format!("must be in (0, 1), got {xi}")));
            }
        }
        if (self.xi_ul + self.xi_dl - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "xi_dl",
                format!("xi_ul + xi_dl must equal 1, got {}", self.xi_ul + self.xi_dl),
            ));
        }
        let data_symbols = (self.coherence_symbols - self.users) as f64;
        for (key, xi) in [("xi_ul", self.xi_ul), ("xi_dl", self.xi_dl)] {
            let slots = xi * data_symbols;
            if (slots - slots.round()).abs() > 1e-9 {
                return Err(Error::config(
                    key,
                    format!("{key}·(S−K) = {slots} is not an integer number of symbols"),
                ));
            }
        }
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("noise_power", self.noise_power)?;
        positive("snr_pilot_db", self.pilot_power)?;
        positive("snr_ul_db", self.ul_power)?;
        positive("snr_dl_db", self.dl_power)?;
        positive("cell_radius_m", self.cell_radius_m)?;
        positive("reference_distance_m", self.reference_distance_m)?;
        if self.pathloss_exponent.is_nan() || self.pathloss_exponent <= 2.0 {
            return Err(Error::config(
                "pathloss_exponent",
                format!("must exceed 2, got {}", self.pathloss_exponent),
            ));
        }
        if !(self.shadow_sigma_db >= 0.0 && self.shadow_sigma_db.is_finite()) {
            return Err(Error::config(
                "shadow_sigma_db",
                format!("must be >= 0, got {}", self.shadow_sigma_db),
            ));
        }
        if !(self.exclusion_radius_m >= 0.0 && self.exclusion_radius_m < self.cell_radius_m) {
            return Err(Error::config(
                "exclusion_radius_m",
                format!(
                    "must be in [0, cell_radius_m), got {}",
                    self.exclusion_radius_m
                ),
            ));
        }
        Ok(())
    }

    /// σ²_n / ρ^p, the pilot-estimation noise term.
    pub fn pilot_noise_ratio(&self) -> f64 {
        self.noise_power / self.pilot_power
    }

    /// Fraction of the block left for data, `(S − K) / S`.
    pub fn data_fraction(&self) -> f64 {
        (self.coherence_symbols - self.users) as f64 / self.coherence_symbols as f64
    }

    pub fn ul_rate(&self, sinr: f64) -> f64 {
        self.bandwidth_hz * self.data_fraction() * self.xi_ul * (1.0 + sinr).log2()
    }

    pub fn dl_rate(&self, sinr: f64) -> f64 {
        self.bandwidth_hz * self.data_fraction() * self.xi_dl * (1.0 + sinr).log2()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Per-user transmit powers and their ceilings, stored `[cell][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    num_cells: usize,
    users: usize,
    pub ul: Vec<f64>,
    pub dl: Vec<f64>,
    pub ul_max: Vec<f64>,
    pub dl_max: Vec<f64>,
}

impl PowerAllocation {
    /// Every user at its ceiling.
    pub fn uniform(num_cells: usize, users: usize, ul: f64, dl: f64) -> Self {
        let n = num_cells * users;
        Self {
            num_cells,
            users,
            ul: vec![ul; n],
            dl: vec![dl; n],
            ul_max: vec![ul; n],
            dl_max: vec![dl; n],
        }
    }

    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self::uniform(config.num_cells, config.users, config.ul_power, config.dl_power)
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    #[inline]
    pub fn index(&self, cell: usize, user: usize) -> usize {
        cell * self.users + user
    }

    #[inline]
    pub fn ul(&self, cell: usize, user: usize) -> f64 {
        self.ul[self.index(cell, user)]
    }

    #[inline]
    pub fn dl(&self, cell: usize, user: usize) -> f64 {
        self.dl[self.index(cell, user)]
    }

    pub fn ul_max(&self, cell: usize, user: usize) -> f64 {
        self.ul_max[self.index(cell, user)]
    }

    pub fn dl_max(&self, cell: usize, user: usize) -> f64 {
        self.dl_max[self.index(cell, user)]
    }

    pub fn set_ul(&mut self, cell: usize, user: usize, value: f64) {
        let i = self.index(cell, user);
        self.ul[i] = value;
    }

    pub fn set_dl(&mut self, cell: usize, user: usize, value: f64) {
        let i = self.index(cell, user);
        self.dl[i] = value;
    }

    /// Total DL power radiated by BS `cell`.
    pub fn dl_total(&self, cell: usize) -> f64 {
        self.dl[cell * self.users..(cell + 1) * self.users].iter().sum()
    }

    /// Whether `0 < ρ ≤ ρ̄` holds for every entry of both links.
    pub fn within_bounds(&self) -> bool {
        let ok = |p: &[f64], m: &[f64]| p.iter().zip(m).all(|(p, m)| *p > 0.0 && p <= m);
        ok(&self.ul, &self.ul_max) && ok(&self.dl, &self.dl_max)
    }
}

/// Normalization factor `α²` for BS `bs` and pilot `pilot`: the sum over all
/// cells of the gain from that cell's pilot holder, plus σ²_n/ρ^p.
pub fn alpha_sq(
    beta: &LargeScaleCoeffs,
    bs: usize,
    pilot: usize,
    assignment: &PilotAssignment,
    noise_power: f64,
    pilot_power: f64,
) -> f64 {
    (0..beta.num_cells())
        .map(|cell| beta.get(bs, assignment.user(cell, pilot), cell))
        .sum::<f64>()
        + noise_power / pilot_power
}

/// `α²` without the contribution of `home_cell`. Does not depend on which
/// user of `home_cell` holds `pilot`.
pub fn vartheta(
    beta: &LargeScaleCoeffs,
    bs: usize,
    pilot: usize,
    home_cell: usize,
    assignment: &PilotAssignment,
    noise_power: f64,
    pilot_power: f64,
) -> f64 {
    (0..beta.num_cells())
        .filter(|&cell| cell != home_cell)
        .map(|cell| beta.get(bs, assignment.user(cell, pilot), cell))
        .sum::<f64>()
        + noise_power / pilot_power
}

/// Total capacity of one user in bits/s.
pub fn total_capacity(ul_sinr: f64, dl_sinr: f64, config: &ScenarioConfig) -> f64 {
    config.ul_rate(ul_sinr) + config.dl_rate(dl_sinr)
}

/// Bundles the inputs every SINR expression needs.
#[derive(Debug, Clone, Copy)]
pub struct LinkModel<'a> {
    pub beta: &'a LargeScaleCoeffs,
    pub powers: &'a PowerAllocation,
    pub assignment: &'a PilotAssignment,
    pub config: &'a ScenarioConfig,
}

impl<'a> LinkModel<'a> {
    pub fn new(
        beta: &'a LargeScaleCoeffs,
        powers: &'a PowerAllocation,
        assignment: &'a PilotAssignment,
        config: &'a ScenarioConfig,
    ) -> Self {
        Self {
            beta,
            powers,
            assignment,
            config,
        }
    }

    fn num_cells(&self) -> usize {
        self.beta.num_cells()
    }

    pub fn alpha_sq(&self, bs: usize, pilot: usize) -> f64 {
        alpha_sq(
            self.beta,
            bs,
            pilot,
            self.assignment,
            self.config.noise_power,
            self.config.pilot_power,
        )
    }

    pub fn vartheta(&self, bs: usize, pilot: usize, home_cell: usize) -> f64 {
        vartheta(
            self.beta,
            bs,
            pilot,
            home_cell,
            self.assignment,
            self.config.noise_power,
            self.config.pilot_power,
        )
    }

    /// Pilot-contamination term of the UL SINR: `Σ_{l≠cell} ρ^u β²` over the
    /// other cells' holders of `pilot`, as seen at BS `cell`.
    pub fn ul_contamination(&self, cell: usize, pilot: usize) -> f64 {
        (0..self.num_cells())
            .filter(|&l| l != cell)
            .map(|l| {
                let u = self.assignment.user(l, pilot);
                self.powers.ul(l, u) * self.beta.get(cell, u, l).powi(2)
            })
            .sum()
    }

    /// Received UL power plus noise at BS `bs`, `Σ_{l,k} ρ^u_{kl} β_{bs,k,l} + σ²_n`.
    fn ul_received(&self, bs: usize) -> f64 {
        let mut total = self.config.noise_power;
        for l in 0..self.num_cells() {
            for k in 0..self.beta.users() {
                total += self.powers.ul(l, k) * self.beta.get(bs, k, l);
            }
        }
        total
    }

    /// UL interference-plus-noise of `user` on `pilot` in `cell`, before
    /// normalizing by the desired gain.
    fn ul_denominator_for(&self, cell: usize, pilot: usize, user: usize) -> f64 {
        let alpha = self.beta.get(cell, user, cell) + self.vartheta(cell, pilot, cell);
        self.ul_contamination(cell, pilot)
            + alpha / self.config.antennas as f64 * self.ul_received(cell)
    }

    pub fn ul_sinr_finite_for(&self, cell: usize, pilot: usize, user: usize) -> f64 {
        let signal = self.powers.ul(cell, user) * self.beta.get(cell, user, cell).powi(2);
        signal / self.ul_denominator_for(cell, pilot, user)
    }

    pub fn ul_sinr_finite(&self, cell: usize, pilot: usize) -> f64 {
        self.ul_sinr_finite_for(cell, pilot, self.assignment.user(cell, pilot))
    }

    /// UL interference normalized by the desired gain `β²`, i.e. the power
    /// `user` would need for unit SINR.
    pub fn ul_interference(&self, cell: usize, user: usize) -> f64 {
        let pilot = self.assignment.pilot_of(cell, user);
        self.ul_denominator_for(cell, pilot, user) / self.beta.get(cell, user, cell).powi(2)
    }

    pub fn ul_sinr_asym_for(&self, cell: usize, pilot: usize, user: usize) -> Result<f64> {
        let interference = self.ul_contamination(cell, pilot);
        if interference <= 0.0 {
            return Err(Error::NoInterference { cell, pilot });
        }
        Ok(self.powers.ul(cell, user) * self.beta.get(cell, user, cell).powi(2) / interference)
    }

    pub fn ul_sinr_asym(&self, cell: usize, pilot: usize) -> Result<f64> {
        self.ul_sinr_asym_for(cell, pilot, self.assignment.user(cell, pilot))
    }

    /// `α²` at BS `bs` for `pilot`, when that pilot is held by `user` of
    /// `home_cell`.
    fn alpha_sq_for(&self, bs: usize, pilot: usize, home_cell: usize, user: usize) -> f64 {
        self.beta.get(bs, user, home_cell) + self.vartheta(bs, pilot, home_cell)
    }

    /// Desired DL term and the pilot-contamination sum for `user` of `cell`
    /// on `pilot`.
    fn dl_terms_for(&self, cell: usize, pilot: usize, user: usize) -> (f64, f64) {
        let signal = self.powers.dl(cell, user) * self.beta.get(cell, user, cell).powi(2)
            / self.alpha_sq_for(cell, pilot, cell, user);
        let contamination = (0..self.num_cells())
            .filter(|&l| l != cell)
            .map(|l| {
                let holder = self.assignment.user(l, pilot);
                self.powers.dl(l, holder) * self.beta.get(l, user, cell).powi(2)
                    / self.alpha_sq_for(l, pilot, cell, user)
            })
            .sum();
        (signal, contamination)
    }

    fn dl_denominator_for(&self, cell: usize, pilot: usize, user: usize) -> (f64, f64) {
        let (signal, contamination) = self.dl_terms_for(cell, pilot, user);
        let received: f64 = (0..self.num_cells())
            .map(|l| self.beta.get(l, user, cell) * self.powers.dl_total(l))
            .sum();
        let denominator =
            contamination + (received + self.config.noise_power) / self.config.antennas as f64;
        (signal, denominator)
    }

    pub fn dl_sinr_finite_for(&self, cell: usize, pilot: usize, user: usize) -> f64 {
        let (signal, denominator) = self.dl_denominator_for(cell, pilot, user);
        signal / denominator
    }

    pub fn dl_sinr_finite(&self, cell: usize, pilot: usize) -> f64 {
        self.dl_sinr_finite_for(cell, pilot, self.assignment.user(cell, pilot))
    }

    pub fn dl_sinr_asym_for(&self, cell: usize, pilot: usize, user: usize) -> Result<f64> {
        let (signal, contamination) = self.dl_terms_for(cell, pilot, user);
        if contamination <= 0.0 {
            return Err(Error::NoInterference { cell, pilot });
        }
        Ok(signal / contamination)
    }

    pub fn dl_sinr_asym(&self, cell: usize, pilot: usize) -> Result<f64> {
        self.dl_sinr_asym_for(cell, pilot, self.assignment.user(cell, pilot))
    }

    /// DL interference-plus-noise seen by `user`, as `ρ / ς` from the current
    /// powers.
    pub fn dl_interference(&self, cell: usize, user: usize) -> Result<f64> {
        let pilot = self.assignment.pilot_of(cell, user);
        let sinr = self.dl_sinr_finite(cell, pilot);
        if sinr <= 0.0 {
            return Err(Error::ZeroSinr { cell, user });
        }
        Ok(self.powers.dl(cell, user) / sinr)
    }
}
