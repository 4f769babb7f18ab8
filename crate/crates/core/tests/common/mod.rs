//! Random instances shared by the integration tests.
#![allow(dead_code)]

use pilotsim::assignment::random_pa;
use pilotsim::geometry::LargeScaleCoeffs;
use pilotsim::{PilotAssignment, PowerAllocation, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Instance {
    pub beta: LargeScaleCoeffs,
    pub powers: PowerAllocation,
    pub assignment: PilotAssignment,
    pub config: ScenarioConfig,
}

/// Log-uniform gains with a stronger own-cell path, random permutations and
/// random powers below the ceilings.
pub fn random_instance(num_cells: usize, users: usize, rng: &mut impl Rng) -> Instance {
    let beta = LargeScaleCoeffs::from_fn(num_cells, users, |bs, _, cell| {
        let exp = if bs == cell {
            rng.random_range(-1.0..1.5)
        } else {
            rng.random_range(-3.0..0.0)
        };
        10f64.powf(exp)
    });
    let mut powers = PowerAllocation::uniform(num_cells, users, 10.0, 10.0);
    for cell in 0..num_cells {
        for user in 0..users {
            powers.set_ul(cell, user, rng.random_range(1.0..10.0));
            powers.set_dl(cell, user, rng.random_range(1.0..10.0));
        }
    }
    let assignment =
        PilotAssignment::from_cells((0..num_cells).map(|_| random_pa(users, rng)).collect()).unwrap();
    let config = ScenarioConfig {
        num_cells,
        users,
        ..ScenarioConfig::default()
    };
    Instance {
        beta,
        powers,
        assignment,
        config,
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Instance on a real drop of the standard scenario: hexagonal geometry,
/// path loss and shadowing, random assignment and uniform powers.
pub fn geometric_instance(seed: u64, users: usize) -> Instance {
    let config = ScenarioConfig {
        users,
        ..ScenarioConfig::default()
    };
    let channel = pilotsim::harness::drop_channel(&config, seed).unwrap();
    let mut rng = rng(seed ^ 0xa5a5);
    let assignment =
        PilotAssignment::from_cells((0..config.num_cells).map(|_| random_pa(users, &mut rng)).collect())
            .unwrap();
    Instance {
        beta: channel.beta,
        powers: PowerAllocation::from_config(&config),
        assignment,
        config,
    }
}

/// Order-unity gains (own path 0.5..2, cross paths 0.05..0.5), the regime
/// in which N = 10⁷ is already deep in the asymptotic limit.
pub fn moderate_instance(num_cells: usize, users: usize, rng: &mut impl Rng) -> Instance {
    let mut inst = random_instance(num_cells, users, rng);
    inst.beta = LargeScaleCoeffs::from_fn(num_cells, users, |bs, _, cell| {
        if bs == cell {
            rng.random_range(0.5..2.0)
        } else {
            rng.random_range(0.05..0.5)
        }
    });
    inst
}
