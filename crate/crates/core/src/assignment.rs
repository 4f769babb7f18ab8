//! Pilot assignment: cost matrices, exhaustive and heuristic solvers, the
//! greedy UL baseline and the decentralized best-response rounds.
//!
//! A cell's assignment is a vector `c` with `c[p]` the user holding pilot
//! `p`. Cost matrices are indexed `(user, pilot)`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::LargeScaleCoeffs;
use crate::link::{LinkModel, PowerAllocation, ScenarioConfig};

/// Largest pilot count the exhaustive solver accepts (8! = 40320).
pub const MAX_EXHAUSTIVE_PILOTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PilotAssignment {
    cells: Vec<Vec<usize>>,
}

impl PilotAssignment {
    pub fn identity(num_cells: usize, users: usize) -> Self {
        Self {
            cells: vec![(0..users).collect(); num_cells],
        }
    }

    pub fn from_cells(cells: Vec<Vec<usize>>) -> Result<Self> {
        let users = cells.first().map_or(0, Vec::len);
        for (cell, c) in cells.iter().enumerate() {
            if c.len() != users || !is_permutation(c) {
                return Err(Error::InvalidAssignment(format!(
                    "cell {cell}: {c:?} is not a permutation of 0..{users}"
                )));
            }
        }
        Ok(Self { cells })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn users(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    /// User of `cell` holding `pilot`.
    #[inline]
    pub fn user(&self, cell: usize, pilot: usize) -> usize {
        self.cells[cell][pilot]
    }

    /// Pilot held by `user` of `cell`.
    pub fn pilot_of(&self, cell: usize, user: usize) -> usize {
        self.cells[cell]
            .iter()
            .position(|&u| u == user)
            .expect("assignment is a permutation")
    }

    pub fn cell(&self, cell: usize) -> &[usize] {
        &self.cells[cell]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn set_cell(&mut self, cell: usize, permutation: Vec<usize>) -> Result<()> {
        if permutation.len() != self.users() || !is_permutation(&permutation) {
            return Err(Error::InvalidAssignment(format!(
                "cell {cell}: {permutation:?} is not a permutation of 0..{}",
                self.users()
            )));
        }
        self.cells[cell] = permutation;
        Ok(())
    }
}

pub fn is_permutation(c: &[usize]) -> bool {
    let mut seen = vec![false; c.len()];
    c.iter()
        .all(|&u| u < c.len() && !std::mem::replace(&mut seen[u], true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Ul,
    Dl,
    Tc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    MaxMin,
    MaxMean,
}

/// Pilot-assignment schemes. Display names follow the usual acronyms
/// (`MaxMinSINR DL`, `H-MaxMinTC`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PaMethod {
    Random,
    ExhaustiveMaxMin(Metric),
    ExhaustiveMean(Metric),
    HeuristicMaxMin(Metric),
    GreedyUl,
}

impl PaMethod {
    /// The schemes of the standard comparison, in presentation order.
    pub const ALL: [PaMethod; 10] = [
        PaMethod::Random,
        PaMethod::ExhaustiveMaxMin(Metric::Dl),
        PaMethod::ExhaustiveMean(Metric::Dl),
        PaMethod::HeuristicMaxMin(Metric::Dl),
        PaMethod::ExhaustiveMaxMin(Metric::Ul),
        PaMethod::ExhaustiveMean(Metric::Ul),
        PaMethod::GreedyUl,
        PaMethod::ExhaustiveMaxMin(Metric::Tc),
        PaMethod::ExhaustiveMean(Metric::Tc),
        PaMethod::HeuristicMaxMin(Metric::Tc),
    ];

    pub fn is_exhaustive(&self) -> bool {
        matches!(self, PaMethod::ExhaustiveMaxMin(_) | PaMethod::ExhaustiveMean(_))
    }

    pub fn name(&self) -> &'static str {
        use Metric::*;
        match self {
            PaMethod::Random => "Random",
            PaMethod::ExhaustiveMaxMin(Dl) => "MaxMinSINR DL",
            PaMethod::ExhaustiveMaxMin(Ul) => "MaxMinSINR UL",
            PaMethod::ExhaustiveMaxMin(Tc) => "MaxMinTC",
            PaMethod::ExhaustiveMean(Dl) => "MaxSINR DL",
            PaMethod::ExhaustiveMean(Ul) => "MaxSINR UL",
            PaMethod::ExhaustiveMean(Tc) => "MaxTC",
            PaMethod::HeuristicMaxMin(Dl) => "H-MaxMinSINR DL",
            PaMethod::HeuristicMaxMin(Ul) => "Alg1-MaxMinSINR UL",
            PaMethod::HeuristicMaxMin(Tc) => "H-MaxMinTC",
            PaMethod::GreedyUl => "H-MaxMinSINR UL",
        }
    }
}

impl fmt::Display for PaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn canonical(name: &str) -> String {
    name.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl FromStr for PaMethod {
    type Err = Error;

    /// Case-insensitive; spaces, dashes and underscores are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let key = canonical(s);
        let extra = PaMethod::HeuristicMaxMin(Metric::Ul);
        PaMethod::ALL
            .iter()
            .chain(std::iter::once(&extra))
            .find(|m| canonical(m.name()) == key)
            .copied()
            .ok_or_else(|| Error::config("pa", format!("unknown pilot-assignment method `{s}`")))
    }
}

/// Users × pilots matrix of per-hypothesis metrics, with masks used while
/// the heuristic consumes rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    size: usize,
    values: Vec<f64>,
    row_valid: Vec<bool>,
    col_valid: Vec<bool>,
}

impl CostMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let size = rows.len();
        assert!(rows.iter().all(|r| r.len() == size), "cost matrix must be square");
        Self {
            size,
            values: rows.concat(),
            row_valid: vec![true; size],
            col_valid: vec![true; size],
        }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(size * size);
        for user in 0..size {
            for pilot in 0..size {
                values.push(f(user, pilot));
            }
        }
        Self {
            size,
            values,
            row_valid: vec![true; size],
            col_valid: vec![true; size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, user: usize, pilot: usize) -> f64 {
        self.values[user * self.size + pilot]
    }

    pub fn is_row_valid(&self, user: usize) -> bool {
        self.row_valid[user]
    }

    pub fn is_col_valid(&self, pilot: usize) -> bool {
        self.col_valid[pilot]
    }

    pub fn invalidate(&mut self, user: usize, pilot: usize) {
        self.row_valid[user] = false;
        self.col_valid[pilot] = false;
    }

    /// Per-pilot values obtained by the assignment `c` (`c[p]` = user).
    pub fn assigned<'a>(&'a self, c: &'a [usize]) -> impl Iterator<Item = f64> + 'a {
        c.iter().enumerate().map(|(p, &u)| self.get(u, p))
    }

    pub fn min_of(&self, c: &[usize]) -> f64 {
        self.assigned(c).fold(f64::INFINITY, f64::min)
    }

    pub fn mean_of(&self, c: &[usize]) -> f64 {
        self.assigned(c).sum::<f64>() / c.len() as f64
    }

    pub fn objective(&self, c: &[usize], objective: Objective) -> f64 {
        match objective {
            Objective::MaxMin => self.min_of(c),
            Objective::MaxMean => self.mean_of(c),
        }
    }
}

pub fn random_pa<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Vec<usize> {
    let mut c: Vec<usize> = (0..users).collect();
    c.shuffle(rng);
    c
}

/// Asymptotic SINR with a finite-N fallback when there is no contamination.
fn ul_metric(link: &LinkModel<'_>, cell: usize, pilot: usize, user: usize) -> Result<f64> {
    match link.ul_sinr_asym_for(cell, pilot, user) {
        Err(Error::NoInterference { .. }) => Ok(link.ul_sinr_finite_for(cell, pilot, user)),
        other => other,
    }
}

fn dl_metric(link: &LinkModel<'_>, cell: usize, pilot: usize, user: usize) -> Result<f64> {
    match link.dl_sinr_asym_for(cell, pilot, user) {
        Err(Error::NoInterference { .. }) => Ok(link.dl_sinr_finite_for(cell, pilot, user)),
        other => other,
    }
}

/// Cost matrix of `cell` with all other cells' assignments fixed at
/// `link.assignment`. The cell's own current assignment is ignored.
pub fn build_cost_matrix(metric: Metric, cell: usize, link: &LinkModel<'_>) -> Result<CostMatrix> {
    let k = link.assignment.users();
    let mut values = Vec::with_capacity(k * k);
    for user in 0..k {
        for pilot in 0..k {
            let v = match metric {
                Metric::Ul => ul_metric(link, cell, pilot, user)?,
                Metric::Dl => dl_metric(link, cell, pilot, user)?,
                Metric::Tc => {
                    let ul = ul_metric(link, cell, pilot, user)?;
                    let dl = dl_metric(link, cell, pilot, user)?;
                    crate::link::total_capacity(ul, dl, link.config)
                }
            };
            values.push(v);
        }
    }
    Ok(CostMatrix {
        size: k,
        values,
        row_valid: vec![true; k],
        col_valid: vec![true; k],
    })
}

/// In-place lexicographic successor; false once `c` is the last permutation.
fn next_permutation(c: &mut [usize]) -> bool {
    let Some(i) = c.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = c.iter().rposition(|&x| x > c[i]).expect("pivot has a successor");
    c.swap(i, j);
    c[i + 1..].reverse();
    true
}

/// Best permutation over all K! candidates. Ties go to the lexicographically
/// smallest permutation.
pub fn exhaustive_pa(cost: &CostMatrix, objective: Objective) -> Result<(Vec<usize>, f64)> {
    let k = cost.size();
    if k > MAX_EXHAUSTIVE_PILOTS {
        return Err(Error::TooManyPilots {
            users: k,
            max: MAX_EXHAUSTIVE_PILOTS,
        });
    }
    let mut c: Vec<usize> = (0..k).collect();
    let mut best = c.clone();
    let mut best_value = cost.objective(&c, objective);
    while next_permutation(&mut c) {
        let value = cost.objective(&c, objective);
        if value > best_value {
            best_value = value;
            best.copy_from_slice(&c);
        }
    }
    Ok((best, best_value))
}

/// Max-min heuristic: repeatedly give the user whose best remaining pilot is
/// worst that pilot. Ties go to the smallest index.
pub fn heuristic_pa(cost: &CostMatrix) -> Vec<usize> {
    let k = cost.size();
    let mut work = cost.clone();
    let mut c = vec![usize::MAX; k];
    for _ in 0..k {
        let mut chosen: Option<(usize, usize, f64)> = None;
        for user in (0..k).filter(|&u| work.is_row_valid(u)) {
            let (eta, delta) = (0..k)
                .filter(|&p| work.is_col_valid(p))
                .map(|p| (p, work.get(user, p)))
                .fold((usize::MAX, f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 || best.0 == usize::MAX {
                        cur
                    } else {
                        best
                    }
                });
            if chosen.is_none_or(|(_, _, d)| delta < d) {
                chosen = Some((user, eta, delta));
            }
        }
        let (phi, eta, _) = chosen.expect("a valid row remains");
        c[eta] = phi;
        work.invalidate(phi, eta);
    }
    c
}

/// Greedy UL baseline: the most contaminated pilots go to the users with
/// the strongest own-cell gain.
pub fn greedy_ul_pa(
    beta: &LargeScaleCoeffs,
    powers: &PowerAllocation,
    assignment: &PilotAssignment,
    config: &ScenarioConfig,
    cell: usize,
) -> Vec<usize> {
    let link = LinkModel::new(beta, powers, assignment, config);
    let k = assignment.users();
    let interference: Vec<f64> = (0..k).map(|p| link.ul_contamination(cell, p)).collect();
    let gains: Vec<f64> = (0..k).map(|u| beta.get(cell, u, cell)).collect();
    greedy_match(&interference, &gains)
}

/// Rank-for-rank match of pilots by descending interference to users by
/// descending gain; stable, so ties keep index order.
pub fn greedy_match(interference: &[f64], gains: &[f64]) -> Vec<usize> {
    let mut pilots: Vec<usize> = (0..interference.len()).collect();
    pilots.sort_by(|&a, &b| interference[b].total_cmp(&interference[a]));
    let mut users: Vec<usize> = (0..gains.len()).collect();
    users.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let mut c = vec![0; pilots.len()];
    for (&p, &u) in pilots.iter().zip(&users) {
        c[p] = u;
    }
    c
}

/// Best response of one cell under `method`, other cells fixed.
///
/// Returns the new permutation and, for cost-matrix based methods, the
/// matrix it was chosen from.
pub fn optimize_cell(
    method: PaMethod,
    cell: usize,
    link: &LinkModel<'_>,
) -> Result<(Vec<usize>, Option<CostMatrix>)> {
    match method {
        PaMethod::Random => Ok((link.assignment.cell(cell).to_vec(), None)),
        PaMethod::GreedyUl => Ok((
            greedy_ul_pa(link.beta, link.powers, link.assignment, link.config, cell),
            None,
        )),
        PaMethod::ExhaustiveMaxMin(metric) => {
            let cost = build_cost_matrix(metric, cell, link)?;
            let (c, _) = exhaustive_pa(&cost, Objective::MaxMin)?;
            Ok((c, Some(cost)))
        }
        PaMethod::ExhaustiveMean(metric) => {
            let cost = build_cost_matrix(metric, cell, link)?;
            let (c, _) = exhaustive_pa(&cost, Objective::MaxMean)?;
            Ok((c, Some(cost)))
        }
        PaMethod::HeuristicMaxMin(metric) => {
            let cost = build_cost_matrix(metric, cell, link)?;
            Ok((heuristic_pa(&cost), Some(cost)))
        }
    }
}

/// One per-cell update of the best-response rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CellUpdate {
    pub round: usize,
    pub cell: usize,
    pub changed: bool,
    /// Objective of the cell's previous permutation in the current context.
    pub previous_objective: Option<f64>,
    /// Objective of the chosen permutation.
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundsOutcome {
    pub assignment: PilotAssignment,
    pub rounds_run: usize,
    pub trace: Vec<CellUpdate>,
}

fn method_objective(method: PaMethod) -> Objective {
    match method {
        PaMethod::ExhaustiveMean(_) => Objective::MaxMean,
        _ => Objective::MaxMin,
    }
}

/// Cell visiting order of one round: the neighbours in index order, then
/// the central cell 0, so the measured cell's final assignment is a best
/// response to everyone else's final assignment.
pub fn update_order(num_cells: usize) -> impl Iterator<Item = usize> {
    (1..num_cells).chain((num_cells > 0).then_some(0))
}

/// Decentralized pilot assignment: random start, then up to `rounds`
/// sequential sweeps over the cells, each cell best-responding to the rest.
/// Stops early after a sweep that changes nothing.
pub fn multicell_rounds<R: Rng + ?Sized>(
    beta: &LargeScaleCoeffs,
    powers: &PowerAllocation,
    config: &ScenarioConfig,
    method: PaMethod,
    rounds: usize,
    rng: &mut R,
) -> Result<RoundsOutcome> {
    if rounds == 0 {
        return Err(Error::config("rounds", "must be at least 1"));
    }
    let num_cells = beta.num_cells();
    let users = beta.users();
    let initial = (0..num_cells).map(|_| random_pa(users, rng)).collect();
    let mut assignment = PilotAssignment::from_cells(initial)?;
    let mut trace = Vec::new();
    if method == PaMethod::Random {
        return Ok(RoundsOutcome {
            assignment,
            rounds_run: 0,
            trace,
        });
    }
    if method.is_exhaustive() && users > MAX_EXHAUSTIVE_PILOTS {
        return Err(Error::TooManyPilots {
            users,
            max: MAX_EXHAUSTIVE_PILOTS,
        });
    }
    let mut rounds_run = 0;
    for round in 0..rounds {
        rounds_run += 1;
        let mut any_change = false;
        for cell in update_order(num_cells) {
            let link = LinkModel::new(beta, powers, &assignment, config);
            let (next, cost) = optimize_cell(method, cell, &link)?;
            let objective = method_objective(method);
            let previous_objective = cost
                .as_ref()
                .map(|m| m.objective(assignment.cell(cell), objective));
            let chosen_objective = cost.as_ref().map(|m| m.objective(&next, objective));
            let changed = next != assignment.cell(cell);
            trace.push(CellUpdate {
                round,
                cell,
                changed,
                previous_objective,
                objective: chosen_objective,
            });
            if changed {
                assignment.set_cell(cell, next)?;
                any_change = true;
            }
        }
        if !any_change {
            break;
        }
    }
    Ok(RoundsOutcome {
        assignment,
        rounds_run,
        trace,
    })
}
