//! Search for the schedule with `|M| = N` minimizing a noisy cost.
//!
//! [`optimize_ga`] is a generational genetic algorithm over fixed-weight
//! bitstrings: sigma scaling, stochastic universal sampling, count-preserving
//! crossover and repaired bit-flip mutation, no elitism. It returns the best
//! individual of the *last* generation, since the best-ever individual is
//! mostly the one whose cost estimate was luckiest.
//!
//! [`optimize_random_trials`] samples uniform schedules and keeps the lowest
//! estimated cost.
//!
//! A candidate is *killed* when its cost estimate saw any degenerate filter
//! run (or could not be computed at all). Killed individuals get no cost and
//! are never selected.

pub mod operators;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use operators::{count_preserving_crossover, mutate, sigma_scale, sus_select};

use crate::error::{Error, Result};
use crate::estimator::{estimate_expected_mse, CostEstimate};
use crate::model::DynamicalSystem;
use crate::rng::SimRng;
use crate::schedule::{random_schedule, MeasurementSchedule, ScheduleBits};

/// Something that scores a schedule. `seed` selects the random streams for
/// this one evaluation.
pub trait CostOracle: Sync {
    fn evaluate(&self, schedule: &MeasurementSchedule, seed: u64) -> Result<CostEstimate>;
}

impl<F> CostOracle for F
where
    F: Fn(&MeasurementSchedule, u64) -> Result<CostEstimate> + Sync,
{
    fn evaluate(&self, schedule: &MeasurementSchedule, seed: u64) -> Result<CostEstimate> {
        self(schedule, seed)
    }
}

/// [`estimate_expected_mse`] as a cost oracle.
pub struct MseOracle<'a, S: ?Sized> {
    pub system: &'a S,
    pub draws: usize,
    pub particles: usize,
    /// When set, every evaluation reuses this seed instead of the one it is
    /// given, so all schedules are scored on the same draws.
    pub common_random_numbers: Option<u64>,
}

impl<'a, S: DynamicalSystem + ?Sized> MseOracle<'a, S> {
    pub fn new(system: &'a S, draws: usize, particles: usize) -> Self {
        MseOracle {
            system,
            draws,
            particles,
            common_random_numbers: None,
        }
    }
}

impl<S: DynamicalSystem + ?Sized> CostOracle for MseOracle<'_, S> {
    fn evaluate(&self, schedule: &MeasurementSchedule, seed: u64) -> Result<CostEstimate> {
        let seed = self.common_random_numbers.unwrap_or(seed);
        estimate_expected_mse(self.system, schedule, self.draws, self.particles, seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub mutation_probability_per_gene: f64,
    pub sigma_coefficient: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 50,
            generations: 25,
            crossover_probability: 1.0,
            mutation_probability_per_gene: 0.003,
            sigma_coefficient: 1.0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        let problem = if self.population_size == 0 || !self.population_size.is_multiple_of(2) {
            Some(format!("population_size must be positive and even, got {}", self.population_size))
        } else if self.generations == 0 {
            Some("generations must be positive".to_string())
        } else if !unit.contains(&self.crossover_probability) {
            Some(format!("crossover_probability {} not in [0, 1]", self.crossover_probability))
        } else if !unit.contains(&self.mutation_probability_per_gene) {
            Some(format!(
                "mutation_probability_per_gene {} not in [0, 1]",
                self.mutation_probability_per_gene
            ))
        } else if !self.sigma_coefficient.is_finite() || self.sigma_coefficient <= 0.0 {
            Some(format!("sigma_coefficient must be positive, got {}", self.sigma_coefficient))
        } else {
            None
        };
        problem.map_or(Ok(()), |p| Err(Error::InvalidParameter(p)))
    }

    /// Cost evaluations a full run consumes.
    pub fn evaluation_budget(&self) -> usize {
        self.population_size * self.generations
    }
}

/// Convergence record after `evaluations` cost evaluations.
///
/// For the GA one point per generation, with the min and mean over that
/// generation's live individuals. For random trials one point per trial, with
/// the running min and mean over all evaluable trials so far (`NaN` before the
/// first one).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistoryPoint {
    pub evaluations: usize,
    pub min_cost: f64,
    pub mean_cost: f64,
    pub killed: usize,
}

/// One evaluated generation.
#[derive(Clone, Debug)]
pub struct GaState {
    pub generation: usize,
    pub individuals: Vec<ScheduleBits>,
    /// `None` for killed individuals.
    pub costs: Vec<Option<f64>>,
    pub history: Vec<HistoryPoint>,
}

impl GaState {
    pub fn alive(&self) -> Vec<bool> {
        self.costs.iter().map(Option::is_some).collect()
    }

    /// Index of the lowest-cost live individual (first on ties).
    pub fn best(&self) -> Option<usize> {
        self.costs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub best_schedule: MeasurementSchedule,
    pub best_cost: f64,
    pub history: Vec<HistoryPoint>,
    pub evaluations_used: usize,
}

fn usable_cost(estimate: Result<CostEstimate>) -> Option<f64> {
    match estimate {
        Ok(e) if !e.has_degenerate_draws() => Some(e.value),
        _ => None,
    }
}

/// Evaluates in parallel; the output order follows the input order.
fn evaluate_all<O: CostOracle + ?Sized>(
    oracle: &O,
    schedules: &[MeasurementSchedule],
    seeds: &[u64],
) -> Vec<Option<f64>> {
    schedules
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(m, &seed)| usable_cost(oracle.evaluate(m, seed)))
        .collect()
}

fn check_budget(horizon: usize, budget: usize) -> Result<()> {
    if budget > horizon + 1 {
        return Err(Error::InvalidParameter(format!(
            "N = {budget} exceeds T + 1 = {}",
            horizon + 1
        )));
    }
    Ok(())
}

pub fn optimize_ga<O: CostOracle + ?Sized>(
    oracle: &O,
    horizon: usize,
    budget: usize,
    params: &GaParams,
    rng: &mut SimRng,
) -> Result<OptimizationResult> {
    optimize_ga_observed(oracle, horizon, budget, params, rng, |_| {})
}

/// [`optimize_ga`], calling `observer` after each generation is evaluated.
pub fn optimize_ga_observed<O: CostOracle + ?Sized>(
    oracle: &O,
    horizon: usize,
    budget: usize,
    params: &GaParams,
    rng: &mut SimRng,
    mut observer: impl FnMut(&GaState),
) -> Result<OptimizationResult> {
    params.validate()?;
    check_budget(horizon, budget)?;
    let pop = params.population_size;

    let mut individuals: Vec<ScheduleBits> = (0..pop)
        .map(|_| random_schedule(horizon, budget, rng).encode())
        .collect();
    let mut history = Vec::with_capacity(params.generations);

    for generation in 0..params.generations {
        let schedules: Vec<MeasurementSchedule> = individuals.iter().map(ScheduleBits::decode).collect();
        let seeds: Vec<u64> = (0..pop).map(|_| rng.next_u64()).collect();
        let costs = evaluate_all(oracle, &schedules, &seeds);

        let live: Vec<f64> = costs.iter().flatten().copied().collect();
        if live.is_empty() {
            return Err(Error::PopulationExtinct { generation });
        }
        history.push(HistoryPoint {
            evaluations: (generation + 1) * pop,
            min_cost: live.iter().copied().fold(f64::INFINITY, f64::min),
            mean_cost: live.iter().sum::<f64>() / live.len() as f64,
            killed: pop - live.len(),
        });

        let state = GaState {
            generation,
            individuals,
            costs,
            history,
        };
        observer(&state);

        if generation + 1 == params.generations {
            let best = state.best().expect("live individuals exist");
            return Ok(OptimizationResult {
                best_schedule: state.individuals[best].decode(),
                best_cost: state.costs[best].expect("best is alive"),
                history: state.history,
                evaluations_used: params.evaluation_budget(),
            });
        }

        individuals = next_generation(&state, params, rng)?;
        history = state.history;
    }
    unreachable!("generations >= 1 is validated")
}

fn next_generation(state: &GaState, params: &GaParams, rng: &mut SimRng) -> Result<Vec<ScheduleBits>> {
    let pop = params.population_size;
    let expected = sigma_scale(&state.costs, params.sigma_coefficient);
    let mut parents = sus_select(&expected, pop, rng)?;
    // SUS yields parents in wheel order; shuffle before pairing neighbours
    parents.shuffle(rng);

    let mut next = Vec::with_capacity(pop);
    for pair in parents.chunks_exact(2) {
        let (a, b) = (&state.individuals[pair[0]], &state.individuals[pair[1]]);
        let (c1, c2) = if rng.random_bool(params.crossover_probability) {
            count_preserving_crossover(a, b, rng)
        } else {
            (a.clone(), b.clone())
        };
        next.push(mutate(&c1, params.mutation_probability_per_gene, rng));
        next.push(mutate(&c2, params.mutation_probability_per_gene, rng));
    }
    Ok(next)
}

/// Random-trials baseline with `budget_evals` cost evaluations.
pub fn optimize_random_trials<O: CostOracle + ?Sized>(
    oracle: &O,
    horizon: usize,
    budget: usize,
    budget_evals: usize,
    rng: &mut SimRng,
) -> Result<OptimizationResult> {
    check_budget(horizon, budget)?;
    if budget_evals == 0 {
        return Err(Error::InvalidParameter("random trials need at least one evaluation".into()));
    }
    let mut schedules = Vec::with_capacity(budget_evals);
    let mut seeds = Vec::with_capacity(budget_evals);
    for _ in 0..budget_evals {
        schedules.push(random_schedule(horizon, budget, rng));
        seeds.push(rng.next_u64());
    }
    let costs = evaluate_all(oracle, &schedules, &seeds);

    let mut history = Vec::with_capacity(budget_evals);
    let mut best: Option<(usize, f64)> = None;
    let (mut sum, mut used) = (0.0, 0usize);
    for (i, cost) in costs.iter().enumerate() {
        if let Some(c) = *cost {
            sum += c;
            used += 1;
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((i, c));
            }
        }
        history.push(HistoryPoint {
            evaluations: i + 1,
            min_cost: best.map_or(f64::NAN, |(_, b)| b),
            mean_cost: if used > 0 { sum / used as f64 } else { f64::NAN },
            killed: i + 1 - used,
        });
    }
    let (index, best_cost) = best.ok_or(Error::NoEvaluableTrial { trials: budget_evals })?;
    Ok(OptimizationResult {
        best_schedule: schedules.swap_remove(index),
        best_cost,
        history,
        evaluations_used: budget_evals,
    })
}
