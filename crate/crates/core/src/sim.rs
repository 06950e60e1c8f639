//! Headless stand-in for the human evaluator.
//!
//! The simulated user knows a target expression and, each generation, picks
//! the displayed candidate(s) closest to it on the sample grid. Because picks
//! are carried into the next generation unchanged and are shown first, the
//! distance of the best pick to the target can never increase.

use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::evolution::{
    assign_fitness_sampled, display_subset, init_population, next_generation, ConfigError,
    EvolutionConfig, EvolutionError, SampleGrid,
};
use crate::expr::Expr;
use crate::text::{parse, serialize, ParseError};

/// The random source used for sessions and simulations.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("target: {0}")]
    Target(#[from] ParseError),
    #[error("generations must be at least 1")]
    NoGenerations,
    #[error("pick count must be at least 1")]
    NoPicks,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub generation: u64,
    /// Distance from the simulated user's best pick to the target.
    pub chosen_best_distance: f64,
    pub population_min_distance: f64,
    pub chosen_expression: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn is_non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].chosen_best_distance <= w[0].chosen_best_distance)
    }

    pub fn improved(&self) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(first), Some(last)) => last.chosen_best_distance < first.chosen_best_distance,
            _ => false,
        }
    }
}

/// Index of the candidate closest to `target`; ties go to the lower index.
/// Returns `None` only for an empty slice.
pub fn simulated_user_pick(candidates: &[Expr], target: &Expr, grid: &SampleGrid) -> Option<usize> {
    let target_values = grid.sample(target);
    pick_closest(candidates, &target_values, grid, 1).first().map(|&(i, _)| i)
}

/// The `k` candidates closest to the sampled target, best first, as
/// `(index, distance)`.
fn pick_closest(candidates: &[Expr], target: &[f64], grid: &SampleGrid, k: usize) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (i, grid.sampled_distance(&grid.sample(c), target)))
        .collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Runs the full interactive loop with the simulated user in place of a
/// person: display, pick, assign fitness, breed. One trace row per
/// generation.
pub fn run_simulation(
    target_text: &str,
    generations: usize,
    seed: u64,
    config: &EvolutionConfig,
    pick_top_k: usize,
) -> Result<ConvergenceTrace, SimError> {
    let target = parse(target_text)?;
    if generations == 0 {
        return Err(SimError::NoGenerations);
    }
    if pick_top_k == 0 {
        return Err(SimError::NoPicks);
    }
    let grid = SampleGrid::new(config)?;
    let target_values = grid.sample(&target);
    let mut rng = seeded_rng(seed);
    let mut population = init_population(config, &mut rng)?;
    let mut trace = ConvergenceTrace::default();

    for _ in 0..generations {
        let shown: Vec<Expr> = display_subset(&population, config)
            .into_iter()
            .map(|(_, ind)| ind.genome)
            .collect();
        let picks = pick_closest(&shown, &target_values, &grid, pick_top_k);
        let (best, best_distance) = picks[0];
        let samples = grid.sample_all(population.members.iter().map(|m| &m.genome));
        let population_min_distance = samples
            .iter()
            .map(|values| grid.sampled_distance(values, &target_values))
            .fold(f64::INFINITY, f64::min);
        trace.rows.push(TraceRow {
            generation: population.generation,
            chosen_best_distance: best_distance,
            population_min_distance,
            chosen_expression: serialize(&shown[best]),
        });

        let selections: Vec<Expr> = picks.iter().map(|&(i, _)| shown[i].clone()).collect();
        let scored = assign_fitness_sampled(&population, &samples, &selections, &grid)?;
        population = next_generation(&scored, &selections, config, &mut rng)?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SampleGrid {
        SampleGrid::new(&EvolutionConfig::default()).unwrap()
    }

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn picks_exact_match() {
        let c = [p("x"), p("(sin y)"), p("(cos y)")];
        assert_eq!(simulated_user_pick(&c, &p("(sin y)"), &grid()), Some(1));
    }

    #[test]
    fn picks_smaller_distance() {
        let c = [p("(add x 1.0)"), p("x")];
        assert_eq!(simulated_user_pick(&c, &p("x"), &grid()), Some(1));
    }

    #[test]
    fn ties_go_to_lower_index() {
        let c = [p("z"), p("(cos y)"), p("(cos y)")];
        assert_eq!(simulated_user_pick(&c, &p("(sin y)"), &grid()), Some(1));
        assert_eq!(simulated_user_pick(&[], &p("x"), &grid()), None);
    }

    #[test]
    fn single_generation_gives_one_row() {
        let trace = run_simulation("(sin y)", 1, 3, &EvolutionConfig::default(), 1).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].generation, 0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let config = EvolutionConfig::default();
        assert!(matches!(run_simulation("(sin", 3, 1, &config, 1), Err(SimError::Target(_))));
        assert_eq!(run_simulation("y", 0, 1, &config, 1), Err(SimError::NoGenerations));
        assert_eq!(run_simulation("y", 1, 1, &config, 0), Err(SimError::NoPicks));
    }
}
