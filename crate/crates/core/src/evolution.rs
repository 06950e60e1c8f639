//! The interactive GA: population lifecycle, the display subset, fitness from
//! user selections, and generational reproduction.
//!
//! Fitness is a distance, so lower is better. A member's distance is the
//! least-squares sum of its difference to the nearest user selection, sampled
//! on an evenly spaced 4-D grid over `(x, y, z, time)`.

use alloc::rc::Rc;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::eval::{evaluate, Env};
use crate::expr::{Expr, Terminal};
use crate::genetic::{crossover, mutate};
use crate::grow::{random_expression, GrowthParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConfigError(&'static str);

impl ConfigError {
    pub(crate) const fn new(message: &'static str) -> Self {
        ConfigError(message)
    }

    pub fn message(&self) -> &'static str {
        self.0
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl core::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("at least one selection is required")]
    EmptySelection,
    #[error("member {index} has no fitness assigned")]
    MissingFitness { index: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    /// Candidates shown to the user per generation.
    pub display_count: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
    pub growth: GrowthParams,
    pub grid_points_per_axis: usize,
    pub grid_interval: (f64, f64),
    /// Upper bound on a single grid point's squared difference; non-finite
    /// differences count as this value.
    pub per_point_cap: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 100,
            display_count: 9,
            crossover_prob: 0.9,
            mutation_prob: 0.1,
            tournament_size: 3,
            growth: GrowthParams::default(),
            grid_points_per_axis: 10,
            grid_interval: (-10.0, 10.0),
            per_point_cap: 1e6,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::new("population_size must be positive"));
        }
        if self.display_count == 0 {
            return Err(ConfigError::new("display_count must be positive"));
        }
        if self.display_count > self.population_size {
            return Err(ConfigError::new("display_count exceeds population_size"));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return Err(ConfigError::new("crossover_prob must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(ConfigError::new("mutation_prob must lie in [0, 1]"));
        }
        if self.tournament_size == 0 {
            return Err(ConfigError::new("tournament_size must be positive"));
        }
        if self.grid_points_per_axis < 2 {
            return Err(ConfigError::new("grid_points_per_axis must be at least 2"));
        }
        if self.grid_points_per_axis.checked_pow(4).is_none() {
            return Err(ConfigError::new("grid_points_per_axis is too large"));
        }
        let (lo, hi) = self.grid_interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ConfigError::new("grid_interval must be finite with lo < hi"));
        }
        if !(self.per_point_cap.is_finite() && self.per_point_cap > 0.0) {
            return Err(ConfigError::new("per_point_cap must be finite and positive"));
        }
        Ok(())
    }
}

/// Evenly spaced sample points with inclusive endpoints, shared by all four
/// variables. Points are ordered with `x` outermost and `time` innermost.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    axis: Vec<f64>,
    points: Vec<Env>,
    /// Per-variable value columns in point order: x, y, z, time.
    columns: [Vec<f64>; 4],
    per_point_cap: f64,
}

impl SampleGrid {
    pub fn new(config: &EvolutionConfig) -> Result<SampleGrid, ConfigError> {
        let n = config.grid_points_per_axis;
        if n < 2 {
            return Err(ConfigError::new("grid_points_per_axis must be at least 2"));
        }
        config.validate()?;
        let (lo, hi) = config.grid_interval;
        let last = (n - 1) as f64;
        let axis: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / last })
            .collect();
        let mut points = Vec::with_capacity(n.pow(4));
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    for &time in &axis {
                        points.push(Env { x, y, z, time });
                    }
                }
            }
        }
        let columns = [
            points.iter().map(|p| p.x).collect(),
            points.iter().map(|p| p.y).collect(),
            points.iter().map(|p| p.z).collect(),
            points.iter().map(|p| p.time).collect(),
        ];
        Ok(SampleGrid {
            axis,
            points,
            columns,
            per_point_cap: config.per_point_cap,
        })
    }

    pub fn axis_values(&self) -> &[f64] {
        &self.axis
    }

    pub fn points(&self) -> &[Env] {
        &self.points
    }

    pub fn per_point_cap(&self) -> f64 {
        self.per_point_cap
    }

    /// `expr` evaluated at every grid point, in point order.
    ///
    /// Works a node at a time over whole columns of values. Each point sees
    /// the same operations in the same order as [`evaluate`], so the results
    /// are bit-identical to evaluating point by point.
    pub fn sample(&self, expr: &Expr) -> Vec<f64> {
        match expr {
            Expr::Leaf(t) => match *t {
                Terminal::Constant(v) => alloc::vec![v; self.points.len()],
                Terminal::X => self.columns[0].clone(),
                Terminal::Y => self.columns[1].clone(),
                Terminal::Z => self.columns[2].clone(),
                Terminal::Time => self.columns[3].clone(),
            },
            Expr::Unary(op, a) => {
                let mut values = self.sample(a);
                for v in &mut values {
                    *v = op.apply(*v);
                }
                values
            }
            Expr::Binary(op, a, b) => {
                let mut lhs = self.sample(a);
                let rhs = self.sample(b);
                for (l, r) in lhs.iter_mut().zip(&rhs) {
                    *l = op.apply(*l, *r);
                }
                lhs
            }
        }
    }

    /// Samples every genome, sharing work between structurally equal ones.
    pub fn sample_all<'a>(&self, genomes: impl IntoIterator<Item = &'a Expr>) -> Vec<Rc<[f64]>> {
        let mut seen: Vec<(&'a Expr, Rc<[f64]>)> = Vec::new();
        genomes
            .into_iter()
            .map(|g| match seen.iter().find(|(e, _)| *e == g) {
                Some((_, values)) => Rc::clone(values),
                None => {
                    let values: Rc<[f64]> = self.sample(g).into();
                    seen.push((g, Rc::clone(&values)));
                    values
                }
            })
            .collect()
    }

    /// Capped least-squares distance between two sampled expressions. Sums in
    /// point order, so results are reproducible bit for bit.
    pub fn sampled_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .map(|(&u, &v)| point_term(u, v, self.per_point_cap))
            .sum()
    }
}

/// Identical values (including matching infinities and NaN against NaN)
/// contribute nothing, so every expression is at distance zero from itself.
fn point_term(a: f64, b: f64, cap: f64) -> f64 {
    if a == b || (a.is_nan() && b.is_nan()) {
        return 0.0;
    }
    let diff = a - b;
    let sq = diff * diff;
    if sq.is_finite() {
        sq.min(cap)
    } else {
        cap
    }
}

pub fn build_sample_grid(config: &EvolutionConfig) -> Result<SampleGrid, ConfigError> {
    SampleGrid::new(config)
}

pub fn expression_distance(a: &Expr, b: &Expr, grid: &SampleGrid) -> f64 {
    let cap = grid.per_point_cap;
    grid.points
        .iter()
        .map(|p| point_term(evaluate(a, p), evaluate(b, p), cap))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genome: Expr,
    /// Distance to the nearest user selection; `None` until assigned.
    pub distance: Option<f64>,
}

impl Individual {
    pub fn new(genome: Expr) -> Individual {
        Individual { genome, distance: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
    pub generation: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, genome: &Expr) -> bool {
        self.members.iter().any(|m| &m.genome == genome)
    }

    pub fn has_fitness(&self) -> bool {
        self.members.iter().any(|m| m.distance.is_some())
    }
}

pub fn init_population<R: Rng + ?Sized>(
    config: &EvolutionConfig,
    rng: &mut R,
) -> Result<Population, ConfigError> {
    config.validate()?;
    let members = (0..config.population_size)
        .map(|_| Individual::new(random_expression(&config.growth, rng)))
        .collect();
    Ok(Population { members, generation: 0 })
}

/// The members to show the user, as `(member_index, individual)` pairs.
///
/// With fitness assigned, these are the `display_count` lowest-distance
/// members, structurally distinct forms first, ties by lower index. Without
/// fitness, the first distinct members in index order. Either way the list is
/// padded with duplicates in the same order when too few distinct forms
/// exist.
pub fn display_subset(population: &Population, config: &EvolutionConfig) -> Vec<(usize, Individual)> {
    let mut order: Vec<usize> = (0..population.members.len()).collect();
    if population.has_fitness() {
        let key = |i: usize| population.members[i].distance.unwrap_or(f64::INFINITY);
        order.sort_by(|&i, &j| key(i).total_cmp(&key(j)).then(i.cmp(&j)));
    }

    let want = config.display_count.min(order.len());
    let mut chosen: Vec<usize> = Vec::with_capacity(want);
    for &i in &order {
        if chosen.len() == want {
            break;
        }
        let genome = &population.members[i].genome;
        if chosen.iter().all(|&c| &population.members[c].genome != genome) {
            chosen.push(i);
        }
    }
    for &i in &order {
        if chosen.len() == want {
            break;
        }
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen
        .into_iter()
        .map(|i| (i, population.members[i].clone()))
        .collect()
}

/// Sets every member's distance to its minimum distance over `selections`.
pub fn assign_fitness(
    population: &Population,
    selections: &[Expr],
    grid: &SampleGrid,
) -> Result<Population, EvolutionError> {
    if selections.is_empty() {
        return Err(EvolutionError::EmptySelection);
    }
    let samples = grid.sample_all(population.members.iter().map(|m| &m.genome));
    assign_fitness_sampled(population, &samples, selections, grid)
}

/// [`assign_fitness`] with the members already sampled on `grid`, in member
/// order.
pub fn assign_fitness_sampled(
    population: &Population,
    member_samples: &[Rc<[f64]>],
    selections: &[Expr],
    grid: &SampleGrid,
) -> Result<Population, EvolutionError> {
    if selections.is_empty() {
        return Err(EvolutionError::EmptySelection);
    }
    debug_assert_eq!(member_samples.len(), population.members.len());
    let targets = grid.sample_all(selections);
    let mut cache: Vec<(&Rc<[f64]>, f64)> = Vec::new();
    let members = population
        .members
        .iter()
        .zip(member_samples)
        .map(|(m, values)| {
            let distance = match cache.iter().find(|(v, _)| Rc::ptr_eq(v, values)) {
                Some(&(_, d)) => d,
                None => {
                    let d = targets
                        .iter()
                        .map(|t| grid.sampled_distance(values, t))
                        .fold(f64::INFINITY, f64::min);
                    cache.push((values, d));
                    d
                }
            };
            Individual {
                genome: m.genome.clone(),
                distance: Some(distance),
            }
        })
        .collect();
    Ok(Population {
        members,
        generation: population.generation,
    })
}

/// Breeds the next generation.
///
/// Selections are copied in unchanged first. The remaining slots are filled
/// by pairs of tournament winners, crossed over with `crossover_prob` and
/// each mutated with `mutation_prob`.
pub fn next_generation<R: Rng + ?Sized>(
    population: &Population,
    selections: &[Expr],
    config: &EvolutionConfig,
    rng: &mut R,
) -> Result<Population, EvolutionError> {
    config.validate()?;
    if selections.is_empty() {
        return Err(EvolutionError::EmptySelection);
    }
    if let Some(index) = population.members.iter().position(|m| m.distance.is_none()) {
        return Err(EvolutionError::MissingFitness { index });
    }

    let size = config.population_size;
    let hard_max = config.growth.hard_max_depth();
    let mut next: Vec<Individual> = selections
        .iter()
        .take(size)
        .map(|s| Individual::new(s.clone()))
        .collect();

    while next.len() < size {
        let a = &population.members[tournament(population, config.tournament_size, rng)].genome;
        let b = &population.members[tournament(population, config.tournament_size, rng)].genome;
        let (mut c1, mut c2) = if rng.random_bool(config.crossover_prob) {
            crossover(a, b, hard_max, rng)
        } else {
            (a.clone(), b.clone())
        };
        if rng.random_bool(config.mutation_prob) {
            c1 = mutate(&c1, &config.growth, rng);
        }
        if rng.random_bool(config.mutation_prob) {
            c2 = mutate(&c2, &config.growth, rng);
        }
        next.push(Individual::new(c1));
        if next.len() < size {
            next.push(Individual::new(c2));
        }
    }

    Ok(Population {
        members: next,
        generation: population.generation + 1,
    })
}

/// Index of the lowest-distance entrant among `size` uniform draws (with
/// replacement). Ties go to the lower index.
fn tournament<R: Rng + ?Sized>(population: &Population, size: usize, rng: &mut R) -> usize {
    let n = population.members.len();
    let distance = |i: usize| population.members[i].distance.unwrap_or(f64::INFINITY);
    let mut best = rng.random_range(0..n);
    for _ in 1..size {
        let challenger = rng.random_range(0..n);
        let better = distance(challenger)
            .total_cmp(&distance(best))
            .then(challenger.cmp(&best))
            .is_lt();
        if better {
            best = challenger;
        }
    }
    best
}

/// Replaces the worst member with `expr` and returns the new population with
/// the replaced index. The worst member is the highest-distance one (ties to
/// the lower index); with no fitness assigned it is chosen uniformly.
pub fn inject<R: Rng + ?Sized>(population: &Population, expr: &Expr, rng: &mut R) -> (Population, usize) {
    let mut out = population.clone();
    if out.members.is_empty() {
        return (out, 0);
    }
    let index = if population.has_fitness() {
        let mut worst = None::<(usize, f64)>;
        for (i, m) in population.members.iter().enumerate() {
            if let Some(d) = m.distance {
                if worst.is_none_or(|(_, w)| d.total_cmp(&w).is_gt()) {
                    worst = Some((i, d));
                }
            }
        }
        worst.map(|(i, _)| i).expect("has_fitness checked")
    } else {
        rng.random_range(0..population.members.len())
    };
    out.members[index] = Individual::new(expr.clone());
    (out, index)
}
