//! Genetic-programming core for interactive evolution of vertex-shader
//! perturbations.
//!
//! A genome is a scalar [`Expr`] over the current vertex coordinates and an
//! animation clock. Every vertex of a model is displaced by the same delta on
//! all three axes: `position.xyz += <expr>`. Users pick the perturbations they
//! like, and every other member of the population gets a fitness from its
//! least-squares distance to those picks, sampled over a fixed grid.
//!
//! This crate is `no_std` (it needs `alloc`) and does no IO. Randomness always
//! comes from a caller-owned [`rand::Rng`], so every run is reproducible from
//! its seed.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod evolution;
pub mod expr;
pub mod genetic;
pub mod grow;
pub mod shader;
pub mod sim;
pub mod text;

mod eval;

pub use eval::{evaluate, Env};
pub use evolution::{
    assign_fitness, build_sample_grid, display_subset, expression_distance, init_population, inject,
    next_generation, ConfigError, EvolutionConfig, EvolutionError, Individual, Population,
    SampleGrid,
};
pub use expr::{BinaryOp, Expr, Metrics, Operator, Terminal, UnaryOp};
pub use genetic::{crossover, mutate, MAX_RETRIES};
pub use grow::{random_expression, GrowthParams};
pub use shader::{emit_expression, emit_vertex_shader, lint_shader, ShaderArtifact, Violation};
pub use sim::{
    run_simulation, seeded_rng, simulated_user_pick, ConvergenceTrace, SeededRng, SimError, TraceRow,
};
pub use text::{parse, serialize, ParseError};
