//! Interactive evolution sessions.
//!
//! Each session owns a population and a seeded random source. Candidate ids
//! are minted whenever the displayed set changes (`c<epoch>-<slot>`), so a
//! selection made against an older display is rejected as stale. Sessions are
//! kept in memory and dropped after an hour without requests.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use evoshade_core::{
    assign_fitness, display_subset, emit_vertex_shader, init_population, inject, next_generation,
    parse, seeded_rng, serialize, EvolutionConfig, Expr, GrowthParams, Population, SampleGrid,
    SeededRng,
};
use serde::{Deserialize, Serialize};

use crate::store::{Store, StoreError};

pub const SESSION_IDLE_TTL: Duration = Duration::from_secs(60 * 60);

/// Limits on client-supplied configuration, so one request cannot ask for an
/// arbitrarily expensive session.
const MAX_POPULATION: usize = 10_000;
const MAX_GRID_POINTS_PER_AXIS: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    Validation(String),
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("candidate `{0}` is not part of the current display")]
    StaleCandidate(String),
    #[error(transparent)]
    Store(StoreError),
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Validation(v) => ServiceError::Validation(v.join("; ")),
            StoreError::NotFound { kind, id } => ServiceError::NotFound { kind, id },
            other => ServiceError::Store(other),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateView {
    pub candidate_id: String,
    pub expression: String,
    pub shader: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub generation: u64,
    pub candidates: Vec<CandidateView>,
}

/// Optional overrides of the default evolution configuration.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub population_size: Option<usize>,
    pub display_count: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub tournament_size: Option<usize>,
    pub growth: Option<GrowthOverrides>,
    pub grid_points_per_axis: Option<usize>,
    pub grid_interval: Option<(f64, f64)>,
    pub per_point_cap: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthOverrides {
    pub min_init_depth: Option<usize>,
    pub max_init_depth: Option<usize>,
    pub hard_max_depth: Option<usize>,
    pub terminal_probability: Option<f64>,
}

impl ConfigOverrides {
    pub fn apply(&self, base: &EvolutionConfig) -> Result<EvolutionConfig, ServiceError> {
        let mut config = base.clone();
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field { config.$field = v; }
            )*};
        }
        set!(
            population_size,
            display_count,
            crossover_prob,
            mutation_prob,
            tournament_size,
            grid_points_per_axis,
            grid_interval,
            per_point_cap
        );
        if let Some(g) = &self.growth {
            let base = &config.growth;
            config.growth = GrowthParams::new(
                g.min_init_depth.unwrap_or(base.min_init_depth()),
                g.max_init_depth.unwrap_or(base.max_init_depth()),
                g.hard_max_depth.unwrap_or(base.hard_max_depth()),
                g.terminal_probability.unwrap_or(base.terminal_probability()),
            )
            .map_err(|e| ServiceError::Validation(e.to_string()))?;
        }
        config
            .validate()
            .map_err(|e| ServiceError::Validation(e.to_string()))?;
        if config.population_size > MAX_POPULATION {
            return Err(ServiceError::Validation(format!(
                "population_size may not exceed {MAX_POPULATION}"
            )));
        }
        if config.grid_points_per_axis > MAX_GRID_POINTS_PER_AXIS {
            return Err(ServiceError::Validation(format!(
                "grid_points_per_axis may not exceed {MAX_GRID_POINTS_PER_AXIS}"
            )));
        }
        Ok(config)
    }
}

struct Candidate {
    id: String,
    member_index: usize,
    genome: Expr,
}

struct Session {
    id: String,
    config: EvolutionConfig,
    grid: SampleGrid,
    population: Population,
    rng: SeededRng,
    epoch: u64,
    candidates: Vec<Candidate>,
    last_access: Instant,
}

impl Session {
    fn view(&self) -> SessionView {
        SessionView {
            session_id: self.id.clone(),
            generation: self.population.generation,
            candidates: self
                .candidates
                .iter()
                .map(|c| CandidateView {
                    candidate_id: c.id.clone(),
                    expression: serialize(&c.genome),
                    shader: emit_vertex_shader(&c.genome).glsl_source,
                })
                .collect(),
        }
    }

    /// Replaces the displayed set, minting fresh candidate ids. `first`, if
    /// given, is shown in the first slot.
    fn refresh(&mut self, first: Option<usize>) {
        let display_count = self.config.display_count;
        let mut shown: Vec<(usize, Expr)> = display_subset(&self.population, &self.config)
            .into_iter()
            .map(|(i, ind)| (i, ind.genome))
            .collect();
        if let Some(at) = first {
            let genome = self.population.members[at].genome.clone();
            shown.retain(|(i, _)| *i != at);
            // Members that merely duplicate the pinned genome go last.
            shown.sort_by_key(|(_, g)| *g == genome);
            shown.insert(0, (at, genome));
            shown.truncate(display_count);
        }
        self.epoch += 1;
        let epoch = self.epoch;
        self.candidates = shown
            .into_iter()
            .enumerate()
            .map(|(slot, (member_index, genome))| Candidate {
                id: format!("c{epoch}-{slot}"),
                member_index,
                genome,
            })
            .collect();
    }

    fn candidate(&self, id: &str) -> Result<&Candidate, ServiceError> {
        self.candidates
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| ServiceError::StaleCandidate(id.to_string()))
    }
}

/// The session registry plus the shared store.
pub struct Service {
    store: Arc<Store>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    idle_ttl: Duration,
    defaults: EvolutionConfig,
}

impl Service {
    pub fn new(store: Arc<Store>) -> Service {
        Service {
            store,
            sessions: Mutex::new(HashMap::new()),
            idle_ttl: SESSION_IDLE_TTL,
            defaults: EvolutionConfig::default(),
        }
    }

    pub fn with_idle_ttl(mut self, ttl: Duration) -> Service {
        self.idle_ttl = ttl;
        self
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    pub fn create_session(
        &self,
        overrides: Option<&ConfigOverrides>,
        seed: Option<u64>,
    ) -> Result<SessionView, ServiceError> {
        let config = match overrides {
            Some(o) => o.apply(&self.defaults)?,
            None => self.defaults.clone(),
        };
        let grid = SampleGrid::new(&config).map_err(|e| ServiceError::Validation(e.to_string()))?;
        let mut rng = seeded_rng(seed.unwrap_or_else(rand::random));
        let population =
            init_population(&config, &mut rng).map_err(|e| ServiceError::Validation(e.to_string()))?;
        let mut session = Session {
            id: uuid::Uuid::new_v4().to_string(),
            config,
            grid,
            population,
            rng,
            epoch: 0,
            candidates: Vec::new(),
            last_access: Instant::now(),
        };
        session.refresh(None);
        let view = session.view();
        let mut sessions = self.sessions.lock().expect("registry lock poisoned");
        self.evict_idle(&mut sessions);
        sessions.insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(view)
    }

    pub fn candidates(&self, session_id: &str) -> Result<SessionView, ServiceError> {
        self.with_session(session_id, |s| Ok(s.view()))
    }

    /// Assigns fitness from the selected candidates, breeds the next
    /// generation and displays a fresh subset.
    pub fn step(&self, session_id: &str, selected: &[String]) -> Result<SessionView, ServiceError> {
        if selected.is_empty() {
            return Err(ServiceError::Validation("select at least one candidate".into()));
        }
        self.with_session(session_id, |s| {
            let mut picks: Vec<Expr> = Vec::with_capacity(selected.len());
            let mut seen: Vec<&str> = Vec::with_capacity(selected.len());
            for id in selected {
                let candidate = s.candidate(id)?;
                if !seen.contains(&id.as_str()) {
                    seen.push(id);
                    picks.push(candidate.genome.clone());
                }
            }
            let scored = assign_fitness(&s.population, &picks, &s.grid)
                .map_err(|e| ServiceError::Validation(e.to_string()))?;
            let next = next_generation(&scored, &picks, &s.config, &mut s.rng)
                .map_err(|e| ServiceError::Validation(e.to_string()))?;
            s.population = next;
            s.refresh(None);
            Ok(s.view())
        })
    }

    /// Saves a displayed candidate's expression to the store.
    pub fn save(&self, session_id: &str, candidate_id: &str, name: &str) -> Result<String, ServiceError> {
        if name.trim().is_empty() {
            return Err(ServiceError::Validation("name must not be empty".into()));
        }
        let expression = self.with_session(session_id, |s| Ok(serialize(&s.candidate(candidate_id)?.genome)))?;
        Ok(self.store.put_transformation(name, &expression, None)?)
    }

    /// Injects a stored transformation into the session's population and
    /// shows it in the first display slot.
    pub fn inject(&self, session_id: &str, transformation_id: &str) -> Result<SessionView, ServiceError> {
        // Resolve the session first so an unknown session reports as such.
        self.with_session(session_id, |_| Ok(()))?;
        let record = self.store.get_transformation(transformation_id)?;
        let expr = parse(&record.expression_text).map_err(|e| {
            ServiceError::Store(StoreError::Validation(vec![format!("stored expression: {e}")]))
        })?;
        self.with_session(session_id, |s| {
            let (population, at) = inject(&s.population, &expr, &mut s.rng);
            s.population = population;
            s.refresh(Some(at));
            Ok(s.view())
        })
    }

    /// Canonical text of every population member, in order.
    pub fn population(&self, session_id: &str) -> Result<Vec<String>, ServiceError> {
        self.with_session(session_id, |s| {
            Ok(s.population.members.iter().map(|m| serialize(&m.genome)).collect())
        })
    }

    /// Member indices behind the current candidates, in display order.
    pub fn candidate_members(&self, session_id: &str) -> Result<Vec<usize>, ServiceError> {
        self.with_session(session_id, |s| Ok(s.candidates.iter().map(|c| c.member_index).collect()))
    }

    pub fn session_count(&self) -> usize {
        let mut sessions = self.sessions.lock().expect("registry lock poisoned");
        self.evict_idle(&mut sessions);
        sessions.len()
    }

    fn with_session<T>(
        &self,
        session_id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let handle = {
            let mut sessions = self.sessions.lock().expect("registry lock poisoned");
            self.evict_idle(&mut sessions);
            sessions.get(session_id).cloned()
        };
        let handle = handle.ok_or_else(|| ServiceError::NotFound {
            kind: "session",
            id: session_id.to_string(),
        })?;
        let mut session = handle.lock().expect("session lock poisoned");
        session.last_access = Instant::now();
        f(&mut session)
    }

    fn evict_idle(&self, sessions: &mut HashMap<String, Arc<Mutex<Session>>>) {
        let ttl = self.idle_ttl;
        // A session busy in another request is never idle.
        sessions.retain(|_, s| match s.try_lock() {
            Ok(s) => s.last_access.elapsed() < ttl,
            Err(_) => true,
        });
    }
}
