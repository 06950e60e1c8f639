//! Server-side pieces of the interactive shader-evolution platform: the
//! file-backed store, the session service and its REST facade, and CSV output
//! for headless simulation runs. The algorithms live in [`evoshade_core`].

pub mod http;
pub mod service;
pub mod store;
pub mod trace;

pub use evoshade_core as core;
pub use service::{CandidateView, ConfigOverrides, Service, ServiceError, SessionView};
pub use store::{Store, StoreError, TransformationRecord};
