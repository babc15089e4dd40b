//! Tournament-based multi-agent response evaluation.
//!
//! Multiple response-generating agents compete on a query, cross-evaluate
//! each other's answers, receive extended-ELO rating updates, and a
//! consensus engine synthesizes a final response. Exposed as a library
//! (this crate), a REST service ([`service`]), and an experiments CLI
//! (the `art` binary).
//!
//! ```
//! use std::sync::{Arc, Mutex};
//! use art_framework::agent::{AgentConfig, AgentRegistry};
//! use art_framework::mock::MockAgent;
//! use art_framework::tournament::{TournamentConfig, TournamentEngine};
//!
//! let mut registry = AgentRegistry::new();
//! for (name, quality, seed) in [("Expert-1", 0.85, 1), ("Expert-2", 0.82, 2)] {
//!     let config = AgentConfig::new(name, "mock");
//!     registry.register(Arc::new(MockAgent::new(config.clone(), quality, seed)), &config).unwrap();
//! }
//! let engine = TournamentEngine::new(Arc::new(Mutex::new(registry)));
//! let result = engine
//!     .run_tournament("Explain quantum computing", "qc-001", &TournamentConfig::default())
//!     .unwrap();
//! println!("winner: {}", result.winner_agent_id);
//! ```

pub mod agent;
pub mod consensus;
pub mod elo;
pub mod error;
pub mod experiments;
pub mod hash;
pub mod mock;
pub mod persistence;
pub mod scoring;
pub mod service;
pub mod tournament;

pub use error::{ArtError, Result};
