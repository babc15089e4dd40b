//! Agent interface contract, persistent agent state, and the registry.
//!
//! The [`Agent`] trait is the extension point for real LLM backends. Only
//! deterministic mock implementations live in this crate (see [`crate::mock`]);
//! the contract itself (three operations plus failure semantics) is what an
//! adapter must satisfy.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elo::Rating;
use crate::error::{ArtError, Result};
use crate::scoring::QualityScores;

/// Upper bound on retained (query, response-summary) records per agent.
pub const CONTEXT_HISTORY_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub name: String,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl AgentConfig {
    pub fn new(name: impl Into<String>, model_name: impl Into<String>) -> Self {
        AgentConfig {
            name: name.into(),
            model_name: model_name.into(),
            description: None,
        }
    }
}

/// An agent's answer to a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub agent_id: String,
    pub query_id: String,
    pub content: String,
    /// Self-reported confidence in [0, 1].
    pub confidence: f64,
    pub round_index: u32,
    /// Mock-only ground truth on the 0-100 scale. Hidden from scoring paths;
    /// real adapters leave it unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_quality: Option<f64>,
}

/// One agent's scored evaluation of another agent's response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Critique {
    pub evaluator_id: String,
    pub target_agent_id: String,
    pub scores: QualityScores,
    pub commentary: String,
}

/// The standardized agent interface.
///
/// `round_index` keys deterministic mock noise; adapters for real backends
/// may ignore it. Failures surface as [`ArtError::Agent`] so the tournament
/// can exclude the agent for the round instead of aborting.
pub trait Agent: Send + Sync {
    fn id(&self) -> &str;

    fn name(&self) -> &str;

    /// Produce a response to the query (with optional extra context).
    fn generate_response(
        &self,
        query: &str,
        query_id: &str,
        context: Option<&str>,
        round_index: u32,
    ) -> Result<Response>;

    /// Evaluate another agent's response. Self-critique is rejected.
    fn critique_response(
        &self,
        query: &str,
        response: &Response,
        round_index: u32,
    ) -> Result<Critique>;

    /// Refine a response based on the critiques it received.
    fn improve_response(&self, response: &Response, critiques: &[Critique]) -> Result<Response>;

    /// Produce a new response using several source responses as context.
    /// Backends without this capability return an agent error; callers fall
    /// back to a non-generative consensus strategy.
    fn synthesize(&self, _query: &str, _query_id: &str, _sources: &[Response]) -> Result<Response> {
        Err(ArtError::agent(self.id(), "synthesis not supported"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub query: String,
    pub response_summary: String,
}

/// Running mean quality for one query category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetric {
    pub count: u64,
    pub mean_quality: f64,
}

impl CategoryMetric {
    pub fn observe(&mut self, quality: f64) {
        self.count += 1;
        self.mean_quality += (quality - self.mean_quality) / self.count as f64;
    }
}

/// Persistent per-agent state maintained by the registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub agent_id: String,
    pub name: String,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub rating: Rating,
    pub wins: u64,
    pub losses: u64,
    pub draws: u64,
    #[serde(default)]
    pub context_history: VecDeque<ContextEntry>,
    #[serde(default)]
    pub category_metrics: BTreeMap<String, CategoryMetric>,
}

impl AgentState {
    pub fn new(agent_id: impl Into<String>, config: &AgentConfig) -> Self {
        AgentState {
            agent_id: agent_id.into(),
            name: config.name.clone(),
            model_name: config.model_name.clone(),
            description: config.description.clone(),
            rating: Rating::default(),
            wins: 0,
            losses: 0,
            draws: 0,
            context_history: VecDeque::new(),
            category_metrics: BTreeMap::new(),
        }
    }

    pub fn push_context(&mut self, query: &str, response_summary: &str) {
        if self.context_history.len() == CONTEXT_HISTORY_LIMIT {
            self.context_history.pop_front();
        }
        self.context_history.push_back(ContextEntry {
            query: query.to_string(),
            response_summary: response_summary.to_string(),
        });
    }

    pub fn observe_category(&mut self, category: &str, quality: f64) {
        self.category_metrics
            .entry(category.to_string())
            .or_insert(CategoryMetric {
                count: 0,
                mean_quality: 0.0,
            })
            .observe(quality);
    }
}

/// Derive the opaque agent identifier from its display name.
pub fn agent_id_for_name(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

pub struct AgentEntry {
    pub agent: Arc<dyn Agent>,
    pub state: AgentState,
}

/// Registry of agents and their mutable state. Single writer; callers wrap
/// it in a mutex when shared across tournaments.
#[derive(Default)]
pub struct AgentRegistry {
    entries: BTreeMap<String, AgentEntry>,
}

impl AgentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register an agent. The new state starts at rating 1500.0 with zero
    /// history. Duplicate names conflict.
    pub fn register(&mut self, agent: Arc<dyn Agent>, config: &AgentConfig) -> Result<AgentState> {
        if config.name.is_empty() {
            return Err(ArtError::Validation("agent name must be non-empty".into()));
        }
        let id = agent.id().to_string();
        if self.entries.contains_key(&id)
            || self.entries.values().any(|e| e.state.name == config.name)
        {
            return Err(ArtError::Conflict(format!(
                "agent name '{}' is already registered",
                config.name
            )));
        }
        let state = AgentState::new(id.clone(), config);
        self.entries.insert(
            id,
            AgentEntry {
                agent,
                state: state.clone(),
            },
        );
        Ok(state)
    }

    pub fn get(&self, agent_id: &str) -> Option<&AgentEntry> {
        self.entries.get(agent_id)
    }

    pub fn state_mut(&mut self, agent_id: &str) -> Option<&mut AgentState> {
        self.entries.get_mut(agent_id).map(|e| &mut e.state)
    }

    /// Entries in agent-id order.
    pub fn entries(&self) -> impl Iterator<Item = &AgentEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn states(&self) -> Vec<AgentState> {
        self.entries.values().map(|e| e.state.clone()).collect()
    }

    /// Replace an agent's state wholesale (used by event-log recovery).
    pub fn restore_state(&mut self, state: AgentState) -> Result<()> {
        match self.entries.get_mut(&state.agent_id) {
            Some(entry) => {
                entry.state = state;
                Ok(())
            }
            None => Err(ArtError::NotFound(format!(
                "agent '{}' not registered",
                state.agent_id
            ))),
        }
    }
}
