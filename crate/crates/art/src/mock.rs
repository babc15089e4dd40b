//! Deterministic mock agents used for all desk-scale experiments.
//!
//! Every mock output is a pure function of (seed, query, round, target):
//! noise streams are keyed by a stable 64-bit hash of that material and
//! drawn from ChaCha8, so repeated runs are bit-identical across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{agent_id_for_name, Agent, AgentConfig, Critique, Response};
use crate::error::{ArtError, Result};
use crate::hash::stable_hash;
use crate::scoring::QualityScores;

/// Half-width of the uniform noise on a mock's generated latent quality.
pub const GENERATION_NOISE: f64 = 10.0;
/// Half-width of the uniform noise a mock critic adds per dimension.
pub const CRITIC_NOISE: f64 = 5.0;
/// Fraction of the remaining headroom recovered per improvement step.
pub const IMPROVEMENT_GAIN: f64 = 0.15;
/// Headroom fraction gained by mock synthesis over its best input.
pub const SYNTHESIS_GAIN: f64 = 0.1;

fn rng_for(seed: u64, parts: &[&[u8]]) -> ChaCha8Rng {
    let seed_bytes = seed.to_le_bytes();
    let mut keyed = vec![&seed_bytes[..]];
    keyed.extend_from_slice(parts);
    ChaCha8Rng::seed_from_u64(stable_hash(&keyed))
}

/// A seeded stand-in for an LLM with a configurable base quality in [0, 1].
///
/// Generated responses carry a latent quality of `100*q` plus bounded
/// uniform noise; critics score a target's latent quality plus their own
/// bounded noise. Optional failure flags exercise the tournament's
/// exclusion semantics.
pub struct MockAgent {
    config: AgentConfig,
    agent_id: String,
    quality: f64,
    seed: u64,
    fail_generation: bool,
    fail_critique: bool,
}

impl MockAgent {
    pub fn new(config: AgentConfig, quality: f64, seed: u64) -> Self {
        let agent_id = agent_id_for_name(&config.name);
        MockAgent {
            config,
            agent_id,
            quality,
            seed,
            fail_generation: false,
            fail_critique: false,
        }
    }

    pub fn failing_generation(mut self) -> Self {
        self.fail_generation = true;
        self
    }

    pub fn failing_critique(mut self) -> Self {
        self.fail_critique = true;
        self
    }

    pub fn quality(&self) -> f64 {
        self.quality
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn latent_for(&self, query: &str, round_index: u32) -> f64 {
        let mut rng = rng_for(
            self.seed,
            &[
                b"generate",
                self.agent_id.as_bytes(),
                query.as_bytes(),
                &round_index.to_le_bytes(),
            ],
        );
        let noise = rng.gen_range(-GENERATION_NOISE..=GENERATION_NOISE);
        (100.0 * self.quality + noise).clamp(0.0, 100.0)
    }

    /// Latent quality of a response as seen by a critic; falls back to the
    /// self-reported confidence for responses without mock ground truth.
    fn target_latent(response: &Response) -> f64 {
        response
            .latent_quality
            .unwrap_or(response.confidence * 100.0)
            .clamp(0.0, 100.0)
    }
}

impl Agent for MockAgent {
    fn id(&self) -> &str {
        &self.agent_id
    }

    fn name(&self) -> &str {
        &self.config.name
    }

    fn generate_response(
        &self,
        query: &str,
        query_id: &str,
        _context: Option<&str>,
        round_index: u32,
    ) -> Result<Response> {
        if self.fail_generation {
            return Err(ArtError::agent(
                &self.agent_id,
                "simulated generation failure",
            ));
        }
        let latent = self.latent_for(query, round_index);
        let qhash = stable_hash(&[query.as_bytes()]);
        Ok(Response {
            agent_id: self.agent_id.clone(),
            query_id: query_id.to_string(),
            content: format!(
                "[{} r{round_index} q{qhash:016x}] {} perspective on the query",
                self.config.name, self.config.model_name
            ),
            confidence: latent / 100.0,
            round_index,
            latent_quality: Some(latent),
        })
    }

    fn critique_response(
        &self,
        query: &str,
        response: &Response,
        round_index: u32,
    ) -> Result<Critique> {
        if response.agent_id == self.agent_id {
            return Err(ArtError::InvalidArgument(format!(
                "agent '{}' cannot critique its own response",
                self.agent_id
            )));
        }
        if self.fail_critique {
            return Err(ArtError::agent(
                &self.agent_id,
                "simulated critique failure",
            ));
        }
        let latent = Self::target_latent(response);
        let mut rng = rng_for(
            self.seed,
            &[
                b"critique",
                self.agent_id.as_bytes(),
                query.as_bytes(),
                &round_index.to_le_bytes(),
                response.agent_id.as_bytes(),
            ],
        );
        let mut dim = || (latent + rng.gen_range(-CRITIC_NOISE..=CRITIC_NOISE)).clamp(0.0, 100.0);
        let scores = QualityScores {
            accuracy: dim(),
            coherence: dim(),
            completeness: dim(),
            relevance: dim(),
        };
        Ok(Critique {
            evaluator_id: self.agent_id.clone(),
            target_agent_id: response.agent_id.clone(),
            scores,
            commentary: format!(
                "{} assessed {} at round {round_index}",
                self.config.name, response.agent_id
            ),
        })
    }

    fn improve_response(&self, response: &Response, critiques: &[Critique]) -> Result<Response> {
        if critiques.is_empty() {
            return Err(ArtError::InvalidArgument(
                "improve_response requires at least one critique".into(),
            ));
        }
        let latent = Self::target_latent(response);
        let improved = (latent + IMPROVEMENT_GAIN * (100.0 - latent)).min(100.0);
        let round_index = response.round_index + 1;
        Ok(Response {
            agent_id: response.agent_id.clone(),
            query_id: response.query_id.clone(),
            content: format!(
                "{} [refined r{round_index} from {} critiques]",
                response.content,
                critiques.len()
            ),
            confidence: improved / 100.0,
            round_index,
            latent_quality: Some(improved),
        })
    }

    fn synthesize(&self, _query: &str, query_id: &str, sources: &[Response]) -> Result<Response> {
        if sources.is_empty() {
            return Err(ArtError::agent(&self.agent_id, "no sources to synthesize"));
        }
        if self.fail_generation {
            return Err(ArtError::agent(
                &self.agent_id,
                "simulated synthesis failure",
            ));
        }
        let best = sources
            .iter()
            .map(Self::target_latent)
            .fold(f64::NEG_INFINITY, f64::max);
        let latent = (best + SYNTHESIS_GAIN * (100.0 - best)).min(100.0);
        let attribution: Vec<&str> = sources.iter().map(|r| r.agent_id.as_str()).collect();
        let round_index = sources.iter().map(|r| r.round_index).max().unwrap_or(0);
        Ok(Response {
            agent_id: self.agent_id.clone(),
            query_id: query_id.to_string(),
            content: format!(
                "[{} synthesis of {}] merged answer",
                self.config.name,
                attribution.join("+")
            ),
            confidence: latent / 100.0,
            round_index,
            latent_quality: Some(latent),
        })
    }
}
