//! Implement the `Agent` trait yourself: a tiny rule-based agent that
//! competes against mock agents in a tournament.
//!
//! ```bash
//! cargo run -p art-framework --example custom_agent
//! ```

use std::sync::{Arc, Mutex};

use art_framework::agent::{Agent, AgentConfig, AgentRegistry, Critique, Response};
use art_framework::mock::MockAgent;
use art_framework::scoring::QualityScores;
use art_framework::tournament::{TournamentConfig, TournamentEngine};

/// Always answers with a template and judges others by response length.
struct TemplateAgent {
    id: String,
    name: String,
}

impl Agent for TemplateAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn generate_response(
        &self,
        query: &str,
        query_id: &str,
        _context: Option<&str>,
        round_index: u32,
    ) -> art_framework::Result<Response> {
        Ok(Response {
            agent_id: self.id.clone(),
            query_id: query_id.to_string(),
            content: format!("According to standard references: {query}"),
            confidence: 0.6,
            round_index,
            latent_quality: None,
        })
    }

    fn critique_response(
        &self,
        _query: &str,
        response: &Response,
        _round_index: u32,
    ) -> art_framework::Result<Critique> {
        // crude heuristic: longer answers score higher, capped at 90
        let score = (response.content.len() as f64 / 2.0).min(90.0);
        Ok(Critique {
            evaluator_id: self.id.clone(),
            target_agent_id: response.agent_id.clone(),
            scores: QualityScores::uniform(score),
            commentary: format!("length-based score {score:.0}"),
        })
    }

    fn improve_response(
        &self,
        response: &Response,
        _critiques: &[Critique],
    ) -> art_framework::Result<Response> {
        let mut improved = response.clone();
        improved.content.push_str(" (revised)");
        improved.round_index += 1;
        Ok(improved)
    }
}

fn main() -> art_framework::Result<()> {
    let mut registry = AgentRegistry::new();
    let config = AgentConfig::new("Rulebook", "template-v1");
    registry.register(
        Arc::new(TemplateAgent {
            id: "rulebook".into(),
            name: "Rulebook".into(),
        }),
        &config,
    )?;
    for (name, quality) in [("Alpha", 0.85), ("Beta", 0.75)] {
        let config = AgentConfig::new(name, "mock");
        registry.register(
            Arc::new(MockAgent::new(config.clone(), quality, 3)),
            &config,
        )?;
    }

    let engine = TournamentEngine::new(Arc::new(Mutex::new(registry)));
    let result = engine.run_tournament(
        "How do vaccines work?",
        "custom-agent-demo",
        &TournamentConfig::default(),
    )?;

    for (agent_id, rating) in &result.final_rankings {
        println!("{agent_id:<10} {rating:.1}");
    }
    println!("winner: {}", result.winner_agent_id);
    Ok(())
}
