//! Compare all four consensus strategies on the same finished tournament
//! transcript.
//!
//! ```bash
//! cargo run -p art-framework --example consensus_strategies
//! ```

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use art_framework::agent::{Agent, AgentConfig, AgentRegistry};
use art_framework::consensus::ConsensusStrategy;
use art_framework::mock::MockAgent;
use art_framework::tournament::{consensus_for_round, TournamentConfig, TournamentEngine};

fn main() -> art_framework::Result<()> {
    let mut registry = AgentRegistry::new();
    for (name, quality) in [("Alpha", 0.85), ("Beta", 0.75), ("Gamma", 0.65)] {
        let config = AgentConfig::new(name, "mock");
        registry.register(
            Arc::new(MockAgent::new(config.clone(), quality, 7)),
            &config,
        )?;
    }
    let engine = TournamentEngine::new(Arc::new(Mutex::new(registry)));

    let query = "Summarize the causes of inflation";
    let config = TournamentConfig::default();
    let result = engine.run_tournament(query, "strategies-demo", &config)?;

    let final_round = result.rounds.last().expect("tournament has rounds");
    let ratings: BTreeMap<String, f64> = result.final_rankings.iter().cloned().collect();
    let agents: Vec<(String, Arc<dyn Agent>)> = {
        let registry = engine.registry().lock().unwrap();
        registry
            .entries()
            .map(|e| (e.state.agent_id.clone(), e.agent.clone()))
            .collect()
    };

    for strategy in ConsensusStrategy::ALL {
        let consensus = consensus_for_round(
            query,
            &result.query_id,
            final_round,
            &ratings,
            &agents,
            strategy,
            &config,
        )?;
        println!(
            "{:<24} quality {:>6.2}  sources {:?}",
            consensus.strategy.to_string(),
            consensus.quality_estimate,
            consensus.source_agent_ids
        );
    }
    Ok(())
}
