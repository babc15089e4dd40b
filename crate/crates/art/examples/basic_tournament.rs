//! Run a single tournament between three mock agents and print the
//! rankings and the consensus response.
//!
//! ```bash
//! cargo run -p art-framework --example basic_tournament
//! ```

use std::sync::{Arc, Mutex};

use art_framework::agent::{AgentConfig, AgentRegistry};
use art_framework::mock::MockAgent;
use art_framework::tournament::{TournamentConfig, TournamentEngine};

fn main() -> art_framework::Result<()> {
    let mut registry = AgentRegistry::new();
    for (name, quality) in [("Alpha", 0.85), ("Beta", 0.75), ("Gamma", 0.65)] {
        let config = AgentConfig::new(name, "mock");
        registry.register(
            Arc::new(MockAgent::new(config.clone(), quality, 42)),
            &config,
        )?;
    }

    let engine = TournamentEngine::new(Arc::new(Mutex::new(registry)));
    let result = engine.run_tournament(
        "What causes climate change?",
        "demo-query",
        &TournamentConfig::default(),
    )?;

    println!("tournament {}", result.tournament_id);
    println!("final rankings:");
    for (agent_id, rating) in &result.final_rankings {
        println!("  {agent_id:<8} {rating:.1}");
    }
    println!("winner: {}", result.winner_agent_id);
    println!(
        "consensus ({}): quality {:.1}",
        result.consensus.strategy, result.consensus.quality_estimate
    );
    println!("  {}", result.consensus.content);
    Ok(())
}
