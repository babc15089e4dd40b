//! Event-sourced persistence: journal a tournament to an append-only log,
//! then rebuild the agent states by replaying the log and check they match
//! the live registry exactly.
//!
//! ```bash
//! cargo run -p art-framework --example event_log_replay
//! ```

use std::sync::{Arc, Mutex};

use art_framework::agent::{AgentConfig, AgentRegistry};
use art_framework::mock::MockAgent;
use art_framework::persistence::EventStore;
use art_framework::tournament::{TournamentConfig, TournamentEngine};

fn main() -> art_framework::Result<()> {
    let dir = std::env::temp_dir().join(format!("art-replay-{}", std::process::id()));
    let store = Arc::new(Mutex::new(EventStore::open(&dir)?));

    let mut registry = AgentRegistry::new();
    for (name, quality) in [("Alpha", 0.85), ("Beta", 0.75), ("Gamma", 0.65)] {
        let config = AgentConfig::new(name, "mock");
        registry.register(
            Arc::new(MockAgent::new(config.clone(), quality, 11)),
            &config,
        )?;
    }
    let engine = TournamentEngine::new(Arc::new(Mutex::new(registry))).with_store(store.clone());
    engine.run_tournament(
        "Explain photosynthesis",
        "replay-demo",
        &TournamentConfig::default(),
    )?;

    let events = store.lock().unwrap().events()?;
    println!("journal at {} ({} events):", dir.display(), events.len());
    for event in &events {
        println!(
            "  #{:<3} {:<22} checksum ok: {}",
            event.sequence_number,
            event.event_kind,
            event.verify()
        );
    }

    let replayed = store.lock().unwrap().load_agent_states()?;
    let live = engine.registry().lock().unwrap().states();
    assert_eq!(replayed, live, "replayed states must equal live states");
    println!(
        "\nreplayed {} agent states, identical to live registry:",
        replayed.len()
    );
    for state in &replayed {
        println!(
            "  {:<8} rating {:>7.2}  w/l/d {}/{}/{}",
            state.agent_id, state.rating.value, state.wins, state.losses, state.draws
        );
    }

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
