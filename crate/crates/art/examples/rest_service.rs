//! Stand up the HTTP service in-process, register agents, submit a query,
//! and poll it to completion — the same flow an external client would use.
//!
//! ```bash
//! cargo run -p art-framework --example rest_service
//! ```

use std::future::IntoFuture;

use art_framework::service::{build_state, router, ServeOptions};
use serde_json::{json, Value};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let state = build_state(&ServeOptions::default())?;
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    tokio::spawn(axum::serve(listener, router(state)).into_future());

    let client = reqwest::Client::new();

    for (name, quality) in [("Alpha", 0.85), ("Beta", 0.75), ("Gamma", 0.65)] {
        let status = client
            .post(format!("{base}/agents"))
            .json(&json!({ "name": name, "quality": quality }))
            .send()
            .await?
            .status();
        println!("POST /agents {name} -> {status}");
    }

    let submitted: Value = client
        .post(format!("{base}/queries"))
        .json(&json!({ "content": "What causes climate change?" }))
        .send()
        .await?
        .json()
        .await?;
    let query_id = submitted["query_id"].as_str().unwrap().to_string();
    println!("submitted query {query_id}");

    loop {
        let status: Value = client
            .get(format!("{base}/queries/{query_id}"))
            .send()
            .await?
            .json()
            .await?;
        match status["status"].as_str().unwrap() {
            "completed" => {
                println!(
                    "completed: winner {}, rankings {}",
                    status["result"]["winner_agent_id"], status["result"]["final_rankings"]
                );
                break;
            }
            "failed" => {
                println!("failed: {}", status["error"]);
                break;
            }
            other => {
                println!("status {other}, polling...");
                tokio::time::sleep(std::time::Duration::from_millis(50)).await;
            }
        }
    }

    let leaderboard: Value = client
        .get(format!("{base}/leaderboard"))
        .send()
        .await?
        .json()
        .await?;
    println!("leaderboard: {leaderboard}");
    Ok(())
}
