//! Rating convergence over chained tournaments: runs the convergence
//! experiment on a handful of seeds and prints the across-seed mean rating
//! of each agent after every tournament.
//!
//! ```bash
//! cargo run -p art-framework --example rating_convergence
//! ```

use art_framework::experiments::{run_convergence, ExperimentKind, ExperimentSpec};

fn main() -> art_framework::Result<()> {
    let spec = ExperimentSpec {
        seeds: (0..25).collect(),
        ..ExperimentSpec::new(ExperimentKind::Convergence)
    };
    let out = run_convergence(&spec)?;

    let agents: Vec<&String> = out.mean_trajectory.keys().collect();
    print!("{:>10}", "tournament");
    for agent in &agents {
        print!("{agent:>10}");
    }
    println!();
    for t in 0..spec.tournaments as usize {
        print!("{:>10}", t + 1);
        for agent in &agents {
            print!("{:>10.1}", out.mean_trajectory[agent.as_str()][t]);
        }
        println!();
    }
    Ok(())
}
