//! Round-over-round quality improvement: per-round means for the four
//! scoring dimensions with response improvement on vs. off.
//!
//! ```bash
//! cargo run -p art-framework --example quality_improvement
//! ```

use art_framework::experiments::{
    run_quality_rounds, ExperimentKind, ExperimentSpec, QUALITY_METRICS,
};

fn main() -> art_framework::Result<()> {
    for improvement in [true, false] {
        let spec = ExperimentSpec {
            seeds: (0..30).collect(),
            improvement,
            ..ExperimentSpec::new(ExperimentKind::QualityRounds)
        };
        let out = run_quality_rounds(&spec)?;

        println!("improvement {}:", if improvement { "on" } else { "off" });
        print!("{:>14}", "round");
        let rounds = out.per_round_means["overall"].len();
        for r in 0..rounds {
            print!("{:>10}", r + 1);
        }
        println!();
        for metric in QUALITY_METRICS {
            print!("{metric:>14}");
            for value in &out.per_round_means[metric] {
                print!("{value:>10.2}");
            }
            println!();
        }
        println!();
    }
    Ok(())
}
