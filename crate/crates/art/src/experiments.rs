//! Desk-scale experiment harness over mock agents: rating convergence,
//! round-over-round quality improvement, and paired consensus-strategy
//! comparison. Each experiment emits CSV; fixed seed lists give
//! bit-identical output across runs and platforms.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentConfig, AgentRegistry};
use crate::consensus::ConsensusStrategy;
use crate::error::{ArtError, Result};
use crate::hash::stable_hash;
use crate::mock::MockAgent;
use crate::scoring;
use crate::tournament::{
    consensus_for_round, RoundRecord, TournamentConfig, TournamentEngine, TournamentResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    QualityRounds,
    ConsensusCompare,
}

/// Parameters of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub seeds: Vec<u64>,
    /// (name, base quality in [0, 1]) per agent.
    pub agents: Vec<(String, f64)>,
    /// Tournaments chained per seed (ratings persist across them).
    pub tournaments: u32,
    /// Response improvement between rounds (the quality-rounds experiment
    /// is run once with and once without it).
    pub improvement: bool,
    /// Strategies to compare; defaults to all four.
    pub strategies: Vec<ConsensusStrategy>,
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentSpec {
            experiment,
            seeds: (0..100).collect(),
            agents: vec![
                ("Alpha".to_string(), 0.85),
                ("Beta".to_string(), 0.75),
                ("Gamma".to_string(), 0.65),
            ],
            tournaments: 10,
            improvement: true,
            strategies: ConsensusStrategy::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(ArtError::Validation("seed list must be non-empty".into()));
        }
        if self.agents.len() < 2 {
            return Err(ArtError::Validation("at least 2 agents required".into()));
        }
        if self.tournaments < 1 {
            return Err(ArtError::Validation("tournaments must be >= 1".into()));
        }
        for (name, quality) in &self.agents {
            if name.is_empty() {
                return Err(ArtError::Validation("agent name must be non-empty".into()));
            }
            if !quality.is_finite() || !(0.0..=1.0).contains(quality) {
                return Err(ArtError::Validation(format!(
                    "quality for '{name}' must be in [0, 1], got {quality}"
                )));
            }
        }
        if self.strategies.is_empty() {
            return Err(ArtError::Validation(
                "at least one consensus strategy required".into(),
            ));
        }
        Ok(())
    }
}

/// Build a fresh engine for one seed; each agent's mock seed mixes the
/// experiment seed with the agent name.
fn engine_for_seed(spec: &ExperimentSpec, seed: u64) -> TournamentEngine {
    let mut registry = AgentRegistry::new();
    for (name, quality) in &spec.agents {
        let agent_seed = stable_hash(&[&seed.to_le_bytes(), name.as_bytes()]);
        let config = AgentConfig::new(name.clone(), "mock");
        let agent = MockAgent::new(config.clone(), *quality, agent_seed);
        registry
            .register(Arc::new(agent), &config)
            .expect("unique experiment agent names");
    }
    TournamentEngine::new(Arc::new(Mutex::new(registry)))
}

/// Map seeds to results concurrently, merging in seed order.
fn map_seeds<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(seeds.len().max(1));
    let mut out: Vec<Option<Result<T>>> = (0..seeds.len()).map(|_| None).collect();
    let chunk = seeds.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (slot_chunk, seed_chunk) in out.chunks_mut(chunk).zip(seeds.chunks(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (slot, &seed) in slot_chunk.iter_mut().zip(seed_chunk) {
                    *slot = Some(f(seed));
                }
            });
        }
    });
    out.into_iter()
        .map(|r| r.expect("all seeds visited"))
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Convergence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ConvergenceOutput {
    pub csv: String,
    /// Final rating per agent, one map per seed (in seed order).
    pub final_ratings: Vec<BTreeMap<String, f64>>,
    /// Across-seed mean rating per agent after each tournament.
    pub mean_trajectory: BTreeMap<String, Vec<f64>>,
}

/// Rating trajectories over chained tournaments, per seed and across-seed
/// means.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceOutput> {
    spec.validate()?;
    let config = TournamentConfig {
        num_tournaments: spec.tournaments,
        enable_response_improvement: spec.improvement,
        ..TournamentConfig::default()
    };

    let results: Vec<TournamentResult> = map_seeds(&spec.seeds, |seed| {
        let engine = engine_for_seed(spec, seed);
        engine.run_query(
            "convergence benchmark query",
            &format!("conv-{seed}"),
            &config,
        )
    })?;

    let agent_ids: Vec<String> = results[0]
        .rating_trajectory
        .first()
        .map(|p| p.ratings.keys().cloned().collect())
        .unwrap_or_default();

    let mut csv = String::from("series,seed,tournament,agent,rating\n");
    let mut mean_trajectory: BTreeMap<String, Vec<f64>> = agent_ids
        .iter()
        .map(|id| (id.clone(), vec![0.0; spec.tournaments as usize]))
        .collect();

    for (seed, result) in spec.seeds.iter().zip(&results) {
        for point in &result.rating_trajectory {
            for (agent, rating) in &point.ratings {
                csv.push_str(&format!(
                    "rating,{seed},{},{agent},{}\n",
                    point.tournament_index + 1,
                    fmt(*rating)
                ));
                mean_trajectory.get_mut(agent).expect("stable agent set")
                    [point.tournament_index as usize] += rating / spec.seeds.len() as f64;
            }
        }
    }
    for (agent, trajectory) in &mean_trajectory {
        for (t, rating) in trajectory.iter().enumerate() {
            csv.push_str(&format!(
                "mean_rating,,{},{agent},{}\n",
                t + 1,
                fmt(*rating)
            ));
        }
    }

    let final_ratings = results
        .iter()
        .map(|r| {
            r.rating_trajectory
                .last()
                .map(|p| p.ratings.clone())
                .unwrap_or_default()
        })
        .collect();

    Ok(ConvergenceOutput {
        csv,
        final_ratings,
        mean_trajectory,
    })
}

// ---------------------------------------------------------------------------
// Quality across rounds
// ---------------------------------------------------------------------------

pub const QUALITY_METRICS: [&str; 5] = [
    "accuracy",
    "coherence",
    "completeness",
    "relevance",
    "overall",
];

#[derive(Debug, Clone)]
pub struct QualityRoundsOutput {
    pub csv: String,
    /// `per_round_means[metric][round]`, metrics in [`QUALITY_METRICS`] order.
    pub per_round_means: BTreeMap<String, Vec<f64>>,
}

fn round_metric_means(round: &RoundRecord, weights: &scoring::ScoringWeights) -> Result<[f64; 5]> {
    let mut sums = [0.0; 5];
    let mut count = 0usize;
    for response in &round.responses {
        let received: Vec<_> = round
            .critiques
            .iter()
            .filter(|c| c.target_agent_id == response.agent_id)
            .map(|c| c.scores)
            .collect();
        if received.is_empty() {
            continue;
        }
        let agg = scoring::aggregate_critiques(&received)?;
        sums[0] += agg.accuracy;
        sums[1] += agg.coherence;
        sums[2] += agg.completeness;
        sums[3] += agg.relevance;
        sums[4] += scoring::composite(&agg, weights)?;
        count += 1;
    }
    if count == 0 {
        return Err(ArtError::InvalidArgument(
            "round has no scored responses".into(),
        ));
    }
    Ok(sums.map(|s| s / count as f64))
}

/// Per-round means for the four quality dimensions and the overall
/// composite, averaged across seeds.
pub fn run_quality_rounds(spec: &ExperimentSpec) -> Result<QualityRoundsOutput> {
    spec.validate()?;
    let config = TournamentConfig {
        enable_response_improvement: spec.improvement,
        ..TournamentConfig::default()
    };
    let rounds = config.rounds_per_tournament as usize;

    let per_seed: Vec<Vec<[f64; 5]>> = map_seeds(&spec.seeds, |seed| {
        let engine = engine_for_seed(spec, seed);
        let result =
            engine.run_tournament("quality benchmark query", &format!("qual-{seed}"), &config)?;
        result
            .rounds
            .iter()
            .map(|r| round_metric_means(r, &config.scoring_weights))
            .collect()
    })?;

    let mut per_round_means: BTreeMap<String, Vec<f64>> = QUALITY_METRICS
        .iter()
        .map(|m| (m.to_string(), vec![0.0; rounds]))
        .collect();
    for seed_rounds in &per_seed {
        for (r, metrics) in seed_rounds.iter().enumerate() {
            for (m, value) in QUALITY_METRICS.iter().zip(metrics) {
                per_round_means.get_mut(*m).unwrap()[r] += value / per_seed.len() as f64;
            }
        }
    }

    let mut csv = String::from("round,metric,mean_score\n");
    // row-major over rounds, indexing several metric vectors at once
    #[allow(clippy::needless_range_loop)]
    for r in 0..rounds {
        for metric in QUALITY_METRICS {
            csv.push_str(&format!(
                "{},{metric},{}\n",
                r + 1,
                fmt(per_round_means[metric][r])
            ));
        }
    }

    Ok(QualityRoundsOutput {
        csv,
        per_round_means,
    })
}

// ---------------------------------------------------------------------------
// Consensus strategy comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct StrategySummary {
    pub strategy: ConsensusStrategy,
    pub mean_quality: f64,
    pub std_dev: f64,
    /// Fraction of seeds where this strategy's quality estimate was the
    /// maximum among the compared strategies (ties count for all maxima).
    pub best_rate: f64,
}

#[derive(Debug, Clone)]
pub struct ConsensusCompareOutput {
    pub csv: String,
    pub summaries: Vec<StrategySummary>,
    /// Mean of the final round's individual composite scores, across seeds
    /// (the unfused baseline on the same transcripts).
    pub individual_mean: f64,
}

/// Run every requested strategy on identical tournament transcripts (same
/// seeds), so the comparison is paired.
pub fn run_consensus_compare(spec: &ExperimentSpec) -> Result<ConsensusCompareOutput> {
    spec.validate()?;
    if spec.agents.len() < 3 {
        return Err(ArtError::Validation(
            "consensus comparison needs at least 3 agents for a meaningful top-k".into(),
        ));
    }
    let config = TournamentConfig {
        enable_response_improvement: spec.improvement,
        ..TournamentConfig::default()
    };

    // per seed: (quality estimate per strategy, mean individual composite)
    let per_seed: Vec<(Vec<f64>, f64)> = map_seeds(&spec.seeds, |seed| {
        let engine = engine_for_seed(spec, seed);
        let result = engine.run_tournament(
            "consensus benchmark query",
            &format!("cons-{seed}"),
            &config,
        )?;
        let final_round = result.rounds.last().expect("at least one round");
        let ratings: BTreeMap<String, f64> = result.final_rankings.iter().cloned().collect();
        let agents: Vec<(String, Arc<dyn Agent>)> = {
            let registry = engine.registry().lock().unwrap();
            registry
                .entries()
                .map(|e| (e.state.agent_id.clone(), e.agent.clone()))
                .collect()
        };
        let mut qualities = Vec::with_capacity(spec.strategies.len());
        for strategy in &spec.strategies {
            let consensus = consensus_for_round(
                "consensus benchmark query",
                &result.query_id,
                final_round,
                &ratings,
                &agents,
                *strategy,
                &config,
            )?;
            qualities.push(consensus.quality_estimate);
        }
        let individual = mean(
            &final_round
                .composite_scores
                .values()
                .cloned()
                .collect::<Vec<_>>(),
        );
        Ok((qualities, individual))
    })?;

    let mut summaries = Vec::new();
    for (idx, strategy) in spec.strategies.iter().enumerate() {
        let qualities: Vec<f64> = per_seed.iter().map(|(q, _)| q[idx]).collect();
        let best = per_seed
            .iter()
            .filter(|(q, _)| {
                let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                q[idx] == max
            })
            .count();
        summaries.push(StrategySummary {
            strategy: *strategy,
            mean_quality: mean(&qualities),
            std_dev: std_dev(&qualities),
            best_rate: best as f64 / per_seed.len() as f64,
        });
    }
    let individual_mean = mean(&per_seed.iter().map(|(_, i)| *i).collect::<Vec<_>>());

    let mut csv = String::from("strategy,mean_quality,std_dev,best_rate\n");
    for s in &summaries {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.strategy,
            fmt(s.mean_quality),
            fmt(s.std_dev),
            fmt(s.best_rate)
        ));
    }
    csv.push_str(&format!("individual_baseline,{},,\n", fmt(individual_mean)));

    Ok(ConsensusCompareOutput {
        csv,
        summaries,
        individual_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(kind: ExperimentKind, seeds: u64) -> ExperimentSpec {
        ExperimentSpec {
            seeds: (0..seeds).collect(),
            ..ExperimentSpec::new(kind)
        }
    }

    #[test]
    fn convergence_orders_agents() {
        let spec = small_spec(ExperimentKind::Convergence, 20);
        let out = run_convergence(&spec).unwrap();
        let last = |id: &str| *out.mean_trajectory[id].last().unwrap();
        assert!(last("alpha") > last("beta"));
        assert!(last("beta") > last("gamma"));
    }

    #[test]
    fn convergence_identical_qualities_stay_near_initial() {
        let spec = ExperimentSpec {
            agents: vec![
                ("A".to_string(), 0.75),
                ("B".to_string(), 0.75),
                ("C".to_string(), 0.75),
            ],
            seeds: (0..40).collect(),
            ..ExperimentSpec::new(ExperimentKind::Convergence)
        };
        let out = run_convergence(&spec).unwrap();
        for trajectory in out.mean_trajectory.values() {
            let final_mean = *trajectory.last().unwrap();
            assert!(
                (final_mean - 1500.0).abs() < 15.0,
                "symmetric agents drifted to {final_mean}"
            );
        }
    }

    #[test]
    fn single_tournament_changes_ratings() {
        let spec = ExperimentSpec {
            tournaments: 1,
            seeds: vec![3],
            ..ExperimentSpec::new(ExperimentKind::Convergence)
        };
        let out = run_convergence(&spec).unwrap();
        let moved = out.final_ratings[0].values().any(|r| *r != 1500.0);
        assert!(moved);
    }

    #[test]
    fn quality_rounds_improve_with_improvement_enabled() {
        let spec = small_spec(ExperimentKind::QualityRounds, 30);
        let out = run_quality_rounds(&spec).unwrap();
        let overall = &out.per_round_means["overall"];
        assert!(
            overall[2] > overall[0] * 1.05,
            "relative gain too small: {overall:?}"
        );
        for metric in QUALITY_METRICS {
            let m = &out.per_round_means[metric];
            assert!(m[1] >= m[0] && m[2] >= m[1], "{metric} not monotone: {m:?}");
        }
    }

    #[test]
    fn quality_rounds_flat_without_improvement() {
        let spec = ExperimentSpec {
            improvement: false,
            ..small_spec(ExperimentKind::QualityRounds, 30)
        };
        let out = run_quality_rounds(&spec).unwrap();
        let overall = &out.per_round_means["overall"];
        assert!(
            (overall[2] - overall[0]).abs() < 2.0,
            "noise band exceeded: {overall:?}"
        );
    }

    #[test]
    fn consensus_compare_paired_properties() {
        let spec = small_spec(ExperimentKind::ConsensusCompare, 40);
        let out = run_consensus_compare(&spec).unwrap();
        assert_eq!(out.summaries.len(), 4);
        let q = |name: ConsensusStrategy| {
            out.summaries
                .iter()
                .find(|s| s.strategy == name)
                .unwrap()
                .mean_quality
        };
        // top_response picks the argmax composite, so it can never fall
        // below the mean of the composites it picks from; synthesis adds
        // headroom on top of the best input.
        assert!(q(ConsensusStrategy::TopResponse) >= out.individual_mean);
        assert!(q(ConsensusStrategy::HybridSynthesis) >= q(ConsensusStrategy::TopResponse));
        let best_rates: f64 = out.summaries.iter().map(|s| s.best_rate).sum();
        assert!(best_rates >= 1.0, "every seed must have a best strategy");
    }

    #[test]
    fn single_strategy_gives_single_row() {
        let spec = ExperimentSpec {
            strategies: vec![ConsensusStrategy::TopResponse],
            ..small_spec(ExperimentKind::ConsensusCompare, 5)
        };
        let out = run_consensus_compare(&spec).unwrap();
        assert_eq!(out.summaries.len(), 1);
        // header + 1 strategy row + baseline row
        assert_eq!(out.csv.lines().count(), 3);
    }

    #[test]
    fn csv_is_bit_identical_across_runs() {
        let spec = small_spec(ExperimentKind::Convergence, 10);
        assert_eq!(
            run_convergence(&spec).unwrap().csv,
            run_convergence(&spec).unwrap().csv
        );
        let spec = small_spec(ExperimentKind::QualityRounds, 10);
        assert_eq!(
            run_quality_rounds(&spec).unwrap().csv,
            run_quality_rounds(&spec).unwrap().csv
        );
        let spec = small_spec(ExperimentKind::ConsensusCompare, 10);
        assert_eq!(
            run_consensus_compare(&spec).unwrap().csv,
            run_consensus_compare(&spec).unwrap().csv
        );
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = ExperimentSpec::new(ExperimentKind::Convergence);
        spec.agents[0].1 = 1.5;
        assert!(run_convergence(&spec).is_err());
        let mut spec = ExperimentSpec::new(ExperimentKind::Convergence);
        spec.seeds.clear();
        assert!(run_convergence(&spec).is_err());
    }
}
