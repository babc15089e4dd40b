//! Consensus synthesis: pick or build the final response from the last
//! round's responses via one of four strategies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, Critique, Response};
use crate::error::{ArtError, Result};
use crate::scoring::{self, ScoringWeights};

/// Offset added to min-shifted ratings so the lowest-rated agent keeps a
/// nonzero weight.
const RATING_NORMALIZE_EPSILON: f64 = 1.0;

/// Default number of responses drawn into the top-k strategies.
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusStrategy {
    TopResponse,
    WeightedVoting,
    ContextualAggregation,
    HybridSynthesis,
}

impl ConsensusStrategy {
    pub const ALL: [ConsensusStrategy; 4] = [
        ConsensusStrategy::TopResponse,
        ConsensusStrategy::WeightedVoting,
        ConsensusStrategy::ContextualAggregation,
        ConsensusStrategy::HybridSynthesis,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConsensusStrategy::TopResponse => "top_response",
            ConsensusStrategy::WeightedVoting => "weighted_voting",
            ConsensusStrategy::ContextualAggregation => "contextual_aggregation",
            ConsensusStrategy::HybridSynthesis => "hybrid_synthesis",
        }
    }
}

impl std::fmt::Display for ConsensusStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConsensusStrategy {
    type Err = ArtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top_response" => Ok(ConsensusStrategy::TopResponse),
            "weighted_voting" => Ok(ConsensusStrategy::WeightedVoting),
            "contextual_aggregation" => Ok(ConsensusStrategy::ContextualAggregation),
            "hybrid_synthesis" => Ok(ConsensusStrategy::HybridSynthesis),
            other => Err(ArtError::Validation(format!(
                "unknown consensus strategy '{other}'"
            ))),
        }
    }
}

/// The synthesized final response with strategy provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    pub strategy: ConsensusStrategy,
    pub content: String,
    pub source_agent_ids: Vec<String>,
    /// Contributing weights per agent; sums to 1 when the strategy is
    /// weight-based, empty otherwise.
    pub weights_used: BTreeMap<String, f64>,
    pub quality_estimate: f64,
    /// Set when a strategy failed and another produced this result.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_from: Option<ConsensusStrategy>,
}

/// ELO-derived voting weights: min-shift each rating by epsilon, then
/// normalize to sum 1. All-equal ratings yield uniform weights, and adding
/// a constant to every rating leaves the weights unchanged.
pub fn elo_weights(ratings: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    if ratings.is_empty() {
        return Err(ArtError::InvalidArgument(
            "elo_weights requires at least one rating".into(),
        ));
    }
    let min = ratings.values().cloned().fold(f64::INFINITY, f64::min);
    let shifted: BTreeMap<String, f64> = ratings
        .iter()
        .map(|(id, r)| (id.clone(), (r - min) + RATING_NORMALIZE_EPSILON))
        .collect();
    let total: f64 = shifted.values().sum();
    Ok(shifted.into_iter().map(|(id, v)| (id, v / total)).collect())
}

/// Order agents best-first: score desc, then rating desc, then id asc.
fn rank_key<'a>(
    agent_id: &'a str,
    score: f64,
    ratings: &BTreeMap<String, f64>,
) -> (f64, f64, &'a str) {
    (
        score,
        ratings.get(agent_id).copied().unwrap_or(0.0),
        agent_id,
    )
}

fn better(a: (f64, f64, &str), b: (f64, f64, &str)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    if a.1 != b.1 {
        return a.1 > b.1;
    }
    a.2 < b.2
}

/// Responses ordered best-first by composite score (rating, then id, as
/// tie-breaks), truncated to k.
fn top_k_by_composite<'a>(
    responses: &'a [Response],
    composites: &BTreeMap<String, f64>,
    ratings: &BTreeMap<String, f64>,
    k: usize,
) -> Vec<(&'a Response, f64)> {
    let mut scored: Vec<(&Response, f64)> = responses
        .iter()
        .filter_map(|r| composites.get(&r.agent_id).map(|c| (r, *c)))
        .collect();
    scored.sort_by(|a, b| {
        let ka = rank_key(&a.0.agent_id, a.1, ratings);
        let kb = rank_key(&b.0.agent_id, b.1, ratings);
        if better(ka, kb) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    scored.truncate(k);
    scored
}

/// Select the single response with the highest composite score.
pub fn top_response(
    responses: &[Response],
    composites: &BTreeMap<String, f64>,
    ratings: &BTreeMap<String, f64>,
) -> Result<ConsensusResult> {
    let ranked = top_k_by_composite(responses, composites, ratings, 1);
    let (best, score) = ranked.first().ok_or_else(|| {
        ArtError::InvalidArgument("top_response requires at least one scored response".into())
    })?;
    Ok(ConsensusResult {
        strategy: ConsensusStrategy::TopResponse,
        content: best.content.clone(),
        source_agent_ids: vec![best.agent_id.clone()],
        weights_used: BTreeMap::new(),
        quality_estimate: *score,
        fallback_from: None,
    })
}

/// Select the response with maximum ELO-weighted support, where agent j's
/// support for response i is the composite of j's critique of i, rescaled
/// to [0, 1]. Candidates that received no critiques are excluded.
///
/// Note the vote sum `Σ_{j≠i} w_j * support(j, i)` deliberately excludes a
/// candidate's own voter weight and is not renormalized per candidate. With
/// min-shift rating weights this biases selection toward lower-rated agents
/// (their candidates retain more total voter weight), so this strategy can
/// pick a response with a below-average composite. Prefer `top_response` or
/// `hybrid_synthesis` when raw answer quality is the objective.
pub fn weighted_voting(
    responses: &[Response],
    critiques: &[Critique],
    ratings: &BTreeMap<String, f64>,
    scoring_weights: &ScoringWeights,
) -> Result<ConsensusResult> {
    if responses.len() < 2 {
        return Err(ArtError::InvalidArgument(
            "weighted_voting requires at least 2 responses".into(),
        ));
    }
    let voter_weights = elo_weights(ratings)?;

    let mut best: Option<(&Response, f64, f64)> = None; // (response, support, composite)
    for candidate in responses {
        let received: Vec<&Critique> = critiques
            .iter()
            .filter(|c| c.target_agent_id == candidate.agent_id)
            .collect();
        if received.is_empty() {
            continue;
        }
        let mut support = 0.0;
        for critique in &received {
            let w = voter_weights
                .get(&critique.evaluator_id)
                .copied()
                .unwrap_or(0.0);
            support += w * (scoring::composite(&critique.scores, scoring_weights)? / 100.0);
        }
        let scores: Vec<_> = received.iter().map(|c| c.scores).collect();
        let quality = scoring::composite(&scoring::aggregate_critiques(&scores)?, scoring_weights)?;
        let candidate_key = rank_key(&candidate.agent_id, support, ratings);
        let replace = match &best {
            None => true,
            Some((current, s, _)) => {
                better(candidate_key, rank_key(&current.agent_id, *s, ratings))
            }
        };
        if replace {
            best = Some((candidate, support, quality));
        }
    }

    let (winner, _, quality) = best
        .ok_or_else(|| ArtError::ConsensusFailed("no candidate received any critiques".into()))?;
    Ok(ConsensusResult {
        strategy: ConsensusStrategy::WeightedVoting,
        content: winner.content.clone(),
        source_agent_ids: vec![winner.agent_id.clone()],
        weights_used: voter_weights,
        quality_estimate: quality,
        fallback_from: None,
    })
}

/// Deterministic attributed concatenation of the top-k responses, ordered
/// by ELO weight descending. Asking for more responses than exist uses all
/// available.
pub fn contextual_aggregate(
    responses: &[Response],
    composites: &BTreeMap<String, f64>,
    k: usize,
    weights: &BTreeMap<String, f64>,
) -> Result<ConsensusResult> {
    if k < 1 {
        return Err(ArtError::InvalidArgument("k must be >= 1".into()));
    }
    let ratings: BTreeMap<String, f64> = weights.clone();
    let selected = top_k_by_composite(responses, composites, &ratings, k);
    if selected.is_empty() {
        return Err(ArtError::InvalidArgument(
            "contextual_aggregate requires at least one scored response".into(),
        ));
    }

    // restrict weights to the selected agents and renormalize
    let mut used: BTreeMap<String, f64> = selected
        .iter()
        .map(|(r, _)| {
            let w = weights.get(&r.agent_id).copied().unwrap_or(0.0);
            (r.agent_id.clone(), w)
        })
        .collect();
    let total: f64 = used.values().sum();
    if total > 0.0 {
        for v in used.values_mut() {
            *v /= total;
        }
    } else {
        let uniform = 1.0 / used.len() as f64;
        for v in used.values_mut() {
            *v = uniform;
        }
    }

    // segments ordered by weight descending (id ascending on ties)
    let mut ordered: Vec<(&Response, f64)> = selected.clone();
    ordered.sort_by(|a, b| {
        let wa = used.get(&a.0.agent_id).copied().unwrap_or(0.0);
        let wb = used.get(&b.0.agent_id).copied().unwrap_or(0.0);
        wb.partial_cmp(&wa)
            .unwrap()
            .then_with(|| a.0.agent_id.cmp(&b.0.agent_id))
    });

    let content = ordered
        .iter()
        .map(|(r, _)| format!("[{}] {}", r.agent_id, r.content))
        .collect::<Vec<_>>()
        .join("\n");
    let quality_estimate = ordered
        .iter()
        .map(|(r, c)| used.get(&r.agent_id).copied().unwrap_or(0.0) * c)
        .sum();

    Ok(ConsensusResult {
        strategy: ConsensusStrategy::ContextualAggregation,
        content,
        source_agent_ids: ordered.iter().map(|(r, _)| r.agent_id.clone()).collect(),
        weights_used: used,
        quality_estimate,
        fallback_from: None,
    })
}

/// Invoke a synthesizer agent with the top-k responses as context. If the
/// synthesizer fails, falls back to weighted voting and records that in the
/// result.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_synthesize(
    query: &str,
    query_id: &str,
    responses: &[Response],
    critiques: &[Critique],
    composites: &BTreeMap<String, f64>,
    ratings: &BTreeMap<String, f64>,
    k: usize,
    synthesizer: &dyn Agent,
    scoring_weights: &ScoringWeights,
) -> Result<ConsensusResult> {
    if k < 1 {
        return Err(ArtError::InvalidArgument("k must be >= 1".into()));
    }
    let selected = top_k_by_composite(responses, composites, ratings, k);
    if selected.is_empty() {
        return Err(ArtError::InvalidArgument(
            "hybrid_synthesize requires at least one scored response".into(),
        ));
    }
    let sources: Vec<Response> = selected.iter().map(|(r, _)| (*r).clone()).collect();

    match synthesizer.synthesize(query, query_id, &sources) {
        Ok(synthesized) => {
            let weights = elo_weights(ratings)?;
            let mut used: BTreeMap<String, f64> = sources
                .iter()
                .map(|r| {
                    (
                        r.agent_id.clone(),
                        weights.get(&r.agent_id).copied().unwrap_or(0.0),
                    )
                })
                .collect();
            let total: f64 = used.values().sum();
            if total > 0.0 {
                for v in used.values_mut() {
                    *v /= total;
                }
            }
            let quality = synthesized
                .latent_quality
                .unwrap_or(synthesized.confidence * 100.0);
            Ok(ConsensusResult {
                strategy: ConsensusStrategy::HybridSynthesis,
                content: synthesized.content,
                source_agent_ids: sources.iter().map(|r| r.agent_id.clone()).collect(),
                weights_used: used,
                quality_estimate: quality,
                fallback_from: None,
            })
        }
        Err(_) => {
            let mut fallback = weighted_voting(responses, critiques, ratings, scoring_weights)?;
            fallback.fallback_from = Some(ConsensusStrategy::HybridSynthesis);
            Ok(fallback)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::AgentConfig;
    use crate::mock::MockAgent;
    use crate::scoring::QualityScores;

    fn resp(agent_id: &str, latent: f64) -> Response {
        Response {
            agent_id: agent_id.into(),
            query_id: "q".into(),
            content: format!("{agent_id} says"),
            confidence: latent / 100.0,
            round_index: 0,
            latent_quality: Some(latent),
        }
    }

    fn crit(from: &str, to: &str, score: f64) -> Critique {
        Critique {
            evaluator_id: from.into(),
            target_agent_id: to.into(),
            scores: QualityScores::uniform(score),
            commentary: String::new(),
        }
    }

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn elo_weights_symmetry_and_hand_values() {
        let w = elo_weights(&map(&[("a", 1500.0), ("b", 1500.0)])).unwrap();
        assert_eq!(w["a"], 0.5);
        assert_eq!(w["b"], 0.5);

        let w = elo_weights(&map(&[("a", 1600.0), ("b", 1400.0)])).unwrap();
        assert!((w["a"] - 201.0 / 202.0).abs() < 1e-12);
        assert!((w["b"] - 1.0 / 202.0).abs() < 1e-12);

        let w = elo_weights(&map(&[("a", 1612.0), ("b", 1502.0), ("c", 1386.0)])).unwrap();
        assert!(w["a"] > w["b"] && w["b"] > w["c"]);
        let sum: f64 = w.values().sum();
        assert!((sum - 1.0).abs() < 1e-12);

        assert!(elo_weights(&BTreeMap::new()).is_err());
    }

    #[test]
    fn elo_weights_shift_invariant() {
        let base = map(&[("a", 1612.0), ("b", 1502.0), ("c", 1386.0)]);
        let shifted: BTreeMap<String, f64> =
            base.iter().map(|(k, v)| (k.clone(), v + 250.0)).collect();
        let w1 = elo_weights(&base).unwrap();
        let w2 = elo_weights(&shifted).unwrap();
        for k in w1.keys() {
            assert!((w1[k] - w2[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn top_response_argmax_and_tiebreak() {
        let responses = vec![resp("a", 85.0), resp("b", 70.0)];
        let ratings = map(&[("a", 1500.0), ("b", 1500.0)]);
        let r = top_response(&responses, &map(&[("a", 85.0), ("b", 70.0)]), &ratings).unwrap();
        assert_eq!(r.source_agent_ids, vec!["a"]);
        assert_eq!(r.quality_estimate, 85.0);

        let single = top_response(&responses[..1], &map(&[("a", 85.0)]), &ratings).unwrap();
        assert_eq!(single.source_agent_ids, vec!["a"]);

        // tie on composite -> higher rating wins
        let r = top_response(
            &responses,
            &map(&[("a", 80.0), ("b", 80.0)]),
            &map(&[("a", 1450.0), ("b", 1550.0)]),
        )
        .unwrap();
        assert_eq!(r.source_agent_ids, vec!["b"]);
    }

    #[test]
    fn weighted_voting_hand_example() {
        // equal weights, supports a<-b = 0.9, b<-a = 0.6 -> a selected
        let responses = vec![resp("a", 90.0), resp("b", 60.0)];
        let critiques = vec![crit("b", "a", 90.0), crit("a", "b", 60.0)];
        let ratings = map(&[("a", 1500.0), ("b", 1500.0)]);
        let r =
            weighted_voting(&responses, &critiques, &ratings, &ScoringWeights::default()).unwrap();
        assert_eq!(r.source_agent_ids, vec!["a"]);
        assert!((r.quality_estimate - 90.0).abs() < 1e-9);
        let sum: f64 = r.weights_used.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weighted_voting_tie_break_path() {
        let responses = vec![resp("a", 80.0), resp("b", 80.0)];
        let critiques = vec![crit("b", "a", 80.0), crit("a", "b", 80.0)];
        let ratings = map(&[("a", 1500.0), ("b", 1500.0)]);
        let r =
            weighted_voting(&responses, &critiques, &ratings, &ScoringWeights::default()).unwrap();
        // all supports equal, equal ratings -> lexically first agent
        assert_eq!(r.source_agent_ids, vec!["a"]);
    }

    #[test]
    fn weighted_voting_matches_bruteforce_argmax() {
        let responses = vec![resp("a", 88.0), resp("b", 74.0), resp("c", 66.0)];
        let critiques = vec![
            crit("b", "a", 87.0),
            crit("c", "a", 89.0),
            crit("a", "b", 75.0),
            crit("c", "b", 73.0),
            crit("a", "c", 64.0),
            crit("b", "c", 68.0),
        ];
        let ratings = map(&[("a", 1612.0), ("b", 1502.0), ("c", 1386.0)]);
        let weights = elo_weights(&ratings).unwrap();

        // brute-force argmax over candidates
        let mut best = ("", f64::NEG_INFINITY);
        for cand in ["a", "b", "c"] {
            let support: f64 = critiques
                .iter()
                .filter(|c| c.target_agent_id == cand)
                .map(|c| weights[&c.evaluator_id] * (c.scores.accuracy / 100.0))
                .sum();
            if support > best.1 {
                best = (cand, support);
            }
        }

        let r =
            weighted_voting(&responses, &critiques, &ratings, &ScoringWeights::default()).unwrap();
        assert_eq!(r.source_agent_ids, vec![best.0]);
    }

    #[test]
    fn weighted_voting_excludes_uncritiqued_candidates() {
        let responses = vec![resp("a", 90.0), resp("b", 60.0)];
        // only b received a critique; a is excluded despite higher latent
        let critiques = vec![crit("a", "b", 60.0)];
        let ratings = map(&[("a", 1500.0), ("b", 1500.0)]);
        let r =
            weighted_voting(&responses, &critiques, &ratings, &ScoringWeights::default()).unwrap();
        assert_eq!(r.source_agent_ids, vec!["b"]);

        let err = weighted_voting(&responses, &[], &ratings, &ScoringWeights::default());
        assert!(matches!(err, Err(ArtError::ConsensusFailed(_))));
    }

    #[test]
    fn contextual_aggregate_selection() {
        let responses = vec![resp("a", 85.0), resp("b", 80.0), resp("c", 60.0)];
        let composites = map(&[("a", 85.0), ("b", 80.0), ("c", 60.0)]);
        let ratings = map(&[("a", 1550.0), ("b", 1500.0), ("c", 1450.0)]);
        let weights = elo_weights(&ratings).unwrap();

        // k = 1 selects the same source as top_response
        let r1 = contextual_aggregate(&responses, &composites, 1, &weights).unwrap();
        let tr = top_response(&responses, &composites, &ratings).unwrap();
        assert_eq!(r1.source_agent_ids, tr.source_agent_ids);
        assert!(r1.content.contains(&responses[0].content));

        // k = 2 keeps a and b, drops c
        let r2 = contextual_aggregate(&responses, &composites, 2, &weights).unwrap();
        assert!(r2.content.contains("[a]") && r2.content.contains("[b]"));
        assert!(!r2.content.contains("[c]"));
        let sum: f64 = r2.weights_used.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);

        // k beyond available clamps
        let r5 = contextual_aggregate(&responses, &composites, 5, &weights).unwrap();
        assert_eq!(r5.source_agent_ids.len(), 3);
    }

    #[test]
    fn hybrid_synthesis_and_fallback() {
        let responses = vec![resp("a", 85.0), resp("b", 75.0)];
        let critiques = vec![crit("b", "a", 85.0), crit("a", "b", 75.0)];
        let composites = map(&[("a", 85.0), ("b", 75.0)]);
        let ratings = map(&[("a", 1550.0), ("b", 1450.0)]);
        let synth = MockAgent::new(AgentConfig::new("Synth", "mock"), 0.9, 3);

        let r = hybrid_synthesize(
            "Q",
            "q",
            &responses,
            &critiques,
            &composites,
            &ratings,
            2,
            &synth,
            &ScoringWeights::default(),
        )
        .unwrap();
        assert_eq!(r.strategy, ConsensusStrategy::HybridSynthesis);
        assert!((r.quality_estimate - 86.5).abs() < 1e-9);
        assert!(r.fallback_from.is_none());

        let failing =
            MockAgent::new(AgentConfig::new("Broken", "mock"), 0.9, 3).failing_generation();
        let r = hybrid_synthesize(
            "Q",
            "q",
            &responses,
            &critiques,
            &composites,
            &ratings,
            2,
            &failing,
            &ScoringWeights::default(),
        )
        .unwrap();
        assert_eq!(r.strategy, ConsensusStrategy::WeightedVoting);
        assert_eq!(r.fallback_from, Some(ConsensusStrategy::HybridSynthesis));
    }

    #[test]
    fn strategy_identifier_strings() {
        for s in ConsensusStrategy::ALL {
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.as_str()));
            let parsed: ConsensusStrategy = s.as_str().parse().unwrap();
            assert_eq!(parsed, s);
        }
        assert!("majority_vote".parse::<ConsensusStrategy>().is_err());
    }
}
