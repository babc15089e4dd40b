//! ELO rating core: expected/actual score computation, pairwise updates,
//! round-robin batch updates for multi-agent matches, and experience-based
//! K-factor decay.
//!
//! Everything here is pure and deterministic; no I/O, no agent knowledge.

use serde::{Deserialize, Serialize};

use crate::error::{ArtError, Result};

/// Starting rating for every newly registered agent.
pub const INITIAL_RATING: f64 = 1500.0;

/// An agent's ELO value plus the number of completed matches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub value: f64,
    pub match_count: u64,
}

impl Rating {
    pub fn new(value: f64) -> Self {
        Rating {
            value,
            match_count: 0,
        }
    }
}

impl Default for Rating {
    fn default() -> Self {
        Rating::new(INITIAL_RATING)
    }
}

/// The actual score of one side of a pairwise match, in [0, 1].
/// The two sides of a pair always sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchScore(f64);

impl MatchScore {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> MatchScore {
        MatchScore(1.0 - self.0)
    }

    pub fn is_draw(self) -> bool {
        self.0 == 0.5
    }
}

/// Signed rating change for one agent of a multi-agent match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingDelta {
    pub agent_index: usize,
    pub delta: f64,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ArtError::InvalidArgument(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

/// Expected score for the first player: 1 / (1 + 10^((r_b - r_a)/400)).
pub fn expected_score(r_a: f64, r_b: f64) -> Result<f64> {
    check_finite("r_a", r_a)?;
    check_finite("r_b", r_b)?;
    Ok(1.0 / (1.0 + 10f64.powf((r_b - r_a) / 400.0)))
}

/// Continuous match score from a quality differential on the 0-100 scale.
///
/// A differential within the draw threshold (inclusive) scores 0.5; otherwise
/// the score is 0.5 + delta/200, clamped to [0, 1].
pub fn actual_score(q_a: f64, q_b: f64, draw_threshold: f64) -> Result<MatchScore> {
    check_finite("q_a", q_a)?;
    check_finite("q_b", q_b)?;
    check_finite("draw_threshold", draw_threshold)?;
    if draw_threshold < 0.0 {
        return Err(ArtError::InvalidArgument(format!(
            "draw_threshold must be >= 0, got {draw_threshold}"
        )));
    }
    let delta = q_a - q_b;
    if delta.abs() <= draw_threshold {
        Ok(MatchScore(0.5))
    } else {
        Ok(MatchScore((0.5 + delta / 200.0).clamp(0.0, 1.0)))
    }
}

/// Update a pair of ratings after one match: R' = R + K * (S - E).
/// Both match counts are incremented.
pub fn update_pair(
    r_a: Rating,
    r_b: Rating,
    q_a: f64,
    q_b: f64,
    k: f64,
    draw_threshold: f64,
) -> Result<(Rating, Rating)> {
    check_finite("k", k)?;
    if k <= 0.0 {
        return Err(ArtError::InvalidArgument(format!("k must be > 0, got {k}")));
    }
    check_finite("r_a", r_a.value)?;
    check_finite("r_b", r_b.value)?;
    let s_a = actual_score(q_a, q_b, draw_threshold)?.value();
    let e_a = expected_score(r_a.value, r_b.value)?;
    let delta = k * (s_a - e_a);
    Ok((
        Rating {
            value: r_a.value + delta,
            match_count: r_a.match_count + 1,
        },
        Rating {
            value: r_b.value - delta,
            match_count: r_b.match_count + 1,
        },
    ))
}

/// K-factor scaled for an n-agent round robin: K / (n - 1).
pub fn adjusted_k(k_base: f64, n_agents: usize) -> Result<f64> {
    if n_agents < 2 {
        return Err(ArtError::InvalidArgument(format!(
            "round robin requires at least 2 agents, got {n_agents}"
        )));
    }
    Ok(k_base / (n_agents as f64 - 1.0))
}

/// Experience-decayed K-factor: K * max(0.5, 1 - 0.1 * ln(m + 1)).
/// Monotone non-increasing in match count, never below half the base.
pub fn dynamic_k(k_base: f64, match_count: u64) -> f64 {
    let decay = 1.0 - 0.1 * ((match_count + 1) as f64).ln();
    k_base * decay.max(0.5)
}

/// Batch round-robin update over n agents.
///
/// Every unordered pair is scored from the pre-round ratings; the summed
/// deltas are applied afterwards, so the result is independent of agent
/// ordering. Each agent's match count increases by n-1. With dynamic K
/// enabled, each agent's side of a pair is scaled by its own experience
/// factor (computed from the pre-round match count); this breaks exact
/// zero-sum, which only holds when the flag is off.
pub fn round_robin_update(
    ratings: &mut [Rating],
    qualities: &[f64],
    k_base: f64,
    draw_threshold: f64,
    use_dynamic_k: bool,
) -> Result<Vec<RatingDelta>> {
    let n = ratings.len();
    if n != qualities.len() {
        return Err(ArtError::InvalidArgument(format!(
            "ratings ({n}) and qualities ({}) differ in length",
            qualities.len()
        )));
    }
    let k_adj = adjusted_k(k_base, n)?;
    let k_for = |r: &Rating| {
        if use_dynamic_k {
            dynamic_k(k_adj, r.match_count)
        } else {
            k_adj
        }
    };

    let pre: Vec<Rating> = ratings.to_vec();
    let mut deltas: Vec<RatingDelta> = (0..n)
        .map(|i| RatingDelta {
            agent_index: i,
            delta: 0.0,
        })
        .collect();

    for i in 0..n {
        for j in (i + 1)..n {
            let s = actual_score(qualities[i], qualities[j], draw_threshold)?.value();
            let e = expected_score(pre[i].value, pre[j].value)?;
            deltas[i].delta += k_for(&pre[i]) * (s - e);
            deltas[j].delta += k_for(&pre[j]) * ((1.0 - s) - (1.0 - e));
        }
    }

    for (rating, d) in ratings.iter_mut().zip(&deltas) {
        rating.value += d.delta;
        rating.match_count += (n - 1) as u64;
    }
    Ok(deltas)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute-force oracle for the batch round robin: apply
    /// Eqs. of expected/actual score pair by pair on the frozen pre-round
    /// ratings, accumulating per-agent deltas.
    fn round_robin_oracle(ratings: &[f64], qualities: &[f64], k_base: f64, theta: f64) -> Vec<f64> {
        let n = ratings.len();
        let k = k_base / (n as f64 - 1.0);
        let mut deltas = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let diff = qualities[i] - qualities[j];
                let s = if diff.abs() <= theta {
                    0.5
                } else {
                    (0.5 + diff / 200.0).clamp(0.0, 1.0)
                };
                let e = 1.0 / (1.0 + 10f64.powf((ratings[j] - ratings[i]) / 400.0));
                deltas[i] += k * (s - e);
            }
        }
        deltas
    }

    #[test]
    fn expected_score_known_values() {
        let e = expected_score(1600.0, 1400.0).unwrap();
        assert!((e - 0.7597).abs() < 0.0005, "got {e}");
        assert_eq!(expected_score(1500.0, 1500.0).unwrap(), 0.5);
        let e = expected_score(1400.0, 1600.0).unwrap();
        assert!((e - 0.2403).abs() < 0.0005, "got {e}");
    }

    #[test]
    fn expected_score_rejects_non_finite() {
        assert!(expected_score(f64::NAN, 1500.0).is_err());
        assert!(expected_score(1500.0, f64::INFINITY).is_err());
    }

    #[test]
    fn actual_score_known_values() {
        assert_eq!(actual_score(85.0, 70.0, 5.0).unwrap().value(), 0.575);
        assert_eq!(actual_score(70.0, 70.0, 5.0).unwrap().value(), 0.5);
        assert_eq!(actual_score(100.0, 0.0, 5.0).unwrap().value(), 1.0);
    }

    #[test]
    fn actual_score_draws_on_exact_threshold() {
        assert_eq!(actual_score(75.0, 70.0, 5.0).unwrap().value(), 0.5);
        assert_ne!(actual_score(75.01, 70.0, 5.0).unwrap().value(), 0.5);
    }

    #[test]
    fn actual_score_clamps() {
        // |delta| > 100 would push past 1 without the clamp
        let s = actual_score(100.0, -50.0, 5.0).unwrap();
        assert_eq!(s.value(), 1.0);
        let s = actual_score(-50.0, 100.0, 5.0).unwrap();
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn update_pair_two_agent_worked_example() {
        let (a, b) = update_pair(
            Rating::new(1600.0),
            Rating::new(1400.0),
            85.0,
            70.0,
            32.0,
            5.0,
        )
        .unwrap();
        assert!((a.value - 1594.1).abs() < 0.05, "got {}", a.value);
        assert!((b.value - 1405.9).abs() < 0.05, "got {}", b.value);
        assert_eq!(a.match_count, 1);
        assert_eq!(b.match_count, 1);
        // the winner's rating still drops: the win was weaker than expected
        assert!(a.value < 1600.0);
        assert_eq!(actual_score(85.0, 70.0, 5.0).unwrap().value(), 0.575);
    }

    #[test]
    fn update_pair_draw_between_equals() {
        let (a, b) = update_pair(
            Rating::new(1500.0),
            Rating::new(1500.0),
            80.0,
            80.0,
            32.0,
            5.0,
        )
        .unwrap();
        assert_eq!(a.value, 1500.0);
        assert_eq!(b.value, 1500.0);
    }

    #[test]
    fn update_pair_mirror() {
        let (a, b) = update_pair(
            Rating::new(1400.0),
            Rating::new(1600.0),
            70.0,
            85.0,
            32.0,
            5.0,
        )
        .unwrap();
        assert!((a.value - 1405.9).abs() < 0.05);
        assert!((b.value - 1594.1).abs() < 0.05);
    }

    #[test]
    fn update_pair_rejects_bad_k() {
        let r = Rating::new(1500.0);
        assert!(update_pair(r, r, 80.0, 70.0, 0.0, 5.0).is_err());
        assert!(update_pair(r, r, 80.0, 70.0, -3.0, 5.0).is_err());
    }

    #[test]
    fn adjusted_k_values() {
        assert_eq!(adjusted_k(32.0, 3).unwrap(), 16.0);
        assert_eq!(adjusted_k(32.0, 2).unwrap(), 32.0);
        assert_eq!(adjusted_k(32.0, 5).unwrap(), 8.0);
        assert!(adjusted_k(32.0, 1).is_err());
    }

    #[test]
    fn dynamic_k_values() {
        assert_eq!(dynamic_k(32.0, 0), 32.0);
        let k = dynamic_k(32.0, 9);
        assert!((k - 24.63).abs() < 0.01, "got {k}");
        // ln(201) > 5 puts the decay past the floor
        assert_eq!(dynamic_k(32.0, 200), 16.0);
    }

    #[test]
    fn dynamic_k_monotone_and_bounded() {
        let mut prev = f64::INFINITY;
        for m in 0..500 {
            let k = dynamic_k(32.0, m);
            assert!(k <= prev);
            assert!((16.0..=32.0).contains(&k));
            prev = k;
        }
    }

    #[test]
    fn round_robin_three_agents_matches_oracle() {
        let expected =
            round_robin_oracle(&[1500.0, 1500.0, 1500.0], &[90.0, 70.0, 50.0], 32.0, 5.0);
        assert!((expected[0] - 4.8).abs() < 1e-9);
        assert!((expected[1]).abs() < 1e-9);
        assert!((expected[2] + 4.8).abs() < 1e-9);

        let mut ratings = vec![Rating::new(1500.0); 3];
        let deltas =
            round_robin_update(&mut ratings, &[90.0, 70.0, 50.0], 32.0, 5.0, false).unwrap();
        for (d, e) in deltas.iter().zip(&expected) {
            assert!(
                (d.delta - e).abs() < 1e-6,
                "delta {} vs oracle {e}",
                d.delta
            );
        }
        let total: f64 = deltas.iter().map(|d| d.delta).sum();
        assert!(total.abs() < 1e-9);
        for r in &ratings {
            assert_eq!(r.match_count, 2);
        }
    }

    #[test]
    fn round_robin_draw_between_equals() {
        let mut ratings = vec![Rating::new(1500.0); 2];
        let deltas = round_robin_update(&mut ratings, &[80.0, 80.0], 32.0, 5.0, false).unwrap();
        assert_eq!(deltas[0].delta, 0.0);
        assert_eq!(deltas[1].delta, 0.0);
    }

    #[test]
    fn round_robin_all_draws_flattens_ratings() {
        let mut ratings = vec![
            Rating::new(1600.0),
            Rating::new(1400.0),
            Rating::new(1500.0),
        ];
        let deltas =
            round_robin_update(&mut ratings, &[50.0, 50.0, 50.0], 32.0, 5.0, false).unwrap();
        assert!(deltas[0].delta < 0.0, "highest-rated loses points on draws");
        assert!(deltas[1].delta > 0.0, "lowest-rated gains points on draws");
        let oracle = round_robin_oracle(&[1600.0, 1400.0, 1500.0], &[50.0, 50.0, 50.0], 32.0, 5.0);
        for (d, e) in deltas.iter().zip(&oracle) {
            assert!((d.delta - e).abs() < 1e-9);
        }
    }

    #[test]
    fn round_robin_rejects_mismatch() {
        let mut ratings = vec![Rating::new(1500.0); 3];
        assert!(round_robin_update(&mut ratings, &[80.0, 80.0], 32.0, 5.0, false).is_err());
        let mut one = vec![Rating::new(1500.0)];
        assert!(round_robin_update(&mut one, &[80.0], 32.0, 5.0, false).is_err());
    }

    #[test]
    fn round_robin_dynamic_k_scales_per_agent() {
        let mut ratings = vec![
            Rating {
                value: 1500.0,
                match_count: 0,
            },
            Rating {
                value: 1500.0,
                match_count: 200,
            },
        ];
        let deltas = round_robin_update(&mut ratings, &[90.0, 50.0], 32.0, 5.0, true).unwrap();
        // the experienced agent moves at half the rate of the fresh one
        assert!((deltas[1].delta.abs() - 0.5 * deltas[0].delta.abs()).abs() < 1e-9);
    }
}
