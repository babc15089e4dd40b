//! Four-dimension quality evaluation and the weighted composite score.

use serde::{Deserialize, Serialize};

use crate::error::{ArtError, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// Per-dimension evaluation of a response, each on the 0-100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub accuracy: f64,
    pub coherence: f64,
    pub completeness: f64,
    pub relevance: f64,
}

impl QualityScores {
    pub fn uniform(v: f64) -> Self {
        QualityScores {
            accuracy: v,
            coherence: v,
            completeness: v,
            relevance: v,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.accuracy,
            self.coherence,
            self.completeness,
            self.relevance,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("accuracy", self.accuracy),
            ("coherence", self.coherence),
            ("completeness", self.completeness),
            ("relevance", self.relevance),
        ] {
            if !v.is_finite() || !(0.0..=100.0).contains(&v) {
                return Err(ArtError::Validation(format!(
                    "quality score {name} must be in [0, 100], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Weights for the composite score. Non-negative, sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringWeights {
    pub accuracy: f64,
    pub coherence: f64,
    pub completeness: f64,
    pub relevance: f64,
}

impl Default for ScoringWeights {
    fn default() -> Self {
        ScoringWeights {
            accuracy: 0.35,
            coherence: 0.25,
            completeness: 0.25,
            relevance: 0.15,
        }
    }
}

impl ScoringWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.accuracy,
            self.coherence,
            self.completeness,
            self.relevance,
        ]
    }
}

/// Accepts iff every component is >= 0 and the sum is within 1e-6 of 1.
pub fn validate_weights(weights: &ScoringWeights) -> Result<()> {
    for (name, v) in [
        ("accuracy", weights.accuracy),
        ("coherence", weights.coherence),
        ("completeness", weights.completeness),
        ("relevance", weights.relevance),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(ArtError::Validation(format!(
                "scoring_weights.{name} must be non-negative, got {v}"
            )));
        }
    }
    let sum: f64 = weights.as_array().iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ArtError::Validation(format!(
            "scoring_weights must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

/// Weighted composite quality score on the 0-100 scale.
pub fn composite(scores: &QualityScores, weights: &ScoringWeights) -> Result<f64> {
    validate_weights(weights)?;
    let s = scores.as_array();
    let w = weights.as_array();
    Ok(s.iter().zip(&w).map(|(s, w)| s * w).sum())
}

/// Mean per dimension over all critics' scores.
pub fn aggregate_critiques(critiques: &[QualityScores]) -> Result<QualityScores> {
    if critiques.is_empty() {
        return Err(ArtError::InvalidArgument(
            "cannot aggregate an empty critique list".into(),
        ));
    }
    let n = critiques.len() as f64;
    let mut sums = [0.0; 4];
    for c in critiques {
        for (acc, v) in sums.iter_mut().zip(c.as_array()) {
            *acc += v;
        }
    }
    Ok(QualityScores {
        accuracy: sums[0] / n,
        coherence: sums[1] / n,
        completeness: sums[2] / n,
        relevance: sums[3] / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_equal_dimensions_is_identity() {
        let q = composite(&QualityScores::uniform(80.0), &ScoringWeights::default()).unwrap();
        assert!((q - 80.0).abs() < 1e-12);
    }

    #[test]
    fn composite_hand_computed() {
        let scores = QualityScores {
            accuracy: 85.0,
            coherence: 80.0,
            completeness: 75.0,
            relevance: 70.0,
        };
        let q = composite(&scores, &ScoringWeights::default()).unwrap();
        // 0.35*85 + 0.25*80 + 0.25*75 + 0.15*70 = 79.0
        assert!((q - 79.0).abs() < 1e-12);
    }

    #[test]
    fn composite_zero() {
        let q = composite(&QualityScores::uniform(0.0), &ScoringWeights::default()).unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn composite_rejects_invalid_weights() {
        let w = ScoringWeights {
            accuracy: 0.5,
            coherence: 0.5,
            completeness: 0.5,
            relevance: 0.5,
        };
        assert!(composite(&QualityScores::uniform(50.0), &w).is_err());
    }

    #[test]
    fn validate_weights_cases() {
        assert!(validate_weights(&ScoringWeights::default()).is_ok());
        let degenerate = ScoringWeights {
            accuracy: 1.0,
            coherence: 0.0,
            completeness: 0.0,
            relevance: 0.0,
        };
        assert!(validate_weights(&degenerate).is_ok());
        let negative = ScoringWeights {
            accuracy: 1.5,
            coherence: -0.5,
            completeness: 0.0,
            relevance: 0.0,
        };
        let err = validate_weights(&negative).unwrap_err().to_string();
        assert!(
            err.contains("coherence"),
            "error should name the field: {err}"
        );
    }

    #[test]
    fn aggregate_singleton_and_midpoint() {
        let a = QualityScores::uniform(80.0);
        assert_eq!(aggregate_critiques(&[a]).unwrap(), a);
        let b = QualityScores::uniform(60.0);
        assert_eq!(
            aggregate_critiques(&[b, a]).unwrap(),
            QualityScores::uniform(70.0)
        );
    }

    #[test]
    fn aggregate_per_dimension() {
        let a = QualityScores {
            accuracy: 90.0,
            coherence: 70.0,
            completeness: 50.0,
            relevance: 30.0,
        };
        let b = QualityScores {
            accuracy: 70.0,
            coherence: 90.0,
            completeness: 30.0,
            relevance: 50.0,
        };
        let m = aggregate_critiques(&[a, b]).unwrap();
        assert_eq!(
            m,
            QualityScores {
                accuracy: 80.0,
                coherence: 80.0,
                completeness: 40.0,
                relevance: 40.0,
            }
        );
        // permutation invariance
        assert_eq!(aggregate_critiques(&[b, a]).unwrap(), m);
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(aggregate_critiques(&[]).is_err());
    }
}
