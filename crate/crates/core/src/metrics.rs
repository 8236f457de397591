//! Binary classifier evaluation: ROC/AUC, KS2 and per-feature relevance.
//!
//! Higher scores are taken to be more GOAL-like throughout.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FieldConfig;
use crate::scene::{extract_features, KickScene, Outcome, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub score: f64,
    pub label: Outcome,
}

impl ScoredSample {
    pub fn new(score: f64, label: Outcome) -> Self {
        ScoredSample { score, label }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false_positive_rate, true_positive_rate)` from `(0, 0)` to `(1, 1)`
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ks2Curve {
    /// distinct scores, ascending
    pub thresholds: Vec<f64>,
    /// fraction of GOAL samples with score <= threshold
    pub cdf_positive: Vec<f64>,
    pub cdf_negative: Vec<f64>,
    pub ks2: f64,
    pub ks2_threshold: f64,
}

fn class_counts(samples: &[ScoredSample]) -> Result<(usize, usize)> {
    if let Some(bad) = samples.iter().find(|s| !s.score.is_finite()) {
        return Err(Error::data(format!("non-finite score {}", bad.score)));
    }
    let pos = samples.iter().filter(|s| s.label.is_goal()).count();
    let neg = samples.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::data("both GOAL and NO_GOAL samples are required"));
    }
    Ok((pos, neg))
}

/// Per distinct score (ascending): `(score, positives, negatives)`.
fn tie_groups(samples: &[ScoredSample]) -> Vec<(f64, usize, usize)> {
    let mut sorted: Vec<&ScoredSample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score));
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for s in sorted {
        match groups.last_mut() {
            Some(g) if g.0 == s.score => {}
            _ => groups.push((s.score, 0, 0)),
        }
        let g = groups.last_mut().expect("just pushed");
        if s.label.is_goal() {
            g.1 += 1;
        } else {
            g.2 += 1;
        }
    }
    groups
}

/// ROC curve over every distinct threshold with the trapezoidal AUC.
///
/// Samples with equal scores move the curve in one diagonal step, which makes
/// the area equal to the Mann-Whitney statistic with ties counted as half.
pub fn roc_curve(samples: &[ScoredSample]) -> Result<RocCurve> {
    let (pos, neg) = class_counts(samples)?;
    let (p, n) = (pos as f64, neg as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    for (_, gp, gn) in tie_groups(samples).into_iter().rev() {
        let (x0, y0) = (fp as f64 / n, tp as f64 / p);
        tp += gp;
        fp += gn;
        let (x1, y1) = (fp as f64 / n, tp as f64 / p);
        auc += (x1 - x0) * (y0 + y1) / 2.0;
        points.push((x1, y1));
    }
    Ok(RocCurve { points, auc })
}

/// Probability that a random GOAL sample outscores a random NO_GOAL sample,
/// ties counting one half, computed from midranks.
pub fn auc_rank(samples: &[ScoredSample]) -> Result<f64> {
    let (pos, neg) = class_counts(samples)?;
    let mut rank_sum = 0.0;
    let mut below = 0usize;
    for (_, gp, gn) in tie_groups(samples) {
        let size = gp + gn;
        let midrank = below as f64 + (size as f64 + 1.0) / 2.0;
        rank_sum += gp as f64 * midrank;
        below += size;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Empirical class CDFs at every distinct score and their maximum gap.
pub fn ks2_curve(samples: &[ScoredSample]) -> Result<Ks2Curve> {
    let (pos, neg) = class_counts(samples)?;
    let groups = tie_groups(samples);
    let mut curve = Ks2Curve {
        thresholds: Vec::with_capacity(groups.len()),
        cdf_positive: Vec::with_capacity(groups.len()),
        cdf_negative: Vec::with_capacity(groups.len()),
        ks2: 0.0,
        ks2_threshold: groups[0].0,
    };
    let (mut cp, mut cn) = (0usize, 0usize);
    for (score, gp, gn) in groups {
        cp += gp;
        cn += gn;
        let (fp, fn_) = (cp as f64 / pos as f64, cn as f64 / neg as f64);
        let gap = (fp - fn_).abs();
        if gap > curve.ks2 {
            curve.ks2 = gap;
            curve.ks2_threshold = score;
        }
        curve.thresholds.push(score);
        curve.cdf_positive.push(fp);
        curve.cdf_negative.push(fn_);
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRelevance {
    pub name: String,
    pub auc: f64,
    /// `max(auc, 1 - auc)`
    pub folded_auc: f64,
}

/// Name of the scene clock column screened alongside the model features.
pub const TIME_FEATURE: &str = "time";

/// Each feature used alone as a classifier score. The 22 model features come
/// first, followed by the scene clock.
pub fn feature_relevance(scenes: &[KickScene], field: &FieldConfig) -> Result<Vec<FeatureRelevance>> {
    if scenes.len() < 2 {
        return Err(Error::data("feature relevance needs at least 2 scenes"));
    }
    let features: Vec<_> = scenes.iter().map(|s| extract_features(s, field)).collect();
    let column = |score: &dyn Fn(usize) -> f64| -> Vec<ScoredSample> {
        scenes.iter().enumerate().map(|(i, s)| ScoredSample::new(score(i), s.label)).collect()
    };
    let relevance = |name: &str, samples: Vec<ScoredSample>| -> Result<FeatureRelevance> {
        let auc = auc_rank(&samples)?;
        Ok(FeatureRelevance { name: name.to_string(), auc, folded_auc: auc.max(1.0 - auc) })
    };
    let mut out = Vec::with_capacity(N_FEATURES + 1);
    for (j, name) in FEATURE_NAMES.iter().enumerate() {
        out.push(relevance(name, column(&|i| features[i].0[j]))?);
    }
    out.push(relevance(TIME_FEATURE, column(&|i| f64::from(scenes[i].time)))?);
    Ok(out)
}

/// Two columns: `false_positive_rate,true_positive_rate`.
pub fn write_roc_csv<W: Write>(curve: &RocCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["false_positive_rate", "true_positive_rate"])?;
    for (x, y) in &curve.points {
        w.serialize((x, y))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Four columns: `threshold,cdf_positive,cdf_negative,difference`.
pub fn write_ks2_csv<W: Write>(curve: &Ks2Curve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "cdf_positive", "cdf_negative", "difference"])?;
    for ((t, p), n) in curve.thresholds.iter().zip(&curve.cdf_positive).zip(&curve.cdf_negative) {
        w.serialize((t, p, n, (p - n).abs()))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
