use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{extract_features, KickScene, Outcome, FEATURE_NAMES, N_FEATURES};
use crate::error::{Error, Result};
use crate::geometry::FieldConfig;
use crate::rng;
use crate::stats::{mean, percentile_sorted, sample_std};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

/// Seeded shuffle, then contiguous 50/25/25 partition.
///
/// Sizes are `ceil(n/2)`, `round(n/4)` and the remainder, each within one
/// item of the exact proportion.
pub fn split_dataset<T: Clone>(items: &[T], seed: u64) -> Result<DatasetSplit<T>> {
    let n = items.len();
    if n < 4 {
        return Err(Error::data(format!("need at least 4 scenes to split, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::derived(seed, rng::tag::SPLIT, 0));
    let n_train = n.div_ceil(2);
    let n_val = (n + 2) / 4;
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    Ok(DatasetSplit {
        train: pick(&order[..n_train]),
        validation: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
        seed,
    })
}

/// Replicate minority-class scenes until both classes have equal counts.
///
/// The input is returned unchanged, followed by whole extra copies of the
/// minority class and then a seeded sample without replacement for the
/// remainder.
pub fn balance_by_replication(train: &[KickScene], seed: u64) -> Result<Vec<KickScene>> {
    let (goals, misses): (Vec<&KickScene>, Vec<&KickScene>) = train.iter().partition(|s| s.label == Outcome::Goal);
    if goals.is_empty() || misses.is_empty() {
        return Err(Error::data("balancing needs both GOAL and NO_GOAL scenes"));
    }
    let (minority, majority_len) =
        if goals.len() < misses.len() { (goals, misses.len()) } else { (misses, goals.len()) };
    let mut out = train.to_vec();
    let copies = majority_len / minority.len();
    let remainder = majority_len % minority.len();
    for _ in 1..copies {
        out.extend(minority.iter().map(|s| (*s).clone()));
    }
    if remainder > 0 {
        let mut r = rng::derived(seed, rng::tag::BALANCE, 0);
        let mut picked = index::sample(&mut r, minority.len(), remainder).into_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| minority[i].clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub p1: f64,
    pub p99: f64,
    pub missing_fraction: f64,
}

impl FeatureStats {
    /// Statistics over the finite entries of `values`; the rest count as missing.
    pub fn from_values(name: &str, values: &[f64]) -> Self {
        let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        finite.sort_by(f64::total_cmp);
        let missing = values.len() - finite.len();
        FeatureStats {
            name: name.to_string(),
            mean: mean(&finite),
            std: sample_std(&finite),
            median: percentile_sorted(&finite, 0.5),
            p1: percentile_sorted(&finite, 0.01),
            p99: percentile_sorted(&finite, 0.99),
            missing_fraction: if values.is_empty() { 0.0 } else { missing as f64 / values.len() as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateReport {
    pub scenes: usize,
    pub features: Vec<FeatureStats>,
}

pub fn univariate_stats(scenes: &[KickScene], field: &FieldConfig) -> Result<UnivariateReport> {
    if scenes.is_empty() {
        return Err(Error::data("statistics need at least one scene"));
    }
    let rows: Vec<_> = scenes.iter().map(|s| extract_features(s, field)).collect();
    let features = (0..N_FEATURES)
        .map(|j| {
            let column: Vec<f64> = rows.iter().map(|r| r.0[j]).collect();
            FeatureStats::from_values(FEATURE_NAMES[j], &column)
        })
        .collect();
    Ok(UnivariateReport { scenes: scenes.len(), features })
}

/// Feature rows and labels, ready for training or scoring.
pub fn design_matrix(scenes: &[KickScene], field: &FieldConfig) -> (Vec<Vec<f64>>, Vec<Outcome>) {
    scenes.iter().map(|s| (extract_features(s, field).0.to_vec(), s.label)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::scene::test_support::scene_at;

    fn labeled(n_goal: usize, n_miss: usize) -> Vec<KickScene> {
        (0..n_goal + n_miss)
            .map(|i| {
                let mut s = scene_at(Vec2::new(30.0, i as f64 * 0.01), Vec2::new(50.0, 0.0), Vec2::new(52.5, 0.0));
                s.time = i as u32;
                s.label = if i < n_goal { Outcome::Goal } else { Outcome::NoGoal };
                s
            })
            .collect()
    }

    #[test]
    fn split_sizes() {
        let s = split_dataset(&(0..8).collect::<Vec<_>>(), 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (4, 2, 2));
        let s = split_dataset(&(0..10691).collect::<Vec<_>>(), 1).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (5346, 2673, 2672));
        assert!(split_dataset(&[1, 2, 3], 0).is_err());
    }

    #[test]
    fn split_is_a_deterministic_partition() {
        for n in 4..60usize {
            let items: Vec<usize> = (0..n).collect();
            let a = split_dataset(&items, 5).unwrap();
            assert_eq!(a, split_dataset(&items, 5).unwrap());
            let mut all: Vec<usize> = a.train.iter().chain(&a.validation).chain(&a.test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, items);
            let nf = n as f64;
            assert!((a.train.len() as f64 - nf / 2.0).abs() <= 1.0);
            assert!((a.validation.len() as f64 - nf / 4.0).abs() <= 1.0);
            assert!((a.test.len() as f64 - nf / 4.0).abs() <= 1.0);
        }
    }

    fn counts(xs: &[KickScene]) -> (usize, usize) {
        let g = xs.iter().filter(|s| s.label.is_goal()).count();
        (g, xs.len() - g)
    }

    #[test]
    fn balance_full_copies() {
        let out = balance_by_replication(&labeled(100, 300), 3).unwrap();
        assert_eq!(counts(&out), (300, 300));
        // every goal scene appears exactly three times
        for t in 0..100u32 {
            assert_eq!(out.iter().filter(|s| s.time == t).count(), 3);
        }
    }

    #[test]
    fn balance_with_remainder() {
        let input = labeled(100, 250);
        let out = balance_by_replication(&input, 3).unwrap();
        assert_eq!(counts(&out), (250, 250));
        let tripled = (0..100u32).filter(|t| out.iter().filter(|s| s.time == *t).count() == 3).count();
        assert_eq!(tripled, 50);
        assert!(out.iter().all(|s| input.contains(s)));
        assert_eq!(out, balance_by_replication(&input, 3).unwrap());
    }

    #[test]
    fn balance_noop_and_errors() {
        let input = labeled(20, 20);
        assert_eq!(balance_by_replication(&input, 0).unwrap(), input);
        assert!(balance_by_replication(&labeled(5, 0), 0).is_err());
        // goals as majority
        assert_eq!(counts(&balance_by_replication(&labeled(7, 3), 1).unwrap()), (7, 7));
    }

    #[test]
    fn stats_of_constant_and_missing() {
        let st = FeatureStats::from_values("c", &[2.0; 5]);
        assert_eq!((st.std, st.p1, st.median, st.p99), (0.0, 2.0, 2.0, 2.0));
        let st = FeatureStats::from_values("m", &[1.0, f64::NAN, 3.0, f64::NAN]);
        assert_eq!(st.missing_fraction, 0.5);
        assert_eq!(st.mean, 2.0);
        let report = univariate_stats(&labeled(3, 3), &FieldConfig::default()).unwrap();
        assert_eq!(report.features.len(), N_FEATURES);
        assert!(report.features.iter().all(|f| f.missing_fraction == 0.0 && f.p1 <= f.median && f.median <= f.p99));
        assert!(univariate_stats(&[], &FieldConfig::default()).is_err());
    }
}
