//! Sample-based (empirical) accuracy metrics and incremental values for
//! labeled cohorts: AUC, average precision, Brier score, and the alpha-level
//! curves that mirror the analytic decomposition.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::distributions::EmpiricalPair;
use crate::error::{Error, Result};

/// How tied score pairs count toward the AUC: `Strict` counts an
/// event/non-event tie as a loss (the indicator is `>`), `Midrank` counts it
/// as half a win (the usual Wilcoxon convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ties {
    #[default]
    Strict,
    Midrank,
}

/// A labeled cohort with one or more score columns of equal length.
#[derive(Debug, Clone)]
pub struct Cohort {
    labels: Vec<u8>,
    columns: BTreeMap<String, Vec<f64>>,
}

impl Cohort {
    pub fn new(labels: Vec<u8>, columns: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("cohort is empty".into()));
        }
        if let Some(bad) = labels.iter().position(|&d| d > 1) {
            return Err(Error::InvalidInput(format!(
                "label at row {} is {}, expected 0 or 1",
                bad + 1,
                labels[bad]
            )));
        }
        for (name, col) in &columns {
            if col.len() != labels.len() {
                return Err(Error::InvalidInput(format!(
                    "column '{name}' has {} rows but there are {} labels",
                    col.len(),
                    labels.len()
                )));
            }
            if let Some(bad) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "column '{name}' has a non-finite value at row {}",
                    bad + 1
                )));
            }
        }
        Ok(Self { labels, columns })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn pi_hat(&self) -> f64 {
        self.labels.iter().filter(|&&d| d == 1).count() as f64 / self.labels.len() as f64
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns.get(name).map(Vec::as_slice).ok_or_else(|| {
            let available: Vec<_> = self.columns.keys().cloned().collect();
            Error::InvalidInput(format!(
                "no column named '{name}'; available: {}",
                available.join(", ")
            ))
        })
    }
}

fn validate(labels: &[u8], scores: &[f64]) -> Result<(usize, usize)> {
    if labels.len() != scores.len() {
        return Err(Error::InvalidInput(format!(
            "labels and scores lengths differ: {} vs {}",
            labels.len(),
            scores.len()
        )));
    }
    let mut n1 = 0usize;
    for (i, &d) in labels.iter().enumerate() {
        if d > 1 {
            return Err(Error::InvalidInput(format!(
                "label at row {} is {d}, expected 0 or 1",
                i + 1
            )));
        }
        n1 += d as usize;
    }
    if let Some(bad) = scores.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite score at row {}",
            bad + 1
        )));
    }
    let n0 = labels.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::DegenerateCohort(format!(
            "need both classes present, got {n1} events and {n0} non-events"
        )));
    }
    Ok((n1, n0))
}

// indices sorted by score descending, plus per-group boundaries of tied runs
fn descending_groups(scores: &[f64]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=idx.len() {
        if i == idx.len() || scores[idx[i]] != scores[idx[start]] {
            groups.push((start, i));
            start = i;
        }
    }
    (idx, groups)
}

/// Empirical AUC: the fraction of (event, non-event) pairs the score orders
/// correctly. O(n log n) via a single sweep over tied-score groups.
pub fn empirical_auc(labels: &[u8], scores: &[f64], ties: Ties) -> Result<f64> {
    let (n1, n0) = validate(labels, scores)?;
    let (idx, groups) = descending_groups(scores);
    // sweep ascending so "non-events seen" are the strictly smaller ones
    let mut won = 0u64; // event strictly above a non-event
    let mut tied = 0u64; // event tied with a non-event
    let mut nonevents_below = 0u64;
    for (s, e) in groups.iter().rev() {
        let mut ev = 0u64;
        let mut ne = 0u64;
        for &i in &idx[*s..*e] {
            if labels[i] == 1 {
                ev += 1;
            } else {
                ne += 1;
            }
        }
        won += ev * nonevents_below;
        tied += ev * ne;
        nonevents_below += ne;
    }
    let pairs = (n1 as u64 * n0 as u64) as f64;
    let score = match ties {
        Ties::Strict => won as f64,
        Ties::Midrank => won as f64 + 0.5 * tied as f64,
    };
    Ok(score / pairs)
}

/// Empirical average precision: each event contributes the precision of the
/// rule "score >= this event's score" (ties enter the threshold set
/// together), averaged over events.
pub fn empirical_ap(labels: &[u8], scores: &[f64]) -> Result<f64> {
    let (n1, _) = validate(labels, scores)?;
    let (idx, groups) = descending_groups(scores);
    let mut total = 0u64;
    let mut pos = 0u64;
    let mut ap = 0.0;
    for (s, e) in groups {
        let mut ev = 0u64;
        for &i in &idx[s..e] {
            if labels[i] == 1 {
                ev += 1;
            }
        }
        total += (e - s) as u64;
        pos += ev;
        if ev > 0 {
            ap += ev as f64 * (pos as f64 / total as f64);
        }
    }
    Ok(ap / n1 as f64)
}

/// Mean squared error of predicted probabilities against outcomes.
pub fn brier(labels: &[u8], probs: &[f64]) -> Result<f64> {
    validate(labels, probs)?;
    if let Some(bad) = probs.iter().position(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidInput(format!(
            "probability at row {} is {}, outside [0, 1]",
            bad + 1,
            probs[bad]
        )));
    }
    let n = labels.len() as f64;
    let sum: f64 = labels
        .iter()
        .zip(probs)
        .map(|(&d, &p)| {
            let e = d as f64 - p;
            e * e
        })
        .sum();
    Ok(sum / n)
}

/// Brier score rescaled against the no-covariate model predicting the
/// observed event rate for everyone: `1 - BrS / [pi (1-pi)]`.
pub fn scaled_brier(labels: &[u8], probs: &[f64]) -> Result<f64> {
    let b = brier(labels, probs)?;
    let pi = labels.iter().filter(|&&d| d == 1).count() as f64 / labels.len() as f64;
    Ok(1.0 - b / (pi * (1.0 - pi)))
}

/// AUC, AP, and (when the scores are probabilities) the scaled Brier score.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricTriple {
    pub auc: f64,
    pub ap: f64,
    /// `None` when the score column is not probability-valued; the two
    /// rank-based metrics are still meaningful for arbitrary scores.
    pub sbrs: Option<f64>,
}

pub fn metric_triple(labels: &[u8], scores: &[f64], ties: Ties) -> Result<MetricTriple> {
    let auc = empirical_auc(labels, scores, ties)?;
    let ap = empirical_ap(labels, scores)?;
    let sbrs = if scores.iter().all(|&s| (0.0..=1.0).contains(&s)) {
        Some(scaled_brier(labels, scores)?)
    } else {
        None
    };
    Ok(MetricTriple { auc, ap, sbrs })
}

/// Per-model metrics and their differences (new minus old) on one cohort.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmpiricalIncV {
    pub old: MetricTriple,
    pub new: MetricTriple,
    pub delta_auc: f64,
    pub delta_ap: f64,
    pub delta_sbrs: Option<f64>,
}

pub fn incremental_value(
    labels: &[u8],
    old_scores: &[f64],
    new_scores: &[f64],
    ties: Ties,
) -> Result<EmpiricalIncV> {
    let old = metric_triple(labels, old_scores, ties)?;
    let new = metric_triple(labels, new_scores, ties)?;
    Ok(EmpiricalIncV {
        old,
        new,
        delta_auc: new.auc - old.auc,
        delta_ap: new.ap - old.ap,
        delta_sbrs: match (new.sbrs, old.sbrs) {
            (Some(n), Some(o)) => Some(n - o),
            _ => None,
        },
    })
}

/// ROC sweep: (FPR, TPR) after admitting each distinct score from the top,
/// starting at (0, 0) and ending at (1, 1).
pub fn roc_points(labels: &[u8], scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (n1, n0) = validate(labels, scores)?;
    let (idx, groups) = descending_groups(scores);
    let mut pts = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    for (s, e) in groups {
        for &i in &idx[s..e] {
            if labels[i] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        pts.push((fp as f64 / n0 as f64, tp as f64 / n1 as f64));
    }
    Ok(pts)
}

/// Precision-recall sweep: (recall, precision) after admitting each distinct
/// score from the top, starting at the conventional (0, 1).
pub fn pr_points(labels: &[u8], scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (n1, _) = validate(labels, scores)?;
    let (idx, groups) = descending_groups(scores);
    let mut pts = vec![(0.0, 1.0)];
    let mut tp = 0u64;
    let mut total = 0u64;
    for (s, e) in groups {
        for &i in &idx[s..e] {
            if labels[i] == 1 {
                tp += 1;
            }
        }
        total += (e - s) as u64;
        pts.push((tp as f64 / n1 as f64, tp as f64 / total as f64));
    }
    Ok(pts)
}

fn empirical_pairs(
    labels: &[u8],
    old_scores: &[f64],
    new_scores: &[f64],
) -> Result<(EmpiricalPair, EmpiricalPair)> {
    Ok((
        EmpiricalPair::from_labels_scores(labels, old_scores)?,
        EmpiricalPair::from_labels_scores(labels, new_scores)?,
    ))
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if let Some(&a) = alphas.iter().find(|a| !(0.0 < **a && **a < 1.0)) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0,1), got {a}"
        )));
    }
    Ok(())
}

/// Plug-in estimate of the alpha-level difference curve:
/// `F0_new(q_new,alpha) - F0_old(q_old,alpha)` with empirical CDFs and
/// type-1 event-score quantiles.
pub fn delta_alpha_curve(
    labels: &[u8],
    old_scores: &[f64],
    new_scores: &[f64],
    alphas: &[f64],
) -> Result<Vec<f64>> {
    check_alphas(alphas)?;
    let (old, new) = empirical_pairs(labels, old_scores, new_scores)?;
    Ok(alphas
        .iter()
        .map(|&a| new.fhat0(new.quantile1(a)) - old.fhat0(old.quantile1(a)))
        .collect())
}

/// Plug-in estimate of the AP weight curve `w(alpha)`.
pub fn ap_weight_curve(
    labels: &[u8],
    old_scores: &[f64],
    new_scores: &[f64],
    alphas: &[f64],
) -> Result<Vec<f64>> {
    check_alphas(alphas)?;
    let (old, new) = empirical_pairs(labels, old_scores, new_scores)?;
    let pi = new.pi_hat();
    let k = 1.0 / pi - 1.0;
    Ok(alphas
        .iter()
        .map(|&a| {
            let sn = 1.0 - new.fhat0(new.quantile1(a));
            let so = 1.0 - old.fhat0(old.quantile1(a));
            let hn = 1.0 / (1.0 + k * sn / (1.0 - a));
            let ho = 1.0 / (1.0 + k * so / (1.0 - a));
            k / (1.0 - a) * hn * ho
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn auc_hand_example() {
        let labels = [1u8, 0, 1, 0];
        let scores = [0.9, 0.8, 0.3, 0.1];
        // pairs: (0.9 vs 0.8) win, (0.9 vs 0.1) win, (0.3 vs 0.8) loss,
        // (0.3 vs 0.1) win -> 3/4
        assert_eq!(empirical_auc(&labels, &scores, Ties::Strict).unwrap(), 0.75);
        assert_eq!(
            empirical_auc(&labels, &scores, Ties::Midrank).unwrap(),
            0.75
        );
    }

    #[test]
    fn auc_all_tied_scores() {
        let labels = [1u8, 0, 1, 0, 0];
        let scores = [2.0; 5];
        assert_eq!(empirical_auc(&labels, &scores, Ties::Strict).unwrap(), 0.0);
        assert_eq!(empirical_auc(&labels, &scores, Ties::Midrank).unwrap(), 0.5);
    }

    #[test]
    fn ap_hand_examples() {
        assert_eq!(empirical_ap(&[1, 0, 0], &[0.9, 0.2, 0.1]).unwrap(), 1.0);
        assert_eq!(empirical_ap(&[1, 0], &[0.1, 0.9]).unwrap(), 0.5);
        // ties enter together: the event at 0.5 shares its threshold set
        // with the non-event at 0.5 -> precision 1/2 for that event
        let ap = empirical_ap(&[1, 1, 0], &[0.9, 0.5, 0.5]).unwrap();
        assert!((ap - 0.5 * (1.0 + 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn ap_of_random_guess_equals_event_rate_in_expectation() {
        // with all scores tied, every event's precision is the event rate
        let labels = [1u8, 0, 0, 0, 1];
        let ap = empirical_ap(&labels, &[1.0; 5]).unwrap();
        assert!((ap - 0.4).abs() < 1e-15);
    }

    #[test]
    fn brier_hand_example() {
        let b = brier(&[1, 0], &[0.8, 0.4]).unwrap();
        assert!((b - 0.10).abs() < 1e-15);
        let s = scaled_brier(&[1, 0], &[0.8, 0.4]).unwrap();
        assert!((s - 0.6).abs() < 1e-15);
        assert!(brier(&[1, 0], &[1.2, 0.4]).is_err());
    }

    #[test]
    fn roc_sweep_hand_example() {
        let pts = roc_points(&[1, 0, 1], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(pts, vec![(0.0, 0.0), (0.0, 0.5), (1.0, 0.5), (1.0, 1.0)]);
    }

    #[test]
    fn pr_sweep_perfect_separation() {
        let pts = pr_points(&[1, 1, 0, 0], &[4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(
            pts,
            vec![
                (0.0, 1.0),
                (0.5, 1.0),
                (1.0, 1.0),
                (1.0, 2.0 / 3.0),
                (1.0, 0.5)
            ]
        );
    }

    #[test]
    fn metric_triple_withholds_sbrs_for_raw_scores() {
        let labels = [1u8, 0, 1, 0];
        let t = metric_triple(&labels, &[3.0, 2.0, 1.5, -1.0], Ties::Strict).unwrap();
        assert!(t.sbrs.is_none());
        let t = metric_triple(&labels, &[0.9, 0.4, 0.6, 0.1], Ties::Strict).unwrap();
        assert!(t.sbrs.is_some());
    }

    #[test]
    fn incremental_value_is_antisymmetric() {
        let labels = [1u8, 0, 1, 0, 0, 1];
        let a = [0.9, 0.7, 0.6, 0.4, 0.3, 0.2];
        let b = [0.8, 0.1, 0.7, 0.5, 0.2, 0.9];
        let fwd = incremental_value(&labels, &a, &b, Ties::Strict).unwrap();
        let rev = incremental_value(&labels, &b, &a, Ties::Strict).unwrap();
        assert_eq!(fwd.delta_auc, -rev.delta_auc);
        assert_eq!(fwd.delta_ap, -rev.delta_ap);
        assert_eq!(fwd.delta_sbrs.unwrap(), -rev.delta_sbrs.unwrap());
    }

    #[test]
    fn rank_metrics_invariant_under_monotone_maps() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let n = 400;
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2) as u8).collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let auc = empirical_auc(&labels, &scores, Ties::Strict).unwrap();
        let ap = empirical_ap(&labels, &scores).unwrap();
        for _ in 0..100 {
            // random strictly increasing map: positive-slope cubic plus a
            // random shift and positive scale
            let (a, b, c) = (
                rng.random_range(0.1..3.0),
                rng.random_range(0.1..2.0),
                rng.random_range(-5.0..5.0),
            );
            let mapped: Vec<f64> = scores
                .iter()
                .map(|&s| a * (s + c).powi(3) + b * (s + c))
                .collect();
            assert_eq!(empirical_auc(&labels, &mapped, Ties::Strict).unwrap(), auc);
            assert_eq!(empirical_ap(&labels, &mapped).unwrap(), ap);
        }
    }

    #[test]
    fn curves_on_a_small_cohort() {
        let labels = [1u8, 1, 0, 0];
        let old = [3.0, 1.0, 2.0, 0.0];
        let new = [3.0, 2.5, 2.0, 0.0];
        let d = delta_alpha_curve(&labels, &old, &new, &[0.5]).unwrap();
        // old: q=1, Fhat0(1)=0.5; new: q=2.5, Fhat0(2.5)=1.0
        assert_eq!(d, vec![0.5]);
        let w = ap_weight_curve(&labels, &old, &new, &[0.5]).unwrap();
        // pi=1/2 -> k=1; s_new=0, s_old=0.5 -> h_new=1, h_old=0.5 -> w=1
        assert_eq!(w, vec![1.0]);
        assert!(delta_alpha_curve(&labels, &old, &new, &[1.0]).is_err());
    }

    #[test]
    fn validation_errors_carry_row_numbers() {
        let err = empirical_auc(&[1, 2], &[0.5, 0.6], Ties::Strict).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(matches!(
            empirical_auc(&[1, 1], &[0.5, 0.6], Ties::Strict),
            Err(Error::DegenerateCohort(_))
        ));
    }

    #[test]
    fn cohort_column_lookup_lists_available() {
        let mut cols = BTreeMap::new();
        cols.insert("model_a".to_string(), vec![0.1, 0.2]);
        cols.insert("model_b".to_string(), vec![0.3, 0.4]);
        let c = Cohort::new(vec![1, 0], cols).unwrap();
        assert_eq!(c.pi_hat(), 0.5);
        let err = c.column("model_c").unwrap_err();
        assert!(err.to_string().contains("model_a, model_b"), "{err}");
    }
}
