//! Population (analytic) accuracy metrics for a risk score with known
//! conditional distributions, and the incremental value of one score over
//! another.
//!
//! Two equivalent routes exist for the rank-based metrics and both are
//! implemented: integration over the score domain (`analytic_auc`,
//! `analytic_ap`) and integration over the event-quantile level alpha
//! (`auc_via_alpha`, `ap_via_alpha`). The score-domain forms are the primary
//! ones; the alpha-domain forms exist because the *difference* between two
//! models lives naturally on the alpha scale, which is what
//! [`analytic_incv`] tabulates.

use serde::Serialize;

use crate::distributions::ScoreDistribution;
use crate::error::{Error, Result};
use crate::numerics::quad::{integrate_1d, QuadratureSpec};

/// AUC = P(score of a random event exceeds the score of a random non-event):
/// integral of `F0(c) f1(c)` over the score domain.
pub fn analytic_auc<D: ScoreDistribution + ?Sized>(d: &D, spec: &QuadratureSpec) -> Result<f64> {
    let (lo, hi) = d.support();
    let v = integrate_1d(|c| d.cdf0(c) * d.pdf1(c), lo, hi, spec)?;
    Ok(v.clamp(0.0, 1.0))
}

/// Positive predictive value of the rule "score > c".
fn ppv<D: ScoreDistribution + ?Sized>(d: &D, c: f64) -> f64 {
    let pi = d.event_rate();
    let a = pi * d.sf1(c);
    let b = (1.0 - pi) * d.sf0(c);
    // both tails empty: no one is classified positive; the limit of the
    // ratio is immaterial because every integrand weights it by f1 = 0
    if a + b <= f64::MIN_POSITIVE {
        1.0
    } else {
        a / (a + b)
    }
}

/// AP = E[PPV(c)] with c drawn from the event-score distribution:
/// integral of `ppv(c) f1(c)` over the score domain.
pub fn analytic_ap<D: ScoreDistribution + ?Sized>(d: &D, spec: &QuadratureSpec) -> Result<f64> {
    let (lo, hi) = d.support();
    let v = integrate_1d(|c| ppv(d, c) * d.pdf1(c), lo, hi, spec)?;
    Ok(v.clamp(0.0, 1.0))
}

// "hit function" at level alpha: the PPV of flagging everyone above the
// alpha-quantile of the event scores, written to avoid the upper-tail
// cancellation of 1 - F0:
//   h(alpha) = 1 / (1 + (1/pi - 1) * S0(q_alpha) / (1 - alpha))
// AP is the integral of h over alpha in (0,1), and the weighted IncV
// integrand below is exactly h_new - h_old pointwise.
fn hit<D: ScoreDistribution + ?Sized>(d: &D, alpha: f64) -> f64 {
    let k = 1.0 / d.event_rate() - 1.0;
    let s0 = d.sf0(d.quantile1(alpha));
    1.0 / (1.0 + k * s0 / (1.0 - alpha))
}

/// AUC recomputed as the alpha-domain integral of `F0(q_alpha)`.
pub fn auc_via_alpha<D: ScoreDistribution + ?Sized>(d: &D, spec: &QuadratureSpec) -> Result<f64> {
    let eps = 1e-9;
    let v = integrate_1d(|a| d.cdf0(d.quantile1(a)), eps, 1.0 - eps, spec)?;
    Ok(v.clamp(0.0, 1.0))
}

/// AP recomputed as the alpha-domain integral of the hit function.
pub fn ap_via_alpha<D: ScoreDistribution + ?Sized>(d: &D, spec: &QuadratureSpec) -> Result<f64> {
    let eps = 1e-9;
    let v = integrate_1d(|a| hit(d, a), eps, 1.0 - eps, spec)?;
    Ok(v.clamp(0.0, 1.0))
}

/// The alpha-level decomposition of the incremental value of `new` over
/// `old`, tabulated on a uniform interior alpha grid.
///
/// * `delta_alpha[k]` — difference of non-event CDFs at each model's own
///   event quantile: `F0_new(q_new) - F0_old(q_old)`. Integrating it over
///   alpha gives `delta_auc`.
/// * `ap_weight[k]` — the AP weight `w(alpha)`; integrating
///   `ap_weight * delta_alpha` gives `delta_ap`.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyticIncV {
    pub delta_auc: f64,
    pub delta_ap: f64,
    pub alpha_grid: Vec<f64>,
    pub delta_alpha: Vec<f64>,
    pub ap_weight: Vec<f64>,
    pub weighted_integrand: Vec<f64>,
}

fn check_same_rate<A, B>(new: &A, old: &B) -> Result<()>
where
    A: ScoreDistribution + ?Sized,
    B: ScoreDistribution + ?Sized,
{
    let (pn, po) = (new.event_rate(), old.event_rate());
    if (pn - po).abs() > 1e-12 {
        return Err(Error::MismatchedEventRate {
            old_pi: po,
            new_pi: pn,
        });
    }
    Ok(())
}

/// Compare two risk scores for the same outcome: scalar IncVs plus the
/// alpha-level curves on a grid of `n_alpha` points `k/(n_alpha+1)`.
///
/// Errors if the two distributions disagree about the event rate.
pub fn analytic_incv<A, B>(
    new: &A,
    old: &B,
    spec: &QuadratureSpec,
    n_alpha: usize,
) -> Result<AnalyticIncV>
where
    A: ScoreDistribution + ?Sized,
    B: ScoreDistribution + ?Sized,
{
    check_same_rate(new, old)?;
    let delta_auc = analytic_auc(new, spec)? - analytic_auc(old, spec)?;
    let delta_ap = analytic_ap(new, spec)? - analytic_ap(old, spec)?;

    let k = 1.0 / new.event_rate() - 1.0;
    let n = n_alpha.max(1);
    let mut alpha_grid = Vec::with_capacity(n);
    let mut delta_alpha = Vec::with_capacity(n);
    let mut ap_weight = Vec::with_capacity(n);
    let mut weighted = Vec::with_capacity(n);
    for i in 1..=n {
        let a = i as f64 / (n + 1) as f64;
        let sn = new.sf0(new.quantile1(a));
        let so = old.sf0(old.quantile1(a));
        // F0_new - F0_old, via survivals so the alpha -> 1 end stays exact
        let da = so - sn;
        let hn = 1.0 / (1.0 + k * sn / (1.0 - a));
        let ho = 1.0 / (1.0 + k * so / (1.0 - a));
        let w = k / (1.0 - a) * hn * ho;
        alpha_grid.push(a);
        delta_alpha.push(da);
        ap_weight.push(w);
        weighted.push(w * da);
    }
    Ok(AnalyticIncV {
        delta_auc,
        delta_ap,
        alpha_grid,
        delta_alpha,
        ap_weight,
        weighted_integrand: weighted,
    })
}

/// Rebuild `delta_auc` by integrating `delta_alpha` over alpha. Agreement
/// with the score-domain value is a consistency check on the whole pipeline.
pub fn reconstruct_delta_auc<A, B>(new: &A, old: &B, spec: &QuadratureSpec) -> Result<f64>
where
    A: ScoreDistribution + ?Sized,
    B: ScoreDistribution + ?Sized,
{
    check_same_rate(new, old)?;
    let eps = 1e-9;
    let v = integrate_1d(
        |a| old.sf0(old.quantile1(a)) - new.sf0(new.quantile1(a)),
        eps,
        1.0 - eps,
        spec,
    )?;
    Ok(v)
}

/// Rebuild `delta_ap` by integrating the weighted integrand over alpha.
///
/// Pointwise, `w(alpha) * delta(alpha)` equals `h_new(alpha) - h_old(alpha)`
/// for the hit function `h` above; the difference form is what gets
/// integrated because it stays exact at both alpha endpoints.
pub fn reconstruct_delta_ap<A, B>(new: &A, old: &B, spec: &QuadratureSpec) -> Result<f64>
where
    A: ScoreDistribution + ?Sized,
    B: ScoreDistribution + ?Sized,
{
    check_same_rate(new, old)?;
    let eps = 1e-6;
    let v = integrate_1d(|a| hit(new, a) - hit(old, a), eps, 1.0 - eps, spec)?;
    Ok(v)
}

/// Brier score of a score distribution whose scores map to event
/// probabilities through `link` (identity if the scores already are
/// probabilities): `pi E1[(1-p)^2] + (1-pi) E0[p^2]`.
pub fn analytic_brier<D, L>(d: &D, link: L, spec: &QuadratureSpec) -> Result<f64>
where
    D: ScoreDistribution + ?Sized,
    L: Fn(f64) -> f64,
{
    let (lo, hi) = d.support();
    let pi = d.event_rate();
    let e1 = integrate_1d(
        |c| {
            let p = link(c);
            (1.0 - p) * (1.0 - p) * d.pdf1(c)
        },
        lo,
        hi,
        spec,
    )?;
    let e0 = integrate_1d(
        |c| {
            let p = link(c);
            p * p * d.pdf0(c)
        },
        lo,
        hi,
        spec,
    )?;
    Ok(pi * e1 + (1.0 - pi) * e0)
}

/// Scaled Brier score: 1 - BrS / [pi (1 - pi)], the improvement over the
/// no-covariate model that predicts `pi` for everyone.
pub fn scaled_brier_from_raw(brier: f64, pi: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidInput(format!(
            "event rate must lie in (0,1), got {pi}"
        )));
    }
    Ok(1.0 - brier / (pi * (1.0 - pi)))
}
