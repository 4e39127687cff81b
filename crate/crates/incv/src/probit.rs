//! The two-marker probit world used by the numerical study.
//!
//! The true event probability is `Phi(b0 + b1 X + b2 Y + b3 XY)` with
//! independent standard normal markers X and Y. Two working probit models
//! are fit to that population by their estimating equations: a one-marker
//! model `Phi(g0 + g1 X)` and a two-marker main-effects model
//! `Phi(g0 + g1 X + g2 Y)`. Everything downstream (score distributions,
//! accuracy metrics, IncVs) is computed from the fitted population
//! coefficients, no sampling involved.
//!
//! The workhorse identity is `E[Phi(a + bZ)] = Phi(a / sqrt(1 + b^2))` for
//! standard normal Z, which collapses the intercept equation, the one-marker
//! fit, and the one-marker score densities into one-dimensional problems.

use serde::Serialize;

use crate::analytic::{analytic_ap, analytic_auc, scaled_brier_from_raw};
use crate::distributions::TabulatedPair;
use crate::error::{Error, Result, SolverReport};
use crate::numerics::normal::{normal_cdf, normal_pdf};
use crate::numerics::quad::{integrate_1d, integrate_1d_vec, integrate_2d_vec, QuadratureSpec};
use crate::numerics::root::{find_root, solve_system};

/// Standard normal mass beyond this radius is below 1e-17; marker-space
/// integrals run over this box.
const MARKER_BOUND: f64 = 8.5;
/// Nodes in each tabulated score-density grid.
const GRID_NODES: usize = 2001;
/// The score grid spans this many marginal standard deviations either side
/// of the score mean.
const GRID_SPAN_SDS: f64 = 8.0;
/// Convergence threshold on the max EE component.
const EE_TOL: f64 = 1e-9;

fn tight_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-12, MARKER_BOUND).expect("static spec is valid")
}

fn ee_spec_2d() -> QuadratureSpec {
    QuadratureSpec::new(1e-11, 1e-11, MARKER_BOUND).expect("static spec is valid")
}

fn density_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-13, 1e-9, MARKER_BOUND).expect("static spec is valid")
}

/// Probit EE weight `phi(eta) / [Phi(eta) Phi(-eta)]`. The argument is
/// clamped to +-30 and the denominator multiplies the two tail CDFs directly
/// (never `1 - Phi`), which keeps the weight finite — it approaches |eta| in
/// the tails instead of dividing by a rounded-to-zero complement.
fn ee_weight(eta: f64) -> f64 {
    let e = eta.clamp(-30.0, 30.0);
    normal_pdf(e) / (normal_cdf(e) * normal_cdf(-e))
}

/// A fully specified true model: coefficients plus the target event rate
/// (the intercept is solved so the population event rate equals `pi`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScenarioSpec {
    pub beta: [f64; 4],
    pub pi: f64,
}

impl ScenarioSpec {
    /// Solve the intercept so that `E[Phi(b0 + b1 X + b2 Y + b3 XY)] = pi`.
    pub fn new(beta1: f64, beta2: f64, beta3: f64, pi: f64) -> Result<Self> {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::InvalidInput(format!(
                "event rate must lie in (0,1), got {pi}"
            )));
        }
        if ![beta1, beta2, beta3].iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "coefficients must be finite, got ({beta1}, {beta2}, {beta3})"
            )));
        }
        let quad_err = std::cell::RefCell::new(None);
        let g = |b0: f64| match marginal_event_rate(&[b0, beta1, beta2, beta3]) {
            Ok(v) => v - pi,
            Err(e) => {
                *quad_err.borrow_mut() = Some(e);
                f64::NAN
            }
        };
        let solved = find_root(g, -12.0, 12.0, 1e-11);
        if let Some(e) = quad_err.into_inner() {
            return Err(e);
        }
        let (beta0, _) = solved?;
        Ok(Self {
            beta: [beta0, beta1, beta2, beta3],
            pi,
        })
    }

    /// Use explicit coefficients without solving the intercept. `pi` must
    /// still be the marginal event rate these coefficients imply if the
    /// scaled Brier score is to mean anything.
    pub fn from_parts(beta: [f64; 4], pi: f64) -> Result<Self> {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::InvalidInput(format!(
                "event rate must lie in (0,1), got {pi}"
            )));
        }
        Ok(Self { beta, pi })
    }

    /// True event probability given both markers.
    pub fn true_risk(&self, x: f64, y: f64) -> f64 {
        let [b0, b1, b2, b3] = self.beta;
        normal_cdf(b0 + b1 * x + b2 * y + b3 * x * y)
    }

    fn true_risk_complement(&self, x: f64, y: f64) -> f64 {
        let [b0, b1, b2, b3] = self.beta;
        normal_cdf(-(b0 + b1 * x + b2 * y + b3 * x * y))
    }

    /// Event probability given X alone, with Y integrated out in closed
    /// form: `Phi((b0 + b1 x) / sqrt(1 + (b2 + b3 x)^2))`.
    pub fn event_given_x(&self, x: f64) -> f64 {
        let [b0, b1, b2, b3] = self.beta;
        let b = b2 + b3 * x;
        normal_cdf((b0 + b1 * x) / (1.0 + b * b).sqrt())
    }

    fn event_given_x_complement(&self, x: f64) -> f64 {
        let [b0, b1, b2, b3] = self.beta;
        let b = b2 + b3 * x;
        normal_cdf(-(b0 + b1 * x) / (1.0 + b * b).sqrt())
    }

    /// Population one-marker coefficients `(g0, g1)`.
    pub fn fit_one_marker(&self) -> Result<([f64; 2], SolverReport)> {
        let spec = tight_spec();
        let g = |gamma: &[f64; 2]| {
            integrate_1d_vec::<2>(
                |x| {
                    let eta = gamma[0] + gamma[1] * x;
                    let resid = self.event_given_x(x) - normal_cdf(eta.clamp(-30.0, 30.0));
                    let base = ee_weight(eta) * resid * normal_pdf(x);
                    [base, base * x]
                },
                -MARKER_BOUND,
                MARKER_BOUND,
                &spec,
            )
        };
        let start = [self.beta[0], self.beta[1]];
        solve_system(g, start, EE_TOL).or_else(|_| solve_system(g, [0.0; 2], EE_TOL))
    }

    /// Population two-marker coefficients `(g0, g1, g2)`.
    pub fn fit_two_marker(&self) -> Result<([f64; 3], SolverReport)> {
        let spec = ee_spec_2d();
        let g = |gamma: &[f64; 3]| {
            integrate_2d_vec::<3>(
                |x, y| {
                    let eta = gamma[0] + gamma[1] * x + gamma[2] * y;
                    let resid = self.true_risk(x, y) - normal_cdf(eta.clamp(-30.0, 30.0));
                    let base = ee_weight(eta) * resid * normal_pdf(x) * normal_pdf(y);
                    [base, base * x, base * y]
                },
                (-MARKER_BOUND, MARKER_BOUND),
                (-MARKER_BOUND, MARKER_BOUND),
                &spec,
            )
        };
        let start = [self.beta[0], self.beta[1], self.beta[2]];
        solve_system(g, start, EE_TOL).or_else(|_| solve_system(g, [0.0; 3], EE_TOL))
    }

    /// Conditional score distributions of the one-marker score
    /// `r = g0 + g1 X`. Conditioning on `r = c` pins `x`, so the densities
    /// are closed-form.
    pub fn score_distribution_one(&self, gamma: &[f64; 2]) -> Result<TabulatedPair> {
        let [g0, g1] = *gamma;
        let s = g1.abs();
        if s < 1e-10 {
            return Err(Error::InvalidInput(
                "one-marker score is constant; its conditional distributions are degenerate".into(),
            ));
        }
        let pi = self.pi;
        let (lo, hi) = (g0 - GRID_SPAN_SDS * s, g0 + GRID_SPAN_SDS * s);
        TabulatedPair::from_joint_densities(
            |c| {
                let xc = (c - g0) / g1;
                let k = normal_pdf(xc) / s;
                Ok((
                    self.event_given_x(xc) * k / pi,
                    self.event_given_x_complement(xc) * k / (1.0 - pi),
                ))
            },
            lo,
            hi,
            GRID_NODES,
            pi,
        )
    }

    /// Conditional score distributions of the two-marker score
    /// `r = g0 + g1 X + g2 Y`. Given `r = c`, X is normal with mean
    /// `g1 (c - g0) / s^2` and sd `|g2| / s` (s^2 = g1^2 + g2^2), so each
    /// density value is a one-dimensional integral over that window.
    pub fn score_distribution_two(&self, gamma: &[f64; 3]) -> Result<TabulatedPair> {
        let [g0, g1, g2] = *gamma;
        if g2.abs() < 1e-10 {
            // the score ignores Y; fall back to the closed one-marker form
            return self.score_distribution_one(&[g0, g1]);
        }
        let s2 = g1 * g1 + g2 * g2;
        let s = s2.sqrt();
        let sig = g2.abs() / s;
        let pi = self.pi;
        let spec = density_spec();
        let (lo, hi) = (g0 - GRID_SPAN_SDS * s, g0 + GRID_SPAN_SDS * s);
        TabulatedPair::from_joint_densities(
            |c| {
                let xstar = g1 * (c - g0) / s2;
                let v = integrate_1d_vec::<2>(
                    |x| {
                        let yc = (c - g0 - g1 * x) / g2;
                        let k = normal_pdf(yc) / g2.abs() * normal_pdf(x);
                        [
                            self.true_risk(x, yc) * k,
                            self.true_risk_complement(x, yc) * k,
                        ]
                    },
                    xstar - MARKER_BOUND * sig,
                    xstar + MARKER_BOUND * sig,
                    &spec,
                )?;
                Ok((v[0] / pi, v[1] / (1.0 - pi)))
            },
            lo,
            hi,
            GRID_NODES,
            pi,
        )
    }

    /// Brier score of a working model with linear predictor `eta(x, y)`,
    /// computed two algebraically identical ways over the marker space:
    /// calibration-decomposed, `E[pt (1-pt)] + E[(pt - p)^2]`, and direct,
    /// `E[(1-p)^2 pt + p^2 (1-pt)]`. Returned as (decomposed, direct).
    pub fn brier_forms(&self, eta: impl Fn(f64, f64) -> f64) -> Result<(f64, f64)> {
        let spec = QuadratureSpec::new(1e-10, 1e-10, MARKER_BOUND)?;
        let v = integrate_2d_vec::<2>(
            |x, y| {
                let pt = self.true_risk(x, y);
                let qt = self.true_risk_complement(x, y);
                let p = normal_cdf(eta(x, y));
                let resid = pt - p;
                let w = normal_pdf(x) * normal_pdf(y);
                [
                    (pt * qt + resid * resid) * w,
                    ((1.0 - p) * (1.0 - p) * pt + p * p * qt) * w,
                ]
            },
            (-MARKER_BOUND, MARKER_BOUND),
            (-MARKER_BOUND, MARKER_BOUND),
            &spec,
        )?;
        Ok((v[0], v[1]))
    }
}

/// `E[Phi(b0 + b1 X + b2 Y + b3 XY)]`, reduced to one dimension by
/// integrating Y out in closed form.
pub fn marginal_event_rate(beta: &[f64; 4]) -> Result<f64> {
    let spec = tight_spec();
    let [b0, b1, b2, b3] = *beta;
    integrate_1d(
        |x| {
            let b = b2 + b3 * x;
            normal_cdf((b0 + b1 * x) / (1.0 + b * b).sqrt()) * normal_pdf(x)
        },
        -MARKER_BOUND,
        MARKER_BOUND,
        &spec,
    )
}

/// Everything the study records about one scenario: the solved true model,
/// both fitted working models, their metrics, and the IncVs (two-marker
/// minus one-marker).
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub beta: [f64; 4],
    pub pi: f64,
    pub gamma_one: [f64; 2],
    pub gamma_two: [f64; 3],
    pub auc_one: f64,
    pub auc_two: f64,
    pub ap_one: f64,
    pub ap_two: f64,
    pub sbrs_one: f64,
    pub sbrs_two: f64,
    pub delta_auc: f64,
    pub delta_ap: f64,
    pub delta_sbrs: f64,
}

/// Run one scenario end to end. Any failure is wrapped with the scenario's
/// coordinates so a grid run can report exactly which combination broke.
pub fn evaluate_scenario(beta1: f64, beta2: f64, beta3: f64, pi: f64) -> Result<ScenarioResult> {
    evaluate_scenario_inner(beta1, beta2, beta3, pi).map_err(|e| Error::Scenario {
        beta1,
        beta2,
        beta3,
        pi,
        source: Box::new(e),
    })
}

fn evaluate_scenario_inner(beta1: f64, beta2: f64, beta3: f64, pi: f64) -> Result<ScenarioResult> {
    let spec = ScenarioSpec::new(beta1, beta2, beta3, pi)?;
    let (gamma_one, _) = spec.fit_one_marker()?;
    let (gamma_two, _) = spec.fit_two_marker()?;
    let dist_one = spec.score_distribution_one(&gamma_one)?;
    let dist_two = spec.score_distribution_two(&gamma_two)?;

    let qspec = QuadratureSpec::default();
    let auc_one = analytic_auc(&dist_one, &qspec)?;
    let auc_two = analytic_auc(&dist_two, &qspec)?;
    let ap_one = analytic_ap(&dist_one, &qspec)?;
    let ap_two = analytic_ap(&dist_two, &qspec)?;

    let (brier_one, _) = spec.brier_forms(|x, _| gamma_one[0] + gamma_one[1] * x)?;
    let (brier_two, _) =
        spec.brier_forms(|x, y| gamma_two[0] + gamma_two[1] * x + gamma_two[2] * y)?;
    let sbrs_one = scaled_brier_from_raw(brier_one, pi)?;
    let sbrs_two = scaled_brier_from_raw(brier_two, pi)?;

    Ok(ScenarioResult {
        beta: spec.beta,
        pi,
        gamma_one,
        gamma_two,
        auc_one,
        auc_two,
        ap_one,
        ap_two,
        sbrs_one,
        sbrs_two,
        delta_auc: auc_two - auc_one,
        delta_ap: ap_two - ap_one,
        delta_sbrs: sbrs_two - sbrs_one,
    })
}
