//! Cohort simulation, for checking the analytic machinery against its
//! empirical counterparts and for generating example data sets.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::GaussianPair;
use crate::error::{Error, Result};
use crate::numerics::normal::normal_cdf;

/// A simulated labeled cohort carrying two score columns per subject.
#[derive(Debug, Clone)]
pub struct SimulatedCohort {
    pub labels: Vec<u8>,
    pub old_scores: Vec<f64>,
    pub new_scores: Vec<f64>,
}

/// Draw `n` subjects: event status from the shared event rate, then each
/// model's score from its class-conditional normal. Given the label the two
/// scores are drawn independently — their joint dependence does not affect
/// any of the marginal accuracy metrics.
pub fn sample_gaussian_cohort(
    old: &GaussianPair,
    new: &GaussianPair,
    n: usize,
    rng: &mut impl Rng,
) -> Result<SimulatedCohort> {
    if (old.pi - new.pi).abs() > 1e-12 {
        return Err(Error::MismatchedEventRate {
            old_pi: old.pi,
            new_pi: new.pi,
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("cohort size must be positive".into()));
    }
    let mut labels = Vec::with_capacity(n);
    let mut old_scores = Vec::with_capacity(n);
    let mut new_scores = Vec::with_capacity(n);
    for _ in 0..n {
        let d = u8::from(rng.random::<f64>() < old.pi);
        let zo: f64 = rng.sample(StandardNormal);
        let zn: f64 = rng.sample(StandardNormal);
        if d == 1 {
            old_scores.push(old.mu1 + old.sd1() * zo);
            new_scores.push(new.mu1 + new.sd1() * zn);
        } else {
            old_scores.push(old.mu0 + old.sd0() * zo);
            new_scores.push(new.mu0 + new.sd0() * zn);
        }
        labels.push(d);
    }
    Ok(SimulatedCohort {
        labels,
        old_scores,
        new_scores,
    })
}

/// One subject drawn from the two-marker probit world: the true risk uses
/// both markers and their interaction; the working risks apply the fitted
/// one- and two-marker coefficients.
#[derive(Debug, Clone, Copy)]
pub struct ProbitDraw {
    pub d: u8,
    pub x: f64,
    pub y: f64,
    pub p_true: f64,
    pub p_one: f64,
    pub p_two: f64,
}

pub fn simulate_probit(
    beta: &[f64; 4],
    gamma_one: &[f64; 2],
    gamma_two: &[f64; 3],
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<ProbitDraw>> {
    if n == 0 {
        return Err(Error::InvalidInput("cohort size must be positive".into()));
    }
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let p_true = normal_cdf(beta[0] + beta[1] * x + beta[2] * y + beta[3] * x * y);
        let d = u8::from(rng.random::<f64>() < p_true);
        rows.push(ProbitDraw {
            d,
            x,
            y,
            p_true,
            p_one: normal_cdf(gamma_one[0] + gamma_one[1] * x),
            p_two: normal_cdf(gamma_two[0] + gamma_two[1] * x + gamma_two[2] * y),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{analytic_ap, analytic_auc};
    use crate::distributions::{r1, r2};
    use crate::empirical::{delta_alpha_curve, empirical_ap, empirical_auc, Ties};
    use crate::numerics::quad::QuadratureSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let (old, new) = (r2(0.2), r1(0.2));
        let a = sample_gaussian_cohort(&old, &new, 50, &mut ChaCha12Rng::seed_from_u64(3)).unwrap();
        let b = sample_gaussian_cohort(&old, &new, 50, &mut ChaCha12Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.old_scores, b.old_scores);
        let c = sample_gaussian_cohort(&old, &new, 50, &mut ChaCha12Rng::seed_from_u64(4)).unwrap();
        assert_ne!(a.old_scores, c.old_scores);
    }

    #[test]
    fn empirical_metrics_converge_to_analytic_values() {
        let (old, new) = (r2(0.2), r1(0.2));
        let cohort =
            sample_gaussian_cohort(&old, &new, 200_000, &mut ChaCha12Rng::seed_from_u64(11))
                .unwrap();
        let spec = QuadratureSpec::default();
        let checks = [
            (
                empirical_auc(&cohort.labels, &cohort.old_scores, Ties::Strict).unwrap(),
                analytic_auc(&old, &spec).unwrap(),
            ),
            (
                empirical_auc(&cohort.labels, &cohort.new_scores, Ties::Strict).unwrap(),
                analytic_auc(&new, &spec).unwrap(),
            ),
            (
                empirical_ap(&cohort.labels, &cohort.old_scores).unwrap(),
                analytic_ap(&old, &spec).unwrap(),
            ),
            (
                empirical_ap(&cohort.labels, &cohort.new_scores).unwrap(),
                analytic_ap(&new, &spec).unwrap(),
            ),
        ];
        for (got, want) in checks {
            assert!(
                (got - want).abs() < 0.01,
                "empirical {got} vs analytic {want}"
            );
        }
    }

    #[test]
    fn empirical_delta_alpha_gets_the_signs_right() {
        // new = r1 vs old = r2: the population curve is negative at low alpha
        // and positive from about 0.28 up; check the sign where the signal
        // is well above sampling noise at this n
        let (old, new) = (r2(0.2), r1(0.2));
        let cohort =
            sample_gaussian_cohort(&old, &new, 200_000, &mut ChaCha12Rng::seed_from_u64(5))
                .unwrap();
        let alphas = [0.05, 0.1, 0.15, 0.2, 0.8, 0.85, 0.9];
        let d = delta_alpha_curve(
            &cohort.labels,
            &cohort.old_scores,
            &cohort.new_scores,
            &alphas,
        )
        .unwrap();
        for i in 0..4 {
            assert!(
                d[i] < 0.0,
                "expected negative at alpha={}, got {}",
                alphas[i],
                d[i]
            );
        }
        for i in 4..7 {
            assert!(
                d[i] > 0.0,
                "expected positive at alpha={}, got {}",
                alphas[i],
                d[i]
            );
        }
    }

    #[test]
    fn probit_draws_match_marginals() {
        // an uninformative world: beta = 0 except intercept -> every p is
        // Phi(b0) exactly
        let beta = [-1.2815515655446004, 0.0, 0.0, 0.0]; // Phi^-1(0.1)
        let rows = simulate_probit(
            &beta,
            &[-1.0, 0.5],
            &[-1.0, 0.5, 0.25],
            100_000,
            &mut ChaCha12Rng::seed_from_u64(9),
        )
        .unwrap();
        let rate = rows.iter().filter(|r| r.d == 1).count() as f64 / rows.len() as f64;
        // 3 binomial SEs at n = 1e5
        assert!(
            (rate - 0.1).abs() < 3.0 * (0.1f64 * 0.9 / 1e5).sqrt(),
            "rate {rate}"
        );
        for r in rows.iter().take(50) {
            assert!((r.p_true - 0.1).abs() < 1e-12);
            assert!((r.p_one - normal_cdf(-1.0 + 0.5 * r.x)).abs() < 1e-15);
            assert!((r.p_two - normal_cdf(-1.0 + 0.5 * r.x + 0.25 * r.y)).abs() < 1e-15);
        }
        // markers are standard normal: sample means near 0
        let mx = rows.iter().map(|r| r.x).sum::<f64>() / rows.len() as f64;
        assert!(mx.abs() < 0.01, "mean x {mx}");
    }

    #[test]
    fn mismatched_rates_rejected() {
        let err =
            sample_gaussian_cohort(&r2(0.2), &r1(0.1), 10, &mut ChaCha12Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::MismatchedEventRate { .. })));
    }
}
