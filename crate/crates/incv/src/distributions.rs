//! Representations of a risk score's two conditional distributions: the score
//! among events (`F1`) and among non-events (`F0`), plus the event rate.
//!
//! Three concrete forms:
//!
//! * [`GaussianPair`] — both conditionals normal, everything closed-form;
//! * [`TabulatedPair`] — arbitrary smooth densities tabulated on a uniform
//!   grid (how the probit module hands its working-model scores over);
//! * [`EmpiricalPair`] — step functions from a finite labeled sample.
//!
//! The first two implement [`ScoreDistribution`], the common interface the
//! analytic metrics integrate against. `EmpiricalPair` stays separate: its
//! CDFs are not differentiable and the empirical estimators never need a pdf.

use crate::error::{Error, Result};
use crate::numerics::normal::{normal_cdf, normal_pdf, normal_sf, ppnd16};
use crate::numerics::root::find_root;

/// Event/non-event conditional score distributions with an event rate.
///
/// `sf*` are survival functions; implementations override them where
/// `1 - cdf` would lose the upper tail to cancellation (the average-precision
/// integrand divides one tail by another, so this matters).
pub trait ScoreDistribution {
    fn event_rate(&self) -> f64;
    /// Interval carrying all but a negligible (< 1e-12) sliver of both
    /// conditional distributions.
    fn support(&self) -> (f64, f64);
    fn pdf1(&self, c: f64) -> f64;
    fn cdf1(&self, c: f64) -> f64;
    fn pdf0(&self, c: f64) -> f64;
    fn cdf0(&self, c: f64) -> f64;

    fn sf1(&self, c: f64) -> f64 {
        1.0 - self.cdf1(c)
    }
    fn sf0(&self, c: f64) -> f64 {
        1.0 - self.cdf0(c)
    }

    /// `q_alpha`: the alpha-quantile of the event-score distribution.
    /// Default implementation brackets `cdf1(c) = alpha` over the support.
    fn quantile1(&self, alpha: f64) -> f64 {
        debug_assert!(alpha > 0.0 && alpha < 1.0);
        let (lo, hi) = self.support();
        if self.cdf1(lo) >= alpha {
            return lo;
        }
        if self.cdf1(hi) <= alpha {
            return hi;
        }
        let (root, _) = find_root(|c| self.cdf1(c) - alpha, lo, hi, 1e-12)
            .expect("cdf1 is monotone with a sign change inside the support");
        root
    }
}

/// Both conditional score distributions normal. Fields hold **variances**.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    pub mu1: f64,
    pub var1: f64,
    pub mu0: f64,
    pub var0: f64,
    pub pi: f64,
}

impl GaussianPair {
    pub fn new(mu1: f64, var1: f64, mu0: f64, var0: f64, pi: f64) -> Result<Self> {
        if !(var1 > 0.0 && var0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "variances must be positive, got var1={var1}, var0={var0}"
            )));
        }
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::InvalidInput(format!(
                "event rate must lie in (0,1), got {pi}"
            )));
        }
        Ok(Self {
            mu1,
            var1,
            mu0,
            var0,
            pi,
        })
    }

    pub fn sd1(&self) -> f64 {
        self.var1.sqrt()
    }

    pub fn sd0(&self) -> f64 {
        self.var0.sqrt()
    }
}

impl ScoreDistribution for GaussianPair {
    fn event_rate(&self) -> f64 {
        self.pi
    }

    fn support(&self) -> (f64, f64) {
        let lo = (self.mu1 - 8.5 * self.sd1()).min(self.mu0 - 8.5 * self.sd0());
        let hi = (self.mu1 + 8.5 * self.sd1()).max(self.mu0 + 8.5 * self.sd0());
        (lo, hi)
    }

    fn pdf1(&self, c: f64) -> f64 {
        normal_pdf((c - self.mu1) / self.sd1()) / self.sd1()
    }
    fn cdf1(&self, c: f64) -> f64 {
        normal_cdf((c - self.mu1) / self.sd1())
    }
    fn sf1(&self, c: f64) -> f64 {
        normal_sf((c - self.mu1) / self.sd1())
    }
    fn pdf0(&self, c: f64) -> f64 {
        normal_pdf((c - self.mu0) / self.sd0()) / self.sd0()
    }
    fn cdf0(&self, c: f64) -> f64 {
        normal_cdf((c - self.mu0) / self.sd0())
    }
    fn sf0(&self, c: f64) -> f64 {
        normal_sf((c - self.mu0) / self.sd0())
    }

    fn quantile1(&self, alpha: f64) -> f64 {
        debug_assert!(alpha > 0.0 && alpha < 1.0);
        self.mu1 + self.sd1() * ppnd16(alpha)
    }
}

/// Smooth conditional densities tabulated on a uniform grid.
///
/// Construction evaluates each density at the nodes *and* the cell midpoints,
/// cumulates per-cell Simpson increments into the CDFs (forward) and survival
/// functions (backward, so the upper tail keeps relative accuracy), and
/// interpolates the CDF between nodes with a cubic Hermite whose node slopes
/// are the densities themselves. `pdf` is the derivative of that interpolant,
/// which keeps `pdf` and `cdf` exactly consistent.
#[derive(Debug, Clone)]
pub struct TabulatedPair {
    lo: f64,
    h: f64,
    pi: f64,
    f1: Vec<f64>,
    f0: Vec<f64>,
    cdf1: Vec<f64>,
    cdf0: Vec<f64>,
    sf1: Vec<f64>,
    sf0: Vec<f64>,
}

impl TabulatedPair {
    /// Tabulate `density1`/`density0` over `[lo, hi]` on `n` nodes (n odd
    /// keeps nothing special — any n >= 9 works; the study uses 2001).
    pub fn from_densities(
        density1: impl Fn(f64) -> Result<f64>,
        density0: impl Fn(f64) -> Result<f64>,
        lo: f64,
        hi: f64,
        n: usize,
        pi: f64,
    ) -> Result<Self> {
        Self::from_joint_densities(|c| Ok((density1(c)?, density0(c)?)), lo, hi, n, pi)
    }

    /// Same as [`from_densities`](Self::from_densities) but with one closure
    /// returning `(f1, f0)` together, for densities whose evaluation shares
    /// expensive work (the probit working-model densities integrate the same
    /// kernel for both classes).
    pub fn from_joint_densities(
        densities: impl Fn(f64) -> Result<(f64, f64)>,
        lo: f64,
        hi: f64,
        n: usize,
        pi: f64,
    ) -> Result<Self> {
        if !(hi > lo) || n < 9 {
            return Err(Error::InvalidInput(format!(
                "tabulation needs hi > lo and n >= 9, got [{lo}, {hi}], n={n}"
            )));
        }
        if !(pi > 0.0 && pi < 1.0) {
            return Err(Error::InvalidInput(format!(
                "event rate must lie in (0,1), got {pi}"
            )));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let mut nodes1 = Vec::with_capacity(n);
        let mut nodes0 = Vec::with_capacity(n);
        let mut mids1 = Vec::with_capacity(n - 1);
        let mut mids0 = Vec::with_capacity(n - 1);
        for i in 0..n {
            let (a, b) = densities(lo + h * i as f64)?;
            nodes1.push(a.max(0.0));
            nodes0.push(b.max(0.0));
        }
        for i in 0..n - 1 {
            let (a, b) = densities(lo + h * (i as f64 + 0.5))?;
            mids1.push(a.max(0.0));
            mids0.push(b.max(0.0));
        }
        let cumulate = |nodes: &[f64], mids: &[f64]| {
            let mut cdf = Vec::with_capacity(n);
            let mut inc = Vec::with_capacity(n - 1);
            let mut acc = 0.0;
            cdf.push(0.0);
            for i in 0..n - 1 {
                let di = h / 6.0 * (nodes[i] + 4.0 * mids[i] + nodes[i + 1]);
                inc.push(di);
                acc += di;
                cdf.push(acc);
            }
            let mut sf = vec![0.0; n];
            for i in (0..n - 1).rev() {
                sf[i] = sf[i + 1] + inc[i];
            }
            (cdf, sf)
        };
        let (cdf1, sf1) = cumulate(&nodes1, &mids1);
        let (cdf0, sf0) = cumulate(&nodes0, &mids0);
        Ok(Self {
            lo,
            h,
            pi,
            f1: nodes1,
            f0: nodes0,
            cdf1,
            cdf0,
            sf1,
            sf0,
        })
    }

    fn n(&self) -> usize {
        self.f1.len()
    }

    fn hi(&self) -> f64 {
        self.lo + self.h * (self.n() - 1) as f64
    }

    fn cell(&self, c: f64) -> (usize, f64) {
        let i =
            (((c - self.lo) / self.h).floor() as isize).clamp(0, self.n() as isize - 2) as usize;
        let t = (c - (self.lo + self.h * i as f64)) / self.h;
        (i, t)
    }

    // cubic Hermite through (F_i, F_{i+1}) with slopes (f_i, f_{i+1})
    fn interp_cdf(cdf: &[f64], f: &[f64], h: f64, i: usize, t: f64) -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        cdf[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * f[i] * (t3 - 2.0 * t2 + t)
            + cdf[i + 1] * (-2.0 * t3 + 3.0 * t2)
            + h * f[i + 1] * (t3 - t2)
    }

    fn interp_pdf(cdf: &[f64], f: &[f64], h: f64, i: usize, t: f64) -> f64 {
        let t2 = t * t;
        let d = cdf[i] * (6.0 * t2 - 6.0 * t)
            + h * f[i] * (3.0 * t2 - 4.0 * t + 1.0)
            + cdf[i + 1] * (-6.0 * t2 + 6.0 * t)
            + h * f[i + 1] * (3.0 * t2 - 2.0 * t);
        (d / h).max(0.0)
    }

    fn eval_cdf(&self, cdf: &[f64], f: &[f64], c: f64) -> f64 {
        if c <= self.lo {
            return 0.0;
        }
        if c >= self.hi() {
            return cdf[self.n() - 1];
        }
        let (i, t) = self.cell(c);
        Self::interp_cdf(cdf, f, self.h, i, t)
    }

    // survival interpolated in its own basis (slopes -f), never as 1 - cdf:
    // subtracting near-1 CDF values would erase the upper tail
    fn eval_sf(&self, sf: &[f64], f: &[f64], c: f64) -> f64 {
        if c <= self.lo {
            return sf[0];
        }
        if c >= self.hi() {
            return 0.0;
        }
        let (i, t) = self.cell(c);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = sf[i] * (2.0 * t3 - 3.0 * t2 + 1.0) - self.h * f[i] * (t3 - 2.0 * t2 + t)
            + sf[i + 1] * (-2.0 * t3 + 3.0 * t2)
            - self.h * f[i + 1] * (t3 - t2);
        v.max(0.0)
    }

    fn eval_pdf(&self, cdf: &[f64], f: &[f64], c: f64) -> f64 {
        if c < self.lo || c > self.hi() {
            return 0.0;
        }
        let (i, t) = self.cell(c);
        Self::interp_pdf(cdf, f, self.h, i, t)
    }

    /// Total mass of the tabulated event density (should be 1 up to
    /// tabulation error; exposed so callers can verify normalization).
    pub fn total_mass(&self) -> (f64, f64) {
        (self.cdf1[self.n() - 1], self.cdf0[self.n() - 1])
    }
}

impl ScoreDistribution for TabulatedPair {
    fn event_rate(&self) -> f64 {
        self.pi
    }

    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi())
    }

    fn pdf1(&self, c: f64) -> f64 {
        self.eval_pdf(&self.cdf1, &self.f1, c)
    }
    fn cdf1(&self, c: f64) -> f64 {
        self.eval_cdf(&self.cdf1, &self.f1, c)
    }
    fn sf1(&self, c: f64) -> f64 {
        self.eval_sf(&self.sf1, &self.f1, c)
    }
    fn pdf0(&self, c: f64) -> f64 {
        self.eval_pdf(&self.cdf0, &self.f0, c)
    }
    fn cdf0(&self, c: f64) -> f64 {
        self.eval_cdf(&self.cdf0, &self.f0, c)
    }
    fn sf0(&self, c: f64) -> f64 {
        self.eval_sf(&self.sf0, &self.f0, c)
    }

    fn quantile1(&self, alpha: f64) -> f64 {
        debug_assert!(alpha > 0.0 && alpha < 1.0);
        let n = self.n();
        if alpha <= self.cdf1[0] {
            return self.lo;
        }
        if alpha >= self.cdf1[n - 1] {
            return self.hi();
        }
        // bracketing cell, then solve the cubic inside it
        let i = self.cdf1.partition_point(|&v| v < alpha).min(n - 1) - 1;
        let a = self.lo + self.h * i as f64;
        let b = a + self.h;
        let g =
            |c: f64| Self::interp_cdf(&self.cdf1, &self.f1, self.h, i, (c - a) / self.h) - alpha;
        match find_root(g, a, b, 1e-13) {
            Ok((root, _)) => root,
            Err(_) => a, // flat cell: any point of it is an alpha-quantile
        }
    }
}

/// Sorted per-class score samples with the empirical event rate.
#[derive(Debug, Clone)]
pub struct EmpiricalPair {
    events: Vec<f64>,
    nonevents: Vec<f64>,
    pi_hat: f64,
}

impl EmpiricalPair {
    pub fn from_labels_scores(labels: &[u8], scores: &[f64]) -> Result<Self> {
        if labels.len() != scores.len() {
            return Err(Error::InvalidInput(format!(
                "labels and scores lengths differ: {} vs {}",
                labels.len(),
                scores.len()
            )));
        }
        let mut events = Vec::new();
        let mut nonevents = Vec::new();
        for (&d, &s) in labels.iter().zip(scores) {
            if !s.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite score {s}")));
            }
            match d {
                1 => events.push(s),
                0 => nonevents.push(s),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "label must be 0 or 1, got {other}"
                    )))
                }
            }
        }
        if events.is_empty() || nonevents.is_empty() {
            return Err(Error::DegenerateCohort(
                "need at least one event and one non-event".into(),
            ));
        }
        events.sort_by(f64::total_cmp);
        nonevents.sort_by(f64::total_cmp);
        let pi_hat = events.len() as f64 / (events.len() + nonevents.len()) as f64;
        Ok(Self {
            events,
            nonevents,
            pi_hat,
        })
    }

    pub fn pi_hat(&self) -> f64 {
        self.pi_hat
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn nonevents(&self) -> &[f64] {
        &self.nonevents
    }

    /// Empirical event-score CDF: fraction of event scores <= c.
    pub fn fhat1(&self, c: f64) -> f64 {
        self.events.partition_point(|&s| s <= c) as f64 / self.events.len() as f64
    }

    /// Empirical non-event-score CDF: fraction of non-event scores <= c.
    pub fn fhat0(&self, c: f64) -> f64 {
        self.nonevents.partition_point(|&s| s <= c) as f64 / self.nonevents.len() as f64
    }

    /// Left-continuous-inverse (type 1) quantile of the event scores: the
    /// smallest score whose empirical CDF reaches alpha.
    pub fn quantile1(&self, alpha: f64) -> f64 {
        debug_assert!(alpha > 0.0 && alpha <= 1.0);
        let n = self.events.len() as f64;
        let k = (alpha * n).ceil().max(1.0) as usize;
        self.events[k.min(self.events.len()) - 1]
    }
}

#[cfg(test)]
pub(crate) use tests::{r1, r2, r3};

#[cfg(test)]
mod tests {
    use super::*;

    // Worked fixtures used across the crate's tests: event scores N(1.8, sd 2),
    // N(1.5, sd 1.5), N(3, sd 1.5); non-event scores standard normal.
    pub fn r1(pi: f64) -> GaussianPair {
        GaussianPair::new(1.8, 4.0, 0.0, 1.0, pi).unwrap()
    }
    pub fn r2(pi: f64) -> GaussianPair {
        GaussianPair::new(1.5, 2.25, 0.0, 1.0, pi).unwrap()
    }
    pub fn r3(pi: f64) -> GaussianPair {
        GaussianPair::new(3.0, 2.25, 0.0, 1.0, pi).unwrap()
    }

    #[test]
    fn identical_pair_has_uniform_f0_of_quantile() {
        let g = GaussianPair::new(0.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        for k in 1..100 {
            let a = k as f64 / 100.0;
            assert!((g.cdf0(g.quantile1(a)) - a).abs() < 1e-12);
        }
    }

    #[test]
    fn r3_median_event_score_is_three() {
        assert!((r3(0.05).quantile1(0.5) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn r1_f0_at_median_quantile() {
        // q_{0.5} = 1.8, and F0(1.8) = Phi(1.8)
        let got = r1(0.05).cdf0(r1(0.05).quantile1(0.5));
        assert!((got - 0.9640696808870742).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn quantile_identity_across_alpha_grid() {
        for d in [r1(0.05), r2(0.05), r3(0.05)] {
            for k in 1..=999 {
                let a = k as f64 / 1000.0;
                let err = (d.cdf1(d.quantile1(a)) - a).abs();
                assert!(err < 1e-8, "F1(q_a) != a at {a}: err {err}");
            }
        }
    }

    #[test]
    fn f0_of_quantile_dominates_alpha_where_density_ordering_holds() {
        // For r1/r2 the event-score sd exceeds the non-event sd, so the
        // likelihood-ratio ordering (and with it F0(q_a) >= a) genuinely fails
        // in the far left tail (below a ~ 0.036 for r1). Assert the dominance
        // on [0.05, 0.999] for those two, and on the full grid for r3.
        for d in [r1(0.05), r2(0.05)] {
            for k in 50..=999 {
                let a = k as f64 / 1000.0;
                assert!(d.cdf0(d.quantile1(a)) >= a, "violated at {a}");
            }
        }
        let d = r3(0.05);
        for k in 1..=999 {
            let a = k as f64 / 1000.0;
            assert!(d.cdf0(d.quantile1(a)) >= a, "violated at {a}");
        }
    }

    #[test]
    fn tabulated_matches_gaussian_closed_form() {
        let g = r1(0.05);
        let (lo, hi) = g.support();
        let t =
            TabulatedPair::from_densities(|c| Ok(g.pdf1(c)), |c| Ok(g.pdf0(c)), lo, hi, 2001, 0.05)
                .unwrap();
        let (m1, m0) = t.total_mass();
        assert!(
            (m1 - 1.0).abs() < 1e-9 && (m0 - 1.0).abs() < 1e-9,
            "mass {m1}, {m0}"
        );
        for c in [-3.0, -0.5, 0.0, 0.77, 1.8, 2.3, 4.9, 7.0] {
            assert!((t.cdf1(c) - g.cdf1(c)).abs() < 1e-9, "cdf1 at {c}");
            assert!((t.cdf0(c) - g.cdf0(c)).abs() < 1e-9, "cdf0 at {c}");
            assert!((t.pdf1(c) - g.pdf1(c)).abs() < 1e-8, "pdf1 at {c}");
            let (s, want) = (t.sf1(c), g.sf1(c));
            assert!(
                (s - want).abs() < 1e-9 && (want < 1e-6 || (s / want - 1.0).abs() < 1e-5),
                "sf1 at {c}: {s} vs {want}"
            );
        }
        for k in 1..=999 {
            let a = k as f64 / 1000.0;
            assert!(
                (t.quantile1(a) - g.quantile1(a)).abs() < 1e-7,
                "quantile at {a}"
            );
        }
    }

    #[test]
    fn tabulated_survival_keeps_relative_tail_accuracy() {
        let g = r2(0.2);
        let (lo, hi) = g.support();
        let t =
            TabulatedPair::from_densities(|c| Ok(g.pdf1(c)), |c| Ok(g.pdf0(c)), lo, hi, 2001, 0.2)
                .unwrap();
        // 1 - cdf would be pure cancellation noise out here; the backward
        // cumulation keeps several digits
        for c in [6.0, 7.5, 9.0] {
            let (s, want) = (t.sf0(c), g.sf0(c));
            assert!(
                want > 0.0 && (s / want - 1.0).abs() < 1e-3,
                "sf0({c}): {s} vs {want}"
            );
        }
    }

    #[test]
    fn empirical_pair_hand_examples() {
        let p = EmpiricalPair::from_labels_scores(&[1, 0], &[2.0, 1.0]).unwrap();
        assert_eq!(p.fhat0(p.quantile1(0.5)), 1.0);

        let p = EmpiricalPair::from_labels_scores(&[1, 1, 0, 0], &[3.0, 1.0, 2.0, 0.0]).unwrap();
        assert_eq!(p.quantile1(0.5), 1.0);
        assert_eq!(p.fhat0(1.0), 0.5);
        assert_eq!(p.pi_hat(), 0.5);
    }

    #[test]
    fn empirical_pair_rejects_degenerate_input() {
        assert!(matches!(
            EmpiricalPair::from_labels_scores(&[1, 1], &[1.0, 2.0]),
            Err(Error::DegenerateCohort(_))
        ));
        assert!(matches!(
            EmpiricalPair::from_labels_scores(&[0, 0], &[1.0, 2.0]),
            Err(Error::DegenerateCohort(_))
        ));
        assert!(EmpiricalPair::from_labels_scores(&[1, 2], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn gaussian_pair_validates() {
        assert!(GaussianPair::new(0.0, 0.0, 0.0, 1.0, 0.5).is_err());
        assert!(GaussianPair::new(0.0, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(GaussianPair::new(0.0, 1.0, 0.0, 1.0, 1.0).is_err());
    }
}
