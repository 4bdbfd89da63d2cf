//! Weighted ℓ^p norms, the exponential weight family e^{−γ d(·,x0)}, and
//! empirical growth-rate estimation from ball partial sums.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::GraphFunction;
use crate::graph::{Graph, VertexId};
use crate::metric::{ball, PseudoMetric};
use crate::numeric::{fmt_f64, linear_fit, stable_sum};

/// The weight φ_γ(x) = e^{−γ d(x, x0)} ∈ (0, 1], with φ_γ(x0) = 1.
#[derive(Clone)]
pub struct WeightFamily {
    graph: Graph,
    metric: PseudoMetric,
    base: VertexId,
    rate: f64,
}

impl WeightFamily {
    pub fn new(graph: Graph, metric: PseudoMetric, base: VertexId, rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight rate must be > 0, got {rate}"
            )));
        }
        if !graph.contains(&base) {
            return Err(Error::UnknownVertex(base.to_string()));
        }
        Ok(WeightFamily {
            graph,
            metric,
            base,
            rate,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn base(&self) -> &VertexId {
        &self.base
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn metric(&self) -> &PseudoMetric {
        &self.metric
    }

    /// φ_γ(x) = e^{−γ d(x, x0)}.
    pub fn value(&self, x: &VertexId) -> Result<f64> {
        let d = self.metric.distance(&self.graph, x, &self.base)?;
        Ok((-self.rate * d).exp())
    }

    /// The weight as a total closed-form graph function.
    pub fn as_function(&self) -> GraphFunction {
        let w = self.clone();
        GraphFunction::closed(move |x| w.value(x))
    }
}

/// Σ_{x ∈ B_R(x0)} |u(x)|^p φ_γ(x) μ(x) — the p-th power of the truncated
/// weighted norm, reported as the raw sum.
pub fn truncated_lp_norm(u: &GraphFunction, p: f64, w: &WeightFamily, radius: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent p must be >= 1, got {p}"
        )));
    }
    let verts = ball(w.graph(), w.metric(), w.base(), radius)?;
    let mut terms = Vec::with_capacity(verts.len());
    for x in &verts {
        let ux = u.eval(x)?.abs();
        if ux == 0.0 {
            continue;
        }
        terms.push(ux.powf(p) * w.value(x)? * w.graph().measure(x)?);
    }
    Ok(stable_sum(&terms))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    /// Tail slope of log S(R) below 1e-6.
    Bounded,
    /// Partial sums grow like e^{β̂ R}.
    Exponential,
    /// Terms overflow even under scaling; no finite rate can be fitted.
    SuperExponential,
}

/// Partial sums S(R) = Σ_{B_R} |u|^p μ along a radii schedule, with the
/// fitted exponential rate of the tail.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthEstimate {
    pub radii: Vec<f64>,
    /// Raw partial sums; may be infinite when the terms overflow.
    pub partial_sums: Vec<f64>,
    /// log S(R), computed with scaling by the largest term so it stays
    /// finite even when the raw sum overflows. −inf marks an empty sum.
    pub log_sums: Vec<f64>,
    /// Least-squares slope of log S(R) against R over the last half of the
    /// radii.
    pub beta_hat: f64,
    /// RMS residual of the fit.
    pub residual: f64,
    pub verdict: GrowthVerdict,
    /// First radius at which the raw sum stopped being finite, if any.
    pub overflow_radius: Option<f64>,
}

const BOUNDED_SLOPE: f64 = 1e-6;

/// Estimate the growth of Σ_{B_R} |u|^p μ along strictly increasing radii
/// (at least 3). The fit uses the last half of the schedule to suppress
/// transient behavior near the base point.
pub fn growth_estimate(
    g: &Graph,
    u: &GraphFunction,
    p: f64,
    x0: &VertexId,
    m: &PseudoMetric,
    radii: &[f64],
) -> Result<GrowthEstimate> {
    if radii.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 radii".into()));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "radii must be strictly increasing".into(),
        ));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "exponent p must be >= 1, got {p}"
        )));
    }

    let mut partial_sums = Vec::with_capacity(radii.len());
    let mut log_sums = Vec::with_capacity(radii.len());
    let mut overflow_radius = None;
    let mut super_exponential = false;
    for &r in radii {
        let verts = ball(g, m, x0, r)?;
        // log-terms p*ln|u| + ln μ; the raw sum is kept alongside
        let mut logs: Vec<f64> = Vec::with_capacity(verts.len());
        let mut raw_terms: Vec<f64> = Vec::with_capacity(verts.len());
        let mut bad = false;
        for x in &verts {
            let a = u.eval(x)?.abs();
            let mu = g.measure(x)?;
            if a == 0.0 {
                continue;
            }
            if !a.is_finite() || !mu.is_finite() {
                bad = true;
                break;
            }
            logs.push(p * a.ln() + mu.ln());
            raw_terms.push(a.powf(p) * mu);
        }
        if bad {
            super_exponential = true;
            if overflow_radius.is_none() {
                overflow_radius = Some(r);
            }
            partial_sums.push(f64::INFINITY);
            log_sums.push(f64::INFINITY);
            continue;
        }
        let raw = stable_sum(&raw_terms);
        if !raw.is_finite() && overflow_radius.is_none() {
            overflow_radius = Some(r);
        }
        partial_sums.push(raw);
        log_sums.push(log_sum_exp(&logs));
    }

    // fit over the last half of the schedule
    let start = radii.len() / 2;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in start..radii.len() {
        if log_sums[k].is_finite() {
            xs.push(radii[k]);
            ys.push(log_sums[k]);
        }
    }
    let (beta_hat, residual) = match linear_fit(&xs, &ys) {
        Some((slope, _, rms)) => (slope, rms),
        None => (0.0, 0.0),
    };
    let verdict = if super_exponential {
        GrowthVerdict::SuperExponential
    } else if beta_hat < BOUNDED_SLOPE {
        GrowthVerdict::Bounded
    } else {
        GrowthVerdict::Exponential
    };
    Ok(GrowthEstimate {
        radii: radii.to_vec(),
        partial_sums,
        log_sums,
        beta_hat,
        residual,
        verdict,
        overflow_radius,
    })
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    if logs.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    m + s.ln()
}

impl GrowthEstimate {
    /// CSV rows "R,partial_sum,log_partial_sum".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,partial_sum,log_partial_sum\n");
        for k in 0..self.radii.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(self.radii[k]),
                fmt_f64(self.partial_sums[k]),
                fmt_f64(self.log_sums[k])
            ));
        }
        out
    }

    /// Summary record {beta_hat, residual, verdict}.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            beta_hat: f64,
            residual: f64,
            verdict: &'a GrowthVerdict,
        }
        serde_json::to_string_pretty(&Summary {
            beta_hat: self.beta_hat,
            residual: self.residual,
            verdict: &self.verdict,
        })
        .expect("summary serialization cannot fail")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SummabilityVerdict {
    Summable,
    NotSummableOrInconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SummabilityReport {
    pub radii: Vec<f64>,
    pub totals: Vec<f64>,
    pub verdict: SummabilityVerdict,
}

/// Check Σ φ_γ μ < ∞ empirically: the weight sums along the radii schedule
/// are summable when the increments keep decaying geometrically (ratio < 1
/// sustained over the last 5 radii).
pub fn summable_weight_check(w: &WeightFamily, radii: &[f64]) -> Result<SummabilityReport> {
    if radii.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 radii".into()));
    }
    if radii.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::InvalidParameter(
            "radii must be strictly increasing".into(),
        ));
    }
    let mut totals = Vec::with_capacity(radii.len());
    for &r in radii {
        let verts = ball(w.graph(), w.metric(), w.base(), r)?;
        let mut terms = Vec::with_capacity(verts.len());
        for x in &verts {
            terms.push(w.value(x)? * w.graph().measure(x)?);
        }
        totals.push(stable_sum(&terms));
    }
    let increments: Vec<f64> = totals.windows(2).map(|t| t[1] - t[0]).collect();
    let ratios: Vec<f64> = increments
        .windows(2)
        .filter(|d| d[0] > 0.0)
        .map(|d| d[1] / d[0])
        .collect();
    let tail = ratios.len().saturating_sub(5);
    let sustained_decay = !ratios.is_empty() && ratios[tail..].iter().all(|&q| q < 1.0);
    // increments that vanished entirely mean the series converged numerically
    let converged = increments.iter().rev().take(5).all(|&d| d == 0.0) && !increments.is_empty();
    let verdict = if sustained_decay || converged {
        SummabilityVerdict::Summable
    } else {
        SummabilityVerdict::NotSummableOrInconclusive
    };
    Ok(SummabilityReport {
        radii: radii.to_vec(),
        totals,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn lat1() -> Graph {
        Graph::lattice(1).unwrap()
    }

    #[test]
    fn weight_values() {
        let g = lat1();
        let w = WeightFamily::new(
            g.clone(),
            PseudoMetric::combinatorial(),
            VertexId::from(0),
            1.0,
        )
        .unwrap();
        assert_eq!(w.value(&VertexId::from(0)).unwrap(), 1.0);
        let v3 = w.value(&VertexId::from(3)).unwrap();
        assert!((v3 - (-3.0f64).exp()).abs() <= 1e-16, "{v3}");
        assert!((v3 - 0.049787).abs() <= 1e-6);

        let sigma = 1.0 / 2f64.sqrt();
        let w2 = WeightFamily::new(
            g,
            PseudoMetric::scaled(sigma).unwrap(),
            VertexId::from(0),
            2.0,
        )
        .unwrap();
        let v1 = w2.value(&VertexId::from(1)).unwrap();
        assert!((v1 - (-2f64.sqrt()).exp()).abs() <= 1e-15);
        assert!((v1 - 0.243117).abs() <= 1e-6);
    }

    #[test]
    fn truncated_norm_three_point_ball() {
        // B_{1.5}(0) = {−1, 0, 1}: weights e^{−1}, 1, e^{−1}
        let g = lat1();
        let w =
            WeightFamily::new(g, PseudoMetric::combinatorial(), VertexId::from(0), 1.0).unwrap();
        let s = truncated_lp_norm(&GraphFunction::constant(1.0), 1.0, &w, 1.5).unwrap();
        let want = 1.0 + 2.0 * (-1.0f64).exp();
        assert!((s - want).abs() <= 1e-14);
        assert!((s - 1.735759).abs() <= 1e-6);
    }

    #[test]
    fn truncated_norm_atoms() {
        let g = lat1();
        let w =
            WeightFamily::new(g, PseudoMetric::combinatorial(), VertexId::from(0), 0.7).unwrap();
        assert_eq!(
            truncated_lp_norm(&GraphFunction::zero(), 2.0, &w, 5.0).unwrap(),
            0.0
        );
        let mut m = BTreeMap::new();
        m.insert(VertexId::from(0), 1.0);
        let ind = GraphFunction::sparse(m);
        for p in [1.0, 2.0, 3.5] {
            assert_eq!(truncated_lp_norm(&ind, p, &w, 0.5).unwrap(), 1.0);
        }
    }

    #[test]
    fn growth_estimate_of_zero_function() {
        let g = lat1();
        let est = growth_estimate(
            &g,
            &GraphFunction::zero(),
            2.0,
            &VertexId::from(0),
            &PseudoMetric::combinatorial(),
            &[1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        assert_eq!(est.verdict, GrowthVerdict::Bounded);
        assert_eq!(est.beta_hat, 0.0);
        assert!(est.partial_sums.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn growth_estimate_decaying_function_is_bounded() {
        let g = lat1();
        let u = GraphFunction::closed(|v| match v {
            VertexId::Lattice(c) if c.len() == 1 => Ok(1.0 / (1.0 + (c[0] * c[0]) as f64)),
            _ => Err(Error::DomainViolation(v.to_string())),
        });
        let radii: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
        let est = growth_estimate(
            &g,
            &u,
            2.0,
            &VertexId::from(0),
            &PseudoMetric::combinatorial(),
            &radii,
        )
        .unwrap();
        assert_eq!(
            est.verdict,
            GrowthVerdict::Bounded,
            "beta_hat = {}",
            est.beta_hat
        );
        // partial sums nondecreasing
        assert!(est.partial_sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn growth_estimate_geometric_rate() {
        // u(n) = λ^{|n|} + λ^{−|n|} on the 1/sqrt(2)-scaled line grows like
        // e^{2 sqrt(2) ln λ · R} in the p = 2 partial sums. The independent
        // oracle is the closed-form geometric series; the fitted slope must
        // land within 2% of 2·sqrt(2)·ln λ.
        let g = lat1();
        let lambda = (3.0 + 5f64.sqrt()) / 2.0;
        let u = GraphFunction::closed(move |v| match v {
            VertexId::Lattice(c) if c.len() == 1 => {
                let a = c[0].unsigned_abs() as i32;
                Ok(lambda.powi(a) + lambda.powi(-a))
            }
            _ => Err(Error::DomainViolation(v.to_string())),
        });
        // hop-aligned radii σ(k + 1/2) make B_R = {|n| <= k} exactly, so the
        // fitted slope measures the true geometric rate without staircase
        // bias from partially filled layers
        let sigma = 1.0 / 2f64.sqrt();
        let radii: Vec<f64> = (4..=24).map(|k| sigma * (k as f64 + 0.5)).collect();
        let est = growth_estimate(
            &g,
            &u,
            2.0,
            &VertexId::from(0),
            &PseudoMetric::scaled(sigma).unwrap(),
            &radii,
        )
        .unwrap();
        let oracle = 2.0 * 2f64.sqrt() * lambda.ln();
        assert!((oracle - 2.722).abs() < 1e-3, "{oracle}");
        assert_eq!(est.verdict, GrowthVerdict::Exponential);
        assert!(
            (est.beta_hat - oracle).abs() <= 0.02 * oracle,
            "beta_hat {} vs oracle {oracle}",
            est.beta_hat
        );
    }

    #[test]
    fn growth_estimate_survives_raw_overflow() {
        // |u| near 1e200 overflows the p = 2 raw sums but not the scaled logs
        let g = lat1();
        let u = GraphFunction::closed(|v| match v {
            VertexId::Lattice(c) if c.len() == 1 => Ok(1e200 * (1.0 + c[0].abs() as f64)),
            _ => Err(Error::DomainViolation(v.to_string())),
        });
        let est = growth_estimate(
            &g,
            &u,
            2.0,
            &VertexId::from(0),
            &PseudoMetric::combinatorial(),
            &[2.0, 4.0, 6.0, 8.0],
        )
        .unwrap();
        assert!(est.partial_sums.iter().any(|s| s.is_infinite()));
        assert!(est.log_sums.iter().all(|l| l.is_finite()));
        assert!(est.overflow_radius.is_some());
        assert_ne!(est.verdict, GrowthVerdict::SuperExponential);
    }

    #[test]
    fn summable_weight_on_line() {
        // γ = 1 on the combinatorial line: Σ φ = (1 + e^{−1})/(1 − e^{−1})
        let g = lat1();
        let w =
            WeightFamily::new(g, PseudoMetric::combinatorial(), VertexId::from(0), 1.0).unwrap();
        let radii: Vec<f64> = (1..=30).map(|k| k as f64 + 0.5).collect();
        let rep = summable_weight_check(&w, &radii).unwrap();
        assert_eq!(rep.verdict, SummabilityVerdict::Summable);
        let e1 = (-1.0f64).exp();
        let oracle = (1.0 + e1) / (1.0 - e1);
        assert!((oracle - 2.163953).abs() < 1e-6);
        let last = *rep.totals.last().unwrap();
        assert!((last - oracle).abs() <= 1e-10, "{last} vs {oracle}");
    }

    #[test]
    fn summable_weight_polynomial_times_exponential() {
        let g = Graph::lattice(2).unwrap();
        let w = WeightFamily::new(
            g,
            PseudoMetric::combinatorial(),
            VertexId::from((0, 0)),
            0.1,
        )
        .unwrap();
        let radii: Vec<f64> = (1..=60).map(|k| 2.0 * k as f64 + 0.5).collect();
        let rep = summable_weight_check(&w, &radii).unwrap();
        assert_eq!(rep.verdict, SummabilityVerdict::Summable);
    }

    #[test]
    fn non_summable_weight_on_tree() {
        // sphere sizes on the 3-regular tree grow like 2^k, so the increments
        // of Σ φ_γ μ grow by factor 2 e^{−γσ}; with γσ < ln 2 they diverge.
        let g = Graph::regular_tree(3).unwrap();
        let sigma = 1.0 / 3f64.sqrt();
        let gamma = 0.5;
        assert!(gamma * sigma < std::f64::consts::LN_2);
        let w = WeightFamily::new(
            g,
            PseudoMetric::scaled(sigma).unwrap(),
            VertexId::tree_root(),
            gamma,
        )
        .unwrap();
        let radii: Vec<f64> = (1..=12).map(|k| sigma * (k as f64 + 0.5)).collect();
        let rep = summable_weight_check(&w, &radii).unwrap();
        assert_eq!(rep.verdict, SummabilityVerdict::NotSummableOrInconclusive);
    }
}
