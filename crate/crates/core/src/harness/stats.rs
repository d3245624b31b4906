use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    ChiSquare,
    MannWhitneyU,
    NegativeBinomial,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::ChiSquare => "chi_square",
            TestKind::MannWhitneyU => "mann_whitney_u",
            TestKind::NegativeBinomial => "negative_binomial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub kind: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Runs one two-group test. For [`TestKind::ChiSquare`] each group is its
/// `[successes, failures]` pair.
pub fn stat_test(kind: TestKind, a: &[f64], b: &[f64]) -> Result<StatTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateTest("empty group".into()));
    }
    match kind {
        TestKind::ChiSquare => {
            if a.len() != 2 || b.len() != 2 {
                return Err(Error::DegenerateTest("chi-square takes [successes, failures] per group".into()));
            }
            chi_square_2x2([[a[0], a[1]], [b[0], b[1]]])
        }
        TestKind::MannWhitneyU => mann_whitney_u(a, b),
        TestKind::NegativeBinomial => negative_binomial_test(a, b),
    }
}

/// Pearson chi-square on a 2x2 table with Yates' continuity correction (1 d.o.f.).
pub fn chi_square_2x2(t: [[f64; 2]; 2]) -> Result<StatTestResult> {
    if t.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::DegenerateTest("counts must be finite and non-negative".into()));
    }
    let rows = [t[0][0] + t[0][1], t[1][0] + t[1][1]];
    let cols = [t[0][0] + t[1][0], t[0][1] + t[1][1]];
    let n = rows[0] + rows[1];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return Err(Error::DegenerateTest("a row or column of the table is empty".into()));
    }
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            let d = ((t[i][j] - e).abs() - 0.5).max(0.0);
            stat += d * d / e;
        }
    }
    let p = ChiSquared::new(1.0).expect("1 dof").sf(stat);
    Ok(StatTestResult {
        kind: TestKind::ChiSquare,
        statistic: stat,
        p_value: p.clamp(0.0, 1.0),
        n_a: rows[0] as usize,
        n_b: rows[1] as usize,
    })
}

/// Mid-ranks of `values` (1-based).
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

/// Two-sided Mann-Whitney U; `statistic` is U of the first group.
///
/// Exact over all rank assignments when both groups have at most 8 members, otherwise the
/// tie-corrected normal approximation with continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<StatTestResult> {
    if a.is_empty() || b.is_empty() || a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::DegenerateTest("groups must be nonempty and finite".into()));
    }
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let ua = |rank_sum: f64| rank_sum - (na * (na + 1)) as f64 / 2.0;
    let u = ua(ranks[..na].iter().sum());
    let mu = (na * nb) as f64 / 2.0;

    let p = if na <= 8 && nb <= 8 {
        let observed = (u - mu).abs() - 1e-9;
        let (mut extreme, mut total) = (0u64, 0u64);
        let mut chosen = Vec::with_capacity(na);
        enumerate(&ranks, na, 0, &mut chosen, &mut |sum| {
            total += 1;
            if (ua(sum) - mu).abs() >= observed {
                extreme += 1;
            }
        });
        extreme as f64 / total as f64
    } else {
        let n = (na + nb) as f64;
        let var = (na * nb) as f64 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
        if !(var > 0.0) {
            return Err(Error::DegenerateTest("all observations are tied".into()));
        }
        let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
        2.0 * Normal::standard().sf(z)
    };
    Ok(StatTestResult {
        kind: TestKind::MannWhitneyU,
        statistic: u,
        p_value: p.clamp(0.0, 1.0),
        n_a: na,
        n_b: nb,
    })
}

/// Calls `visit` with the rank sum of every `k`-subset of `ranks`.
fn enumerate(ranks: &[f64], k: usize, from: usize, chosen: &mut Vec<f64>, visit: &mut dyn FnMut(f64)) {
    if chosen.len() == k {
        visit(chosen.iter().sum());
        return;
    }
    let need = k - chosen.len();
    for i in from..=ranks.len() - need {
        chosen.push(ranks[i]);
        enumerate(ranks, k, i + 1, chosen, visit);
        chosen.pop();
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Log-likelihood of counts under NB(mean `mu`, dispersion `phi`), Var = mu + phi mu^2.
/// `phi = 0` is the Poisson limit.
fn nb_loglik(x: &[f64], mu: f64, phi: f64) -> f64 {
    if mu <= 0.0 {
        return if x.iter().all(|&v| v == 0.0) { 0.0 } else { f64::NEG_INFINITY };
    }
    if phi <= 1e-12 {
        return x.iter().map(|&v| v * mu.ln() - mu - ln_gamma(v + 1.0)).sum();
    }
    let k = 1.0 / phi;
    x.iter()
        .map(|&v| {
            // ln Gamma(v + k) - ln Gamma(k) for integer v, free of cancellation at large k
            let rising: f64 = (0..v as u64).map(|j| (k + j as f64).ln()).sum();
            rising - ln_gamma(v + 1.0) - k * (mu / k).ln_1p() + v * (mu / (k + mu)).ln()
        })
        .sum()
}

/// Likelihood-ratio test of equal means for two groups of counts under a negative binomial
/// model with a common dispersion estimated by the method of moments.
pub fn negative_binomial_test(a: &[f64], b: &[f64]) -> Result<StatTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateTest("empty group".into()));
    }
    if a.iter().chain(b).any(|&v| !(v >= 0.0) || v.fract() != 0.0) {
        return Err(Error::DegenerateTest("counts must be non-negative integers".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    // Var = mu + phi mu^2, solved jointly over both groups
    let excess: f64 = a.iter().map(|&v| (v - ma).powi(2) - v).sum::<f64>() + b.iter().map(|&v| (v - mb).powi(2) - v).sum::<f64>();
    let scale = a.len() as f64 * ma * ma + b.len() as f64 * mb * mb;
    let phi = if scale > 0.0 { (excess / scale).max(0.0) } else { 0.0 };
    let pooled = (a.iter().sum::<f64>() + b.iter().sum::<f64>()) / (a.len() + b.len()) as f64;
    let full = nb_loglik(a, ma, phi) + nb_loglik(b, mb, phi);
    let null = nb_loglik(a, pooled, phi) + nb_loglik(b, pooled, phi);
    let stat = (2.0 * (full - null)).max(0.0);
    let p = if stat == 0.0 { 1.0 } else { ChiSquared::new(1.0).expect("1 dof").sf(stat) };
    Ok(StatTestResult {
        kind: TestKind::NegativeBinomial,
        statistic: stat,
        p_value: p.clamp(0.0, 1.0),
        n_a: a.len(),
        n_b: b.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_textbook_table() {
        let r = chi_square_2x2([[50.0, 50.0], [90.0, 10.0]]).unwrap();
        // expected counts 70/30; corrected deviations 19.5
        let oracle = 2.0 * (19.5f64.powi(2) / 70.0 + 19.5f64.powi(2) / 30.0);
        assert!((r.statistic - oracle).abs() < 1e-12);
        assert!((r.statistic - 36.5).abs() < 0.5);
        assert!(r.p_value < 1e-8);
    }

    #[test]
    fn chi_square_identical_rows() {
        let r = stat_test(TestKind::ChiSquare, &[40.0, 10.0], &[40.0, 10.0]).unwrap();
        assert!(r.p_value >= 0.99);
        assert!(chi_square_2x2([[5.0, 0.0], [5.0, 0.0]]).is_err());
    }

    #[test]
    fn mann_whitney_exact_small() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        let same = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(same.p_value >= 0.99);
    }

    #[test]
    fn mann_whitney_normal_approximation() {
        let a: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..40).map(|i| i as f64 + 20.0).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(r.p_value < 1e-3);
        let r = mann_whitney_u(&a, &a).unwrap();
        assert!(r.p_value >= 0.99);
        assert!(mann_whitney_u(&[1.0; 10], &[1.0; 10]).is_err());
    }

    #[test]
    fn midranks_handle_ties() {
        let (r, ties) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(ties, 6.0);
    }

    #[test]
    fn negative_binomial_detects_shift() {
        let a = [0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 0.0, 3.0, 0.0];
        let b = [5.0, 9.0, 4.0, 12.0, 7.0, 3.0, 8.0, 15.0, 6.0, 10.0];
        let r = negative_binomial_test(&a, &b).unwrap();
        assert!(r.p_value < 0.01, "{r:?}");
        let same = negative_binomial_test(&a, &a).unwrap();
        assert!(same.p_value >= 0.99);
        assert!(negative_binomial_test(&[0.0; 4], &[0.0; 4]).unwrap().p_value >= 0.99);
        assert!(negative_binomial_test(&[1.5], &[1.0]).is_err());
    }

    #[test]
    fn poisson_limit_matches_closed_form() {
        let x = [2.0, 3.0];
        let ll = nb_loglik(&x, 2.5, 0.0);
        let oracle: f64 = x.iter().map(|&v: &f64| v * 2.5f64.ln() - 2.5 - ln_gamma(v + 1.0)).sum();
        assert!((ll - oracle).abs() < 1e-12);
        assert!((nb_loglik(&x, 2.5, 1e-9) - oracle).abs() < 1e-6);
    }
}
