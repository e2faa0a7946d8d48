//! Pearson correlation, the 2×m chi-square homogeneity test and the paired
//! t-test, with two-sided p-values from the incomplete gamma/beta functions.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{RecordKind, Session, SCALE_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    ChiSquareHomogeneity,
    PairedT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    /// Set when the exact p-value is below the smallest positive `f64`;
    /// `p_value` then holds that smallest value.
    pub underflow: bool,
}

impl TestResult {
    fn from_ln_p(test: TestKind, statistic: f64, df: f64, ln_p: f64) -> Self {
        let p = ln_p.exp().clamp(0.0, 1.0);
        let underflow = p == 0.0;
        Self {
            test,
            statistic,
            df,
            p_value: if underflow { f64::from_bits(1) } else { p },
            underflow,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "one of the sequences is constant".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Upper-tail probability of the chi-square distribution, as a natural log.
pub fn chi_square_sf_ln(statistic: f64, df: f64) -> f64 {
    special::ln_gamma_q(df / 2.0, statistic / 2.0)
}

/// Two-sided tail probability of Student's t, as a natural log.
pub fn student_t_two_sided_ln(t: f64, df: f64) -> f64 {
    special::ln_beta_inc(df / 2.0, 0.5, df / (df + t * t))
}

/// Homogeneity test of two count vectors over the same categories.
pub fn chi_square_homogeneity(counts_a: &[u64], counts_b: &[u64]) -> Result<TestResult> {
    if counts_a.len() != counts_b.len() || counts_a.len() < 2 {
        return Err(Error::invalid(
            "need two count vectors of equal length (at least 2 categories)",
        ));
    }
    let total_a: u64 = counts_a.iter().sum();
    let total_b: u64 = counts_b.iter().sum();
    if total_a == 0 || total_b == 0 {
        return Err(Error::invalid("both groups need at least one observation"));
    }
    let total = (total_a + total_b) as f64;
    let mut statistic = 0.0;
    for (j, (&a, &b)) in counts_a.iter().zip(counts_b).enumerate() {
        let column = (a + b) as f64;
        if column == 0.0 {
            return Err(Error::ZeroExpected(j));
        }
        for (obs, row) in [(a, total_a), (b, total_b)] {
            let expected = row as f64 * column / total;
            statistic += (obs as f64 - expected).powi(2) / expected;
        }
    }
    let df = (counts_a.len() - 1) as f64;
    Ok(TestResult::from_ln_p(
        TestKind::ChiSquareHomogeneity,
        statistic,
        df,
        chi_square_sf_ln(statistic, df),
    ))
}

pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid(
            "paired t-test needs two equal-length samples of at least 2",
        ));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let var = d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(Error::ZeroVariance("paired differences are constant".into()));
    }
    let t = m / (var.sqrt() / n.sqrt());
    let df = n - 1.0;
    Ok(TestResult::from_ln_p(
        TestKind::PairedT,
        t,
        df,
        student_t_two_sided_ln(t, df),
    ))
}

/// Counts of normal-record responses per score value 0..=7.
pub fn score_histogram(sessions: &[Session]) -> [u64; SCALE_MAX as usize + 1] {
    let mut counts = [0u64; SCALE_MAX as usize + 1];
    for record in sessions.iter().flat_map(|s| &s.records) {
        if let (RecordKind::Normal { .. }, Some(score)) = (&record.kind, record.score) {
            counts[score as usize] += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basic_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson_r(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() < 1e-15);

        // x̄ = 2.5, ȳ = 4; Σdxdy = 14, Σdx² = 5, Σdy² = 50
        let r = pearson_r(&x, &[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert!((r - 14.0 / (5.0f64 * 50.0).sqrt()).abs() < 1e-15);

        assert!(matches!(
            pearson_r(&x, &[2.0; 4]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson_r(&x, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn chi_square_identical_counts() {
        let c = [5, 9, 12, 3, 7, 8, 10, 2];
        let r = chi_square_homogeneity(&c, &c).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df, 7.0);
    }

    #[test]
    fn chi_square_disjoint_columns() {
        // expected 5 in each of the four nonzero cells: 4 · 25/5 = 20
        let a = [10, 0, 1, 1, 1, 1, 1, 1];
        let b = [0, 10, 1, 1, 1, 1, 1, 1];
        let r = chi_square_homogeneity(&a, &b).unwrap();
        assert!((r.statistic - 20.0).abs() < 1e-12);
        assert_eq!(r.df, 7.0);
        // published table: chi2(7) upper 0.01 critical value 18.475, 0.005 -> 20.278
        assert!(r.p_value < 0.01 && r.p_value > 0.005);
    }

    #[test]
    fn chi_square_zero_column_is_reported() {
        let a = [10, 0, 0, 0, 0, 0, 0, 0];
        let b = [0, 10, 0, 0, 0, 0, 0, 0];
        assert!(matches!(
            chi_square_homogeneity(&a, &b),
            Err(Error::ZeroExpected(2))
        ));
    }

    #[test]
    fn chi_square_reproduces_reported_tail() {
        // statistic and df reported for the similarity/association comparison
        let ln_p = chi_square_sf_ln(1091.37, 7.0);
        let p = ln_p.exp();
        assert!((p / 2.16e-231 - 1.0).abs() < 0.01, "p = {p:e}");
    }

    #[test]
    fn chi_square_huge_statistic_underflows() {
        let a = [100_000, 0, 1, 1, 1, 1, 1, 1];
        let b = [0, 100_000, 1, 1, 1, 1, 1, 1];
        let r = chi_square_homogeneity(&a, &b).unwrap();
        assert!(r.underflow);
        assert!(r.p_value > 0.0);
    }

    #[test]
    fn paired_t_hand_case() {
        let r = paired_t_test(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert!((r.statistic - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.df, 2.0);
        // t-table, df = 2: two-sided 0.10 -> 2.920, 0.05 -> 4.303
        assert!(r.p_value > 0.05 && r.p_value < 0.10);
        // closed form for df = 2: p = 1 - t / sqrt(2 + t²)
        let t = r.statistic;
        assert!((r.p_value - (1.0 - t / (2.0 + t * t).sqrt())).abs() < 1e-13);
    }

    #[test]
    fn paired_t_degenerate_inputs() {
        let x = [1.0, 4.0, 2.0];
        let r = paired_t_test(&x, &x);
        assert!(matches!(r, Err(Error::ZeroVariance(_))));
        let shifted = [2.0, 5.0, 3.0];
        assert!(paired_t_test(&x, &shifted).is_err());
        let y = [1.5, 3.0, 2.5];
        let fwd = paired_t_test(&x, &y).unwrap();
        let back = paired_t_test(&y, &x).unwrap();
        assert_eq!(fwd.statistic, -back.statistic);
        assert_eq!(fwd.p_value, back.p_value);
    }

    #[test]
    fn paired_t_zero_mean_difference() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 1.0, 4.0, 3.0];
        let r = paired_t_test(&x, &y).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reported_locality_t_value() {
        // t = -4.60 with df = 47 is reported with p = 3.21e-5
        let p = student_t_two_sided_ln(-4.60, 47.0).exp();
        assert!((p / 3.21e-5 - 1.0).abs() < 0.02, "p = {p:e}");
    }
}
