//! The handful of classical statistics the validation suites lean on.
//!
//! Nothing here is novel — chi-square goodness of fit and independence, the
//! exact one-sided Clopper–Pearson binomial bound, and a pooled two-proportion
//! z-test. They are wrapped once so every suite states its significance level
//! explicitly and gets back the statistic alongside the verdict, which makes
//! failed runs diagnosable from the test output alone.

use statrs::distribution::{Beta, ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// A chi-square verdict: the statistic, the threshold it was held against,
/// and the degrees of freedom that produced the threshold.
#[derive(Clone, Copy, Debug)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub df: usize,
    pub critical: f64,
    pub pass: bool,
}

/// Upper critical value of the chi-square distribution.
pub fn chi_square_critical(df: usize, significance: f64) -> f64 {
    assert!(df >= 1, "chi-square needs at least one degree of freedom");
    assert!((0.0..1.0).contains(&significance) && significance > 0.0);
    ChiSquared::new(df as f64)
        .expect("df >= 1 is a valid chi-square parameter")
        .inverse_cdf(1.0 - significance)
}

fn chi_square_against(observed: &[u64], expected: &[f64], significance: f64) -> ChiSquareOutcome {
    debug_assert_eq!(observed.len(), expected.len());
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = observed.len() - 1;
    let critical = chi_square_critical(df, significance);
    ChiSquareOutcome {
        statistic,
        df,
        critical,
        pass: statistic < critical,
    }
}

/// Goodness of fit against the uniform law over the given cells.
pub fn chi_square_uniform(observed: &[u64], significance: f64) -> ChiSquareOutcome {
    assert!(observed.len() >= 2, "need at least two cells");
    let total: u64 = observed.iter().sum();
    let expected = vec![total as f64 / observed.len() as f64; observed.len()];
    chi_square_against(observed, &expected, significance)
}

/// Goodness of fit against explicit cell probabilities (which must be
/// positive and sum to 1 within rounding).
pub fn chi_square_expected(
    observed: &[u64],
    probs: &[f64],
    significance: f64,
) -> Result<ChiSquareOutcome> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(Error::InvalidParameter(
            "observed and probability cells must match and number at least two".into(),
        ));
    }
    let mass: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p <= 0.0) || (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "cell probabilities must be positive and sum to 1, got total {mass}"
        )));
    }
    let total: u64 = observed.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|p| p * total as f64).collect();
    Ok(chi_square_against(observed, &expected, significance))
}

/// Chi-square test of independence on a contingency table (rows x columns of
/// counts). Rows and columns that are entirely zero are collapsed away.
pub fn chi_square_independence(table: &[Vec<u64>], significance: f64) -> Result<ChiSquareOutcome> {
    if table.is_empty() || table[0].is_empty() {
        return Err(Error::InvalidParameter("empty contingency table".into()));
    }
    let cols = table[0].len();
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidParameter("ragged contingency table".into()));
    }
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols)
        .map(|c| table.iter().map(|r| r[c]).sum())
        .collect();
    let live_rows: Vec<usize> = (0..table.len()).filter(|&r| row_sums[r] > 0).collect();
    let live_cols: Vec<usize> = (0..cols).filter(|&c| col_sums[c] > 0).collect();
    if live_rows.len() < 2 || live_cols.len() < 2 {
        return Err(Error::InvalidParameter(
            "independence needs at least a 2x2 table of occupied cells".into(),
        ));
    }
    let grand: u64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for &r in &live_rows {
        for &c in &live_cols {
            let e = row_sums[r] as f64 * col_sums[c] as f64 / grand as f64;
            let d = table[r][c] as f64 - e;
            statistic += d * d / e;
        }
    }
    let df = (live_rows.len() - 1) * (live_cols.len() - 1);
    let critical = chi_square_critical(df, significance);
    Ok(ChiSquareOutcome {
        statistic,
        df,
        critical,
        pass: statistic < critical,
    })
}

/// One-sided lower confidence bound for a binomial proportion
/// (Clopper–Pearson, exact). With confidence `c`, the true success
/// probability lies above the bound with probability at least `c`.
pub fn clopper_pearson_lower(successes: u64, trials: u64, confidence: f64) -> f64 {
    assert!(
        successes <= trials && trials > 0,
        "need 0 <= successes <= trials, trials > 0"
    );
    assert!((0.0..1.0).contains(&confidence) && confidence > 0.0);
    if successes == 0 {
        return 0.0;
    }
    let beta = Beta::new(successes as f64, (trials - successes) as f64 + 1.0)
        .expect("shape parameters are positive");
    beta.inverse_cdf(1.0 - confidence)
}

/// Two-sided pooled z-test p-value for equality of two binomial proportions.
/// Degenerate pools (all successes or all failures) return 1.0.
pub fn two_proportion_pvalue(x1: u64, n1: u64, x2: u64, n2: u64) -> f64 {
    assert!(n1 > 0 && n2 > 0 && x1 <= n1 && x2 <= n2);
    let p1 = x1 as f64 / n1 as f64;
    let p2 = x2 as f64 / n2 as f64;
    let pooled = (x1 + x2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    let z = (p1 - p2) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z.abs()))
}
