//! Summary statistics and Welch's unequal-variance t-test.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Variance with `ddof` delta degrees of freedom (0: population, 1: sample).
pub fn variance(xs: &[f64], ddof: usize) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - ddof) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub dof: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Both samples had zero variance; `t` and `p` follow the convention
    /// below rather than the t distribution.
    pub degenerate: bool,
}

/// Welch's t-test from summary statistics (sample variances, ddof = 1).
pub fn welch_from_stats(mean_a: f64, var_a: f64, n_a: usize, mean_b: f64, var_b: f64, n_b: usize) -> Result<WelchTest> {
    if n_a < 2 || n_b < 2 {
        return Err(Error::Config("Welch's t-test needs at least two samples per group".into()));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let (sa, sb) = (var_a / na, var_b / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        // Zero variance in both groups: equal means give t = 0, p = 1;
        // different means are infinitely significant.
        return Ok(if mean_a == mean_b {
            WelchTest { t: 0.0, dof: na + nb - 2.0, p: 1.0, degenerate: true }
        } else {
            let t = if mean_a > mean_b { f64::INFINITY } else { f64::NEG_INFINITY };
            WelchTest { t, dof: na + nb - 2.0, p: 0.0, degenerate: true }
        });
    }
    let t = (mean_a - mean_b) / se2.sqrt();
    let dof = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Config(format!("t distribution: {e}")))?;
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(WelchTest { t, dof, p, degenerate: false })
}

/// Two-sided Welch's t-test of `a` against `b`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Config("Welch's t-test needs at least two samples per group".into()));
    }
    welch_from_stats(mean(a), variance(a, 1), a.len(), mean(b), variance(b, 1), b.len())
}
