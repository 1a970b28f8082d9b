//! Chi-square tests used to check that share and transcript distributions
//! do not depend on secrets.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// p-value of Pearson's goodness-of-fit test against the uniform
/// distribution over `counts.len()` categories.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let k = counts.len();
    if k < 2 || total == 0 {
        return 1.0;
    }
    let expected = total as f64 / k as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    upper_tail(stat, (k - 1) as f64)
}

/// p-value of the 2 x k homogeneity test: were `a` and `b` drawn from the
/// same categorical distribution? Categories empty in both are dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len(), "category counts differ");
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return 1.0;
    }
    let n = (na + nb) as f64;
    let mut stat = 0.0;
    let mut used = 0;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        used += 1;
        let ea = col * na as f64 / n;
        let eb = col * nb as f64 / n;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if used < 2 {
        return 1.0;
    }
    upper_tail(stat, (used - 1) as f64)
}

fn upper_tail(stat: f64, dof: f64) -> f64 {
    let dist = ChiSquared::new(dof).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}
