//! Secret-key capacities of the broadcast BSC model and the bookkeeping
//! used to size privacy amplification.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::channel::{h2, ChannelError};

fn check(p: f64) -> Result<f64, ChannelError> {
    if (0.0..=0.5).contains(&p) {
        Ok(p)
    } else {
        Err(ChannelError::Domain(p))
    }
}

/// Crossover of the cascade of BSC(e) and BSC(d).
pub fn composite_rate(e: f64, d: f64) -> f64 {
    e + d - 2.0 * e * d
}

/// `C_s = H_b(e + d - 2ed) - H_b(e)` for reverse reconciliation.
pub fn secret_capacity(e: f64, d: f64) -> Result<f64, ChannelError> {
    let (e, d) = (check(e)?, check(d)?);
    Ok(h2(composite_rate(e, d)) - h2(e))
}

/// Capacity when Bob's syndrome is one-time-pad encrypted, which costs
/// another `H_b(e)` per symbol: `H_b(e + d - 2ed) - 2 H_b(e)`.
pub fn capacity_enc(e: f64, d: f64) -> Result<f64, ChannelError> {
    Ok(secret_capacity(e, d)? - h2(check(e)?))
}

/// `ceil(log2(n!))`: bits needed to name a permutation of `n` positions.
pub fn permutation_cost(n: u64) -> u64 {
    if n <= 1 {
        return 0;
    }
    let bits = ln_gamma(n as f64 + 1.0) / std::f64::consts::LN_2;
    // guard against ln_gamma rounding just above an exact power of two
    let r = bits.round();
    if (bits - r).abs() < 1e-9 {
        r as u64
    } else {
        bits.ceil() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub e: f64,
    pub d: f64,
    pub c_s: f64,
    pub c_s_enc: f64,
    pub feasible_enc: bool,
}

pub fn capacity_point(e: f64, d: f64) -> Result<CapacityPoint, ChannelError> {
    let c_s = secret_capacity(e, d)?;
    let c_s_enc = c_s - h2(e);
    Ok(CapacityPoint {
        e,
        d,
        c_s,
        c_s_enc,
        feasible_enc: c_s_enc > 0.0,
    })
}

/// One point per `(e, d)` pair, `e` outermost.
pub fn generate_balance_curves(e_list: &[f64], d_grid: &[f64]) -> Result<Vec<CapacityPoint>, ChannelError> {
    let mut out = Vec::with_capacity(e_list.len() * d_grid.len());
    for &e in e_list {
        for &d in d_grid {
            out.push(capacity_point(e, d)?);
        }
    }
    Ok(out)
}

pub const CURVES_HEADER: &str = "e,d,c_s,c_s_enc,feasible";

pub fn curves_csv(points: &[CapacityPoint]) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{:.12},{:.12},{}\n",
            p.e, p.d, p.c_s, p.c_s_enc, p.feasible_enc
        ));
    }
    out
}

/// The `d` in `[0, 0.5]` where `capacity_enc(e, d)` changes sign, by
/// bisection. `None` when the encrypted variant is infeasible for every `d`
/// (from `e` ≈ 0.11 upwards) or feasible already at `d = 0` (only `e = 0`).
pub fn zero_crossing(e: f64) -> Result<Option<f64>, ChannelError> {
    let f = |d: f64| capacity_enc(e, d);
    let (mut lo, mut hi) = (0.0, 0.5);
    if f(lo)? >= 0.0 || f(hi)? <= 0.0 {
        return Ok(None);
    }
    // c_s_enc is increasing in d, so the sign change is unique
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Privacy amplification output length:
/// `floor(n (1 - H_b(q)) - leaked - margin)`, clamped at zero.
/// Leakage bookkeeping only, not a finite-key security bound.
pub fn pa_output_length(n: usize, q: f64, leaked: usize, margin: usize) -> usize {
    let q = q.clamp(0.0, 0.5);
    let raw = n as f64 * (1.0 - h2(q)) - leaked as f64 - margin as f64;
    if raw <= 0.0 {
        0
    } else {
        (raw.floor() as usize).min(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Natural-log form with `ln_1p`, independent of the crate's entropy.
    fn h_ref(p: f64) -> f64 {
        if p == 0.0 || p == 1.0 {
            return 0.0;
        }
        -(p * p.ln() + (1.0 - p) * (-p).ln_1p()) / std::f64::consts::LN_2
    }

    #[test]
    fn edge_cases() {
        for d in [0.0, 0.01, 0.3, 0.5] {
            assert!((secret_capacity(0.0, d).unwrap() - h_ref(d)).abs() < 1e-12);
            assert!((capacity_enc(0.0, d).unwrap() - h_ref(d)).abs() < 1e-12);
        }
        for e in [0.0, 0.02, 0.3, 0.5] {
            assert!(secret_capacity(e, 0.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn reference_value() {
        // 30-digit values: H_b(0.068) = 0.358415324639..., H_b(0.02) = 0.141440542541...
        let c = secret_capacity(0.02, 0.05).unwrap();
        assert!((c - 0.216_974_782_097).abs() < 1e-9, "{c}");
    }

    #[test]
    fn domain_errors() {
        assert!(secret_capacity(0.6, 0.1).is_err());
        assert!(capacity_enc(0.1, -0.1).is_err());
    }

    #[test]
    fn encrypted_is_infeasible_on_the_diagonal() {
        for i in 1..=25 {
            let e = i as f64 / 100.0;
            assert!(capacity_enc(e, e).unwrap() < 0.0, "e = {e}");
        }
    }

    #[test]
    fn zero_crossing_lies_above_e() {
        for i in 1..=250 {
            let e = i as f64 / 1000.0;
            match zero_crossing(e).unwrap() {
                Some(d) => {
                    assert!(d > e, "e = {e}, d* = {d}");
                    assert!(capacity_enc(e, d).unwrap().abs() < 1e-9);
                }
                None => assert!(capacity_enc(e, 0.5).unwrap() <= 0.0, "e = {e}"),
            }
        }
        assert!(zero_crossing(0.1).unwrap().is_some());
        assert!(zero_crossing(0.12).unwrap().is_none());
    }

    #[test]
    fn permutation_costs() {
        assert_eq!(permutation_cost(1), 0);
        assert_eq!(permutation_cost(2), 1);
        assert_eq!(permutation_cost(3), 3);
        let exact: f64 = (1..=1024).map(|k| (k as f64).log2()).sum();
        let got = permutation_cost(1024) as f64;
        assert!((got - 8769.0).abs() <= 1.0);
        assert_eq!(got, exact.ceil());
    }

    #[test]
    fn curves_shape_and_identity() {
        let es = [0.01, 0.02, 0.05, 0.1];
        let ds: Vec<f64> = (0..=50).map(|i| i as f64 / 100.0).collect();
        let pts = generate_balance_curves(&es, &ds).unwrap();
        assert_eq!(pts.len(), es.len() * ds.len());
        for p in &pts {
            assert!((p.c_s - p.c_s_enc - h_ref(p.e)).abs() < 1e-12);
            assert!(p.c_s >= p.c_s_enc);
            if p.d < p.e {
                assert!(!p.feasible_enc);
            }
        }
        for row in pts.chunks(ds.len()) {
            for w in row.windows(2) {
                assert!(w[1].c_s_enc >= w[0].c_s_enc - 1e-15);
            }
        }
        let csv = curves_csv(&pts);
        assert_eq!(csv.lines().next(), Some(CURVES_HEADER));
        assert_eq!(csv.lines().count(), pts.len() + 1);
    }

    #[test]
    fn capacity_is_not_symmetric() {
        let a = secret_capacity(0.02, 0.05).unwrap();
        let b = secret_capacity(0.05, 0.02).unwrap();
        assert!((composite_rate(0.02, 0.05) - composite_rate(0.05, 0.02)).abs() < 1e-15);
        assert!((a - b).abs() > 0.1);
    }

    #[test]
    fn pa_length() {
        assert_eq!(pa_output_length(1000, 0.0, 0, 0), 1000);
        assert_eq!(pa_output_length(1000, 0.5, 0, 0), 0);
        assert_eq!(pa_output_length(1000, 0.0, 600, 50), 350);
        assert_eq!(pa_output_length(100, 0.0, 600, 50), 0);
    }

    proptest! {
        #[test]
        fn identity_and_oracle(e in 0.0f64..=0.5, d in 0.0f64..=0.5) {
            let c = secret_capacity(e, d).unwrap();
            let c_enc = capacity_enc(e, d).unwrap();
            prop_assert!((c - c_enc - crate::channel::binary_entropy(e).unwrap()).abs() < 1e-12);
            let reference = h_ref(e + d - 2.0 * e * d) - h_ref(e);
            prop_assert!((c - reference).abs() < 1e-9);
        }
    }
}
