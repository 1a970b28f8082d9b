use super::{DecodeResult, DecoderConfig};
use crate::bitlinalg::{BitBlock, ParityCheck};

const LLR_CLAMP: f64 = 30.0;
const MIN_PRIOR: f64 = 1e-6;

/// Flooding sum-product in the log domain. A variable's LLR is
/// `ln P(e_v = 0) / P(e_v = 1)`; check `c` constrains the XOR of its
/// variables to `s[c]`, which flips the sign of its outgoing messages.
pub(super) fn decode(s: &BitBlock, h: &ParityCheck, cfg: &DecoderConfig) -> DecodeResult {
    let n = h.n();
    let q = cfg.qber_prior.clamp(MIN_PRIOR, 0.5);
    let prior = ((1.0 - q) / q).ln();

    // edge storage in row order; col_edges maps each variable to its edges
    let mut row_start = Vec::with_capacity(h.r() + 1);
    let mut edge_var = Vec::with_capacity(h.edges());
    row_start.push(0);
    for row in h.rows() {
        edge_var.extend_from_slice(row);
        row_start.push(edge_var.len());
    }
    let mut col_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &v) in edge_var.iter().enumerate() {
        col_edges[v].push(e);
    }

    let mut v2c = vec![prior; edge_var.len()];
    let mut c2v = vec![0.0f64; edge_var.len()];
    let mut e_hat = BitBlock::zeros(n);
    let mut iterations = 0;
    let mut tanhs = Vec::new();
    let mut suffix = Vec::new();

    if s.is_zero() {
        return DecodeResult::finish(h, s, e_hat, 0);
    }
    for it in 0..cfg.max_iterations {
        for c in 0..h.r() {
            let (lo, hi) = (row_start[c], row_start[c + 1]);
            let sign = if s.get(c) { -1.0 } else { 1.0 };
            tanhs.clear();
            tanhs.extend(v2c[lo..hi].iter().map(|&m| (m / 2.0).tanh()));
            suffix.clear();
            suffix.resize(tanhs.len() + 1, 1.0);
            for i in (0..tanhs.len()).rev() {
                suffix[i] = suffix[i + 1] * tanhs[i];
            }
            let mut prefix = 1.0;
            for (i, e) in (lo..hi).enumerate() {
                let p = (prefix * suffix[i + 1]).clamp(-0.999_999_999_999, 0.999_999_999_999);
                c2v[e] = (sign * 2.0 * p.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
                prefix *= tanhs[i];
            }
        }
        for (v, edges) in col_edges.iter().enumerate() {
            let total: f64 = prior + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            e_hat.set(v, total < 0.0);
            for &e in edges {
                v2c[e] = (total - c2v[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
        iterations = it + 1;
        if h.syndrome(&e_hat).expect("length n") == *s {
            break;
        }
    }
    DecodeResult::finish(h, s, e_hat, iterations)
}
