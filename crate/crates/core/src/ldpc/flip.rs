use super::{DecodeResult, DecoderConfig};
use crate::bitlinalg::{BitBlock, ParityCheck};

/// Edge layout shared by the hard-decision decoders: edges are numbered in
/// row order, `col_edges[v]` lists the edges of variable `v`.
pub(crate) struct Edges {
    pub row_start: Vec<usize>,
    pub col_edges: Vec<Vec<usize>>,
}

impl Edges {
    pub fn new(h: &ParityCheck) -> Self {
        let mut row_start = Vec::with_capacity(h.r() + 1);
        let mut col_edges: Vec<Vec<usize>> = vec![Vec::new(); h.n()];
        let mut e = 0;
        row_start.push(0);
        for row in h.rows() {
            for &v in row {
                col_edges[v].push(e);
                e += 1;
            }
            row_start.push(e);
        }
        Edges { row_start, col_edges }
    }
}

/// Hard-decision message passing. A check tells each neighbour the value
/// that would satisfy it given the other neighbours' messages; a variable
/// tells a check `1` once enough of its other checks say so, and decides by
/// strict majority over all its checks.
pub(super) fn decode(s: &BitBlock, h: &ParityCheck, cfg: &DecoderConfig, early_exit: bool) -> DecodeResult {
    let edges = Edges::new(h);
    let n_edges = *edges.row_start.last().unwrap_or(&0);
    let mut v2c = vec![false; n_edges];
    let mut c2v = vec![false; n_edges];
    let mut e_hat = BitBlock::zeros(h.n());
    let mut iterations = 0;
    for it in 0..cfg.max_iterations {
        if early_exit && h.syndrome(&e_hat).expect("length n") == *s {
            break;
        }
        for c in 0..h.r() {
            let range = edges.row_start[c]..edges.row_start[c + 1];
            let parity = v2c[range.clone()].iter().fold(s.get(c), |a, &b| a ^ b);
            for e in range {
                c2v[e] = parity ^ v2c[e];
            }
        }
        for (v, es) in edges.col_edges.iter().enumerate() {
            let deg = es.len();
            let total = es.iter().filter(|&&e| c2v[e]).count() as u32;
            e_hat.set(v, total >= cfg.decision_threshold(deg));
            let t = cfg.extrinsic_threshold(deg, it);
            for &e in es {
                v2c[e] = total - c2v[e] as u32 >= t;
            }
        }
        iterations = it + 1;
    }
    DecodeResult::finish(h, s, e_hat, iterations)
}
