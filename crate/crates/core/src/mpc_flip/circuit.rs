//! Counter arithmetic and the message-passing decoder as GF(2) circuits.
//!
//! A number is a list of bit planes, least significant first; plane `i`
//! holds bit `i` of every lane. Counters are `w`-bit registers whose high
//! bits are secret like the rest, so cost and depth follow `w`.

use super::engine::Engine;
use super::MpcError;
use crate::bitlinalg::{BitBlock, ParityCheck};
use crate::ldpc::flip::Edges;
use crate::ldpc::DecoderConfig;

/// Smallest width holding every count in `0..=degree`.
pub fn min_bitwidth(degree: usize) -> usize {
    (usize::BITS - degree.leading_zeros()).max(1) as usize
}

/// Two `w`-bit numbers as bit planes, least significant first.
pub type PlanePair<'a, V> = (&'a [V], &'a [V]);

/// `w`-bit sums `a + b mod 2^w` for all pairs at once, with a Kogge-Stone
/// carry network: `1 + ceil(log2(w - 1))` layers.
pub fn add_many<E: Engine>(eng: &mut E, pairs: &[PlanePair<E::V>]) -> Result<Vec<Vec<E::V>>, MpcError> {
    let Some((first, _)) = pairs.first() else {
        return Ok(Vec::new());
    };
    let w = first.len();
    let q = w.saturating_sub(1);
    let p: Vec<Vec<E::V>> = pairs
        .iter()
        .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| eng.xor(x, y)).collect())
        .collect();
    let mut g: Vec<Vec<E::V>> = if q == 0 {
        vec![Vec::new(); pairs.len()]
    } else {
        let flat: Vec<_> = pairs.iter().flat_map(|(a, b)| a[..q].iter().zip(&b[..q])).collect();
        chunk(eng.and_layer(&flat)?, q)
    };
    let mut pp: Vec<Vec<E::V>> = p.iter().map(|v| v[..q].to_vec()).collect();
    let mut d = 1;
    while d < q {
        let need_p = 2 * d < q;
        let mut flat = Vec::new();
        for k in 0..pairs.len() {
            for i in d..q {
                flat.push((&pp[k][i], &g[k][i - d]));
                if need_p && i >= 2 * d {
                    flat.push((&pp[k][i], &pp[k][i - d]));
                }
            }
        }
        let prods = eng.and_layer(&flat)?;
        let mut it = prods.into_iter();
        let mut new_g = g.clone();
        let mut new_p = pp.clone();
        for k in 0..pairs.len() {
            for i in d..q {
                let pg = it.next().expect("one product per position");
                new_g[k][i] = eng.xor(&g[k][i], &pg);
                if need_p && i >= 2 * d {
                    new_p[k][i] = it.next().expect("propagate product");
                }
            }
        }
        g = new_g;
        pp = new_p;
        d *= 2;
    }
    Ok(p
        .into_iter()
        .zip(g)
        .map(|(pk, gk)| {
            (0..w)
                .map(|i| if i == 0 { pk[0].clone() } else { eng.xor(&pk[i], &gk[i - 1]) })
                .collect()
        })
        .collect())
}

fn chunk<T>(v: Vec<T>, size: usize) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(v.len() / size.max(1));
    let mut it = v.into_iter();
    loop {
        let c: Vec<T> = it.by_ref().take(size).collect();
        if c.is_empty() {
            return out;
        }
        out.push(c);
    }
}

/// Sum of single-bit inputs as a `w`-bit number, by a balanced tree of
/// `add_many` levels.
pub fn popcount<E: Engine>(eng: &mut E, bits: &[E::V], w: usize) -> Result<Vec<E::V>, MpcError> {
    let Some(first) = bits.first() else {
        return Err(MpcError::Config("popcount of nothing".into()));
    };
    let lanes = E::len(first);
    let mut nums: Vec<Vec<E::V>> = bits
        .iter()
        .map(|b| {
            let mut v = vec![b.clone()];
            v.extend((1..w).map(|_| eng.zeros(lanes)));
            v
        })
        .collect();
    while nums.len() > 1 {
        let odd = (nums.len() % 2 == 1).then(|| nums.pop().expect("non-empty"));
        let pairs: Vec<PlanePair<E::V>> = nums.chunks(2).map(|c| (c[0].as_slice(), c[1].as_slice())).collect();
        let mut next = add_many(eng, &pairs)?;
        next.extend(odd);
        nums = next;
    }
    Ok(nums.pop().expect("one number left"))
}

/// `t >= k` per lane for each constant vector in `ks` (one constant per
/// lane), evaluated together. Computed as the carry out of `t + (2^w - k)`
/// with a tree of `ceil(log2 w)` layers.
pub fn geq_many<E: Engine>(eng: &mut E, t: &[E::V], ks: &[Vec<u32>]) -> Result<Vec<E::V>, MpcError> {
    let w = t.len();
    let lanes = E::len(&t[0]);
    let modulus = 1u64 << w;
    let mut nodes: Vec<Vec<(E::V, E::V)>> = Vec::with_capacity(ks.len());
    let mut fixes = Vec::with_capacity(ks.len());
    for k in ks {
        assert_eq!(k.len(), lanes, "one constant per lane");
        let addend: Vec<u64> = k
            .iter()
            .map(|&x| if x == 0 || x as u64 >= modulus { 0 } else { modulus - x as u64 })
            .collect();
        let fix = BitBlock::from_bools(&k.iter().map(|&x| x == 0).collect::<Vec<_>>());
        fixes.push(fix);
        nodes.push(
            (0..w)
                .map(|i| {
                    let c = BitBlock::from_bools(&addend.iter().map(|a| (a >> i) & 1 == 1).collect::<Vec<_>>());
                    (eng.and_const(&t[i], &c), eng.xor_const(&t[i], &c))
                })
                .collect(),
        );
    }
    while nodes[0].len() > 1 {
        let last_level = nodes[0].len() <= 2;
        let mut flat = Vec::new();
        for level in &nodes {
            for pair in level.chunks(2) {
                if let [lo, hi] = pair {
                    flat.push((&hi.1, &lo.0));
                    if !last_level {
                        flat.push((&hi.1, &lo.1));
                    }
                }
            }
        }
        let prods = eng.and_layer(&flat)?;
        let mut it = prods.into_iter();
        let mut next_nodes = Vec::with_capacity(nodes.len());
        for level in &nodes {
            let mut next = Vec::with_capacity(level.len().div_ceil(2));
            for pair in level.chunks(2) {
                match pair {
                    [_, hi] => {
                        let g = eng.xor(&hi.0, &it.next().expect("generate product"));
                        let p = if last_level {
                            hi.1.clone()
                        } else {
                            it.next().expect("propagate product")
                        };
                        next.push((g, p));
                    }
                    [single] => next.push(single.clone()),
                    _ => unreachable!(),
                }
            }
            next_nodes.push(next);
        }
        nodes = next_nodes;
    }
    Ok(nodes
        .into_iter()
        .zip(fixes)
        .map(|(mut n, fix)| eng.xor_const(&n.pop().expect("root").0, &fix))
        .collect())
}

/// Shared flip decision `count > threshold` for a `bitwidth`-bit counter
/// of up to `degree` votes.
pub fn majority_circuit<E: Engine>(
    eng: &mut E,
    count: &[E::V],
    degree: usize,
    bitwidth: usize,
    threshold: u32,
) -> Result<E::V, MpcError> {
    let needed = min_bitwidth(degree);
    if bitwidth < needed || count.len() != bitwidth {
        return Err(MpcError::BitwidthTooSmall { bitwidth, needed });
    }
    let lanes = E::len(&count[0]);
    Ok(geq_many(eng, count, &[vec![threshold + 1; lanes]])?.pop().expect("one comparison"))
}

/// Index tables for moving between edge order and per-variable slots.
struct Layout {
    n: usize,
    n_edges: usize,
    edge_row: Vec<usize>,
    row_start: Vec<usize>,
    /// `slots[k][v]`: the `k`-th edge of variable `v`, if it has one.
    slots: Vec<Vec<Option<usize>>>,
    degrees: Vec<usize>,
}

impl Layout {
    fn new(h: &ParityCheck) -> Self {
        let edges = Edges::new(h);
        let n_edges = *edges.row_start.last().unwrap_or(&0);
        let mut edge_row = vec![0; n_edges];
        for c in 0..h.r() {
            edge_row[edges.row_start[c]..edges.row_start[c + 1]].fill(c);
        }
        let max_deg = h.max_col_degree();
        let slots = (0..max_deg)
            .map(|k| edges.col_edges.iter().map(|es| es.get(k).copied()).collect())
            .collect();
        Layout {
            n: h.n(),
            n_edges,
            edge_row,
            row_start: edges.row_start,
            slots,
            degrees: edges.col_edges.iter().map(Vec::len).collect(),
        }
    }

    /// `c2v` contribution of the variable messages: row parity without self.
    fn extrinsic_parity(&self, v2c: &BitBlock) -> BitBlock {
        let mut out = BitBlock::zeros(self.n_edges);
        for c in 0..self.row_start.len() - 1 {
            let range = self.row_start[c]..self.row_start[c + 1];
            let parity = range.clone().fold(false, |a, e| a ^ v2c.get(e));
            for e in range {
                if parity ^ v2c.get(e) {
                    out.set(e, true);
                }
            }
        }
        out
    }

    fn spread_rows(&self, s: &BitBlock) -> BitBlock {
        let mut out = BitBlock::zeros(self.n_edges);
        for (e, &c) in self.edge_row.iter().enumerate() {
            if s.get(c) {
                out.set(e, true);
            }
        }
        out
    }

    fn gather(&self, k: usize, edge_bits: &BitBlock) -> BitBlock {
        let mut out = BitBlock::zeros(self.n);
        for (v, slot) in self.slots[k].iter().enumerate() {
            if let Some(e) = slot {
                if edge_bits.get(*e) {
                    out.set(v, true);
                }
            }
        }
        out
    }

    fn scatter(&self, k: usize, var_bits: &BitBlock) -> BitBlock {
        let mut out = BitBlock::zeros(self.n_edges);
        for (v, slot) in self.slots[k].iter().enumerate() {
            if let Some(e) = slot {
                if var_bits.get(v) {
                    out.set(*e, true);
                }
            }
        }
        out
    }
}

/// Fixed-iteration Gallager A/B on a (shared) syndrome. Same schedule as
/// the plaintext fixed-iteration decoder, so outputs agree bit for bit.
pub fn decode_circuit<E: Engine>(
    eng: &mut E,
    s: &E::V,
    h: &ParityCheck,
    cfg: &DecoderConfig,
    bitwidth: usize,
) -> Result<E::V, MpcError> {
    if !cfg.is_bit_flipping() {
        return Err(MpcError::Config("only Gallager A/B run under MPC".into()));
    }
    if E::len(s) != h.r() {
        return Err(MpcError::Dimension {
            expected: h.r(),
            actual: E::len(s),
        });
    }
    let lay = Layout::new(h);
    let max_deg = lay.slots.len();
    let needed = min_bitwidth(max_deg);
    if bitwidth < needed {
        return Err(MpcError::BitwidthTooSmall { bitwidth, needed });
    }
    if max_deg == 0 {
        return Ok(eng.zeros(lay.n));
    }
    let s_edges = eng.map_local(s, &|b| lay.spread_rows(b));
    let decision: Vec<u32> = lay.degrees.iter().map(|&d| cfg.decision_threshold(d)).collect();
    let mut v2c = eng.zeros(lay.n_edges);
    let mut e_hat = eng.zeros(lay.n);
    for it in 0..cfg.max_iterations {
        let c2v = eng.xor(&eng.map_local(&v2c, &|b| lay.extrinsic_parity(b)), &s_edges);
        let inputs: Vec<E::V> = (0..max_deg).map(|k| eng.map_local(&c2v, &|b| lay.gather(k, b))).collect();
        let total = popcount(eng, &inputs, bitwidth)?;
        let b0: Vec<u32> = lay.degrees.iter().map(|&d| cfg.extrinsic_threshold(d, it)).collect();
        let b1: Vec<u32> = b0.iter().map(|x| x + 1).collect();
        let last = it + 1 == cfg.max_iterations;
        let mut ks = vec![b0, b1];
        if last {
            ks.push(decision.clone());
        }
        let mut cmp = geq_many(eng, &total, &ks)?;
        if last {
            e_hat = cmp.pop().expect("decision comparison");
        }
        let (g0, g1) = (&cmp[0], &cmp[1]);
        let diff = eng.xor(g0, g1);
        let pairs: Vec<_> = inputs.iter().map(|x| (x, &diff)).collect();
        let sel = eng.and_layer(&pairs)?;
        let mut next = eng.zeros(lay.n_edges);
        for (k, sk) in sel.iter().enumerate() {
            let msg = eng.xor(g0, sk);
            next = eng.xor(&next, &eng.map_local(&msg, &|b| lay.scatter(k, b)));
        }
        v2c = next;
    }
    Ok(e_hat)
}
