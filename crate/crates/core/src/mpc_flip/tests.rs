use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::ldpc::decode_syndrome_fixed;
use crate::sharing::{reconstruct, share};
use crate::stats::chi_square_two_sample;

/// Plane `i` of the numbers `xs`.
fn planes(xs: &[u32], w: usize) -> Vec<BitBlock> {
    (0..w)
        .map(|i| BitBlock::from_bools(&xs.iter().map(|x| (x >> i) & 1 == 1).collect::<Vec<_>>()))
        .collect()
}

fn value(planes: &[BitBlock], lane: usize) -> u32 {
    planes.iter().enumerate().map(|(i, p)| (p.get(lane) as u32) << i).sum()
}

fn run_mpc(
    s: &BitBlock,
    h: &ParityCheck,
    cfg: &DecoderConfig,
    w: usize,
    parties: usize,
    rng: &mut ChaCha20Rng,
) -> (BitBlock, MpcMetrics) {
    let shares = share(&ShareData::Bits(s.clone()), Scheme::AdditiveGf2, parties, rng).unwrap();
    let mut pool = deal_triples(triples_needed(h, cfg, w).unwrap(), parties, rng).unwrap();
    let out = mpc_decode(&shares, h, cfg, w, &mut pool, false).unwrap();
    assert_eq!(pool.remaining(), 0);
    (reconstruct(&out.e_hat_shares).unwrap().to_bits(), out.metrics)
}

#[test]
fn adder_exhaustive_w4() {
    let (a, b): (Vec<u32>, Vec<u32>) = (0..256u32).map(|x| (x & 15, x >> 4)).unzip();
    let mut eng = PlainEngine::default();
    let (pa, pb) = (planes(&a, 4), planes(&b, 4));
    let sum = add_many(&mut eng, &[(&pa[..], &pb[..])]).unwrap().pop().unwrap();
    for lane in 0..256 {
        assert_eq!(value(&sum, lane), (a[lane] + b[lane]) % 16);
    }
    assert_eq!(eng.layers, 3);
}

#[test]
fn adder_depth_by_width() {
    for (w, depth) in [(1, 0), (2, 1), (3, 2), (4, 3), (5, 3), (8, 4), (9, 4)] {
        let mut eng = PlainEngine::default();
        let x = vec![BitBlock::zeros(4); w];
        add_many(&mut eng, &[(&x[..], &x[..])]).unwrap();
        assert_eq!(eng.layers, depth, "w={w}");
    }
}

#[test]
fn comparator_exhaustive() {
    for w in 1..=5usize {
        let max = 1u32 << w;
        let (t, k): (Vec<u32>, Vec<u32>) = (0..max).flat_map(|t| (0..=max + 1).map(move |k| (t, k))).unzip();
        let mut eng = PlainEngine::default();
        let r = geq_many(&mut eng, &planes(&t, w), std::slice::from_ref(&k)).unwrap().pop().unwrap();
        for lane in 0..t.len() {
            assert_eq!(r.get(lane), t[lane] >= k[lane], "w={w} t={} k={}", t[lane], k[lane]);
        }
        assert_eq!(eng.layers, (w as f64).log2().ceil() as usize);
    }
}

#[test]
fn popcount_exhaustive_up_to_seven_inputs() {
    for d in 1..=7usize {
        let w = min_bitwidth(d);
        let lanes = 1usize << d;
        let inputs: Vec<BitBlock> = (0..d)
            .map(|j| BitBlock::from_bools(&(0..lanes).map(|x| (x >> j) & 1 == 1).collect::<Vec<_>>()))
            .collect();
        let mut eng = PlainEngine::default();
        let c = popcount(&mut eng, &inputs, w).unwrap();
        for x in 0..lanes {
            assert_eq!(value(&c, x), x.count_ones());
        }
    }
}

#[test]
fn majority_truth_table() {
    for degree in 0..=7usize {
        for w in min_bitwidth(degree)..=min_bitwidth(degree) + 2 {
            let counts: Vec<u32> = (0..=degree as u32).collect();
            for thr in 0..=degree as u32 + 1 {
                let mut eng = PlainEngine::default();
                let flip = majority_circuit(&mut eng, &planes(&counts, w), degree, w, thr).unwrap();
                for (lane, &c) in counts.iter().enumerate() {
                    assert_eq!(flip.get(lane), c > thr, "deg={degree} w={w} c={c} thr={thr}");
                }
                if thr < degree as u32 {
                    assert!(flip.get(degree));
                }
                assert!(!flip.get(0) || thr == u32::MAX);
            }
        }
    }
}

#[test]
fn majority_rejects_narrow_counters() {
    let mut eng = PlainEngine::default();
    let x = planes(&[0, 1, 2, 3], 2);
    assert_eq!(
        majority_circuit(&mut eng, &x, 4, 2, 2),
        Err(MpcError::BitwidthTooSmall { bitwidth: 2, needed: 3 })
    );
}

#[test]
fn plain_circuit_equals_fixed_decoder() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for (n, q) in [(96, 0.02), (240, 0.03), (600, 0.05)] {
        let h = ParityCheck::regular(n, 3, 6, &mut rng).unwrap();
        for cfg in [
            DecoderConfig::gallager_a(q),
            DecoderConfig::gallager_b(q),
            DecoderConfig::gallager_b(q).with_iterations(3),
        ] {
            for _ in 0..10 {
                let e = BitBlock::bernoulli(n, q, &mut rng);
                let s = h.syndrome(&e).unwrap();
                let want = decode_syndrome_fixed(&s, &h, &cfg).unwrap().e_hat;
                for w in [2, 4, 8] {
                    let mut eng = PlainEngine::default();
                    assert_eq!(decode_circuit(&mut eng, &s, &h, &cfg, w).unwrap(), want);
                }
            }
        }
    }
}

#[test]
fn hamming_and_irregular_codes() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let h = ParityCheck::hamming_7_4();
    for x in 0u64..8 {
        let s = BitBlock::from_words(3, vec![x]);
        for cfg in [DecoderConfig::gallager_a(0.1), DecoderConfig::gallager_b(0.1)] {
            let want = decode_syndrome_fixed(&s, &h, &cfg).unwrap().e_hat;
            let (got, _) = run_mpc(&s, &h, &cfg, 2, 3, &mut rng);
            assert_eq!(got, want, "syndrome {x}");
        }
    }
}

#[test]
fn mpc_matches_plaintext_for_several_party_counts() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let h = ParityCheck::regular(300, 3, 6, &mut rng).unwrap();
    let cfg = DecoderConfig::gallager_b(0.02);
    for parties in [2, 3, 5] {
        let e = BitBlock::bernoulli(300, 0.02, &mut rng);
        let s = h.syndrome(&e).unwrap();
        let want = decode_syndrome_fixed(&s, &h, &cfg).unwrap().e_hat;
        let (got, m) = run_mpc(&s, &h, &cfg, 4, parties, &mut rng);
        assert_eq!(got, want);
        assert_eq!(m.rounds, m.circuit_depth * 10);
        assert!(m.data_bytes > 0);
    }
}

#[test]
fn zero_syndrome_decodes_to_zero() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let h = ParityCheck::regular(120, 3, 6, &mut rng).unwrap();
    let (got, _) = run_mpc(&BitBlock::zeros(60), &h, &DecoderConfig::gallager_a(0.02), 4, 3, &mut rng);
    assert!(got.is_zero());
}

#[test]
fn depth_per_iteration() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let h = ParityCheck::regular(200, 3, 6, &mut rng).unwrap();
    let cfg = DecoderConfig::gallager_b(0.02);
    let depth = |w| {
        let mut eng = PlainEngine::default();
        decode_circuit(&mut eng, &BitBlock::zeros(100), &h, &cfg, w).unwrap();
        eng.layers / 10
    };
    assert_eq!(depth(4), 9);
    assert_eq!(depth(8), 12);
}

#[test]
fn metrics_scale_as_expected() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let m5 = mpc_bench(400, 4, 5, 0.02, &mut rng).unwrap();
    let m10 = mpc_bench(400, 4, 10, 0.02, &mut rng).unwrap();
    let m15 = mpc_bench(400, 4, 15, 0.02, &mut rng).unwrap();
    assert_eq!(m10.rounds, 2 * m5.rounds);
    assert_eq!(m15.rounds, 3 * m5.rounds);
    // the last iteration also evaluates the decision comparator
    assert_eq!(m15.data_bytes - m10.data_bytes, m10.data_bytes - m5.data_bytes);
    let m800 = mpc_bench(800, 4, 10, 0.02, &mut rng).unwrap();
    // per-lane traffic is fixed by the degree profile; byte rounding aside
    let ratio = m800.data_bytes as f64 / m10.data_bytes as f64;
    assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
    assert_eq!(m800.rounds, m10.rounds);
    let row = m10.csv_row();
    assert_eq!(row.split(',').count(), METRICS_HEADER.split(',').count());
    assert!(row.starts_with("400,4,9,"));
}

#[test]
fn errors() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let h = ParityCheck::regular(60, 3, 6, &mut rng).unwrap();
    let cfg = DecoderConfig::gallager_b(0.02);
    let s = BitBlock::zeros(30);
    let shares = share(&ShareData::Bits(s.clone()), Scheme::AdditiveGf2, 3, &mut rng).unwrap();
    let need = triples_needed(&h, &cfg, 4).unwrap();
    let mut short = deal_triples(need - 1, 3, &mut rng).unwrap();
    assert!(matches!(
        mpc_decode(&shares, &h, &cfg, 4, &mut short, false),
        Err(MpcError::Sharing(SharingError::Exhausted { .. }))
    ));
    let mut pool = deal_triples(need, 3, &mut rng).unwrap();
    assert!(matches!(
        mpc_decode(&shares, &h, &cfg, 1, &mut pool, false),
        Err(MpcError::BitwidthTooSmall { bitwidth: 1, needed: 2 })
    ));
    assert!(matches!(
        mpc_decode(&shares, &h, &DecoderConfig::sum_product(0.02), 4, &mut pool, false),
        Err(MpcError::Config(_))
    ));
    let mut eng = PlainEngine::default();
    assert!(matches!(
        decode_circuit(&mut eng, &BitBlock::zeros(31), &h, &cfg, 4),
        Err(MpcError::Dimension { expected: 30, actual: 31 })
    ));
    let gfp = share(&ShareData::Bits(s), Scheme::AdditiveGfp, 3, &mut rng).unwrap();
    assert!(matches!(mpc_decode(&gfp, &h, &cfg, 4, &mut pool, false), Err(MpcError::Config(_))));
}

/// Four 4-bit windows of party 0's received openings, as one histogram.
pub(crate) fn view_histogram(view: &[BitBlock], hist: &mut [u64]) {
    let picks = [(0usize, 0usize), (0, 40), (view.len() / 2, 8), (view.len() - 1, 0)];
    for (slot, (msg, off)) in picks.into_iter().enumerate() {
        let nibble = view[msg].slice(off, 4).words()[0] as usize;
        hist[slot * 16 + nibble] += 1;
    }
}

#[test]
fn party_view_does_not_depend_on_syndrome() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let h = ParityCheck::regular(200, 3, 6, &mut rng).unwrap();
    let cfg = DecoderConfig::gallager_b(0.02).with_iterations(3);
    let need = triples_needed(&h, &cfg, 4).unwrap();
    let s1 = BitBlock::zeros(100);
    let s2 = h.syndrome(&BitBlock::bernoulli(200, 0.05, &mut rng)).unwrap();
    let mut hists = [vec![0u64; 64], vec![0u64; 64]];
    for (hist, s) in hists.iter_mut().zip([&s1, &s2]) {
        for _ in 0..400 {
            let shares = share(&ShareData::Bits(s.clone()), Scheme::AdditiveGf2, 3, &mut rng).unwrap();
            let mut pool = deal_triples(need, 3, &mut rng).unwrap();
            let out = mpc_decode(&shares, &h, &cfg, 4, &mut pool, true).unwrap();
            view_histogram(&out.view.unwrap(), hist);
        }
    }
    let p = chi_square_two_sample(&hists[0], &hists[1]);
    assert!(p > 0.001, "p = {p}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mpc_equals_plaintext(seed in any::<u64>(), half in 10usize..150, q in 0.0f64..0.08, a in any::<bool>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let n = 2 * half;
        let h = ParityCheck::regular(n, 3, 6, &mut rng).unwrap();
        let cfg = if a { DecoderConfig::gallager_a(0.02) } else { DecoderConfig::gallager_b(0.02) };
        let s = h.syndrome(&BitBlock::bernoulli(n, q, &mut rng)).unwrap();
        let want = decode_syndrome_fixed(&s, &h, &cfg).unwrap().e_hat;
        let (got, m) = run_mpc(&s, &h, &cfg, 4, 3, &mut rng);
        prop_assert_eq!(got, want);
        prop_assert!(m.rounds >= m.circuit_depth * m.iterations as usize);
    }
}
