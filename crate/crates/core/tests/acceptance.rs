//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Runs as a plain binary (`harness = false`) so the report is always shown.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use qkd_offload::bitlinalg::{parse_alist, toeplitz_apply_fast, toeplitz_apply_naive, BitBlock, ParityCheck, ToeplitzSeed};
use qkd_offload::channel::{binary_entropy, raw_key, transmit, ChannelParams};
use qkd_offload::harness::{run_scenario, write_outputs, Scenario};
use qkd_offload::keyrate::{capacity_enc, secret_capacity, zero_crossing};
use qkd_offload::ldpc::{decode_syndrome, decode_syndrome_fixed, verify_error_vector, weight_bound, DecoderConfig, Verdict};
use qkd_offload::mpc_flip::{mpc_decode, triples_needed};
use qkd_offload::rem_ir::attack::{eve_dr_invariance, eve_attack, eve_rr_attack, AttackTarget};
use qkd_offload::rem_ir::{run_rem_ir, CodeRef, InProcessDecoder, IrOptions, Tamper, TamperingDecoder};
use qkd_offload::rem_pa::{check_tag, make_tag, pa_local, run_rem_pa, ConfirmVerdict, LocalPaServer, PaPlan, PaServer};
use qkd_offload::sharing::{deal_triples, reconstruct, share, Scheme, ShareData};
use qkd_offload::stats::chi_square_two_sample;

const CODE: &str = include_str!("fixtures/codes/1_regular_3_6_n1000.alist");

type Outcome = Result<String, String>;

fn code() -> CodeRef {
    CodeRef::new(1, parse_alist(CODE).expect("fixture code parses"))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reconciliation_correctness() -> Outcome {
    let start = Instant::now();
    let code = code();
    let dec = InProcessDecoder::for_code(&code, DecoderConfig::sum_product(0.02));
    let p = ChannelParams::new(0.02, 0.01, 101).unwrap();
    let (mut ok, mut wrong) = (0, 0);
    for b in 0..200u64 {
        let k_a = raw_key(1000, p.seed, b);
        let k_b = transmit(&k_a, &p, b).unwrap().k_b;
        if let Ok(out) = run_rem_ir(&k_a, &k_b, &code, &IrOptions::default(), &dec, b) {
            if out.key == k_a {
                ok += 1;
            } else {
                wrong += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        ok >= 190 && wrong == 0 && secs < 60.0,
        format!("{ok}/200 reconciled, {wrong} accepted but wrong, {secs:.1}s"),
    )
}

fn dr_invariance() -> Outcome {
    let code = code();
    let dec = InProcessDecoder::for_code(&code, DecoderConfig::sum_product(0.02));
    let mut rng = ChaCha20Rng::seed_from_u64(202);
    let mut violations = 0;
    for _ in 0..50 {
        let e_vec = BitBlock::bernoulli(1000, 0.02, &mut rng);
        violations += eve_dr_invariance(&e_vec, &code, &dec, 100, &mut rng).violations;
    }
    check(violations == 0, format!("50 error vectors x 100 keys, {violations} violations"))
}

fn rr_attack() -> Outcome {
    let code = code();
    let p = ChannelParams::new(0.03, 0.01, 303).unwrap();
    let plain = eve_rr_attack(&p, &code, 100).unwrap();
    let eve = DecoderConfig::sum_product(0.01);
    let enc = eve_attack(&p, &code, &eve, 100, AttackTarget::RrEncrypted).unwrap();
    let c_enc = capacity_enc(0.03, 0.01).unwrap();
    check(
        plain.rate >= 0.99 && enc.rate <= 0.05 && c_enc < 0.0,
        format!(
            "plain RR recovered {:.2}, encrypted {:.2}, C_s-enc(0.03, 0.01) = {c_enc:.4}",
            plain.rate, enc.rate
        ),
    )
}

/// `H_b(p) = 1 - 1/(2 ln 2) sum_k (1-2p)^(2k) / (k (2k-1))`, Kahan-summed.
fn entropy_series(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    let x2 = (1.0 - 2.0 * p).powi(2);
    let (mut sum, mut comp, mut pow) = (0.0f64, 0.0f64, 1.0f64);
    for k in 1..10_000_000u64 {
        pow *= x2;
        let kf = k as f64;
        let term = pow / (kf * (2.0 * kf - 1.0));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term < 1e-20 {
            break;
        }
    }
    1.0 - sum / (2.0 * std::f64::consts::LN_2)
}

fn capacity_formulas() -> Outcome {
    let grid: Vec<f64> = (1..=100).map(|i| i as f64 / 200.0).collect();
    let (mut worst, mut worst_identity) = (0.0f64, 0.0f64);
    for &e in &grid {
        let he = entropy_series(e);
        for &d in &grid {
            let composite = e * (1.0 - d) + d * (1.0 - e);
            let cs = entropy_series(composite) - he;
            let got = secret_capacity(e, d).unwrap();
            let got_enc = capacity_enc(e, d).unwrap();
            worst = worst.max((got - cs).abs()).max((got_enc - (cs - he)).abs());
            worst_identity = worst_identity.max(((got - got_enc) - binary_entropy(e).unwrap()).abs());
        }
    }
    // no crossing in [0, 0.5] means the encrypted variant is never positive,
    // which needs 1 - 2 H_b(e) <= 0 at d = 1/2
    let mut crossing_ok = true;
    let mut none_from = None;
    for i in 1..=100 {
        let e = 0.0025 * i as f64;
        match zero_crossing(e).unwrap() {
            Some(d) => crossing_ok &= d > e,
            None => {
                crossing_ok &= capacity_enc(e, 0.5).unwrap() <= 0.0;
                none_from.get_or_insert(e);
            }
        }
    }
    check(
        worst < 1e-9 && worst_identity < 1e-12 && crossing_ok,
        format!(
            "max |err| {worst:.1e}, identity {worst_identity:.1e}, d*(e) > e on (0, 0.25] (never positive from e = {})",
            none_from.map_or("-".into(), |e| e.to_string())
        ),
    )
}

fn verifiability() -> Outcome {
    let code = code();
    let h = &code.h;
    if h.has_zero_column() {
        return Err("fixture code has a zero column".into());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(505);
    let cfg = DecoderConfig::sum_product(0.02);
    let mut rejected = 0;
    let mut tampers = 0;
    while tampers < 10_000 {
        let e = BitBlock::bernoulli(1000, 0.02, &mut rng);
        let s = h.syndrome(&e).unwrap();
        let honest = decode_syndrome(&s, h, &cfg).unwrap();
        if !honest.converged {
            continue;
        }
        for _ in 0..100 {
            let flips = if rng.random_bool(0.5) { 1 } else { rng.random_range(2..=16) };
            let mut forged = honest.e_hat.clone();
            for j in rand::seq::index::sample(&mut rng, 1000, flips) {
                forged.flip(j);
            }
            tampers += 1;
            if verify_error_vector(&forged, &s, h, None) == Verdict::SyndromeMismatch {
                rejected += 1;
            }
        }
    }
    // end to end through a lying decoder
    let mut aborted = 0;
    let liar = TamperingDecoder::new(
        InProcessDecoder::for_code(&code, cfg.clone()),
        Tamper::FlipBits(3),
        ChaCha20Rng::seed_from_u64(1),
    );
    for b in 0..100 {
        let k_a = BitBlock::random(1000, &mut rng);
        let k_b = &k_a ^ &BitBlock::bernoulli(1000, 0.02, &mut rng);
        aborted += run_rem_ir(&k_a, &k_b, &code, &IrOptions::default(), &liar, b).is_err() as usize;
    }
    // valid-syndrome forgeries: honest output plus a non-zero codeword
    let basis = h.codeword_basis();
    let bound = weight_bound(1000, 0.02);
    let mut forgeries = 0;
    let mut caught = 0;
    for _ in 0..1000 {
        let e = BitBlock::bernoulli(1000, 0.02, &mut rng);
        let s = h.syndrome(&e).unwrap();
        let mut c = BitBlock::zeros(1000);
        for _ in 0..rng.random_range(1..=8) {
            c ^= &basis[rng.random_range(0..basis.len())];
        }
        if c.is_zero() {
            continue;
        }
        let forged = &e ^ &c;
        forgeries += 1;
        if verify_error_vector(&forged, &s, h, Some(bound)) == Verdict::WeightExceeded {
            caught += 1;
        }
    }
    check(
        rejected == tampers && aborted == 100 && caught == forgeries,
        format!(
            "{rejected}/{tampers} tampers rejected, {aborted}/100 sessions aborted, {caught}/{forgeries} codeword forgeries over weight bound {bound}"
        ),
    )
}

fn mpc_equivalence() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(606);
    let mut fixtures = 0;
    let mut equal = 0;
    let mut depth = [0usize; 2];
    for n in [64, 200, 1000, 4000, 10_000] {
        let h = ParityCheck::regular(n, 3, 6, &mut rng).unwrap();
        for (cfg, q, w) in [
            (DecoderConfig::gallager_a(0.02), 0.01, 4),
            (DecoderConfig::gallager_b(0.02), 0.02, 4),
            (DecoderConfig::gallager_b(0.04), 0.04, 8),
        ] {
            let cfg = cfg.with_iterations(10);
            let s = h.syndrome(&BitBlock::bernoulli(n, q, &mut rng)).unwrap();
            let want = decode_syndrome_fixed(&s, &h, &cfg).unwrap().e_hat;
            let shares = share(&ShareData::Bits(s), Scheme::AdditiveGf2, 3, &mut rng).unwrap();
            let mut pool = deal_triples(triples_needed(&h, &cfg, w).unwrap(), 3, &mut rng).unwrap();
            let out = mpc_decode(&shares, &h, &cfg, w, &mut pool, false).unwrap();
            fixtures += 1;
            equal += (reconstruct(&out.e_hat_shares).unwrap().to_bits() == want) as usize;
            depth[(w == 8) as usize] = out.metrics.circuit_depth;
        }
    }

    // party 0's received openings for two different syndromes
    let h = ParityCheck::regular(1000, 3, 6, &mut rng).unwrap();
    let cfg = DecoderConfig::gallager_b(0.02).with_iterations(3);
    let need = triples_needed(&h, &cfg, 4).unwrap();
    let syndromes = [
        BitBlock::zeros(500),
        h.syndrome(&BitBlock::bernoulli(1000, 0.05, &mut rng)).unwrap(),
    ];
    let mut hists = [vec![0u64; 64], vec![0u64; 64]];
    for (hist, s) in hists.iter_mut().zip(&syndromes) {
        for _ in 0..1000 {
            let shares = share(&ShareData::Bits(s.clone()), Scheme::AdditiveGf2, 3, &mut rng).unwrap();
            let mut pool = deal_triples(need, 3, &mut rng).unwrap();
            let view = mpc_decode(&shares, &h, &cfg, 4, &mut pool, true).unwrap().view.unwrap();
            let picks = [(0, 0), (0, 300), (view.len() / 2, 17), (view.len() - 1, 5)];
            for (slot, (msg, off)) in picks.into_iter().enumerate() {
                let nibble = view[msg].slice(off, 4).words()[0] as usize;
                hist[slot * 16 + nibble] += 1;
            }
        }
    }
    let p = chi_square_two_sample(&hists[0], &hists[1]);
    check(
        equal == fixtures && p > 0.001 && depth[0].abs_diff(9) <= 2 && depth[1].abs_diff(11) <= 2,
        format!(
            "{equal}/{fixtures} fixtures equal (n <= 10^4), view test p = {p:.3}, depth {} at w=4 and {} at w=8",
            depth[0], depth[1]
        ),
    )
}

fn rem_pa_equivalence() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(707);
    let mut mismatches = 0;
    let mut largest = 0;
    for scheme in [Scheme::AdditiveGf2, Scheme::AdditiveGfp, Scheme::Shamir { threshold: 1 }] {
        let parties = 3;
        let pool: Vec<Arc<dyn PaServer>> =
            (0..parties).map(|_| Arc::new(LocalPaServer) as _).collect();
        for i in 0..500 {
            // log-uniform lengths, with the top of the range always covered
            let n = if i < 5 { 100_000 } else { (10f64.powf(rng.random_range(1.0..5.0))) as usize };
            let m = rng.random_range(1..=n);
            let k = BitBlock::random(n, &mut rng);
            let plan = PaPlan::random(n, m, &mut rng).unwrap();
            let got = run_rem_pa(&k, &plan, &pool, scheme, 0.01, &mut rng).unwrap().key;
            mismatches += (got != pa_local(&k, &plan).unwrap()) as usize;
            largest = largest.max(n);
        }
    }

    // every key for n <= 16; every seed too while n <= 4
    let mut toeplitz_bad = 0;
    for n in 1..=16usize {
        for m in [1, n.div_ceil(2), n] {
            let seed_len = n + m - 1;
            let seeds: Vec<ToeplitzSeed> = if n <= 4 {
                (0..1u64 << seed_len)
                    .map(|s| ToeplitzSeed::new(n, m, BitBlock::from_words(seed_len, vec![s])).unwrap())
                    .collect()
            } else {
                (0..4).map(|_| ToeplitzSeed::random(n, m, &mut rng).unwrap()).collect()
            };
            for t in &seeds {
                for x in 0..1u64 << n {
                    let k = BitBlock::from_words(n, vec![x]);
                    toeplitz_bad += (toeplitz_apply_fast(&k, t).unwrap() != toeplitz_apply_naive(&k, t).unwrap()) as usize;
                }
            }
        }
    }
    for _ in 0..100 {
        let n = rng.random_range(10_000..=100_000);
        let m = rng.random_range(1..=n / 4);
        let t = ToeplitzSeed::random(n, m, &mut rng).unwrap();
        let k = BitBlock::random(n, &mut rng);
        toeplitz_bad += (toeplitz_apply_fast(&k, &t).unwrap() != toeplitz_apply_naive(&k, &t).unwrap()) as usize;
    }
    check(
        mismatches == 0 && toeplitz_bad == 0,
        format!(
            "3 x 500 instances up to n = {largest}: {mismatches} mismatches; Toeplitz fast vs naive: {toeplitz_bad} mismatches"
        ),
    )
}

fn confirmation_soundness() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(808);
    let (mut false_accept, mut false_reject) = (0, 0);
    for i in 0..100_000 {
        let k_a = BitBlock::random(256, &mut rng);
        let pad = BitBlock::random(32, &mut rng);
        let pad = (i % 2 == 0).then_some(&pad);
        let k_b = if i % 4 < 2 {
            let mut k = k_a.clone();
            k.flip(rng.random_range(0..256));
            k
        } else {
            BitBlock::random(256, &mut rng)
        };
        let tag = make_tag(&k_a, 32, pad, &mut rng).unwrap();
        if k_b != k_a && check_tag(&k_b, &tag, pad) == ConfirmVerdict::Accept {
            false_accept += 1;
        }
        if check_tag(&k_a, &tag, pad) != ConfirmVerdict::Accept {
            false_reject += 1;
        }
    }
    check(
        false_accept == 0 && false_reject == 0,
        format!("10^5 trials at tag_len 32: {false_accept} unequal accepted, {false_reject} equal rejected"),
    )
}

fn determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut differing = Vec::new();
    for p in &paths {
        let s = Scenario::load(p).map_err(|e| e.to_string())?;
        let runs: Vec<(String, String)> = (0..2)
            .map(|_| {
                let r = run_scenario(&s).unwrap();
                let out = tempfile::tempdir().unwrap();
                write_outputs(&r, out.path()).unwrap();
                (r.canonical_json(), std::fs::read_to_string(out.path().join("blocks.csv")).unwrap())
            })
            .collect();
        if runs[0] != runs[1] {
            differing.push(p.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    check(
        !paths.is_empty() && differing.is_empty(),
        format!("{} scenarios run twice, differing: {differing:?}", paths.len()),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("1 reconciliation correctness", reconciliation_correctness),
        ("2 direct-reconciliation decoder view", dr_invariance),
        ("3 reverse-reconciliation attack", rr_attack),
        ("4 capacity formulas", capacity_formulas),
        ("5 verifiability", verifiability),
        ("6 MPC decoding", mpc_equivalence),
        ("7 REM-PA equivalence", rem_pa_equivalence),
        ("8 confirmation soundness", confirmation_soundness),
        ("9 end-to-end determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS  criterion {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL  criterion {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
