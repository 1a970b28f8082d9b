use super::*;
use crate::ldpc::DecoderConfig;

fn scenario(mode: OffloadMode, e: f64, blocks: usize) -> Scenario {
    let json = serde_json::json!({
        "schema": 1,
        "name": "t",
        "seed": 11,
        "channel": {"e": e, "d": 0.1},
        "code": {"kind": "regular", "n": 1000, "dv": 3, "dc": 6, "seed": 5},
        "decoder": DecoderConfig::sum_product(0.03),
        "mode": mode,
        "blocks": blocks,
    });
    // validated by run_scenario
    serde_json::from_value(json).unwrap()
}

#[test]
fn noiseless_channel_never_fails() {
    let r = run_scenario(&scenario(OffloadMode::RemIr, 0.0, 4)).unwrap();
    assert_eq!(r.fer, 0.0);
    assert_eq!(r.mean_qber, 0.0);
    assert_eq!(r.otp_consumed, 0);
    for b in &r.blocks {
        assert_eq!(b.status, BlockStatus::Ok);
        assert!(!b.undetected_error);
        assert_eq!(b.final_key.as_ref().unwrap().len(), b.final_bits);
    }
}

#[test]
fn offload_modes_agree_with_local_decoding() {
    let local = run_scenario(&scenario(OffloadMode::Local, 0.02, 3)).unwrap();
    for mode in [OffloadMode::RemIr, OffloadMode::RemIrVariant] {
        let r = run_scenario(&scenario(mode, 0.02, 3)).unwrap();
        for (a, b) in local.blocks.iter().zip(&r.blocks) {
            assert_eq!(a.status, b.status);
            assert_eq!(a.final_key, b.final_key, "{mode:?} block {}", a.block);
        }
    }
}

#[test]
fn leakage_is_one_syndrome_per_block() {
    let r = run_scenario(&scenario(OffloadMode::RemIr, 0.02, 2)).unwrap();
    for b in r.blocks.iter().filter(|b| b.status == BlockStatus::Ok) {
        assert_eq!(b.leaked_bits, 500);
        // sampled bits and ê travel in the clear but do not count
        assert!(b.public_bits > b.leaked_bits + 1000);
    }
}

#[test]
fn encrypted_rr_reports_negative_balance() {
    let mut s = scenario(OffloadMode::RrEncrypted, 0.02, 2);
    s.channel.d = 0.01;
    s.key_store = Some(KeyStoreSpec {
        seed: 3,
        bits_per_block: 2000,
    });
    let r = run_scenario(&s).unwrap();
    for b in &r.blocks {
        assert!(b.key_balance.unwrap() < 0.0, "{b:?}");
    }
    assert!(r.otp_consumed >= 1000);
}

#[test]
fn reports_are_reproducible() {
    let s = scenario(OffloadMode::RemIrVariant, 0.03, 3);
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&s).unwrap();
    assert_eq!(a.canonical_json(), b.canonical_json());
    let mut other = s.clone();
    other.seed += 1;
    assert_ne!(run_scenario(&other).unwrap().canonical_json(), a.canonical_json());
}

#[test]
fn remote_style_pa_matches_local_pa() {
    let local = run_scenario(&scenario(OffloadMode::RemIr, 0.02, 2)).unwrap();
    let mut s = scenario(OffloadMode::RemIr, 0.02, 2);
    s.pa = PaMode::RemPa {
        scheme: crate::sharing::Scheme::AdditiveGf2,
        n_servers: 3,
        servers: Vec::new(),
        spot_check: 0.1,
    };
    let r = run_scenario(&s).unwrap();
    for (a, b) in local.blocks.iter().zip(&r.blocks) {
        assert_eq!(a.final_key, b.final_key);
    }
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_scenario(&scenario(OffloadMode::Local, 0.02, 2)).unwrap();
    write_outputs(&r, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("blocks.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with(BLOCKS_HEADER));
    let back: RunReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(back.blocks, r.blocks);
}

#[test]
fn bad_scenarios_are_rejected() {
    let mut s = scenario(OffloadMode::Local, 0.02, 1);
    s.blocks = 0;
    assert!(matches!(run_scenario(&s), Err(HarnessError::Invalid(_))));
    let s = scenario(OffloadMode::RrEncrypted, 0.02, 1);
    assert!(s.validate().is_err());
    let mut s = scenario(OffloadMode::Local, 0.02, 1);
    s.channel.e = 0.7;
    assert!(s.validate().is_err());
    assert!(Scenario::from_json(r#"{"schema": 1, "bogus": 2}"#, Path::new(".")).is_err());
    assert!("rem_ir_variant".parse::<OffloadMode>().is_ok());
    assert!("nope".parse::<OffloadMode>().is_err());
}

#[test]
fn qber_bound_against_closed_form() {
    // zero errors: the bound solves (1 - q)^s = alpha
    for s in [10usize, 111, 1000] {
        let q = qber_upper_bound(0, s, 1e-6);
        assert!(((1.0 - q).powi(s as i32) - 1e-6).abs() < 1e-9, "s={s}");
    }
    // all errors
    assert_eq!(qber_upper_bound(5, 5, 1e-6), 1.0);
    let lo = qber_upper_bound(2, 100, 1e-3);
    let hi = qber_upper_bound(2, 100, 1e-6);
    assert!(0.02 < lo && lo < hi && hi < 0.2);
}

#[test]
fn weight_check_tolerates_lucky_samples() {
    let s = scenario(OffloadMode::RemIr, 0.02, 40);
    let local = run_scenario(&Scenario { mode: OffloadMode::Local, ..s.clone() }).unwrap();
    let r = run_scenario(&s).unwrap();
    assert!(r.blocks.iter().any(|b| b.qber_estimate == 0.0), "no block sampled zero errors");
    assert_eq!(r.fer, local.fer);
}
