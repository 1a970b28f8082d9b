use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{HarnessError, RunReport};
use crate::keyrate::{curves_csv, generate_balance_curves};
use crate::mpc_flip::{mpc_bench, MpcMetrics, METRICS_HEADER};

pub const BLOCKS_HEADER: &str =
    "block,status,qber_estimate,decoder_iterations,public_bits,leaked_bits,pa_len,final_bits,otp_consumed,tag_pad_bits,key_balance";

fn write(dir: &Path, name: &str, text: &str) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

/// `report.json` and `blocks.csv` under `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<(), HarnessError> {
    let json = serde_json::to_string_pretty(report).map_err(|e| HarnessError::Other(e.to_string()))?;
    write(dir, "report.json", &json)?;
    let mut csv = String::from(BLOCKS_HEADER);
    csv.push('\n');
    for b in &report.blocks {
        let status = serde_json::to_value(b.status).expect("status serializes");
        let _ = writeln!(
            csv,
            "{},{},{:.6},{},{},{},{},{},{},{},{}",
            b.block,
            status.as_str().unwrap_or_default(),
            b.qber_estimate,
            b.decoder_iterations,
            b.public_bits,
            b.leaked_bits,
            b.pa_len,
            b.final_bits,
            b.otp_consumed,
            b.tag_pad_bits,
            b.key_balance.map(|x| format!("{x:.3}")).unwrap_or_default()
        );
    }
    write(dir, "blocks.csv", &csv)
}

/// Key-rate curves over `e_list` x `d_grid` into `dir/curves.csv`.
pub fn emit_curves(dir: &Path, e_list: &[f64], d_grid: &[f64]) -> Result<String, HarnessError> {
    let points = generate_balance_curves(e_list, d_grid).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let csv = curves_csv(&points);
    write(dir, "curves.csv", &csv)?;
    Ok(csv)
}

/// Secure-decoder cost for each block size into `dir/mpc_table.csv`.
pub fn emit_mpc_table(
    dir: &Path,
    sizes: &[usize],
    bitwidth: usize,
    iterations: u32,
    qber: f64,
    seed: u64,
) -> Result<Vec<MpcMetrics>, HarnessError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut csv = String::from(METRICS_HEADER);
    csv.push('\n');
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let m = mpc_bench(n, bitwidth, iterations, qber, &mut rng).map_err(|e| HarnessError::Other(e.to_string()))?;
        log::info!("mpc n={n}: {:.3}s, {} rounds", m.wall_time, m.rounds);
        csv.push_str(&m.csv_row());
        csv.push('\n');
        rows.push(m);
    }
    write(dir, "mpc_table.csv", &csv)?;
    Ok(rows)
}
