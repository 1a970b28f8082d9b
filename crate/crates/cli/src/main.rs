use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use qkd_offload::bitlinalg::{emit_alist, parse_alist, BitBlock, ParityCheck};
use qkd_offload::channel::ChannelParams;
use qkd_offload::harness::{emit_curves, emit_mpc_table, run_scenario, write_outputs, OffloadMode, Scenario};
use qkd_offload::keyrate::zero_crossing;
use qkd_offload::ldpc::DecoderConfig;
use qkd_offload::rem_ir::attack::{eve_attack, eve_dr_invariance, AttackTarget};
use qkd_offload::rem_ir::{CodeRef, InProcessDecoder};
use qkd_offload::service::{self, Role, Service};

#[derive(Parser)]
#[command(name = "qkd-offload", version, about = "QKD post-processing offload simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write report.json and blocks.csv.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        blocks: Option<usize>,
        /// local, rem_ir, rem_ir_variant or rr_encrypted.
        #[arg(long)]
        mode: Option<OffloadMode>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Serve decode and PA requests over TCP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7400")]
        bind: SocketAddr,
        /// Directory with `<id>_*.alist` codes and an optional decoder.json.
        #[arg(long)]
        codes: PathBuf,
        #[arg(long, value_enum, default_value_t = ServeRole::Both)]
        role: ServeRole,
    },
    /// Key-length balance curves into curves.csv.
    Curves {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated Bob error rates.
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.02, 0.03, 0.05, 0.08])]
        e: Vec<f64>,
        /// Number of grid points for d in [0, 0.5].
        #[arg(long, default_value_t = 101)]
        d_points: usize,
    },
    /// Secure-decoder depth, traffic and time per block size into mpc_table.csv.
    MpcBench {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1000, 2000, 5000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        bitwidth: usize,
        #[arg(long, default_value_t = 10)]
        iterations: u32,
        #[arg(long, default_value_t = 0.02)]
        qber: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Eavesdropper experiments against the reconciliation transcript.
    Attack {
        #[arg(long, value_enum, default_value_t = AttackKind::Rr)]
        kind: AttackKind,
        /// alist file; a random (3,6) code of length --n otherwise.
        #[arg(long)]
        code: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.03)]
        e: f64,
        #[arg(long, default_value_t = 0.01)]
        d: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write a random regular LDPC code in alist format.
    GenCode {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        dv: usize,
        #[arg(long, default_value_t = 6)]
        dc: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ServeRole {
    Decoder,
    Pa,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackKind {
    /// Eve against plain and encrypted reverse reconciliation.
    Rr,
    /// Direct reconciliation: decoder view must not depend on the key.
    DrInvariance,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().cmd {
        Cmd::Run {
            scenario,
            seed,
            blocks,
            mode,
            out,
        } => run(&scenario, seed, blocks, mode, &out),
        Cmd::Serve { bind, codes, role } => serve(bind, &codes, role),
        Cmd::Curves { out, e, d_points } => {
            if d_points < 2 {
                bail!("--d-points must be at least 2");
            }
            let grid: Vec<f64> = (0..d_points).map(|i| 0.5 * i as f64 / (d_points - 1) as f64).collect();
            emit_curves(&out, &e, &grid)?;
            for &ei in &e {
                match zero_crossing(ei)? {
                    Some(d) => println!("e = {ei}: encrypted variant positive for d > {d:.6}"),
                    None => println!("e = {ei}: encrypted variant never positive"),
                }
            }
            println!("wrote {}", out.join("curves.csv").display());
            Ok(())
        }
        Cmd::MpcBench {
            out,
            sizes,
            bitwidth,
            iterations,
            qber,
            seed,
        } => {
            let rows = emit_mpc_table(&out, &sizes, bitwidth, iterations, qber, seed)?;
            println!("{}", qkd_offload::mpc_flip::METRICS_HEADER);
            for r in rows {
                println!("{}", r.csv_row());
            }
            Ok(())
        }
        Cmd::Attack {
            kind,
            code,
            n,
            e,
            d,
            trials,
            seed,
        } => attack(kind, code.as_deref(), n, e, d, trials, seed),
        Cmd::GenCode { n, dv, dc, seed, out } => {
            let h = ParityCheck::regular(n, dv, dc, &mut ChaCha20Rng::seed_from_u64(seed))?;
            std::fs::write(&out, emit_alist(&h)).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote ({dv},{dc}) code n={n} r={} to {}", h.r(), out.display());
            Ok(())
        }
    }
}

fn run(path: &Path, seed: Option<u64>, blocks: Option<usize>, mode: Option<OffloadMode>, out: &Path) -> Result<()> {
    let mut s = Scenario::load(path)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(b) = blocks {
        s.blocks = b;
    }
    if let Some(m) = mode {
        s.mode = m;
    }
    let report = run_scenario(&s)?;
    write_outputs(&report, out)?;
    println!(
        "{}: {} blocks, FER {:.4}, mean QBER {:.4}, {} final bits, {} leaked, {} pad bits",
        if report.name.is_empty() { "scenario" } else { &report.name },
        report.blocks.len(),
        report.fer,
        report.mean_qber,
        report.final_bits,
        report.leaked_bits,
        report.otp_consumed + report.tag_pad_bits
    );
    if let Some(b) = report.key_balance {
        println!("key balance {b:.1} bits");
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn serve(bind: SocketAddr, codes: &Path, role: ServeRole) -> Result<()> {
    let role = match role {
        ServeRole::Decoder => Role::Decoder,
        ServeRole::Pa => Role::PaServer,
        ServeRole::Both => Role::Both,
    };
    let svc = Service::from_dir(role, codes)?;
    let listener = TcpListener::bind(bind).with_context(|| format!("binding {bind}"))?;
    let handle = service::spawn(listener, Arc::new(svc))?;
    println!("listening on {}", handle.addr());
    handle.join();
    Ok(())
}

fn attack(kind: AttackKind, code: Option<&Path>, n: usize, e: f64, d: f64, trials: usize, seed: u64) -> Result<()> {
    let h = match code {
        Some(p) => parse_alist(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| p.display().to_string())?,
        None => ParityCheck::regular(n, 3, 6, &mut ChaCha20Rng::seed_from_u64(seed))?,
    };
    let code = CodeRef::new(1, h);
    let p = ChannelParams::new(e, d, seed)?;
    match kind {
        AttackKind::Rr => {
            let eve = DecoderConfig::sum_product(d.max(1e-3));
            for target in [AttackTarget::RrPlain, AttackTarget::RrEncrypted, AttackTarget::DrControl] {
                let s = eve_attack(&p, &code, &eve, trials, target)?;
                println!("{}", serde_json::to_string(&s)?);
            }
        }
        AttackKind::DrInvariance => {
            let dec = InProcessDecoder::for_code(&code, DecoderConfig::sum_product(e.max(1e-3)));
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let e_vec = BitBlock::bernoulli(code.h.n(), e, &mut rng);
            let r = eve_dr_invariance(&e_vec, &code, &dec, trials, &mut rng);
            println!("{}", serde_json::to_string(&r)?);
            if r.violations > 0 {
                bail!("{} of {} runs exposed key-dependent decoder input", r.violations, r.trials);
            }
        }
    }
    Ok(())
}
