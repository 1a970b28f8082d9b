use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bitlinalg::{parse_alist, ParityCheck};
use crate::channel::ChannelParams;
use crate::ldpc::DecoderConfig;
use crate::rem_pa::ConfirmPlacement;
use crate::rem_ir::CodeRef;
use crate::sharing::Scheme;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffloadMode {
    /// Bob decodes himself.
    Local,
    RemIr,
    RemIrVariant,
    RrEncrypted,
}

impl std::str::FromStr for OffloadMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| HarnessError::Invalid(format!("unknown mode `{s}` (local, rem_ir, rem_ir_variant, rr_encrypted)")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSpec {
    /// Path relative to the scenario file.
    Alist {
        path: PathBuf,
        #[serde(default = "default_code_id")]
        id: u16,
    },
    Regular {
        n: usize,
        dv: usize,
        dc: usize,
        seed: u64,
        #[serde(default = "default_code_id")]
        id: u16,
    },
}

fn default_code_id() -> u16 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PaMode {
    Local,
    RemPa {
        scheme: Scheme,
        n_servers: usize,
        /// TCP servers; empty means in-process servers.
        #[serde(default)]
        servers: Vec<SocketAddr>,
        #[serde(default)]
        spot_check: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub e: f64,
    pub d: f64,
}

/// Pre-shared one-time-pad material, drawn per block from `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyStoreSpec {
    pub seed: u64,
    pub bits_per_block: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub channel: ChannelSpec,
    pub code: CodeSpec,
    pub decoder: DecoderConfig,
    pub mode: OffloadMode,
    /// Remote decoder; in-process when absent.
    #[serde(default)]
    pub decoder_endpoint: Option<SocketAddr>,
    #[serde(default = "default_pa")]
    pub pa: PaMode,
    pub blocks: usize,
    #[serde(default = "default_sample_fraction")]
    pub sample_fraction: f64,
    #[serde(default = "default_tag_len")]
    pub tag_len: usize,
    #[serde(default = "default_confirm")]
    pub confirm: ConfirmPlacement,
    /// Bits subtracted from the PA output length beyond disclosed bits.
    #[serde(default = "default_margin")]
    pub pa_margin: usize,
    /// Apply the statistical weight bound when verifying `ê`.
    #[serde(default = "default_true")]
    pub weight_bound: bool,
    #[serde(default)]
    pub key_store: Option<KeyStoreSpec>,
    /// Where relative paths resolve; set by [`Scenario::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_pa() -> PaMode {
    PaMode::Local
}
fn default_sample_fraction() -> f64 {
    0.1
}
fn default_tag_len() -> usize {
    32
}
fn default_confirm() -> ConfirmPlacement {
    ConfirmPlacement::AfterPa
}
fn default_margin() -> usize {
    50
}
fn default_true() -> bool {
    true
}

impl Scenario {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| HarnessError::Invalid(e.to_string()))?;
        s.base_dir = base_dir.to_path_buf();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base).map_err(|e| match e {
            HarnessError::Invalid(m) => HarnessError::Invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn channel_params(&self) -> Result<ChannelParams, HarnessError> {
        ChannelParams::new(self.channel.e, self.channel.d, self.seed).map_err(|e| HarnessError::Invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema {} is not supported, expected {SCHEMA_VERSION}", self.schema));
        }
        self.channel_params()?;
        self.decoder.validate().map_err(|e| HarnessError::Invalid(format!("decoder: {e}")))?;
        if self.blocks == 0 {
            return bad("blocks must be at least 1".into());
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction < 1.0) {
            return bad(format!("sample_fraction {} must lie in (0, 1)", self.sample_fraction));
        }
        if self.tag_len == 0 {
            return bad("tag_len must be at least 1".into());
        }
        if self.mode == OffloadMode::RrEncrypted && self.key_store.is_none() {
            return bad("mode rr_encrypted needs a key_store".into());
        }
        if self.mode == OffloadMode::Local && self.decoder_endpoint.is_some() {
            return bad("decoder_endpoint is meaningless in local mode".into());
        }
        if let PaMode::RemPa {
            n_servers,
            servers,
            spot_check,
            ..
        } = &self.pa
        {
            if *n_servers < 2 {
                return bad("rem_pa needs at least 2 servers".into());
            }
            if !servers.is_empty() && servers.len() != *n_servers {
                return bad(format!("{} server addresses for n_servers = {n_servers}", servers.len()));
            }
            if !(0.0..=1.0).contains(spot_check) {
                return bad(format!("spot_check {spot_check} must lie in [0, 1]"));
            }
        }
        if let CodeSpec::Alist { path, .. } = &self.code {
            let full = self.base_dir.join(path);
            if !full.is_file() {
                return bad(format!("code file {} does not exist", full.display()));
            }
        }
        Ok(())
    }

    pub fn load_code(&self) -> Result<CodeRef, HarnessError> {
        match &self.code {
            CodeSpec::Alist { path, id } => {
                let full = self.base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| HarnessError::io(&full, e))?;
                let h = parse_alist(&text).map_err(|e| HarnessError::Invalid(format!("{}: {e}", full.display())))?;
                Ok(CodeRef::new(*id, h))
            }
            CodeSpec::Regular { n, dv, dc, seed, id } => {
                let h = ParityCheck::regular(*n, *dv, *dc, &mut ChaCha20Rng::seed_from_u64(*seed))
                    .map_err(|e| HarnessError::Invalid(format!("code: {e}")))?;
                Ok(CodeRef::new(*id, h))
            }
        }
    }
}
