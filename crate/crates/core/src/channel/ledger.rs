use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
    Decoder,
    PaServer,
    Public,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageEntry {
    pub label: String,
    pub bits: usize,
    pub from: Party,
    pub to: Party,
    /// Whether the disclosure tells an eavesdropper something about the
    /// retained key beyond earlier public messages. `ê` (a function of `s_e`)
    /// and compared sample positions (discarded afterwards) do not.
    pub counts_against_key: bool,
}

/// Append-only record of every bit sent in the clear during a session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageLedger {
    entries: Vec<LeakageEntry>,
    total: usize,
}

impl LeakageLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, label: impl Into<String>, bits: usize, from: Party, to: Party) {
        self.push(label.into(), bits, from, to, true);
    }

    /// Records a disclosure that carries no information about the retained
    /// key: a function of earlier public messages or of the error pattern
    /// alone, or bits that are discarded.
    pub fn record_neutral(&mut self, label: impl Into<String>, bits: usize, from: Party, to: Party) {
        self.push(label.into(), bits, from, to, false);
    }

    fn push(&mut self, label: String, bits: usize, from: Party, to: Party, counts: bool) {
        self.total += bits;
        self.entries.push(LeakageEntry {
            label,
            bits,
            from,
            to,
            counts_against_key: counts,
        });
    }

    pub fn entries(&self) -> &[LeakageEntry] {
        &self.entries
    }

    /// All publicly disclosed bits.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Disclosed bits that must be subtracted in privacy amplification.
    pub fn total_normalized(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.counts_against_key)
            .map(|e| e.bits)
            .sum()
    }

    pub fn bits_labelled(&self, label: &str) -> usize {
        self.entries
            .iter()
            .filter(|e| e.label == label)
            .map(|e| e.bits)
            .sum()
    }

    pub fn extend(&mut self, other: &LeakageLedger) {
        for e in &other.entries {
            self.push(e.label.clone(), e.bits, e.from, e.to, e.counts_against_key);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ledger serializes")
    }
}
