//! Machine-readable verification reports. One report per claim; exit status
//! zero iff no mismatches. Reports are byte-identical across runs with the
//! same parameters and seed; wall-clock timing is therefore opt-in and
//! excluded by default.

use serde::Serialize;

#[derive(Serialize, Clone, Debug)]
pub struct Mismatch {
    pub input: serde_json::Value,
    pub expected: String,
    pub got: String,
}

#[derive(Serialize, Clone, Debug)]
pub struct VerificationReport {
    /// Stable claim identifier, named by content.
    pub claim: String,
    /// Parameter set: q, m, n, i, t, psi twist, seed, ... as applicable.
    pub params: serde_json::Map<String, serde_json::Value>,
    pub cases_checked: u64,
    pub mismatches: Vec<Mismatch>,
    /// Convention and calibration metadata (exhaustive vs sampled, counting
    /// method, eta-weight convention, ...).
    pub metadata: serde_json::Map<String, serde_json::Value>,
    /// Milliseconds; only populated when timing is requested, so default
    /// reports stay byte-identical run to run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new(claim: &str) -> VerificationReport {
        VerificationReport {
            claim: claim.to_string(),
            params: serde_json::Map::new(),
            cases_checked: 0,
            mismatches: Vec::new(),
            metadata: serde_json::Map::new(),
            elapsed_ms: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn meta(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn case(&mut self) {
        self.cases_checked += 1;
    }

    pub fn cases(&mut self, n: u64) {
        self.cases_checked += n;
    }

    pub fn mismatch(&mut self, input: serde_json::Value, expected: String, got: String) {
        // Keep reports bounded; the count is always exact.
        if self.mismatches.len() < 128 {
            self.mismatches.push(Mismatch { input, expected, got });
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Deterministic ordering for byte-identical output.
    pub fn finalize(&mut self) {
        self.mismatches.sort_by(|a, b| {
            a.input
                .to_string()
                .cmp(&b.input.to_string())
                .then_with(|| a.expected.cmp(&b.expected))
        });
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialization")
    }
}

/// Summary line used by the acceptance suite and the CLI.
pub fn summary_line(r: &VerificationReport) -> String {
    format!(
        "{}: {} (cases={}, mismatches={})",
        r.claim,
        if r.passed() { "PASS" } else { "FAIL" },
        r.cases_checked,
        r.mismatches.len()
    )
}
