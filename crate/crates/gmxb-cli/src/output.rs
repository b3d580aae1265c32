//! Deterministic CSV assembly with a `#`-prefixed provenance header.

/// FNV-1a over the canonical configuration text; stable across runs, cheap,
/// and good enough to spot config drift between regression artifacts.
pub fn config_hash(canonical: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub struct CsvBuilder {
    buffer: String,
}

impl CsvBuilder {
    /// Starts a CSV with the provenance header: engine version and config
    /// hash. Runtimes are deliberately excluded so reruns are byte-identical.
    pub fn new(command: &str, canonical_config: &str) -> Self {
        let mut buffer = String::new();
        buffer.push_str(&format!(
            "# gmxb {} {command} config-hash={:016x}\n",
            env!("CARGO_PKG_VERSION"),
            config_hash(canonical_config)
        ));
        Self { buffer }
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.buffer.push_str(&names.join(","));
        self.buffer.push('\n');
        self
    }

    pub fn row(&mut self, fields: &[String]) -> &mut Self {
        self.buffer.push_str(&fields.join(","));
        self.buffer.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.buffer
    }
}

/// Fixed-precision float formatting so identical runs yield identical bytes.
pub fn num(value: f64, precision: usize) -> String {
    format!("{value:.precision$}")
}

/// Fees are quoted in basis points with one decimal, matching the benchmark
/// tables' convention.
pub fn fee_bp(rate: f64) -> String {
    format!("{:.1}", rate * 1e4)
}

/// Higher-precision basis points for solver output rows.
pub fn fee_bp_precise(rate: f64) -> String {
    format!("{:.3}", rate * 1e4)
}
