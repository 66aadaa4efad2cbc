//! Artifact writing: fixed float format, metadata block, LF endings.

use std::io;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::SolverConfig;

/// Written at the top of every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub command: String,
    pub config_sha256: String,
    pub crate_version: String,
    pub core_version: String,
    pub seed: Option<u64>,
    pub rtol: f64,
    pub atol: f64,
    pub endpoint_margin: f64,
}

impl Metadata {
    pub fn new(command: &str, raw_config: &[u8], solver: &SolverConfig, seed: Option<u64>) -> Self {
        Metadata {
            command: command.to_string(),
            config_sha256: sha256_hex(raw_config),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: cosmowave::VERSION.to_string(),
            seed,
            rtol: solver.rtol,
            atol: solver.atol,
            endpoint_margin: solver.endpoint_margin,
        }
    }

    fn csv_header(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# command: {}\n", self.command));
        s.push_str(&format!("# config_sha256: {}\n", self.config_sha256));
        s.push_str(&format!("# crate_version: {}\n", self.crate_version));
        s.push_str(&format!("# core_version: {}\n", self.core_version));
        match self.seed {
            Some(seed) => s.push_str(&format!("# seed: {seed}\n")),
            None => s.push_str("# seed: none\n"),
        }
        s.push_str(&format!("# rtol: {:.16e}\n", self.rtol));
        s.push_str(&format!("# atol: {:.16e}\n", self.atol));
        s.push_str(&format!("# endpoint_margin: {:.16e}\n", self.endpoint_margin));
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Floats as `{:.16e}` (17 significant digits); everything else compact.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(io::Error::other)
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    metadata: &'a Metadata,
    result: &'a T,
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, meta: &Metadata, value: &T) -> io::Result<()> {
    let text = to_json(&WithMeta { metadata: meta, result: value })?;
    std::fs::write(dir.join(name), text)
}

/// `body` must start with its column header row.
pub fn write_csv(dir: &Path, name: &str, meta: &Metadata, body: &str) -> io::Result<()> {
    let mut text = meta.csv_header();
    text.push_str(body);
    std::fs::write(dir.join(name), text)
}

/// Comma-joined `{:.16e}` cells.
pub fn row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    cells.join(",")
}
