use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// Writes every float as a 17-significant-digit scientific literal.
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Sends a report to `out` or stdout.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> io::Result<()> {
    let json = to_json(value)?;
    match out {
        Some(p) => std::fs::write(p, json),
        None => io::stdout().lock().write_all(json.as_bytes()),
    }
}

#[derive(Serialize)]
pub struct ComponentRow {
    pub k: usize,
    pub l: usize,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub significant: bool,
}

/// Shared report of the sample-based commands.
#[derive(Serialize)]
pub struct Report {
    pub command: &'static str,
    pub input: String,
    pub n: usize,
    pub kappa_v: f64,
    pub kappa_u: f64,
    pub rho_star: f64,
    pub rho_star_u: f64,
    pub grade: Option<String>,
    pub statistic: Option<String>,
    pub p_value: Option<f64>,
    pub method: Option<String>,
    pub replicates: Option<u64>,
    pub exhaustive: Option<bool>,
    pub seed: Option<u64>,
    pub sum_lambda: f64,
    pub sum_mu: f64,
    pub components: Vec<ComponentRow>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsSummary>,
}

#[derive(Serialize)]
pub struct TableSummary {
    pub rows: usize,
    pub cols: usize,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<u64>,
}

#[derive(Serialize)]
pub struct WeightsSummary {
    pub kind: String,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub normalizer: f64,
    /// Mean of observation weights, or the sum of cell weights.
    pub total: f64,
    pub cells: bool,
    pub values: Vec<f64>,
    pub plot: Option<String>,
    pub csv: Option<String>,
}

#[derive(Serialize)]
pub struct EigenReport {
    pub command: &'static str,
    pub dist: String,
    pub t: usize,
    pub sum_lambda: f64,
    pub sum_lambda_sq: f64,
    /// Normalized eigenvalues λ_k / Σλ.
    pub lambda: Vec<f64>,
    /// Unnormalized eigenvalues λ_k.
    pub eigenvalues: Vec<f64>,
    pub support: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
}

#[derive(Serialize)]
pub struct GroupRow {
    pub score: f64,
    pub size: usize,
}

#[derive(Serialize)]
pub struct KSampleReport {
    pub command: &'static str,
    pub input: String,
    pub n: usize,
    pub grade: Option<String>,
    pub groups: Vec<GroupRow>,
    pub kappa: f64,
    pub p_value: Option<f64>,
    pub method: Option<String>,
    pub replicates: Option<u64>,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
pub struct FrechetReport {
    pub command: &'static str,
    pub k: usize,
    pub l: usize,
    pub sign: String,
    pub segments: Vec<rhostar::analyze::Segment>,
    pub plot: Option<String>,
}
