use std::path::Path;

use rhostar::analyze::{gen_demo_data, mental_health_table, DemoKind};
use rhostar::estimate::{ContingencyTable, PairedSample};
use rhostar::grade::KSampleData;

use crate::error::{CliError, CliResult};

const BUNDLED_MENTAL_HEALTH: &str = "bundled:mental-health";
const DEFAULT_DEMO_N: usize = 200;

/// Nonempty CSV records with their 1-based line numbers.
fn read_records(path: &str) -> CliResult<Vec<(u64, Vec<String>)>> {
    let text =
        std::fs::read_to_string(Path::new(path)).map_err(|e| CliError::input(format!("cannot read {path}: {e}")))?;
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::input(format!("{path}: line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if out.is_empty() {
        return Err(CliError::input(format!("{path}: no data")));
    }
    Ok(out)
}

fn number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Drops the first record when any of its cells is non-numeric.
fn strip_header(records: &mut Vec<(u64, Vec<String>)>) -> Option<Vec<String>> {
    if records[0].1.iter().any(|c| number(c).is_none()) {
        Some(records.remove(0).1)
    } else {
        None
    }
}

/// Numeric columns of a CSV with exactly `width` fields per row.
fn numeric_columns(path: &str, width: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut records = read_records(path)?;
    strip_header(&mut records);
    let mut cols = vec![Vec::with_capacity(records.len()); width];
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(CliError::input(format!("{path}: line {line}: expected {width} fields, found {}", rec.len())));
        }
        for (col, cell) in cols.iter_mut().zip(rec) {
            let v = number(cell)
                .ok_or_else(|| CliError::input(format!("{path}: line {line}: non-numeric value '{cell}'")))?;
            col.push(v);
        }
    }
    Ok(cols)
}

/// Count matrix with optional header row and header column.
pub fn parse_table(path: &str) -> CliResult<ContingencyTable> {
    if path == BUNDLED_MENTAL_HEALTH {
        return Ok(mental_health_table());
    }
    let mut records = read_records(path)?;
    let header = strip_header(&mut records);
    if records.is_empty() {
        return Err(CliError::input(format!("{path}: no count rows")));
    }
    let label_col = records.iter().all(|(_, r)| !r.is_empty() && number(&r[0]).is_none());
    let skip = usize::from(label_col);
    let n_cols = records[0].1.len() - skip;
    let mut counts = Vec::new();
    let mut row_labels = Vec::new();
    for (line, rec) in &records {
        if rec.len() - skip != n_cols {
            return Err(CliError::input(format!(
                "{path}: line {line}: expected {} fields, found {}",
                n_cols + skip,
                rec.len()
            )));
        }
        if label_col {
            row_labels.push(rec[0].clone());
        }
        for cell in &rec[skip..] {
            let v = cell
                .parse::<i64>()
                .map_err(|_| CliError::input(format!("{path}: line {line}: count '{cell}' is not an integer")))?;
            if v < 0 {
                return Err(CliError::input(format!("{path}: line {line}: negative count {v}")));
            }
            counts.push(v as u64);
        }
    }
    let table = ContingencyTable::new(records.len(), n_cols, counts)?;
    let col_labels = header.map(|h| h[h.len() - n_cols.min(h.len())..].to_vec()).filter(|h| h.len() == n_cols);
    if !label_col && col_labels.is_none() {
        return Ok(table);
    }
    let rows = if label_col { row_labels } else { (1..=records.len()).map(|i| i.to_string()).collect() };
    let cols = col_labels.unwrap_or_else(|| (1..=n_cols).map(|j| j.to_string()).collect());
    Ok(table.with_labels(rows, cols)?)
}

/// Paired sample from a CSV path, `bundled:mental-health` or `demo:<kind>[:n]`.
pub fn load_sample(source: &str, as_table: bool, seed: Option<u64>) -> CliResult<PairedSample> {
    if source == BUNDLED_MENTAL_HEALTH || as_table {
        return Ok(parse_table(source)?.to_sample()?);
    }
    if let Some(rest) = source.strip_prefix("demo:") {
        let mut parts = rest.split(':');
        let kind: DemoKind = parts.next().unwrap_or_default().parse()?;
        let n = match parts.next() {
            Some(n) => n.parse().map_err(|_| CliError::input(format!("bad demo size '{n}'")))?,
            None => DEFAULT_DEMO_N,
        };
        if parts.next().is_some() {
            return Err(CliError::input(format!("bad demo input '{source}'")));
        }
        let seed = seed.ok_or_else(|| CliError::input("demo input requires --seed"))?;
        return Ok(gen_demo_data(kind, n, seed)?);
    }
    if let Some(other) = source.strip_prefix("bundled:") {
        return Err(CliError::input(format!("unknown bundled dataset '{other}'")));
    }
    let cols = numeric_columns(source, 2)?;
    let mut it = cols.into_iter();
    let (x, y) = (it.next().unwrap(), it.next().unwrap());
    Ok(PairedSample::new(x, y)?)
}

/// Groups from a two-column CSV of (score, observation), one group per distinct score.
pub fn load_ksample(path: &str) -> CliResult<KSampleData> {
    let cols = numeric_columns(path, 2)?;
    let mut scores: Vec<f64> = cols[0].clone();
    scores.sort_by(f64::total_cmp);
    scores.dedup();
    let mut groups = vec![Vec::new(); scores.len()];
    for (s, v) in cols[0].iter().zip(&cols[1]) {
        let g = scores.binary_search_by(|z| z.total_cmp(s)).unwrap();
        groups[g].push(*v);
    }
    Ok(KSampleData::new(scores, groups)?)
}
