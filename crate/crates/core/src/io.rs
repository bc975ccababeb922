//! File formats: datasets and probability tables as CSV, matrices as JSON,
//! retained draws as CSV and estimated networks as DOT.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value reads back bit-identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use ndarray::Array2;

use crate::data::{Cell, ObservedDataset};
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::halfvec::{half_len, vech_position};
use crate::identify::RestrictedDistribution;
use crate::ising::{pattern_bits, IsingMatrix};

pub const MISSING_TOKEN: &str = "NA";

fn item_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|j| format!("item_{j}")).collect()
}

fn check_header(header: &csv::StringRecord, dim: usize) -> Result<()> {
    for (j, h) in header.iter().take(dim).enumerate() {
        if h.trim() != format!("item_{}", j + 1) {
            return Err(Error::Parse(format!("header column {} is '{h}', expected 'item_{}'", j + 1, j + 1)));
        }
    }
    Ok(())
}

fn parse_cell(s: &str, row: usize, col: usize) -> Result<Cell> {
    match s.trim() {
        "0" => Ok(Cell::Zero),
        "1" => Ok(Cell::One),
        MISSING_TOKEN => Ok(Cell::Missing),
        other => Err(Error::Parse(format!(
            "row {}, column {}: '{other}' is not 0, 1 or {MISSING_TOKEN}",
            row + 1,
            col + 1
        ))),
    }
}

fn cell_token(c: Cell) -> &'static str {
    match c {
        Cell::Zero => "0",
        Cell::One => "1",
        Cell::Missing => MISSING_TOKEN,
    }
}

pub fn write_dataset<W: Write>(data: &ObservedDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(item_header(data.n_items()))?;
    for row in data.cells().outer_iter() {
        w.write_record(row.iter().map(|&c| cell_token(c)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset. Rows with every cell missing are rejected.
pub fn read_dataset<R: Read>(input: R) -> Result<ObservedDataset> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let dim = r.headers()?.len();
    check_header(r.headers()?, dim)?;
    let mut cells = Vec::new();
    let mut n = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != dim {
            return Err(Error::Parse(format!("row {} has {} fields, expected {dim}", i + 1, rec.len())));
        }
        for (j, f) in rec.iter().enumerate() {
            cells.push(parse_cell(f, i, j)?);
        }
        n += 1;
    }
    let cells = Array2::from_shape_vec((n, dim), cells).map_err(|e| Error::Parse(e.to_string()))?;
    ObservedDataset::new(cells)
}

pub fn write_matrix_json<W: Write>(s: &IsingMatrix, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, s)?;
    Ok(())
}

pub fn read_matrix_json<R: Read>(input: R) -> Result<IsingMatrix> {
    Ok(serde_json::from_reader(input)?)
}

/// Column labels `s_j_l` (1-based, `j >= l`) in `vech` order.
pub fn vech_labels(dim: usize) -> Vec<String> {
    (0..half_len(dim))
        .map(|a| {
            let (i, j) = vech_position(a, dim);
            format!("s_{}_{}", i + 1, j + 1)
        })
        .collect()
}

/// One row per retained draw: `chain, draw, s_1_1, s_2_1, ...`.
pub fn write_draws<W: Write>(fit: &FitResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = fit.estimate.dim();
    let mut header = vec!["chain".to_string(), "draw".to_string()];
    header.extend(vech_labels(dim));
    w.write_record(&header)?;
    for (k, chain) in fit.chains.iter().enumerate() {
        for (t, row) in chain.outer_iter().enumerate() {
            let mut rec = vec![(k + 1).to_string(), (t + 1).to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Undirected DOT graph with edges `|s_jl| > threshold`; blue for positive, orange for negative.
pub fn network_dot(s: &IsingMatrix, threshold: f64) -> String {
    let mut out = String::from("graph ising {\n");
    for j in 1..=s.dim() {
        let _ = writeln!(out, "  {j} [label=\"item_{j}\"];");
    }
    for (j, l) in IsingMatrix::edge_pairs(s.dim()) {
        let w = s.get(j, l);
        if w.abs() > threshold {
            let color = if w > 0.0 { "blue" } else { "orange" };
            let _ = writeln!(out, "  {} -- {} [weight={w}, color={color}];", j + 1, l + 1);
        }
    }
    out.push_str("}\n");
    out
}

/// Probability table: `item_1..item_J,probability`. Screened patterns are
/// fully specified; the `P(Y_1 = 0, Y_2 = 0)` row has `0,0` followed by `NA`s.
pub fn write_restricted<W: Write>(r: &RestrictedDistribution, out: W) -> Result<()> {
    let dim = r.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = item_header(dim);
    header.push("probability".into());
    w.write_record(&header)?;
    for (&bits, &p) in r.probs_a() {
        let mut rec: Vec<String> = (0..dim).map(|k| (bits >> k & 1).to_string()).collect();
        rec.push(p.to_string());
        w.write_record(&rec)?;
    }
    let mut rec = vec!["0".to_string(), "0".to_string()];
    rec.extend((2..dim).map(|_| MISSING_TOKEN.to_string()));
    rec.push(r.prob_00().to_string());
    w.write_record(&rec)?;
    w.flush()?;
    Ok(())
}

pub fn read_restricted<R: Read>(input: R) -> Result<RestrictedDistribution> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let width = r.headers()?.len();
    if width < 4 || r.headers()?.get(width - 1).map(str::trim) != Some("probability") {
        return Err(Error::Parse("expected columns item_1..item_J,probability with J >= 3".into()));
    }
    let dim = width - 1;
    check_header(r.headers()?, dim)?;
    let mut probs = BTreeMap::new();
    let mut prob_00 = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let p: f64 = rec[dim]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad probability '{}'", i + 1, &rec[dim])))?;
        let fields: Vec<&str> = rec.iter().take(dim).map(str::trim).collect();
        if fields[0] == "0" && fields[1] == "0" {
            if fields[2..].iter().any(|f| *f != MISSING_TOKEN) {
                return Err(Error::Parse(format!(
                    "row {}: the (0, 0) row must leave items 3..J as {MISSING_TOKEN}",
                    i + 1
                )));
            }
            if prob_00.replace(p).is_some() {
                return Err(Error::Parse("duplicate (0, 0) row".into()));
            }
            continue;
        }
        let y: Vec<u8> = fields
            .iter()
            .enumerate()
            .map(|(j, f)| match *f {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::Parse(format!("row {}, column {}: '{other}'", i + 1, j + 1))),
            })
            .collect::<Result<_>>()?;
        if probs.insert(pattern_bits(&y)?, p).is_some() {
            return Err(Error::Parse(format!("row {}: duplicate pattern", i + 1)));
        }
    }
    let prob_00 = prob_00.ok_or_else(|| Error::Parse("missing the (0, 0) row".into()))?;
    RestrictedDistribution::new(dim, probs, prob_00)
}

/// CSV with a header and rows of already formatted fields.
pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<String>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
