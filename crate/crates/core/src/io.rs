//! Text serialization: CSV tables, JSON documents and symbol strings.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::io::{self, Write};

use crate::codec::{OverflowEstimate, PrefixCode};
use crate::cost_model::{CostModel, CostModelDoc};
use crate::error::{Error, Result};
use crate::sources::{Source, SourceDoc};
use crate::spectrum::SpectrumCurve;

pub fn cost_model_from_json(text: &str, context_depth: usize) -> Result<CostModel> {
    let doc: CostModelDoc = serde_json::from_str(text)?;
    CostModel::from_doc(&doc, context_depth)
}

pub fn source_from_json(text: &str) -> Result<Source> {
    let doc: SourceDoc = serde_json::from_str(text)?;
    doc.to_source()
}

/// Digits for alphabets of at most ten symbols, dot-separated indices
/// otherwise.
pub fn format_symbols<T: Copy + Into<usize>>(symbols: &[T], alphabet: usize) -> String {
    let parts = symbols.iter().map(|&s| s.into().to_string());
    if alphabet <= 10 {
        parts.collect()
    } else {
        parts.collect::<Vec<_>>().join(".")
    }
}

/// Inverse of [`format_symbols`]. Dots are accepted for any alphabet.
pub fn parse_symbols(text: &str, alphabet: usize) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parsed: Vec<usize> = if text.contains('.') || alphabet > 10 {
        text.split('.')
            .map(|p| p.parse::<usize>().map_err(|_| Error::InvalidQuery(format!("bad symbol {p:?} in {text:?}"))))
            .collect::<Result<_>>()?
    } else {
        text.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::InvalidQuery(format!("bad symbol {c:?} in {text:?}")))
            })
            .collect::<Result<_>>()?
    };
    if let Some(&symbol) = parsed.iter().find(|&&s| s >= alphabet) {
        return Err(Error::SymbolOutOfRange { symbol, alphabet });
    }
    Ok(parsed)
}

/// `threshold,probability,stderr,method`. The stderr column holds the Monte
/// Carlo standard error, half the dp bracket width, or 0 for exact values.
pub fn write_curve_csv<W: Write>(mut out: W, curve: &SpectrumCurve) -> io::Result<()> {
    writeln!(out, "threshold,probability,stderr,method")?;
    for p in &curve.points {
        let err = match (p.stderr, p.bounds) {
            (Some(se), _) => se,
            (None, Some((lo, hi))) => 0.5 * (hi - lo),
            (None, None) => 0.0,
        };
        writeln!(out, "{},{},{},{}", p.threshold, p.probability, err, curve.method)?;
    }
    Ok(())
}

/// `sequence,codeword,cost` in lexicographic order of the sequence.
pub fn write_code_csv<W: Write>(mut out: W, code: &PrefixCode, source_alphabet: usize) -> io::Result<()> {
    writeln!(out, "sequence,codeword,cost")?;
    let mut rows: Vec<_> = code.entries().iter().collect();
    rows.sort_by(|a, b| a.sequence.cmp(&b.sequence));
    let k = code.model().k();
    for e in rows {
        writeln!(
            out,
            "{},{},{}",
            format_symbols(&e.sequence, source_alphabet),
            format_symbols(&e.codeword, k),
            e.cost
        )?;
    }
    Ok(())
}

/// `eta,probability,stderr,method`.
pub fn write_overflow_csv<W: Write>(mut out: W, rows: &[OverflowEstimate]) -> io::Result<()> {
    writeln!(out, "eta,probability,stderr,method")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.eta, r.probability, r.stderr.unwrap_or(0.0), r.method)?;
    }
    Ok(())
}
