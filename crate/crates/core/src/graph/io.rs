//! Edge TSV and corpus file readers.
//!
//! Edge rows are `src_kind<TAB>src_id<TAB>dst_kind<TAB>dst_id<TAB>weight`.
//! Blank lines and lines starting with `#` are skipped everywhere.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{TripartiteGraph, VertexKind};
use crate::error::{Error, Result};
use crate::numfmt::format_real;

const WEIGHT_SIG_DIGITS: usize = 6;

/// Yields `(line_number, line)` for every non-comment, non-blank line.
pub(crate) fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::from(e))),
            Ok(l) => {
                let l = l.strip_suffix('\r').map(str::to_owned).unwrap_or(l);
                if l.trim().is_empty() || l.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, l)))
                }
            }
        })
}

pub fn read_edges<R: BufRead>(reader: R) -> Result<TripartiteGraph> {
    let mut g = TripartiteGraph::new();
    for item in data_lines(reader) {
        let (n, line) = item?;
        parse_edge_row(&mut g, &line).map_err(|e| e.at_line(n))?;
    }
    Ok(g)
}

fn parse_edge_row(g: &mut TripartiteGraph, line: &str) -> Result<()> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(Error::Parse(format!(
            "expected 5 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let src_kind: VertexKind = fields[0].parse()?;
    let dst_kind: VertexKind = fields[2].parse()?;
    let weight: f64 = fields[4]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad weight {:?}", fields[4])))?;
    g.add_edge_by_key((src_kind, fields[1]), (dst_kind, fields[3]), weight)?;
    Ok(())
}

pub fn load_edges(path: impl AsRef<Path>) -> Result<TripartiteGraph> {
    read_edges(BufReader::new(File::open(path)?))
}

/// Writes edges in id order, each with the endpoint orientation it was
/// created with.
pub fn write_edges<W: Write>(graph: &TripartiteGraph, mut w: W) -> Result<()> {
    for e in graph.edges() {
        let a = &graph.vertices()[e.a.0];
        let b = &graph.vertices()[e.b.0];
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            a.kind,
            a.external_id,
            b.kind,
            b.external_id,
            format_real(e.weight, WEIGHT_SIG_DIGITS)
        )?;
    }
    Ok(())
}

pub fn save_edges(graph: &TripartiteGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_edges(graph, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Lyrics file: `song_id<TAB>token token token...`.
pub fn read_lyrics<R: BufRead>(reader: R) -> Result<Vec<(String, Vec<String>)>> {
    let mut out = Vec::new();
    for item in data_lines(reader) {
        let (n, line) = item?;
        let (song, rest) = line.split_once('\t').unwrap_or((line.as_str(), ""));
        if song.is_empty() {
            return Err(Error::Parse("empty song id".into()).at_line(n));
        }
        out.push((
            song.to_owned(),
            rest.split_whitespace().map(str::to_owned).collect(),
        ));
    }
    Ok(out)
}

/// Keyword list: one keyword per line.
pub fn read_keywords<R: BufRead>(reader: R) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for item in data_lines(reader) {
        let (_, line) = item?;
        out.insert(line.trim().to_owned());
    }
    Ok(out)
}

/// Image manifest: `image_id<TAB>keyword[<TAB>relevance]`.
pub fn read_manifest<R: BufRead>(reader: R) -> Result<Vec<(String, String, Option<f64>)>> {
    let mut out = Vec::new();
    for item in data_lines(reader) {
        let (n, line) = item?;
        let fields: Vec<&str> = line.split('\t').collect();
        let row = match fields.as_slice() {
            [img, kw] if !img.is_empty() && !kw.is_empty() => {
                ((*img).to_owned(), (*kw).to_owned(), None)
            }
            [img, kw, rel] if !img.is_empty() && !kw.is_empty() => {
                let rel: f64 = rel
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad relevance {rel:?}")).at_line(n))?;
                ((*img).to_owned(), (*kw).to_owned(), Some(rel))
            }
            _ => {
                return Err(
                    Error::Parse("expected image_id<TAB>keyword[<TAB>relevance]".into()).at_line(n),
                )
            }
        };
        out.push(row);
    }
    Ok(out)
}
