//! Image feature vectors.
//!
//! Features are produced outside this crate (typically the 4096-dim output of
//! a pretrained CNN's second fully-connected layer) and ingested from a text
//! file. [`histogram_extract`] is a deterministic color-histogram stand-in
//! for small end-to-end runs.

mod histogram;
mod ppm;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use histogram::histogram_extract;
pub use ppm::{read_ppm, RgbImage};

use crate::error::{Error, Result};
use crate::numfmt::format_real;

pub const DEFAULT_FEATURE_DIM: usize = 4096;
const SIG_DIGITS: usize = 9;

/// Image id to feature vector, all of one dimension. Iteration is in
/// ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl FeatureStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("feature dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            vectors: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, id: &str, vector: Vec<f64>) -> Result<()> {
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(Error::InvalidInput(format!("bad image id {id:?}")));
        }
        if vector.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "feature for {id} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("feature for {id} is not finite")));
        }
        if self.vectors.contains_key(id) {
            return Err(Error::DuplicateKey(id.to_owned()));
        }
        self.vectors.insert(id.to_owned(), vector);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

pub fn read_features<R: BufRead>(reader: R) -> Result<FeatureStore> {
    let mut lines = reader.lines().enumerate();
    let (n, dim) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(Error::Parse("missing `N D` header".into()));
        };
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(n)), Some(Ok(d)), None) if d > 0 => break (n, d),
            _ => return Err(Error::Parse("expected `N D` header".into()).at_line(i + 1)),
        }
    };
    let mut store = FeatureStore::new(dim)?;
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let id = it.next().unwrap_or_default();
        let values = it
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {t:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.at_line(lineno))?;
        if values.len() != dim {
            return Err(Error::Parse(format!(
                "expected {dim} values for {id}, found {}",
                values.len()
            ))
            .at_line(lineno));
        }
        store.insert(id, values).map_err(|e| match e {
            Error::InvalidInput(m) => Error::Parse(m).at_line(lineno),
            other => other.at_line(lineno),
        })?;
    }
    if store.len() != n {
        return Err(Error::Parse(format!(
            "header declares {n} vectors, found {}",
            store.len()
        )));
    }
    Ok(store)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureStore> {
    read_features(BufReader::new(File::open(path)?))
}

pub fn write_features<W: Write>(store: &FeatureStore, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", store.len(), store.dim())?;
    for (id, v) in store.iter() {
        w.write_all(id.as_bytes())?;
        for x in v {
            write!(w, " {}", format_real(*x, SIG_DIGITS))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_features(store: &FeatureStore, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_features(store, &mut w)?;
    w.flush()?;
    Ok(())
}
