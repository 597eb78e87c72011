//! Model persistence.
//!
//! Binary layout (little-endian): magic `XMEMBED1`, `u64` vertex count N,
//! `u64` dim d, then N vertex records (`u64` byte length, UTF-8 external id,
//! kind byte), then the vertex and context matrices as row-major N×d `f64`.
//!
//! The text format carries vertex vectors only: a `N d` header followed by
//! `kind:external_id v1 ... vd` lines. Context vectors load as zero.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EmbeddingModel, VertexKey};
use crate::error::{Error, Result};
use crate::graph::VertexKind;
use crate::numfmt::format_real;

pub const MAGIC: &[u8; 8] = b"XMEMBED1";
const TEXT_SIG_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelFormat {
    #[default]
    Binary,
    Text,
}

impl ModelFormat {
    /// `.txt` and `.tsv` paths use the text format, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt" | "tsv") => ModelFormat::Text,
            _ => ModelFormat::Binary,
        }
    }
}

pub fn write_model<W: Write>(model: &EmbeddingModel, format: ModelFormat, mut w: W) -> Result<()> {
    match format {
        ModelFormat::Binary => {
            w.write_all(MAGIC)?;
            w.write_all(&(model.len() as u64).to_le_bytes())?;
            w.write_all(&(model.dim() as u64).to_le_bytes())?;
            for v in model.vertices() {
                w.write_all(&(v.external_id.len() as u64).to_le_bytes())?;
                w.write_all(v.external_id.as_bytes())?;
                w.write_all(&[v.kind.to_byte()])?;
            }
            for x in model.vertex_matrix().iter().chain(model.context_matrix()) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        ModelFormat::Text => {
            writeln!(w, "{} {}", model.len(), model.dim())?;
            for (i, v) in model.vertices().iter().enumerate() {
                write!(w, "{}:{}", v.kind, v.external_id)?;
                for x in &model.vertex_matrix()[i * model.dim()..(i + 1) * model.dim()] {
                    write!(w, " {}", format_real(*x, TEXT_SIG_DIGITS))?;
                }
                writeln!(w)?;
            }
        }
    }
    Ok(())
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>, format: ModelFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_model(model, format, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads either format, detected from the leading bytes.
pub fn read_model<R: BufRead>(mut r: R) -> Result<EmbeddingModel> {
    let head = r.fill_buf()?;
    if head.starts_with(MAGIC) {
        read_binary(r)
    } else if head.first().is_some_and(u8::is_ascii_digit) {
        read_text(r)
    } else {
        Err(Error::CorruptModel("unrecognized model header".into()))
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    read_model(BufReader::new(File::open(path)?))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::CorruptModel("truncated model file".into())
    } else {
        Error::Io(e)
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn read_binary<R: Read>(mut r: R) -> Result<EmbeddingModel> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::CorruptModel("bad magic".into()));
    }
    let n = usize::try_from(read_u64(&mut r)?).map_err(|_| Error::CorruptModel("vertex count".into()))?;
    let dim = usize::try_from(read_u64(&mut r)?).map_err(|_| Error::CorruptModel("dimension".into()))?;
    if dim == 0 {
        return Err(Error::CorruptModel("zero dimension".into()));
    }
    let cells = n
        .checked_mul(dim)
        .ok_or_else(|| Error::CorruptModel("matrix size overflows".into()))?;

    let mut vertices = Vec::new();
    for _ in 0..n {
        let len = read_u64(&mut r)? as usize;
        let mut buf = Vec::new();
        (&mut r).take(len as u64).read_to_end(&mut buf)?;
        if buf.len() != len {
            return Err(Error::CorruptModel("truncated model file".into()));
        }
        let external_id =
            String::from_utf8(buf).map_err(|_| Error::CorruptModel("vertex id is not UTF-8".into()))?;
        let mut kind = [0u8; 1];
        r.read_exact(&mut kind).map_err(truncated)?;
        let kind = VertexKind::from_byte(kind[0])
            .ok_or_else(|| Error::CorruptModel(format!("bad kind byte {}", kind[0])))?;
        vertices.push(VertexKey { kind, external_id });
    }

    let mut read_matrix = || -> Result<Vec<f64>> {
        let mut out = Vec::new();
        let mut b = [0u8; 8];
        for _ in 0..cells {
            r.read_exact(&mut b).map_err(truncated)?;
            out.push(f64::from_le_bytes(b));
        }
        Ok(out)
    };
    let vertex_vectors = read_matrix()?;
    let context_vectors = read_matrix()?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::CorruptModel("trailing bytes after model".into()));
    }
    EmbeddingModel::from_parts(dim, vertices, vertex_vectors, context_vectors)
        .map_err(|e| Error::CorruptModel(e.to_string()))
}

fn read_text<R: BufRead>(r: R) -> Result<EmbeddingModel> {
    let corrupt = |line: usize, msg: &str| Error::CorruptModel(format!("line {line}: {msg}"));
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let mut it = header.split_whitespace().map(str::parse::<usize>);
    let (n, dim) = match (it.next(), it.next(), it.next()) {
        (Some(Ok(n)), Some(Ok(d)), None) if d > 0 => (n, d),
        _ => return Err(corrupt(1, "expected `N d` header")),
    };
    let mut vertices = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.rsplitn(dim + 1, ' ').collect::<Vec<_>>();
        if parts.len() != dim + 1 {
            return Err(corrupt(lineno, "wrong number of components"));
        }
        parts.reverse();
        let (kind, external_id) = parts[0]
            .split_once(':')
            .ok_or_else(|| corrupt(lineno, "expected kind:external_id"))?;
        let kind: VertexKind = kind.parse().map_err(|_| corrupt(lineno, "bad vertex kind"))?;
        for p in &parts[1..] {
            vectors.push(p.parse::<f64>().map_err(|_| corrupt(lineno, "bad number"))?);
        }
        vertices.push(VertexKey {
            kind,
            external_id: external_id.to_owned(),
        });
    }
    if vertices.len() != n {
        return Err(Error::CorruptModel(format!(
            "header declares {n} vertices, found {}",
            vertices.len()
        )));
    }
    EmbeddingModel::from_parts(dim, vertices, vectors, vec![0.0; n * dim])
        .map_err(|e| Error::CorruptModel(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::init_model;
    use crate::graph::TripartiteGraph;

    fn model(d: usize) -> EmbeddingModel {
        let mut g = TripartiteGraph::new();
        g.add_edge_by_key((VertexKind::Song, "s 1"), (VertexKind::Keyword, "snow"), 1.0)
            .unwrap();
        g.add_edge_by_key((VertexKind::Image, "i:1"), (VertexKind::Keyword, "snow"), 1.0)
            .unwrap();
        let mut m = init_model(&g, d, 5).unwrap();
        m.context_vector_mut(crate::graph::VertexId(1))
            .iter_mut()
            .for_each(|x| *x = 0.1);
        m
    }

    #[test]
    fn binary_round_trip() {
        let m = model(4);
        let mut buf = Vec::new();
        write_model(&m, ModelFormat::Binary, &mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn text_round_trip_vertex_vectors() {
        let m = model(4);
        let mut buf = Vec::new();
        write_model(&m, ModelFormat::Text, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 4\nsong:s 1 "));
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        for (a, b) in back.vertex_matrix().iter().zip(m.vertex_matrix()) {
            assert!((a - b).abs() <= 1e-6);
        }
        assert!(back.context_matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn truncated_binary_is_corrupt() {
        let m = model(4);
        let mut buf = Vec::new();
        write_model(&m, ModelFormat::Binary, &mut buf).unwrap();
        for cut in [4, 12, 30, buf.len() - 1] {
            let err = read_model(&buf[..cut]).unwrap_err();
            assert!(matches!(err, Error::CorruptModel(_)), "cut {cut}: {err}");
        }
    }

    #[test]
    fn bad_magic_is_corrupt() {
        assert!(matches!(
            read_model(&b"XMEMBED2\0\0\0\0"[..]).unwrap_err(),
            Error::CorruptModel(_)
        ));
        assert!(matches!(read_model(&b""[..]).unwrap_err(), Error::CorruptModel(_)));
    }

    #[test]
    fn short_text_is_corrupt() {
        let err = read_model("2 2\nsong:a 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::CorruptModel(_)));
        let err = read_model("1 2\nsong:a 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::CorruptModel(_)));
    }
}
