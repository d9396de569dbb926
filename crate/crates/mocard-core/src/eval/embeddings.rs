//! Embedding file ingestion and export.
//!
//! Binary container (little-endian):
//!
//! ```text
//! magic "EMB1" | u32 count | u32 dim | count x { u32 label, dim x f32 }
//! ```
//!
//! CSV alternative: a `label,f1,...,fd` header followed by one row per
//! embedding. Files ending in `.csv` are read/written as CSV, everything
//! else as the binary container.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::EvalError;
use crate::pcaitq::FloatEmbedding;

const MAGIC: &[u8; 4] = b"EMB1";

pub fn write_emb1<W: Write>(mut out: W, embeddings: &[FloatEmbedding]) -> Result<(), EvalError> {
    let dim = embeddings.first().map_or(0, |e| e.values.len());
    if embeddings.iter().any(|e| e.values.len() != dim) {
        return Err(EvalError::EmbeddingFormat("inconsistent dimensions"));
    }
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(embeddings.len() as u32)?;
    out.write_u32::<LittleEndian>(dim as u32)?;
    for e in embeddings {
        out.write_u32::<LittleEndian>(e.label)?;
        for &v in &e.values {
            out.write_f32::<LittleEndian>(v as f32)?;
        }
    }
    Ok(())
}

pub fn read_emb1<R: Read>(mut input: R) -> Result<Vec<FloatEmbedding>, EvalError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(EvalError::EmbeddingFormat("bad magic"));
    }
    let count = input.read_u32::<LittleEndian>()? as usize;
    let dim = input.read_u32::<LittleEndian>()? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let label = input.read_u32::<LittleEndian>()?;
        let mut values = Vec::with_capacity(dim);
        for _ in 0..dim {
            values.push(f64::from(input.read_f32::<LittleEndian>()?));
        }
        out.push(FloatEmbedding { label, values });
    }
    Ok(out)
}

pub fn write_csv<W: Write>(mut out: W, embeddings: &[FloatEmbedding]) -> Result<(), EvalError> {
    let dim = embeddings.first().map_or(0, |e| e.values.len());
    if embeddings.iter().any(|e| e.values.len() != dim) {
        return Err(EvalError::EmbeddingFormat("inconsistent dimensions"));
    }
    let header: Vec<String> = std::iter::once("label".to_string())
        .chain((1..=dim).map(|i| format!("f{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for e in embeddings {
        let mut row = vec![e.label.to_string()];
        row.extend(e.values.iter().map(|v| v.to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<FloatEmbedding>, EvalError> {
    let mut out: Vec<FloatEmbedding> = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split(',');
        let first = fields.next().expect("split yields at least one field");
        if idx == 0 && first.trim() == "label" {
            continue;
        }
        let label: u32 = first.trim().parse().map_err(|_| EvalError::CsvFormat {
            line: line_no,
            reason: "label is not an unsigned integer",
        })?;
        let values = fields
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| EvalError::CsvFormat {
                line: line_no,
                reason: "non-numeric feature value",
            })?;
        if values.is_empty() {
            return Err(EvalError::CsvFormat {
                line: line_no,
                reason: "row has no feature values",
            });
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(EvalError::CsvFormat {
                    line: line_no,
                    reason: "row width differs from previous rows",
                })
            }
            _ => {}
        }
        out.push(FloatEmbedding { label, values });
    }
    Ok(out)
}

pub fn read_embeddings_file<P: AsRef<Path>>(path: P) -> Result<Vec<FloatEmbedding>, EvalError> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_csv(BufReader::new(File::open(path)?))
    } else {
        read_emb1(BufReader::new(File::open(path)?))
    }
}

pub fn write_embeddings_file<P: AsRef<Path>>(
    path: P,
    embeddings: &[FloatEmbedding],
) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(&mut out, embeddings)?;
    } else {
        write_emb1(&mut out, embeddings)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<FloatEmbedding> {
        vec![
            FloatEmbedding {
                label: 0,
                values: vec![1.5, -2.25, 0.0],
            },
            FloatEmbedding {
                label: 7,
                values: vec![0.125, 3.0, -1.0],
            },
        ]
    }

    #[test]
    fn emb1_round_trip() {
        let mut bytes = Vec::new();
        write_emb1(&mut bytes, &sample()).unwrap();
        assert_eq!(&bytes[..4], b"EMB1");
        let back = read_emb1(bytes.as_slice()).unwrap();
        // f32 storage is exact for these values.
        assert_eq!(back, sample());
    }

    #[test]
    fn emb1_rejects_bad_magic() {
        assert!(matches!(
            read_emb1(&b"NOPE\x00\x00\x00\x00\x00\x00\x00\x00"[..]),
            Err(EvalError::EmbeddingFormat("bad magic"))
        ));
    }

    #[test]
    fn csv_round_trip_with_header() {
        let mut text = Vec::new();
        write_csv(&mut text, &sample()).unwrap();
        let s = String::from_utf8(text.clone()).unwrap();
        assert!(s.starts_with("label,f1,f2,f3\n"));
        let back = read_csv(text.as_slice()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn csv_reads_headerless_input() {
        let text = "0,1.5,-2.25,0\n7,0.125,3,-1\n";
        let back = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "label,f1\n0,1.0\nx,2.0\n";
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(EvalError::CsvFormat { line: 3, .. })
        ));
        let text = "0,1.0\n1,2.0,3.0\n";
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(EvalError::CsvFormat { line: 2, .. })
        ));
    }

    #[test]
    fn file_dispatch_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("data.emb1");
        let csv = dir.path().join("data.csv");
        write_embeddings_file(&bin, &sample()).unwrap();
        write_embeddings_file(&csv, &sample()).unwrap();
        assert_eq!(read_embeddings_file(&bin).unwrap(), sample());
        assert_eq!(read_embeddings_file(&csv).unwrap(), sample());
        // The binary file is not valid CSV and vice versa.
        assert!(std::fs::read(&bin).unwrap().starts_with(b"EMB1"));
        assert!(std::fs::read(&csv).unwrap().starts_with(b"label,"));
    }
}
