//! CSV stage artifacts: relevance dumps, simplex lists and persistence pairs.
//!
//! Every writer is deterministic, and every reader rebuilds exactly the value
//! its writer was given, so pipeline stages can be replayed from files.

use std::collections::HashMap;

use thiserror::Error;

use crate::complexes::{ComplexError, FilteredComplex, Simplex, SimplexKey};
use crate::persistence::{PersistenceDiagram, PersistencePair, RepresentativeCycle};
use crate::relevance::{RelevanceError, RelevanceKind, RelevanceMatrix};
use crate::FiltIndex;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("record {record}: {message}")]
    Field { record: usize, message: String },
    #[error("unexpected header {found:?} (expected {expected:?})")]
    Header {
        found: String,
        expected: &'static str,
    },
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("record {record}: simplex {label} is not in the complex")]
    UnknownSimplex { record: usize, label: String },
}

const RELEVANCE_HEADER: &str = "i,j,value";
const SIMPLEX_HEADER: &str = "filt_index,dim,v0,v1,v2";
const PAIRS_HEADER: &str = "dim,birth,death,essential,creator,destroyer,representative";

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV output is UTF-8")
}

fn reader<'a>(
    text: &'a str,
    expected: &'static str,
) -> Result<csv::Reader<&'a [u8]>, ArtifactError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let found = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(ArtifactError::Header { found, expected });
    }
    Ok(r)
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    record: usize,
) -> Result<T, ArtifactError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| ArtifactError::Field {
        record,
        message: format!("cannot parse column {idx} value {raw:?}"),
    })
}

/// `i,j,value` rows for every positive entry, sorted by `(i, j)`.
pub fn write_relevance_csv(r: &RelevanceMatrix) -> String {
    let mut w = writer();
    w.write_record(RELEVANCE_HEADER.split(',')).unwrap();
    for (i, j, v) in r.nonzero() {
        w.write_record([i.to_string(), j.to_string(), v.to_string()])
            .unwrap();
    }
    finish(w)
}

/// Reads a relevance dump. The matrix size is one past the largest index,
/// which the always-present unit diagonal pins down.
pub fn read_relevance_csv(
    text: &str,
    kind: RelevanceKind,
) -> Result<RelevanceMatrix, ArtifactError> {
    let mut entries = Vec::new();
    for (k, rec) in reader(text, RELEVANCE_HEADER)?.records().enumerate() {
        let rec = rec?;
        let i: usize = field(&rec, 0, k + 1)?;
        let j: usize = field(&rec, 1, k + 1)?;
        let v: f64 = field(&rec, 2, k + 1)?;
        entries.push((i, j, v));
    }
    let n = entries
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .unwrap_or(0);
    let mut values = vec![0.0; n * n];
    for (i, j, v) in entries {
        values[i * n + j] = v;
    }
    Ok(RelevanceMatrix::from_dense(n, values, kind)?)
}

/// `filt_index,dim,v0,v1,v2` in stored order, unused vertex fields empty.
pub fn write_simplices_csv(fc: &FilteredComplex) -> String {
    let mut w = writer();
    w.write_record(SIMPLEX_HEADER.split(',')).unwrap();
    for s in fc.simplices() {
        let mut row = vec![s.filt_index.to_string(), s.dim().to_string()];
        row.extend((0..3).map(|k| {
            s.vertices()
                .get(k)
                .map_or(String::new(), |v| v.0.to_string())
        }));
        w.write_record(&row).unwrap();
    }
    finish(w)
}

/// Reads a simplex list; every vertex appears as its own row, so the
/// vertex count is the number of dimension-0 rows.
pub fn read_simplices_csv(text: &str) -> Result<FilteredComplex, ArtifactError> {
    let mut simplices = Vec::new();
    for (k, rec) in reader(text, SIMPLEX_HEADER)?.records().enumerate() {
        let rec = rec?;
        let record = k + 1;
        let filt: FiltIndex = field(&rec, 0, record)?;
        let dim: usize = field(&rec, 1, record)?;
        let vertices = (2..3 + dim)
            .map(|c| field::<usize>(&rec, c, record))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(extra) = (3 + dim..5).find(|&c| !rec.get(c).unwrap_or("").is_empty()) {
            return Err(ArtifactError::Field {
                record,
                message: format!("column {extra} must be empty for dim {dim}"),
            });
        }
        simplices.push(Simplex::new(&vertices, filt)?);
    }
    let n_vertices = simplices.iter().filter(|s| s.dim() == 0).count();
    Ok(FilteredComplex::from_simplices(n_vertices, simplices)?)
}

fn pair_row(p: &PersistencePair) -> [String; 7] {
    let rep = p
        .representative
        .as_ref()
        .map(|r| {
            r.simplices
                .iter()
                .map(Simplex::label)
                .collect::<Vec<_>>()
                .join(";")
        })
        .unwrap_or_default();
    [
        p.dim.to_string(),
        p.birth.to_string(),
        p.death.map_or(String::new(), |d| d.to_string()),
        u8::from(p.is_essential()).to_string(),
        p.creator.label(),
        p.destroyer.as_ref().map_or(String::new(), Simplex::label),
        rep,
    ]
}

/// Diagram pairs sorted by `(dim, birth, death)`. With `include_zero`, the
/// zero-persistence pairs are merged in as well.
pub fn write_pairs_csv(pd: &PersistenceDiagram, include_zero: bool) -> String {
    let mut w = writer();
    w.write_record(PAIRS_HEADER.split(',')).unwrap();
    let rows: Vec<&PersistencePair> = if include_zero {
        pd.raw_pairs()
    } else {
        pd.pairs.iter().collect()
    };
    for p in rows {
        w.write_record(pair_row(p)).unwrap();
    }
    finish(w)
}

/// Reads pairs back, resolving simplices against the complex they came from.
pub fn read_pairs_csv(
    text: &str,
    fc: &FilteredComplex,
) -> Result<PersistenceDiagram, ArtifactError> {
    let lookup: HashMap<SimplexKey, &Simplex> =
        fc.simplices().iter().map(|s| (s.key(), s)).collect();
    let resolve = |label: &str, record: usize| -> Result<Simplex, ArtifactError> {
        let vertices = label
            .split('-')
            .map(|v| v.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| ArtifactError::Field {
                record,
                message: format!("bad simplex label {label:?}"),
            })?;
        lookup
            .get(&SimplexKey::from_vertices(&vertices))
            .map(|s| (*s).clone())
            .ok_or_else(|| ArtifactError::UnknownSimplex {
                record,
                label: label.to_string(),
            })
    };

    let mut pairs = Vec::new();
    let mut zero_persistence = Vec::new();
    for (k, rec) in reader(text, PAIRS_HEADER)?.records().enumerate() {
        let rec = rec?;
        let record = k + 1;
        let dim: usize = field(&rec, 0, record)?;
        let birth: FiltIndex = field(&rec, 1, record)?;
        let essential: u8 = field(&rec, 3, record)?;
        let death = match (essential, &rec[2]) {
            (1, "") => None,
            (0, _) => Some(field::<FiltIndex>(&rec, 2, record)?),
            _ => {
                return Err(ArtifactError::Field {
                    record,
                    message: "essential flag and death disagree".into(),
                })
            }
        };
        let creator = resolve(&rec[4], record)?;
        let destroyer = match &rec[5] {
            "" => None,
            label => Some(resolve(label, record)?),
        };
        let representative = match &rec[6] {
            "" => None,
            reps => Some(RepresentativeCycle {
                simplices: reps
                    .split(';')
                    .map(|l| resolve(l, record))
                    .collect::<Result<_, _>>()?,
            }),
        };
        let pair = PersistencePair {
            dim,
            birth,
            death,
            creator,
            destroyer,
            representative,
        };
        if pair.death == Some(pair.birth) {
            zero_persistence.push(pair);
        } else {
            pairs.push(pair);
        }
    }
    Ok(PersistenceDiagram {
        pairs,
        zero_persistence,
        dim2_creators: Vec::new(),
        n_simplices: fc.len(),
        schedule: Default::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::build_filtered_complex;
    use crate::persistence::compute;

    fn extended() -> RelevanceMatrix {
        let n = 4;
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        for (i, j, r) in [
            (1, 0, 0.3),
            (2, 0, 0.04),
            (3, 2, 0.7),
            (3, 1, 1e-3),
            (2, 1, 0.2),
            (3, 0, 0.123456789),
        ] {
            v[i * n + j] = r;
        }
        RelevanceMatrix::from_dense(n, v, RelevanceKind::Extended).unwrap()
    }

    #[test]
    fn relevance_round_trip() {
        let r = extended();
        let text = write_relevance_csv(&r);
        assert!(text.starts_with("i,j,value\n0,0,1\n1,0,0.3\n"));
        assert_eq!(
            read_relevance_csv(&text, RelevanceKind::Extended).unwrap(),
            r
        );
    }

    #[test]
    fn simplices_round_trip() {
        let fc = build_filtered_complex(&extended(), 2).unwrap();
        let text = write_simplices_csv(&fc);
        assert!(text.starts_with("filt_index,dim,v0,v1,v2\n1,0,0,,\n"));
        assert_eq!(read_simplices_csv(&text).unwrap(), fc);
    }

    #[test]
    fn pairs_round_trip() {
        let fc = build_filtered_complex(&extended(), 2).unwrap();
        let pd = compute(&fc).unwrap();
        let text = write_pairs_csv(&pd, false);
        let back = read_pairs_csv(&text, &fc).unwrap();
        assert_eq!(back.pairs, pd.pairs);
        assert_eq!(write_pairs_csv(&back, false), text);
        let raw = write_pairs_csv(&pd, true);
        let back = read_pairs_csv(&raw, &fc).unwrap();
        assert_eq!(back.zero_persistence, pd.zero_persistence);
    }

    #[test]
    fn pairs_rows_format() {
        let simplices = [
            (vec![0], 1),
            (vec![1], 1),
            (vec![2], 1),
            (vec![0, 1], 2),
            (vec![1, 2], 2),
            (vec![0, 2], 3),
            (vec![0, 1, 2], 4),
        ]
        .into_iter()
        .map(|(v, f)| Simplex::new(&v, f).unwrap())
        .collect();
        let fc = FilteredComplex::from_simplices(3, simplices).unwrap();
        let pd = compute(&fc).unwrap();
        let text = write_pairs_csv(&pd, false);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], PAIRS_HEADER);
        assert_eq!(lines[1], "0,1,2,0,1,0-1,");
        assert_eq!(lines[2], "0,1,2,0,2,1-2,");
        assert_eq!(lines[3], "0,1,,1,0,,");
        assert_eq!(lines[4], "1,3,4,0,0-2,0-1-2,0-1;1-2;0-2");
    }

    #[test]
    fn readers_reject_bad_input() {
        assert!(matches!(
            read_relevance_csv("a,b,c\n", RelevanceKind::Direct),
            Err(ArtifactError::Header { .. })
        ));
        assert!(matches!(
            read_relevance_csv("i,j,value\n0,0,x\n", RelevanceKind::Direct),
            Err(ArtifactError::Field { record: 1, .. })
        ));
        assert!(matches!(
            read_simplices_csv("filt_index,dim,v0,v1,v2\n1,0,0,3,\n"),
            Err(ArtifactError::Field { .. })
        ));
        assert!(matches!(
            read_simplices_csv("filt_index,dim,v0,v1,v2\n1,1,0,1,\n"),
            Err(ArtifactError::Complex(_))
        ));
        let fc = build_filtered_complex(&extended(), 2).unwrap();
        let text = format!("{PAIRS_HEADER}\n0,1,,1,9,,\n");
        assert!(matches!(
            read_pairs_csv(&text, &fc),
            Err(ArtifactError::UnknownSimplex { .. })
        ));
    }
}
