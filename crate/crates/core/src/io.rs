//! File formats: whitespace edge lists, `key = value` sidecars and a binary
//! column store.
//!
//! An exported graph is written with dense node indices. The sidecar next to
//! it (same path plus `.meta`) records `n`, `edges`, `directed` and the map
//! back to the original ids, so a re-load reproduces the same structure.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::csc::CscMatrix;
use crate::graph::{load_graph_with, Edge, IdMap, LoadedGraph, SparseGraph};
use crate::{Error, Result};

const CSC_MAGIC: &[u8; 8] = b"GDCCSC01";

/// Parse an edge list: `src dst [weight]` per line, `#` starts a comment.
pub fn parse_edge_list(reader: impl BufRead) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(format!("expected `src dst [weight]`, got {} fields", fields.len())));
        }
        let id = |s: &str| s.parse::<u64>().map_err(|e| parse_err(format!("bad node id {s:?}: {e}")));
        let weight = match fields.get(2) {
            Some(w) => Some(w.parse::<f64>().map_err(|e| parse_err(format!("bad weight {w:?}: {e}")))?),
            None => None,
        };
        edges.push((id(fields[0])?, id(fields[1])?, weight));
    }
    Ok(edges)
}

/// Write `src dst weight` lines. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_edge_list(mut w: impl Write, edges: &[(usize, usize, f64)]) -> Result<()> {
    for (s, d, v) in edges {
        writeln!(w, "{s} {d} {v}")?;
    }
    Ok(())
}

/// Flat `key = value` document, sorted by key on output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sidecar(pub BTreeMap<String, String>);

impl Sidecar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.0.insert(key.into(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn extend(&mut self, other: &Sidecar) {
        self.0.extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
    }

    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: "expected `key = value`".into(),
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn write(&self, mut w: impl Write) -> Result<()> {
        for (k, v) in &self.0 {
            writeln!(w, "{k} = {v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("sidecar is UTF-8")
    }
}

/// `path.meta`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn read_sidecar(path: &Path) -> Result<Option<Sidecar>> {
    match File::open(path) {
        Ok(f) => Sidecar::parse(BufReader::new(f)).map(Some),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReadOptions {
    /// Treat edges as directed. A sidecar `directed` entry takes precedence.
    pub directed: bool,
    /// Accept `i i w` lines, e.g. when reading sparsified output back.
    pub allow_self_loops: bool,
}

/// Load a graph from an edge-list file. If a sidecar exists, its `n`,
/// `directed` and `id_map` entries are honored.
pub fn read_graph(path: &Path, opts: ReadOptions) -> Result<LoadedGraph> {
    let edges = parse_edge_list(BufReader::new(open(path)?))?;
    let meta = read_sidecar(&sidecar_path(path))?;
    let mut directed = opts.directed;
    let mut n_hint = None;
    let mut ids = None;
    if let Some(m) = &meta {
        if let Some(d) = m.get("directed") {
            directed = parse_bool(d).ok_or_else(|| Error::InvalidInput(format!("sidecar: bad directed value {d:?}")))?;
        }
        if let Some(n) = m.get("n") {
            n_hint = Some(
                n.parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("sidecar: bad n {n:?}")))?,
            );
        }
        ids = m.get("id_map").map(parse_id_map).transpose()?;
    }
    let mut loaded = load_graph_with(&edges, n_hint, directed, opts.allow_self_loops)?;
    if let Some(Some(original)) = ids {
        if original.len() != loaded.graph.n() {
            return Err(Error::InvalidInput(format!(
                "sidecar id_map has {} ids for {} nodes",
                original.len(),
                loaded.graph.n()
            )));
        }
        loaded.ids = IdMap::from_original(original);
    }
    Ok(loaded)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_id_map(s: &str) -> Result<Option<Vec<u64>>> {
    if s == "identity" {
        return Ok(None);
    }
    if s.is_empty() {
        return Ok(Some(Vec::new()));
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("sidecar: bad id {t:?} in id_map")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn format_id_map(ids: &IdMap) -> String {
    if ids.is_identity() {
        return "identity".into();
    }
    ids.as_slice().iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Structural sidecar entries of a graph.
pub fn graph_sidecar(g: &SparseGraph, ids: &IdMap) -> Sidecar {
    let mut s = Sidecar::new();
    s.set("n", g.n())
        .set("edges", g.edge_count())
        .set("directed", g.is_directed())
        .set("id_map", format_id_map(ids));
    s
}

/// Write `g` as an edge list plus sidecar. `extra` entries are merged into
/// the sidecar; the structural keys always win.
pub fn write_graph(path: &Path, g: &SparseGraph, ids: &IdMap, extra: &Sidecar) -> Result<()> {
    let mut w = create(path)?;
    write_edge_list(&mut w, &g.to_edges())?;
    w.flush()?;
    let mut meta = extra.clone();
    meta.extend(&graph_sidecar(g, ids));
    let mut w = create(&sidecar_path(path))?;
    meta.write(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Binary column store: magic, `n` and `nnz` as u64, then `col_ptr`,
/// `row_idx` (u64) and `values` (f64), all little-endian.
pub fn write_csc_binary(mut w: impl Write, m: &CscMatrix) -> Result<()> {
    w.write_all(CSC_MAGIC)?;
    w.write_all(&(m.n() as u64).to_le_bytes())?;
    w.write_all(&(m.nnz() as u64).to_le_bytes())?;
    for &p in m.col_ptr() {
        w.write_all(&(p as u64).to_le_bytes())?;
    }
    for &r in m.row_idx() {
        w.write_all(&(r as u64).to_le_bytes())?;
    }
    for &v in m.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_csc_binary(mut r: impl Read) -> Result<CscMatrix> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CSC_MAGIC {
        return Err(Error::Parse {
            line: 0,
            msg: "not a column-store file (bad magic)".into(),
        });
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut dyn Read| -> Result<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let n = next(&mut r)? as usize;
    let nnz = next(&mut r)? as usize;
    let col_ptr = (0..=n).map(|_| next(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let rows = (0..nnz).map(|_| next(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let vals = (0..nnz).map(|_| next(&mut r).map(f64::from_bits)).collect::<Result<Vec<_>>>()?;
    let bad = |msg: &str| Error::Parse {
        line: 0,
        msg: msg.into(),
    };
    if col_ptr[0] != 0 || col_ptr[n] != nnz || col_ptr.windows(2).any(|w| w[0] > w[1]) {
        return Err(bad("inconsistent column pointers"));
    }
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let range = col_ptr[j]..col_ptr[j + 1];
        let col: Vec<(usize, f64)> = rows[range.clone()].iter().copied().zip(vals[range].iter().copied()).collect();
        if col.iter().any(|&(i, _)| i >= n) || col.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(bad("row indices out of range or unsorted"));
        }
        columns.push(col);
    }
    Ok(CscMatrix::from_columns(n, columns))
}

pub fn write_csc_file(path: &Path, m: &CscMatrix) -> Result<()> {
    let mut w = create(path)?;
    write_csc_binary(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn read_csc_file(path: &Path) -> Result<CscMatrix> {
    read_csc_binary(BufReader::new(open(path)?))
}

/// Read a whitespace- or newline-separated list of floats, `#` comments
/// allowed. Used for coefficient files.
pub fn read_float_list(path: &Path) -> Result<Vec<f64>> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    parse_float_list(&text)
}

pub fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            out.push(tok.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad number {tok:?}: {e}"),
            })?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_graph;

    #[test]
    fn parses_comments_and_default_weights() {
        let text = "# header\n0 1\n1 2 0.5 # trailing\n\n";
        let e = parse_edge_list(text.as_bytes()).unwrap();
        assert_eq!(e, vec![(0, 1, None), (1, 2, Some(0.5))]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_edge_list("0 1\n0 x\n".as_bytes()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_edge_list("0 1 2 3\n".as_bytes()).is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let mut s = Sidecar::new();
        s.set("b", 2).set("a", "x y");
        let text = s.to_text();
        assert_eq!(text, "a = x y\nb = 2\n");
        assert_eq!(Sidecar::parse(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn graph_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        let edges: Vec<Edge> = vec![(10, 20, Some(0.1)), (20, 30, None), (30, 10, Some(1.0 / 3.0))];
        let g = load_graph(&edges, None, false).unwrap();
        write_graph(&path, &g.graph, &g.ids, &Sidecar::new()).unwrap();
        let back = read_graph(&path, ReadOptions::default()).unwrap();
        assert_eq!(back.graph, g.graph);
        assert_eq!(back.ids, g.ids);
    }

    #[test]
    fn csc_binary_round_trip() {
        let m = CscMatrix::from_triplets(3, vec![(0, 0, 0.25), (2, 0, 1e-300), (1, 2, -3.5)]);
        let mut buf = Vec::new();
        write_csc_binary(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), 8 + 16 + 4 * 8 + 3 * 16);
        assert_eq!(read_csc_binary(buf.as_slice()).unwrap(), m);
        buf[0] = b'X';
        assert!(read_csc_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn float_lists() {
        assert_eq!(parse_float_list("0.5, 0.25\n# c\n0.25").unwrap(), vec![0.5, 0.25, 0.25]);
        assert!(parse_float_list("a").is_err());
    }
}
