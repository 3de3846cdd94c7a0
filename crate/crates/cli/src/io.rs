//! On-disk formats: field snapshots, CSV series, 16-bit PGM heatmaps and the
//! run manifest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use invasionlab_core::{Grid, Params, PerturbationEvent, SchemeConfig, State};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub grid: Grid,
    pub t: f64,
    pub components: Vec<String>,
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| CliError::io(path, e.into()))?;
    f.write_all(b"\n").and_then(|_| f.flush()).map_err(|e| CliError::io(path, e))
}

/// One JSON header line, then `u` and `w` as little-endian `f64`.
pub fn write_snapshot(path: &Path, state: &State) -> CliResult<()> {
    let header = SnapshotHeader { grid: state.grid, t: state.t, components: vec!["u".into(), "w".into()] };
    let mut f = create(path)?;
    let line = serde_json::to_string(&header).expect("header serializes");
    let io = |f: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(f, "{line}")?;
        for v in state.u.iter().chain(&state.w) {
            f.write_all(&v.to_le_bytes())?;
        }
        f.flush()
    };
    io(&mut f).map_err(|e| CliError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> CliResult<State> {
    let mut f = open(path)?;
    let mut line = String::new();
    f.read_line(&mut line).map_err(|e| CliError::io(path, e))?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| CliError::MissingData(format!("{}: bad snapshot header: {e}", path.display())))?;
    if header.components != ["u", "w"] {
        return Err(CliError::MissingData(format!("{}: unexpected components {:?}", path.display(), header.components)));
    }
    let n = header.grid.n;
    let mut bytes = Vec::with_capacity(16 * n);
    f.read_to_end(&mut bytes).map_err(|e| CliError::io(path, e))?;
    if bytes.len() != 16 * n {
        return Err(CliError::MissingData(format!(
            "{}: expected {} payload bytes, found {}",
            path.display(),
            16 * n,
            bytes.len()
        )));
    }
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(State { grid: header.grid, t: header.t, u: vals[..n].to_vec(), w: vals[n..].to_vec() })
}

/// Header row and one row per record; floats use shortest round-trip form.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
    let f = create(path)?;
    let mut w = csv::Writer::from_writer(f);
    let err = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:?}"))).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let bad = |e: &dyn std::fmt::Display| CliError::MissingData(format!("{}: {e}", path.display()));
    let header = r.headers().map_err(|e| bad(&e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        rows.push(rec.iter().map(|s| s.parse::<f64>().map_err(|e| bad(&e))).collect::<CliResult<Vec<f64>>>()?);
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapMeta {
    pub rows: usize,
    pub cols: usize,
    /// Values mapped to 0 and 65535.
    pub min: f64,
    pub max: f64,
    pub t: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
}

/// 16-bit P5 raster with one row per snapshot; `u` scaled by the global
/// min/max. A constant field maps to zero.
pub fn write_heatmap(path: &Path, snapshots: &[State]) -> CliResult<HeatmapMeta> {
    let cols = snapshots.first().map_or(0, |s| s.grid.n);
    if snapshots.iter().any(|s| s.grid.n != cols) {
        return Err(CliError::MissingData("snapshots on different grids".into()));
    }
    let (min, max) = snapshots
        .iter()
        .flat_map(|s| s.u.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = max - min;
    let mut f = create(path)?;
    let mut buf = format!("P5\n{} {}\n65535\n", cols, snapshots.len()).into_bytes();
    for s in snapshots {
        for &v in &s.u {
            let q = if span > 0.0 { ((v - min) / span * 65535.0).round() as u16 } else { 0 };
            buf.extend_from_slice(&q.to_be_bytes());
        }
    }
    f.write_all(&buf).and_then(|_| f.flush()).map_err(|e| CliError::io(path, e))?;
    let g = snapshots.first().map(|s| s.grid);
    let meta = HeatmapMeta {
        rows: snapshots.len(),
        cols,
        min,
        max,
        t: snapshots.iter().map(|s| s.t).collect(),
        x_min: g.map_or(0.0, |g| g.x_min),
        x_max: g.map_or(0.0, |g| g.x_max),
    };
    write_json(&path.with_extension("json"), &meta)?;
    Ok(meta)
}

/// `(cols, rows, samples)` of a 16-bit P5 file.
pub fn read_pgm(path: &Path) -> CliResult<(usize, usize, Vec<u16>)> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| CliError::io(path, e))?;
    let bad = || CliError::MissingData(format!("{}: not a 16-bit P5 file", path.display()));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
    }
    pos += 1;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    if fields[0] != "P5" || num(&fields[3])? != 65535 {
        return Err(bad());
    }
    let (cols, rows) = (num(&fields[1])?, num(&fields[2])?);
    let data = bytes.get(pos..).ok_or_else(bad)?;
    if data.len() != 2 * cols * rows {
        return Err(bad());
    }
    Ok((cols, rows, data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the run directory.
    pub path: String,
    pub bytes: u64,
    pub crc32: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: serde_json::Value,
    pub params: Params,
    pub grid: Grid,
    pub scheme: SchemeConfig,
    pub events: Vec<PerturbationEvent>,
    pub seed: Option<u64>,
    pub snapshots: Vec<String>,
    pub files: Vec<FileEntry>,
    pub wall_clock_s: f64,
}

pub const MANIFEST: &str = "manifest.json";

pub fn file_entry(dir: &Path, rel: &str) -> CliResult<FileEntry> {
    let path = dir.join(rel);
    let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(FileEntry { path: rel.to_string(), bytes: bytes.len() as u64, crc32: crc32fast::hash(&bytes) })
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        write_json(&dir.join(MANIFEST), self)
    }

    /// Reads the manifest and checks every listed file's length and CRC32.
    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::MissingData(format!("{}: {e}", path.display())))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::MissingData(format!("{}: {e}", path.display())))?;
        for f in &m.files {
            let p = dir.join(&f.path);
            let bytes = std::fs::read(&p).map_err(|e| CliError::MissingData(format!("{}: {e}", p.display())))?;
            if bytes.len() as u64 != f.bytes || crc32fast::hash(&bytes) != f.crc32 {
                return Err(CliError::MissingData(format!("{}: length or checksum mismatch", p.display())));
            }
        }
        Ok(m)
    }

    pub fn snapshot_paths(&self, dir: &Path) -> Vec<PathBuf> {
        self.snapshots.iter().map(|s| dir.join(s)).collect()
    }

    pub fn load_snapshots(&self, dir: &Path) -> CliResult<Vec<State>> {
        if self.snapshots.is_empty() {
            return Err(CliError::MissingData("run has no snapshots".into()));
        }
        self.snapshot_paths(dir)
            .iter()
            .map(|p| {
                read_snapshot(p).map_err(|e| match e {
                    CliError::Io { path, source } => CliError::MissingData(format!("{}: {source}", path.display())),
                    other => other,
                })
            })
            .collect()
    }
}
