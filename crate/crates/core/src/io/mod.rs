//! File formats: field binaries, matrix and ensemble CSV, map and snapshot JSON.
//!
//! A field file is one UTF-8 JSON header line terminated by `\n`, followed by
//! the components as consecutive little-endian `f64` arrays of `nx·ny` values
//! each, in node order `k = j·nx + i`.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conformal::{LaurentMap, Particle, VortexEnsemble};
use crate::elliptic::{MaskedGrid, Node, ScalarField};
use crate::hodge::{energy, lq_norm, FlowState, VectorField};
use crate::{Error, Point, Result};

/// Value of [`FieldHeader::format`].
pub const FIELD_FORMAT: &str = "roughflow.field";
/// Current field format version.
pub const FIELD_VERSION: u32 = 1;

/// Node code in the mask run-length encoding: `0` fluid, `1` outer, `2 + i` obstacle `i`.
pub fn node_code(n: Node) -> u32 {
    match n {
        Node::Fluid => 0,
        Node::Outer => 1,
        Node::Obstacle(i) => 2 + i as u32,
    }
}

fn code_node(c: u32) -> Node {
    match c {
        0 => Node::Fluid,
        1 => Node::Outer,
        c => Node::Obstacle((c - 2) as usize),
    }
}

/// `[code, run length]` pairs in node order.
pub fn encode_mask(nodes: &[Node]) -> Vec<[u32; 2]> {
    let mut out: Vec<[u32; 2]> = Vec::new();
    for &n in nodes {
        let c = node_code(n);
        match out.last_mut() {
            Some(last) if last[0] == c => last[1] += 1,
            _ => out.push([c, 1]),
        }
    }
    out
}

pub fn decode_mask(rle: &[[u32; 2]], len: usize) -> Result<Vec<Node>> {
    let mut out = Vec::with_capacity(len);
    for &[c, n] in rle {
        out.extend(std::iter::repeat(code_node(c)).take(n as usize));
    }
    if out.len() != len {
        return Err(Error::Format(format!("mask covers {} nodes, grid has {len}", out.len())));
    }
    Ok(out)
}

/// JSON header line of a field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format: String,
    pub version: u32,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub obstacles: usize,
    pub bounded: bool,
    /// Component names in storage order.
    pub components: Vec<String>,
    pub mask: Vec<[u32; 2]>,
}

impl FieldHeader {
    pub fn grid(&self) -> Result<MaskedGrid> {
        Ok(MaskedGrid {
            nx: self.nx,
            ny: self.ny,
            x0: self.x0,
            y0: self.y0,
            h: self.h,
            nodes: decode_mask(&self.mask, self.nx * self.ny)?,
            obstacles: self.obstacles,
            bounded: self.bounded,
        })
    }
}

/// Grid plus named nodal arrays read back from a field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub grid: MaskedGrid,
    pub components: Vec<(String, Vec<f64>)>,
}

impl FieldFile {
    pub fn component(&self, name: &str) -> Option<&[f64]> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn scalar(&self, name: &str) -> Result<ScalarField> {
        let v = self.component(name).ok_or_else(|| Error::Format(format!("missing component `{name}`")))?;
        ScalarField::from_vec(&self.grid, v.to_vec())
    }
}

pub fn write_fields<W: Write>(mut w: W, g: &MaskedGrid, components: &[(&str, &[f64])]) -> Result<()> {
    if components.iter().any(|(_, v)| v.len() != g.len()) {
        return Err(Error::GridMismatch);
    }
    let header = FieldHeader {
        format: FIELD_FORMAT.into(),
        version: FIELD_VERSION,
        nx: g.nx,
        ny: g.ny,
        x0: g.x0,
        y0: g.y0,
        h: g.h,
        obstacles: g.obstacles,
        bounded: g.bounded,
        components: components.iter().map(|(n, _)| n.to_string()).collect(),
        mask: encode_mask(&g.nodes),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * g.len());
    for (_, v) in components {
        buf.clear();
        for x in v.iter() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_fields<R: BufRead>(mut r: R) -> Result<FieldFile> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: FieldHeader = serde_json::from_str(line.trim_end())?;
    if header.format != FIELD_FORMAT || header.version != FIELD_VERSION {
        return Err(Error::Format(format!("unsupported field format {} v{}", header.format, header.version)));
    }
    let grid = header.grid()?;
    let mut bytes = vec![0u8; 8 * grid.len()];
    let mut components = Vec::with_capacity(header.components.len());
    for name in &header.components {
        r.read_exact(&mut bytes).map_err(|e| Error::Format(format!("component `{name}` truncated: {e}")))?;
        let v = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
        components.push((name.clone(), v));
    }
    if r.read(&mut [0u8])? != 0 {
        return Err(Error::Format("trailing bytes after last component".into()));
    }
    Ok(FieldFile { grid, components })
}

pub fn write_scalar<W: Write>(w: W, g: &MaskedGrid, name: &str, f: &ScalarField) -> Result<()> {
    if !f.matches(g) {
        return Err(Error::GridMismatch);
    }
    write_fields(w, g, &[(name, &f.data)])
}

/// Norms recorded in a snapshot sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// JSON sidecar of a flow snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub energy: f64,
    pub lq_norms: LqNorms,
}

impl SnapshotMeta {
    pub fn of(g: &MaskedGrid, s: &FlowState) -> Result<Self> {
        Ok(SnapshotMeta {
            t: s.t,
            gamma: s.gamma.clone(),
            alpha: s.alpha.clone(),
            energy: energy(g, &s.u)?,
            lq_norms: LqNorms {
                l1: lq_norm(g, &s.omega, 1.0)?,
                l2: lq_norm(g, &s.omega, 2.0)?,
                linf: lq_norm(g, &s.omega, f64::INFINITY)?,
            },
        })
    }
}

/// Component names of a snapshot field file; `ux`, `uy` are MAC edge values.
pub const SNAPSHOT_COMPONENTS: [&str; 5] = ["omega", "psi0", "psi", "ux", "uy"];

/// Writes `<stem>.bin` and `<stem>.json` into `dir`.
pub fn write_snapshot(dir: &Path, stem: &str, g: &MaskedGrid, s: &FlowState) -> Result<SnapshotMeta> {
    let meta = SnapshotMeta::of(g, s)?;
    let f = std::fs::File::create(dir.join(format!("{stem}.bin")))?;
    let mut w = std::io::BufWriter::new(f);
    let data: [&[f64]; 5] = [&s.omega.data, &s.psi0.data, &s.psi.data, &s.u.ux, &s.u.uy];
    let comps: Vec<(&str, &[f64])> = SNAPSHOT_COMPONENTS.iter().copied().zip(data).collect();
    write_fields(&mut w, g, &comps)?;
    w.flush()?;
    std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

/// Reads a snapshot pair back; the state's grid is returned alongside.
pub fn read_snapshot(dir: &Path, stem: &str) -> Result<(MaskedGrid, FlowState)> {
    let f = std::fs::File::open(dir.join(format!("{stem}.bin")))?;
    let file = read_fields(std::io::BufReader::new(f))?;
    let meta: SnapshotMeta = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let missing = |n: &str| Error::Format(format!("missing component `{n}`"));
    let comp = |n: &str| file.component(n).map(<[f64]>::to_vec).ok_or_else(|| missing(n));
    let (nx, ny) = (file.grid.nx, file.grid.ny);
    let state = FlowState {
        t: meta.t,
        omega: file.scalar("omega")?,
        gamma: meta.gamma,
        alpha: meta.alpha,
        psi0: file.scalar("psi0")?,
        psi: file.scalar("psi")?,
        u: VectorField { nx, ny, ux: comp("ux")?, uy: comp("uy")? },
    };
    Ok((file.grid, state))
}

/// Row-per-line CSV without header, values in shortest round-trip form.
pub fn write_matrix_csv<W: Write>(mut w: W, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        rows.push(rec.iter().map(parse_f64).collect::<Result<_>>()?);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Format(format!("not a number: `{s}`")))
}

/// Header of the ensemble CSV.
pub const ENSEMBLE_HEADER: &str = "x,y,gamma";

pub fn write_ensemble_csv<W: Write>(mut w: W, ens: &VortexEnsemble) -> Result<()> {
    writeln!(w, "{ENSEMBLE_HEADER}")?;
    for p in &ens.particles {
        writeln!(w, "{},{},{}", p.pos.x, p.pos.y, p.strength)?;
    }
    Ok(())
}

/// Reads particles; `alpha` and `blob` are not part of the CSV.
pub fn read_ensemble_csv<R: Read>(r: R, alpha: f64, blob: f64) -> Result<VortexEnsemble> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(|e| Error::Format(e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != ENSEMBLE_HEADER {
        return Err(Error::Format(format!("expected header `{ENSEMBLE_HEADER}`")));
    }
    let mut particles = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != 3 {
            return Err(Error::Format("ensemble rows need 3 values".into()));
        }
        particles.push(Particle { pos: Point::new(parse_f64(&rec[0])?, parse_f64(&rec[1])?), strength: parse_f64(&rec[2])? });
    }
    Ok(VortexEnsemble::new(particles, alpha, blob))
}

pub fn map_to_json(m: &LaurentMap) -> Result<String> {
    Ok(serde_json::to_string_pretty(m)?)
}

pub fn map_from_json(s: &str) -> Result<LaurentMap> {
    Ok(serde_json::from_str(s)?)
}
