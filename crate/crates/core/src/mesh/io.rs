//! ASCII OFF and OBJ reading and writing.
//!
//! Flat-chart meshes use plain `OFF` with three coordinates. Curved charts
//! store all four embedding coordinates under a `4OFF` header. Both carry a
//! `# pinchlab ambient-delta=<δ>` comment so the model can be recovered.
//! Coordinates are printed in shortest round-trip form, so an OFF write
//! followed by a read reproduces every vertex bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::SurfaceMesh;
use crate::error::{Error, Result};
use crate::spaceform::{AmbientModel, Chart, Point};

const DELTA_TAG: &str = "pinchlab ambient-delta=";

/// Parsed file contents before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMesh {
    pub vertices: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
    /// Curvature recorded in the file, if any.
    pub delta: Option<f64>,
}

impl RawMesh {
    /// Validates into a closed mesh. `delta` overrides the recorded curvature.
    pub fn into_mesh(self, delta: Option<f64>) -> Result<SurfaceMesh> {
        let d = delta.or(self.delta).unwrap_or(0.0);
        SurfaceMesh::new(AmbientModel::new(d, 3)?, self.vertices, self.faces)
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn delta_comment(line: &str) -> Option<Result<f64, String>> {
    let rest = line.trim_start_matches('#').trim();
    let v = rest.strip_prefix(DELTA_TAG)?;
    Some(v.trim().parse::<f64>().map_err(|e| format!("bad ambient-delta: {e}")))
}

fn is_curved(mesh: &SurfaceMesh) -> bool {
    mesh.ambient().chart() != Chart::EuclideanCoordinates
}

pub fn write_off<W: Write>(mesh: &SurfaceMesh, mut w: W) -> Result<()> {
    let curved = is_curved(mesh);
    writeln!(w, "{}", if curved { "4OFF" } else { "OFF" })?;
    writeln!(w, "# {DELTA_TAG}{}", mesh.ambient().curvature())?;
    writeln!(w, "{} {} 0", mesh.n_vertices(), mesh.n_faces())?;
    for p in mesh.vertices() {
        if curved {
            writeln!(w, "{} {} {} {}", p[0], p[1], p[2], p[3])?;
        } else {
            writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
        }
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

pub fn read_off<R: BufRead>(r: R) -> Result<RawMesh> {
    let mut delta = None;
    let mut tokens: Vec<(usize, String)> = Vec::new();
    let mut header: Option<(usize, String)> = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let t = line.trim();
        if t.starts_with('#') {
            if let Some(d) = delta_comment(t) {
                delta = Some(d.map_err(|m| parse_err(n, m))?);
            }
            continue;
        }
        let t = t.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some((n, t.to_string()));
            continue;
        }
        tokens.extend(t.split_whitespace().map(|s| (n, s.to_string())));
    }
    let (hline, h) = header.ok_or_else(|| parse_err(1, "empty file"))?;
    let mut head_tokens = h.split_whitespace();
    let dims = match head_tokens.next() {
        Some("OFF") => 3,
        Some("4OFF") => 4,
        other => return Err(parse_err(hline, format!("expected OFF or 4OFF header, found {other:?}"))),
    };
    // counts may share the header line
    let mut rest: Vec<(usize, String)> = head_tokens.map(|s| (hline, s.to_string())).collect();
    rest.extend(tokens);
    let mut it = rest.into_iter();
    let mut next_num = |what: &str| -> Result<(usize, String)> {
        it.next().ok_or_else(|| parse_err(0, format!("unexpected end of file reading {what}")))
    };
    let parse_usize = |(l, s): (usize, String)| -> Result<usize> {
        s.parse::<usize>().map_err(|e| parse_err(l, format!("expected integer, got {s:?}: {e}")))
    };
    let parse_f64 = |(l, s): (usize, String)| -> Result<f64> {
        s.parse::<f64>().map_err(|e| parse_err(l, format!("expected number, got {s:?}: {e}")))
    };
    let nv = parse_usize(next_num("vertex count")?)?;
    let nf = parse_usize(next_num("face count")?)?;
    let _ne = parse_usize(next_num("edge count")?)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut p = Point::zeros();
        for c in 0..dims {
            p[c] = parse_f64(next_num("vertex coordinate")?)?;
        }
        vertices.push(p);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = next_num("face size")?;
        let k = parse_usize((l, s))?;
        if k != 3 {
            return Err(parse_err(l, format!("only triangles are supported, found a {k}-gon")));
        }
        let mut f = [0usize; 3];
        for slot in f.iter_mut() {
            let (l, s) = next_num("face index")?;
            *slot = parse_usize((l, s))?;
            if *slot >= nv {
                return Err(parse_err(l, format!("face index {slot} out of range")));
            }
        }
        faces.push(f);
    }
    if let Some((l, s)) = it.next() {
        return Err(parse_err(l, format!("trailing data {s:?}")));
    }
    Ok(RawMesh { vertices, faces, delta })
}

pub fn write_obj<W: Write>(mesh: &SurfaceMesh, mut w: W) -> Result<()> {
    let curved = is_curved(mesh);
    writeln!(w, "# {DELTA_TAG}{}", mesh.ambient().curvature())?;
    for p in mesh.vertices() {
        if curved {
            writeln!(w, "v {} {} {} {}", p[0], p[1], p[2], p[3])?;
        } else {
            writeln!(w, "v {} {} {}", p[0], p[1], p[2])?;
        }
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

pub fn read_obj<R: BufRead>(r: R) -> Result<RawMesh> {
    let mut delta = None;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut face_lines = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let t = line.trim();
        if t.starts_with('#') {
            if let Some(d) = delta_comment(t) {
                delta = Some(d.map_err(|m| parse_err(n, m))?);
            }
            continue;
        }
        let mut parts = t.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .map(|s| s.parse::<f64>().map_err(|e| parse_err(n, format!("{s:?}: {e}"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 && c.len() != 4 {
                    return Err(parse_err(n, "vertex needs 3 or 4 coordinates"));
                }
                let mut p = Point::zeros();
                p.as_mut_slice()[..c.len()].copy_from_slice(&c);
                vertices.push(p);
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or("");
                        head.parse::<usize>()
                            .ok()
                            .filter(|&k| k >= 1)
                            .map(|k| k - 1)
                            .ok_or_else(|| parse_err(n, format!("bad face index {s:?}")))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(n, format!("only triangles are supported, found {} indices", idx.len())));
                }
                faces.push([idx[0], idx[1], idx[2]]);
                face_lines.push(n);
            }
            _ => {}
        }
    }
    for (f, &n) in faces.iter().zip(&face_lines) {
        if f.iter().any(|&k| k >= vertices.len()) {
            return Err(parse_err(n, "face index out of range"));
        }
    }
    Ok(RawMesh { vertices, faces, delta })
}

/// Reads an `.off` or `.obj` file, choosing the parser by extension.
pub fn read_mesh_file(path: &Path) -> Result<RawMesh> {
    let r = BufReader::new(File::open(path)?);
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("obj") => read_obj(r),
        _ => read_off(r),
    }
}

/// OFF serialization as a string.
pub fn off_string(mesh: &SurfaceMesh) -> String {
    let mut buf = Vec::new();
    write_off(mesh, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("OFF output is ASCII")
}
