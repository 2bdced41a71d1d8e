use std::fmt::Write as _;
use std::path::Path;

use super::{Point3, TriangleMesh};
use crate::error::{Error, Result};

/// Reads a plain-text mesh: `v x y z` vertex lines, `f i j k` faces with
/// 1-based indices, `#` comments.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_mesh(&text)
}

pub fn parse_mesh(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::MeshParse {
            line: lineno + 1,
            msg,
        };
        let mut tokens = line.split_whitespace();
        let tag = tokens.next().unwrap();
        let fields: Vec<&str> = tokens.collect();
        match tag {
            "v" => {
                if fields.len() != 3 {
                    return Err(err(format!("expected 3 coordinates, got {}", fields.len())));
                }
                let mut xyz = [0.0; 3];
                for (slot, f) in xyz.iter_mut().zip(&fields) {
                    *slot = f
                        .parse::<f64>()
                        .map_err(|e| err(format!("bad coordinate {f:?}: {e}")))?;
                    if !slot.is_finite() {
                        return Err(err(format!("non-finite coordinate {f:?}")));
                    }
                }
                vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
            }
            "f" => {
                if fields.len() != 3 {
                    return Err(err(format!(
                        "only triangular faces are supported, got {} indices",
                        fields.len()
                    )));
                }
                let mut idx = [0usize; 3];
                for (slot, f) in idx.iter_mut().zip(&fields) {
                    // tolerate OBJ-style `i/t/n` references
                    let head = f.split('/').next().unwrap_or(f);
                    let i: usize = head
                        .parse()
                        .map_err(|e| err(format!("bad vertex index {f:?}: {e}")))?;
                    if i == 0 {
                        return Err(err("vertex indices are 1-based".into()));
                    }
                    *slot = i - 1;
                }
                triangles.push(idx);
            }
            other => return Err(err(format!("unknown record type {other:?}"))),
        }
    }
    TriangleMesh::new(vertices, triangles)
}

impl TriangleMesh {
    /// Serializes into the text format read by [`load_mesh`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} vertices, {} triangles",
            self.num_vertices(),
            self.num_triangles()
        );
        for v in self.vertices() {
            let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
        }
        for t in self.triangles() {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}
