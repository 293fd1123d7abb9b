//! Wavefront OBJ text for [`FaceMesh`].
//!
//! The exporter writes `v x y z` or `v x y z r g b` lines with six decimals,
//! then `f a b c` lines with 1-based indices. The importer reads that dialect
//! plus comments, blank lines and `a/t/n` style face references (only the
//! vertex index is used).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::FaceMesh;
use crate::error::{Error, Result};

pub fn export_obj(mesh: &FaceMesh) -> String {
    let mut out = String::new();
    let colors = mesh.colors();
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = write!(out, "v {:.6} {:.6} {:.6}", v[0], v[1], v[2]);
        if let Some(c) = colors {
            let _ = write!(out, " {:.6} {:.6} {:.6}", c[i][0], c[i][1], c[i][2]);
        }
        out.push('\n');
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

fn parse_floats(fields: core::str::SplitWhitespace<'_>, line: usize) -> Result<Vec<f64>> {
    fields
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or(Error::ObjParse {
                    line,
                    message: "malformed number",
                })
        })
        .collect()
}

pub fn import_obj(text: &str) -> Result<FaceMesh> {
    let mut vertices = Vec::new();
    let mut colors = Vec::new();
    let mut faces: Vec<([u32; 3], usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let mut fields = body.split_whitespace();
        match fields.next() {
            None => {}
            Some("v") => {
                let vals = parse_floats(fields, line)?;
                match vals.len() {
                    3 | 6 => {
                        vertices.push([vals[0], vals[1], vals[2]]);
                        if vals.len() == 6 {
                            colors.push([vals[3], vals[4], vals[5]]);
                        }
                    }
                    _ => {
                        return Err(Error::ObjParse {
                            line,
                            message: "vertex needs 3 or 6 numbers",
                        })
                    }
                }
            }
            Some("f") => {
                let idx: Vec<&str> = fields.collect();
                if idx.len() != 3 {
                    return Err(Error::ObjParse {
                        line,
                        message: "only triangular faces are supported",
                    });
                }
                let mut t = [0u32; 3];
                for (slot, f) in t.iter_mut().zip(&idx) {
                    let first = f.split('/').next().unwrap_or("");
                    let k: u32 = first.parse().map_err(|_| Error::ObjParse {
                        line,
                        message: "malformed face index",
                    })?;
                    if k == 0 {
                        return Err(Error::ObjParse {
                            line,
                            message: "face indices are 1-based",
                        });
                    }
                    *slot = k - 1;
                }
                faces.push((t, line));
            }
            Some("vt" | "vn" | "o" | "g" | "s" | "usemtl" | "mtllib") => {}
            Some(_) => {
                return Err(Error::ObjParse {
                    line,
                    message: "unknown statement",
                })
            }
        }
    }
    for &(t, line) in &faces {
        if t.iter().any(|&k| k as usize >= vertices.len()) {
            return Err(Error::ObjParse {
                line,
                message: "face index out of range",
            });
        }
        if t[0] == t[1] && t[1] == t[2] {
            return Err(Error::ObjParse {
                line,
                message: "degenerate face",
            });
        }
    }
    let colors = match colors.len() {
        0 => None,
        n if n == vertices.len() => Some(colors),
        _ => {
            return Err(Error::ObjParse {
                line: 0,
                message: "either every vertex or none carries a color",
            })
        }
    };
    FaceMesh::new(
        vertices,
        faces.into_iter().map(|(t, _)| t).collect(),
        colors,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tri() -> FaceMesh {
        FaceMesh::new(
            vec![[0.0, 0.0, 0.0], [1.5, 0.0, -2.0], [0.0, 1.0, 1.0 / 3.0]],
            vec![[0, 1, 2]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn minimal_mesh_text() {
        let text = export_obj(&tri());
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(
            text.lines()
                .filter(|l| l.starts_with("f "))
                .collect::<Vec<_>>(),
            ["f 1 2 3"]
        );
        assert!(text.contains("v 0.000000 1.000000 0.333333"));
    }

    #[test]
    fn round_trip() {
        let back = import_obj(&export_obj(&tri())).unwrap();
        assert_eq!(back.triangles(), tri().triangles());
        for (a, b) in back.vertices().iter().zip(tri().vertices()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let m = import_obj(
            "# head\n\nv 0 0 0 1 0 0\nv 1 0 0 0 1 0 # trailing\nv 0 1 0 0 0 1\nf 1/1 2/2/2 3//3\n",
        )
        .unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2]]);
        assert_eq!(m.colors().unwrap()[1], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn out_of_range_face_names_line() {
        let e = import_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n").unwrap_err();
        assert_eq!(
            e,
            Error::ObjParse {
                line: 4,
                message: "face index out of range"
            }
        );
        assert!(matches!(
            import_obj("v 0 zero 0\n"),
            Err(Error::ObjParse { line: 1, .. })
        ));
    }
}
