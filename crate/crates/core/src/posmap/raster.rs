//! Orthographic z-buffer rasterizer.
//!
//! A vertex `(x, y, z)` lands on pixel coordinates `(x, y)`, integer values
//! being pixel centers, and pixel `(px, py)` is covered when its center lies
//! inside a triangle. Edges shared by two triangles are owned by exactly one
//! of them through the top-left rule. Larger `z` is nearer; ties keep the
//! triangle drawn first.

use alloc::vec;
use alloc::vec::Vec;

use super::FaceMesh;
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    /// One channel, two-sided Lambertian shading `|n_z|` of the face normal
    /// under a light along the view axis.
    Shaded,
    /// Three channels, vertex colors interpolated barycentrically.
    Textured,
}

#[derive(Clone, Copy)]
struct Fragment {
    z: f64,
    tri: u32,
    bary: [f64; 3],
}

#[inline]
fn edge(a: [f64; 3], b: [f64; 3], px: f64, py: f64) -> f64 {
    (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])
}

/// Whether edge `a -> b` is a top or left edge once the triangle's edge
/// functions are oriented to be positive inside.
#[inline]
fn top_left(a: [f64; 3], b: [f64; 3], orient: f64) -> bool {
    let gx = -(b[1] - a[1]) * orient;
    let gy = (b[0] - a[0]) * orient;
    gx > 0.0 || (gx == 0.0 && gy > 0.0)
}

fn rasterize(mesh: &FaceMesh, width: usize, height: usize) -> Result<Vec<Option<Fragment>>> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroOutputSize);
    }
    let mut frags: Vec<Option<Fragment>> = vec![None; width * height];
    let verts = mesh.vertices();
    for (ti, t) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = t.map(|i| verts[i as usize]);
        let area = edge(a, b, c[0], c[1]);
        if area == 0.0 {
            continue;
        }
        let orient = if area > 0.0 { 1.0 } else { -1.0 };
        let owns = [
            top_left(b, c, orient),
            top_left(c, a, orient),
            top_left(a, b, orient),
        ];
        let min_x = a[0].min(b[0]).min(c[0]);
        let max_x = a[0].max(b[0]).max(c[0]);
        let min_y = a[1].min(b[1]).min(c[1]);
        let max_y = a[1].max(b[1]).max(c[1]);
        if max_x < 0.0 || max_y < 0.0 || min_x > (width - 1) as f64 || min_y > (height - 1) as f64 {
            continue;
        }
        let x0 = libm::ceil(min_x).max(0.0) as usize;
        let x1 = (libm::floor(max_x) as usize).min(width - 1);
        let y0 = libm::ceil(min_y).max(0.0) as usize;
        let y1 = (libm::floor(max_y) as usize).min(height - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let (fx, fy) = (px as f64, py as f64);
                let e = [
                    edge(b, c, fx, fy) * orient,
                    edge(c, a, fx, fy) * orient,
                    edge(a, b, fx, fy) * orient,
                ];
                if !(0..3).all(|k| e[k] > 0.0 || (e[k] == 0.0 && owns[k])) {
                    continue;
                }
                let s = area * orient;
                let bary = [e[0] / s, e[1] / s, e[2] / s];
                let z = bary[0] * a[2] + bary[1] * b[2] + bary[2] * c[2];
                let slot = &mut frags[py * width + px];
                if slot.is_none_or(|f| z > f.z) {
                    *slot = Some(Fragment {
                        z,
                        tri: ti as u32,
                        bary,
                    });
                }
            }
        }
    }
    Ok(frags)
}

/// Renders `mesh` on a black `width × height` canvas.
pub fn render_mesh(
    mesh: &FaceMesh,
    width: usize,
    height: usize,
    mode: RenderMode,
) -> Result<Image> {
    let frags = rasterize(mesh, width, height)?;
    let verts = mesh.vertices();
    let tris = mesh.triangles();
    match mode {
        RenderMode::Shaded => {
            let shade: Vec<f64> = tris
                .iter()
                .map(|t| {
                    let [a, b, c] = t.map(|i| verts[i as usize]);
                    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                    let n = [
                        u[1] * v[2] - u[2] * v[1],
                        u[2] * v[0] - u[0] * v[2],
                        u[0] * v[1] - u[1] * v[0],
                    ];
                    let len = libm::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
                    if len > 0.0 {
                        (n[2] / len).abs()
                    } else {
                        0.0
                    }
                })
                .collect();
            let data = frags
                .iter()
                .map(|f| f.map_or(0.0, |f| shade[f.tri as usize]))
                .collect();
            Image::from_planar(width, height, 1, data)
        }
        RenderMode::Textured => {
            let colors = mesh
                .colors()
                .ok_or(Error::InvalidMesh("textured rendering needs vertex colors"))?;
            let n = width * height;
            let mut data = vec![0.0; 3 * n];
            for (i, f) in frags.iter().enumerate() {
                if let Some(f) = f {
                    let t = tris[f.tri as usize];
                    for ch in 0..3 {
                        let v: f64 = (0..3).map(|k| f.bary[k] * colors[t[k] as usize][ch]).sum();
                        data[ch * n + i] = v.clamp(0.0, 1.0);
                    }
                }
            }
            Image::from_planar(width, height, 3, data)
        }
    }
}

/// Nearest-surface depth, min-max normalized over covered pixels so the
/// nearest point is 1 and the farthest 0. A single depth value maps to 1.
/// Uncovered pixels are 0.
pub fn render_depth(mesh: &FaceMesh, width: usize, height: usize) -> Result<Image> {
    let frags = rasterize(mesh, width, height)?;
    let (lo, hi) = frags
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
            (lo.min(f.z), hi.max(f.z))
        });
    let range = hi - lo;
    let data = frags
        .iter()
        .map(|f| match f {
            None => 0.0,
            Some(_) if range.is_nan() || range <= 0.0 => 1.0,
            Some(f) => ((f.z - lo) / range).clamp(0.0, 1.0),
        })
        .collect();
    Image::from_planar(width, height, 1, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(z: f64, x0: f64, x1: f64) -> FaceMesh {
        FaceMesh::new(
            vec![[x0, 0.0, z], [x1, 0.0, z], [x0, 4.0, z], [x1, 4.0, z]],
            vec![[0, 2, 1], [1, 2, 3]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn shared_edge_pixels_drawn_once() {
        // a 4x4 quad split along its diagonal covers each center exactly once:
        // rendering the halves separately must partition the full coverage
        let q = quad(1.0, 0.0, 4.0);
        let full = render_mesh(&q, 6, 6, RenderMode::Shaded).unwrap();
        let t0 = FaceMesh::new(q.vertices().to_vec(), vec![q.triangles()[0]], None).unwrap();
        let t1 = FaceMesh::new(q.vertices().to_vec(), vec![q.triangles()[1]], None).unwrap();
        let a = render_mesh(&t0, 6, 6, RenderMode::Shaded).unwrap();
        let b = render_mesh(&t1, 6, 6, RenderMode::Shaded).unwrap();
        for i in 0..36 {
            let (fa, fb) = (a.data()[i] > 0.0, b.data()[i] > 0.0);
            assert!(!(fa && fb), "pixel {i} drawn twice");
            assert_eq!(fa || fb, full.data()[i] > 0.0);
        }
        // top-left rule: columns 0..4 and rows 0..4 of the 0..4 square
        let covered = full.data().iter().filter(|&&v| v > 0.0).count();
        assert_eq!(covered, 16);
        assert_eq!(full.get(0, 0, 0), 1.0);
        assert_eq!(full.get(4, 0, 0), 0.0);
        assert_eq!(full.get(0, 4, 0), 0.0);
    }

    #[test]
    fn nearer_surface_wins() {
        let far = quad(1.0, 0.0, 4.0);
        let near = quad(3.0, 0.0, 4.0);
        let mut verts = far.vertices().to_vec();
        verts.extend_from_slice(near.vertices());
        let tris = vec![[0, 2, 1], [1, 2, 3], [4, 6, 5], [5, 6, 7]];
        let colors = Some([[0.2; 3]; 4].into_iter().chain([[0.9; 3]; 4]).collect());
        let both = FaceMesh::new(verts.clone(), tris.clone(), colors).unwrap();
        let img = render_mesh(&both, 5, 5, RenderMode::Textured).unwrap();
        assert_eq!(img.get(1, 1, 0), 0.9);
        // reversed draw order gives the same picture
        let rev = FaceMesh::new(
            verts,
            vec![tris[2], tris[3], tris[0], tris[1]],
            both.colors().map(|c| c.to_vec()),
        )
        .unwrap();
        assert_eq!(render_mesh(&rev, 5, 5, RenderMode::Textured).unwrap(), img);
    }

    #[test]
    fn empty_mesh_is_black() {
        let img = render_mesh(&FaceMesh::empty(), 3, 2, RenderMode::Shaded).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
        assert_eq!(
            render_mesh(&FaceMesh::empty(), 0, 2, RenderMode::Shaded),
            Err(Error::ZeroOutputSize)
        );
        assert!(render_mesh(&quad(0.0, 0.0, 1.0), 3, 3, RenderMode::Textured).is_err());
    }

    #[test]
    fn depth_normalization() {
        let flat = render_depth(&quad(5.0, 0.0, 4.0), 6, 6).unwrap();
        assert_eq!(flat.get(1, 1, 0), 1.0);
        assert_eq!(flat.get(5, 5, 0), 0.0);

        let a = quad(1.0, 0.0, 2.0);
        let b = quad(3.0, 3.0, 5.0);
        let mut v = a.vertices().to_vec();
        v.extend_from_slice(b.vertices());
        let m = FaceMesh::new(v, vec![[0, 2, 1], [1, 2, 3], [4, 6, 5], [5, 6, 7]], None).unwrap();
        let d = render_depth(&m, 6, 6).unwrap();
        assert_eq!(d.get(1, 1, 0), 0.0);
        assert_eq!(d.get(3, 1, 0), 1.0);
        assert_eq!(
            render_depth(&m.translated([0.0, 0.0, 7.5]), 6, 6).unwrap(),
            d
        );
    }
}
