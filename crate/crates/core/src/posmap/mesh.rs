use alloc::vec::Vec;

use super::{Pose, PositionMap, WeightMask};
use crate::error::{Error, Result};
use crate::image::Image;

/// Indexed triangle mesh with optional per-vertex colors.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
    colors: Option<Vec<[f64; 3]>>,
}

impl FaceMesh {
    pub fn new(
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[u32; 3]>,
        colors: Option<Vec<[f64; 3]>>,
    ) -> Result<Self> {
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("vertex coordinates must be finite"));
        }
        if vertices.len() > u32::MAX as usize {
            return Err(Error::InvalidMesh("too many vertices"));
        }
        for t in &triangles {
            if t.iter().any(|&i| i as usize >= vertices.len()) {
                return Err(Error::InvalidMesh("triangle index out of range"));
            }
            if t[0] == t[1] && t[1] == t[2] {
                return Err(Error::InvalidMesh("degenerate triangle"));
            }
        }
        if let Some(c) = &colors {
            if c.len() != vertices.len() {
                return Err(Error::InvalidMesh("one color per vertex required"));
            }
            if c.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMesh("colors must be finite"));
            }
        }
        Ok(Self {
            vertices,
            triangles,
            colors,
        })
    }

    /// A mesh with no vertices; renders as an empty canvas.
    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
            colors: None,
        }
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn colors(&self) -> Option<&[[f64; 3]]> {
        self.colors.as_deref()
    }

    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        if self.vertices.is_empty() {
            return c;
        }
        for v in &self.vertices {
            for k in 0..3 {
                c[k] += v[k];
            }
        }
        let n = self.vertices.len() as f64;
        c.map(|s| s / n)
    }

    /// The same mesh with every vertex moved by `offset`.
    pub fn translated(&self, offset: [f64; 3]) -> FaceMesh {
        let vertices = self
            .vertices
            .iter()
            .map(|v| [v[0] + offset[0], v[1] + offset[1], v[2] + offset[2]])
            .collect();
        FaceMesh {
            vertices,
            ..self.clone()
        }
    }
}

/// Keeps texels whose weight exceeds `threshold` as vertices (row-major
/// order) and splits every UV cell with four kept corners into two triangles.
pub fn mesh_from_posmap(pm: &PositionMap, mask: &WeightMask, threshold: f64) -> Result<FaceMesh> {
    let (w, h) = (pm.width(), pm.height());
    if mask.width() != w || mask.height() != h {
        return Err(Error::DimensionMismatch(
            "mask and position map differ in size",
        ));
    }
    let mut index = alloc::vec![u32::MAX; w * h];
    let mut vertices = Vec::new();
    for v in 0..h {
        for u in 0..w {
            if mask.get(u, v) > threshold {
                index[v * w + u] = vertices.len() as u32;
                vertices.push(pm.get(u, v));
            }
        }
    }
    if vertices.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut triangles = Vec::new();
    for v in 0..h.saturating_sub(1) {
        for u in 0..w - 1 {
            let a = index[v * w + u];
            let b = index[v * w + u + 1];
            let c = index[(v + 1) * w + u];
            let d = index[(v + 1) * w + u + 1];
            if [a, b, c, d].contains(&u32::MAX) {
                continue;
            }
            triangles.push([a, c, b]);
            triangles.push([b, c, d]);
        }
    }
    FaceMesh::new(vertices, triangles, None)
}

/// Colors each vertex with the bilinear sample of `src` at its `(x, y)`,
/// clamped to the image. Single-channel sources give gray colors.
pub fn texture_vertices(mesh: &FaceMesh, src: &Image) -> FaceMesh {
    let rgb = src.to_rgb();
    let colors = mesh
        .vertices
        .iter()
        .map(|p| [0, 1, 2].map(|c| rgb.sample_bilinear(p[0], p[1], c)))
        .collect();
    FaceMesh {
        colors: Some(colors),
        ..mesh.clone()
    }
}

/// Rotates about the vertical axis through the centroid.
pub fn rotate_yaw(mesh: &FaceMesh, pose: &Pose) -> FaceMesh {
    rotate_yaw_degrees(mesh, pose.yaw())
}

/// [`rotate_yaw`] for any angle. Whole turns return the mesh unchanged.
pub fn rotate_yaw_degrees(mesh: &FaceMesh, degrees: f64) -> FaceMesh {
    if degrees % 360.0 == 0.0 {
        return mesh.clone();
    }
    let t = degrees.to_radians();
    let (s, c) = (libm::sin(t), libm::cos(t));
    let [cx, _, cz] = mesh.centroid();
    let vertices = mesh
        .vertices
        .iter()
        .map(|&[x, y, z]| {
            let (dx, dz) = (x - cx, z - cz);
            [cx + c * dx + s * dz, y, cz - s * dx + c * dz]
        })
        .collect();
    FaceMesh {
        vertices,
        ..mesh.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid(w: usize, h: usize) -> PositionMap {
        PositionMap::from_fn(w, h, |u, v| [u as f64, v as f64, 0.5 * u as f64]).unwrap()
    }

    #[test]
    fn full_mask_counts() {
        let m =
            mesh_from_posmap(&grid(5, 4), &WeightMask::filled(5, 4, 1.0).unwrap(), 0.0).unwrap();
        assert_eq!(m.vertices().len(), 20);
        assert_eq!(m.triangles().len(), 2 * 4 * 3);
    }

    #[test]
    fn corner_block() {
        let mask =
            WeightMask::new(3, 3, vec![1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let m = mesh_from_posmap(&grid(3, 3), &mask, 0.5).unwrap();
        assert_eq!(
            m.vertices(),
            &[
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.5],
                [0.0, 1.0, 0.0],
                [1.0, 1.0, 0.5]
            ]
        );
        assert_eq!(m.triangles(), &[[0, 2, 1], [1, 2, 3]]);
    }

    #[test]
    fn empty_mask_fails() {
        let r = mesh_from_posmap(&grid(3, 3), &WeightMask::filled(3, 3, 0.0).unwrap(), 0.0);
        assert_eq!(r, Err(Error::EmptyMesh));
    }

    #[test]
    fn mesh_validation() {
        assert!(FaceMesh::new(vec![[0.0; 3]; 2], vec![[0, 1, 2]], None).is_err());
        assert!(FaceMesh::new(vec![[0.0; 3]; 3], vec![[1, 1, 1]], None).is_err());
        assert!(
            FaceMesh::new(vec![[0.0; 3]; 3], vec![[0, 1, 2]], Some(vec![[0.0; 3]; 2])).is_err()
        );
    }

    #[test]
    fn texture_sampling() {
        let img = Image::from_planar(2, 1, 1, vec![0.2, 0.6]).unwrap();
        let mesh = FaceMesh::new(
            vec![[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [-4.0, 3.0, 0.0]],
            vec![[0, 1, 2]],
            None,
        )
        .unwrap();
        let c = texture_vertices(&mesh, &img);
        let c = c.colors().unwrap();
        assert_eq!(c[0], [0.2; 3]);
        assert!((c[1][0] - 0.4).abs() < 1e-15);
        assert_eq!(c[2], [0.2; 3]);
    }

    #[test]
    fn yaw_rotation() {
        let mesh =
            mesh_from_posmap(&grid(4, 4), &WeightMask::filled(4, 4, 1.0).unwrap(), 0.0).unwrap();
        assert_eq!(rotate_yaw_degrees(&mesh, 0.0), mesh);
        assert_eq!(rotate_yaw_degrees(&mesh, 360.0), mesh);
        let twice = rotate_yaw_degrees(&rotate_yaw_degrees(&mesh, 90.0), 90.0);
        let once = rotate_yaw_degrees(&mesh, 180.0);
        for (a, b) in twice.vertices().iter().zip(once.vertices()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-9);
            }
        }
        let q = rotate_yaw_degrees(&mesh, 90.0);
        let c = mesh.centroid();
        let (v, r) = (mesh.vertices()[0], q.vertices()[0]);
        // x offset turns into -z offset
        assert!((r[2] - c[2] + (v[0] - c[0])).abs() < 1e-12);
    }
}
