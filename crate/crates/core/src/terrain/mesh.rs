//! Heightfield triangulation.

use super::{ScalarField, TerrainError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub position: [f64; 3],
    pub normal: [f64; 3],
    pub color: [f64; 3],
}

/// Triangulated heightfield; triangles wind counter-clockwise seen from +z.
#[derive(Clone, Debug, PartialEq)]
pub struct TerrainMesh {
    pub vertices: Vec<Vertex>,
    pub triangles: Vec<[u32; 3]>,
    pub vertical_scale: f64,
}

impl TerrainMesh {
    /// Index-range and unit-normal checks.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(bad) = tri.iter().find(|&&i| i as usize >= n) {
                return Err(format!("triangle {t} references vertex {bad} of {n}"));
            }
        }
        for (k, v) in self.vertices.iter().enumerate() {
            let len = norm(v.normal);
            if (len - 1.0).abs() > 1e-6 {
                return Err(format!("vertex {k} normal has length {len}"));
            }
        }
        Ok(())
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn normalized(a: [f64; 3]) -> [f64; 3] {
    let len = norm(a);
    if len == 0.0 {
        return [0.0, 0.0, 1.0];
    }
    [a[0] / len, a[1] / len, a[2] / len]
}

/// One vertex per node at (x, y, vertical_scale·height). Each cell is split
/// along its (i, j)–(i+1, j+1) diagonal; vertex normals average the unit
/// normals of the incident triangles.
pub fn triangulate(field: &ScalarField, vertical_scale: f64) -> Result<TerrainMesh, TerrainError> {
    let grid = &field.grid;
    if grid.nx == 0 || grid.ny == 0 {
        return Err(TerrainError::DegenerateGrid {
            nx: grid.nx,
            ny: grid.ny,
        });
    }
    if !(vertical_scale > 0.0 && vertical_scale.is_finite()) {
        return Err(TerrainError::InvalidScale(vertical_scale));
    }
    let n = grid.node_count();
    if field.height.len() != n || field.color.len() != n {
        return Err(TerrainError::FieldShape {
            expected: n,
            found: field.height.len().min(field.color.len()),
        });
    }

    let positions: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let (x, y) = grid.node(k);
            [x, y, vertical_scale * field.height[k]]
        })
        .collect();

    let mut triangles = Vec::with_capacity(2 * grid.nx * grid.ny);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let v00 = grid.index(i, j) as u32;
            let v10 = grid.index(i + 1, j) as u32;
            let v11 = grid.index(i + 1, j + 1) as u32;
            let v01 = grid.index(i, j + 1) as u32;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    let mut accum = vec![[0.0f64; 3]; n];
    for tri in &triangles {
        let [a, b, c] = tri.map(|i| positions[i as usize]);
        let face = normalized(cross(sub(b, a), sub(c, a)));
        for &i in tri {
            let acc = &mut accum[i as usize];
            acc[0] += face[0];
            acc[1] += face[1];
            acc[2] += face[2];
        }
    }

    let vertices = (0..n)
        .map(|k| Vertex {
            position: positions[k],
            normal: normalized(accum[k]),
            color: field.color[k],
        })
        .collect();
    Ok(TerrainMesh {
        vertices,
        triangles,
        vertical_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::GridSpec;
    use std::collections::HashMap;

    fn field_from(grid: GridSpec, h: impl Fn(f64, f64) -> f64) -> ScalarField {
        let n = grid.node_count();
        let heights = (0..n).map(|k| {
            let (x, y) = grid.node(k);
            h(x, y)
        });
        ScalarField::from_heights(grid.clone(), heights.collect(), vec![[1.0, 0.0, 0.0]; n]).unwrap()
    }

    #[test]
    fn two_by_two_counts() {
        let grid = GridSpec::new(0.0, 1.0, 1.0, 2.0, 2, 2).unwrap();
        let mesh = triangulate(&field_from(grid, |_, _| 0.5), 1.0).unwrap();
        assert_eq!(mesh.vertices.len(), 9);
        assert_eq!(mesh.triangles.len(), 8);
        assert!(mesh.validate().is_ok());
    }

    #[test]
    fn flat_field_points_up() {
        let grid = GridSpec::new(-0.5, 0.5, 0.5, 1.5, 3, 4).unwrap();
        let mesh = triangulate(&field_from(grid, |_, _| 0.3), 0.7).unwrap();
        for v in &mesh.vertices {
            assert_eq!(v.normal, [0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn ramp_matches_plane_normal() {
        let grid = GridSpec::new(0.0, 1.0, 1.0, 2.0, 5, 3).unwrap();
        let s: f64 = 0.35;
        let mesh = triangulate(&field_from(grid, |x, _| x), s).unwrap();
        // z = s·x has normal (−s, 0, 1)/√(1 + s²)
        let len = (1.0 + s * s).sqrt();
        let expect = [-s / len, 0.0, 1.0 / len];
        for v in &mesh.vertices {
            for k in 0..3 {
                assert!((v.normal[k] - expect[k]).abs() < 1e-12, "{:?}", v.normal);
            }
        }
    }

    #[test]
    fn winding_is_counter_clockwise() {
        let grid = GridSpec::new(0.0, 1.0, 1.0, 2.0, 3, 3).unwrap();
        let mesh = triangulate(&field_from(grid, |x, y| (x * 3.0).sin() * y), 1.0).unwrap();
        for tri in &mesh.triangles {
            let [a, b, c] = tri.map(|i| mesh.vertices[i as usize].position);
            assert!(cross(sub(b, a), sub(c, a))[2] > 0.0);
        }
        assert_eq!(mesh.triangles[0], [0, 1, 5]);
    }

    #[test]
    fn edge_sharing_and_boundary() {
        let grid = GridSpec::new(0.0, 1.0, 1.0, 2.0, 4, 3).unwrap();
        let mesh = triangulate(&field_from(grid, |_, _| 0.0), 1.0).unwrap();
        let mut edges: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &mesh.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        assert!(edges.values().all(|&c| c <= 2));
        assert_eq!(edges.values().filter(|&&c| c == 1).count(), 2 * (4 + 3));
    }

    #[test]
    fn rejects_bad_scale_and_degenerate_field() {
        let grid = GridSpec::new(0.0, 1.0, 1.0, 2.0, 1, 1).unwrap();
        let field = field_from(grid, |_, _| 0.0);
        assert!(matches!(triangulate(&field, 0.0), Err(TerrainError::InvalidScale(_))));
        let mut degenerate = field.clone();
        degenerate.grid.nx = 0;
        assert!(matches!(
            triangulate(&degenerate, 1.0),
            Err(TerrainError::DegenerateGrid { .. })
        ));
    }
}
