use std::io::{BufRead, Write};

use super::{color_byte, fmt_g9, MeshIoError};
use crate::terrain::{TerrainMesh, Vertex};

/// Wavefront OBJ with the nonstandard `v x y z r g b` vertex-color
/// extension; colors are written quantized to bytes, as fractions of 255.
pub fn export_obj<W: Write>(mesh: &TerrainMesh, mut out: W) -> Result<(), MeshIoError> {
    mesh.validate().map_err(MeshIoError::InvalidMesh)?;
    writeln!(out, "# vertical_scale {}", fmt_g9(mesh.vertical_scale))?;
    for v in &mesh.vertices {
        let [x, y, z] = v.position.map(fmt_g9);
        let [r, g, b] = v.color.map(|c| fmt_g9(f64::from(color_byte(c)) / 255.0));
        writeln!(out, "v {x} {y} {z} {r} {g} {b}")?;
    }
    for v in &mesh.vertices {
        let [x, y, z] = v.normal.map(fmt_g9);
        writeln!(out, "vn {x} {y} {z}")?;
    }
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| i + 1);
        writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads back files written by [`export_obj`].
pub fn import_obj<R: BufRead>(source: R) -> Result<TerrainMesh, MeshIoError> {
    let mut positions: Vec<([f64; 3], [f64; 3])> = Vec::new();
    let mut normals: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<(usize, [i64; 3])> = Vec::new();
    let mut vertical_scale = 1.0;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let number = idx + 1;
        let err = |message: String| MeshIoError::Parse {
            line: number,
            message,
        };
        let floats = |fields: &[&str]| -> Result<Vec<f64>, MeshIoError> {
            fields
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number {t:?}"))))
                .collect()
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            ["#", "vertical_scale", v] => {
                vertical_scale = v.parse().map_err(|_| err(format!("bad vertical_scale {v:?}")))?;
            }
            [c, ..] if c.starts_with('#') => {}
            ["v", rest @ ..] if rest.len() == 6 => {
                let f = floats(rest)?;
                positions.push(([f[0], f[1], f[2]], [f[3], f[4], f[5]]));
            }
            ["vn", rest @ ..] if rest.len() == 3 => {
                let f = floats(rest)?;
                normals.push([f[0], f[1], f[2]]);
            }
            ["f", a, b, c] => {
                let mut tri = [0i64; 3];
                for (slot, corner) in tri.iter_mut().zip([a, b, c]) {
                    let (v, n) = corner
                        .split_once("//")
                        .ok_or_else(|| err(format!("expected `i//i`, found {corner:?}")))?;
                    if v != n {
                        return Err(err(format!("position and normal index differ in {corner:?}")));
                    }
                    *slot = v.parse().map_err(|_| err(format!("bad index {v:?}")))?;
                }
                faces.push((number, tri));
            }
            _ => return Err(MeshIoError::Schema(format!("line {number}: unsupported {line:?}"))),
        }
    }
    if normals.len() != positions.len() {
        return Err(MeshIoError::MalformedCount {
            element: "vn",
            expected: positions.len(),
            found: normals.len(),
        });
    }
    let vertices: Vec<Vertex> = positions
        .into_iter()
        .zip(normals)
        .map(|((position, color), normal)| Vertex {
            position,
            normal,
            color,
        })
        .collect();
    let n = vertices.len();
    let mut triangles = Vec::with_capacity(faces.len());
    for (face, (_, tri)) in faces.into_iter().enumerate() {
        let mut out = [0u32; 3];
        for (slot, index) in out.iter_mut().zip(tri) {
            if index < 1 || index as usize > n {
                return Err(MeshIoError::IndexOutOfRange {
                    face,
                    index,
                    vertices: n,
                });
            }
            *slot = (index - 1) as u32;
        }
        triangles.push(out);
    }
    let mesh = TerrainMesh {
        vertices,
        triangles,
        vertical_scale,
    };
    mesh.validate().map_err(MeshIoError::InvalidMesh)?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{triangulate, GridSpec, ScalarField};

    fn mesh() -> TerrainMesh {
        let grid = GridSpec::new(0.0, 1.0, 1.0, 2.0, 1, 1).unwrap();
        let heights = vec![0.0, 0.25, 0.5, 1.0];
        let colors = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.5]];
        let field = ScalarField::from_heights(grid, heights, colors).unwrap();
        triangulate(&field, 0.35).unwrap()
    }

    #[test]
    fn one_cell_line_counts() {
        let mut out = Vec::new();
        export_obj(&mesh(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("vn ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2);
        assert!(text.contains("\nf 1//1 2//2 4//4\n"));
    }

    #[test]
    fn round_trip() {
        let m = mesh();
        let mut out = Vec::new();
        export_obj(&m, &mut out).unwrap();
        let back = import_obj(out.as_slice()).unwrap();
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.vertical_scale, m.vertical_scale);
        for (a, b) in m.vertices.iter().zip(&back.vertices) {
            for k in 0..3 {
                assert!((a.position[k] - b.position[k]).abs() <= 1e-8);
                assert!((a.normal[k] - b.normal[k]).abs() <= 1e-8);
            }
            assert_eq!(a.color.map(color_byte), b.color.map(color_byte));
        }
    }

    #[test]
    fn bad_index_and_mismatched_normals() {
        let text = "v 0 0 0 1 0 0\nvn 0 0 1\nf 1//1 1//1 5//5\n";
        assert!(matches!(
            import_obj(text.as_bytes()),
            Err(MeshIoError::IndexOutOfRange { index: 5, .. })
        ));
        let text = "v 0 0 0 1 0 0\nf 1//1 1//1 1//1\n";
        assert!(matches!(import_obj(text.as_bytes()), Err(MeshIoError::MalformedCount { .. })));
    }
}
