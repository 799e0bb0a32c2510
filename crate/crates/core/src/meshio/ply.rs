use std::io::{BufRead, Write};

use super::{color_byte, fmt_g9, MeshIoError};
use crate::terrain::{TerrainMesh, Vertex};

const VERTEX_PROPERTIES: [(&str, &str); 9] = [
    ("float", "x"),
    ("float", "y"),
    ("float", "z"),
    ("float", "nx"),
    ("float", "ny"),
    ("float", "nz"),
    ("uchar", "red"),
    ("uchar", "green"),
    ("uchar", "blue"),
];
const FACE_PROPERTY: &str = "property list uchar int vertex_indices";

/// ASCII PLY 1.0 with per-vertex normals and uchar colors.
pub fn export_ply<W: Write>(mesh: &TerrainMesh, mut out: W) -> Result<(), MeshIoError> {
    mesh.validate().map_err(MeshIoError::InvalidMesh)?;
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    s.push_str(&format!("comment vertical_scale {}\n", fmt_g9(mesh.vertical_scale)));
    s.push_str(&format!("element vertex {}\n", mesh.vertices.len()));
    for (ty, name) in VERTEX_PROPERTIES {
        s.push_str(&format!("property {ty} {name}\n"));
    }
    s.push_str(&format!("element face {}\n", mesh.triangles.len()));
    s.push_str(FACE_PROPERTY);
    s.push_str("\nend_header\n");
    out.write_all(s.as_bytes())?;
    let mut line = String::new();
    for v in &mesh.vertices {
        line.clear();
        for c in v.position.iter().chain(&v.normal) {
            line.push_str(&fmt_g9(*c));
            line.push(' ');
        }
        let [r, g, b] = v.color.map(color_byte);
        line.push_str(&format!("{r} {g} {b}\n"));
        out.write_all(line.as_bytes())?;
    }
    for [a, b, c] in &mesh.triangles {
        out.write_all(format!("3 {a} {b} {c}\n").as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<Option<String>, MeshIoError> {
        match self.inner.next() {
            Some(line) => {
                self.number += 1;
                Ok(Some(line?))
            }
            None => Ok(None),
        }
    }

    fn parse_err(&self, message: String) -> MeshIoError {
        MeshIoError::Parse {
            line: self.number,
            message,
        }
    }
}

/// Reads back files written by [`export_ply`]. Colors come back as byte/255.
pub fn import_ply<R: BufRead>(source: R) -> Result<TerrainMesh, MeshIoError> {
    let mut lines = Lines {
        inner: source.lines(),
        number: 0,
    };
    let mut header = Vec::new();
    loop {
        match lines.next_line()? {
            Some(l) if l.trim() == "end_header" => break,
            Some(l) => header.push(l),
            None => return Err(MeshIoError::Schema("missing end_header".into())),
        }
    }
    let (vertex_count, face_count, vertical_scale) = parse_header(&header)?;

    let mut vertices = Vec::with_capacity(vertex_count);
    for k in 0..vertex_count {
        let line = lines.next_line()?.ok_or(MeshIoError::MalformedCount {
            element: "vertex",
            expected: vertex_count,
            found: k,
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(lines.parse_err(format!("vertex needs 9 values, found {}", fields.len())));
        }
        let mut f = [0.0; 6];
        for (slot, text) in f.iter_mut().zip(&fields[..6]) {
            *slot = text
                .parse()
                .map_err(|_| lines.parse_err(format!("bad float {text:?}")))?;
        }
        let mut rgb = [0.0; 3];
        for (slot, text) in rgb.iter_mut().zip(&fields[6..]) {
            let byte: u8 = text
                .parse()
                .map_err(|_| lines.parse_err(format!("bad uchar {text:?}")))?;
            *slot = f64::from(byte) / 255.0;
        }
        vertices.push(Vertex {
            position: [f[0], f[1], f[2]],
            normal: [f[3], f[4], f[5]],
            color: rgb,
        });
    }

    let mut triangles = Vec::with_capacity(face_count);
    for k in 0..face_count {
        let line = lines.next_line()?.ok_or(MeshIoError::MalformedCount {
            element: "face",
            expected: face_count,
            found: k,
        })?;
        let fields: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| lines.parse_err(format!("bad face record {line:?}")))?;
        if fields.len() != 4 || fields[0] != 3 {
            return Err(lines.parse_err(format!("expected a triangle, found {line:?}")));
        }
        let mut tri = [0u32; 3];
        for (slot, &index) in tri.iter_mut().zip(&fields[1..]) {
            if index < 0 || index as usize >= vertex_count {
                return Err(MeshIoError::IndexOutOfRange {
                    face: k,
                    index,
                    vertices: vertex_count,
                });
            }
            *slot = index as u32;
        }
        triangles.push(tri);
    }
    while let Some(extra) = lines.next_line()? {
        if !extra.trim().is_empty() {
            return Err(MeshIoError::MalformedCount {
                element: "face",
                expected: face_count,
                found: face_count + 1,
            });
        }
    }

    let mesh = TerrainMesh {
        vertices,
        triangles,
        vertical_scale,
    };
    mesh.validate().map_err(MeshIoError::InvalidMesh)?;
    Ok(mesh)
}

fn parse_header(header: &[String]) -> Result<(usize, usize, f64), MeshIoError> {
    let schema = |m: String| MeshIoError::Schema(m);
    let mut it = header.iter().map(|l| l.trim());
    if it.next() != Some("ply") {
        return Err(schema("missing `ply` magic".into()));
    }
    if it.next() != Some("format ascii 1.0") {
        return Err(schema("only `format ascii 1.0` is supported".into()));
    }
    let mut vertical_scale = 1.0;
    let mut rest = Vec::new();
    for line in it {
        if let Some(comment) = line.strip_prefix("comment") {
            if let Some(v) = comment.trim().strip_prefix("vertical_scale") {
                vertical_scale = v
                    .trim()
                    .parse()
                    .map_err(|_| schema(format!("bad vertical_scale {v:?}")))?;
            }
        } else {
            rest.push(line);
        }
    }
    let count = |line: Option<&&str>, element: &str| -> Result<usize, MeshIoError> {
        let line = line.ok_or_else(|| schema(format!("missing element {element}")))?;
        let n = line
            .strip_prefix("element ")
            .and_then(|r| r.strip_prefix(element))
            .ok_or_else(|| schema(format!("expected `element {element} N`, found {line:?}")))?;
        n.trim()
            .parse()
            .map_err(|_| schema(format!("bad {element} count in {line:?}")))
    };
    let vertex_count = count(rest.first(), "vertex")?;
    for (k, (ty, name)) in VERTEX_PROPERTIES.iter().enumerate() {
        let expected = format!("property {ty} {name}");
        if rest.get(1 + k).copied() != Some(expected.as_str()) {
            return Err(schema(format!(
                "vertex property {k} should be `{expected}`, found {:?}",
                rest.get(1 + k)
            )));
        }
    }
    let face_count = count(rest.get(10), "face")?;
    if rest.get(11).copied() != Some(FACE_PROPERTY) {
        return Err(schema(format!("expected `{FACE_PROPERTY}`")));
    }
    if rest.len() != 12 {
        return Err(schema(format!("unexpected header line {:?}", rest[12])));
    }
    Ok((vertex_count, face_count, vertical_scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::{triangulate, GridSpec, ScalarField};

    fn flat_mesh() -> TerrainMesh {
        let grid = GridSpec::new(0.0, 1.0, 1.0, 2.0, 1, 1).unwrap();
        let field = ScalarField::from_heights(grid, vec![0.0; 4], vec![[1.0, 0.0, 0.0]; 4]).unwrap();
        triangulate(&field, 0.35).unwrap()
    }

    fn export(mesh: &TerrainMesh) -> String {
        let mut out = Vec::new();
        export_ply(mesh, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn one_cell_header_counts() {
        let text = export(&flat_mesh());
        assert!(text.contains("\nelement vertex 4\n"));
        assert!(text.contains("\nelement face 2\n"));
        assert!(!text.contains('\r'));
        assert!(text.ends_with("3 0 3 2\n"));
    }

    #[test]
    fn round_trip() {
        let mesh = flat_mesh();
        let back = import_ply(export(&mesh).as_bytes()).unwrap();
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.vertical_scale, 0.35);
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert_eq!(a.position, b.position);
            assert_eq!(a.color.map(color_byte), b.color.map(color_byte));
        }
    }

    #[test]
    fn truncated_file_is_a_count_error() {
        let text = export(&flat_mesh());
        let cut: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            import_ply(cut.as_bytes()),
            Err(MeshIoError::MalformedCount { element: "face", expected: 2, found: 1 })
        ));
        let cut: String = text.lines().take(16).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            import_ply(cut.as_bytes()),
            Err(MeshIoError::MalformedCount { element: "vertex", .. })
        ));
    }

    #[test]
    fn face_index_out_of_range() {
        let text = export(&flat_mesh()).replace("3 0 1 3\n", "3 0 1 999\n");
        assert!(matches!(
            import_ply(text.as_bytes()),
            Err(MeshIoError::IndexOutOfRange { index: 999, vertices: 4, .. })
        ));
    }

    #[test]
    fn schema_mismatch() {
        let text = export(&flat_mesh()).replace("property float nx", "property double nx");
        assert!(matches!(import_ply(text.as_bytes()), Err(MeshIoError::Schema(_))));
        let text = export(&flat_mesh()).replace("format ascii 1.0", "format binary_little_endian 1.0");
        assert!(matches!(import_ply(text.as_bytes()), Err(MeshIoError::Schema(_))));
    }
}
