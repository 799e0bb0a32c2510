//! 2D renderings of a field: hillshade and domain coloring.

use super::mesh::{dot, norm, triangulate};
use super::{sample_field, GridSpec, HeightMapSpec, ScalarField, TerrainError};
use crate::meshio::Image;
use crate::qexpansion::{EvalOptions, FormDescriptor};

/// Light from the upper left, 45° above the horizon.
pub const DEFAULT_LIGHT_DIR: [f64; 3] = [-0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2];
pub const HILLSHADE_AMBIENT: f64 = 0.2;

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Lambertian shading of the triangulated field, one pixel per node. Row 0
/// is the top edge (y = y_max).
pub fn hillshade(
    field: &ScalarField,
    light: [f64; 3],
    vertical_scale: f64,
) -> Result<Image, TerrainError> {
    let len = norm(light);
    if !((len - 1.0).abs() <= 1e-9 && light[2] > 0.0) {
        return Err(TerrainError::InvalidLight(light));
    }
    let mesh = triangulate(field, vertical_scale)?;
    let grid = &field.grid;
    let (w, h) = (grid.nx + 1, grid.ny + 1);
    let mut pixels = Vec::with_capacity(w * h);
    for row in 0..h {
        let j = h - 1 - row;
        for i in 0..w {
            let v = &mesh.vertices[grid.index(i, j)];
            let shade = HILLSHADE_AMBIENT + (1.0 - HILLSHADE_AMBIENT) * dot(v.normal, light).max(0.0);
            pixels.push(v.color.map(|c| to_byte(c * shade)));
        }
    }
    Ok(Image::new(w, h, pixels))
}

/// Phase color scaled by height; low-confidence nodes are black.
pub fn domain_color_pixel(height: f64, color: [f64; 3], confident: bool) -> [u8; 3] {
    if !confident {
        return [0, 0, 0];
    }
    color.map(|c| to_byte(c * height))
}

/// One pixel per node, row 0 at y = y_max.
pub fn domain_color_image(field: &ScalarField) -> Image {
    let grid = &field.grid;
    let (w, h) = (grid.nx + 1, grid.ny + 1);
    let mut pixels = Vec::with_capacity(w * h);
    for row in 0..h {
        let j = h - 1 - row;
        for i in 0..w {
            let k = grid.index(i, j);
            pixels.push(domain_color_pixel(field.height[k], field.color[k], field.confidence[k]));
        }
    }
    Image::new(w, h, pixels)
}

/// Samples `form` over `grid` and renders the domain-colored image.
pub fn domain_color_2d(
    form: &FormDescriptor,
    grid: &GridSpec,
    hmap: &HeightMapSpec,
    opts: &EvalOptions,
) -> Result<Image, TerrainError> {
    Ok(domain_color_image(&sample_field(form, grid, hmap, opts)?))
}
