//! The `coeffs`, `info` and `render` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use modterrain::lmfdb::{fetch, parse_label, to_descriptor, CoefficientFile, FetchConfig};
use modterrain::meshio::{export_obj, export_ply, write_png, Image};
use modterrain::terrain::{domain_color_image, hillshade, sample_field, triangulate, ScalarField};

use crate::config::{Output, RenderConfig};
use crate::manifest::{sha256_hex, Manifest, MANIFEST_FILE};
use crate::CliError;

/// Where coefficient data comes from.
#[derive(Clone, Debug)]
pub struct FetchFlags {
    pub offline: bool,
    pub cache_dir: PathBuf,
    pub base_url: String,
    pub timeout: Duration,
}

impl FetchFlags {
    pub fn fetch_config(&self, offline: bool) -> FetchConfig {
        let mut config = FetchConfig::new(&self.cache_dir);
        config.base_url = self.base_url.clone();
        config.offline = self.offline || offline;
        config.timeout = self.timeout;
        config
    }
}

fn load(label: &str, count: usize, flags: &FetchFlags, offline: bool) -> Result<CoefficientFile, CliError> {
    let label = parse_label(label)?;
    Ok(fetch(&label, count, &flags.fetch_config(offline))?)
}

/// Makes `count` coefficients available and returns the summary line; with
/// `output`, also writes them in the coefficient file format.
pub fn cmd_coeffs(
    label: &str,
    count: usize,
    output: Option<&Path>,
    flags: &FetchFlags,
) -> Result<String, CliError> {
    if count == 0 {
        return Err(CliError::Config("--count must be positive".into()));
    }
    let file = load(label, count, flags, false)?.truncated(count);
    if let Some(path) = output {
        fs::write(path, file.to_text()).map_err(|e| CliError::io(path.display().to_string(), e))?;
    }
    Ok(format!(
        "{} level={} weight={} count={} source={}",
        file.label,
        file.label.level,
        file.label.weight,
        file.count(),
        file.source
    ))
}

/// Label metadata plus what the stored coefficients look like.
pub fn cmd_info(label: &str, flags: &FetchFlags) -> Result<String, CliError> {
    let file = load(label, 1, flags, false)?;
    let form = to_descriptor(&file)?;
    let kind = if form.has_real_coefficients() {
        "real"
    } else {
        "complex"
    };
    let l = &file.label;
    Ok(format!(
        "label: {l}\nlevel: {}\nweight: {}\ncharacter orbit: {}\ncoefficients: {kind}\nstored: {}\nsource: {}\n",
        l.level,
        l.weight,
        l.character_orbit,
        file.count(),
        file.source
    ))
}

/// What a render produced.
#[derive(Clone, Debug)]
pub struct RenderReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub outputs: Vec<(Output, PathBuf)>,
    pub low_confidence_nodes: usize,
}

fn write_artifact(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn png_bytes(image: &Image) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    write_png(image, &mut out)?;
    Ok(out)
}

fn render_output(
    output: Output,
    field: &ScalarField,
    config: &RenderConfig,
) -> Result<Vec<u8>, CliError> {
    let scale = config.effective_vertical_scale();
    let mut bytes = Vec::new();
    match output {
        Output::MeshPly => export_ply(&triangulate(field, scale)?, &mut bytes)?,
        Output::MeshObj => export_obj(&triangulate(field, scale)?, &mut bytes)?,
        Output::Image2d => bytes = png_bytes(&domain_color_image(field))?,
        Output::Hillshade => bytes = png_bytes(&hillshade(field, config.unit_light()?, scale)?)?,
    }
    Ok(bytes)
}

/// Samples the form, writes the selected artifacts and the manifest. All
/// files are written after sampling has finished.
pub fn cmd_render(config: &RenderConfig, flags: &FetchFlags) -> Result<RenderReport, CliError> {
    config.validate()?;
    let file = load(&config.form_label, config.min_coeffs, flags, config.offline)?;
    let form = to_descriptor(&file)?;
    let field = sample_field(&form, &config.grid, &config.heightmap, &config.eval)?;

    let artifacts: Vec<(Output, Vec<u8>)> = config
        .outputs
        .iter()
        .map(|&o| Ok((o, render_output(o, &field, config)?)))
        .collect::<Result<_, CliError>>()?;

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;

    let mut manifest = Manifest::default();
    manifest.push("manifest_version", 1);
    manifest.push("form", &file.label);
    manifest.push("config_sha256", sha256_hex(config.recipe_text().as_bytes()));
    manifest.push("coefficient_source", file.source);
    manifest.push("coefficient_count", file.count());
    manifest.push("coefficient_sha256", sha256_hex(file.to_text().as_bytes()));
    manifest.push("grid_nodes", config.grid.node_count());
    manifest.push("low_confidence_nodes", field.low_confidence_count());
    let histogram: Vec<String> = field
        .precision_histogram()
        .iter()
        .map(|(bits, n)| format!("{bits}:{n}"))
        .collect();
    manifest.push("precision_bits_histogram", histogram.join(","));
    manifest.push("vertical_scale", format!("{:?}", config.effective_vertical_scale()));

    let mut outputs = Vec::new();
    for (output, bytes) in &artifacts {
        let path = dir.join(output.file_name());
        write_artifact(&path, bytes)?;
        manifest.push(format!("output.{output}"), output.file_name());
        manifest.push(format!("output.{output}.sha256"), sha256_hex(bytes));
        outputs.push((*output, path));
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    write_artifact(&manifest_path, manifest.to_text().as_bytes())?;
    Ok(RenderReport {
        manifest,
        manifest_path,
        outputs,
        low_confidence_nodes: field.low_confidence_count(),
    })
}
