use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use modterrain::lmfdb::{default_cache_dir, BASE_URL_ENV, CACHE_DIR_ENV, DEFAULT_BASE_URL};
use modterrain::terrain::HeightMapKind;
use modterrain_cli::config::{parse_light, parse_outputs};
use modterrain_cli::{cmd_coeffs, cmd_info, cmd_render, CliError, FetchFlags, RenderConfig};

/// Evaluate modular forms over the upper half-plane and export terrain.
///
/// Exit status: 0 success, 2 configuration or usage error, 3 coefficient
/// data or network error, 4 evaluation error, 5 file output error.
#[derive(Parser)]
#[command(name = "modterrain", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Never touch the network; use cached and bundled coefficients only.
    #[arg(long, global = true)]
    offline: bool,
    /// Coefficient cache directory.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    /// Coefficient endpoint; `{label}` and `{count}` are substituted.
    #[arg(long, global = true, env = BASE_URL_ENV, default_value = DEFAULT_BASE_URL)]
    base_url: String,
    /// First rung of the precision ladder.
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// Last rung of the precision ladder.
    #[arg(long, global = true)]
    max_precision_bits: Option<u32>,
    /// Directory for render outputs.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// HTTP timeout in seconds.
    #[arg(long, global = true, default_value_t = 60)]
    timeout: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch or look up coefficients of a newform.
    Coeffs {
        label: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Also write the coefficients to this file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render terrain artifacts for a form.
    Render(RenderArgs),
    /// Print level, weight and coefficient type of a form.
    Info { label: String },
}

#[derive(Args)]
struct RenderArgs {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Newform label, e.g. 1.12.a.a.
    #[arg(long)]
    label: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    y_min: Option<f64>,
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// tanh, arctan_recip or log_arctan.
    #[arg(long)]
    height_map: Option<HeightMapKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    target_rel_err: Option<f64>,
    #[arg(long)]
    y_floor: Option<f64>,
    #[arg(long)]
    min_coeffs: Option<usize>,
    #[arg(long)]
    vertical_scale: Option<f64>,
    /// Light direction as x,y,z.
    #[arg(long, allow_hyphen_values = true)]
    light: Option<String>,
    /// Comma-separated subset of mesh_ply, mesh_obj, image_2d, hillshade.
    #[arg(long)]
    outputs: Option<String>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

fn build_config(args: &RenderArgs, global: &GlobalArgs) -> Result<RenderConfig, CliError> {
    let mut config = RenderConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.apply_text(&text)?;
    }
    macro_rules! apply {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = args.$flag.clone() { config.$($field).+ = v; })*
        };
    }
    apply!(
        label => form_label,
        x_min => grid.x_min,
        x_max => grid.x_max,
        y_min => grid.y_min,
        y_max => grid.y_max,
        nx => grid.nx,
        ny => grid.ny,
        height_map => heightmap.kind,
        alpha => heightmap.alpha,
        target_rel_err => eval.target_rel_err,
        y_floor => eval.y_floor,
        min_coeffs => min_coeffs,
    );
    if let Some(s) = args.vertical_scale {
        config.vertical_scale = Some(s);
    }
    if let Some(light) = &args.light {
        config.light_dir = parse_light(light)?;
    }
    if let Some(outputs) = &args.outputs {
        config.outputs = parse_outputs(outputs)?;
    }
    if let Some(bits) = global.precision_bits {
        config.eval.initial_bits = bits;
    }
    if let Some(bits) = global.max_precision_bits {
        config.eval.max_bits = bits;
    }
    if let Some(dir) = &global.output_dir {
        config.output_dir = dir.clone();
    }
    config.offline |= global.offline;
    Ok(config)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let g = &cli.global;
    let flags = FetchFlags {
        offline: g.offline,
        cache_dir: g.cache_dir.clone().unwrap_or_else(default_cache_dir),
        base_url: g.base_url.clone(),
        timeout: Duration::from_secs(g.timeout),
    };
    match &cli.command {
        Command::Coeffs {
            label,
            count,
            output,
        } => Ok(cmd_coeffs(label, *count, output.as_deref(), &flags)? + "\n"),
        Command::Info { label } => cmd_info(label, &flags),
        Command::Render(args) => {
            let config = build_config(args, g)?;
            if args.print_config {
                return Ok(config.to_text());
            }
            let report = cmd_render(&config, &flags)?;
            let mut out = format!("wrote {}\n", report.manifest_path.display());
            for (output, path) in &report.outputs {
                out.push_str(&format!("{output}: {}\n", path.display()));
            }
            out.push_str(&format!("low_confidence_nodes: {}\n", report.low_confidence_nodes));
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
