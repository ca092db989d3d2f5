mod error;
mod json;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use spherelight::hdr::{read_pfm, read_radiance_hdr, write_pfm, write_radiance_hdr};
use spherelight::metrics::metric_report;
use spherelight::sphconv::kernel_sample_grid;
use spherelight::sphere::cost_matrix;
use spherelight::transport::sml;
use spherelight::{
    decompose, generate_anchors, render_gaussian_map, GaussianMapConfig, IlluminationParams,
    Panorama, SinkhornConfig, SphericalDistribution,
};

use error::CliError;
use json::{num_array, J};

#[derive(Parser)]
#[command(name = "spherelight", version, about = "Spherical illumination toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the quasi-uniform anchor lattice as JSON
    Anchors {
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Split an HDR panorama into light distribution, intensity, and ambient
    Decompose {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        fraction: f64,
        #[arg(long)]
        weighted: bool,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Entropic transport distance between two parameter files (JSON on stdout)
    Distance {
        #[arg(long, value_name = "FILE")]
        a: PathBuf,
        #[arg(long, value_name = "FILE")]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
    },
    /// Render the spherical-Gaussian map described by a parameter file
    Render {
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        #[arg(long, default_value_t = 0.0025)]
        s: f64,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 128)]
        height: usize,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Optional gamma-2.2 PNG for eyeballing, never for evaluation
        #[arg(long, value_name = "FILE")]
        preview: Option<PathBuf>,
        /// Linear scale applied before clipping when writing the preview
        #[arg(long, default_value_t = 1.0)]
        exposure: f64,
    },
    /// Compare two HDR maps (JSON report on stdout)
    Metrics {
        #[arg(long, value_name = "FILE")]
        pred: PathBuf,
        #[arg(long = "true", value_name = "FILE")]
        truth: PathBuf,
    },
    /// Export per-pixel kernel sample coordinates as JSON
    SphconvGrid {
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 128)]
        height: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            std::process::exit(if informational { 0 } else { 1 });
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Anchors { n, out } => cmd_anchors(n, &out),
        Command::Decompose {
            input,
            n,
            fraction,
            weighted,
            out,
        } => cmd_decompose(&input, n, fraction, weighted, &out),
        Command::Distance { a, b, epsilon } => cmd_distance(&a, &b, epsilon),
        Command::Render {
            params,
            s,
            width,
            height,
            out,
            preview,
            exposure,
        } => cmd_render(&params, s, width, height, &out, preview.as_deref(), exposure),
        Command::Metrics { pred, truth } => cmd_metrics(&pred, &truth),
        Command::SphconvGrid {
            width,
            height,
            k,
            out,
        } => cmd_grid(width, height, k, &out),
    }
}

fn cmd_anchors(n: usize, out: &Path) -> Result<(), CliError> {
    let anchors = generate_anchors(n)?;
    let dirs: Vec<J> = anchors
        .directions()
        .iter()
        .map(|d| num_array(&[d.x, d.y, d.z]))
        .collect();
    let doc = J::Obj(vec![("n", J::Int(n as i64)), ("directions", J::Arr(dirs))]);
    write_bytes(out, json::render(&doc).as_bytes())
}

fn cmd_decompose(
    input: &Path,
    n: usize,
    fraction: f64,
    weighted: bool,
    out: &Path,
) -> Result<(), CliError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CliError::Usage(format!(
            "fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    let pano = read_image(input)?;
    let anchors = generate_anchors(n)?;
    let params = decompose(&pano, &anchors, fraction, weighted)?;
    write_bytes(out, json::render(&params_doc(&params, fraction, weighted)).as_bytes())
}

fn params_doc(params: &IlluminationParams, fraction: f64, weighted: bool) -> J {
    J::Obj(vec![
        ("n", J::Int(params.n as i64)),
        ("fraction", J::Num(fraction)),
        ("weighted", J::Bool(weighted)),
        (
            "distribution",
            J::Arr(params.distribution.iter().map(|ch| num_array(ch)).collect()),
        ),
        ("intensity", num_array(&params.intensity)),
        ("ambient", num_array(&params.ambient)),
    ])
}

fn cmd_distance(a: &Path, b: &Path, epsilon: f64) -> Result<(), CliError> {
    let pa = load_params(a)?;
    let pb = load_params(b)?;
    if pa.n != pb.n {
        return Err(CliError::Usage(format!(
            "parameter files disagree on n: {} vs {}",
            pa.n, pb.n
        )));
    }
    let anchors = generate_anchors(pa.n)?;
    let c = cost_matrix(&anchors);
    let cfg = SinkhornConfig {
        epsilon,
        ..SinkhornConfig::default()
    };
    let mut cost = 0.0;
    let mut objective = 0.0;
    let mut iterations = 0usize;
    let mut marginal = 0.0f64;
    for ch in 0..3 {
        let u = SphericalDistribution::normalized(pa.distribution[ch].clone())?;
        let v = SphericalDistribution::normalized(pb.distribution[ch].clone())?;
        let r = sml(&u, &v, &c, &cfg)?;
        cost += r.transport_cost;
        objective += r.regularized_objective;
        iterations = iterations.max(r.iterations);
        marginal = marginal.max(r.marginal_error);
    }
    let doc = J::Obj(vec![
        ("transport_cost", J::Num(cost / 3.0)),
        ("regularized_objective", J::Num(objective / 3.0)),
        ("iterations", J::Int(iterations as i64)),
        ("marginal_error", J::Num(marginal)),
    ]);
    print!("{}", json::render(&doc));
    Ok(())
}

fn cmd_render(
    params_path: &Path,
    s: f64,
    width: usize,
    height: usize,
    out: &Path,
    preview: Option<&Path>,
    exposure: f64,
) -> Result<(), CliError> {
    if !(exposure.is_finite() && exposure > 0.0) {
        return Err(CliError::Usage(format!(
            "exposure must be positive and finite, got {exposure}"
        )));
    }
    let params = load_params(params_path)?;
    let anchors = generate_anchors(params.n)?;
    let cfg = GaussianMapConfig {
        angular_size: s,
        width,
        height,
    };
    let map = render_gaussian_map(&params, &anchors, &cfg)?;
    write_image(out, &map)?;
    if let Some(path) = preview {
        write_preview(path, &map, exposure)?;
    }
    Ok(())
}

fn cmd_metrics(pred: &Path, truth: &Path) -> Result<(), CliError> {
    let a = read_image(pred)?;
    let b = read_image(truth)?;
    let report = metric_report(&a, &b)?;
    let doc = J::Obj(vec![
        ("rmse", J::Num(report.rmse)),
        ("si_rmse", J::Num(report.si_rmse)),
        ("angular_error_deg", J::Num(report.angular_error_deg)),
        ("angular_skipped", J::Int(report.angular_skipped as i64)),
        ("cosine_loss", J::Num(report.cosine_loss)),
    ]);
    print!("{}", json::render(&doc));
    Ok(())
}

fn cmd_grid(width: usize, height: usize, k: usize, out: &Path) -> Result<(), CliError> {
    let grid = kernel_sample_grid(width, height, k)?;
    let mut pixels = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in 0..width {
            let mut taps = Vec::with_capacity(k * k);
            for a in 0..k {
                for b in 0..k {
                    let (r, c) = grid.sample(row, col, a, b);
                    taps.push(num_array(&[r, c]));
                }
            }
            pixels.push(J::Arr(taps));
        }
    }
    let doc = J::Obj(vec![
        ("width", J::Int(width as i64)),
        ("height", J::Int(height as i64)),
        ("k", J::Int(k as i64)),
        ("samples", J::Arr(pixels)),
    ]);
    write_bytes(out, json::render(&doc).as_bytes())
}

#[derive(Debug)]
enum ImageFormat {
    Radiance,
    Pfm,
}

fn image_format(path: &Path) -> Result<ImageFormat, CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("hdr") => Ok(ImageFormat::Radiance),
        Some(e) if e.eq_ignore_ascii_case("pfm") => Ok(ImageFormat::Pfm),
        _ => Err(CliError::Usage(format!(
            "{}: image files must end in .hdr or .pfm",
            path.display()
        ))),
    }
}

fn read_image(path: &Path) -> Result<Panorama, CliError> {
    let format = image_format(path)?;
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let decoded = match format {
        ImageFormat::Radiance => read_radiance_hdr(&bytes),
        ImageFormat::Pfm => read_pfm(&bytes),
    };
    decoded.map_err(CliError::from)
}

fn write_image(path: &Path, map: &Panorama) -> Result<(), CliError> {
    let bytes = match image_format(path)? {
        ImageFormat::Radiance => write_radiance_hdr(map),
        ImageFormat::Pfm => write_pfm(map),
    }?;
    write_bytes(path, &bytes)
}

fn load_params(path: &Path) -> Result<IlluminationParams, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    json::parse_params(&bytes).map_err(|msg| CliError::file(path, msg))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn preview_bytes(map: &Panorama, exposure: f64) -> Vec<u8> {
    let mut data = Vec::with_capacity(map.width() * map.height() * 3);
    for px in map.pixels() {
        for channel in px {
            let v = (channel * exposure).clamp(0.0, 1.0).powf(1.0 / 2.2);
            data.push((v * 255.0).round() as u8);
        }
    }
    data
}

fn write_preview(path: &Path, map: &Panorama, exposure: f64) -> Result<(), CliError> {
    let data = preview_bytes(map, exposure);
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut encoder = png::Encoder::new(
        std::io::BufWriter::new(file),
        map.width() as u32,
        map.height() as u32,
    );
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| CliError::file(path, e.to_string()))?;
    writer
        .write_image_data(&data)
        .map_err(|e| CliError::file(path, e.to_string()))?;
    Ok(())
}
