use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use detailprior::baselines::{
    additive_decompose, BaselineParams, GuidedFilterParams, WlsSmoothParams,
};
use detailprior::color::luminance;
use detailprior::dataset::{degrade, prepare_pairs};
use detailprior::dpln;
use detailprior::metrics::{psnr, sparsity_stats, ssim, SparsityMode};
use detailprior::prior::{
    enhance, extract_detail, save_detail_visualization, DetailLayer,
    EnhancementConfig,
};
use detailprior::solver::{
    build_vector_field, fidelity_weights, objective_value, solve_dense, solve_fast,
    DENSE_PIXEL_LIMIT,
};
use detailprior::synth::noise_plane;
use detailprior::{load_image, save_image, Plane, RasterImage, SolverParams};

#[derive(Parser)]
#[command(
    name = "detailprior",
    about = "Multiplicative detail extraction, enhancement, baselines, metrics, and SR pair preparation",
    version
)]
struct Cli {
    /// Cap on internal worker threads (default: DETAILPRIOR_THREADS or all cores).
    /// Output is independent of this value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone, Copy)]
struct SolverFlags {
    /// Detail amplification alpha
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Fidelity weight lambda
    #[arg(long = "lambda", default_value_t = 1.0)]
    lambda: f64,
    /// Sensitivity exponent gamma
    #[arg(long, default_value_t = 0.75)]
    gamma: f64,
    /// Noise-exclusion floor epsilon
    #[arg(long = "eps", default_value_t = 2.0)]
    eps: f64,
    /// Alternating-direction iterations T
    #[arg(long = "iters", default_value_t = 4)]
    iters: usize,
}

impl From<SolverFlags> for SolverParams {
    fn from(f: SolverFlags) -> Self {
        SolverParams {
            alpha: f.alpha,
            lambda: f.lambda,
            gamma: f.gamma,
            epsilon: f.eps,
            iterations: f.iters,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Method {
    Gif,
    Msdm,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the multiplicative detail layer to a DPLN file
    Extract {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Also write a normalized 16-bit PNG visualization (with .range sidecar)
        #[arg(long)]
        viz: Option<PathBuf>,
        /// Near-zero magnitude threshold for the printed sparsity stats
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        /// Print stats as JSON
        #[arg(long)]
        json: bool,
    },
    /// Apply a detail layer to an image: Y' = Y * detail^gain
    Enhance {
        input: PathBuf,
        detail: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gain: f64,
    },
    /// Additive baseline decomposition (guided filter or WLS smoothing)
    Decompose {
        input: PathBuf,
        /// Output DPLN for the signed detail plane
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Gif)]
        method: Method,
        /// Guided-filter window radius
        #[arg(long, default_value_t = 2)]
        radius: usize,
        /// Guided-filter regularizer
        #[arg(long = "gif-eps", default_value_t = 0.3)]
        gif_eps: f64,
        /// WLS smoothing weight
        #[arg(long = "msdm-lambda", default_value_t = 1.0)]
        msdm_lambda: f64,
        /// WLS gradient exponent
        #[arg(long = "msdm-alpha", default_value_t = 1.2)]
        msdm_alpha: f64,
        /// Also write the base plane as DPLN
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Bicubic antialiased downscale by 1/scale (dimensions must divide)
    Degrade {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 4)]
        scale: usize,
    },
    /// Prepare (HR, LR, HR_detail, LR_detail) training pairs plus manifest.json
    Prepare {
        input_dir: PathBuf,
        output_dir: PathBuf,
        #[arg(long, default_value_t = 4)]
        scale: usize,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// PSNR (RGB samples) and SSIM (Y plane) between two images
    Metrics {
        reference: PathBuf,
        distorted: PathBuf,
        /// Pixels cropped from every border before computing
        #[arg(long = "crop-border", default_value_t = 4)]
        crop_border: usize,
        #[arg(long)]
        json: bool,
    },
    /// Compare the fast separable solver against the dense reference
    OracleCheck {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Maximum allowed fast/dense objective ratio
        #[arg(long, default_value_t = 1.10)]
        tolerance: f64,
    },
    /// Time the fast solver on synthetic noise planes, printing ns/pixel
    Bench {
        /// Square edge lengths to time
        #[arg(long, value_delimiter = ',', default_values_t = vec![256usize, 512, 1024])]
        sizes: Vec<usize>,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("DETAILPRIOR_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("detailprior: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("detailprior: {e}");
            ExitCode::from(1)
        }
    }
}

/// Writes through a temp file in the target directory, renaming on success,
/// so readers never observe partial output.
fn atomic_write(path: &Path, write: impl FnOnce(&Path) -> detailprior::Result<()>) -> anyhow_free::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| format!("bad output path: {}", path.display()))?;
    let mut tmp_name = std::ffi::OsString::from(".tmp.");
    tmp_name.push(file_name);
    let tmp = path.with_file_name(tmp_name);
    write(&tmp).map_err(|e| e.to_string())?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        format!("cannot finalize {}: {e}", path.display())
    })?;
    Ok(())
}

// small local alias so helpers can mix library and string errors
mod anyhow_free {
    pub type Result<T> = std::result::Result<T, String>;
}

fn save_image_atomic(image: &RasterImage, path: &Path) -> anyhow_free::Result<()> {
    atomic_write(path, |tmp| save_image(image, tmp))
}

fn save_plane_atomic(plane: &Plane, path: &Path) -> anyhow_free::Result<()> {
    atomic_write(path, |tmp| dpln::save_plane(plane, tmp))
}

fn print_sparsity(stats: &detailprior::metrics::SparsityStats, json: bool) {
    if json {
        println!(
            "{}",
            serde_json::json!({
                "l1_mean": stats.l1_mean,
                "near_zero_fraction": stats.near_zero_fraction,
                "threshold": stats.threshold,
            })
        );
    } else {
        println!("l1_mean {}", stats.l1_mean);
        println!("near_zero_fraction {}", stats.near_zero_fraction);
    }
}

fn center_crop_luma(y: &Plane, max_pixels: usize, edge: usize) -> Plane {
    if y.len() <= max_pixels {
        return y.clone();
    }
    let w = edge.min(y.width());
    let h = edge.min(y.height());
    let x0 = (y.width() - w) / 2;
    let y0 = (y.height() - h) / 2;
    let mut out = Plane::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            out.set(i, j, y.get(x0 + i, y0 + j));
        }
    }
    out
}

fn crop_image_border(img: &RasterImage, border: usize) -> detailprior::Result<RasterImage> {
    if border == 0 {
        return Ok(img.clone());
    }
    if img.width() <= 2 * border || img.height() <= 2 * border {
        return Err(detailprior::Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            detail: format!("cannot crop {border}-pixel border"),
        });
    }
    let (w, h, c) = (img.width() - 2 * border, img.height() - 2 * border, img.channels());
    let mut samples = Vec::with_capacity(w * h * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                samples.push(img.sample(x + border, y + border, ch));
            }
        }
    }
    RasterImage::new(w, h, c, samples)
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Extract {
            input,
            output,
            solver,
            viz,
            threshold,
            json,
        } => {
            let image = load_image(&input).map_err(|e| e.to_string())?;
            let params: SolverParams = solver.into();
            let detail = extract_detail(&image, &params).map_err(|e| e.to_string())?;
            save_plane_atomic(detail.values(), &output)?;
            if let Some(viz_path) = viz {
                atomic_write(&viz_path, |tmp| {
                    save_detail_visualization(&detail, tmp)?;
                    // carry the sidecar along with the rename
                    std::fs::rename(
                        tmp.with_extension("range"),
                        viz_path.with_extension("range"),
                    )
                    .map_err(|source| detailprior::Error::WriteFailed {
                        path: viz_path.with_extension("range"),
                        source,
                    })
                })?;
            }
            let stats = sparsity_stats(detail.values(), SparsityMode::Multiplicative, threshold)
                .map_err(|e| e.to_string())?;
            print_sparsity(&stats, json);
            Ok(ExitCode::SUCCESS)
        }
        Command::Enhance {
            input,
            detail,
            output,
            gain,
        } => {
            let image = load_image(&input).map_err(|e| e.to_string())?;
            let plane = dpln::load_plane(&detail).map_err(|e| e.to_string())?;
            let layer = DetailLayer::from_plane(plane, SolverParams::default())
                .map_err(|e| e.to_string())?;
            let out = enhance(&image, &layer, &EnhancementConfig { gain })
                .map_err(|e| e.to_string())?;
            save_image_atomic(&out, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose {
            input,
            output,
            method,
            radius,
            gif_eps,
            msdm_lambda,
            msdm_alpha,
            base,
            threshold,
            json,
        } => {
            let image = load_image(&input).map_err(|e| e.to_string())?;
            let params = match method {
                Method::Gif => BaselineParams::GuidedFilter(GuidedFilterParams {
                    radius,
                    eps: gif_eps,
                }),
                Method::Msdm => BaselineParams::WlsSmooth(WlsSmoothParams {
                    lambda_s: msdm_lambda,
                    alpha_exp: msdm_alpha,
                }),
            };
            let decomposition = additive_decompose(&image, &params).map_err(|e| e.to_string())?;
            save_plane_atomic(&decomposition.detail, &output)?;
            if let Some(base_path) = base {
                save_plane_atomic(&decomposition.base, &base_path)?;
            }
            let stats = sparsity_stats(&decomposition.detail, SparsityMode::Additive, threshold)
                .map_err(|e| e.to_string())?;
            print_sparsity(&stats, json);
            Ok(ExitCode::SUCCESS)
        }
        Command::Degrade {
            input,
            output,
            scale,
        } => {
            let image = load_image(&input).map_err(|e| e.to_string())?;
            let lr = degrade(&image, scale).map_err(|e| e.to_string())?;
            save_image_atomic(&lr, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Prepare {
            input_dir,
            output_dir,
            scale,
            solver,
        } => {
            let params: SolverParams = solver.into();
            let report = prepare_pairs(&input_dir, &output_dir, scale, &params)
                .map_err(|e| e.to_string())?;
            for entry in &report.manifest.entries {
                println!("ok {} {}x{}", entry.hr_path, entry.width, entry.height);
            }
            for failure in &report.failures {
                eprintln!("skipped {}: {}", failure.path.display(), failure.reason);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics {
            reference,
            distorted,
            crop_border,
            json,
        } => {
            let a = load_image(&reference).map_err(|e| e.to_string())?;
            let b = load_image(&distorted).map_err(|e| e.to_string())?;
            let a = crop_image_border(&a, crop_border).map_err(|e| e.to_string())?;
            let b = crop_image_border(&b, crop_border).map_err(|e| e.to_string())?;
            let psnr_rgb = psnr(&a, &b).map_err(|e| e.to_string())?;
            let ssim_y = ssim(&luminance(&a), &luminance(&b)).map_err(|e| e.to_string())?;
            if json {
                let psnr_value = if psnr_rgb.is_infinite() {
                    serde_json::Value::String("inf".into())
                } else {
                    serde_json::json!(psnr_rgb)
                };
                println!(
                    "{}",
                    serde_json::json!({ "psnr_rgb": psnr_value, "ssim_y": ssim_y })
                );
            } else {
                if psnr_rgb.is_infinite() {
                    println!("psnr_rgb inf");
                } else {
                    println!("psnr_rgb {psnr_rgb:.4}");
                }
                println!("ssim_y {ssim_y:.6}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck {
            input,
            solver,
            tolerance,
        } => {
            let image = load_image(&input).map_err(|e| e.to_string())?;
            let params: SolverParams = solver.into();
            let y = center_crop_luma(&luminance(&image), DENSE_PIXEL_LIMIT, 64);
            let field = build_vector_field(&y, params.alpha).map_err(|e| e.to_string())?;
            let weights = fidelity_weights(&field, params.gamma, params.epsilon);
            let fast = solve_fast(&field, &weights, &params).map_err(|e| e.to_string())?;
            let dense = solve_dense(&field, &weights, params.lambda).map_err(|e| e.to_string())?;
            let fast_obj =
                objective_value(&fast, &field, &weights, params.lambda).map_err(|e| e.to_string())?;
            let dense_obj = objective_value(&dense, &field, &weights, params.lambda)
                .map_err(|e| e.to_string())?;
            // a zero field has both objectives 0; the ratio is 1 by convention
            let ratio = if dense_obj == 0.0 {
                1.0
            } else {
                fast_obj / dense_obj
            };
            println!("objective_fast {fast_obj}");
            println!("objective_dense {dense_obj}");
            println!("ratio {ratio}");
            if ratio <= tolerance {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("detailprior: objective ratio {ratio} exceeds tolerance {tolerance}");
                Ok(ExitCode::from(2))
            }
        }
        Command::Bench { sizes, solver } => {
            let params: SolverParams = solver.into();
            for (i, &size) in sizes.iter().enumerate() {
                if size < 16 {
                    return Err(format!("bench size {size} too small (minimum 16)"));
                }
                let y = noise_plane(size, size, 0xbe7c + i as u64);
                let field = build_vector_field(&y, params.alpha).map_err(|e| e.to_string())?;
                let weights = fidelity_weights(&field, params.gamma, params.epsilon);
                // one warmup, then best of five: the minimum is far less
                // sensitive to scheduling noise than a mean or median
                let _ = solve_fast(&field, &weights, &params).map_err(|e| e.to_string())?;
                let mut best = f64::INFINITY;
                for _ in 0..5 {
                    let start = std::time::Instant::now();
                    let _ = solve_fast(&field, &weights, &params).map_err(|e| e.to_string())?;
                    best = best.min(start.elapsed().as_nanos() as f64);
                }
                let ns_per_pixel = best / (size * size) as f64;
                println!("{size} {ns_per_pixel:.2}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
