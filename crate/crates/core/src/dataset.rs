//! Degradation and LR/HR pair preparation: writes HR/LR PNGs plus the
//! detail layers of both, with a JSON manifest a trainer can consume.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::color::{rgb_to_ycbcr, ycbcr_to_rgb};
use crate::dpln;
use crate::error::{Error, Result};
use crate::prior::extract_detail;
use crate::raster::{load_image, mod_crop, save_image, RasterImage};
use crate::resize::bicubic_resize;
use crate::solver::SolverParams;

/// Antialiased bicubic downscale by exactly 1/scale per axis. Dimensions
/// must already be divisible by the scale (mod_crop first).
pub fn degrade(hr: &RasterImage, scale: usize) -> Result<RasterImage> {
    if scale < 2 {
        return Err(Error::InvalidParameter("scale must be >= 2".into()));
    }
    if hr.width() % scale != 0 || hr.height() % scale != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} not divisible by scale {}",
            hr.width(),
            hr.height(),
            scale
        )));
    }
    let (ow, oh) = (hr.width() / scale, hr.height() / scale);
    if hr.channels() == 1 {
        let y = hr.channel_plane(0);
        let down = bicubic_resize(&y, ow, oh)?;
        RasterImage::from_plane(&down)
    } else {
        // resample in YCbCr so the luminance path matches plane resizing
        let (y, cb, cr) = rgb_to_ycbcr(hr)?;
        let yd = bicubic_resize(&y, ow, oh)?;
        let cbd = bicubic_resize(&cb, ow, oh)?;
        let crd = bicubic_resize(&cr, ow, oh)?;
        ycbcr_to_rgb(&yd, &cbd, &crd)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PairEntry {
    pub hr_path: String,
    pub lr_path: String,
    pub hr_detail_path: String,
    pub lr_detail_path: String,
    pub width: usize,
    pub height: usize,
    pub scale: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifestParams {
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub iterations: usize,
}

impl From<&SolverParams> for ManifestParams {
    fn from(p: &SolverParams) -> Self {
        Self {
            alpha: p.alpha,
            lambda: p.lambda,
            gamma: p.gamma,
            epsilon: p.epsilon,
            iterations: p.iterations,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PairManifest {
    pub entries: Vec<PairEntry>,
    pub params: ManifestParams,
    pub scale: usize,
}

/// One skipped input: path plus the load/processing error text.
#[derive(Debug)]
pub struct PairFailure {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug)]
pub struct PairReport {
    pub manifest: PairManifest,
    pub failures: Vec<PairFailure>,
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("png" | "PNG" | "ppm" | "pgm" | "PPM" | "PGM")
    )
}

/// Processes every loadable image in `input_dir` (lexicographic order):
/// mod-crop, write HR, degrade to LR, extract both detail layers, write
/// DPLN files, and emit manifest.json. Per-file failures are collected,
/// not fatal; an empty or fully-failing directory is an error.
pub fn prepare_pairs(
    input_dir: impl AsRef<Path>,
    output_dir: impl AsRef<Path>,
    scale: usize,
    params: &SolverParams,
) -> Result<PairReport> {
    let input_dir = input_dir.as_ref();
    let output_dir = output_dir.as_ref();
    params.validate()?;
    if scale < 2 {
        return Err(Error::InvalidParameter("scale must be >= 2".into()));
    }

    let mut candidates: Vec<PathBuf> = std::fs::read_dir(input_dir)
        .map_err(|source| Error::Unreadable {
            path: input_dir.into(),
            source,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image_file(p))
        .collect();
    candidates.sort();
    if candidates.is_empty() {
        return Err(Error::EmptyInputDir {
            path: input_dir.into(),
        });
    }

    for sub in ["HR", "LR", "HR_detail", "LR_detail"] {
        std::fs::create_dir_all(output_dir.join(sub)).map_err(|source| Error::WriteFailed {
            path: output_dir.join(sub),
            source,
        })?;
    }

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for path in &candidates {
        match process_one(path, output_dir, scale, params) {
            Ok(entry) => entries.push(entry),
            Err(e) => failures.push(PairFailure {
                path: path.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptyInputDir {
            path: input_dir.into(),
        });
    }

    let manifest = PairManifest {
        entries,
        params: params.into(),
        scale,
    };
    let manifest_path = output_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, json).map_err(|source| Error::WriteFailed {
        path: manifest_path,
        source,
    })?;
    Ok(PairReport { manifest, failures })
}

fn process_one(
    path: &Path,
    output_dir: &Path,
    scale: usize,
    params: &SolverParams,
) -> Result<PairEntry> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::InvalidParameter(format!("bad file name: {}", path.display())))?;
    let image = load_image(path)?;
    let hr = mod_crop(&image, scale)?;
    let lr = degrade(&hr, scale)?;
    let hr_detail = extract_detail(&hr, params)?;
    let lr_detail = extract_detail(&lr, params)?;

    let hr_rel = format!("HR/{stem}.png");
    let lr_rel = format!("LR/{stem}.png");
    let hr_detail_rel = format!("HR_detail/{stem}.dpln");
    let lr_detail_rel = format!("LR_detail/{stem}.dpln");
    save_image(&hr, output_dir.join(&hr_rel))?;
    save_image(&lr, output_dir.join(&lr_rel))?;
    dpln::save_plane(hr_detail.values(), output_dir.join(&hr_detail_rel))?;
    dpln::save_plane(lr_detail.values(), output_dir.join(&lr_detail_rel))?;

    Ok(PairEntry {
        hr_path: hr_rel,
        lr_path: lr_rel,
        hr_detail_path: hr_detail_rel,
        lr_detail_path: lr_detail_rel,
        width: hr.width(),
        height: hr.height(),
        scale,
    })
}
