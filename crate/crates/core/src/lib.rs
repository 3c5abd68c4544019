//! Model-based multiplicative detail extraction for images: an edge-aware
//! weighted-least-squares objective over log-domain gradients, solved
//! exactly (dense reference) or by a fast separable approximation, plus
//! detail enhancement, classical additive baselines, fidelity metrics, and
//! LR/HR pair preparation for super-resolution training.

pub mod baselines;
pub mod color;
pub mod dataset;
pub mod dpln;
pub mod error;
pub mod metrics;
pub mod plane;
pub mod prior;
pub mod raster;
pub mod resize;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use plane::Plane;
pub use prior::{enhance, extract_detail, extract_detail_exact, DetailLayer, EnhancementConfig};
pub use raster::{load_image, mod_crop, save_image, RasterImage};
pub use solver::SolverParams;
