//! C ABI for the detailprior library. Handles are opaque pointers owned by
//! the library; every fallible call returns a status code and the last
//! error message is retrievable per thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_uint, CStr, CString};
use std::path::PathBuf;

use detailprior::metrics::{sparsity_stats, SparsityMode};
use detailprior::prior::{enhance, extract_detail, DetailLayer, EnhancementConfig};
use detailprior::{dpln, load_image, save_image, Error, RasterImage, SolverParams};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpStatus {
    DpOk = 0,
    DpErrNullArgument = 1,
    DpErrInvalidUtf8 = 2,
    DpErrIo = 3,
    DpErrFormat = 4,
    DpErrInvalidParameter = 5,
    DpErrDimensionMismatch = 6,
    DpErrTooSmall = 7,
    DpErrTooLarge = 8,
    DpErrInternal = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn status_for(err: &Error) -> DpStatus {
    match err {
        Error::Unreadable { .. } | Error::WriteFailed { .. } => DpStatus::DpErrIo,
        Error::UnsupportedFormat { .. } | Error::CorruptData { .. } => DpStatus::DpErrFormat,
        Error::InvalidParameter(_) | Error::EmptyInputDir { .. } => {
            DpStatus::DpErrInvalidParameter
        }
        Error::ChannelMismatch { .. } | Error::DimensionMismatch(_) => {
            DpStatus::DpErrDimensionMismatch
        }
        Error::ImageTooSmall { .. } => DpStatus::DpErrTooSmall,
        Error::PlaneTooLarge { .. } => DpStatus::DpErrTooLarge,
        Error::InvariantBreach(_) => DpStatus::DpErrInternal,
    }
}

fn fail(err: Error) -> DpStatus {
    set_error(&err.to_string());
    status_for(&err)
}

/// Message for the most recent error on the calling thread. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque image handle.
pub struct DpImage(RasterImage);

/// Opaque detail-layer handle.
pub struct DpDetail(DetailLayer);

/// Extraction parameters, plain-old-data across the ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DpSolverParams {
    pub alpha: c_double,
    pub lambda: c_double,
    pub gamma: c_double,
    pub epsilon: c_double,
    pub iterations: c_uint,
}

impl From<DpSolverParams> for SolverParams {
    fn from(p: DpSolverParams) -> Self {
        SolverParams {
            alpha: p.alpha,
            lambda: p.lambda,
            gamma: p.gamma,
            epsilon: p.epsilon,
            iterations: p.iterations as usize,
        }
    }
}

/// The default extraction parameters.
#[no_mangle]
pub extern "C" fn dp_params_default() -> DpSolverParams {
    let p = SolverParams::default();
    DpSolverParams {
        alpha: p.alpha,
        lambda: p.lambda,
        gamma: p.gamma,
        epsilon: p.epsilon,
        iterations: p.iterations as c_uint,
    }
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, DpStatus> {
    if ptr.is_null() {
        set_error("null path");
        return Err(DpStatus::DpErrNullArgument);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(DpStatus::DpErrInvalidUtf8)
        }
    }
}

/// Loads a PNG or binary PPM/PGM image. On success `*out` owns the handle;
/// release it with `dp_image_free`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dp_image_load(
    path: *const c_char,
    out: *mut *mut DpImage,
) -> DpStatus {
    if out.is_null() {
        set_error("null output handle");
        return DpStatus::DpErrNullArgument;
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match load_image(&path) {
        Ok(img) => {
            *out = Box::into_raw(Box::new(DpImage(img)));
            DpStatus::DpOk
        }
        Err(e) => fail(e),
    }
}

/// Writes an image as an 8-bit PNG.
///
/// # Safety
/// `image` must be a live handle from this library; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dp_image_save(image: *const DpImage, path: *const c_char) -> DpStatus {
    let Some(image) = image.as_ref() else {
        set_error("null image handle");
        return DpStatus::DpErrNullArgument;
    };
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match save_image(&image.0, &path) {
        Ok(()) => DpStatus::DpOk,
        Err(e) => fail(e),
    }
}

/// # Safety
/// `image` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dp_image_free(image: *mut DpImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

#[no_mangle]
pub extern "C" fn dp_image_width(image: *const DpImage) -> c_uint {
    unsafe { image.as_ref().map_or(0, |i| i.0.width() as c_uint) }
}

#[no_mangle]
pub extern "C" fn dp_image_height(image: *const DpImage) -> c_uint {
    unsafe { image.as_ref().map_or(0, |i| i.0.height() as c_uint) }
}

#[no_mangle]
pub extern "C" fn dp_image_channels(image: *const DpImage) -> c_uint {
    unsafe { image.as_ref().map_or(0, |i| i.0.channels() as c_uint) }
}

/// Extracts the multiplicative detail layer with the fast solver.
///
/// # Safety
/// `image` must be a live handle; `params` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dp_detail_extract(
    image: *const DpImage,
    params: *const DpSolverParams,
    out: *mut *mut DpDetail,
) -> DpStatus {
    let Some(image) = image.as_ref() else {
        set_error("null image handle");
        return DpStatus::DpErrNullArgument;
    };
    if params.is_null() || out.is_null() {
        set_error("null params or output handle");
        return DpStatus::DpErrNullArgument;
    }
    let params: SolverParams = (*params).into();
    match extract_detail(&image.0, &params) {
        Ok(detail) => {
            *out = Box::into_raw(Box::new(DpDetail(detail)));
            DpStatus::DpOk
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `detail` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dp_detail_free(detail: *mut DpDetail) {
    if !detail.is_null() {
        drop(Box::from_raw(detail));
    }
}

#[no_mangle]
pub extern "C" fn dp_detail_width(detail: *const DpDetail) -> c_uint {
    unsafe { detail.as_ref().map_or(0, |d| d.0.width() as c_uint) }
}

#[no_mangle]
pub extern "C" fn dp_detail_height(detail: *const DpDetail) -> c_uint {
    unsafe { detail.as_ref().map_or(0, |d| d.0.height() as c_uint) }
}

/// Saves a detail layer in the DPLN plane format.
///
/// # Safety
/// `detail` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dp_detail_save(detail: *const DpDetail, path: *const c_char) -> DpStatus {
    let Some(detail) = detail.as_ref() else {
        set_error("null detail handle");
        return DpStatus::DpErrNullArgument;
    };
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match dpln::save_plane(detail.0.values(), &path) {
        Ok(()) => DpStatus::DpOk,
        Err(e) => fail(e),
    }
}

/// Loads a detail layer from a DPLN file (entries must be positive).
///
/// # Safety
/// `path` must be NUL-terminated; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dp_detail_load(
    path: *const c_char,
    out: *mut *mut DpDetail,
) -> DpStatus {
    if out.is_null() {
        set_error("null output handle");
        return DpStatus::DpErrNullArgument;
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let plane = match dpln::load_plane(&path) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match DetailLayer::from_plane(plane, SolverParams::default()) {
        Ok(detail) => {
            *out = Box::into_raw(Box::new(DpDetail(detail)));
            DpStatus::DpOk
        }
        Err(e) => fail(e),
    }
}

/// Enhances an image by the detail layer: Y' = Y * detail^gain.
///
/// # Safety
/// `image` and `detail` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dp_enhance(
    image: *const DpImage,
    detail: *const DpDetail,
    gain: c_double,
    out: *mut *mut DpImage,
) -> DpStatus {
    let (Some(image), Some(detail)) = (image.as_ref(), detail.as_ref()) else {
        set_error("null image or detail handle");
        return DpStatus::DpErrNullArgument;
    };
    if out.is_null() {
        set_error("null output handle");
        return DpStatus::DpErrNullArgument;
    }
    match enhance(&image.0, &detail.0, &EnhancementConfig { gain }) {
        Ok(enhanced) => {
            *out = Box::into_raw(Box::new(DpImage(enhanced)));
            DpStatus::DpOk
        }
        Err(e) => fail(e),
    }
}

/// Sparsity statistics of a detail layer (|log2 detail| magnitudes).
///
/// # Safety
/// `detail` must be a live handle; out-pointers valid or null.
#[no_mangle]
pub unsafe extern "C" fn dp_detail_sparsity(
    detail: *const DpDetail,
    threshold: c_double,
    l1_mean: *mut c_double,
    near_zero_fraction: *mut c_double,
) -> DpStatus {
    let Some(detail) = detail.as_ref() else {
        set_error("null detail handle");
        return DpStatus::DpErrNullArgument;
    };
    match sparsity_stats(detail.0.values(), SparsityMode::Multiplicative, threshold) {
        Ok(stats) => {
            if !l1_mean.is_null() {
                *l1_mean = stats.l1_mean;
            }
            if !near_zero_fraction.is_null() {
                *near_zero_fraction = stats.near_zero_fraction;
            }
            DpStatus::DpOk
        }
        Err(e) => fail(e),
    }
}
