//! C ABI for `svmark`.
//!
//! Images and keys cross the boundary as opaque handles owned by the caller
//! and released with the matching `_free` function. Every fallible call
//! returns an [`SvmStatus`]; on failure a description is available from
//! [`svm_last_error_message`] on the same thread.
//!
//! Pixel buffers are planar: channel-major, then row-major within a channel.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use svmark::attacks::{AttackSpec, Rect};
use svmark::imageio::{self, PixelFormat};
use svmark::metrics::{self, PsnrMode};
use svmark::{keyfile, EmbedParams, Error, ImageMatrix, WatermarkKey};

/// Result codes. `SVM_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvmStatus {
    SvmOk = 0,
    SvmNullPointer = 1,
    SvmInvalidArgument = 2,
    SvmDimension = 3,
    SvmSingular = 4,
    SvmNoConvergence = 5,
    SvmFormat = 6,
    SvmIo = 7,
    SvmPanic = 8,
}

/// An image of one (gray) or three (R, G, B) channels.
pub struct SvmImage {
    channels: Vec<ImageMatrix>,
}

/// Extraction key produced by [`svm_embed`].
pub struct SvmKey {
    key: WatermarkKey,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SvmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Dimension(_) | Error::ChannelCount { .. } => SvmStatus::SvmDimension,
            Error::Singular { .. } => SvmStatus::SvmSingular,
            Error::NoConvergence { .. } => SvmStatus::SvmNoConvergence,
            Error::Format(_) => SvmStatus::SvmFormat,
            Error::Io(_) => SvmStatus::SvmIo,
            _ => SvmStatus::SvmInvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SvmStatus::SvmNullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SvmStatus::SvmInvalidArgument, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Run `f`, recording any error or panic for `svm_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SvmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SvmStatus::SvmOk
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            SvmStatus::SvmPanic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn image(channels: Vec<ImageMatrix>) -> SvmImage {
    SvmImage { channels }
}

/// Create an image from `channels · rows · cols` planar values.
///
/// # Safety
/// `data` must point to that many readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn svm_image_new(
    channels: usize,
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut SvmImage,
) -> SvmStatus {
    guard(|| {
        if channels != 1 && channels != 3 {
            return Err(invalid(format!("channel count {channels}, expected 1 or 3")));
        }
        if data.is_null() {
            return Err(null("data"));
        }
        let plane = rows.checked_mul(cols).ok_or_else(|| invalid("image size overflows"))?;
        let total = plane.checked_mul(channels).ok_or_else(|| invalid("image size overflows"))?;
        let values = std::slice::from_raw_parts(data, total);
        let planes = values
            .chunks_exact(plane.max(1))
            .take(channels)
            .map(|c| ImageMatrix::from_vec(rows, cols, c.to_vec()))
            .collect::<svmark::Result<Vec<_>>>()?;
        write_out(out, image(planes))
    })
}

/// # Safety
/// `img` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn svm_image_free(img: *mut SvmImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Number of channels, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn svm_image_channels(img: *const SvmImage) -> usize {
    img.as_ref().map_or(0, |i| i.channels.len())
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn svm_image_rows(img: *const SvmImage) -> usize {
    img.as_ref().map_or(0, |i| i.channels[0].rows())
}

/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn svm_image_cols(img: *const SvmImage) -> usize {
    img.as_ref().map_or(0, |i| i.channels[0].cols())
}

/// Copy the planar pixel data into `out`, which holds `len` doubles.
///
/// # Safety
/// `img` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn svm_image_copy_data(img: *const SvmImage, out: *mut f64, len: usize) -> SvmStatus {
    guard(|| {
        let img = deref(img, "image")?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        let needed: usize = img.channels.iter().map(|c| c.as_slice().len()).sum();
        if len < needed {
            return Err(invalid(format!("buffer holds {len} values, image has {needed}")));
        }
        let dst = std::slice::from_raw_parts_mut(out, needed);
        for (chunk, c) in dst.chunks_exact_mut(needed / img.channels.len()).zip(&img.channels) {
            chunk.copy_from_slice(c.as_slice());
        }
        Ok(())
    })
}

/// Load a PGM, PPM or F64M file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn svm_image_load(path: *const c_char, out: *mut *mut SvmImage) -> SvmStatus {
    guard(|| {
        let loaded = imageio::load(path_arg(path)?)?;
        write_out(out, image(loaded.channels))
    })
}

/// Save an image; the format follows the extension (.pgm, .ppm, .f64m).
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn svm_image_save(img: *const SvmImage, path: *const c_char) -> SvmStatus {
    guard(|| {
        let img = deref(img, "image")?;
        let path = path_arg(path)?;
        let format = PixelFormat::from_path(&path)
            .ok_or_else(|| invalid(format!("{}: unknown image extension", path.display())))?;
        Ok(imageio::save(&img.channels, format, &path)?)
    })
}

/// Embed `mark` into `host` with strength `lambda`.
///
/// # Safety
/// `host` and `mark` must be live handles; `out_marked` and `out_key` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_embed(
    host: *const SvmImage,
    mark: *const SvmImage,
    lambda: f64,
    out_marked: *mut *mut SvmImage,
    out_key: *mut *mut SvmKey,
) -> SvmStatus {
    guard(|| {
        let (host, mark) = (deref(host, "host")?, deref(mark, "mark")?);
        if out_marked.is_null() || out_key.is_null() {
            return Err(null("output pointer"));
        }
        let (marked, key) = svmark::embed(&host.channels, &mark.channels, EmbedParams::new(lambda)?)?;
        write_out(out_marked, image(marked))?;
        write_out(out_key, SvmKey { key })
    })
}

/// Recover the watermark from `suspect`.
///
/// # Safety
/// `suspect` and `key` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_extract(
    suspect: *const SvmImage,
    key: *const SvmKey,
    out: *mut *mut SvmImage,
) -> SvmStatus {
    guard(|| {
        let (suspect, key) = (deref(suspect, "suspect")?, deref(key, "key")?);
        let recovered = svmark::extract(&suspect.channels, &key.key)?;
        write_out(out, image(recovered))
    })
}

/// # Safety
/// `key` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn svm_key_free(key: *mut SvmKey) {
    if !key.is_null() {
        drop(Box::from_raw(key));
    }
}

/// Embedding strength recorded in the key, or NaN for a null handle.
///
/// # Safety
/// `key` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn svm_key_lambda(key: *const SvmKey) -> f64 {
    key.as_ref().map_or(f64::NAN, |k| k.key.lambda())
}

/// # Safety
/// `key` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn svm_key_save(key: *const SvmKey, path: *const c_char) -> SvmStatus {
    guard(|| {
        let key = deref(key, "key")?;
        Ok(keyfile::save_key(&key.key, path_arg(path)?)?)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn svm_key_load(path: *const c_char, out: *mut *mut SvmKey) -> SvmStatus {
    guard(|| {
        let key = keyfile::load_key(path_arg(path)?)?;
        write_out(out, SvmKey { key })
    })
}

unsafe fn attack(img: *const SvmImage, spec: AttackSpec, out: *mut *mut SvmImage) -> SvmStatus {
    guard(|| {
        let img = deref(img, "image")?;
        spec.validate()?;
        write_out(out, image(spec.apply_channels(&img.channels)?))
    })
}

/// Additive Gaussian noise with standard deviation `sigma`, clamped to [0, 1].
///
/// # Safety
/// `img` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_attack_noise(
    img: *const SvmImage,
    sigma: f64,
    seed: u64,
    out: *mut *mut SvmImage,
) -> SvmStatus {
    attack(img, AttackSpec::Noise { sigma, seed }, out)
}

/// Zero the rectangle with top-left corner (`x`, `y`).
///
/// # Safety
/// `img` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_attack_crop(
    img: *const SvmImage,
    x: usize,
    y: usize,
    width: usize,
    height: usize,
    out: *mut *mut SvmImage,
) -> SvmStatus {
    attack(img, AttackSpec::Crop(Rect::new(x, y, width, height)), out)
}

/// Simulated baseline JPEG at `quality` in 1..=100.
///
/// # Safety
/// `img` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_attack_jpeg(img: *const SvmImage, quality: i32, out: *mut *mut SvmImage) -> SvmStatus {
    match u8::try_from(quality) {
        Ok(quality) => attack(img, AttackSpec::Jpeg { quality }, out),
        Err(_) => guard(|| Err(invalid(format!("JPEG quality {quality} out of range")))),
    }
}

unsafe fn metric(
    a: *const SvmImage,
    b: *const SvmImage,
    out: *mut f64,
    f: impl FnOnce(&ImageMatrix, &ImageMatrix) -> svmark::Result<f64>,
) -> SvmStatus {
    guard(|| {
        let (a, b) = (deref(a, "reference")?, deref(b, "test")?);
        if out.is_null() {
            return Err(null("output pointer"));
        }
        if a.channels.len() != b.channels.len() {
            return Err(Error::ChannelCount { expected: a.channels.len(), actual: b.channels.len() }.into());
        }
        let (a, b) = (ImageMatrix::vstack(&a.channels)?, ImageMatrix::vstack(&b.channels)?);
        *out = f(&a, &b)?;
        Ok(())
    })
}

/// Root-mean-square difference over all channels.
///
/// # Safety
/// `a` and `b` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_rmse(a: *const SvmImage, b: *const SvmImage, out: *mut f64) -> SvmStatus {
    metric(a, b, out, metrics::rmse)
}

/// PSNR in dB. With `conventional` non-zero the peak is 1 instead of the
/// reference maximum.
///
/// # Safety
/// `reference` and `test` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_psnr(
    reference: *const SvmImage,
    test: *const SvmImage,
    conventional: i32,
    out: *mut f64,
) -> SvmStatus {
    let mode = if conventional != 0 { PsnrMode::Conventional } else { PsnrMode::ReferenceMax };
    metric(reference, test, out, |a, b| metrics::psnr_with(a, b, mode))
}

/// Zero-mean normalized cross-correlation.
///
/// # Safety
/// `a` and `b` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn svm_ncc(a: *const SvmImage, b: *const SvmImage, out: *mut f64) -> SvmStatus {
    metric(a, b, out, metrics::ncc)
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn svm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn svm_status_string(status: SvmStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SvmStatus::SvmOk => c"ok",
        SvmStatus::SvmNullPointer => c"null pointer",
        SvmStatus::SvmInvalidArgument => c"invalid argument",
        SvmStatus::SvmDimension => c"dimension mismatch",
        SvmStatus::SvmSingular => c"singular host image",
        SvmStatus::SvmNoConvergence => c"SVD did not converge",
        SvmStatus::SvmFormat => c"malformed file",
        SvmStatus::SvmIo => c"I/O error",
        SvmStatus::SvmPanic => c"internal panic",
    };
    s.as_ptr()
}
