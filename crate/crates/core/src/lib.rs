//! Image watermarking in the singular-vector domain.
//!
//! A watermark `W` is hidden in a host `Z` of the same size by adding its
//! scaled right singular vectors to the host's: `Z_c = A_z·(V_z + λ·V_w)ᵀ`
//! with `A = U·D`. Extraction is non-blind and exact up to rounding given
//! the key `(λ, A_z, V_z, A_w)`.
//!
//! Modules:
//! * [`svd`]: one-sided Jacobi thin SVD and principal components,
//! * [`watermark`]: gray and RGB embed/extract, keys,
//! * [`keyfile`]: the `SVMK` key format,
//! * [`attacks`]: Gaussian noise, cropping, simulated JPEG,
//! * [`metrics`]: RMSE, PSNR, NCC,
//! * [`imageio`]: PGM/PPM and lossless `F64M`,
//! * [`bench`]: CSV sweeps over λ and attacks.

pub mod attacks;
pub mod bench;
pub mod error;
pub mod imageio;
pub mod keyfile;
pub mod matrix;
pub mod metrics;
pub mod svd;
pub mod testimages;
pub mod watermark;

pub use error::{Error, ErrorClass, Result};
pub use matrix::ImageMatrix;
pub use svd::{gram_diagonal, invert_principal, principal_components, thin_svd, PrincipalComponents, ThinSvd};
pub use watermark::{
    embed, embed_color, embed_gray, extract, extract_color, extract_gray, geometry_normalize, ChannelKey,
    EmbedParams, WatermarkKey,
};
