//! Wavelet transforms (1D, separable 2D, real and complex dual-tree) and a
//! gradient-based learner for dual-tree filters.

pub mod diag;
pub mod dualtree;
pub mod dwt1d;
pub mod dwt2d;
pub mod error;
pub mod filter;
pub mod fixtures;
pub mod io;
pub mod learn;
pub mod multirate;
pub mod signal;

#[doc(hidden)]
pub mod cli;

pub use dualtree::{
    dtcwt1d_forward, dtcwt1d_inverse, dtcwt2d_complex_forward, dtcwt2d_complex_inverse,
    dtcwt2d_real_forward, dtcwt2d_real_inverse, ComplexBand, DualTreePyramid1D,
    DualTreePyramidComplex2D, DualTreePyramidReal2D, Variant,
};
pub use dwt1d::{dwt1d_forward, dwt1d_inverse, undecimated_detail, Pyramid1D};
pub use dwt2d::{dwt2d_forward, dwt2d_inverse, reconstruct_single_level, tile_coefficients, Pyramid2D};
pub use error::{Error, Result};
pub use filter::{derive_qshift_partner, derive_wavelet_filter, DualTreeFilterSet, Filter, Tree};
pub use multirate::{circular_convolve_decimate, quantize_uniform, upsample_convolve_accumulate};
pub use signal::{Image, Signal};
