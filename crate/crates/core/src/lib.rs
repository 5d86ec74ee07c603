// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bspline;
pub mod bspline_fourier;
pub mod divdiff;
pub mod kernels;
pub mod numerics;
pub mod pdf;
pub mod polys;
pub mod special;
pub mod summability;
pub mod torus;
pub mod verify;
