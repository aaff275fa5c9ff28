#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod halfdisk_zeta;
pub mod quadrature;
pub mod specfun;
pub mod sector;
pub mod spectra;
pub mod conformal;
pub mod corner;
