//! Symbols on the circle and the kernels built from them.

mod grid;
mod io;
mod kernel;
mod symbol;

pub use grid::{build_grid_kernel, Grid, GridModel};
pub use io::{read_kernel, write_kernel};
pub use kernel::{
    build_toeplitz_kernel, eigendecompose, reconstruction_error, KernelMatrix, Labels, Spectrum, MAX_WINDOW,
    SPECTRUM_SLACK,
};
pub use symbol::{Symbol, SymbolKind, SYMBOL_EPS};

use crate::error::Result;
use crate::linalg::C64;

/// `f̂(k)` under `f̂(k) = (1/2π)∫ f e^{-ikx} dx`.
pub fn fourier_coefficient(symbol: &Symbol, k: i64) -> Result<C64> {
    symbol.fourier_coefficient(k)
}
