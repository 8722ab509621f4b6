//! Pseudospectral tools for the periodic operator `(-Δ+m²)^s - m^{2s}` on
//! the N-torus: exact Fourier multipliers, the Bessel profile that extends
//! each mode to the half-cylinder, and a linking-type minimax solver for
//! `[(-Δ+m²)^s - m^{2s}]u = f(x,u)` with continuation to `m = 0`.

pub mod bessel;
pub mod cli;
pub mod continuation;
pub mod energy;
pub mod extension;
pub mod linking;
pub mod nonlinearity;
pub mod quadrature;
pub mod spectral;
