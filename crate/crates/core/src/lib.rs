//! Ground-state overlap determinants of a free Fermi gas and its
//! δ-perturbed counterpart in a finite ball.
//!
//! Only the s-wave channel differs between the two Hamiltonians, so the
//! overlap `|S_L^N|²` reduces to an `N × N` determinant of one-dimensional
//! eigenfunction overlaps on `(0, L)`. The crate evaluates it three ways
//! (dense determinant, eigenvalue-only product, trace series), checks the
//! underlying rank-one identities on random matrices, and measures the
//! algebraic decay `|S_L^N|² ≈ L^{-ζ(E)}` in the thermodynamic limit.
//!
//! ```
//! use deltaoverlap::asymptotics::{fit_exponent, sweep, SweepSettings};
//! use deltaoverlap::overlap_engine::{overlap_direct, overlap_product};
//! use deltaoverlap::DeltaModel;
//!
//! let model = DeltaModel::new(0.02, 100.0, 1.0)?; // alpha, L, E
//! let n = model.default_particles()?;
//! let direct = overlap_direct(&model, n)?;
//! let product = overlap_product(&model, n, 40 * n)?;
//! assert!((direct.log_overlap_sq - product.log_overlap_sq).abs() <= product.tail_bound + 1e-6);
//!
//! let lengths = [100.0, 200.0, 400.0, 800.0];
//! let records = sweep(1.0, 0.02, &lengths, &SweepSettings::default())?;
//! let report = fit_exponent(&records, 1.0, 0.02)?;
//! assert!(report.relative_error() < 0.15);
//! # Ok::<(), deltaoverlap::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod quad;
pub mod roots;

pub mod asymptotics;
pub mod cli;
pub mod delta_model;
pub mod product;
pub mod rank1_lab;
pub mod overlap_engine;
pub mod trace_series;

pub use delta_model::{DeltaBox, DeltaModel, ModeSpectrum};
pub use error::{Error, Result};
pub use product::{Interlaced, Orientation, SpectrumPair};
