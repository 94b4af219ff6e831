//! Fourier-space quantum state tomography and purity estimation of N-qubit
//! states from randomized single-axis X/Y Bloch rotations.
//!
//! Each qubit is driven by a single constant-phase pulse detuned from its
//! frequency, producing a rotation about a fixed Bloch axis at the generalized
//! Rabi frequency `lambda = sqrt(g^2 + nu^2)`. Sampling the per-qubit rotation
//! times uniformly and measuring in the lab Z basis turns state reconstruction
//! into a Fourier-component extraction problem: an explicit inverse map
//! contracts the observed bitstring frequencies back into density-matrix
//! elements, and averaging over rotation times isolates the zero-frequency
//! component exactly.
//!
//! The crate provides:
//!
//! - [`qstate`]: dense density matrices, Haar sampling, and the three random
//!   density-matrix generators used to build test ensembles.
//! - [`drive`]: drive parameters, rotation unitaries, and the forward
//!   measurement map.
//! - [`recon`]: the inverse map, harmonic (Fourier-polynomial) bookkeeping,
//!   exact infinite- and finite-window averaging, and the per-rotation
//!   observable.
//! - [`sampler`]: a seeded, schedule-independent Monte-Carlo measurement
//!   pipeline.
//! - [`tomography`] and [`purity`]: the estimators together with their full
//!   variance analytics (per-unitary and per-shot components, amortized
//!   scaling predictions, sweet-spot behavior).
//! - [`limited`]: the single-global-drive variant, including the smallest
//!   linear frequency combination search and finite-window bias analysis.
//! - [`oracle`]: independent brute-force cross-checks (dense matrix products,
//!   numerical quadrature, linear-system inversion, variance regression).
//! - [`cli`]: the experiment harness behind the `xytomo` binary.
//!
//! Start with the `examples/` directory: each example is a runnable walk
//! through one capability, from state generation to variance-scaling sweeps.

#![forbid(unsafe_code)]

pub mod cli;
pub mod drive;
pub mod error;
pub mod limited;
pub mod linalg;
pub mod oracle;
pub mod purity;
pub mod qstate;
pub mod recon;
pub mod sampler;
pub mod stats;
pub mod tomography;

pub use error::{Error, Result};
pub use qstate::{BasisIndex, DensityMatrix, PureState, QubitCount};
