//! Spectra of real anti-tridiagonal Hankel matrices.
//!
//! The `(n+2)×(n+2)` matrix with stripes `a`, `c`, `b` on its three central
//! anti-diagonals is a rank-two correction of a real anti-circulant matrix
//! whose eigendecomposition is known in closed form. Its eigenvalues are the
//! zeros of a rational secular function with poles at the anti-circulant
//! eigenvalues, plus any of those pole values that survive as eigenvalues;
//! its eigenvectors follow from the same kernels.
//!
//! ```
//! use antihankel::{solve, HankelParams};
//!
//! let params = HankelParams::new(1, 1.0, 2.0, 3.0).unwrap();
//! let result = solve(&params, 1e-12, true).unwrap();
//! assert_eq!(result.pairs.len(), 3);
//! assert!(result.diagnostics.max_residual.unwrap() < 1e-8);
//! ```

pub mod bench;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod secular;
pub mod solver;
pub mod spectrum;

pub use error::{Error, PartialSpectrum, Result};
pub use matrix::{
    build_anticirculant, build_hankel, build_modal_matrix, build_rank_two_correction, build_unit_vectors, hankel_apply,
    verify_decompositions, DecompositionReport, DenseMatrix, VectorPair,
};
pub use oracle::{compare_spectra, jacobi_eigen, EigenDecomposition, SpectrumComparison};
pub use secular::{
    eigenvalues_below, eval_f, eval_g, eval_kernel, eval_secular, eval_secular_derivative, eval_secular_literal,
    SecularContext,
};
pub use solver::{
    classify_pole_eigenvalues, eigenvector, isolate_roots, ritz_pair, solve, EigenKind, EigenPair, SolveDiagnostics,
    SpectralResult,
};
pub use spectrum::{
    compute_spectrum, pole_multiset, weyl_brackets, AntiCirculantSpectrum, Bracket, HankelParams, Parity, PoleSet,
    PoleSource,
};
