//! Wall-clock timings of the solver phases against the dense oracle.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::matrix::build_hankel;
use crate::oracle::{compare_spectra, jacobi_eigen};
use crate::secular::SecularContext;
use crate::solver::{attach_vectors, resolve_eigenvalues};
use crate::spectrum::{compute_spectrum, pole_multiset, weyl_brackets, HankelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTimings {
    pub size: usize,
    /// Anti-circulant eigenvalues, poles and brackets.
    pub spectrum: Duration,
    /// Secular zeros and pole classification.
    pub roots: Duration,
    pub vectors: Option<Duration>,
    pub oracle: Option<Duration>,
    /// Largest eigenvalue difference against the oracle, when it ran.
    pub max_abs_diff: Option<f64>,
    pub max_residual: Option<f64>,
}

impl PhaseTimings {
    /// Time of the eigenvalue-only secular path.
    pub fn eigenvalues_only(&self) -> Duration {
        self.spectrum + self.roots
    }
}

/// Times one instance. `with_vectors` adds the eigenvector phase and
/// `with_oracle` runs Jacobi on the dense matrix.
pub fn time_phases(params: &HankelParams, tol: f64, with_vectors: bool, with_oracle: bool) -> Result<PhaseTimings> {
    let start = Instant::now();
    let spectrum = compute_spectrum(params);
    let poles = pole_multiset(params, &spectrum);
    let brackets = weyl_brackets(params, &poles);
    let ctx = SecularContext::from_spectrum(params, spectrum);
    let t_spectrum = start.elapsed();

    let start = Instant::now();
    let (mut pairs, _) = resolve_eigenvalues(&ctx, &poles, &brackets, tol)?;
    let t_roots = start.elapsed();

    let (t_vectors, max_residual) = if with_vectors {
        let start = Instant::now();
        attach_vectors(&ctx, &mut pairs);
        let elapsed = start.elapsed();
        (Some(elapsed), pairs.iter().filter_map(|p| p.residual).reduce(f64::max))
    } else {
        (None, None)
    };

    let (t_oracle, diff) = if with_oracle {
        let start = Instant::now();
        let dense = jacobi_eigen(&build_hankel(params), 1e-14)?;
        let elapsed = start.elapsed();
        let ours: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        (Some(elapsed), Some(compare_spectra(&ours, &dense.values)?.max_abs_diff))
    } else {
        (None, None)
    };

    Ok(PhaseTimings {
        size: params.size(),
        spectrum: t_spectrum,
        roots: t_roots,
        vectors: t_vectors,
        oracle: t_oracle,
        max_abs_diff: diff,
        max_residual,
    })
}

/// Matrix sizes 16, 32, 64, … up to and including `max_size` (which is
/// appended when it is not a power of two).
pub fn sweep_sizes(max_size: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut s = 16;
    while s <= max_size {
        out.push(s);
        s *= 2;
    }
    if out.last() != Some(&max_size) && max_size >= 3 {
        out.push(max_size);
    }
    out
}

/// Runs [`time_phases`] for every size of [`sweep_sizes`] with fixed stripes.
pub fn sweep(max_size: usize, a: f64, b: f64, c: f64, tol: f64, with_vectors: bool) -> Result<Vec<PhaseTimings>> {
    sweep_sizes(max_size)
        .into_iter()
        .map(|size| {
            let params = HankelParams::new(size - 2, a, b, c)?;
            time_phases(&params, tol, with_vectors, true)
        })
        .collect()
}
