//! Full spectrum of `H`: secular zeros between the poles, pole values that
//! are eigenvalues, and eigenvectors.
//!
//! The secular function comes from a rank-two correction, so an interval
//! between consecutive poles can hold zero, one or two zeros. An inertia
//! count fixes how many eigenvalues each interval holds and how many sit on
//! each pole. Intervals are scanned for sign changes on Chebyshev–Lobatto
//! nodes (dense near the poles, where zeros crowd), refining the grid four
//! times per level until the scan agrees with the count; every sign change is
//! bisected and polished with one Newton step. An interval the scan cannot
//! settle, such as one holding a double zero, is resolved by bisecting the
//! count itself.

use rayon::prelude::*;

use crate::error::{Error, PartialSpectrum, Result};
use crate::matrix::{build_hankel, hankel_apply, DenseMatrix, Lu};
use crate::secular::{
    eigenvalues_below, eval_secular, eval_secular_derivative, eval_secular_with_derivative, SecularContext,
};
use crate::spectrum::{compute_spectrum, pole_multiset, weyl_brackets, Bracket, HankelParams, Parity, PoleSet};

pub const INITIAL_SAMPLES: usize = 64;
pub const MAX_SAMPLES: usize = 4096;
const REFINE_FACTOR: usize = 4;
const PIVOT_REL: f64 = 1e-10;
const DEN_REL: f64 = 1e-8;
const JITTER_REL: f64 = 1e-10;
const INVERSE_ITERATIONS: usize = 3;
const VECTOR_RESIDUAL_REL: f64 = 1e-10;
const CLOSE_PAIR_REL: f64 = 1e-6;
const NOISE_ULPS: f64 = 64.0;

/// Number of sample points per interval at refinement `level`.
pub fn samples_at_level(level: usize) -> usize {
    INITIAL_SAMPLES * REFINE_FACTOR.pow(level as u32)
}

/// Highest refinement level, the one that reaches [`MAX_SAMPLES`].
pub fn max_level() -> usize {
    let mut level = 0;
    while samples_at_level(level) < MAX_SAMPLES {
        level += 1;
    }
    level
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EigenKind {
    PoleValue,
    SecularZero,
}

impl EigenKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EigenKind::PoleValue => "POLE_VALUE",
            EigenKind::SecularZero => "SECULAR_ZERO",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub kind: EigenKind,
    pub vector: Option<Vec<f64>>,
    /// `‖Hv − μv‖₂ / ‖v‖₂`
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub refinement_level: usize,
    pub samples_per_interval: usize,
    /// Intervals settled by bisecting the inertia count.
    pub count_fallbacks: usize,
    pub complete: bool,
    pub secular_zeros: usize,
    pub pole_values: usize,
    /// Every eigenvalue lies in its index-matched bracket (widened by `1e-10·scale`).
    pub brackets_ok: bool,
    pub max_residual: Option<f64>,
    /// Secular zeros whose closed-form eigenvector was replaced by inverse iteration.
    pub vector_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub params: HankelParams,
    /// Sorted by value; pole values before secular zeros on ties.
    pub pairs: Vec<EigenPair>,
    pub diagnostics: SolveDiagnostics,
}

impl SpectralResult {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Poles closer than twice the exclusion margin, treated as one location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleZone {
    pub lo: f64,
    pub hi: f64,
    /// Mean of the member poles.
    pub value: f64,
    pub count: usize,
}

fn exclusion_margin(params: &HankelParams) -> f64 {
    2.0 * params.eps_pole()
}

pub fn pole_zones(params: &HankelParams, poles: &PoleSet) -> Vec<PoleZone> {
    let join = 2.0 * exclusion_margin(params);
    let mut zones: Vec<PoleZone> = Vec::new();
    let mut sum = 0.0;
    for &d in &poles.values {
        match zones.last_mut() {
            Some(z) if d - z.hi <= join => {
                z.hi = d;
                z.count += 1;
                sum += d;
                z.value = sum / z.count as f64;
            }
            _ => {
                sum = d;
                zones.push(PoleZone { lo: d, hi: d, value: d, count: 1 });
            }
        }
    }
    zones
}

/// Open intervals between consecutive pole zones, kept clear of the poles
/// by the exclusion margin, plus the two outer rays clipped to the bracket
/// hull.
fn search_intervals(params: &HankelParams, zones: &[PoleZone], brackets: &[Bracket]) -> Vec<(f64, f64)> {
    let margin = exclusion_margin(params);
    let slack = params.eps_group();
    let (Some(first), Some(last)) = (zones.first(), zones.last()) else {
        return Vec::new();
    };
    let hull_lo = brackets.iter().map(|b| b.lo).fold(f64::INFINITY, f64::min) - slack;
    let hull_hi = brackets.iter().map(|b| b.hi).fold(f64::NEG_INFINITY, f64::max) + slack;

    let mut out = Vec::with_capacity(zones.len() + 1);
    out.push((hull_lo, first.lo - margin));
    for w in zones.windows(2) {
        out.push((w[0].hi + margin, w[1].lo - margin));
    }
    out.push((last.hi + margin, hull_hi));
    out.retain(|(lo, hi)| lo < hi);
    out
}

fn bisect(ctx: &SecularContext, mut lo: f64, mut f_lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = eval_secular(ctx, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let (fx, dfx) = eval_secular_with_derivative(ctx, x)?;
    if dfx != 0.0 && dfx.is_finite() {
        let polished = x - fx / dfx;
        if polished >= lo && polished <= hi {
            if let Ok(fp) = eval_secular(ctx, polished) {
                if fp.abs() <= fx.abs() {
                    return Ok(polished);
                }
            }
        }
    }
    Ok(x)
}

fn scan_interval(ctx: &SecularContext, lo: f64, hi: f64, samples: usize, tol: f64) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let width = hi - lo;
    for i in 0..=samples {
        let t = if i == samples {
            hi
        } else {
            let c = (std::f64::consts::PI * i as f64 / samples as f64).cos();
            lo + width * 0.5 * (1.0 - c)
        };
        let ft = eval_secular(ctx, t)?;
        if ft == 0.0 {
            roots.push(t);
            continue;
        }
        if let Some((tp, fp)) = prev {
            if (fp > 0.0) != (ft > 0.0) {
                roots.push(bisect(ctx, tp, fp, t, tol)?);
            }
        }
        prev = Some((t, ft));
    }
    Ok(roots)
}

/// Zeros of the secular function inside the bracket hull at the initial
/// sampling density.
pub fn isolate_roots(ctx: &SecularContext, poles: &PoleSet, brackets: &[Bracket], tol: f64) -> Result<Vec<f64>> {
    isolate_roots_at_level(ctx, poles, brackets, tol, 0)
}

pub fn isolate_roots_at_level(
    ctx: &SecularContext,
    poles: &PoleSet,
    brackets: &[Bracket],
    tol: f64,
    level: usize,
) -> Result<Vec<f64>> {
    check_tol(tol)?;
    let params = ctx.params();
    if params.a() == 0.0 && params.b() == 0.0 {
        // secular function is identically one
        return Ok(Vec::new());
    }
    let samples = samples_at_level(level);
    let intervals = search_intervals(params, &pole_zones(params, poles), brackets);
    let found: Vec<Vec<f64>> =
        intervals.par_iter().map(|&(lo, hi)| scan_interval(ctx, lo, hi, samples, tol)).collect::<Result<_>>()?;

    // a zero sample next to a sign change can report the same root twice
    let mut roots: Vec<f64> = Vec::new();
    for r in found.into_iter().flatten() {
        match roots.last_mut() {
            Some(last) if (r - *last).abs() <= 2.0 * tol => *last = 0.5 * (*last + r),
            _ => roots.push(r),
        }
    }
    Ok(roots)
}

/// Pole values that are eigenvalues of `H`, reconciled against the secular
/// zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleClassification {
    /// `(pole value, multiplicity as an eigenvalue of H)` for every distinct pole.
    pub pole_eigenvalues: Vec<(f64, usize)>,
    /// Secular zeros that remain after dropping duplicates of pole eigenvalues.
    pub roots: Vec<f64>,
    pub complete: bool,
}

/// `1e-10 · scale · ‖H‖_max`
pub fn pivot_threshold(params: &HankelParams, hankel: &DenseMatrix) -> f64 {
    PIVOT_REL * params.scale() * hankel.max_abs()
}

/// Eigenvalue multiplicity of each distinct pole value via the nullity of
/// `H − dI`. When the secular zeros plus these multiplicities overshoot
/// `n + 2`, zeros lying next to a pole eigenvalue are taken to be that same
/// eigenvalue and dropped.
///
/// Elimination is not rank revealing inside tight pole clusters; [`solve`]
/// uses the inertia count instead and this serves as an independent check.
pub fn classify_pole_eigenvalues(params: &HankelParams, poles: &PoleSet, roots: &[f64]) -> PoleClassification {
    let hankel = build_hankel(params);
    let threshold = pivot_threshold(params, &hankel);
    let pole_eigenvalues: Vec<(f64, usize)> = poles
        .distinct
        .par_iter()
        .map(|g| (g.value, hankel.shifted(g.value).nullity(threshold).min(g.multiplicity + 2)))
        .collect();

    let size = params.size();
    let pole_total: usize = pole_eigenvalues.iter().map(|p| p.1).sum();
    let mut roots = roots.to_vec();
    let window = 10.0 * params.eps_group().max(threshold);
    while roots.len() + pole_total > size {
        let nearest = roots
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                pole_eigenvalues
                    .iter()
                    .filter(|p| p.1 > 0)
                    .map(|p| (r - p.0).abs())
                    .filter(|&d| d <= window)
                    .min_by(f64::total_cmp)
                    .map(|d| (i, d))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match nearest {
            Some((i, _)) => {
                roots.remove(i);
            }
            None => break,
        }
    }
    let complete = roots.len() + pole_total == size;
    PoleClassification { pole_eigenvalues, roots, complete }
}

fn bisect_derivative(ctx: &SecularContext, mut lo: f64, mut d_lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d_mid = eval_secular_derivative(ctx, mid)?;
        if d_mid == 0.0 {
            return Ok(mid);
        }
        if (d_mid > 0.0) == (d_lo > 0.0) {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two nearby zeros around an extremum where `f` is zero to within its own
/// rounding error are one double zero split by noise; both move onto the
/// extremum. Near such a zero `f` can round to exactly zero on a whole band,
/// so the extremum is searched in a window around the pair, clipped to the
/// interval `(lo, hi)`.
fn merge_noise_splits(ctx: &SecularContext, (lo, hi): (f64, f64), roots: &mut [f64], tol: f64) -> Result<()> {
    let close = CLOSE_PAIR_REL * ctx.params().scale();
    let mut i = 0;
    while i + 1 < roots.len() {
        let (r1, r2) = (roots[i], roots[i + 1]);
        let gap = r2 - r1;
        if gap > close {
            i += 1;
            continue;
        }
        let w = 16.0 * gap + 1e-8 * ctx.params().scale();
        let (a, b) = ((r1 - w).max(lo), (r2 + w).min(hi));
        let (da, db) = (eval_secular_derivative(ctx, a)?, eval_secular_derivative(ctx, b)?);
        let star = if da == 0.0 {
            a
        } else if db == 0.0 {
            b
        } else if (da > 0.0) != (db > 0.0) {
            bisect_derivative(ctx, a, da, b, tol)?
        } else {
            i += 1;
            continue;
        };
        let (f, _, magnitude) = ctx.evaluate(star)?;
        if f.abs() <= NOISE_ULPS * f64::EPSILON * magnitude {
            roots[i] = star;
            roots[i + 1] = star;
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(())
}

/// Replaces each close pair of zeros by its Ritz values when both stay near
/// the pair and their Ritz vectors have small residuals. A double zero left
/// by [`merge_noise_splits`] may move by up to the close-pair distance.
fn refine_close_pairs(ctx: &SecularContext, (lo, hi): (f64, f64), roots: &mut [f64]) {
    let params = ctx.params();
    let size = params.a().abs() + params.b().abs() + params.c().abs();
    let close = CLOSE_PAIR_REL * size;
    let mut i = 0;
    while i + 1 < roots.len() {
        let (r1, r2) = (roots[i], roots[i + 1]);
        let gap = r2 - r1;
        if gap > close {
            i += 1;
            continue;
        }
        let reach = if gap == 0.0 { close } else { 16.0 * gap + 1e-8 * size };
        let fits = |(v, w): &(f64, Vec<f64>)| {
            *v > lo && *v < hi && *v >= r1 - reach && *v <= r2 + reach && residual(params, *v, w) <= close
        };
        match ritz_pair(ctx, 0.5 * (r1 + r2)) {
            Some([low, high]) if fits(&low) && fits(&high) => {
                roots[i] = low.0;
                roots[i + 1] = high.0;
                i += 2;
            }
            _ => i += 1,
        }
    }
}

/// Eigenvalues of `H` per search interval and per pole zone.
#[derive(Debug, Clone, PartialEq)]
struct CountPlan {
    intervals: Vec<(f64, f64)>,
    interval_counts: Vec<(usize, usize)>,
    zone_multiplicity: Vec<usize>,
}

fn count_plan(ctx: &SecularContext, zones: &[PoleZone], brackets: &[Bracket]) -> Result<CountPlan> {
    let params = ctx.params();
    let size = params.size();
    let intervals = search_intervals(params, zones, brackets);
    let inconsistent = |found: usize| Error::IncompleteSpectrum {
        found,
        expected: size,
        partial: Box::new(PartialSpectrum { roots: Vec::new(), pole_eigenvalues: Vec::new(), refinement_level: 0 }),
    };
    if intervals.len() != zones.len() + 1 {
        return Err(inconsistent(0));
    }
    let interval_counts: Vec<(usize, usize)> = intervals
        .par_iter()
        .map(|&(lo, hi)| Ok((eigenvalues_below(ctx, lo)?, eigenvalues_below(ctx, hi)?)))
        .collect::<Result<_>>()?;
    let first = interval_counts[0].0;
    let last = interval_counts[interval_counts.len() - 1].1;
    let monotone = interval_counts.iter().all(|c| c.0 <= c.1) && interval_counts.windows(2).all(|w| w[0].1 <= w[1].0);
    if first != 0 || last != size || !monotone {
        return Err(inconsistent(last.saturating_sub(first)));
    }
    let zone_multiplicity = interval_counts.windows(2).map(|w| w[1].0 - w[0].1).collect();
    Ok(CountPlan { intervals, interval_counts, zone_multiplicity })
}

/// Every eigenvalue in `(lo, hi)` by bisection on the inertia count; a
/// stretch holding one eigenvalue with a sign change of `f` finishes with
/// the ordinary root bisection.
fn count_bisect(ctx: &SecularContext, lo: f64, hi: f64, counts: (usize, usize), tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi, counts.0, counts.1)];
    while let Some((lo, hi, c_lo, c_hi)) = stack.pop() {
        let k = c_hi - c_lo;
        if k == 0 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            out.extend(std::iter::repeat_n(mid, k));
            continue;
        }
        if k == 1 {
            let (f_lo, f_hi) = (eval_secular(ctx, lo)?, eval_secular(ctx, hi)?);
            if f_lo != 0.0 && f_hi != 0.0 && (f_lo > 0.0) != (f_hi > 0.0) {
                out.push(bisect(ctx, lo, f_lo, hi, tol)?);
                continue;
            }
        }
        let c_mid = eigenvalues_below(ctx, mid)?.clamp(c_lo, c_hi);
        stack.push((mid, hi, c_mid, c_hi));
        stack.push((lo, mid, c_lo, c_mid));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Zeros in one interval: sign scans on finer grids until they match the
/// expected count, then count bisection. Returns the roots, the last level
/// scanned and whether the count bisection was needed.
fn resolve_interval(
    ctx: &SecularContext,
    (lo, hi): (f64, f64),
    counts: (usize, usize),
    tol: f64,
) -> Result<(Vec<f64>, usize, bool)> {
    let expected = counts.1 - counts.0;
    if expected == 0 {
        return Ok((Vec::new(), 0, false));
    }
    for level in 0..=max_level() {
        let mut roots = scan_interval(ctx, lo, hi, samples_at_level(level), tol)?;
        roots.dedup_by(|x, y| (*x - *y).abs() <= 2.0 * tol);
        if roots.len() == expected {
            merge_noise_splits(ctx, (lo, hi), &mut roots, tol)?;
            refine_close_pairs(ctx, (lo, hi), &mut roots);
            return Ok((roots, level, false));
        }
    }
    let mut roots = count_bisect(ctx, lo, hi, counts, tol)?;
    merge_noise_splits(ctx, (lo, hi), &mut roots, tol)?;
    refine_close_pairs(ctx, (lo, hi), &mut roots);
    Ok((roots, max_level(), true))
}

fn sort_pairs(pairs: &mut [EigenPair]) {
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value).then(x.kind.cmp(&y.kind)));
}

/// Sorted eigenvalues without vectors.
pub fn resolve_eigenvalues(
    ctx: &SecularContext,
    poles: &PoleSet,
    brackets: &[Bracket],
    tol: f64,
) -> Result<(Vec<EigenPair>, SolveDiagnostics)> {
    check_tol(tol)?;
    let params = ctx.params();
    let size = params.size();
    let zones = pole_zones(params, poles);
    let plan = count_plan(ctx, &zones, brackets)?;

    let resolved: Vec<(Vec<f64>, usize, bool)> = plan
        .intervals
        .par_iter()
        .zip(&plan.interval_counts)
        .map(|(&iv, &counts)| resolve_interval(ctx, iv, counts, tol))
        .collect::<Result<_>>()?;

    let level = resolved.iter().map(|r| r.1).max().unwrap_or(0);
    let count_fallbacks = resolved.iter().filter(|r| r.2).count();
    let roots: Vec<f64> = resolved.into_iter().flat_map(|r| r.0).collect();
    let pole_total: usize = plan.zone_multiplicity.iter().sum();
    if roots.len() + pole_total != size {
        let pole_eigenvalues = zones.iter().zip(&plan.zone_multiplicity).map(|(z, &m)| (z.value, m)).collect();
        return Err(Error::IncompleteSpectrum {
            found: roots.len() + pole_total,
            expected: size,
            partial: Box::new(PartialSpectrum { roots, pole_eigenvalues, refinement_level: level }),
        });
    }

    let mut pairs: Vec<EigenPair> = zones
        .iter()
        .zip(&plan.zone_multiplicity)
        .flat_map(|(z, &mult)| {
            let pair = EigenPair { value: z.value, kind: EigenKind::PoleValue, vector: None, residual: None };
            std::iter::repeat_n(pair, mult)
        })
        .chain(roots.iter().map(|&value| EigenPair {
            value,
            kind: EigenKind::SecularZero,
            vector: None,
            residual: None,
        }))
        .collect();
    sort_pairs(&mut pairs);

    let slack = 1e-10 * params.scale();
    let brackets_ok = pairs.iter().zip(brackets).all(|(p, b)| b.contains(p.value, slack));
    let diagnostics = SolveDiagnostics {
        refinement_level: level,
        samples_per_interval: samples_at_level(level),
        count_fallbacks,
        complete: true,
        secular_zeros: roots.len(),
        pole_values: pole_total,
        brackets_ok,
        max_residual: None,
        vector_fallbacks: 0,
    };
    Ok((pairs, diagnostics))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalized(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n = norm(&v);
    if !(n > 0.0 && n.is_finite()) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// `‖Hv − μv‖₂ / ‖v‖₂`
pub fn residual(params: &HankelParams, mu: f64, v: &[f64]) -> f64 {
    let hv = hankel_apply(params, v);
    let r: f64 = hv.iter().zip(v).map(|(h, x)| (h - mu * x).powi(2)).sum::<f64>().sqrt();
    r / norm(v)
}

fn middle_inverse(ctx: &SecularContext, mu: f64) -> f64 {
    match ctx.parity() {
        Parity::Even => 1.0 / (mu - ctx.middle().unwrap_or_default()),
        Parity::Odd => 0.0,
    }
}

/// Row kernels at `mu` for every row, less the correction from the extra
/// simple pole of G weighted by `1 ± (−1)^k`. The two columns span the
/// resolvent of the anti-circulant applied to the first and last unit vectors.
fn kernel_column(ctx: &SecularContext, mu: f64, beta_is_phi: bool) -> Vec<f64> {
    let mid_inv = middle_inverse(ctx, mu);
    (0..ctx.params().size())
        .map(|row| {
            let k = row + 1;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let w = if beta_is_phi { 1.0 - sign } else { 1.0 + sign };
            ctx.row_kernel(mu, row, beta_is_phi) - w * mid_inv
        })
        .collect()
}

/// Rayleigh–Ritz on the span of the two kernel columns at `mu`. Near a
/// double or nearly double zero this span is close to the invariant
/// subspace, so the Ritz values resolve a split that `f` alone cannot see.
/// Returns the ascending Ritz values with their vectors.
pub fn ritz_pair(ctx: &SecularContext, mu: f64) -> Option<[(f64, Vec<f64>); 2]> {
    let params = ctx.params();
    if params.a() == 0.0 || params.b() == 0.0 || ctx.terms().iter().any(|t| (mu - t.value).abs() <= ctx.eps_pole()) {
        return None;
    }
    let q1 = normalized(kernel_column(ctx, mu, true))?;
    let mut t = kernel_column(ctx, mu, false);
    for _ in 0..2 {
        orthogonalize(&mut t, std::slice::from_ref(&q1));
    }
    let q2 = normalized(t)?;
    let (h1, h2) = (hankel_apply(params, &q1), hankel_apply(params, &q2));
    let dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(p, q)| p * q).sum() };
    let (m11, m12, m22) = (dot(&q1, &h1), 0.5 * (dot(&q1, &h2) + dot(&q2, &h1)), dot(&q2, &h2));
    let mean = 0.5 * (m11 + m22);
    let r = (0.5 * (m11 - m22)).hypot(m12);
    let theta = 0.5 * (2.0 * m12).atan2(m11 - m22);
    let (cs, sn) = (theta.cos(), theta.sin());
    let upper: Vec<f64> = q1.iter().zip(&q2).map(|(x, y)| cs * x + sn * y).collect();
    let lower: Vec<f64> = q1.iter().zip(&q2).map(|(x, y)| cs * y - sn * x).collect();
    Some([(mean - r, lower), (mean + r, upper)])
}

/// Closed-form eigenvector for a secular zero `mu`.
pub fn eigenvector(params: &HankelParams, mu: f64) -> Result<Vec<f64>> {
    eigenvector_in(&SecularContext::new(params), mu)
}

pub fn eigenvector_in(ctx: &SecularContext, mu: f64) -> Result<Vec<f64>> {
    let params = ctx.params();
    let eps_pole = ctx.eps_pole();
    if let Some(term) = ctx.terms().iter().find(|t| (mu - t.value).abs() <= eps_pole) {
        return Err(Error::PoleValueInput { mu, pole: term.value });
    }
    let size = params.size();
    let nf = size as f64;
    let (a, b) = (params.a(), params.b());
    let raw: Vec<f64> = if a == 0.0 {
        if b == 0.0 {
            return Err(Error::DegenerateDenominator { mu, value: 0.0 });
        }
        kernel_column(ctx, mu, false)
    } else {
        let den = b * ctx.row_kernel(mu, 0, false) + nf;
        if den.abs() <= DEN_REL * nf {
            return Err(Error::DegenerateDenominator { mu, value: den });
        }
        let x_phi = ctx.row_kernel(mu, 0, true) - 2.0 * middle_inverse(ctx, mu);
        let lead = kernel_column(ctx, mu, true);
        let tail = kernel_column(ctx, mu, false);
        lead.iter().zip(&tail).map(|(l, t)| l - b * t * x_phi / den).collect()
    };
    normalized(raw).ok_or(Error::DegenerateDenominator { mu, value: f64::NAN })
}

fn seed_vector(size: usize, index: usize) -> Vec<f64> {
    (0..size).map(|i| (1.0 + 0.754_877_666 * ((i + 1) * (index + 1)) as f64).sin() + 0.5).collect()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    for u in against {
        let d: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
        v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
    }
}

/// Inverse iteration on `H − (mu + jitter) I` from a deterministic seed,
/// kept orthogonal to `against`.
pub fn inverse_iteration(params: &HankelParams, hankel: &DenseMatrix, mu: f64, against: &[Vec<f64>]) -> Vec<f64> {
    let size = params.size();
    let lu = Lu::factor(&hankel.shifted(mu + JITTER_REL * params.scale()));
    let mut seed_index = against.len();
    loop {
        let mut v = seed_vector(size, seed_index);
        orthogonalize(&mut v, against);
        let mut ok = normalized(v.clone());
        for _ in 0..INVERSE_ITERATIONS {
            let Some(cur) = ok else { break };
            let mut next = lu.solve(&cur);
            orthogonalize(&mut next, against);
            ok = normalized(next);
        }
        if let Some(v) = ok {
            return v;
        }
        seed_index += 1;
        if seed_index > against.len() + size {
            // unreachable for a symmetric matrix of this size; keep a unit vector
            let mut e = vec![0.0; size];
            e[0] = 1.0;
            return e;
        }
    }
}

/// Attaches eigenvectors and residuals in place; returns how many secular
/// zeros needed the inverse-iteration fallback.
pub fn attach_vectors(ctx: &SecularContext, pairs: &mut [EigenPair]) -> usize {
    let params = *ctx.params();
    let mut hankel: Option<DenseMatrix> = None;
    let mut fallbacks = 0;

    let bound = VECTOR_RESIDUAL_REL * (1.0 + params.a().abs().max(params.b().abs()).max(params.c().abs()));
    let close = CLOSE_PAIR_REL * params.scale();
    let mut closed: Vec<Option<Vec<f64>>> = vec![None; pairs.len()];

    // a close or repeated pair of secular zeros takes its basis from the Ritz step
    let mut i = 0;
    while i + 1 < pairs.len() {
        let (p, q) = (&pairs[i], &pairs[i + 1]);
        if p.kind == EigenKind::SecularZero && q.kind == EigenKind::SecularZero && q.value - p.value <= close {
            if let Some([(_, lower), (_, upper)]) = ritz_pair(ctx, 0.5 * (p.value + q.value)) {
                if residual(&params, p.value, &lower) <= bound && residual(&params, q.value, &upper) <= bound {
                    closed[i] = Some(lower);
                    closed[i + 1] = Some(upper);
                    i += 2;
                    continue;
                }
            }
        }
        i += 1;
    }

    // a repeated secular zero needs a basis, which one closed form cannot give
    let repeated = |i: usize| {
        let v = pairs[i].value;
        (i > 0 && pairs[i - 1].value == v) || pairs.get(i + 1).is_some_and(|q| q.value == v)
    };
    let singles: Vec<Option<Vec<f64>>> = (0..pairs.len())
        .into_par_iter()
        .map(|i| match pairs[i].kind {
            EigenKind::SecularZero if closed[i].is_none() && !repeated(i) => {
                eigenvector_in(ctx, pairs[i].value).ok().filter(|v| residual(&params, pairs[i].value, v) <= bound)
            }
            _ => None,
        })
        .collect();
    let closed: Vec<Option<Vec<f64>>> = closed.into_iter().zip(singles).map(|(x, y)| x.or(y)).collect();

    let mut group: Vec<Vec<f64>> = Vec::new();
    let mut group_value = f64::NAN;
    for (pair, vector) in pairs.iter_mut().zip(closed) {
        let v = match (pair.kind, vector) {
            (EigenKind::SecularZero, Some(v)) => v,
            (kind, _) => {
                if kind == EigenKind::SecularZero {
                    fallbacks += 1;
                }
                let h = hankel.get_or_insert_with(|| build_hankel(&params));
                if pair.value != group_value {
                    group.clear();
                    group_value = pair.value;
                }
                let v = inverse_iteration(&params, h, pair.value, &group);
                group.push(v.clone());
                v
            }
        };
        pair.residual = Some(residual(&params, pair.value, &v));
        pair.vector = Some(v);
    }
    fallbacks
}

/// All `n + 2` eigenvalues of `H`, sorted, with optional eigenvectors.
pub fn solve(params: &HankelParams, tol: f64, want_vectors: bool) -> Result<SpectralResult> {
    check_tol(tol)?;
    let spectrum = compute_spectrum(params);
    let poles = pole_multiset(params, &spectrum);
    let brackets = weyl_brackets(params, &poles);
    let ctx = SecularContext::from_spectrum(params, spectrum);
    let (mut pairs, mut diagnostics) = resolve_eigenvalues(&ctx, &poles, &brackets, tol)?;
    if want_vectors {
        diagnostics.vector_fallbacks = attach_vectors(&ctx, &mut pairs);
        diagnostics.max_residual = pairs.iter().filter_map(|p| p.residual).reduce(f64::max);
    }
    Ok(SpectralResult { params: *params, pairs, diagnostics })
}
