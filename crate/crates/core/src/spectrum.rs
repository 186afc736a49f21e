//! Anti-circulant eigenvalue data, the pole multiset and eigenvalue brackets.
//!
//! The anti-tridiagonal Hankel matrix `H` differs from the real anti-circulant
//! `A` with first row `(b, 0, …, 0, a, c)` only in its two corner diagonal
//! entries. The eigenvalues of `A` are `λ_0`, `±|λ_k|` and, for even `n`,
//! the real value `λ_{n/2+1}`; they are the poles of the secular function and
//! the centres of the brackets that confine the eigenvalues of `H`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const EPS_ZERO_REL: f64 = 1e-14;
const EPS_GROUP_REL: f64 = 1e-10;
const EPS_POLE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Problem instance: the `(n+2)×(n+2)` anti-tridiagonal Hankel matrix with
/// stripes `a`, `c`, `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelParams {
    n: usize,
    a: f64,
    b: f64,
    c: f64,
}

impl HankelParams {
    pub fn new(n: usize, a: f64, b: f64, c: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParams(format!("n must be at least 1, got {n}")));
        }
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(Self { n, a, b, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Matrix dimension `n + 2`.
    pub fn size(&self) -> usize {
        self.n + 2
    }

    pub fn parity(&self) -> Parity {
        if self.n % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Number of conjugate pairs `λ_k, λ_{n+2-k}`: `(n+1)/2` for odd `n`, `n/2` for even `n`.
    pub fn half(&self) -> usize {
        match self.parity() {
            Parity::Odd => self.n.div_ceil(2),
            Parity::Even => self.n / 2,
        }
    }

    /// `1 + |a| + |b| + |c|`; all tolerances are relative to it.
    pub fn scale(&self) -> f64 {
        1.0 + self.a.abs() + self.b.abs() + self.c.abs()
    }

    pub fn eps_zero(&self) -> f64 {
        EPS_ZERO_REL * self.scale()
    }

    pub fn eps_group(&self) -> f64 {
        EPS_GROUP_REL * self.scale()
    }

    pub fn eps_pole(&self) -> f64 {
        EPS_POLE_REL * self.scale()
    }

    /// The instance with every coefficient negated.
    pub fn negated(&self) -> Self {
        Self { n: self.n, a: -self.a, b: -self.b, c: -self.c }
    }
}

/// `ω^j` for `ω = e^{2πi/size}`, exact at the quarter turns.
pub(crate) fn unit_root(j: usize, size: usize) -> Complex64 {
    let j = j % size;
    if j == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * j == size {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * j == size {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * j == 3 * size {
        return Complex64::new(0.0, -1.0);
    }
    let angle = 2.0 * PI * signed_phase(j, size) as f64 / size as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// Representative of `j mod size` in `(-size/2, size/2]`.
pub(crate) fn signed_phase(j: usize, size: usize) -> i64 {
    let j = (j % size) as i64;
    let size = size as i64;
    if 2 * j > size {
        j - size
    } else {
        j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiCirculantSpectrum {
    pub lambda: Vec<Complex64>,
    pub theta: Vec<f64>,
    pub modulus: Vec<f64>,
}

impl AntiCirculantSpectrum {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// `λ_{n/2+1}` for even `n`.
    pub fn middle(&self, params: &HankelParams) -> Option<f64> {
        match params.parity() {
            Parity::Even => Some(self.lambda[params.n() / 2 + 1].re),
            Parity::Odd => None,
        }
    }
}

/// `λ_k = b + a ω^{-nk} + c ω^{-(n+1)k}` with the exponents reduced to
/// `ω^{2k}` and `ω^{k}`, and `θ_k` the principal argument in `(-π, π]`.
pub fn compute_spectrum(params: &HankelParams) -> AntiCirculantSpectrum {
    let size = params.size();
    let eps_zero = params.eps_zero();
    let mut lambda = Vec::with_capacity(size);
    let mut theta = Vec::with_capacity(size);
    let mut modulus = Vec::with_capacity(size);
    for k in 0..size {
        let value = if k == 0 {
            Complex64::new(params.b + params.a + params.c, 0.0)
        } else {
            Complex64::new(params.b, 0.0) + unit_root(2 * k, size) * params.a + unit_root(k, size) * params.c
        };
        let m = modulus_of(params, value);
        lambda.push(value);
        modulus.push(m);
        theta.push(principal_arg(value, m, eps_zero));
    }
    AntiCirculantSpectrum { lambda, theta, modulus }
}

/// `|λ_k|`, exact when only one stripe is nonzero (then `|λ_k|` is that
/// stripe's magnitude) and flushed to zero below `eps_zero`.
fn modulus_of(params: &HankelParams, value: Complex64) -> f64 {
    let nonzero = [params.a, params.b, params.c].into_iter().filter(|x| *x != 0.0).collect::<Vec<_>>();
    let m = match nonzero.as_slice() {
        [only] => only.abs(),
        _ => value.norm(),
    };
    if m <= params.eps_zero() {
        0.0
    } else {
        m
    }
}

fn principal_arg(z: Complex64, modulus: f64, eps_zero: f64) -> f64 {
    if modulus <= eps_zero {
        return 0.0;
    }
    let t = z.im.atan2(z.re);
    if t <= -PI {
        PI
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PoleSource {
    Lambda0,
    PlusMod(usize),
    LambdaHalf,
    MinusMod(usize),
}

impl std::fmt::Display for PoleSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PoleSource::Lambda0 => write!(f, "LAMBDA0"),
            PoleSource::PlusMod(k) => write!(f, "PLUS_MOD({k})"),
            PoleSource::LambdaHalf => write!(f, "LAMBDA_HALF"),
            PoleSource::MinusMod(k) => write!(f, "MINUS_MOD({k})"),
        }
    }
}

/// The diagonal of the anti-circulant in the order its modal matrix uses:
/// `λ_0, |λ_1|, …, |λ_m|, [λ_{n/2+1}], -|λ_m|, …, -|λ_1|`.
pub fn spectral_diagonal(params: &HankelParams, spectrum: &AntiCirculantSpectrum) -> Vec<(f64, PoleSource)> {
    let m = params.half();
    let mut out = Vec::with_capacity(params.size());
    out.push((spectrum.lambda[0].re, PoleSource::Lambda0));
    for k in 1..=m {
        out.push((spectrum.modulus[k], PoleSource::PlusMod(k)));
    }
    if let Some(mid) = spectrum.middle(params) {
        out.push((mid, PoleSource::LambdaHalf));
    }
    for k in (1..=m).rev() {
        out.push((-spectrum.modulus[k], PoleSource::MinusMod(k)));
    }
    out
}

/// A cluster of pole values closer than the grouping tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleGroup {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub values: Vec<f64>,
    pub sources: Vec<PoleSource>,
    pub distinct: Vec<PoleGroup>,
}

impl PoleSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distance from `t` to the nearest pole value.
    pub fn distance(&self, t: f64) -> f64 {
        self.values.iter().map(|d| (t - d).abs()).fold(f64::INFINITY, f64::min)
    }
}

pub fn pole_multiset(params: &HankelParams, spectrum: &AntiCirculantSpectrum) -> PoleSet {
    let mut entries = spectral_diagonal(params, spectrum);
    // stable: ties keep spectral order
    entries.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = entries.iter().map(|e| e.0).collect();
    let sources = entries.iter().map(|e| e.1).collect();

    let eps_group = params.eps_group();
    let mut distinct: Vec<PoleGroup> = Vec::new();
    let mut sum = 0.0;
    for &v in &values {
        match distinct.last_mut() {
            Some(g) if v - g.hi <= eps_group => {
                g.hi = v;
                g.multiplicity += 1;
                sum += v;
                g.value = sum / g.multiplicity as f64;
            }
            _ => {
                sum = v;
                distinct.push(PoleGroup { value: v, lo: v, hi: v, multiplicity: 1 });
            }
        }
    }
    PoleSet { values, sources, distinct }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lo - slack && x <= self.hi + slack
    }
}

/// Spectrum of the rank-two correction `-b xxᵀ - a yyᵀ` bounds the shift:
/// returns `(min{0,-a,-b}, max{0,-a,-b})`.
pub fn perturbation_range(params: &HankelParams) -> (f64, f64) {
    let (na, nb) = (-params.a, -params.b);
    (0f64.min(na).min(nb), 0f64.max(na).max(nb))
}

/// `[d_k + min{0,-a,-b}, d_k + max{0,-a,-b}]` for each sorted pole `d_k`.
pub fn weyl_brackets(params: &HankelParams, poles: &PoleSet) -> Vec<Bracket> {
    let (lo, hi) = perturbation_range(params);
    poles.values.iter().map(|d| Bracket { lo: d + lo, hi: d + hi }).collect()
}
