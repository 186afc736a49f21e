//! Rational kernels `F`, `G` and the secular functions `f` (odd `n`) and `g`
//! (even `n`).
//!
//! Writing `H = M (D − b xxᵀ − a yyᵀ) Mᵀ`, every kernel value is a weighted
//! sum `Σ_l w_l / (t − d_l)` over the anti-circulant eigenvalues `d_l`, and the
//! secular function is the 2×2 determinant
//!
//! ```text
//! (1 + b xᵀRx)(1 + a yᵀRy) − ab (xᵀRy)²,   R = (tI − D)⁻¹.
//! ```
//!
//! [`eval_secular_literal`] composes it from [`eval_f`]/[`eval_g`] exactly as
//! written. [`eval_secular`] evaluates the same function from per-pole
//! weights and expands the determinant's product term around the two nearest
//! poles, where the double-pole parts cancel exactly instead of numerically.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectrum::{
    compute_spectrum, signed_phase, spectral_diagonal, AntiCirculantSpectrum, HankelParams, Parity, PoleSource,
};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One diagonal entry of `D` with the matching entries of `√N·x` (`u`) and
/// `√N·y` (`v`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm {
    pub value: f64,
    pub source: PoleSource,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone)]
pub struct SecularContext {
    params: HankelParams,
    spectrum: AntiCirculantSpectrum,
    parity: Parity,
    m: usize,
    phi: f64,
    terms: Vec<PoleTerm>,
}

fn phase_angle(p: i64, size: usize) -> f64 {
    2.0 * PI * p as f64 / size as f64
}

impl SecularContext {
    pub fn new(params: &HankelParams) -> Self {
        Self::from_spectrum(params, compute_spectrum(params))
    }

    pub fn from_spectrum(params: &HankelParams, spectrum: AntiCirculantSpectrum) -> Self {
        let size = params.size();
        let sqrt2 = std::f64::consts::SQRT_2;
        let terms = spectral_diagonal(params, &spectrum)
            .into_iter()
            .map(|(value, source)| {
                let (u, v) = match source {
                    PoleSource::Lambda0 => (1.0, 1.0),
                    PoleSource::LambdaHalf => (1.0, -1.0),
                    PoleSource::PlusMod(j) => {
                        let h = spectrum.theta[j] / 2.0;
                        (sqrt2 * h.cos(), sqrt2 * (h - phase_angle(j as i64, size)).cos())
                    }
                    PoleSource::MinusMod(j) => {
                        let h = spectrum.theta[j] / 2.0;
                        (sqrt2 * h.sin(), sqrt2 * (h - phase_angle(j as i64, size)).sin())
                    }
                };
                PoleTerm { value, source, u, v }
            })
            .collect();
        Self {
            params: *params,
            parity: params.parity(),
            m: params.half(),
            phi: 2.0 * PI / size as f64,
            spectrum,
            terms,
        }
    }

    pub fn params(&self) -> &HankelParams {
        &self.params
    }

    pub fn spectrum(&self) -> &AntiCirculantSpectrum {
        &self.spectrum
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Summation bound of the kernels.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `2π/(n+2)`
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Poles with weights, in modal order.
    pub fn terms(&self) -> &[PoleTerm] {
        &self.terms
    }

    pub fn eps_pole(&self) -> f64 {
        self.params.eps_pole()
    }

    /// `λ_{n/2+1}` for even `n`.
    pub fn middle(&self) -> Option<f64> {
        self.spectrum.middle(&self.params)
    }

    fn size_f(&self) -> f64 {
        self.params.size() as f64
    }

    fn check_pole(&self, t: f64, pole: f64) -> Result<()> {
        let radius = self.eps_pole();
        if (t - pole).abs() <= radius || !t.is_finite() {
            return Err(Error::PoleProximity { t, pole, radius });
        }
        Ok(())
    }

    fn check_all(&self, t: f64) -> Result<()> {
        self.terms.iter().try_for_each(|term| self.check_pole(t, term.value))
    }

    fn check_f_poles(&self, t: f64) -> Result<()> {
        self.check_pole(t, self.spectrum.lambda[0].re)?;
        for k in 1..=self.m {
            self.check_pole(t, self.spectrum.modulus[k])?;
            self.check_pole(t, -self.spectrum.modulus[k])?;
        }
        Ok(())
    }

    /// `F(t; α_k, β)` or `G(t; α_k, β)` for `α_k = 2(1−k)π/(n+2)`, `k = row + 1`,
    /// and `β ∈ {0, 2π/(n+2)}`, with the phase `k·j` reduced modulo `n+2`.
    pub(crate) fn row_kernel(&self, t: f64, row: usize, beta_is_phi: bool) -> f64 {
        let size = self.params.size();
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut lead = 0.0;
        let mut minus = Compensated::default();
        let mut plus = Compensated::default();
        for term in &self.terms {
            let w = if beta_is_phi { term.v } else { term.u };
            match term.source {
                PoleSource::Lambda0 => lead += 1.0 / (t - term.value),
                PoleSource::LambdaHalf => lead += 1.0 / (t - term.value),
                PoleSource::PlusMod(j) => {
                    let h = self.spectrum.theta[j] / 2.0;
                    let c = sqrt2 * (h + phase_angle(signed_phase(row * j, size), size)).cos();
                    minus.add(c * w / (t - term.value));
                }
                PoleSource::MinusMod(j) => {
                    let h = self.spectrum.theta[j] / 2.0;
                    let s = sqrt2 * (h + phase_angle(signed_phase(row * j, size), size)).sin();
                    plus.add(s * w / (t - term.value));
                }
            }
        }
        lead + minus.value() + plus.value()
    }

    /// Secular value and derivative from the pole weights.
    fn value_and_derivative(&self, t: f64) -> Result<(f64, f64)> {
        self.evaluate(t).map(|(v, d, _)| (v, d))
    }

    /// Value, derivative and the sum of absolute contributions to the value,
    /// which bounds its rounding error up to a modest multiple of ε.
    pub(crate) fn evaluate(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check_all(t)?;
        let (a, b) = (self.params.a(), self.params.b());
        let nf = self.size_f();

        let (k1, k2) = self.two_nearest(t);
        let t1 = self.terms[k1];
        let t2 = self.terms[k2];
        let r1 = 1.0 / (t - t1.value);
        let r2 = 1.0 / (t - t2.value);

        let mut sp = Compensated::default();
        let mut sq = Compensated::default();
        let mut sp_d = Compensated::default();
        let mut sq_d = Compensated::default();
        // sums over the poles other than the two nearest
        let mut rp = Compensated::default();
        let mut rq = Compensated::default();
        let mut rs = Compensated::default();
        let mut rp_d = Compensated::default();
        let mut rq_d = Compensated::default();
        let mut rs_d = Compensated::default();
        let mut e1 = Compensated::default();
        let mut e2 = Compensated::default();
        let mut e1_d = Compensated::default();
        let mut e2_d = Compensated::default();

        for (l, term) in self.terms.iter().enumerate() {
            let r = 1.0 / (t - term.value);
            let rr = r * r;
            let p = term.u * term.u;
            let q = term.v * term.v;
            sp.add(p * r);
            sq.add(q * r);
            sp_d.add(-p * rr);
            sq_d.add(-q * rr);
            if l == k1 || l == k2 {
                continue;
            }
            let s = term.u * term.v;
            rp.add(p * r);
            rq.add(q * r);
            rs.add(s * r);
            rp_d.add(-p * rr);
            rq_d.add(-q * rr);
            rs_d.add(-s * rr);
            let w1 = (t1.u * term.v - term.u * t1.v).powi(2);
            let w2 = (t2.u * term.v - term.u * t2.v).powi(2);
            e1.add(w1 * r);
            e2.add(w2 * r);
            e1_d.add(-w1 * rr);
            e2_d.add(-w2 * rr);
        }

        let w12 = (t1.u * t2.v - t2.u * t1.v).powi(2);
        let (rp, rq, rs) = (rp.value(), rq.value(), rs.value());
        let (rp_d, rq_d, rs_d) = (rp_d.value(), rq_d.value(), rs_d.value());
        let (e1, e2, e1_d, e2_d) = (e1.value(), e2.value(), e1_d.value(), e2_d.value());

        let cross = w12 * r1 * r2 + r1 * e1 + r2 * e2 + (rp * rq - rs * rs);
        let cross_d = -w12 * (r1 * r1 * r2 + r1 * r2 * r2)
            + (r1 * e1_d - r1 * r1 * e1)
            + (r2 * e2_d - r2 * r2 * e2)
            + (rp_d * rq + rp * rq_d - 2.0 * rs * rs_d);

        let value = 1.0 + a / nf * sq.value() + b / nf * sp.value() + a * b / (nf * nf) * cross;
        let deriv = a / nf * sq_d.value() + b / nf * sp_d.value() + a * b / (nf * nf) * cross_d;
        let abs_p: f64 = self.terms.iter().map(|q| q.u * q.u / (t - q.value).abs()).sum();
        let abs_q: f64 = self.terms.iter().map(|q| q.v * q.v / (t - q.value).abs()).sum();
        let abs_cross = w12 * (r1 * r2).abs() + (r1 * e1).abs() + (r2 * e2).abs() + (rp * rq).abs() + rs * rs;
        let magnitude = 1.0 + (a.abs() * abs_q + b.abs() * abs_p) / nf + (a * b).abs() / (nf * nf) * abs_cross;
        Ok((value, deriv, magnitude))
    }

    fn two_nearest(&self, t: f64) -> (usize, usize) {
        let mut best = (usize::MAX, f64::INFINITY);
        let mut second = (usize::MAX, f64::INFINITY);
        for (l, term) in self.terms.iter().enumerate() {
            let d = (t - term.value).abs();
            if d < best.1 {
                second = best;
                best = (l, d);
            } else if d < second.1 {
                second = (l, d);
            }
        }
        (best.0, second.0)
    }
}

/// Number of eigenvalues of `H` strictly below `t`, for `t` away from every
/// pole.
///
/// Inertia of the bordered matrix `[[D − t, U], [Uᵀ, diag(1/b, 1/a)]]` with
/// `U = [x y]` taken through both Schur complements gives
/// `#{d < t} + neg(S(t)) − neg(diag(1/b, 1/a))`, where
/// `S(t) = diag(1/b, 1/a) + Uᵀ(t − D)⁻¹U` and `det S = f(t)/(ab)`.
pub fn eigenvalues_below(ctx: &SecularContext, t: f64) -> Result<usize> {
    let (f, _) = ctx.value_and_derivative(t)?;
    let (a, b) = (ctx.params.a(), ctx.params.b());
    let nf = ctx.size_f();
    let below = ctx.terms.iter().filter(|term| term.value < t).count() as i64;
    let quad = |use_v: bool| {
        let mut acc = Compensated::default();
        for term in &ctx.terms {
            let w = if use_v { term.v } else { term.u };
            acc.add(w * w / (t - term.value));
        }
        acc.value() / nf
    };
    let neg = |x: f64| i64::from(x < 0.0);
    let shift = match (a != 0.0, b != 0.0) {
        (false, false) => 0,
        (true, false) => neg(1.0 / a + quad(true)) - neg(a),
        (false, true) => neg(1.0 / b + quad(false)) - neg(b),
        (true, true) => {
            let det = f / (a * b);
            let s11 = 1.0 / b + quad(false);
            let neg_s = if det < 0.0 {
                1
            } else if det > 0.0 {
                2 * neg(s11)
            } else {
                neg(s11 + 1.0 / a + quad(true))
            };
            neg_s - neg(a) - neg(b)
        }
    };
    Ok((below + shift).max(0) as usize)
}

/// `F(t; α, β) = 1/(t−λ_0) + 2 Σ_{k=1}^{m} [cos(θ_k/2 − αk)cos(θ_k/2 − βk)/(t − |λ_k|)
/// + sin(θ_k/2 − αk)sin(θ_k/2 − βk)/(t + |λ_k|)]`.
pub fn eval_f(ctx: &SecularContext, t: f64, alpha: f64, beta: f64) -> Result<f64> {
    ctx.check_f_poles(t)?;
    let spectrum = &ctx.spectrum;
    let mut minus = Compensated::default();
    let mut plus = Compensated::default();
    for k in 1..=ctx.m {
        let h = spectrum.theta[k] / 2.0;
        let kf = k as f64;
        let (sa, ca) = (h - alpha * kf).sin_cos();
        let (sb, cb) = (h - beta * kf).sin_cos();
        minus.add(ca * cb / (t - spectrum.modulus[k]));
        plus.add(sa * sb / (t + spectrum.modulus[k]));
    }
    Ok(1.0 / (t - spectrum.lambda[0].re) + 2.0 * (minus.value() + plus.value()))
}

/// `G(t; α, β) = F(t; α, β) + 1/(t − λ_{n/2+1})`; even `n` only.
pub fn eval_g(ctx: &SecularContext, t: f64, alpha: f64, beta: f64) -> Result<f64> {
    let mid = ctx.middle().ok_or(Error::ParityMismatch { expected: "even" })?;
    ctx.check_pole(t, mid)?;
    Ok(eval_f(ctx, t, alpha, beta)? + 1.0 / (t - mid))
}

/// `F` for odd `n`, `G` for even `n`.
pub fn eval_kernel(ctx: &SecularContext, t: f64, alpha: f64, beta: f64) -> Result<f64> {
    match ctx.parity {
        Parity::Odd => eval_f(ctx, t, alpha, beta),
        Parity::Even => eval_g(ctx, t, alpha, beta),
    }
}

/// `f(t)` (odd `n`) or `g(t)` (even `n`).
pub fn eval_secular(ctx: &SecularContext, t: f64) -> Result<f64> {
    ctx.value_and_derivative(t).map(|(v, _)| v)
}

pub fn eval_secular_derivative(ctx: &SecularContext, t: f64) -> Result<f64> {
    ctx.value_and_derivative(t).map(|(_, d)| d)
}

pub fn eval_secular_with_derivative(ctx: &SecularContext, t: f64) -> Result<(f64, f64)> {
    ctx.value_and_derivative(t)
}

/// The secular function composed from kernel evaluations term by term:
///
/// ```text
/// 1 + a/N K(φ,φ) + b/N K(0,0) + ab/N² [K(φ,φ) K(0,0) − X²]
/// ```
///
/// with `X = F(0,φ)` for odd `n` and `X = G(0,φ) − 2/(t − λ_{n/2+1})` for even `n`.
pub fn eval_secular_literal(ctx: &SecularContext, t: f64) -> Result<f64> {
    ctx.check_all(t)?;
    let (a, b) = (ctx.params.a(), ctx.params.b());
    let nf = ctx.size_f();
    let phi = ctx.phi;
    let k_pp = eval_kernel(ctx, t, phi, phi)?;
    let k_00 = eval_kernel(ctx, t, 0.0, 0.0)?;
    let mut x = eval_kernel(ctx, t, 0.0, phi)?;
    if let Some(mid) = ctx.middle() {
        x -= 2.0 / (t - mid);
    }
    Ok(1.0 + a / nf * k_pp + b / nf * k_00 + a * b / (nf * nf) * (k_pp * k_00 - x * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(n: usize, a: f64, b: f64, c: f64) -> SecularContext {
        SecularContext::new(&HankelParams::new(n, a, b, c).unwrap())
    }

    #[test]
    fn f_hand_value_exchange() {
        // λ_0 = 1, θ_1 = 2π/3, |λ_1| = 1
        let c = ctx(1, 0.0, 0.0, 1.0);
        assert!(eval_f(&c, 0.0, 0.0, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn g_hand_value_unit_anticirculant() {
        let c = ctx(2, 0.0, 0.0, 1.0);
        assert!(eval_g(&c, 0.0, 0.0, 0.0).unwrap().abs() < 1e-15);
        let t = 3.7;
        let diff = eval_g(&c, t, 0.3, 0.1).unwrap() - eval_f(&c, t, 0.3, 0.1).unwrap();
        assert!((diff - 1.0 / (t + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn g_requires_even_parity() {
        let c = ctx(3, 1.0, 1.0, 1.0);
        assert!(matches!(eval_g(&c, 10.0, 0.0, 0.0), Err(Error::ParityMismatch { .. })));
    }

    #[test]
    fn kernel_tail_bound() {
        let c = ctx(7, 1.2, -0.7, 0.3);
        let maxpole = c.terms().iter().fold(0.0f64, |m, t| m.max(t.value.abs()));
        let bound_terms = (2 * c.m() + 1) as f64;
        for &t in &[3.0 * maxpole, -5.0 * maxpole, 40.0 * maxpole, -1e6] {
            let v = eval_f(&c, t, 0.4, -1.1).unwrap();
            assert!(v.abs() <= bound_terms / (t.abs() - maxpole));
        }
        let c = ctx(6, 1.2, -0.7, 0.3);
        assert!(eval_g(&c, 1e9, 0.0, 0.0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn kernel_positive_above_poles_for_equal_angles() {
        let c = ctx(9, -0.4, 1.3, 2.2);
        let maxpole = c.terms().iter().fold(f64::MIN, |m, t| m.max(t.value));
        for alpha in [0.0, 0.3, c.phi(), 2.0] {
            assert!(eval_f(&c, maxpole + 0.01, alpha, alpha).unwrap() > 0.0);
        }
    }

    #[test]
    fn kernel_symmetric_in_angles() {
        let c = ctx(11, 0.9, -2.1, 0.6);
        for &t in &[-7.3, 0.123, 4.4] {
            let x = eval_f(&c, t, 0.25, -1.5).unwrap();
            let y = eval_f(&c, t, -1.5, 0.25).unwrap();
            assert!((x - y).abs() <= f64::EPSILON * x.abs().max(1.0));
        }
    }

    #[test]
    fn pole_proximity_is_an_error() {
        let c = ctx(3, 1.0, 2.0, 3.0);
        let pole = c.terms()[1].value;
        assert!(matches!(eval_secular(&c, pole), Err(Error::PoleProximity { .. })));
        assert!(matches!(eval_f(&c, pole + 1e-14, 0.0, 0.0), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn trivial_secular_when_a_and_b_vanish() {
        for n in 1..8 {
            let c = ctx(n, 0.0, 0.0, 1.3);
            for &t in &[-10.0, 0.1, 0.77, 5.0] {
                assert_eq!(eval_secular(&c, t).unwrap(), 1.0);
                assert_eq!(eval_secular_derivative(&c, t).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn secular_tends_to_one() {
        let c = ctx(5, 1.0, -2.0, 0.5);
        assert!((eval_secular(&c, 1e8).unwrap() - 1.0).abs() < 1e-6);
        assert!((eval_secular(&c, -1e8).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn row_kernel_matches_general_kernel() {
        for n in [1usize, 2, 5, 8] {
            let c = ctx(n, 0.7, -1.2, 1.9);
            let size = n + 2;
            let t = 0.4321;
            for row in 0..size {
                let alpha = 2.0 * (0.0 - row as f64) * PI / size as f64;
                for (beta_is_phi, beta) in [(false, 0.0), (true, c.phi())] {
                    let want = eval_kernel(&c, t, alpha, beta).unwrap();
                    let got = c.row_kernel(t, row, beta_is_phi);
                    assert!((want - got).abs() < 1e-12 * want.abs().max(1.0), "n={n} row={row}");
                }
            }
        }
    }

    #[test]
    fn stabilized_matches_literal_away_from_poles() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(1..20);
            let c = ctx(n, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let t: f64 = rng.gen_range(-8.0..8.0);
            let dist = c.terms().iter().map(|p| (p.value - t).abs()).fold(f64::INFINITY, f64::min);
            if dist < 1e-2 {
                continue;
            }
            let x = eval_secular(&c, t).unwrap();
            let y = eval_secular_literal(&c, t).unwrap();
            assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "n={n} t={t}: {x} vs {y}");
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(1..12);
            let p = HankelParams::new(n, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
                .unwrap();
            let c = SecularContext::new(&p);
            let h = 1e-6 * p.scale();
            let mut done = 0;
            while done < 100 {
                let t: f64 = rng.gen_range(-2.0 * p.scale()..2.0 * p.scale());
                if c.terms().iter().any(|q| (q.value - t).abs() < 2e-2 * p.scale()) {
                    continue;
                }
                let fd = (eval_secular(&c, t + h).unwrap() - eval_secular(&c, t - h).unwrap()) / (2.0 * h);
                let an = eval_secular_derivative(&c, t).unwrap();
                assert!((fd - an).abs() <= 1e-5, "t={t}: {an} vs {fd}");
                done += 1;
            }
        }
    }

    #[test]
    fn counts_match_dense_spectrum() {
        use crate::matrix::build_hankel;
        use crate::oracle::jacobi_eigen;
        for (n, a, b, c) in
            [(5, 1.3, -0.4, 0.7), (6, -2.0, -2.0, 0.0), (4, 0.0, 1.5, -0.5), (3, 2.0, 0.0, 1.0), (7, 0.0, 0.0, 1.0)]
        {
            let p = HankelParams::new(n, a, b, c).unwrap();
            let ctx = SecularContext::new(&p);
            let values = jacobi_eigen(&build_hankel(&p), 1e-15).unwrap().values;
            for w in values.windows(2).filter(|w| w[1] - w[0] > 1e-6) {
                let t = 0.5 * (w[0] + w[1]);
                if ctx.terms().iter().any(|term| (t - term.value).abs() <= ctx.eps_pole()) {
                    continue;
                }
                let below = values.iter().filter(|&&v| v < t).count();
                assert_eq!(eigenvalues_below(&ctx, t).unwrap(), below, "{p:?} at {t}");
            }
        }
    }
}
