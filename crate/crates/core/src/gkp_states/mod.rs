//! Approximate GKP states as finite sums of (truncated) Gaussian peaks.
//!
//! Every state is expanded into [`GaussTerm`]s `exp(-a (x - m)² + c)` supported on
//! `[lo, hi]`, already expressed in the final frame (squeezes and shifts are folded
//! into the peak parameters). Overlaps are then closed-form pair integrals.

pub mod lemmas;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{self, centred_gaussian_mass, gaussian_interval_integral, tail_radius, Tolerance};

/// Default certified omitted envelope mass of a lattice window.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Largest lattice window a state may use.
pub const MAX_PEAKS: i64 = 50_000_000;

/// Squeezing/truncation parameters of one code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GkpParams {
    pub kappa: f64,
    pub delta: f64,
    pub eps: f64,
    pub d: u32,
}

impl GkpParams {
    pub fn new(kappa: f64, delta: f64, eps: f64, d: u32) -> Result<Self> {
        let p = Self { kappa, delta, eps, d };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric squeezing `Δ = κ/(2πd)` with the optimal truncation `ε_d = 1/(2d)`.
    pub fn symmetric(kappa: f64, d: u32) -> Result<Self> {
        Self::new(kappa, kappa / (2.0 * PI * d as f64), Self::eps_d(d), d)
    }

    pub fn eps_d(d: u32) -> f64 {
        1.0 / (2.0 * d as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return domain(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return domain(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return domain(format!("eps must lie in (0, 1/2], got {}", self.eps));
        }
        if self.d < 2 {
            return domain(format!("d must be at least 2, got {}", self.d));
        }
        Ok(())
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    /// Logical shift `√(2π/d)`.
    pub fn alpha(&self) -> f64 {
        (2.0 * PI / self.d as f64).sqrt()
    }

    /// Code squeeze `√(2πd)`.
    pub fn scale(&self) -> f64 {
        (2.0 * PI * self.d as f64).sqrt()
    }

    pub fn c_d(&self) -> u32 {
        self.d % 2
    }

    /// Whether `ε <= 1/(2d)`, which makes truncated code basis states orthogonal.
    pub fn code_orthogonal(&self) -> bool {
        self.eps <= Self::eps_d(self.d) * (1.0 + 1e-12)
    }

    pub fn is_symmetric(&self) -> bool {
        let sym = self.kappa / (2.0 * PI * self.d as f64);
        (self.delta - sym).abs() <= 1e-12 * sym
    }
}

/// `(κ, Δ, ε, d) ↦ (2πdΔ, κ/(2πd), ε, d)`.
pub fn fourier_dual_params(params: &GkpParams) -> GkpParams {
    let t = 2.0 * PI * params.d as f64;
    GkpParams {
        kappa: t * params.delta,
        delta: params.kappa / t,
        eps: params.eps,
        d: params.d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `Σ_z η(z) Ψ(x - z)`
    Peakwise,
    /// `η(x) Σ_z Ψ(x - z)`
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateFamily {
    pub envelope: Envelope,
    pub truncated: bool,
}

impl StateFamily {
    /// `GKP_{κ,Δ}`
    pub const GKP: Self = Self { envelope: Envelope::Peakwise, truncated: false };
    /// `GKP^ε_{κ,Δ}`
    pub const GKP_EPS: Self = Self { envelope: Envelope::Peakwise, truncated: true };
    /// `gkp_{κ,Δ}`
    pub const GKP_POINTWISE: Self = Self { envelope: Envelope::Pointwise, truncated: false };
    /// `gkp^ε_{κ,Δ}`
    pub const GKP_POINTWISE_EPS: Self = Self { envelope: Envelope::Pointwise, truncated: true };

    pub fn label(&self) -> &'static str {
        match (self.envelope, self.truncated) {
            (Envelope::Peakwise, false) => "GKP",
            (Envelope::Peakwise, true) => "GKP^eps",
            (Envelope::Pointwise, false) => "gkp",
            (Envelope::Pointwise, true) => "gkp^eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostOp {
    /// `(M_α ψ)(x) = α^{-1/2} ψ(x/α)`
    Squeeze(f64),
    /// `ψ(x) ↦ ψ(x - β)`
    Shift(f64),
}

/// `exp(-a (x - m)² + c)` on `[lo, hi]` (endpoints may be infinite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussTerm {
    pub a: f64,
    pub m: f64,
    pub c: f64,
    pub lo: f64,
    pub hi: f64,
}

impl GaussTerm {
    pub fn apply(&self, op: PostOp) -> Self {
        match op {
            PostOp::Squeeze(alpha) => Self {
                a: self.a / (alpha * alpha),
                m: self.m * alpha,
                c: self.c - 0.5 * alpha.ln(),
                lo: self.lo * alpha,
                hi: self.hi * alpha,
            },
            PostOp::Shift(beta) => Self {
                a: self.a,
                m: self.m + beta,
                c: self.c,
                lo: self.lo + beta,
                hi: self.hi + beta,
            },
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            let t = x - self.m;
            (-self.a * t * t + self.c).exp()
        }
    }

    /// Distance from the centre beyond which the term is below `exp(-cut)` times its peak.
    pub fn reach(&self, cut: f64) -> f64 {
        (cut / self.a).sqrt()
    }

    /// Points where the term is non-negligible (`exp(-a t²) > e^{-cut}`), clipped to the support.
    pub fn extent(&self, cut: f64) -> (f64, f64) {
        let r = self.reach(cut);
        ((self.m - r).max(self.lo), (self.m + r).min(self.hi))
    }
}

/// `∫ t1(x) t2(x) dx` over the common support.
pub fn pair_integral(t1: &GaussTerm, t2: &GaussTerm) -> f64 {
    let lo = t1.lo.max(t2.lo);
    let hi = t1.hi.min(t2.hi);
    if !(hi > lo) {
        return 0.0;
    }
    let a = t1.a + t2.a;
    let dm = t1.m - t2.m;
    let expo = t1.c + t2.c - t1.a * t2.a / a * dm * dm;
    if expo < -745.0 {
        return 0.0;
    }
    let m = (t1.a * t1.m + t2.a * t2.m) / a;
    expo.exp() * centred_gaussian_mass(a, m, lo, hi)
}

/// `∫ t1(x) exp(i(p2 x² + p1 x)) t2(x) dx`, evaluated about the product centre.
pub fn pair_integral_phase(t1: &GaussTerm, t2: &GaussTerm, p2: f64, p1: f64) -> Complex64 {
    let lo = t1.lo.max(t2.lo);
    let hi = t1.hi.min(t2.hi);
    if !(hi > lo) {
        return Complex64::new(0.0, 0.0);
    }
    let a = t1.a + t2.a;
    let dm = t1.m - t2.m;
    let expo = t1.c + t2.c - t1.a * t2.a / a * dm * dm;
    if expo < -745.0 {
        return Complex64::new(0.0, 0.0);
    }
    let m = (t1.a * t1.m + t2.a * t2.m) / a;
    // x = m + y: p2 (m+y)² + p1 (m+y) = p2 y² + (2 p2 m + p1) y + (p2 m² + p1 m)
    let phase0 = p2 * m * m + p1 * m;
    let big_a = Complex64::new(a, -p2);
    let big_b = Complex64::new(0.0, 2.0 * p2 * m + p1);
    let c = Complex64::new(expo, phase0);
    gaussian_interval_integral(big_a, big_b, c, lo - m, hi - m)
}

/// Symbolic approximate GKP state (one of the four families, possibly a code basis state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSumState {
    pub family: StateFamily,
    pub params: GkpParams,
    pub norm_const: f64,
    /// Inclusive range of lattice points `z`.
    pub lattice_window: (i64, i64),
    pub post_ops: Vec<PostOp>,
}

/// `ln η_κ(x) = ½ ln κ - ¼ ln π - κ² x² / 2`
fn ln_eta(kappa: f64, x: f64) -> f64 {
    0.5 * kappa.ln() - 0.25 * PI.ln() - 0.5 * kappa * kappa * x * x
}

/// `η_κ(x) = √κ π^{-1/4} exp(-κ² x² / 2)`
pub fn eta(kappa: f64, x: f64) -> f64 {
    ln_eta(kappa, x).exp()
}

/// `Ψ_Δ(x) = π^{-1/4} Δ^{-1/2} exp(-x² / (2Δ²))`
pub fn psi(delta: f64, x: f64) -> f64 {
    (-0.25 * PI.ln() - 0.5 * delta.ln() - x * x / (2.0 * delta * delta)).exp()
}

/// Lattice window `[-R, R]` whose omitted envelope mass is certified below `tail_tol`.
pub fn lattice_window(kappa: f64, tail_tol: f64) -> Result<(i64, i64)> {
    if !(kappa > 0.0) || !(tail_tol > 0.0) {
        return domain("lattice window needs kappa > 0 and tail_tol > 0");
    }
    // η_κ(z)² ∝ ρ_s(z) with s = √π / κ
    let s = PI.sqrt() / kappa;
    let r = tail_radius(s, tail_tol).ceil() + 1.0;
    if r > MAX_PEAKS as f64 {
        return Err(Error::Resource(format!(
            "lattice window radius {r} exceeds the maximum {MAX_PEAKS} (kappa = {kappa})"
        )));
    }
    let r = r as i64;
    Ok((-r, r))
}

fn base_term(family: StateFamily, p: &GkpParams, z: i64, ln_norm: f64) -> GaussTerm {
    let zf = z as f64;
    let q = 1.0 / (2.0 * p.delta * p.delta);
    let mut c = ln_norm - 0.25 * PI.ln() - 0.5 * p.delta.ln();
    if family.truncated {
        c -= 0.5 * numerics::erf(p.eps / p.delta).ln();
    }
    let (lo, hi) = if family.truncated {
        (zf - p.eps, zf + p.eps)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    match family.envelope {
        Envelope::Peakwise => GaussTerm { a: q, m: zf, c: c + ln_eta(p.kappa, zf), lo, hi },
        Envelope::Pointwise => {
            let pk = 0.5 * p.kappa * p.kappa;
            let a = pk + q;
            GaussTerm {
                a,
                m: q * zf / a,
                c: c + ln_eta(p.kappa, 0.0) - pk * q / a * zf * zf,
                lo,
                hi,
            }
        }
    }
}

fn unnormalized_terms(family: StateFamily, p: &GkpParams, window: (i64, i64)) -> Vec<GaussTerm> {
    (window.0..=window.1).map(|z| base_term(family, p, z, 0.0)).collect()
}

/// `Σ_{i,j} ∫ a_i b_j` for two term lists sorted by centre.
pub fn term_overlap(a: &[GaussTerm], b: &[GaussTerm]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let min_a = a.iter().chain(b.iter()).map(|t| t.a).fold(f64::INFINITY, f64::min);
    // Pair weight decays like exp(-(a1 a2/(a1+a2)) dm²) >= exp(-(min_a/2) dm²).
    let reach = (2.0 * 90.0 / min_a).sqrt();
    let mut total = 0.0;
    let mut comp = 0.0;
    for ta in a {
        let start = b.partition_point(|t| t.m < ta.m - reach);
        for tb in &b[start..] {
            if tb.m > ta.m + reach {
                break;
            }
            // Kahan summation keeps the Gram sums accurate to ~1e-15.
            let y = pair_integral(ta, tb) - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
    }
    total
}

/// Normalization constant of a family, by exact lattice sums over a certified window.
///
/// `C_κ` uses `C_κ² Σ_z η_κ(z)² = 1`; the other constants come from the Gram sum of the
/// unnormalized peak expansion.
pub fn normalization_constant(family: StateFamily, params: &GkpParams, tol: &Tolerance) -> Result<f64> {
    params.validate()?;
    let tail = tol.abs_tol.min(DEFAULT_TAIL_TOL);
    let window = lattice_window(params.kappa, tail)?;
    if family == StateFamily::GKP_EPS {
        let s = PI.sqrt() / params.kappa;
        let spec = numerics::LatticeSumSpec::new(s, 0.0, tail)?;
        let f = numerics::periodic_gaussian(&spec)?;
        return Ok(1.0 / (params.kappa / PI.sqrt() * f).sqrt());
    }
    let terms = unnormalized_terms(family, params, window);
    let g = term_overlap(&terms, &terms);
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::Accuracy {
            message: "Gram sum of the peak expansion is not positive".into(),
            estimate: g,
            error: f64::NAN,
        });
    }
    Ok(1.0 / g.sqrt())
}

/// Builds a normalized state with a certified lattice window.
pub fn make_state(family: StateFamily, params: &GkpParams, tail_tol: f64) -> Result<PeakSumState> {
    params.validate()?;
    let window = lattice_window(params.kappa, tail_tol)?;
    let tol = Tolerance::absolute(tail_tol)?;
    let norm_const = normalization_constant(family, params, &tol)?;
    Ok(PeakSumState {
        family,
        params: *params,
        norm_const,
        lattice_window: window,
        post_ops: Vec::new(),
    })
}

/// `|j⟩ = e^{-ij√(2π/d)P} M_{√(2πd)} |base⟩`.
pub fn code_basis_state(params: &GkpParams, family: StateFamily, j: u32) -> Result<PeakSumState> {
    code_basis_state_with_tail(params, family, j, DEFAULT_TAIL_TOL)
}

pub fn code_basis_state_with_tail(params: &GkpParams, family: StateFamily, j: u32, tail_tol: f64) -> Result<PeakSumState> {
    if j >= params.d {
        return domain(format!("basis index {j} out of range for d = {}", params.d));
    }
    if family.truncated && !params.code_orthogonal() {
        return domain(format!(
            "truncated code basis needs eps <= 1/(2d) = {}, got {}",
            GkpParams::eps_d(params.d),
            params.eps
        ));
    }
    let mut st = make_state(family, params, tail_tol)?;
    st.post_ops.push(PostOp::Squeeze(params.scale()));
    if j > 0 {
        st.post_ops.push(PostOp::Shift(j as f64 * params.alpha()));
    }
    Ok(st)
}

impl PeakSumState {
    pub fn with_post_op(mut self, op: PostOp) -> Self {
        self.post_ops.push(op);
        self
    }

    /// Normalized terms in the final frame, sorted by centre.
    pub fn terms(&self) -> Vec<GaussTerm> {
        let ln_n = self.norm_const.ln();
        let mut out: Vec<GaussTerm> = (self.lattice_window.0..=self.lattice_window.1)
            .map(|z| {
                let mut t = base_term(self.family, &self.params, z, ln_n);
                for op in &self.post_ops {
                    t = t.apply(*op);
                }
                t
            })
            .collect();
        out.sort_by(|x, y| x.m.total_cmp(&y.m));
        out
    }

    /// Position wavefunction at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.terms().iter().map(|t| t.eval(x)).sum()
    }

    /// Interval outside which every term is below `e^{-cut}` of its peak.
    pub fn extent(&self, cut: f64) -> (f64, f64) {
        self.terms().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            let (a, b) = t.extent(cut);
            (lo.min(a), hi.max(b))
        })
    }

    pub fn norm_sq(&self) -> f64 {
        let t = self.terms();
        term_overlap(&t, &t)
    }
}

/// `⟨a, b⟩` by closed-form pair integrals. The families are real, so the value is real.
pub fn overlap(a: &PeakSumState, b: &PeakSumState, _tol: &Tolerance) -> Result<Complex64> {
    let ta = a.terms();
    let tb = b.terms();
    Ok(Complex64::new(term_overlap(&ta, &tb), 0.0))
}

/// `⟨a, e^{i(p2 Q² + p1 Q)} b⟩` by closed-form pair integrals.
///
/// The constant phase of each pair is evaluated in double precision, so for large
/// centres `|m|` the result carries an absolute phase error of order `p2 m² · 1e-16`.
pub fn overlap_with_phase(a: &PeakSumState, b: &PeakSumState, p2: f64, p1: f64) -> Complex64 {
    let ta = a.terms();
    let tb = b.terms();
    let min_a = ta.iter().chain(tb.iter()).map(|t| t.a).fold(f64::INFINITY, f64::min);
    let reach = (2.0 * 90.0 / min_a).sqrt();
    let mut total = Complex64::new(0.0, 0.0);
    for t1 in &ta {
        let start = tb.partition_point(|t| t.m < t1.m - reach);
        for t2 in &tb[start..] {
            if t2.m > t1.m + reach {
                break;
            }
            total += pair_integral_phase(t1, t2, p2, p1);
        }
    }
    total
}

/// `⟨Ψ^ε_Δ, e^{i(a2 Q² + a1 Q)} Ψ^ε_Δ⟩`; `eps = None` gives the untruncated `Ψ_Δ`.
pub fn gaussian_phase_expectation(delta: f64, eps: Option<f64>, a2: f64, a1: f64) -> Complex64 {
    let big_a = Complex64::new(1.0 / (delta * delta), -a2);
    let big_b = Complex64::new(0.0, a1);
    let zero = Complex64::new(0.0, 0.0);
    let pref = 1.0 / (PI.sqrt() * delta);
    match eps {
        Some(e) => {
            let norm = numerics::erf(e / delta);
            gaussian_interval_integral(big_a, big_b, zero, -e, e) * (pref / norm)
        }
        None => gaussian_interval_integral(big_a, big_b, zero, f64::NEG_INFINITY, f64::INFINITY) * pref,
    }
}

/// Adaptive-quadrature oracle for [`gaussian_phase_expectation`] (truncated case).
pub fn gaussian_phase_expectation_quad(delta: f64, eps: f64, a2: f64, a1: f64, tol: &Tolerance) -> Result<numerics::Quadrature> {
    let norm = numerics::erf(eps / delta);
    let pref = 1.0 / (PI.sqrt() * delta * norm);
    // Split at the origin so the Gaussian peak sits on a panel edge; beyond 40Δ the
    // integrand is below e^{-1600}, and a range much wider than Δ lets the rule miss the peak.
    let r = eps.min(40.0 * delta);
    let f = |x: f64| Complex64::from_polar(pref * (-x * x / (delta * delta)).exp(), a2 * x * x + a1 * x);
    let half = Tolerance { abs_tol: tol.abs_tol / 2.0, rel_tol: tol.rel_tol };
    let left = numerics::quad_complex(f, -r, 0.0, &half)?;
    let right = numerics::quad_complex(f, 0.0, r, &half)?;
    Ok(numerics::Quadrature {
        value: left.value + right.value,
        error: left.error + right.error,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// `C_κ² Σ_y η_κ(y)² g(y)` over the certified window.
pub fn envelope_average<F: FnMut(i64) -> Complex64>(kappa: f64, tail_tol: f64, mut g: F) -> Result<Complex64> {
    let window = lattice_window(kappa, tail_tol)?;
    let mut wsum = 0.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for y in window.0..=window.1 {
        let w = eta(kappa, y as f64).powi(2);
        wsum += w;
        acc += g(y) * w;
    }
    Ok(acc / wsum)
}

/// `⟨GKP^ε, e^{iπ(n2 Q² + n1 Q)} GKP^ε⟩` for integers `n2`, `n1`.
///
/// Peaks have disjoint supports, so the value is an envelope average of single-peak
/// expectations; the constant phase `e^{iπ(n2 y² + n1 y)}` is a sign computed exactly.
pub fn gkp_eps_phase_expectation(params: &GkpParams, n2: i64, n1: i64, tail_tol: f64) -> Result<Complex64> {
    params.validate()?;
    envelope_average(params.kappa, tail_tol, |y| {
        let parity = (n2 * y * y + n1 * y).rem_euclid(2);
        let sign = if parity == 0 { 1.0 } else { -1.0 };
        let a2 = PI * n2 as f64;
        let a1 = PI * (2 * n2 * y + n1) as f64;
        gaussian_phase_expectation(params.delta, Some(params.eps), a2, a1) * sign
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_kappa_matches_direct_sum() {
        let p = GkpParams::new(0.1, 0.01, 0.25, 2).unwrap();
        let c = normalization_constant(StateFamily::GKP_EPS, &p, &Tolerance::default()).unwrap();
        let s: f64 = (-2000..=2000).map(|z| eta(0.1, z as f64).powi(2)).sum();
        assert!((c - 1.0 / s.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn truncated_self_overlap_is_one() {
        let p = GkpParams::new(0.2, 0.05, 0.25, 2).unwrap();
        for fam in [StateFamily::GKP, StateFamily::GKP_EPS, StateFamily::GKP_POINTWISE, StateFamily::GKP_POINTWISE_EPS] {
            let st = make_state(fam, &p, DEFAULT_TAIL_TOL).unwrap();
            assert!((st.norm_sq() - 1.0).abs() < 1e-12, "{}", fam.label());
        }
    }

    #[test]
    fn post_ops_commute_with_evaluation() {
        let p = GkpParams::symmetric(0.3, 2).unwrap();
        let base = make_state(StateFamily::GKP_EPS, &p, DEFAULT_TAIL_TOL).unwrap();
        let code = code_basis_state(&p, StateFamily::GKP_EPS, 1).unwrap();
        let s = p.scale();
        for &x in &[0.0, 1.2, 1.25, -3.3, 7.0] {
            let direct = code.eval(x);
            let formula = s.powf(-0.5) * base.eval((x - p.alpha()) / s);
            assert!((direct - formula).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_expectation_matches_quadrature() {
        let tol = Tolerance::absolute(1e-13).unwrap();
        for &(delta, eps, a2, a1) in &[(0.05, 0.25, 2.0 * PI, PI), (0.2, 0.1, 0.0, 2.0 * PI), (0.01, 0.125, 3.0 * PI, 40.0)] {
            let exact = gaussian_phase_expectation(delta, Some(eps), a2, a1);
            let q = gaussian_phase_expectation_quad(delta, eps, a2, a1, &tol).unwrap();
            assert!((exact - q.value).norm() < 1e-11);
        }
    }
}
