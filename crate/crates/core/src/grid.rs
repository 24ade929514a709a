//! Dense uniform-grid wavefunctions: the independent oracle for every analytic overlap.
//!
//! Samples live at `x_k = -L + k h` with `h = 2L/N` and `N` a power of two divisible by 4,
//! so `x = 0` is a grid point and the centred DFT needs no extra phase.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};
use crate::gkp_states::{make_state, GaussTerm, GkpParams, PeakSumState, PostOp, StateFamily};
use crate::numerics::{centred_gaussian_mass, Tolerance};

/// Largest grid the oracle will allocate.
pub const MAX_GRID_POINTS: usize = 1 << 25;

/// Mass allowed to fall outside the grid when rendering or shifting.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Terms are rendered until `exp(-a t²)` drops below `e^{-RENDER_CUT}`.
const RENDER_CUT: f64 = 60.0;

/// Half-length of the windowed-sinc interpolation stencil.
const SINC_HALF_WIDTH: i64 = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub half_width: f64,
    pub samples: Vec<Complex64>,
}

fn check_size(l: f64, n: usize) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return domain(format!("grid half-width must be positive, got {l}"));
    }
    if n < 4 || !n.is_power_of_two() {
        return domain(format!("grid size must be a power of two >= 4, got {n}"));
    }
    if n > MAX_GRID_POINTS {
        return Err(Error::Resource(format!("grid of {n} points exceeds the maximum {MAX_GRID_POINTS}")));
    }
    Ok(())
}

impl GridState {
    pub fn zeros(l: f64, n: usize) -> Result<Self> {
        check_size(l, n)?;
        Ok(Self { half_width: l, samples: vec![Complex64::new(0.0, 0.0); n] })
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(l: f64, n: usize, mut f: F) -> Result<Self> {
        let mut g = Self::zeros(l, n)?;
        let h = g.h();
        for (k, s) in g.samples.iter_mut().enumerate() {
            *s = f(-l + k as f64 * h);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.h()
    }

    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.h()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.n() == other.n() && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }

    /// `⟨self, other⟩ = h Σ conj(self_k) other_k`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_grid(other) {
            return domain("inner product of states on different grids");
        }
        let s: Complex64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.h())
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        if !self.same_grid(other) {
            return domain("distance between states on different grids");
        }
        let s: f64 = self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.h()).sqrt())
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        for s in &mut self.samples {
            *s *= c;
        }
        self
    }

    /// Norm fraction carried by the outer `frac` of points at each end.
    pub fn edge_mass(&self, frac: f64) -> f64 {
        let n = self.n();
        let k = ((n as f64 * frac).ceil() as usize).max(1).min(n / 2);
        let edge: f64 = self.samples[..k].iter().chain(&self.samples[n - k..]).map(|s| s.norm_sqr()).sum();
        let total: f64 = self.samples.iter().map(|s| s.norm_sqr()).sum();
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }

    /// Writes `x,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,re,im")?;
        for (k, s) in self.samples.iter().enumerate() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", self.x(k), s.re, s.im)?;
        }
        Ok(())
    }
}

fn outside_mass(t: &GaussTerm, l: f64) -> f64 {
    // ∫ t² over the part of the support outside [-L, L]
    let a = 2.0 * t.a;
    let w = (2.0 * t.c).exp();
    let left = if t.lo < -l { centred_gaussian_mass(a, t.m, t.lo, (-l).min(t.hi)) } else { 0.0 };
    let right = if t.hi > l { centred_gaussian_mass(a, t.m, l.max(t.lo), t.hi) } else { 0.0 };
    w * (left + right)
}

/// Samples the position wavefunction of a symbolic state (post_ops included).
pub fn render(state: &PeakSumState, l: f64, n: usize) -> Result<GridState> {
    render_terms(&state.terms(), l, n)
}

pub fn render_terms(terms: &[GaussTerm], l: f64, n: usize) -> Result<GridState> {
    let mut g = GridState::zeros(l, n)?;
    let h = g.h();
    let lost: f64 = terms.iter().map(|t| outside_mass(t, l)).sum();
    if lost > SUPPORT_TOL {
        return domain(format!("grid half-width {l} leaves mass {lost:e} outside the grid"));
    }
    for t in terms {
        let (lo, hi) = t.extent(RENDER_CUT);
        let lo = lo.max(-l);
        let hi = hi.min(l - h);
        if !(hi >= lo) {
            continue;
        }
        let k0 = ((lo + l) / h).ceil() as usize;
        let k1 = (((hi + l) / h).floor() as usize).min(n - 1);
        for k in k0..=k1 {
            let x = -l + k as f64 * h;
            if x < t.lo || x > t.hi {
                continue;
            }
            let dx = x - t.m;
            g.samples[k].re += (-t.a * dx * dx + t.c).exp();
        }
    }
    Ok(g)
}

/// Multiplies by `e^{i(a x² + b x)}`.
pub fn apply_qpoly_phase(g: &GridState, a: f64, b: f64) -> GridState {
    let mut out = g.clone();
    for (k, s) in out.samples.iter_mut().enumerate() {
        let x = g.x(k);
        *s *= Complex64::from_polar(1.0, a * x * x + b * x);
    }
    out
}

/// `ψ(x) ↦ ψ(x - β)`: an exact index shift when `β/h` is an integer, otherwise a spectral shift.
pub fn apply_shift(g: &GridState, beta: f64) -> Result<GridState> {
    let h = g.h();
    let n = g.n();
    let steps = beta / h;
    let r = steps.round();
    if (steps - r).abs() < 1e-9 * steps.abs().max(1.0) {
        let s = r as i64;
        if s.unsigned_abs() as usize >= n {
            return domain("shift moves the whole state off the grid");
        }
        let mut out = GridState::zeros(g.half_width, n)?;
        let mut lost = 0.0;
        for (k, v) in g.samples.iter().enumerate() {
            let j = k as i64 + s;
            if j >= 0 && (j as usize) < n {
                out.samples[j as usize] = *v;
            } else {
                lost += v.norm_sqr();
            }
        }
        if lost * h > SUPPORT_TOL {
            return domain(format!("shift by {beta} pushes mass {:e} off the grid", lost * h));
        }
        return Ok(out);
    }
    // Spectral shift: multiply the transform by e^{-iβp}; the result is periodic, so
    // mass that would wrap around is reported as overflow.
    let spec = fourier_transform(g, false)?;
    let shifted = apply_qpoly_phase(&spec, 0.0, -beta);
    let out = fourier_transform(&shifted, true)?;
    let out = GridState { half_width: g.half_width, samples: out.samples };
    let wrapped = wrapped_mass(g, beta);
    if wrapped > SUPPORT_TOL {
        return domain(format!("shift by {beta} wraps mass {wrapped:e} around the grid"));
    }
    Ok(out)
}

fn wrapped_mass(g: &GridState, beta: f64) -> f64 {
    let h = g.h();
    let l = g.half_width;
    g.samples
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let y = -l + *k as f64 * h + beta;
            !(-l..l).contains(&y)
        })
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * h
}

fn windowed_sinc(t: f64) -> f64 {
    let sigma = (SINC_HALF_WIDTH as f64 / PI).sqrt() * 1.5;
    let w = (-t * t / (2.0 * sigma * sigma)).exp();
    if t.abs() < 1e-12 {
        w
    } else {
        (PI * t).sin() / (PI * t) * w
    }
}

/// `(M_α ψ)(x) = α^{-1/2} ψ(x/α)` by Gaussian-windowed sinc interpolation.
pub fn apply_squeeze(g: &GridState, alpha: f64) -> Result<GridState> {
    if !(alpha > 0.0) {
        return domain(format!("squeeze factor must be positive, got {alpha}"));
    }
    let n = g.n();
    let h = g.h();
    let l = g.half_width;
    // Mass whose image x = α y leaves the grid.
    let lost: f64 = g
        .samples
        .iter()
        .enumerate()
        .filter(|(k, _)| (alpha * g.x(*k)).abs() >= l)
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * h;
    if lost > SUPPORT_TOL {
        return domain(format!("squeeze by {alpha} pushes mass {lost:e} off the grid"));
    }
    let scale = alpha.powf(-0.5);
    let mut out = GridState::zeros(l, n)?;
    for (j, s) in out.samples.iter_mut().enumerate() {
        let y = (-l + j as f64 * h) / alpha;
        let u = (y + l) / h;
        let k0 = u.floor() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (k0 - SINC_HALF_WIDTH + 1)..=(k0 + SINC_HALF_WIDTH) {
            if k < 0 || k >= n as i64 {
                continue;
            }
            acc += g.samples[k as usize] * windowed_sinc(u - k as f64);
        }
        *s = acc * scale;
    }
    Ok(out)
}

/// Centred continuous Fourier transform with kernel `(2π)^{-1/2} e^{∓ipx}`.
///
/// The output grid has the same `N` and half-width `π/h`. `inverse` selects `e^{+ipx}`.
pub fn fourier_transform(g: &GridState, inverse: bool) -> Result<GridState> {
    let n = g.n();
    check_size(g.half_width, n)?;
    let h = g.h();
    let mut buf: Vec<Complex64> = g
        .samples
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    fft.process(&mut buf);
    let pref = h / (2.0 * PI).sqrt();
    for (m, v) in buf.iter_mut().enumerate() {
        *v *= if m % 2 == 0 { pref } else { -pref };
    }
    Ok(GridState { half_width: PI / h, samples: buf })
}

/// `𝓕 g` with kernel `(2π)^{-1/2} e^{-ipx}`, checking for aliasing in both domains.
pub fn apply_fourier(g: &GridState) -> Result<GridState> {
    transform_checked(g, false)
}

/// `𝓕^{-1} g` with kernel `(2π)^{-1/2} e^{+ipx}`.
pub fn apply_inverse_fourier(g: &GridState) -> Result<GridState> {
    transform_checked(g, true)
}

fn transform_checked(g: &GridState, inverse: bool) -> Result<GridState> {
    let before = g.edge_mass(1.0 / 64.0);
    let out = fourier_transform(g, inverse)?;
    let after = out.edge_mass(1.0 / 64.0);
    let worst = before.max(after);
    if worst > SUPPORT_TOL {
        return Err(Error::Accuracy {
            message: "aliasing: mass near the grid boundary".into(),
            estimate: worst,
            error: worst,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Converged {
    pub values: Vec<Complex64>,
    pub error: f64,
    pub half_width: f64,
    pub n_points: usize,
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Refines a grid functional until doubling `N` (finer spacing) and, independently,
/// doubling `L` together with `N` (wider window) change it by less than `abs_tol`.
///
/// Returns the finest of the compared values with the larger of the two deltas as
/// its error estimate.
pub fn converge<F>(mut computation: F, start: (f64, usize), tol: &Tolerance, max_n: usize) -> Result<Converged>
where
    F: FnMut(f64, usize) -> Result<Vec<Complex64>>,
{
    let (mut l, mut n) = start;
    check_size(l, n)?;
    let mut base = computation(l, n)?;
    loop {
        if 2 * n > max_n.min(MAX_GRID_POINTS) {
            return Err(Error::Accuracy {
                message: format!("grid refinement budget of {max_n} points exhausted at L = {l}, N = {n}"),
                estimate: base.first().map(|v| v.norm()).unwrap_or(0.0),
                error: f64::NAN,
            });
        }
        let fine = computation(l, 2 * n)?;
        let wide = computation(2.0 * l, 2 * n)?;
        let d_fine = max_diff(&base, &fine);
        let d_wide = max_diff(&base, &wide);
        let err = d_fine.max(d_wide);
        let scale = base.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if err <= tol.abs_tol.max(tol.rel_tol * scale) {
            return Ok(Converged { values: fine, error: err, half_width: l, n_points: 2 * n });
        }
        if d_wide > d_fine {
            l *= 2.0;
            base = wide;
        } else {
            base = fine;
        }
        n *= 2;
    }
}

/// Grid comparison of `𝓕 GKP_{κ,Δ}` with `M_{2π} gkp_{2πΔ, κ/(2π)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierIdentity {
    /// L² distance on the finer grid
    pub distance: f64,
    /// Change of the distance between the two grids
    pub error: f64,
    pub half_width: f64,
    pub n_points: usize,
}

fn fourier_identity_at(src: &PeakSumState, dst: &PeakSumState, l: f64, n: usize) -> Result<f64> {
    let f = apply_fourier(&render(src, l, n)?)?;
    let target = render(dst, f.half_width, f.n())?;
    f.distance(&target)
}

/// Renders both sides on a grid resolving the peaks of width `Δ`, then once more at twice the
/// resolution; reports the finer distance and the change between the two.
pub fn fourier_identity(kappa: f64, delta: f64, tail_tol: f64) -> Result<FourierIdentity> {
    // ε and d do not enter the untruncated states.
    let p = GkpParams::new(kappa, delta, 0.5, 2)?;
    let q = GkpParams::new(2.0 * PI * delta, kappa / (2.0 * PI), 0.5, 2)?;
    let src = make_state(StateFamily::GKP, &p, tail_tol)?;
    let dst = make_state(StateFamily::GKP_POINTWISE, &q, tail_tol)?.with_post_op(PostOp::Squeeze(2.0 * PI));
    let reach = |s: &PeakSumState| {
        let (lo, hi) = s.extent(RENDER_CUT);
        lo.abs().max(hi.abs())
    };
    let l = 1.1 * reach(&src);
    let h = (delta / 4.0).min(PI / (1.1 * reach(&dst)));
    let n = ((2.0 * l / h).ceil() as usize).next_power_of_two().max(4);
    check_size(l, 2 * n)?;
    let coarse = fourier_identity_at(&src, &dst, l, n)?;
    let fine = fourier_identity_at(&src, &dst, l, 2 * n)?;
    Ok(FourierIdentity { distance: fine, error: (fine - coarse).abs(), half_width: l, n_points: 2 * n })
}
