//! Matrices `M_{j,k} = ⟨j_out| W |k_in⟩` of Gaussian gate implementations between
//! truncated GKP code bases, with an analytic path and a dense-grid oracle path.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gkp_states::{
    code_basis_state_with_tail, envelope_average, eta, fourier_dual_params, gaussian_phase_expectation,
    gaussian_phase_expectation_quad, lattice_window, normalization_constant, GkpParams, StateFamily, DEFAULT_TAIL_TOL,
};
use crate::grid::{self, GridState};
use crate::numerics::{self, gaussian_interval_integral, quad_complex, Tolerance};
use crate::numerical_range::ComplexMatrix;

/// Default absolute tolerance for matrix elements.
pub const DEFAULT_ELEMENT_TOL: f64 = 1e-8;

/// Gaussian unitary implementing a logical gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSpec {
    /// `W_X = e^{-i√(2π/d) P}`
    PauliX,
    /// `W_X^n`, a shift by `n√(2π/d)`
    PauliXPower(u32),
    /// `W_Z^m = e^{i√(2π/d) m Q}`
    PauliZPower(i64),
    /// `W_F`, with the phase convention carried separately
    Fourier,
    /// `W_P = e^{i(Q² + c_d√(2π/d) Q)/2}`
    Phase,
}

impl GateSpec {
    pub fn label(&self) -> String {
        match self {
            GateSpec::PauliX => "X".into(),
            GateSpec::PauliXPower(n) => format!("X^{n}"),
            GateSpec::PauliZPower(1) => "Z".into(),
            GateSpec::PauliZPower(m) => format!("Z^{m}"),
            GateSpec::Fourier => "F".into(),
            GateSpec::Phase => "P".into(),
        }
    }
}

/// Which operator stands for the Fourier gate.
///
/// `𝓕` has kernel `(2π)^{-1/2} e^{-ipx}`. The rotation `e^{iπ(Q²+P²)/4}` equals
/// `e^{iπ/4} 𝓕^{-1}` with this kernel, while the gate table writes `e^{iπ/4} 𝓕`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourierConvention {
    /// `𝓕`: ideal limit `ω^{-jk}/√d`
    Forward,
    /// `𝓕^{-1}`: ideal limit `ω^{jk}/√d` (used for certificates)
    Inverse,
    /// `e^{iπ/4} 𝓕`, the gate-table reading of `W_F`
    PhasedForward,
    /// `e^{iπ(Q²+P²)/4} = e^{iπ/4} 𝓕^{-1}`
    Rotation,
}

impl FourierConvention {
    pub const ALL: [FourierConvention; 4] = [
        FourierConvention::Forward,
        FourierConvention::Inverse,
        FourierConvention::PhasedForward,
        FourierConvention::Rotation,
    ];

    fn uses_inverse(self) -> bool {
        matches!(self, FourierConvention::Inverse | FourierConvention::Rotation)
    }

    fn global_phase(self) -> Complex64 {
        match self {
            FourierConvention::Forward | FourierConvention::Inverse => Complex64::new(1.0, 0.0),
            _ => Complex64::from_polar(1.0, PI / 4.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed-form lattice sums and error-function integrals
    Analytic,
    /// Per-peak adaptive quadrature
    Quadrature,
    /// Dense-grid oracle with convergence control
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElements {
    pub gate: GateSpec,
    pub convention: Option<FourierConvention>,
    pub in_params: GkpParams,
    pub out_params: GkpParams,
    pub method: Method,
    pub error_estimate: f64,
    pub values: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct MatrixElementsJson {
    gate: GateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    convention: Option<FourierConvention>,
    in_params: GkpParams,
    out_params: GkpParams,
    method: Method,
    error_estimate: f64,
    values: Vec<[f64; 2]>,
}

impl MatrixElements {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dim();
        let mut values = Vec::with_capacity(d * d);
        for j in 0..d {
            for k in 0..d {
                let v = self.values[(j, k)];
                values.push([v.re, v.im]);
            }
        }
        serde_json::to_value(MatrixElementsJson {
            gate: self.gate,
            convention: self.convention,
            in_params: self.in_params,
            out_params: self.out_params,
            method: self.method,
            error_estimate: self.error_estimate,
            values,
        })
        .expect("matrix elements serialize")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: MatrixElementsJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Domain(format!("bad matrix-elements JSON: {e}")))?;
        let n = raw.values.len();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return domain(format!("{n} values do not form a square matrix"));
        }
        let values = DMatrix::from_fn(d, d, |j, k| {
            let [re, im] = raw.values[j * d + k];
            Complex64::new(re, im)
        });
        Ok(Self {
            gate: raw.gate,
            convention: raw.convention,
            in_params: raw.in_params,
            out_params: raw.out_params,
            method: raw.method,
            error_estimate: raw.error_estimate,
            values,
        })
    }

    /// Largest row and column `ℓ²` sums.
    pub fn max_line_norm_sq(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..d {
            let row: f64 = (0..d).map(|l| self.values[(j, l)].norm_sqr()).sum();
            let col: f64 = (0..d).map(|l| self.values[(l, j)].norm_sqr()).sum();
            worst = worst.max(row).max(col);
        }
        worst
    }
}

fn omega_pow(d: u32, e: i64) -> Complex64 {
    let r = e.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / d as f64)
}

fn require_code(params: &GkpParams) -> Result<()> {
    params.validate()?;
    if !params.code_orthogonal() {
        return domain(format!(
            "code basis needs eps <= 1/(2d) = {}, got {}",
            GkpParams::eps_d(params.d),
            params.eps
        ));
    }
    Ok(())
}

fn tail_of(tol: &Tolerance) -> f64 {
    DEFAULT_TAIL_TOL.min(tol.abs_tol)
}

/// `C_κ² Σ_y η_κ(y) η_κ(y + q)`: overlap of a truncated GKP state with its shift by `q` lattice units.
pub fn lattice_shift_overlap(kappa: f64, q: i64, tail_tol: f64) -> Result<f64> {
    if q == 0 {
        return Ok(1.0);
    }
    Ok(envelope_average(kappa, tail_tol, |y| {
        // η(y+q)/η(y) = exp(-κ²(2yq + q²)/2)
        let (yf, qf) = (y as f64, q as f64);
        Complex64::new((-0.5 * kappa * kappa * (2.0 * yf * qf + qf * qf)).exp(), 0.0)
    })?
    .re)
}

/// `W_X` between truncated code bases: nonzero only at `j = k ⊕ 1`.
pub fn mat_pauli_x(params: &GkpParams, tol: &Tolerance) -> Result<MatrixElements> {
    let mut m = mat_pauli_x_power(params, 1, tol)?;
    m.gate = GateSpec::PauliX;
    Ok(m)
}

/// `W_X^n`: shift by `n√(2π/d)`; `M_{j,k}` is the lattice-shift overlap for `q = (k+n) div d`.
pub fn mat_pauli_x_power(params: &GkpParams, n: u32, tol: &Tolerance) -> Result<MatrixElements> {
    require_code(params)?;
    let d = params.d as usize;
    let tail = tail_of(tol);
    let mut values = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for k in 0..d {
        let t = k + n as usize;
        let (q, j) = (t / d, t % d);
        values[(j, k)] = Complex64::new(lattice_shift_overlap(params.kappa, q as i64, tail)?, 0.0);
    }
    Ok(MatrixElements {
        gate: GateSpec::PauliXPower(n),
        convention: None,
        in_params: *params,
        out_params: *params,
        method: Method::Analytic,
        error_estimate: tail,
        values,
    })
}

/// How single-peak expectations are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakIntegrator {
    ClosedForm,
    Quadrature,
}

fn peak_expectation(params: &GkpParams, a2: f64, a1: f64, how: PeakIntegrator, tol: &Tolerance) -> Result<(Complex64, f64)> {
    match how {
        PeakIntegrator::ClosedForm => Ok((gaussian_phase_expectation(params.delta, Some(params.eps), a2, a1), 0.0)),
        PeakIntegrator::Quadrature => {
            let q = gaussian_phase_expectation_quad(params.delta, params.eps, a2, a1, &Tolerance::absolute(tol.abs_tol * 1e-2)?)?;
            Ok((q.value, q.error))
        }
    }
}

/// `W_Z^m`: diagonal with `M_{j,j} = ω^{mj} ⟨Ψ^ε_Δ, e^{2πimQ} Ψ^ε_Δ⟩`.
pub fn mat_pauli_z(params: &GkpParams, m: i64, tol: &Tolerance) -> Result<MatrixElements> {
    mat_pauli_z_with(params, m, PeakIntegrator::ClosedForm, tol)
}

pub fn mat_pauli_z_with(params: &GkpParams, m: i64, how: PeakIntegrator, tol: &Tolerance) -> Result<MatrixElements> {
    require_code(params)?;
    if m.unsigned_abs() > params.d as u64 {
        return domain(format!("|m| = {} exceeds d = {}", m.abs(), params.d));
    }
    let d = params.d as usize;
    let (scalar, err) = peak_expectation(params, 0.0, 2.0 * PI * m as f64, how, tol)?;
    // Envelope weights sum to one exactly; every peak carries the same factor.
    let mut values = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for j in 0..d {
        values[(j, j)] = omega_pow(params.d, m * j as i64) * scalar;
    }
    Ok(MatrixElements {
        gate: GateSpec::PauliZPower(m),
        convention: None,
        in_params: *params,
        out_params: *params,
        method: if how == PeakIntegrator::ClosedForm { Method::Analytic } else { Method::Quadrature },
        error_estimate: err,
        values,
    })
}

/// `W_P`: diagonal with
/// `M_{j,j} = e^{iπ(j² + c_d j)/d} C_κ² Σ_y η_κ(y)² ⟨Ψ^ε, e^{iπ(dt² + (2dy + 2j + c_d)t)} Ψ^ε⟩`.
pub fn mat_phase(params: &GkpParams, tol: &Tolerance) -> Result<MatrixElements> {
    mat_phase_with(params, PeakIntegrator::ClosedForm, tol)
}

pub fn mat_phase_with(params: &GkpParams, how: PeakIntegrator, tol: &Tolerance) -> Result<MatrixElements> {
    require_code(params)?;
    let d = params.d as i64;
    let cd = params.c_d() as i64;
    let tail = tail_of(tol);
    let mut values = DMatrix::from_element(d as usize, d as usize, Complex64::new(0.0, 0.0));
    let mut err = tail;
    for j in 0..d {
        let mut failure = None;
        let mut jerr = 0.0;
        let s = envelope_average(params.kappa, tail, |y| {
            let a1 = PI * (2 * d * y + 2 * j + cd) as f64;
            match peak_expectation(params, PI * d as f64, a1, how, tol) {
                Ok((v, e)) => {
                    jerr = f64::max(jerr, e);
                    v
                }
                Err(e) => {
                    failure = Some(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        err = err.max(jerr);
        let phase = Complex64::from_polar(1.0, PI * (j * j + cd * j) as f64 / d as f64);
        values[(j as usize, j as usize)] = phase * s;
    }
    Ok(MatrixElements {
        gate: GateSpec::Phase,
        convention: None,
        in_params: *params,
        out_params: *params,
        method: if how == PeakIntegrator::ClosedForm { Method::Analytic } else { Method::Quadrature },
        error_estimate: err,
        values,
    })
}

/// `S(u) = Σ_z η_κ(z) e^{-2πi d u z}` by Poisson summation (real, even in `u`).
fn envelope_character(kappa: f64, v: f64) -> f64 {
    let pref = kappa.sqrt() * PI.powf(-0.25) * (2.0 * PI).sqrt() / kappa;
    let c = 2.0 * PI * PI / (kappa * kappa);
    let n0 = v.round() as i64;
    (n0 - 3..=n0 + 3).map(|n| (-c * (v - n as f64).powi(2)).exp()).sum::<f64>() * pref
}

/// `G(q) = ∫_{-ε}^{ε} Ψ^ε_Δ(t) e^{-iqt} dt` (real, even in `q`).
struct PeakTransform {
    delta: f64,
    eps: f64,
    pref: f64,
    truncated: bool,
}

impl PeakTransform {
    fn new(delta: f64, eps: f64) -> Self {
        let norm = numerics::erf(eps / delta);
        Self {
            delta,
            eps,
            pref: PI.powf(-0.25) * delta.powf(-0.5) / norm.sqrt(),
            // Beyond ε/Δ ≈ 38.6 the truncation correction underflows.
            truncated: (eps / delta).powi(2) / 2.0 < 745.0,
        }
    }

    fn eval(&self, q: f64) -> f64 {
        if self.truncated {
            let a = Complex64::new(1.0 / (2.0 * self.delta * self.delta), 0.0);
            let b = Complex64::new(0.0, -q);
            gaussian_interval_integral(a, b, Complex64::new(0.0, 0.0), -self.eps, self.eps).re * self.pref
        } else {
            let x = q * self.delta;
            self.pref * (2.0 * PI).sqrt() * self.delta * (-0.5 * x * x).exp()
        }
    }
}

/// Forward-transform matrix by peak quadrature:
///
/// `M_{j,k} = √d ω^{-jk} C_κ C_κ' Σ_{z'} η_κ'(z') ∫ Ψ'^ε(u) e^{-2πiuk} S(u) G(2π(j + dz' + du)) du`.
fn fourier_forward_quadrature(inp: &GkpParams, out: &GkpParams, tol: &Tolerance) -> Result<(ComplexMatrix, f64)> {
    let d = inp.d;
    let df = d as f64;
    let tail = tail_of(tol);
    let c_in = normalization_constant(StateFamily::GKP_EPS, inp, &Tolerance::absolute(tail)?)?;
    let c_out = normalization_constant(StateFamily::GKP_EPS, out, &Tolerance::absolute(tail)?)?;
    let win = lattice_window(out.kappa, tail)?;
    let eta_out: Vec<(f64, f64)> = (win.0..=win.1).map(|z| (z as f64, eta(out.kappa, z as f64))).collect();
    let g = PeakTransform::new(inp.delta, inp.eps);
    let out_norm = PI.powf(-0.25) * out.delta.powf(-0.5) / numerics::erf(out.eps / out.delta).sqrt();
    let r = out.eps.min(12.0 * out.delta);
    let quad_tol = Tolerance::absolute(tol.abs_tol * 1e-2)?;
    let mut values = DMatrix::from_element(d as usize, d as usize, Complex64::new(0.0, 0.0));
    let mut err: f64 = 0.0;
    for j in 0..d {
        for k in 0..d {
            let kf = k as f64;
            let jf = j as f64;
            let integrand = |u: f64| {
                let envelope = out_norm * (-u * u / (2.0 * out.delta * out.delta)).exp() * envelope_character(inp.kappa, df * u);
                if envelope == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let mut t = 0.0;
                for &(z, w) in &eta_out {
                    t += w * g.eval(2.0 * PI * (jf + df * z + df * u));
                }
                Complex64::from_polar(envelope * t, -2.0 * PI * u * kf)
            };
            let q = quad_complex(integrand, -r, r, &quad_tol)?;
            let pref = df.sqrt() * c_in * c_out;
            values[(j as usize, k as usize)] = omega_pow(d, -((j * k) as i64)) * q.value * pref;
            err = err.max(q.error * pref);
        }
    }
    Ok((values, err + tail))
}

/// `W_F` between the code `(κ, Δ, ε)` and its dual `(2πdΔ, κ/(2πd), ε)`.
pub fn mat_fourier(in_params: &GkpParams, convention: FourierConvention, tol: &Tolerance) -> Result<MatrixElements> {
    let out = fourier_dual_params(in_params);
    mat_fourier_between(in_params, &out, convention, tol)
}

pub fn mat_fourier_between(in_params: &GkpParams, out_params: &GkpParams, convention: FourierConvention, tol: &Tolerance) -> Result<MatrixElements> {
    require_code(in_params)?;
    require_code(out_params)?;
    if in_params.d != out_params.d {
        return domain("input and output codes must share d");
    }
    let (fwd, err) = fourier_forward_quadrature(in_params, out_params, tol)?;
    // Basis wavefunctions are real, so ⟨j, 𝓕^{-1} k⟩ = conj⟨j, 𝓕 k⟩.
    let base = if convention.uses_inverse() { fwd.map(|v| v.conj()) } else { fwd };
    let values = base * convention.global_phase();
    Ok(MatrixElements {
        gate: GateSpec::Fourier,
        convention: Some(convention),
        in_params: *in_params,
        out_params: *out_params,
        method: Method::Quadrature,
        error_estimate: err,
        values,
    })
}

/// Whether the Fourier matrix-element bound is proven: `Δ <= κ/(2πd) <= ε <= 1/(2d)`, `κ < 1/d²`.
pub fn fourier_regime_ok(p: &GkpParams) -> bool {
    let t = p.kappa / (2.0 * PI * p.d as f64);
    p.delta <= t * (1.0 + 1e-12) && t <= p.eps && p.code_orthogonal() && p.kappa < 1.0 / (p.d as f64).powi(2)
}

// ---------------------------------------------------------------------------
// Grid oracle path
// ---------------------------------------------------------------------------

/// Grid-oracle settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub tol: Tolerance,
    pub max_points: usize,
    pub tail_tol: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance { abs_tol: 1e-10, rel_tol: 0.0 },
            max_points: 1 << 24,
            tail_tol: 1e-13,
        }
    }
}

fn code_states(p: &GkpParams, tail: f64) -> Result<Vec<crate::gkp_states::PeakSumState>> {
    (0..p.d).map(|j| code_basis_state_with_tail(p, StateFamily::GKP_EPS, j, tail)).collect()
}

fn support_radius(states: &[crate::gkp_states::PeakSumState]) -> f64 {
    states.iter().map(|s| {
        let (a, b) = s.extent(60.0);
        a.abs().max(b.abs())
    }).fold(0.0, f64::max)
}

fn next_pow2(x: f64) -> usize {
    let n = x.max(4.0).ceil() as usize;
    n.next_power_of_two()
}

fn flatten(m: &ComplexMatrix) -> Vec<Complex64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            v.push(m[(j, k)]);
        }
    }
    v
}

fn unflatten(v: &[Complex64], d: usize) -> ComplexMatrix {
    DMatrix::from_fn(d, d, |j, k| v[j * d + k])
}

/// Matrix elements of a position-diagonal or shift gate on the grid.
///
/// The grid spacing divides `√(2π/d)` so logical shifts are exact index shifts.
fn grid_position_gate(gate: GateSpec, p: &GkpParams, opts: &GridOptions) -> Result<MatrixElements> {
    require_code(p)?;
    let d = p.d as usize;
    let states = code_states(p, opts.tail_tol)?;
    let alpha = p.alpha();
    let shift = match gate {
        GateSpec::PauliX => alpha,
        GateSpec::PauliXPower(n) => alpha * n as f64,
        _ => 0.0,
    };
    let (qa, qb) = match gate {
        GateSpec::PauliZPower(m) => (0.0, alpha * m as f64),
        GateSpec::Phase => (0.5, p.c_d() as f64 * alpha / 2.0),
        _ => (0.0, 0.0),
    };
    let radius = support_radius(&states) + shift + 1.0;
    // Resolve the peak width and, for the quadratic phase, its largest local frequency.
    let width = p.scale() * p.delta;
    let mut h0 = width / 2.0;
    if qa != 0.0 {
        h0 = h0.min(PI / (2.0 * qa * radius + qb.abs()) / 2.0);
    }
    let per_alpha = (alpha / h0).ceil();
    let h = alpha / per_alpha;
    let n0 = next_pow2(2.0 * radius / h);
    // Doubling N at fixed L halves the spacing, which keeps √(2π/d)/h an integer.
    let l0 = n0 as f64 * h / 2.0;
    let computation = |l: f64, n: usize| grids_at(&states, l, n, shift, qa, qb, d);
    let conv = grid::converge(computation, (l0, n0), &opts.tol, opts.max_points)?;
    Ok(MatrixElements {
        gate,
        convention: None,
        in_params: *p,
        out_params: *p,
        method: Method::Grid,
        error_estimate: conv.error,
        values: unflatten(&conv.values, d),
    })
}

fn grids_at(states: &[crate::gkp_states::PeakSumState], l: f64, n: usize, shift: f64, qa: f64, qb: f64, d: usize) -> Result<Vec<Complex64>> {
    let rendered: Vec<GridState> = states.iter().map(|s| grid::render(s, l, n)).collect::<Result<_>>()?;
    let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for k in 0..d {
        let mut w = rendered[k].clone();
        if shift != 0.0 {
            w = grid::apply_shift(&w, shift)?;
        }
        if qa != 0.0 || qb != 0.0 {
            w = grid::apply_qpoly_phase(&w, qa, qb);
        }
        for j in 0..d {
            m[(j, k)] = rendered[j].inner(&w)?;
        }
    }
    Ok(flatten(&m))
}

/// Fourier matrix elements on the grid: render `|k⟩_in` in position space, transform, and
/// take inner products with `|j⟩_out` rendered on the momentum grid.
fn grid_fourier(inp: &GkpParams, convention: FourierConvention, opts: &GridOptions) -> Result<MatrixElements> {
    let out = fourier_dual_params(inp);
    require_code(inp)?;
    require_code(&out)?;
    let d = inp.d as usize;
    let s_in = code_states(inp, opts.tail_tol)?;
    let s_out = code_states(&out, opts.tail_tol)?;
    let supp_in = support_radius(&s_in) + 1.0;
    let supp_out = support_radius(&s_out) + 1.0;
    let h = (inp.scale() * inp.delta / 2.0).min(PI / supp_out);
    let l = supp_in.max(2.0 * PI / (out.scale() * out.delta));
    let n0 = next_pow2(2.0 * l / h);
    let l0 = n0 as f64 * h / 2.0;
    let inverse = convention.uses_inverse();
    let computation = |l: f64, n: usize| -> Result<Vec<Complex64>> {
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        let mut transformed = Vec::with_capacity(d);
        for s in &s_in {
            let g = grid::render(s, l, n)?;
            transformed.push(if inverse { grid::apply_inverse_fourier(&g)? } else { grid::apply_fourier(&g)? });
        }
        let lp = transformed[0].half_width;
        for j in 0..d {
            let gj = grid::render(&s_out[j], lp, n)?;
            for k in 0..d {
                m[(j, k)] = gj.inner(&transformed[k])?;
            }
        }
        Ok(flatten(&m))
    };
    let conv = grid::converge(computation, (l0, n0), &opts.tol, opts.max_points)?;
    let values = unflatten(&conv.values, d) * convention.global_phase();
    Ok(MatrixElements {
        gate: GateSpec::Fourier,
        convention: Some(convention),
        in_params: *inp,
        out_params: out,
        method: Method::Grid,
        error_estimate: conv.error,
        values,
    })
}

/// Grid-oracle matrix elements for any supported gate.
pub fn mat_grid(gate: GateSpec, params: &GkpParams, convention: FourierConvention, opts: &GridOptions) -> Result<MatrixElements> {
    match gate {
        GateSpec::Fourier => grid_fourier(params, convention, opts),
        _ => grid_position_gate(gate, params, opts),
    }
}

/// Grid points the oracle would start from for this gate (used to skip infeasible checks).
pub fn grid_start_size(gate: GateSpec, p: &GkpParams, tail_tol: f64) -> Result<usize> {
    let states = code_states(p, tail_tol)?;
    match gate {
        GateSpec::Fourier => {
            let out = fourier_dual_params(p);
            let s_out = code_states(&out, tail_tol)?;
            let supp_in = support_radius(&states) + 1.0;
            let supp_out = support_radius(&s_out) + 1.0;
            let h = (p.scale() * p.delta / 2.0).min(PI / supp_out);
            let l = supp_in.max(2.0 * PI / (out.scale() * out.delta));
            Ok(next_pow2(2.0 * l / h))
        }
        _ => {
            let radius = support_radius(&states) + 2.0 * p.alpha() + 1.0;
            let mut h = p.scale() * p.delta / 2.0;
            if gate == GateSpec::Phase {
                h = h.min(PI / (radius + p.alpha()) / 2.0);
            }
            Ok(next_pow2(2.0 * radius / h))
        }
    }
}

/// Largest `|analytic - grid|` entry.
pub fn max_deviation(a: &MatrixElements, b: &MatrixElements) -> Result<f64> {
    if a.dim() != b.dim() {
        return domain("matrix dimensions differ");
    }
    Ok((&a.values - &b.values).iter().map(|v| v.norm()).fold(0.0, f64::max))
}
