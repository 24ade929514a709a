//! Gate-error certificates from the compressed operator `B` and its Crawford number.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gkp_states::{fourier_dual_params, gkp_eps_phase_expectation, GkpParams};
use crate::matrix_elements::{
    mat_fourier, mat_pauli_x_power, mat_pauli_z, mat_phase, FourierConvention, GateSpec, MatrixElements,
};
use crate::numerical_range::{crawford, op_norm, ComplexMatrix};
use crate::numerics::Tolerance;

/// Unitarity slack for logical targets.
pub const UNITARY_TOL: f64 = 1e-10;

/// Norm slack under which `B` counts as coming from a unitary implementation.
pub const NORM_SLACK: f64 = 1e-8;

/// Trivial cap on the gate error.
pub const ERROR_CAP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetLabel {
    X,
    Z,
    P,
    F,
    Custom,
}

/// Logical unitary `U` on `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalTarget {
    pub u: ComplexMatrix,
    pub label: TargetLabel,
}

fn omega(d: usize, e: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * e / d as f64)
}

impl LogicalTarget {
    pub fn new(u: ComplexMatrix, label: TargetLabel) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() == 0 {
            return domain("logical target must be a non-empty square matrix");
        }
        let dev = (u.adjoint() * &u - ComplexMatrix::identity(u.nrows(), u.ncols())).norm();
        if !(dev < UNITARY_TOL) {
            return domain(format!("logical target is not unitary (‖U†U - I‖ = {dev:.3e})"));
        }
        Ok(Self { u, label })
    }

    pub fn custom(u: ComplexMatrix) -> Result<Self> {
        Self::new(u, TargetLabel::Custom)
    }

    /// `X^n`: `|k⟩ ↦ |k + n⟩`.
    pub fn x_power(d: usize, n: u32) -> Self {
        let mut u = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            u[((k + n as usize) % d, k)] = Complex64::new(1.0, 0.0);
        }
        Self { u, label: if n == 1 { TargetLabel::X } else { TargetLabel::Custom } }
    }

    pub fn x(d: usize) -> Self {
        Self::x_power(d, 1)
    }

    /// `Z^m = diag(ω^{mj})`.
    pub fn z_power(d: usize, m: i64) -> Self {
        let u = ComplexMatrix::from_diagonal(&DVector::from_fn(d, |j, _| omega(d, (m * j as i64).rem_euclid(d as i64) as f64)));
        Self { u, label: if m == 1 { TargetLabel::Z } else { TargetLabel::Custom } }
    }

    pub fn z(d: usize) -> Self {
        Self::z_power(d, 1)
    }

    /// `P = diag(ω^{(j² + c_d j)/2})`.
    pub fn phase(d: usize) -> Self {
        let cd = (d % 2) as f64;
        let u = ComplexMatrix::from_diagonal(&DVector::from_fn(d, |j, _| {
            let j = j as f64;
            omega(d, (j * j + cd * j) / 2.0)
        }));
        Self { u, label: TargetLabel::P }
    }

    /// `F_{j,k} = ω^{jk}/√d`.
    pub fn fourier(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let u = ComplexMatrix::from_fn(d, d, |j, k| omega(d, ((j * k) % d) as f64) * s);
        Self { u, label: TargetLabel::F }
    }

    /// Target matching a gate implementation.
    pub fn for_gate(gate: GateSpec, d: usize) -> Self {
        match gate {
            GateSpec::PauliX => Self::x(d),
            GateSpec::PauliXPower(n) => Self::x_power(d, n),
            GateSpec::PauliZPower(m) => Self::z_power(d, m),
            GateSpec::Fourier => Self::fourier(d),
            GateSpec::Phase => Self::phase(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }
}

/// `B_{j,k} = Σ_m conj(U_{m,j}) M_{m,k}`, i.e. `B = U† M`.
pub fn build_b(m: &ComplexMatrix, target: &LogicalTarget) -> Result<ComplexMatrix> {
    if m.nrows() != target.dim() || m.ncols() != target.dim() {
        return domain(format!(
            "matrix elements are {}x{} but the target acts on C^{}",
            m.nrows(),
            m.ncols(),
            target.dim()
        ));
    }
    Ok(target.u.adjoint() * m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateErrorCertificate {
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GkpParams>,
    #[serde(rename = "c")]
    pub crawford_c: f64,
    pub lower: f64,
    pub upper: f64,
    pub shortcut_upper: Option<f64>,
    pub regime_ok: bool,
    pub provenance: Vec<String>,
}

impl GateErrorCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificate serializes")
    }
}

/// `lower = 2√(1 - c²)`, `upper = min(5√(1 - c²), 2)` for `‖B‖ ≤ 1`.
pub fn certificate(b: &ComplexMatrix) -> Result<GateErrorCertificate> {
    let norm = op_norm(b);
    if norm > 1.0 + NORM_SLACK {
        return domain(format!("‖B‖ = {norm} exceeds 1; use nonunitary_bound"));
    }
    let c = crawford(b)?.min(1.0);
    let root = (1.0 - c * c).max(0.0).sqrt();
    Ok(GateErrorCertificate {
        gate: "custom".into(),
        params: None,
        crawford_c: c,
        lower: (2.0 * root).min(ERROR_CAP),
        upper: (5.0 * root).min(ERROR_CAP),
        shortcut_upper: None,
        regime_ok: true,
        provenance: vec![
            "c: theta-scan duality".into(),
            "lower: 2 sqrt(1 - c^2)".into(),
            "upper: min(5 sqrt(1 - c^2), 2)".into(),
        ],
    })
}

/// `√2 (1 + ‖B‖⁴ - 2c)^{1/2} + 3‖W‖ (1 - c²)^{1/2}` for a bounded implementation `W`.
pub fn nonunitary_bound(b: &ComplexMatrix, w_norm: f64) -> Result<f64> {
    if !(w_norm >= 0.0) {
        return domain(format!("w_norm must be non-negative, got {w_norm}"));
    }
    let c = crawford(b)?;
    let n = op_norm(b);
    let first = (1.0 + n.powi(4) - 2.0 * c).max(0.0).sqrt();
    let second = (1.0 - c * c).max(0.0).sqrt();
    Ok(2f64.sqrt() * first + 3.0 * w_norm * second)
}

/// Smallest `s` such that `B` has at most `s` nonzeros per row and column.
pub fn sparsity(b: &ComplexMatrix) -> usize {
    let d = b.nrows();
    (0..d)
        .map(|j| {
            let row = (0..d).filter(|&l| b[(j, l)].norm() != 0.0).count();
            let col = (0..d).filter(|&l| b[(l, j)].norm() != 0.0).count();
            row.max(col)
        })
        .max()
        .unwrap_or(0)
}

/// Matrix-element shortcut bounds: `(sparse, general)`.
///
/// `sparse = 8((1 - min_j|B_jj|) + (s-1) max_{j≠ℓ}|B_jℓ|)^{1/2}`, present only when `B` is
/// `s`-sparse with a real nonzero diagonal; `general = 19 d^{3/8} (max|U - M|)^{1/4}`.
pub fn shortcut_bounds(m: &ComplexMatrix, target: &LogicalTarget, s: Option<usize>) -> Result<(Option<f64>, f64)> {
    let b = build_b(m, target)?;
    let d = b.nrows();
    let max_dev = (m - &target.u).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let general = 19.0 * (d as f64).powf(3.0 / 8.0) * max_dev.powf(0.25);
    let actual = sparsity(&b);
    let s = s.unwrap_or(actual);
    let real_diag = (0..d).all(|j| {
        let v = b[(j, j)];
        v.norm() > 0.0 && v.im.abs() <= 1e-12 * v.norm().max(1.0)
    });
    let sparse = (actual <= s && real_diag).then(|| {
        let min_diag = (0..d).map(|j| b[(j, j)].norm()).fold(f64::INFINITY, f64::min);
        let max_off = (0..d)
            .flat_map(|j| (0..d).filter(move |&l| l != j).map(move |l| (j, l)))
            .map(|(j, l)| b[(j, l)].norm())
            .fold(0.0, f64::max);
        8.0 * ((1.0 - min_diag).max(0.0) + (s.saturating_sub(1)) as f64 * max_off).sqrt()
    });
    Ok((sparse, general))
}

/// Hypotheses of the published bound for each gate on these parameters.
pub fn gate_regime_ok(gate: GateSpec, p: &GkpParams) -> bool {
    let eps_opt = (p.eps - GkpParams::eps_d(p.d)).abs() <= 1e-12;
    match gate {
        GateSpec::PauliX | GateSpec::PauliXPower(_) | GateSpec::PauliZPower(_) => {
            p.kappa > 0.0 && p.kappa < 0.25 && p.is_symmetric() && eps_opt
        }
        GateSpec::Fourier => p.delta <= p.kappa / (2.0 * PI * p.d as f64) * (1.0 + 1e-12) && eps_opt,
        GateSpec::Phase => false,
    }
}

/// Published upper bound for the gate (`8κ` for Paulis, `48 d^{3/8} κ^{1/16}` for `F`).
pub fn paper_bound(gate: GateSpec, p: &GkpParams) -> Option<f64> {
    match gate {
        GateSpec::PauliX | GateSpec::PauliZPower(1) => Some(8.0 * p.kappa),
        GateSpec::Fourier => Some(48.0 * (p.d as f64).powf(3.0 / 8.0) * p.kappa.powf(1.0 / 16.0)),
        _ => None,
    }
}

/// Matrix elements for a gate by the analytic path.
pub fn gate_matrix_elements(gate: GateSpec, p: &GkpParams, convention: FourierConvention, tol: &Tolerance) -> Result<MatrixElements> {
    match gate {
        GateSpec::PauliX => mat_pauli_x_power(p, 1, tol),
        GateSpec::PauliXPower(n) => mat_pauli_x_power(p, n, tol),
        GateSpec::PauliZPower(m) => mat_pauli_z(p, m, tol),
        GateSpec::Fourier => mat_fourier(p, convention, tol),
        GateSpec::Phase => mat_phase(p, tol),
    }
}

/// Certificate for given matrix elements against the matching logical target.
pub fn certificate_for(m: &MatrixElements, target: &LogicalTarget) -> Result<GateErrorCertificate> {
    let b = build_b(&m.values, target)?;
    let mut cert = certificate(&b)?;
    let (sparse, general) = shortcut_bounds(&m.values, target, None)?;
    cert.gate = m.gate.label();
    cert.params = Some(m.in_params);
    cert.regime_ok = gate_regime_ok(m.gate, &m.in_params);
    cert.shortcut_upper = Some(sparse.map_or(general, |s| s.min(general)));
    cert.provenance.push(format!("matrix elements: {:?}, estimate {:.2e}", m.method, m.error_estimate));
    if let Some(c) = m.convention {
        cert.provenance.push(format!("fourier convention: {c:?}"));
    }
    cert.provenance.push(match sparse {
        Some(_) => format!("shortcut: min(sparse s={}, general)", sparsity(&b)),
        None => "shortcut: general".into(),
    });
    Ok(cert)
}

/// Full pipeline: matrix elements, `B`, certificate.
pub fn gate_certificate(gate: GateSpec, p: &GkpParams, convention: FourierConvention, tol: &Tolerance) -> Result<GateErrorCertificate> {
    let m = gate_matrix_elements(gate, p, convention, tol)?;
    certificate_for(&m, &LogicalTarget::for_gate(gate, p.d as usize))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NogoReport {
    pub params: GkpParams,
    /// `|B_{0,0}| = |⟨GKP^ε, e^{iπ(dQ² + c_d Q)} GKP^ε⟩|`
    pub b00_abs: f64,
    /// `2(1 - |B_{0,0}|)`
    pub lower: f64,
    pub lower_passes: bool,
    /// `κ < 1/250`, `2πdΔ/κ ≥ 1`, `ε ≤ 1/(2d)`
    pub regime_ok: bool,
    /// `49/50 + 16(Δ/ε)⁴`
    pub cap: f64,
    pub cap_holds: bool,
    /// `1/√(1 + 2(dΔ/κ)²) + κ + 16(Δ/ε)⁴`
    pub analytic_cap: f64,
    pub analytic_cap_holds: bool,
}

/// Required lower bound for symmetric codes.
pub const NOGO_SYMMETRIC: f64 = 3.0 / 100.0;
/// Required max-of-two lower bound for asymmetric codes.
pub const NOGO_ASYMMETRIC: f64 = 1.0 / 50.0;

/// `|B_{0,0}|` of the linear-optics phase gate.
pub fn phase_b00(p: &GkpParams, tail_tol: f64) -> Result<f64> {
    Ok(gkp_eps_phase_expectation(p, p.d as i64, p.c_d() as i64, tail_tol)?.norm())
}

pub fn nogo_check(p: &GkpParams, tail_tol: f64) -> Result<NogoReport> {
    let b00 = phase_b00(p, tail_tol)?;
    let lower = 2.0 * (1.0 - b00);
    let trunc = 16.0 * (p.delta / p.eps).powi(4);
    let cap = 49.0 / 50.0 + trunc;
    let ratio = p.d as f64 * p.delta / p.kappa;
    let analytic_cap = 1.0 / (1.0 + 2.0 * ratio * ratio).sqrt() + p.kappa + trunc;
    let regime_ok = p.kappa < 1.0 / 250.0 && 2.0 * PI * ratio >= 1.0 - 1e-12 && p.code_orthogonal();
    Ok(NogoReport {
        params: *p,
        b00_abs: b00,
        lower,
        lower_passes: lower >= NOGO_SYMMETRIC,
        regime_ok,
        cap,
        cap_holds: b00 <= cap,
        analytic_cap,
        analytic_cap_holds: b00 <= analytic_cap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricNogo {
    pub input: NogoReport,
    /// Code reached by the Fourier implementation, `(2πdΔ, κ/(2πd))`
    pub output: NogoReport,
    pub max_lower: f64,
    pub passes: bool,
    /// `Δ ≤ 1/(80d)` and `κ < d^{-6}`
    pub regime_ok: bool,
}

/// Max-of-two-codes phase-gate lower bound at optimal truncation.
pub fn nogo_asymmetric(kappa: f64, delta: f64, d: u32, tail_tol: f64) -> Result<AsymmetricNogo> {
    let p = GkpParams::new(kappa, delta, GkpParams::eps_d(d), d)?;
    let q = fourier_dual_params(&p);
    let input = nogo_check(&p, tail_tol)?;
    let output = nogo_check(&q, tail_tol)?;
    let max_lower = input.lower.max(output.lower);
    Ok(AsymmetricNogo {
        input,
        output,
        max_lower,
        passes: max_lower >= NOGO_ASYMMETRIC,
        regime_ok: delta <= 1.0 / (80.0 * d as f64) && kappa < (d as f64).powi(-6),
    })
}

/// Gate-error interval after moving to a code whose basis is `δ`-close vector-wise:
/// `(2/5)err - 4√(dδ) ≤ err~ ≤ (5/2)err + 10√(dδ)`.
pub fn continuity_transfer(cert: &GateErrorCertificate, delta: f64, d: usize) -> Result<(f64, f64)> {
    if !(delta >= 0.0) {
        return domain(format!("delta must be non-negative, got {delta}"));
    }
    let r = (d as f64 * delta).sqrt();
    let lower = (0.4 * cert.lower - 4.0 * r).max(0.0);
    let upper = (2.5 * cert.upper + 10.0 * r).min(ERROR_CAP);
    Ok((lower, upper))
}

/// Upper bound for the untruncated symmetric code: `(5/2)err + 20 d^{3/4} κ^{1/4}`.
pub fn untruncated_upper(err: f64, d: usize, kappa: f64) -> f64 {
    2.5 * err + 20.0 * (d as f64).powf(0.75) * kappa.powf(0.25)
}

/// Symmetric orthogonalization: columns of `A G^{-1/2}` with `G = A†A`.
pub fn lowdin_orthogonalize(vectors: &[DVector<Complex64>]) -> Result<Vec<DVector<Complex64>>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let n = vectors[0].len();
    if vectors.iter().any(|v| v.len() != n) {
        return domain("vectors have different lengths");
    }
    let a = DMatrix::from_columns(vectors);
    let g = a.adjoint() * &a;
    let eig = SymmetricEigen::new(g);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if !(min > 1e-12 * max.max(1.0)) {
        return domain(format!("Gram matrix is numerically singular (smallest eigenvalue {min:.3e})"));
    }
    let inv_sqrt = eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0));
    let u = &eig.eigenvectors;
    let g_inv_sqrt = u * ComplexMatrix::from_diagonal(&inv_sqrt) * u.adjoint();
    let xi = a * g_inv_sqrt;
    Ok(xi.column_iter().map(|c| c.into_owned()).collect())
}

/// `max_k ‖ξ_k - φ_k‖`.
pub fn max_vector_distance(a: &[DVector<Complex64>], b: &[DVector<Complex64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_formulas() {
        let c: f64 = 0.99;
        let root = (1.0 - c * c).sqrt();
        assert!((2.0 * root - 0.28213).abs() < 1e-5);
        assert!((5.0 * root - 0.70534).abs() < 1e-5);
        let cert = certificate(&ComplexMatrix::identity(3, 3)).unwrap();
        assert_eq!((cert.lower, cert.upper), (0.0, 0.0));
        assert!(nonunitary_bound(&ComplexMatrix::identity(2, 2), 1.0).unwrap().abs() < 1e-7);
    }

    #[test]
    fn targets_are_unitary() {
        for d in 2..6 {
            for t in [LogicalTarget::x(d), LogicalTarget::z(d), LogicalTarget::phase(d), LogicalTarget::fourier(d)] {
                LogicalTarget::custom(t.u).unwrap();
            }
        }
    }
}
