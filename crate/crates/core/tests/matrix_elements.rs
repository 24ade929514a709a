use std::f64::consts::PI;
use std::sync::OnceLock;

use gkp_bounds::gate_error::LogicalTarget;
use gkp_bounds::matrix_elements::{
    fourier_regime_ok, mat_fourier, mat_grid, mat_pauli_x, mat_pauli_x_power, mat_pauli_z, mat_pauli_z_with, mat_phase, mat_phase_with,
    max_deviation, GridOptions, Method, PeakIntegrator,
};
use gkp_bounds::{Complex, FourierConvention, GateSpec, GkpParams, MatrixElements, Tolerance};

fn tol() -> Tolerance {
    Tolerance::absolute(1e-10).unwrap()
}

fn omega(d: u32, k: i64) -> Complex {
    Complex::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// Fourier elements at d = 2, κ = 0.01, shared by several tests.
fn fourier_small() -> &'static MatrixElements {
    static M: OnceLock<MatrixElements> = OnceLock::new();
    M.get_or_init(|| mat_fourier(&GkpParams::symmetric(0.01, 2).unwrap(), FourierConvention::Inverse, &tol()).unwrap())
}

#[test]
fn pauli_x_structure() {
    for d in [2u32, 3, 5] {
        let kappa = 0.1;
        let m = mat_pauli_x(&GkpParams::symmetric(kappa, d).unwrap(), &tol()).unwrap();
        assert_eq!(m.method, Method::Analytic);
        let d = d as usize;
        for j in 0..d {
            for k in 0..d {
                let v = m.values[(j, k)];
                if j == (k + 1) % d {
                    assert!(v.im == 0.0 && v.re >= 1.0 - kappa * kappa && v.re <= 1.0);
                } else {
                    assert_eq!(v.norm(), 0.0);
                }
            }
        }
    }
}

#[test]
fn pauli_x_wrap_entry() {
    let m = mat_pauli_x(&GkpParams::symmetric(0.1, 2).unwrap(), &tol()).unwrap();
    // Σ η(z)η(z+1) / Σ η(z)², summed to 30 digits.
    assert!((m.values[(0, 1)].re - 0.997_503_122_397_460_1).abs() < 1e-13);
    assert_eq!(m.values[(1, 0)].re, 1.0);
}

#[test]
fn pauli_x_powers() {
    let p = GkpParams::symmetric(0.1, 3).unwrap();
    let id = mat_pauli_x_power(&p, 0, &tol()).unwrap();
    assert_eq!(id.values, LogicalTarget::x_power(3, 0).u);
    let full = mat_pauli_x_power(&p, 3, &tol()).unwrap();
    for j in 0..3 {
        assert!((full.values[(j, j)].re - mat_pauli_x(&p, &tol()).unwrap().values[(0, 2)].re).abs() < 1e-14);
    }
}

#[test]
fn pauli_z_examples() {
    for d in [2u32, 3, 4] {
        let p = GkpParams::symmetric(0.05, d).unwrap();
        let m = mat_pauli_z(&p, 1, &tol()).unwrap();
        let df = d as f64;
        let bound = 1.0 - 10.0 * df * df * p.delta * p.delta - 16.0 * (p.delta / p.eps).powi(4);
        for j in 0..d as usize {
            let r = omega(d, -(j as i64)) * m.values[(j, j)];
            assert!(r.im.abs() < 1e-14 && r.re >= bound);
        }
        let zero = mat_pauli_z(&p, 0, &tol()).unwrap();
        assert!((zero.values.clone() - LogicalTarget::z_power(d as usize, 0).u).norm() < 1e-15);
    }
}

#[test]
fn pauli_z_diagonal_value() {
    let m = mat_pauli_z(&GkpParams::symmetric(0.05, 2).unwrap(), 1, &tol()).unwrap();
    // ∫ e^{-x²/Δ²} cos 2πx / ∫ e^{-x²/Δ²} over [-1/4, 1/4], 30 digits.
    assert!((m.values[(0, 0)].re - 0.999_843_762_206_395_5).abs() < 1e-13);
    assert!((m.values[(1, 1)].re + 0.999_843_762_206_395_5).abs() < 1e-13);
}

#[test]
fn peak_integrators_agree() {
    for kappa in [0.05, 0.003, 0.001] {
        for d in [2u32, 3] {
            let p = GkpParams::symmetric(kappa, d).unwrap();
            let a = mat_pauli_z_with(&p, 2, PeakIntegrator::ClosedForm, &tol()).unwrap();
            let q = mat_pauli_z_with(&p, 2, PeakIntegrator::Quadrature, &tol()).unwrap();
            assert!(max_deviation(&a, &q).unwrap() < 1e-10);
            let a = mat_phase_with(&p, PeakIntegrator::ClosedForm, &tol()).unwrap();
            let q = mat_phase_with(&p, PeakIntegrator::Quadrature, &tol()).unwrap();
            assert!(max_deviation(&a, &q).unwrap() < 1e-10, "κ={kappa} d={d}");
        }
    }
}

#[test]
fn phase_gate_b00_value() {
    let p = GkpParams::symmetric(0.003, 2).unwrap().with_eps(0.25);
    let m = mat_phase(&p, &tol()).unwrap();
    let b00 = m.values[(0, 0)].norm();
    // Peak-by-peak numerical integration at 20 digits.
    assert!((b00 - 0.894_427_190_999_897_5).abs() < 1e-10);
    assert!(b00 <= 49.0 / 50.0 + 16.0 * (p.delta / p.eps).powi(4));
    let d = 2.0;
    assert!(b00 <= 1.0 / (1.0 + 2.0 * (d * p.delta / p.kappa).powi(2)).sqrt() + p.kappa + 16.0 * (p.delta / p.eps).powi(4));
}

#[test]
fn fourier_small_kappa_values() {
    let m = fourier_small();
    // Grid oracle, converged to 1.4e-13.
    let expect = [
        [Complex::new(0.707_106_781_180_951_6, 0.0), Complex::new(0.707_102_361_777_539_2, 0.0)],
        [Complex::new(0.707_102_361_777_372_4, 0.0), Complex::new(-0.707_097_942_401_585_6, 0.0)],
    ];
    for j in 0..2 {
        for k in 0..2 {
            assert!((m.values[(j, k)] - expect[j][k]).norm() < 1e-10, "({j},{k}) = {}", m.values[(j, k)]);
        }
    }
    assert!(fourier_regime_ok(&m.in_params));
}

#[test]
fn fourier_conventions_differ_by_conjugation_and_phase() {
    let p = GkpParams::symmetric(0.01, 2).unwrap();
    let inv = fourier_small();
    let fwd = mat_fourier(&p, FourierConvention::Forward, &tol()).unwrap();
    let rot = mat_fourier(&p, FourierConvention::Rotation, &tol()).unwrap();
    let phased = mat_fourier(&p, FourierConvention::PhasedForward, &tol()).unwrap();
    let e = Complex::from_polar(1.0, PI / 4.0);
    assert!((fwd.values.map(|v| v.conj()) - &inv.values).norm() < 1e-14);
    assert!((rot.values.clone() - inv.values.map(|v| v * e)).norm() < 1e-14);
    assert!((phased.values.clone() - fwd.values.map(|v| v * e)).norm() < 1e-14);
}

#[test]
fn fourier_tiny_kappa_is_close_to_ideal() {
    let kappa = 1e-3;
    let m = mat_fourier(&GkpParams::symmetric(kappa, 2).unwrap(), FourierConvention::Inverse, &tol()).unwrap();
    let dev = (&m.values - &LogicalTarget::fourier(2).u).iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(dev <= 40.0 * kappa.powf(0.25));
    assert!(dev < 1e-6);
    assert!((m.values[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-9);
}

#[test]
fn fourier_phase_covariance() {
    // M_{j,k} = ω^{jk} M'_{j,k} where M' carries no ideal phase: |M_{j,k}| is nearly 1/√d.
    let d = 3u32;
    let m = mat_fourier(&GkpParams::symmetric(0.01, d).unwrap(), FourierConvention::Inverse, &tol()).unwrap();
    for j in 0..3 {
        for k in 0..3 {
            let r = omega(d, -((j * k) as i64)) * m.values[(j, k)];
            assert!(r.im.abs() < 1e-6 && (r.re - 1.0 / 3f64.sqrt()).abs() < 1e-4, "({j},{k}) {r}");
        }
    }
}

#[test]
fn analytic_matches_grid() {
    let opts = GridOptions::default();
    for (gate, d) in [(GateSpec::PauliX, 2u32), (GateSpec::PauliZPower(1), 3), (GateSpec::PauliZPower(-2), 3), (GateSpec::Phase, 2), (GateSpec::Fourier, 2)] {
        let p = GkpParams::symmetric(0.05, d).unwrap();
        let a = gkp_bounds::gate_error::gate_matrix_elements(gate, &p, FourierConvention::Inverse, &tol()).unwrap();
        let g = mat_grid(gate, &p, FourierConvention::Inverse, &opts).unwrap();
        assert_eq!(g.method, Method::Grid);
        let allowed = 1e-8f64.max(g.error_estimate).max(a.error_estimate);
        assert!(max_deviation(&a, &g).unwrap() <= allowed, "{gate:?}");
    }
}

#[test]
fn json_round_trip() {
    let m = mat_pauli_z(&GkpParams::symmetric(0.1, 3).unwrap(), 1, &tol()).unwrap();
    let back = MatrixElements::from_json(&m.to_json()).unwrap();
    assert_eq!(back, m);
}

#[test]
fn code_parameters_are_required() {
    let p = GkpParams::symmetric(0.1, 2).unwrap().with_eps(0.4);
    assert!(mat_pauli_x(&p, &tol()).is_err());
    assert!(mat_pauli_z(&p, 1, &tol()).is_err());
    assert!(mat_phase(&p, &tol()).is_err());
    assert!(mat_fourier(&p, FourierConvention::Inverse, &tol()).is_err());
}
