//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gkp_bounds::circuit::{CircuitGraph, Edge, GateEntry, Role, Vertex};
use gkp_bounds::gate_error::{
    build_b, gate_certificate, gate_matrix_elements, lowdin_orthogonalize, max_vector_distance, nogo_check, LogicalTarget,
    NOGO_SYMMETRIC,
};
use gkp_bounds::gkp_states::lemmas::{self, LemmaCheck};
use gkp_bounds::grid::fourier_identity;
use gkp_bounds::matrix_elements::{mat_grid, mat_phase_with, max_deviation, GridOptions, PeakIntegrator};
use gkp_bounds::numerical_range::sampling::{random_matrix, random_unit_vector, random_unitary};
use gkp_bounds::numerical_range::{
    alpha_bound, crawford, crawford_bruteforce, normal_closed_form, phase_corrected_bound, sparse_bound, subnormalized_bound,
    ComplexMatrix,
};
use gkp_bounds::numerics::discrete_gaussian_tail;
use gkp_bounds::{Complex, FourierConvention, GateSpec, GkpParams, Tolerance};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONV: FourierConvention = FourierConvention::Inverse;
const TAIL: f64 = 1e-13;

struct Outcome {
    pass: bool,
    detail: String,
}

fn tol() -> Tolerance {
    Tolerance::absolute(1e-10).unwrap()
}

fn c1_pauli_x() -> Outcome {
    let mut worst_off: f64 = 0.0;
    let mut worst_diag_margin = f64::INFINITY;
    let mut worst_upper_ratio: f64 = 0.0;
    for d in [2u32, 3, 4] {
        for kappa in [0.2, 0.1, 0.05, 0.02] {
            let p = GkpParams::symmetric(kappa, d).unwrap();
            let m = gate_matrix_elements(GateSpec::PauliX, &p, CONV, &tol()).unwrap();
            let b = build_b(&m.values, &LogicalTarget::x(d as usize)).unwrap();
            for j in 0..d as usize {
                for l in 0..d as usize {
                    if j == l {
                        worst_diag_margin = worst_diag_margin.min(b[(j, j)].re - (1.0 - kappa * kappa));
                    } else {
                        worst_off = worst_off.max(b[(j, l)].norm());
                    }
                }
            }
            let cert = gate_certificate(GateSpec::PauliX, &p, CONV, &tol()).unwrap();
            worst_upper_ratio = worst_upper_ratio.max(cert.upper / (8.0 * kappa));
        }
    }
    Outcome {
        pass: worst_off < 1e-10 && worst_diag_margin >= 0.0 && worst_upper_ratio <= 1.0,
        detail: format!("max offdiag {worst_off:.1e}, min diag margin {worst_diag_margin:.2e}, max upper/8κ {worst_upper_ratio:.3}"),
    }
}

fn c2_pauli_z() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    let mut worst_upper_ratio: f64 = 0.0;
    for d in [2u32, 3, 4] {
        for kappa in [0.2, 0.1, 0.05, 0.02] {
            let p = GkpParams::symmetric(kappa, d).unwrap();
            let m = gate_matrix_elements(GateSpec::PauliZPower(1), &p, CONV, &tol()).unwrap();
            let b = build_b(&m.values, &LogicalTarget::z(d as usize)).unwrap();
            let df = d as f64;
            let bound = 1.0 - 10.0 * df * df * p.delta * p.delta - 16.0 * (p.delta / p.eps).powi(4);
            for j in 0..d as usize {
                worst_margin = worst_margin.min(b[(j, j)].re - bound);
            }
            let cert = gate_certificate(GateSpec::PauliZPower(1), &p, CONV, &tol()).unwrap();
            worst_upper_ratio = worst_upper_ratio.max(cert.upper / (8.0 * kappa));
        }
    }
    Outcome {
        pass: worst_margin >= 0.0 && worst_upper_ratio <= 1.0,
        detail: format!("min rotated diag margin {worst_margin:.2e}, max upper/8κ {worst_upper_ratio:.3}"),
    }
}

fn c3_fourier() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2u32, 3] {
        for kappa in [1e-2, 1e-3] {
            let p = GkpParams::symmetric(kappa, d).unwrap();
            let m = gate_matrix_elements(GateSpec::Fourier, &p, CONV, &tol()).unwrap();
            let target = LogicalTarget::fourier(d as usize);
            let dev = (&m.values - &target.u).iter().map(|v| v.norm()).fold(0.0, f64::max);
            let cert = gate_certificate(GateSpec::Fourier, &p, CONV, &tol()).unwrap();
            let dev_cap = 40.0 * kappa.powf(0.25);
            let upper_cap = 48.0 * (d as f64).powf(3.0 / 8.0) * kappa.powf(1.0 / 16.0);
            pass &= dev <= dev_cap && cert.upper <= upper_cap && m.error_estimate < 1e-8;
            parts.push(format!("d={d} κ={kappa:e}: dev {dev:.2e} upper {:.4}", cert.upper));
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn c4_nogo() -> Outcome {
    let mut pass = true;
    let mut min_lower = f64::INFINITY;
    let mut max_b00: f64 = 0.0;
    for d in [2u32, 3] {
        for kappa in [0.003, 0.001] {
            for eps in [GkpParams::eps_d(d), 0.25] {
                let p = GkpParams::symmetric(kappa, d).unwrap().with_eps(eps);
                let r = nogo_check(&p, TAIL).unwrap();
                pass &= r.cap_holds && r.analytic_cap_holds && r.lower >= NOGO_SYMMETRIC;
                min_lower = min_lower.min(r.lower);
                max_b00 = max_b00.max(r.b00_abs);
            }
        }
    }
    Outcome { pass, detail: format!("max |B00| {max_b00:.6}, min lower {min_lower:.5}") }
}

fn c5_crawford() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut max_gap: f64 = 0.0;
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_normal: f64 = 0.0;
    for i in 0..200 {
        let d = 2 + i % 5;
        let r = random_matrix(d, &mut rng);
        // Half generic (usually c = 0), half near a unit-modulus scalar (c > 0).
        let b = if i % 2 == 0 {
            r
        } else {
            let z = Complex::from_polar(1.0, rng.random::<f64>() * 2.0 * PI);
            ComplexMatrix::identity(d, d) * z + r * Complex::new(0.6 / d as f64, 0.0)
        };
        let c = crawford(&b).unwrap();
        max_gap = max_gap.max((c - crawford_bruteforce(&b, 8, i as u64)).abs());
        let mut bounds = vec![phase_corrected_bound(&b).unwrap(), sparse_bound(&b, d).unwrap()];
        bounds.extend(alpha_bound(&b));
        bounds.extend(subnormalized_bound(&b).ok());
        for lb in bounds {
            max_violation = max_violation.max(lb - c);
        }

        let u = random_unitary(d, &mut rng);
        let centre = if i % 2 == 0 { Complex::new(0.0, 0.0) } else { Complex::from_polar(1.5, rng.random::<f64>() * 2.0 * PI) };
        let lambdas = DVector::from_fn(d, |_, _| centre + Complex::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0));
        let n = &u * ComplexMatrix::from_diagonal(&lambdas) * u.adjoint();
        max_normal = max_normal.max((normal_closed_form(&n).unwrap() - crawford(&n).unwrap()).abs());
    }
    Outcome {
        pass: max_gap <= 1e-6 && max_violation <= 1e-9 && max_normal <= 1e-8,
        detail: format!("max |θ-sweep − brute force| {max_gap:.1e}, max bound − c {max_violation:.2e}, max normal gap {max_normal:.1e}"),
    }
}

fn c6_lemmas() -> Outcome {
    let mut checks: Vec<LemmaCheck> = Vec::new();
    let kappas = [0.02, 0.05, 0.1, 0.15, 0.2, 0.24];
    let deltas = [0.002, 0.005, 0.01, 0.02, 0.05, 0.1];
    let epss = [0.01, 0.1, 0.25, 0.4];
    for delta in [0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.2] {
        for eps in [0.005, 0.01, 0.05, 0.1, 0.25, 0.4] {
            checks.extend(lemmas::truncated_gaussian(delta, eps).unwrap());
        }
    }
    for &kappa in &kappas {
        for &delta in &deltas {
            for &eps in &epss {
                let p = GkpParams::new(kappa, delta, eps, 2).unwrap();
                checks.push(lemmas::peakwise_truncation(&p).unwrap());
                checks.push(lemmas::peakwise_truncation_converse(&p).unwrap());
                checks.push(lemmas::pointwise_truncation(&p).unwrap());
                checks.push(lemmas::peakwise_vs_pointwise(&p).unwrap());
                checks.push(lemmas::pointwise_vs_truncated(&p).unwrap());
                for z in [1, 2, 3] {
                    checks.push(lemmas::position_translated(&p, z).unwrap());
                }
                checks.push(lemmas::momentum_translated(&p, 1).unwrap());
            }
        }
    }
    for s in [0.3, 0.5, 1.0, 2.0, 5.0] {
        for t in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.5, 4.0, 7.0] {
            checks.extend(lemmas::periodic_sandwich(s, t).unwrap());
        }
    }
    let mut names: Vec<&str> = checks.iter().map(|c| c.name.as_str()).collect();
    names.sort();
    names.dedup();
    let mut pass = true;
    let mut summary = Vec::new();
    for name in names {
        let in_regime: Vec<&LemmaCheck> = checks.iter().filter(|c| c.name == name && c.regime_ok).collect();
        let failed = in_regime.iter().filter(|c| !c.holds).count();
        pass &= failed == 0 && in_regime.len() >= 50;
        if failed > 0 || in_regime.len() < 50 {
            summary.push(format!("{name}: {failed}/{} failed", in_regime.len()));
        }
    }
    let n = checks.iter().filter(|c| c.regime_ok).count();
    let detail = if summary.is_empty() { format!("{n} in-regime checks hold, ≥ 50 points per inequality") } else { summary.join("; ") };
    Outcome { pass, detail }
}

fn c7_fourier_identity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (kappa, delta) in [(0.1, 0.005), (0.05, 0.002)] {
        let r = fourier_identity(kappa, delta, TAIL).unwrap();
        pass &= r.distance < 1e-6 && r.error < 1e-6;
        parts.push(format!("({kappa}, {delta}): {:.2e} on {} points", r.distance, r.n_points));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn c8_cross_check() -> Outcome {
    let mut cases: Vec<(GateSpec, GkpParams)> = Vec::new();
    for d in [2u32, 3, 4] {
        for kappa in [0.2, 0.1, 0.05, 0.02] {
            cases.push((GateSpec::PauliX, GkpParams::symmetric(kappa, d).unwrap()));
            cases.push((GateSpec::PauliZPower(1), GkpParams::symmetric(kappa, d).unwrap()));
        }
    }
    for d in [2u32, 3] {
        for kappa in [0.05, 0.02, 0.01] {
            cases.push((GateSpec::Fourier, GkpParams::symmetric(kappa, d).unwrap()));
        }
        for kappa in [0.05, 0.02] {
            cases.push((GateSpec::Phase, GkpParams::symmetric(kappa, d).unwrap()));
        }
    }
    let opts = GridOptions::default();
    let mut pass = true;
    let mut worst_ratio: f64 = 0.0;
    for (gate, p) in &cases {
        let a = gate_matrix_elements(*gate, p, CONV, &tol()).unwrap();
        let g = mat_grid(*gate, p, CONV, &opts).unwrap();
        let allowed = 1e-8f64.max(a.error_estimate).max(g.error_estimate);
        let dev = max_deviation(&a, &g).unwrap();
        pass &= dev <= allowed;
        worst_ratio = worst_ratio.max(dev / allowed);
    }
    // The grid cannot resolve the phase gate at the no-go widths; use the independent quadrature path.
    let mut quad_dev: f64 = 0.0;
    for d in [2u32, 3] {
        for kappa in [0.003, 0.001] {
            let p = GkpParams::symmetric(kappa, d).unwrap();
            let a = mat_phase_with(&p, PeakIntegrator::ClosedForm, &tol()).unwrap();
            let q = mat_phase_with(&p, PeakIntegrator::Quadrature, &tol()).unwrap();
            quad_dev = quad_dev.max(max_deviation(&a, &q).unwrap());
        }
    }
    pass &= quad_dev <= 1e-8;
    Outcome {
        pass,
        detail: format!("{} grid comparisons, max deviation/allowed {worst_ratio:.2e}; phase closed form vs quadrature {quad_dev:.1e}", cases.len()),
    }
}

fn c9_subadditivity() -> Outcome {
    let p = GkpParams::symmetric(0.05, 2).unwrap();
    let mut vertices = vec![Vertex { id: 0, role: Role::Input }, Vertex { id: 4, role: Role::Output }];
    let mut edges = Vec::new();
    let mut gates = std::collections::BTreeMap::new();
    for k in 1..=3u32 {
        vertices.push(Vertex { id: k, role: Role::Interior });
        gates.insert(k, GateEntry { gate: "X".into(), params: Some(p), bound: None, certificate: None });
    }
    for k in 0..4u32 {
        edges.push(Edge { id: k, src: k, dst: k + 1, dim: 2 });
    }
    let mut graph = CircuitGraph { vertices, edges, order: vec![1, 2, 3], gates };
    let report = graph.validate();
    graph.certify_gates(CONV, &tol()).unwrap();
    let budget = graph.total_budget().unwrap();
    let composed = gate_certificate(GateSpec::PauliXPower(3), &p, CONV, &tol()).unwrap();
    Outcome {
        pass: report.valid && composed.lower <= budget,
        detail: format!("composed X^3 lower {:.4} ≤ budget {budget:.4}", composed.lower),
    }
}

fn c10_lowdin() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut max_orth: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..100 {
        let d = 2 + i % 4;
        let n = d + 3;
        let u = random_unitary(n, &mut rng);
        let phi: Vec<DVector<Complex>> = (0..d).map(|k| u.column(k).into_owned()).collect();
        let delta = 0.1 * rng.random::<f64>().max(1e-3);
        let psi: Vec<DVector<Complex>> = phi
            .iter()
            .map(|f| f + random_unit_vector(n, &mut rng) * Complex::new(delta * rng.random::<f64>(), 0.0))
            .collect();
        let xi = lowdin_orthogonalize(&psi).unwrap();
        for a in 0..d {
            for b in 0..d {
                let expect = if a == b { 1.0 } else { 0.0 };
                max_orth = max_orth.max((xi[a].dotc(&xi[b]) - expect).norm());
            }
        }
        worst_ratio = worst_ratio.max(max_vector_distance(&xi, &phi) / (2.0 * (d as f64).sqrt() * delta));
    }
    Outcome {
        pass: max_orth <= 1e-10 && worst_ratio <= 1.0,
        detail: format!("max |⟨ξ_a, ξ_b⟩ − δ_ab| {max_orth:.1e}, max distance/(2√d δ) {worst_ratio:.3}"),
    }
}

fn c11_tails() -> Outcome {
    let mut pass = true;
    let mut n = 0;
    let mut worst: f64 = 0.0;
    for s in [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 30.0] {
        for k in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0] {
            let (bound, tail) = discrete_gaussian_tail(s, k * s).unwrap();
            pass &= tail <= bound;
            worst = worst.max(tail / bound);
            n += 1;
        }
    }
    Outcome { pass, detail: format!("{n} (s, r) points, max tail/bound {worst:.3}") }
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("1 Pauli-X certificate", Duration::from_secs(10), c1_pauli_x),
        ("2 Pauli-Z certificate", Duration::from_secs(30), c2_pauli_z),
        ("3 Fourier matrix elements", Duration::from_secs(120), c3_fourier),
        ("4 phase-gate no-go", Duration::from_secs(60), c4_nogo),
        ("5 Crawford oracle equivalence", Duration::from_secs(30), c5_crawford),
        ("6 overlap lemma suite", Duration::from_secs(60), c6_lemmas),
        ("7 Fourier identity", Duration::from_secs(60), c7_fourier_identity),
        ("8 analytic/grid cross-check", Duration::MAX, c8_cross_check),
        ("9 subadditivity witness", Duration::from_secs(10), c9_subadditivity),
        ("10 Löwdin orthogonalization", Duration::from_secs(5), c10_lowdin),
        ("11 discrete Gaussian tails", Duration::from_secs(5), c11_tails),
    ];
    let mut failures = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let ok = out.pass && in_time;
        if !ok {
            failures += 1;
        }
        let timing = if in_time { String::new() } else { format!(" (over the {limit:?} limit)") };
        println!("{} {name}: {} [{:.2?}{timing}]", if ok { "PASS" } else { "FAIL" }, out.detail, elapsed);
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
