//! Crawford number (inner numerical radius) and its analytic lower bounds.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Initial samples of the support-function scan over `θ ∈ [0, 2π)`.
pub const THETA_SCAN: usize = 720;

/// `λ_min((e^{iθ}B + e^{-iθ}B†)/2)`.
pub fn lambda_min(b: &ComplexMatrix, theta: f64) -> f64 {
    let e = Complex64::from_polar(1.0, theta);
    let h = (b * e + b.adjoint() * e.conj()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Crawford number `c(B) = min_{‖ψ‖=1} |⟨ψ, Bψ⟩|` and the maximizing direction `θ`.
///
/// Uses `c = max(0, max_θ λ_min(H_θ))`: a coarse scan followed by golden-section refinement
/// of the best local maxima to `1e-12` in `θ`.
pub fn crawford_with_angle(b: &ComplexMatrix) -> Result<(f64, f64)> {
    if b.nrows() != b.ncols() || b.nrows() == 0 {
        return domain("crawford needs a non-empty square matrix");
    }
    if b.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return domain("matrix has non-finite entries");
    }
    let step = 2.0 * PI / THETA_SCAN as f64;
    let vals: Vec<f64> = (0..THETA_SCAN).map(|i| lambda_min(b, i as f64 * step)).collect();
    let mut peaks: Vec<usize> = (0..THETA_SCAN)
        .filter(|&i| {
            let prev = vals[(i + THETA_SCAN - 1) % THETA_SCAN];
            let next = vals[(i + 1) % THETA_SCAN];
            vals[i] >= prev && vals[i] >= next
        })
        .collect();
    peaks.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]));
    peaks.truncate(4);
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in peaks {
        let t = i as f64 * step;
        let r = golden_max(|th| lambda_min(b, th), t - step, t + step, 1e-12);
        if r.1 > best.1 {
            best = r;
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Accuracy { message: "eigen-solver failed in crawford".into(), estimate: f64::NAN, error: f64::NAN });
    }
    Ok((best.1.max(0.0), best.0.rem_euclid(2.0 * PI)))
}

pub fn crawford(b: &ComplexMatrix) -> Result<f64> {
    Ok(crawford_with_angle(b)?.0)
}

/// Operator norm (largest singular value).
pub fn op_norm(b: &ComplexMatrix) -> f64 {
    if b.is_empty() {
        return 0.0;
    }
    b.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

fn quadratic_form(b: &ComplexMatrix, v: &DVector<f64>) -> (DVector<Complex64>, Complex64, f64) {
    let d = b.nrows();
    let psi = DVector::from_fn(d, |i, _| Complex64::new(v[i], v[i + d]));
    let q = psi.dotc(&(b * &psi));
    let n = psi.norm_squared();
    (psi, q, n)
}

/// `|⟨ψ,Bψ⟩|² / ‖ψ‖⁴` and its gradient in the real coordinates `(Re ψ, Im ψ)`.
fn objective(b: &ComplexMatrix, v: &DVector<f64>) -> (f64, DVector<f64>) {
    let d = b.nrows();
    let (psi, q, n) = quadratic_form(b, v);
    let f = q.norm_sqr() / (n * n);
    let bpsi = b * &psi;
    let bhpsi = b.adjoint() * &psi;
    // Wirtinger derivative ∂f/∂ψ̄; the real gradient is twice it.
    let w = (bpsi * q.conj() + bhpsi * q).map(|x| x / (n * n)) - psi.map(|x| x * (2.0 * q.norm_sqr() / (n * n * n)));
    let mut g = DVector::zeros(2 * d);
    for i in 0..d {
        g[i] = 2.0 * w[i].re;
        g[i + d] = 2.0 * w[i].im;
    }
    (f, g)
}

fn bfgs(b: &ComplexMatrix, mut x: DVector<f64>) -> f64 {
    let n = x.len();
    let (mut f, mut g) = objective(b, &x);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    for _ in 0..800 {
        if g.norm() < 1e-16 {
            break;
        }
        let mut p = -(&hinv * &g);
        if p.dot(&g) >= 0.0 {
            hinv = DMatrix::identity(n, n);
            p = -g.clone();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + &p * step;
            let (fnew, gnew) = objective(b, &xn);
            if fnew <= f + 1e-4 * step * p.dot(&g) {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((mut xn, fnew, mut gnew)) = accepted else { break };
        // f is scale-invariant; renormalize to keep the iterates on the unit sphere.
        let nx = xn.norm();
        xn /= nx;
        gnew *= nx;
        let s = &xn - &x;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let a = &i - &s * y.transpose() * rho;
            let bm = &i - &y * s.transpose() * rho;
            hinv = &a * &hinv * &bm + &s * s.transpose() * rho;
        }
        let done = fnew < 1e-26 || (f - fnew).abs() <= 1e-15 * f;
        x = xn;
        f = fnew;
        g = gnew;
        if done {
            break;
        }
    }
    f.max(0.0).sqrt()
}

/// Multi-start local minimization of `|⟨ψ,Bψ⟩|` over the unit sphere (an upper bound on `c(B)`).
pub fn crawford_bruteforce(b: &ComplexMatrix, n_starts: usize, seed: u64) -> f64 {
    let d = b.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    // Basis vectors give |B_jj| candidates; random starts cover the interior.
    for j in 0..d {
        let mut v = DVector::zeros(2 * d);
        v[j] = 1.0;
        best = best.min(bfgs(b, v));
    }
    for _ in 0..n_starts {
        let mut v = DVector::from_fn(2 * d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let nv = v.norm();
        v /= nv;
        best = best.min(bfgs(b, v));
    }
    best
}

/// `α(A) = min_j (|Re A_jj| - ½ Σ_{ℓ≠j} |A_jℓ + conj A_ℓj|)`, or `None` when some `Re A_jj < 0`.
pub fn alpha_bound(a: &ComplexMatrix) -> Option<f64> {
    let d = a.nrows();
    if (0..d).any(|j| a[(j, j)].re < 0.0) {
        return None;
    }
    Some(
        (0..d)
            .map(|j| {
                let off: f64 = (0..d).filter(|&l| l != j).map(|l| (a[(j, l)] + a[(l, j)].conj()).norm()).sum();
                a[(j, j)].re.abs() - 0.5 * off
            })
            .fold(f64::INFINITY, f64::min),
    )
}

fn nonzero_diagonal(b: &ComplexMatrix) -> Result<()> {
    if (0..b.nrows()).any(|j| b[(j, j)].norm() == 0.0) {
        return domain("matrix has a zero diagonal entry");
    }
    Ok(())
}

/// Diagonal-phase-corrected bound with `φ_j = arg B_jj`.
pub fn phase_corrected_bound(b: &ComplexMatrix) -> Result<f64> {
    nonzero_diagonal(b)?;
    let d = b.nrows();
    let phi: Vec<Complex64> = (0..d).map(|j| b[(j, j)] / b[(j, j)].norm()).collect();
    let mut best = f64::INFINITY;
    for j in 0..d {
        let off: f64 = (0..d)
            .filter(|&l| l != j)
            .map(|l| (phi[j].conj() * b[(j, l)] + phi[l] * b[(l, j)].conj()).norm())
            .sum();
        best = best.min(b[(j, j)].norm() - 0.5 * off);
    }
    let drift = phi.iter().map(|p| (p - 1.0).norm()).fold(0.0, f64::max);
    Ok(best - op_norm(b) * drift)
}

/// Bound for matrices with at most `s` nonzeros per row and column.
pub fn sparse_bound(b: &ComplexMatrix, s: usize) -> Result<f64> {
    nonzero_diagonal(b)?;
    let d = b.nrows();
    for j in 0..d {
        let row = (0..d).filter(|&l| b[(j, l)].norm() != 0.0).count();
        let col = (0..d).filter(|&l| b[(l, j)].norm() != 0.0).count();
        if row > s || col > s {
            return domain(format!("matrix is not {s}-sparse (line {j} has {} nonzeros)", row.max(col)));
        }
    }
    let min_diag = (0..d).map(|j| b[(j, j)].norm()).fold(f64::INFINITY, f64::min);
    let max_off = (0..d)
        .flat_map(|j| (0..d).filter(move |&l| l != j).map(move |l| (j, l)))
        .map(|(j, l)| b[(j, l)].norm())
        .fold(0.0, f64::max);
    let drift = (0..d).map(|j| (b[(j, j)] / b[(j, j)].norm() - 1.0).norm()).fold(0.0, f64::max);
    Ok(min_diag - (s.saturating_sub(1)) as f64 * max_off - op_norm(b) * drift)
}

/// `1 - 7(d max_j |1 - B_jj|)^{1/2}` for matrices with row and column `ℓ²` sums at most one.
pub fn subnormalized_bound(b: &ComplexMatrix) -> Result<f64> {
    nonzero_diagonal(b)?;
    let d = b.nrows();
    for j in 0..d {
        let row: f64 = (0..d).map(|l| b[(j, l)].norm_sqr()).sum();
        let col: f64 = (0..d).map(|l| b[(l, j)].norm_sqr()).sum();
        if row > 1.0 + 1e-12 || col > 1.0 + 1e-12 {
            return domain(format!("line {j} has squared norm {} > 1", row.max(col)));
        }
    }
    let dev = (0..d).map(|j| (1.0 - b[(j, j)]).norm()).fold(0.0, f64::max);
    Ok(1.0 - 7.0 * (d as f64 * dev).sqrt())
}

/// Distance from the origin to the convex hull of `points`.
pub fn convex_hull_distance(points: &[Complex64]) -> f64 {
    if points.is_empty() {
        return f64::NAN;
    }
    if points.iter().any(|p| p.norm() == 0.0) {
        return 0.0;
    }
    let mut args: Vec<f64> = points.iter().map(|p| p.arg()).collect();
    args.sort_by(f64::total_cmp);
    let mut max_gap = args[0] + 2.0 * PI - args[args.len() - 1];
    for w in args.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    if max_gap < PI {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        best = best.min(a.norm());
        for b in &points[i + 1..] {
            let ab = b - a;
            let t = (-(a.re * ab.re + a.im * ab.im) / ab.norm_sqr()).clamp(0.0, 1.0);
            best = best.min((a + ab * t).norm());
        }
    }
    best
}

/// Eigenvalues of a complex square matrix (Schur form).
pub fn eigenvalues(b: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let schur = nalgebra::linalg::Schur::try_new(b.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Accuracy { message: "Schur decomposition did not converge".into(), estimate: f64::NAN, error: f64::NAN })?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// For normal `B`, `c(B)` is the distance from 0 to the convex hull of its eigenvalues.
pub fn normal_closed_form(b: &ComplexMatrix) -> Result<f64> {
    Ok(convex_hull_distance(&eigenvalues(b)?))
}

/// Random matrices for seeded property checks.
pub mod sampling {
    use super::*;

    /// Entries with independent real and imaginary parts uniform in `[-1, 1]`.
    pub fn random_matrix<R: Rng>(d: usize, rng: &mut R) -> ComplexMatrix {
        DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
    }

    fn gaussian<R: Rng>(rng: &mut R) -> f64 {
        // Box–Muller
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    /// Haar-random unitary from the QR factorization of a complex Ginibre matrix.
    pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
        let qr = g.qr();
        let (q, r) = (qr.q(), qr.r());
        let mut q = q;
        for j in 0..n {
            let rjj = r[(j, j)];
            let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
        q
    }

    /// Unit vector with Gaussian entries.
    pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> DVector<Complex64> {
        let v = DVector::from_fn(n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
        let nv = v.norm();
        v / Complex64::new(nv, 0.0)
    }
}
