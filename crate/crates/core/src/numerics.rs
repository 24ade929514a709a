//! Gaussians, lattice sums, error-function integrals and adaptive quadrature.
//!
//! The lattice-sum and quadrature primitives are generic over the scalar type;
//! everything that needs the (complex) error function is `f64` only.

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Largest number of lattice terms a single window may contain.
pub const MAX_LATTICE_WINDOW: i64 = 200_000_000;

/// Subdivision budget of [`quad_complex`].
pub const MAX_SUBINTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance<T = f64> {
    pub abs_tol: T,
    pub rel_tol: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Result<Self> {
        if !(abs_tol > T::zero()) || !(rel_tol >= T::zero()) {
            return domain(format!(
                "tolerance needs abs_tol > 0 and rel_tol >= 0, got ({:?}, {:?})",
                abs_tol, rel_tol
            ));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    pub fn absolute(abs_tol: T) -> Result<Self> {
        Self::new(abs_tol, T::zero())
    }

    fn target(&self, magnitude: T) -> T {
        self.abs_tol.max(self.rel_tol * magnitude)
    }
}

impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::zero(),
        }
    }
}

/// Periodic Gaussian sum `f_s(shift) = Σ_z ρ_s(z + shift)` truncated at a certified radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumSpec<T = f64> {
    pub s: T,
    pub shift: T,
    pub tail_tol: T,
}

impl<T: Real> LatticeSumSpec<T> {
    pub fn new(s: T, shift: T, tail_tol: T) -> Result<Self> {
        if !(s > T::zero()) {
            return domain(format!("lattice width s must be positive, got {:?}", s));
        }
        if !(tail_tol > T::zero()) {
            return domain(format!("tail_tol must be positive, got {:?}", tail_tol));
        }
        if !shift.is_finite() {
            return domain("shift must be finite");
        }
        Ok(Self { s, shift, tail_tol })
    }

    /// Radius beyond which the discrete Gaussian tail bound drops below `tail_tol`.
    pub fn radius(&self) -> T {
        tail_radius(self.s, self.tail_tol)
    }
}

/// Smallest `r` with `2 exp(-(3π/4)(r/s)²) <= tail_tol`.
pub fn tail_radius<T: Real>(s: T, tail_tol: T) -> T {
    let two = T::lit(2.0);
    if tail_tol >= two {
        return T::zero();
    }
    let k = T::lit(4.0) / (T::lit(3.0) * T::PI());
    s * (k * (two / tail_tol).ln()).sqrt()
}

/// `ρ_s(x) = exp(-π x² / s²)`.
pub fn rho<T: Real>(s: T, x: T) -> Result<T> {
    if !(s > T::zero()) {
        return domain(format!("rho needs s > 0, got {:?}", s));
    }
    Ok((-T::PI() * x * x / (s * s)).exp())
}

fn window_bounds<T: Real>(centre: T, r: T) -> Result<(i64, i64)> {
    let lo = (centre - r).floor();
    let hi = (centre + r).ceil();
    let (lo, hi) = match (lo.to_i64(), hi.to_i64()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Resource("lattice window does not fit in i64".into())),
    };
    if hi - lo > MAX_LATTICE_WINDOW {
        return Err(Error::Resource(format!(
            "lattice window of {} terms exceeds the maximum {}",
            hi - lo,
            MAX_LATTICE_WINDOW
        )));
    }
    Ok((lo, hi))
}

/// `f_s(t) = Σ_z ρ_s(z + t)` over a window certified by the tail bound.
pub fn periodic_gaussian<T: Real>(spec: &LatticeSumSpec<T>) -> Result<T> {
    let spec = LatticeSumSpec::new(spec.s, spec.shift, spec.tail_tol)?;
    let r = spec.radius() + T::one();
    let (lo, hi) = window_bounds(-spec.shift, r)?;
    let mut sum = T::zero();
    for z in lo..=hi {
        let zt = T::from_i64(z).unwrap() + spec.shift;
        sum += (-T::PI() * zt * zt / (spec.s * spec.s)).exp();
    }
    Ok(sum)
}

/// Returns `(bound, empirical)` for `Pr[|X_s| >= r]` with `X_s` the discrete Gaussian on ℤ.
pub fn discrete_gaussian_tail<T: Real>(s: T, r: T) -> Result<(T, T)> {
    if !(s > T::zero()) || !(r > T::zero()) {
        return domain(format!("tail needs s > 0 and r > 0, got ({:?}, {:?})", s, r));
    }
    let bound = T::lit(2.0) * (-T::lit(0.75) * T::PI() * (r / s) * (r / s)).exp();
    let total = periodic_gaussian(&LatticeSumSpec::new(s, T::zero(), T::min_positive_value())?)?;
    // Sum the tail directly so small probabilities keep their relative precision.
    let start = r.ceil();
    let start = start.to_i64().ok_or_else(|| Error::Resource("tail start overflow".into()))?;
    let mut tail = T::zero();
    let mut z = start;
    loop {
        let zf = T::from_i64(z).unwrap();
        let term = (-T::PI() * zf * zf / (s * s)).exp();
        if z == 0 {
            tail += term;
        } else {
            tail += term + term;
        }
        if term <= tail * T::epsilon() * T::lit(1e-3) || term == T::zero() {
            break;
        }
        z += 1;
        if z - start > MAX_LATTICE_WINDOW {
            return Err(Error::Resource("tail summation did not terminate".into()));
        }
    }
    Ok((bound, tail / total))
}

pub fn erf(x: f64) -> f64 {
    RealErrorFunctions::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    RealErrorFunctions::erfc(x)
}

/// Scaled complementary error function `exp(x²) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    RealErrorFunctions::erfcx(x)
}

pub fn erfcx_complex(z: Complex64) -> Complex64 {
    ComplexErrorFunctions::erfcx(z)
}

/// `‖Π_[-ε,ε] Ψ_Δ‖² = erf(ε/Δ)`.
pub fn truncated_gaussian_norm(delta: f64, eps: f64) -> Result<f64> {
    if !(delta > 0.0) || !(eps > 0.0) {
        return domain(format!("need delta > 0 and eps > 0, got ({delta}, {eps})"));
    }
    Ok(erf(eps / delta))
}

/// `∫ exp(i a x² + i b x) dx = (πi/a)^{1/2} exp(-i b²/(4a))` for `Im a > 0`.
///
/// The square root is the principal branch of `π / (-i a)`, whose argument has
/// positive real part; this is continuous in `a` and gives `√π` at `a = i`.
pub fn fresnel_gaussian_integral<T: Real>(a: Complex<T>, b: T) -> Result<Complex<T>> {
    if !(a.im > T::zero()) {
        return domain(format!("Fresnel integral diverges for Im(a) = {:?} <= 0", a.im));
    }
    let minus_i = Complex::new(T::zero(), -T::one());
    let big_a = minus_i * a;
    let pref = (Complex::new(T::PI(), T::zero()) / big_a).sqrt();
    let expo = Complex::new(T::zero(), -b * b) / (a * T::lit(4.0));
    Ok(pref * expo.exp())
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T = f64> {
    pub value: Complex<T>,
    pub error: T,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_527_600,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Ten-point Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21<T: Real, F: FnMut(T) -> Complex<T>>(f: &mut F, a: T, b: T) -> (Complex<T>, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[10]);
    let mut gauss = Complex::new(T::zero(), T::zero());
    for i in 0..10 {
        let dx = half * T::lit(XGK[i]);
        let s = f(mid - dx) + f(mid + dx);
        kron += s * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss += s * T::lit(WG[i / 2]);
        }
    }
    let k = kron * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

/// Composite 21-point Kronrod rule on `panels` equal sub-intervals.
pub fn fixed_rule_complex<T: Real, F: FnMut(T) -> Complex<T>>(mut f: F, lo: T, hi: T, panels: usize) -> Complex<T> {
    let n = panels.max(1);
    let w = (hi - lo) / T::from_usize(n).unwrap();
    let mut acc = Complex::new(T::zero(), T::zero());
    for p in 0..n {
        let a = lo + w * T::from_usize(p).unwrap();
        acc += gk21(&mut f, a, a + w).0;
    }
    acc
}

/// Adaptive Gauss–Kronrod (10/21) quadrature of a complex integrand.
///
/// Intervals are bisected worst-first until the summed `|K21 - G10|` estimates
/// drop below the tolerance. Deterministic for fixed inputs.
pub fn quad_complex<T: Real, F: FnMut(T) -> Complex<T>>(mut f: F, lo: T, hi: T, tol: &Tolerance<T>) -> Result<Quadrature<T>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return domain(format!("quad_complex needs finite lo < hi, got [{:?}, {:?}]", lo, hi));
    }
    let (v, e) = gk21(&mut f, lo, hi);
    let mut intervals: Vec<(T, T, Complex<T>, T)> = vec![(lo, hi, v, e)];
    let mut evaluations = 21;
    loop {
        let mut value = Complex::new(T::zero(), T::zero());
        let mut error = T::zero();
        let mut worst = 0;
        for (i, iv) in intervals.iter().enumerate() {
            value += iv.2;
            error += iv.3;
            if iv.3 > intervals[worst].3 {
                worst = i;
            }
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return domain("integrand produced a non-finite value");
        }
        if error <= tol.target(value.norm()) {
            return Ok(Quadrature { value, error, evaluations });
        }
        let (a, b, _, _) = intervals[worst];
        let m = (a + b) * T::lit(0.5);
        if intervals.len() >= MAX_SUBINTERVALS || !(a < m && m < b) {
            return Err(Error::Accuracy {
                message: "quad_complex exhausted its subdivision budget".into(),
                estimate: value.norm().to_f64_lossy(),
                error: error.to_f64_lossy(),
            });
        }
        let (v1, e1) = gk21(&mut f, a, m);
        let (v2, e2) = gk21(&mut f, m, b);
        evaluations += 42;
        intervals[worst] = (a, m, v1, e1);
        intervals.push((m, b, v2, e2));
    }
}

/// `∫_lo^hi exp(-a x² + b x + c) dx` for complex `a` with `Re a > 0`.
///
/// Endpoints may be infinite. Uses the scaled complementary error function on
/// whichever side of the stationary point each endpoint lies, so no
/// cancellation between two nearly equal erf values occurs.
pub fn gaussian_interval_integral(a: Complex64, b: Complex64, c: Complex64, lo: f64, hi: f64) -> Complex64 {
    if !(hi > lo) {
        return Complex64::new(0.0, 0.0);
    }
    let sa = a.sqrt();
    let x0 = b / (a * 2.0);
    let pref = Complex64::new(std::f64::consts::PI.sqrt(), 0.0) / (sa * 2.0);
    let u = |x: f64| sa * (x - x0);
    let value = |x: f64| (-a * x * x + b * x + c).exp();
    // E(x) * erfcx(±u(x)), zero at infinite endpoints.
    let term = |x: f64, sign: f64| -> Complex64 {
        if x.is_infinite() {
            Complex64::new(0.0, 0.0)
        } else {
            value(x) * erfcx_complex(u(x) * sign)
        }
    };
    let re_lo = if lo.is_infinite() { f64::NEG_INFINITY } else { u(lo).re };
    let re_hi = if hi.is_infinite() { f64::INFINITY } else { u(hi).re };
    if re_lo >= 0.0 {
        pref * (term(lo, 1.0) - term(hi, 1.0))
    } else if re_hi <= 0.0 {
        pref * (term(hi, -1.0) - term(lo, -1.0))
    } else {
        let full = (c + b * b / (a * 4.0)).exp() * 2.0;
        pref * (full - term(hi, 1.0) - term(lo, -1.0))
    }
}

/// Real-coefficient version of [`gaussian_interval_integral`].
pub fn gaussian_interval_integral_real(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let sa = a.sqrt();
    let x0 = b / (2.0 * a);
    let pref = std::f64::consts::PI.sqrt() / (2.0 * sa);
    let term = |x: f64, sign: f64| -> f64 {
        if x.is_infinite() {
            0.0
        } else {
            let ux = sa * (x - x0);
            (-a * x * x + b * x + c).exp() * erfcx(sign * ux)
        }
    };
    if lo >= x0 {
        pref * (term(lo, 1.0) - term(hi, 1.0))
    } else if hi <= x0 {
        pref * (term(hi, -1.0) - term(lo, -1.0))
    } else {
        let full = 2.0 * (c + b * b / (4.0 * a)).exp();
        pref * (full - term(hi, 1.0) - term(lo, -1.0))
    }
}

/// `∫_lo^hi exp(-a (x - m)²) dx` for real `a > 0`, written about the centre for stability.
pub fn centred_gaussian_mass(a: f64, m: f64, lo: f64, hi: f64) -> f64 {
    gaussian_interval_integral_real(a, 0.0, 0.0, lo - m, hi - m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(1.0f64, 0.0).unwrap(), 1.0);
        assert!((rho(1.0f64, 1.0).unwrap() - 0.043_213_918_263_772_25).abs() < 1e-15);
        assert!((rho(2.0f64, 1.0).unwrap() - (-std::f64::consts::FRAC_PI_4).exp()).abs() < 1e-15);
        assert!(rho(0.0f64, 1.0).is_err());
        assert!(rho(1.0f32, 1.0f32).unwrap() > 0.0432);
    }

    #[test]
    fn tail_radius_meets_target() {
        let r = tail_radius(3.0, 1e-12);
        let b = 2.0 * (-0.75 * std::f64::consts::PI * (r / 3.0f64).powi(2)).exp();
        assert!((b - 1e-12).abs() < 1e-20);
    }

    #[test]
    fn interval_integral_matches_erf() {
        // ∫_{-1}^{2} e^{-x²} = (√π/2)(erf 2 + erf 1)
        let exact = std::f64::consts::PI.sqrt() / 2.0 * (erf(2.0) + erf(1.0));
        let v = gaussian_interval_integral_real(1.0, 0.0, 0.0, -1.0, 2.0);
        assert!((v - exact).abs() < 1e-15);
        let z = gaussian_interval_integral(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), -1.0, 2.0);
        assert!((z.re - exact).abs() < 1e-14 && z.im.abs() < 1e-14);
    }

    #[test]
    fn interval_integral_complex_matches_quadrature() {
        let a = Complex64::new(3.0, -7.0);
        let b = Complex64::new(0.4, 2.5);
        let c = Complex64::new(-0.2, 0.3);
        for &(lo, hi) in &[(-1.0, 1.0), (0.3, 0.9), (-2.0, -0.1), (-0.05, 4.0)] {
            let exact = gaussian_interval_integral(a, b, c, lo, hi);
            let q = quad_complex(|x: f64| (-a * x * x + b * x + c).exp(), lo, hi, &Tolerance::absolute(1e-13).unwrap()).unwrap();
            assert!((exact - q.value).norm() < 1e-12, "{lo} {hi}: {exact} vs {}", q.value);
        }
    }
}
