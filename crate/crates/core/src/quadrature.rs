//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands and
//! extrapolation of regulated integrals to zero regulator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

// Tabulated to more digits than f64 holds.
#[allow(clippy::excessive_precision)]
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
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<V, T> {
    pub value: V,
    pub error: T,
}

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

/// One 21-point Kronrod panel with the embedded 10-point Gauss estimate.
pub fn gauss_kronrod_21<T, F>(f: &F, a: T, b: T) -> Estimate<Complex<T>, T>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let mut kronrod = f(center).scale(T::lit(WGK[10]));
    let mut gauss = Complex::new(T::zero(), T::zero());
    for j in 0..10 {
        let dx = radius * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair.scale(T::lit(WGK[j]));
        if j % 2 == 1 {
            gauss = gauss + pair.scale(T::lit(WG[j / 2]));
        }
    }
    let kronrod = kronrod.scale(radius);
    let gauss = gauss.scale(radius);
    Estimate {
        value: kronrod,
        error: (kronrod - gauss).norm(),
    }
}

struct Panel<T> {
    a: T,
    b: T,
    est: Estimate<Complex<T>, T>,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est
            .error
            .partial_cmp(&other.est.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// Globally adaptive quadrature of `f` over `[a, b]`.
///
/// `breaks` are interior points where the integrand is known to be
/// non-smooth; points outside `(a, b)` are ignored. Bisects the panel with
/// the largest error until the summed error meets `tol` or the panel budget
/// is exhausted; the returned error estimate is honest in either case.
pub fn integrate<T, F>(f: F, a: T, b: T, breaks: &[T], tol: Tolerance<T>) -> Estimate<Complex<T>, T>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    if a == b {
        return Estimate {
            value: Complex::new(T::zero(), T::zero()),
            error: T::zero(),
        };
    }
    if b < a {
        let r = integrate(f, b, a, breaks, tol);
        return Estimate {
            value: -r.value,
            error: r.error,
        };
    }
    let mut nodes: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    nodes.push(a);
    nodes.push(b);
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    nodes.dedup();

    let mut heap = BinaryHeap::new();
    for w in nodes.windows(2) {
        heap.push(Panel {
            a: w[0],
            b: w[1],
            est: gauss_kronrod_21(&f, w[0], w[1]),
        });
    }
    let half = T::lit(0.5);
    let (mut total, mut err) = heap.iter().fold(
        (Complex::new(T::zero(), T::zero()), T::zero()),
        |(v, e), p| (v + p.est.value, e + p.est.error),
    );
    loop {
        let target = tol.abs.max(tol.rel * total.norm());
        if err <= target || heap.len() >= tol.max_intervals {
            break;
        }
        let worst = heap.pop().expect("non-empty panel set");
        if worst.est.error == T::zero() {
            // Every remaining panel is exact; the running sum only holds roundoff.
            heap.push(worst);
            break;
        }
        let mid = half * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be refined further in this precision.
            err = err - worst.est.error;
            heap.push(Panel {
                est: Estimate {
                    value: worst.est.value,
                    error: T::zero(),
                },
                ..worst
            });
            if err <= T::zero() {
                break;
            }
            continue;
        }
        let left = gauss_kronrod_21(&f, worst.a, mid);
        let right = gauss_kronrod_21(&f, mid, worst.b);
        total = total - worst.est.value + left.value + right.value;
        err = err - worst.est.error + left.error + right.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: right,
        });
    }
    // Deterministic summation order: left to right.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    let mut value = Complex::new(T::zero(), T::zero());
    let mut error = T::zero();
    for p in &panels {
        value = value + p.est.value;
        error = error + p.est.error;
    }
    Estimate { value, error }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<T, F>(f: F, a: T, b: T, breaks: &[T], tol: Tolerance<T>) -> Estimate<T, T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let r = integrate(|x| Complex::new(f(x), T::zero()), a, b, breaks, tol);
    Estimate {
        value: r.value.re,
        error: r.error,
    }
}

/// Functions of the regulator allowed in the extrapolation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationBasis {
    /// `1, ε, ε², ε³, …` for quantities analytic in the regulator.
    Polynomial,
    /// `1, ε, ε ln ε, ε², ε² ln ε, …` for quantities whose regulated
    /// integrand has a kink at the regulator's singular point.
    PolynomialLog,
}

impl ExtrapolationBasis {
    fn eval<T: Real>(self, j: usize, eps: T) -> T {
        if j == 0 {
            return T::one();
        }
        match self {
            ExtrapolationBasis::Polynomial => eps.powi(j as i32),
            ExtrapolationBasis::PolynomialLog => {
                let power = j.div_ceil(2);
                let base = eps.powi(power as i32);
                if j.is_multiple_of(2) {
                    base * eps.ln()
                } else {
                    base
                }
            }
        }
    }
}

fn solve_linear<T: Real>(mut a: Vec<Vec<T>>, mut rhs: Vec<T>) -> Result<Vec<T>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(Ordering::Equal)
            })
            .expect("non-empty column");
        if a[pivot][col] == T::zero() {
            return Err(Error::Domain("singular extrapolation system".into()));
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            let factor = row[col] / pivot_row[col];
            for (x, &v) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = *x - factor * v;
            }
            let r = rhs[col];
            rhs[col + 1 + offset] = rhs[col + 1 + offset] - factor * r;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Weights `w` such that `Σ wᵢ F(εᵢ)` interpolates the constant term of the
/// model `F(ε) = Σⱼ cⱼ φⱼ(ε)` through all given points.
pub fn extrapolation_weights<T: Real>(eps: &[T], basis: ExtrapolationBasis) -> Result<Vec<T>> {
    let n = eps.len();
    if n == 0 {
        return Err(Error::Domain("no regulator values".into()));
    }
    // Solve Aᵀ w = e₀ with A[i][j] = φⱼ(εᵢ).
    let at: Vec<Vec<T>> = (0..n)
        .map(|j| eps.iter().map(|&e| basis.eval(j, e)).collect())
        .collect();
    let mut e0 = vec![T::zero(); n];
    e0[0] = T::one();
    solve_linear(at, e0)
}

/// Extrapolates regulated values to zero regulator.
///
/// The error estimate is the change in the extrapolant when the largest
/// regulator is dropped, which also absorbs the propagated quadrature error.
pub fn extrapolate_to_zero<T: Real>(
    eps: &[T],
    values: &[Complex<T>],
    basis: ExtrapolationBasis,
) -> Result<Estimate<Complex<T>, T>> {
    if eps.len() != values.len() || eps.len() < 2 {
        return Err(Error::Domain(
            "extrapolation needs at least two regulator values".into(),
        ));
    }
    let combine = |e: &[T], v: &[Complex<T>]| -> Result<Complex<T>> {
        let w = extrapolation_weights(e, basis)?;
        Ok(w.iter()
            .zip(v)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&wi, &vi)| {
                acc + vi.scale(wi)
            }))
    };
    let full = combine(eps, values)?;
    let reduced = combine(&eps[1..], &values[1..])?;
    Ok(Estimate {
        value: full,
        error: (full - reduced).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let r = integrate_real(
            |x: f64| 3.0 * x * x,
            0.0,
            2.0,
            &[],
            Tolerance::new(1e-14, 1e-14),
        );
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let f = |x: f64| x.exp();
        let fwd = integrate_real(f, 0.0, 1.0, &[], Tolerance::new(1e-14, 1e-14));
        let rev = integrate_real(f, 1.0, 0.0, &[], Tolerance::new(1e-14, 1e-14));
        assert_eq!(fwd.value, -rev.value);
    }

    #[test]
    fn resolves_narrow_lorentzian() {
        // ∫₀² ε / ((x−1)² + ε²) dx = 2 atan(1/ε)
        let eps = 1e-4_f64;
        let r = integrate_real(
            |x: f64| eps / ((x - 1.0).powi(2) + eps * eps),
            0.0,
            2.0,
            &[],
            Tolerance::new(1e-13, 1e-13),
        );
        assert!(
            (r.value - 2.0 * (1.0 / eps).atan()).abs() < 1e-11,
            "{}",
            r.value
        );
    }

    #[test]
    fn handles_kink_with_breakpoint() {
        let r = integrate_real(
            |x: f64| (x - 0.3).abs(),
            0.0,
            1.0,
            &[0.3],
            Tolerance::new(1e-15, 1e-15),
        );
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-15);
    }

    #[test]
    fn complex_oscillatory() {
        let r = integrate(
            |x: f64| Complex::new(0.0, 7.0 * x).exp(),
            0.0,
            3.0,
            &[],
            Tolerance::new(1e-14, 1e-14),
        );
        let exact = (Complex::new(0.0, 21.0_f64).exp() - 1.0) / Complex::new(0.0, 7.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn polynomial_extrapolation_recovers_constant() {
        let eps: Vec<f64> = (0..5).map(|i| 0.1 / 2f64.powi(i)).collect();
        let vals: Vec<Complex<f64>> = eps
            .iter()
            .map(|&e| Complex::new(2.0 + 3.0 * e - e * e + 0.5 * e.powi(3), -1.0 + e.powi(4)))
            .collect();
        let r = extrapolate_to_zero(&eps, &vals, ExtrapolationBasis::Polynomial).unwrap();
        assert!((r.value - Complex::new(2.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn log_extrapolation_handles_eps_log_eps() {
        let eps: Vec<f64> = (0..6).map(|i| 0.05 / 2f64.powi(i)).collect();
        let vals: Vec<Complex<f64>> = eps
            .iter()
            .map(|&e| Complex::new(1.5 + e * e.ln() - 2.0 * e + e * e * e.ln(), 0.0))
            .collect();
        let log = extrapolate_to_zero(&eps, &vals, ExtrapolationBasis::PolynomialLog).unwrap();
        assert!((log.value.re - 1.5).abs() < 1e-12, "{}", log.value.re);
        let poly = extrapolate_to_zero(&eps, &vals, ExtrapolationBasis::Polynomial).unwrap();
        assert!((poly.value.re - 1.5).abs() > 1e-6);
    }

    #[test]
    fn weights_sum_to_one() {
        let eps: Vec<f64> = (0..6).map(|i| 0.05 / 2f64.powi(i)).collect();
        for basis in [
            ExtrapolationBasis::Polynomial,
            ExtrapolationBasis::PolynomialLog,
        ] {
            let w = extrapolation_weights(&eps, basis).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}
