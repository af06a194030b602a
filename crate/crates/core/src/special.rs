//! Modified Bessel functions needed by the screened configurations.

use crate::scalar::Real;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function of the second kind, order zero, for `x > 0`.
///
/// Power series below `x = 2`; above it the trapezoid rule on
/// `K₀(x) = e^{-x} ∫₀^∞ exp(-x (cosh t - 1)) dt`, which converges
/// geometrically in the step because the integrand is entire and decays
/// doubly-exponentially. Both branches reach full double precision.
/// Returns NaN for `x <= 0` or NaN input.
pub fn bessel_k0<T: Real>(x: T) -> T {
    if x.is_nan() || x <= T::zero() {
        return T::nan();
    }
    if x <= T::lit(2.0) {
        k0_series(x)
    } else {
        k0_integral(x)
    }
}

/// Exponentially scaled `e^x K₀(x)`.
pub fn bessel_k0_scaled<T: Real>(x: T) -> T {
    if x.is_nan() || x <= T::zero() {
        return T::nan();
    }
    if x <= T::lit(2.0) {
        k0_series(x) * x.exp()
    } else {
        k0_integral_scaled(x)
    }
}

fn k0_series<T: Real>(x: T) -> T {
    let y = x * x / T::lit(4.0);
    let log_term = (x / T::lit(2.0)).ln() + T::lit(EULER_GAMMA);
    let mut term = T::one();
    let mut i0 = T::one();
    let mut harmonic_sum = T::zero();
    let mut harmonic = T::zero();
    for k in 1..60 {
        let kf = T::from_usize_lossy(k);
        term = term * y / (kf * kf);
        harmonic = harmonic + T::one() / kf;
        i0 = i0 + term;
        harmonic_sum = harmonic_sum + term * harmonic;
        if term * harmonic < T::epsilon() * harmonic_sum.abs() * T::lit(1e-2) {
            break;
        }
    }
    -log_term * i0 + harmonic_sum
}

fn k0_integral_scaled<T: Real>(x: T) -> T {
    // the integrand's width shrinks like 1/√x
    let step = T::lit(0.125) / (x / T::lit(8.0)).sqrt().max(T::one());
    // exp(-x (cosh t - 1)) < 1e-40 beyond this point.
    let t_max = (T::one() + T::lit(92.0) / x).acosh();
    let n = (t_max / step).ceil().to_usize().unwrap_or(0) + 1;
    let mut acc = T::lit(0.5);
    for k in 1..=n {
        let t = step * T::from_usize_lossy(k);
        acc = acc + (-x * (t.cosh() - T::one())).exp();
    }
    acc * step
}

fn k0_integral<T: Real>(x: T) -> T {
    k0_integral_scaled(x) * (-x).exp()
}

/// Modified Bessel function of the second kind, order one, for `x > 0`.
pub fn bessel_k1<T: Real>(x: T) -> T {
    if x.is_nan() || x <= T::zero() {
        return T::nan();
    }
    if x <= T::lit(2.0) {
        k1_series(x)
    } else {
        k1_integral_scaled(x) * (-x).exp()
    }
}

fn k1_series<T: Real>(x: T) -> T {
    // K₁(x) = 1/x + I₁(x) ln(x/2) − (x/4) Σ [ψ(k+1) + ψ(k+2)] (x²/4)^k / (k!(k+1)!)
    let y = x * x / T::lit(4.0);
    let gamma = T::lit(EULER_GAMMA);
    let mut term = T::one();
    let mut i1_sum = T::one();
    let mut psi_sum = -gamma - gamma + T::one();
    let mut harmonic = T::zero();
    for k in 1..60 {
        let kf = T::from_usize_lossy(k);
        term = term * y / (kf * (kf + T::one()));
        harmonic = harmonic + T::one() / kf;
        let psi_k1 = -gamma + harmonic;
        let psi_k2 = psi_k1 + T::one() / (kf + T::one());
        i1_sum = i1_sum + term;
        psi_sum = psi_sum + term * (psi_k1 + psi_k2);
        if term < T::epsilon() * T::lit(1e-2) {
            break;
        }
    }
    let half_x = x / T::lit(2.0);
    T::one() / x + half_x * i1_sum * half_x.ln() - x / T::lit(4.0) * psi_sum
}

fn k1_integral_scaled<T: Real>(x: T) -> T {
    // the integrand's width shrinks like 1/√x
    let step = T::lit(0.125) / (x / T::lit(8.0)).sqrt().max(T::one());
    let t_max = (T::one() + T::lit(96.0) / x).acosh();
    let n = (t_max / step).ceil().to_usize().unwrap_or(0) + 1;
    let mut acc = T::lit(0.5);
    for k in 1..=n {
        let t = step * T::from_usize_lossy(k);
        acc = acc + (-x * (t.cosh() - T::one())).exp() * t.cosh();
    }
    acc * step
}

/// Modified spherical Bessel function `i₁(x) = (x cosh x − sinh x)/x²`.
pub fn spherical_i1<T: Real>(x: T) -> T {
    spherical_i1_scaled(x) * x.exp()
}

/// `e^{-x} i₁(x)` for `x ≥ 0`, free of overflow and of the small-x cancellation.
pub fn spherical_i1_scaled<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        // Σ x^{2k+1} / (2^k k! (2k+3)!!)
        let x2h = x * x / T::lit(2.0);
        let mut term = x / T::lit(3.0);
        let mut sum = term;
        for k in 1..30 {
            let kf = T::from_usize_lossy(k);
            term = term * x2h / (kf * (T::lit(2.0) * kf + T::lit(3.0)));
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        let e2 = (T::lit(-2.0) * x).exp();
        let half = T::lit(0.5);
        (x * half * (T::one() + e2) - half * (T::one() - e2)) / (x * x)
    }
}

/// Modified spherical Bessel function `k₀(x) = e^{-x}/x` (normalization with
/// `e^{-μ|r−r'|}/|r−r'| = μ Σ (2l+1) i_l k_l P_l`).
pub fn spherical_k0<T: Real>(x: T) -> T {
    (-x).exp() / x
}

/// `k₁(x) = e^{-x}(1 + x)/x²`.
pub fn spherical_k1<T: Real>(x: T) -> T {
    (-x).exp() * (T::one() + x) / (x * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent library implementation.
    const K0_TABLE: &[(f64, f64)] = &[
        (1e-6, 13.93144207362641),
        (0.01, 4.721244730161095),
        (0.1, 2.4270690247020164),
        (0.5, 0.9244190712276656),
        (1.0, 0.42102443824070823),
        (1.5, 0.21380556264752565),
        (2.0, 0.1138938727495334),
        (2.5, 0.062347553200366196),
        (3.0, 0.03473950438627925),
        (5.0, 0.0036910983340425942),
        (10.0, 1.778006231616765e-05),
        (20.0, 5.741237815336524e-10),
        (50.0, 3.410167749789495e-23),
    ];

    #[test]
    fn k0_matches_reference_table() {
        for &(x, want) in K0_TABLE {
            let got = bessel_k0(x);
            assert!(((got - want) / want).abs() < 1e-13, "K0({x}) = {got}, want {want}");
        }
    }

    const K1_TABLE: &[(f64, f64)] = &[
        (1e-3, 999.9962381560855),
        (0.1, 9.853844780870606),
        (0.5, 1.6564411200033007),
        (1.0, 0.6019072301972346),
        (2.0, 0.13986588181652246),
        (3.0, 0.04015643112819419),
        (10.0, 1.8648773453825585e-05),
    ];

    #[test]
    fn k1_matches_reference_table() {
        for &(x, want) in K1_TABLE {
            let got = bessel_k1(x);
            assert!(((got - want) / want).abs() < 1e-12, "K1({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn k0_branches_agree_at_switch() {
        let a = k0_series(2.0_f64);
        let b = k0_integral(2.0_f64);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn k0_single_precision() {
        assert!((bessel_k0(1.0_f32) - 0.421_024_4).abs() < 1e-6);
    }

    #[test]
    fn k0_rejects_nonpositive() {
        assert!(bessel_k0(0.0_f64).is_nan());
        assert!(bessel_k0(-1.0_f64).is_nan());
    }

    #[test]
    fn i1_branches_continuous() {
        let below = spherical_i1(0.5_f64 - 1e-12);
        let above = spherical_i1(0.5_f64);
        assert!((below - above).abs() < 1e-12);
        // sinh/cosh closed form at a comfortable argument
        let x = 3.0_f64;
        assert!((spherical_i1(x) - (x * x.cosh() - x.sinh()) / (x * x)).abs() < 1e-13);
    }

    #[test]
    fn k1_is_minus_derivative_of_k0() {
        let x = 1.3_f64;
        let h = 1e-5;
        let fd = -(spherical_k0(x + h) - spherical_k0(x - h)) / (2.0 * h);
        assert!((fd - spherical_k1(x)).abs() < 1e-9);
    }
}
