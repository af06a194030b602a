//! One-dimensional quadrature: Gauss–Legendre rules, adaptive Gauss–Kronrod
//! bisection, and Richardson extrapolation of refinement sequences.

use crate::scalar::{pairwise_sum, Real};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on `P_n`. Nodes and
    /// weights are computed in `f64` and converted.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::lit(-x);
            nodes[n - 1 - i] = T::lit(x);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]` with this rule applied on `panels` equal panels.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T, panels: usize) -> T {
        let panels = panels.max(1);
        let width = (b - a) / T::from_usize_lossy(panels);
        let half = width / T::lit(2.0);
        let mut partial = Vec::with_capacity(panels);
        for p in 0..panels {
            let mid = a + width * (T::from_usize_lossy(p) + T::lit(0.5));
            let mut s = T::zero();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s = s + *w * f(mid + half * *x);
            }
            partial.push(s * half);
        }
        pairwise_sum(&partial)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Gauss–Kronrod 7/15 panel: returns (Kronrod estimate, |K15 − G7|).
pub fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let center = (a + b) / T::lit(2.0);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kronrod = kronrod + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod integration: repeatedly bisects the panel
/// with the largest error estimate until the summed estimate drops below
/// `max(abs_tol, rel_tol·|I|)` or `max_panels` is reached.
///
/// Panel order is deterministic (ties go to the lowest index), so results are
/// reproducible bit for bit.
pub fn adaptive_gk<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> QuadResult<T> {
    struct Panel<T> {
        a: T,
        b: T,
        value: T,
        error: T,
    }
    if a == b {
        return QuadResult { value: T::zero(), error: T::zero(), evaluations: 0, converged: true };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut panels = vec![Panel { a, b, value: v, error: e }];
    let mut evaluations = 15;
    loop {
        let values: Vec<T> = panels.iter().map(|p| p.value).collect();
        let errors: Vec<T> = panels.iter().map(|p| p.error).collect();
        let total = pairwise_sum(&values);
        let err = pairwise_sum(&errors);
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target || panels.len() >= max_panels {
            return QuadResult { value: total, error: err, evaluations, converged: err <= target };
        }
        let worst = panels
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if p.error > panels[best].error { i } else { best });
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = (pa + pb) / T::lit(2.0);
        if !(mid > pa && mid < pb) {
            // Interval exhausted at machine resolution.
            return QuadResult { value: total, error: err, evaluations, converged: false };
        }
        let (lv, le) = gk15(&mut f, pa, mid);
        let (rv, re) = gk15(&mut f, mid, pb);
        evaluations += 30;
        panels[worst] = Panel { a: pa, b: mid, value: lv, error: le };
        panels.insert(worst + 1, Panel { a: mid, b: pb, value: rv, error: re });
    }
}

/// Richardson extrapolation of a refinement sequence.
///
/// `estimates[k]` is computed at step `h_0 / ratio^k` and the error is assumed
/// to expand in powers `h^{p}, h^{p+dp}, h^{p+2dp}, …`. Returns the
/// extrapolated value and the magnitude of the last correction as an error
/// estimate.
pub fn richardson<T: Real>(estimates: &[T], ratio: T, p: T, dp: T) -> (T, T) {
    assert!(!estimates.is_empty(), "richardson needs at least one estimate");
    let mut row: Vec<T> = estimates.to_vec();
    let mut order = p;
    let mut last_correction = T::infinity();
    while row.len() > 1 {
        let factor = ratio.powf(order);
        let next: Vec<T> = row.windows(2).map(|w| w[1] + (w[1] - w[0]) / (factor - T::one())).collect();
        last_correction = (next[next.len() - 1] - row[row.len() - 1]).abs();
        row = next;
        order = order + dp;
    }
    (row[0], last_correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let v = rule.integrate(|x| x.powi(9) + x.powi(8), -1.0, 1.0, 1);
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_many_nodes() {
        let rule = GaussLegendre::<f64>::new(40);
        let v = rule.integrate(f64::exp, 0.0, 1.0, 1);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫₀¹ ln(x) dx = -1
        let r = adaptive_gk(|x: f64| x.ln(), 0.0, 1.0, 1e-12, 1e-12, 2000);
        assert!(r.converged);
        assert!((r.value + 1.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_sqrt_cusp() {
        // ∫₀² sqrt|x-1| dx = 4/3
        let r = adaptive_gk(|x: f64| (x - 1.0).abs().sqrt(), 0.0, 2.0, 1e-12, 0.0, 4000);
        assert!(r.converged);
        assert!((r.value - 4.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        // A(h) = 1 + 3h² + 5h⁴
        let est: Vec<f64> =
            [0.1, 0.05, 0.025].iter().map(|h: &f64| 1.0 + 3.0 * h * h + 5.0 * h.powi(4)).collect();
        let (v, _) = richardson(&est, 2.0, 2.0, 2.0);
        assert!((v - 1.0).abs() < 1e-13);
    }
}
