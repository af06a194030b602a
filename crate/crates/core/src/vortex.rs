//! Straight flux-tube (Nielsen–Olesen) solutions of the Abelian Higgs model.
//!
//! With `H = v f(ρ) e^{inφ}` and `A_φ = n a(ρ)/(qρ)` the energy per unit
//! length is
//!
//! ```text
//! T = 2π ∫ ρ dρ [ v²f′² + v²n²f²(1−a)²/ρ² + n²a′²/(2q²ρ²) + (λ/4)v⁴(f²−1)² ].
//! ```
//!
//! In `r = |q|vρ` this becomes `2πv² ∫ r dr [f′² + n²f²(1−a)²/r² +
//! n²a′²/(2r²) + (β/2)(f²−1)²]` with `β = λ/(2q²) = m_H²/m_V²`; at `β = 1`
//! the tension saturates the bound `T = 2πv²|n|`.
//!
//! The solver minimizes a midpoint-rule discretization of the dimensionless
//! functional on a geometrically stretched grid, by pseudo-transient
//! continuation: `(M/τ + H) δ = −∇E` with `τ` growing on every accepted step,
//! so the iteration starts as an implicit gradient flow and ends as Newton's
//! method. The reported residual is the defect of the discretized
//! Euler–Lagrange equations, scaled to the pointwise form
//! `f″ + f′/r − n²f(1−a)²/r² − βf(f²−1)` and `a″ − a′/r + 2f²(1−a)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::fields::{PhysicalConfig, VectorPotential};
use crate::scalar::{pairwise_sum, Real};
use crate::vec3::Vec3;

/// Abelian Higgs couplings: charge `q` of the scalar, vacuum value `v`,
/// quartic `λ` in the potential `(λ/4)(|H|² − v²)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiggsModel<T> {
    pub q: T,
    pub v: T,
    pub lambda: T,
}

impl<T: Real> HiggsModel<T> {
    pub fn new(q: T, v: T, lambda: T) -> Result<Self> {
        let m = Self { q, v, lambda };
        m.validate()?;
        Ok(m)
    }

    /// The model with `β = λ/(2q²)` fixed.
    pub fn with_beta(q: T, v: T, beta: T) -> Result<Self> {
        Self::new(q, v, beta * T::lit(2.0) * q * q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q != T::zero() && self.q.is_finite()) {
            return domain(format!("Higgs charge must be finite and nonzero, got {}", self.q));
        }
        if !(self.v > T::zero() && self.v.is_finite()) {
            return domain(format!("vacuum value must be positive, got {}", self.v));
        }
        if !(self.lambda > T::zero() && self.lambda.is_finite()) {
            return domain(format!("quartic coupling must be positive, got {}", self.lambda));
        }
        Ok(())
    }

    /// Vector mass `m_V = √2 |q| v`.
    pub fn photon_mass(&self) -> T {
        photon_mass_of(self)
    }

    /// Scalar mass `m_H = √λ v`.
    pub fn higgs_mass(&self) -> T {
        self.lambda.sqrt() * self.v
    }

    /// `β = m_H²/m_V² = λ/(2q²)`; `β = 1` is critical coupling.
    pub fn beta(&self) -> T {
        self.lambda / (T::lit(2.0) * self.q * self.q)
    }

    /// The longer of the two correlation lengths, `max(1/m_H, 1/m_V)`.
    pub fn correlation_length(&self) -> T {
        (T::one() / self.higgs_mass()).max(T::one() / self.photon_mass())
    }

    /// Default outer radius, twenty correlation lengths.
    pub fn default_r_max(&self) -> T {
        T::lit(20.0) * self.correlation_length()
    }

    /// Field-module configuration seen by a probe of charge `q` in the
    /// screened phase, with the photon mass this model generates.
    pub fn physical_config(&self, g: T) -> Result<PhysicalConfig<T>> {
        PhysicalConfig::new(self.q, g, self.photon_mass())
    }

    fn length_scale(&self) -> T {
        self.q.abs() * self.v
    }
}

/// Vector mass `√2·|q|·v` of the model.
pub fn photon_mass_of<T: Real>(model: &HiggsModel<T>) -> T {
    T::SQRT_2() * model.q.abs() * model.v
}

/// Radial profile of an `n`-vortex on a physical grid `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexProfile<T> {
    pub n: u32,
    pub rho_grid: Vec<T>,
    pub f: Vec<T>,
    pub a: Vec<T>,
    pub beta: T,
}

impl<T: Real> VortexProfile<T> {
    fn validate(&self) -> Result<()> {
        let len = self.rho_grid.len();
        if self.n == 0 {
            return domain("winding must be at least 1");
        }
        if len < 3 || self.f.len() != len || self.a.len() != len {
            return domain("profile needs at least three points and matching f, a, rho arrays");
        }
        if self.rho_grid[0] != T::zero() {
            return domain("profile grid must start at rho = 0");
        }
        if self.rho_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("profile grid must be strictly increasing");
        }
        Ok(())
    }

    pub fn r_max(&self) -> T {
        *self.rho_grid.last().expect("validated profile is non-empty")
    }

    /// Linear interpolation of `a` at `ρ`, clamped to the grid.
    pub fn a_at(&self, rho: T) -> T {
        interpolate(&self.rho_grid, &self.a, rho)
    }

    pub fn f_at(&self, rho: T) -> T {
        interpolate(&self.rho_grid, &self.f, rho)
    }

    /// Magnetic flux through the disc of radius `ρ`, `2πn a(ρ)/q`.
    pub fn enclosed_flux(&self, q: T, rho: T) -> T {
        T::TAU() * T::from_usize_lossy(self.n as usize) * self.a_at(rho) / q
    }

    /// `f` and `a` never decrease outward by more than `slack`.
    pub fn is_monotone(&self, slack: T) -> bool {
        let up = |w: &[T]| w[1] >= w[0] - slack;
        self.f.windows(2).all(up) && self.a.windows(2).all(up)
    }

    /// `0 ≤ f, a ≤ 1` up to `slack`.
    pub fn within_unit_bounds(&self, slack: T) -> bool {
        let ok = |x: &T| *x >= -slack && *x <= T::one() + slack;
        self.f.iter().all(ok) && self.a.iter().all(ok)
    }

    /// Rows `(ρ, f, a, B_z, energy density)` for the model the profile
    /// solves.
    pub fn table(&self, model: &HiggsModel<T>) -> Vec<[T; 5]> {
        let rho = &self.rho_grid;
        let len = rho.len();
        let nn = T::from_usize_lossy(self.n as usize);
        let (v, q, lam) = (model.v, model.q, model.lambda);
        let quarter = T::lit(0.25);
        let two = T::lit(2.0);
        let deriv = |y: &[T], i: usize| -> T { three_point_derivative(rho, y, i) };
        let row = |i: usize| -> [T; 5] {
            let (fp, ap) = (deriv(&self.f, i), deriv(&self.a, i));
            let (f, a, r) = (self.f[i], self.a[i], rho[i]);
            let bz = nn * ap / (q * r);
            let dens = v * v * fp * fp
                + v * v * nn * nn * f * f * (T::one() - a) * (T::one() - a) / (r * r)
                + nn * nn * ap * ap / (two * q * q * r * r)
                + quarter * lam * v.powi(4) * (f * f - T::one()) * (f * f - T::one());
            [r, f, a, bz, dens]
        };
        let mut rows: Vec<[T; 5]> = (1..len).map(row).collect();
        // the ρ = 0 row by linear extrapolation of the first two interior rows
        let (r1, r2) = (rho[1], rho[2]);
        let (x1, x2) = (rows[0], rows[1]);
        let t = -r1 / (r2 - r1);
        let mut origin = [T::zero(); 5];
        for k in 3..5 {
            origin[k] = x1[k] + (x2[k] - x1[k]) * t;
        }
        origin[1] = self.f[0];
        origin[2] = self.a[0];
        rows.insert(0, origin);
        rows
    }

    /// CSV with header `rho,f,a,B_z,energy_density`, comment lines first.
    pub fn to_csv(&self, model: &HiggsModel<T>, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("rho,f,a,B_z,energy_density\n");
        for r in self.table(model) {
            let cells: Vec<String> = r.iter().map(|x| format!("{}", x.to_f64_lossy())).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn interpolate<T: Real>(x: &[T], y: &[T], at: T) -> T {
    let last = x.len() - 1;
    if at <= x[0] {
        return y[0];
    }
    if at >= x[last] {
        return y[last];
    }
    let k = x.partition_point(|&xi| xi <= at) - 1;
    let t = (at - x[k]) / (x[k + 1] - x[k]);
    y[k] + (y[k + 1] - y[k]) * t
}

fn three_point_derivative<T: Real>(x: &[T], y: &[T], i: usize) -> T {
    let last = x.len() - 1;
    let (i0, i1, i2) = if i == 0 {
        (0, 1, 2)
    } else if i == last {
        (last - 2, last - 1, last)
    } else {
        (i - 1, i, i + 1)
    };
    let (x0, x1, x2) = (x[i0], x[i1], x[i2]);
    let xi = x[i];
    // derivative of the Lagrange interpolant through the three points
    let l0 = ((xi - x1) + (xi - x2)) / ((x0 - x1) * (x0 - x2));
    let l1 = ((xi - x0) + (xi - x2)) / ((x1 - x0) * (x1 - x2));
    let l2 = ((xi - x0) + (xi - x1)) / ((x2 - x0) * (x2 - x1));
    y[i0] * l0 + y[i1] * l1 + y[i2] * l2
}

/// Tension of a solved vortex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensionResult<T> {
    /// Energy per unit length.
    #[serde(rename = "T")]
    pub tension: T,
    /// `T / (2πv²|n|)`.
    pub bogomolny_ratio: T,
    pub converged: bool,
    /// Largest scaled defect of the discrete Euler–Lagrange equations.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSolution<T> {
    pub profile: VortexProfile<T>,
    pub tension: TensionResult<T>,
    pub iterations: usize,
    pub residual_history: Vec<T>,
}

/// Iteration controls for [`solve_vortex_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions<T> {
    /// Target for the scaled Euler–Lagrange defect.
    pub tolerance: T,
    pub max_iterations: usize,
    /// Geometric stretching exponent of the radial grid; larger values
    /// concentrate points near the axis.
    pub stretch: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        let floor = T::lit(1e4 * T::eps_f64());
        Self { tolerance: T::lit(1e-9).max(floor), max_iterations: 400, stretch: T::lit(2.5) }
    }
}

/// Energy per unit length of `profile` in `model`, by the midpoint rule on the
/// profile's own grid.
///
/// The quadrature error is estimated by comparing with the same rule on every
/// other grid point; an estimate above 1% of the result is an
/// [`LabError::Accuracy`] error.
pub fn vortex_energy<T: Real>(model: &HiggsModel<T>, profile: &VortexProfile<T>) -> Result<T> {
    model.validate()?;
    profile.validate()?;
    let idx: Vec<usize> = (0..profile.rho_grid.len()).collect();
    let fine = energy_on(model, profile, &idx);
    let mut coarse_idx: Vec<usize> = idx.iter().copied().step_by(2).collect();
    if coarse_idx.last() != idx.last() {
        coarse_idx.push(*idx.last().expect("non-empty"));
    }
    let coarse = energy_on(model, profile, &coarse_idx);
    let estimate = (fine - coarse).abs() / T::lit(3.0);
    let scale = model.v * model.v * T::TAU();
    if estimate > T::lit(0.01) * fine.abs() && estimate > T::lit(1e-12) * scale {
        return Err(LabError::Accuracy(format!(
            "vortex energy {} has estimated quadrature error {} (> 1%); refine the profile grid",
            fine, estimate
        )));
    }
    Ok(fine)
}

fn energy_on<T: Real>(model: &HiggsModel<T>, p: &VortexProfile<T>, idx: &[usize]) -> T {
    let nn = T::from_usize_lossy(p.n as usize);
    let (v, q, lam) = (model.v, model.q, model.lambda);
    let half = T::lit(0.5);
    let cells: Vec<T> = idx
        .windows(2)
        .map(|w| {
            let (i, j) = (w[0], w[1]);
            let dr = p.rho_grid[j] - p.rho_grid[i];
            let rm = (p.rho_grid[j] + p.rho_grid[i]) * half;
            let fm = (p.f[i] + p.f[j]) * half;
            let am = (p.a[i] + p.a[j]) * half;
            let fp = (p.f[j] - p.f[i]) / dr;
            let ap = (p.a[j] - p.a[i]) / dr;
            let one_a = T::one() - am;
            let pot = fm * fm - T::one();
            let dens = v * v * fp * fp
                + v * v * nn * nn * fm * fm * one_a * one_a / (rm * rm)
                + nn * nn * ap * ap / (T::lit(2.0) * q * q * rm * rm)
                + T::lit(0.25) * lam * v.powi(4) * pot * pot;
            dens * rm * dr
        })
        .collect();
    T::TAU() * pairwise_sum(&cells)
}

/// `E(L) = T·L` for a pole–antipole pair joined by the tube.
pub fn confinement_energy<T: Real>(tension: &TensionResult<T>, length: T) -> Result<T> {
    if !(length >= T::zero()) || !length.is_finite() {
        return domain(format!("separation must be finite and non-negative, got {length}"));
    }
    Ok(tension.tension * length)
}

/// Solves for the `n`-vortex with default solver settings.
pub fn solve_vortex<T: Real>(
    model: &HiggsModel<T>,
    n: i64,
    r_max: T,
    grid: usize,
) -> Result<VortexSolution<T>> {
    solve_vortex_with(model, n, r_max, grid, &SolverOptions::default())
}

pub fn solve_vortex_with<T: Real>(
    model: &HiggsModel<T>,
    n: i64,
    r_max: T,
    grid: usize,
    opts: &SolverOptions<T>,
) -> Result<VortexSolution<T>> {
    model.validate()?;
    if n <= 0 {
        return domain(format!("winding must be a positive integer, got {n}"));
    }
    let n = u32::try_from(n).map_err(|_| LabError::Domain(format!("winding {n} too large")))?;
    let xi = model.correlation_length();
    if !(r_max >= T::lit(10.0) * xi) || !r_max.is_finite() {
        return domain(format!(
            "r_max = {r_max} must cover at least ten correlation lengths ({})",
            T::lit(10.0) * xi
        ));
    }
    if grid < 512 {
        return domain(format!("radial grid needs at least 512 points, got {grid}"));
    }
    if !(opts.tolerance > T::zero()) || !(opts.stretch > T::zero()) {
        return domain("solver tolerance and grid stretch must be positive");
    }

    let scale = model.length_scale();
    let sys = System::new(n, model.beta(), r_max * scale, grid, opts.stretch);
    let mut x = sys.initial_guess();
    let mut energy = sys.energy(&x);
    let mut tau = T::one();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut residual;
    loop {
        let (g, h) = sys.gradient_hessian(&x);
        residual = sys.scaled_residual(&g);
        history.push(residual);
        if residual <= opts.tolerance || iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;
        let step = sys.solve_shifted(&h, &g, tau);
        let accepted = match step {
            Some(dx) => {
                let trial: Vec<T> = x.iter().zip(&dx).map(|(&xi, &d)| xi + d).collect();
                let e_trial = sys.energy(&trial);
                let slack = T::lit(1e-12) * (T::one() + energy.abs());
                if e_trial.is_finite() && e_trial <= energy + slack {
                    x = trial;
                    energy = e_trial;
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        if accepted {
            tau = (tau * T::lit(3.0)).min(T::lit(1e15));
        } else {
            tau = tau / T::lit(5.0);
            if tau < T::lit(1e-14) {
                break;
            }
        }
    }

    let rho_grid: Vec<T> = sys.r.iter().map(|&r| r / scale).collect();
    let (f, a) = sys.unpack(&x);
    let profile = VortexProfile { n, rho_grid, f, a, beta: model.beta() };
    let bound = T::TAU() * model.v * model.v * T::from_usize_lossy(n as usize);
    let converged = residual <= opts.tolerance;
    let tension_value = energy_on(model, &profile, &(0..grid).collect::<Vec<_>>());
    let tension =
        TensionResult { tension: tension_value, bogomolny_ratio: tension_value / bound, converged, residual };
    let history_f64: Vec<f64> = history.iter().map(|r| r.to_f64_lossy()).collect();
    if !converged {
        return Err(LabError::Convergence {
            message: format!("vortex n = {n}, beta = {} stopped after {iterations} iterations", model.beta()),
            best: tension_value.to_f64_lossy(),
            error: residual.to_f64_lossy(),
            history: history_f64,
        });
    }
    let slack = T::lit(1e-8).max(opts.tolerance);
    if !profile.is_monotone(slack) || !profile.within_unit_bounds(slack) {
        return Err(LabError::Convergence {
            message: format!("vortex n = {n} converged to a non-monotone profile"),
            best: tension_value.to_f64_lossy(),
            error: residual.to_f64_lossy(),
            history: history_f64,
        });
    }
    Ok(VortexSolution { profile, tension, iterations, residual_history: history })
}

/// Discrete dimensionless problem: unknowns `(f_i, a_i)` at the interior
/// nodes `i = 1..N−1`, interleaved; `f = a = 0` at `r = 0` and `1` at the
/// outer edge.
struct System<T> {
    n: T,
    beta: T,
    r: Vec<T>,
}

type Block<T> = [[T; 2]; 2];
/// Diagonal and super-diagonal blocks of a symmetric block-tridiagonal matrix.
type Tridiagonal<T> = (Vec<Block<T>>, Vec<Block<T>>);

struct Cell<T> {
    c1: T,
    c2: T,
    c3: T,
    c4: T,
}

impl<T: Real> System<T> {
    fn new(n: u32, beta: T, r_max: T, points: usize, stretch: T) -> Self {
        let last = points - 1;
        let denom = stretch.exp_m1();
        let r = (0..points)
            .map(|i| {
                if i == last {
                    return r_max;
                }
                let t = T::from_usize_lossy(i) / T::from_usize_lossy(last);
                r_max * (stretch * t).exp_m1() / denom
            })
            .collect();
        Self { n: T::from_usize_lossy(n as usize), beta, r }
    }

    fn interior(&self) -> usize {
        self.r.len() - 2
    }

    fn cell(&self, i: usize) -> Cell<T> {
        let dr = self.r[i + 1] - self.r[i];
        let rm = (self.r[i + 1] + self.r[i]) * T::lit(0.5);
        let n2 = self.n * self.n;
        Cell {
            c1: rm / dr,
            c2: dr * n2 / rm,
            c3: n2 / (T::lit(2.0) * dr * rm),
            c4: dr * rm * self.beta / T::lit(2.0),
        }
    }

    fn node(&self, x: &[T], i: usize) -> (T, T) {
        if i == 0 {
            (T::zero(), T::zero())
        } else if i == self.r.len() - 1 {
            (T::one(), T::one())
        } else {
            (x[2 * (i - 1)], x[2 * (i - 1) + 1])
        }
    }

    fn initial_guess(&self) -> Vec<T> {
        let m_h = (T::lit(2.0) * self.beta).sqrt();
        let kf = m_h.max(T::one()) / T::lit(2.0);
        let ka = T::one() / (T::lit(2.0) * self.n);
        let mut x = Vec::with_capacity(2 * self.interior());
        for &r in &self.r[1..self.r.len() - 1] {
            let f = (kf * r / self.n.sqrt()).tanh().powf(self.n);
            let a = (ka * r * r).tanh();
            x.push(f);
            x.push(a);
        }
        x
    }

    fn unpack(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        (0..self.r.len()).map(|i| self.node(x, i)).unzip()
    }

    fn energy(&self, x: &[T]) -> T {
        let half = T::lit(0.5);
        let cells: Vec<T> = (0..self.r.len() - 1)
            .map(|i| {
                let c = self.cell(i);
                let (fl, al) = self.node(x, i);
                let (fr, ar) = self.node(x, i + 1);
                let (df, da) = (fr - fl, ar - al);
                let u = (fl + fr) * half;
                let w = T::one() - (al + ar) * half;
                let p = u * u - T::one();
                c.c1 * df * df + c.c2 * u * u * w * w + c.c3 * da * da + c.c4 * p * p
            })
            .collect();
        T::TAU() * pairwise_sum(&cells)
    }

    /// Gradient of `energy / 2π` and its block-tridiagonal Hessian
    /// `(diagonal blocks, super-diagonal blocks)`.
    fn gradient_hessian(&self, x: &[T]) -> (Vec<T>, Tridiagonal<T>) {
        let m = self.interior();
        let zero = [[T::zero(); 2]; 2];
        let mut g = vec![T::zero(); 2 * m];
        let mut diag = vec![zero; m];
        let mut upper = vec![zero; m.saturating_sub(1)];
        let (half, two, four) = (T::lit(0.5), T::lit(2.0), T::lit(4.0));
        let last = self.r.len() - 1;
        for i in 0..last {
            let c = self.cell(i);
            let (fl, al) = self.node(x, i);
            let (fr, ar) = self.node(x, i + 1);
            let (df, da) = (fr - fl, ar - al);
            let u = (fl + fr) * half;
            let w = T::one() - (al + ar) * half;
            let gu = c.c2 * two * u * w * w + c.c4 * four * u * (u * u - T::one());
            let gw = c.c2 * two * u * u * w;
            let huu = c.c2 * two * w * w + c.c4 * (T::lit(12.0) * u * u - four);
            let huw = c.c2 * four * u * w;
            let hww = c.c2 * two * u * u;
            let q = T::lit(0.25);
            // same-node block and cross-node block of this cell
            let same = [[two * c.c1 + huu * q, -huw * q], [-huw * q, two * c.c3 + hww * q]];
            let cross = [[-two * c.c1 + huu * q, -huw * q], [-huw * q, -two * c.c3 + hww * q]];
            if i >= 1 {
                let k = i - 1;
                g[2 * k] = g[2 * k] - two * c.c1 * df + gu * half;
                g[2 * k + 1] = g[2 * k + 1] - two * c.c3 * da - gw * half;
                add_block(&mut diag[k], &same);
            }
            if i + 1 < last {
                let k = i;
                g[2 * k] = g[2 * k] + two * c.c1 * df + gu * half;
                g[2 * k + 1] = g[2 * k + 1] + two * c.c3 * da - gw * half;
                add_block(&mut diag[k], &same);
            }
            if i >= 1 && i + 1 < last {
                upper[i - 1] = cross;
            }
        }
        (g, (diag, upper))
    }

    /// Pointwise metric weights `(m_f, m_a)` at interior node `k`.
    fn metric(&self, k: usize) -> (T, T) {
        let i = k + 1;
        let span = (self.r[i + 1] - self.r[i - 1]) * T::lit(0.5);
        let r = self.r[i];
        (T::lit(2.0) * r * span, self.n * self.n * span / r)
    }

    fn scaled_residual(&self, g: &[T]) -> T {
        (0..self.interior()).fold(T::zero(), |acc, k| {
            let (mf, ma) = self.metric(k);
            acc.max((g[2 * k] / mf).abs()).max((g[2 * k + 1] / ma).abs())
        })
    }

    /// Solves `(M/τ + H) δ = −g` by block elimination. `None` when the shifted
    /// matrix is not positive definite.
    fn solve_shifted(&self, h: &Tridiagonal<T>, g: &[T], tau: T) -> Option<Vec<T>> {
        let (diag, upper) = h;
        let m = diag.len();
        let mut pivots: Vec<Block<T>> = Vec::with_capacity(m);
        let mut rhs: Vec<[T; 2]> = Vec::with_capacity(m);
        for k in 0..m {
            let (mf, ma) = self.metric(k);
            let mut d = diag[k];
            d[0][0] = d[0][0] + mf / tau;
            d[1][1] = d[1][1] + ma / tau;
            let mut y = [-g[2 * k], -g[2 * k + 1]];
            if k > 0 {
                let b = upper[k - 1];
                let inv = invert_spd(&pivots[k - 1])?;
                // W = Bᵀ P⁻¹ with B symmetric
                let w = mul(&b, &inv);
                let wb = mul(&w, &b);
                for r in 0..2 {
                    for c in 0..2 {
                        d[r][c] = d[r][c] - wb[r][c];
                    }
                }
                let prev = rhs[k - 1];
                y[0] = y[0] - (w[0][0] * prev[0] + w[0][1] * prev[1]);
                y[1] = y[1] - (w[1][0] * prev[0] + w[1][1] * prev[1]);
            }
            pivots.push(d);
            rhs.push(y);
        }
        let mut out = vec![T::zero(); 2 * m];
        let mut next = [T::zero(); 2];
        for k in (0..m).rev() {
            let inv = invert_spd(&pivots[k])?;
            let mut y = rhs[k];
            if k + 1 < m {
                let b = upper[k];
                y[0] = y[0] - (b[0][0] * next[0] + b[0][1] * next[1]);
                y[1] = y[1] - (b[1][0] * next[0] + b[1][1] * next[1]);
            }
            let xk = [inv[0][0] * y[0] + inv[0][1] * y[1], inv[1][0] * y[0] + inv[1][1] * y[1]];
            out[2 * k] = xk[0];
            out[2 * k + 1] = xk[1];
            next = xk;
        }
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}

fn add_block<T: Real>(acc: &mut Block<T>, b: &Block<T>) {
    for r in 0..2 {
        for c in 0..2 {
            acc[r][c] = acc[r][c] + b[r][c];
        }
    }
}

fn mul<T: Real>(a: &Block<T>, b: &Block<T>) -> Block<T> {
    let mut out = [[T::zero(); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn invert_spd<T: Real>(m: &Block<T>) -> Option<Block<T>> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(m[0][0] > T::zero()) || !(det > T::zero()) || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

/// The vortex gauge field `A = n a(ρ)/(qρ) φ̂` as a potential, for line
/// integrals around the tube.
pub struct VortexField<'a, T> {
    pub profile: &'a VortexProfile<T>,
    pub q: T,
}

impl<T: Real> VectorPotential<T> for VortexField<'_, T> {
    fn potential(&self, r: Vec3<T>) -> Result<Vec3<T>> {
        let rho = r.rho();
        if rho == T::zero() {
            return Ok(Vec3::zero());
        }
        let nn = T::from_usize_lossy(self.profile.n as usize);
        Ok(r.azimuthal_unit() * (nn * self.profile.a_at(rho) / (self.q * rho)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn critical() -> HiggsModel<f64> {
        HiggsModel::with_beta(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn masses() {
        let m = HiggsModel::new(1.0, 1.0, 2.0).unwrap();
        assert!((m.photon_mass() - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.higgs_mass() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.beta(), 1.0);
        let decoupled = HiggsModel { q: 0.0, v: 1.0, lambda: 1.0 };
        assert_eq!(photon_mass_of(&decoupled), 0.0);
        let m = HiggsModel::new(2.0, 0.5, 1.0).unwrap();
        assert!((photon_mass_of(&m) - 2f64.sqrt()).abs() < 1e-15);
        assert!(HiggsModel::new(0.0, 1.0, 1.0).is_err());
        assert!(HiggsModel::new(1.0, -1.0, 1.0).is_err());
        assert!(HiggsModel::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn physical_config_carries_the_photon_mass() {
        let m = HiggsModel::new(2.0, 0.5, 1.0).unwrap();
        let cfg = m.physical_config(0.25).unwrap();
        assert_eq!(cfg.mu, m.photon_mass());
    }

    #[test]
    fn vacuum_and_false_vacuum_energies() {
        let m = HiggsModel::new(1.0, 1.3, 0.7).unwrap();
        let rho: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let len = rho.len();
        let vac = VortexProfile {
            n: 1,
            rho_grid: rho.clone(),
            f: vec![1.0; len],
            a: vec![1.0; len],
            beta: m.beta(),
        };
        assert_eq!(vortex_energy(&m, &vac).unwrap(), 0.0);
        let fv = VortexProfile { n: 1, rho_grid: rho, f: vec![0.0; len], a: vec![0.0; len], beta: m.beta() };
        let want = 0.25 * 0.7 * 1.3f64.powi(4) * std::f64::consts::PI * 100.0;
        assert!((vortex_energy(&m, &fv).unwrap() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_profile_is_rejected() {
        let m = critical();
        let rho: Vec<f64> = (0..6).map(|i| i as f64 * 2.0).collect();
        let f: Vec<f64> = rho.iter().map(|r| (r / 2.0).tanh()).collect();
        let a: Vec<f64> = rho.iter().map(|r| (r * r / 4.0).tanh()).collect();
        let p = VortexProfile { n: 1, rho_grid: rho, f, a, beta: 1.0 };
        assert!(matches!(vortex_energy(&m, &p), Err(LabError::Accuracy(_))));
    }

    #[test]
    fn solve_preconditions() {
        let m = critical();
        let r = m.default_r_max();
        assert!(matches!(solve_vortex(&m, 0, r, 512), Err(LabError::Domain(_))));
        assert!(matches!(solve_vortex(&m, -1, r, 512), Err(LabError::Domain(_))));
        assert!(matches!(solve_vortex(&m, 1, r, 100), Err(LabError::Domain(_))));
        assert!(matches!(solve_vortex(&m, 1, 2.0, 512), Err(LabError::Domain(_))));
    }

    #[test]
    fn critical_vortex_saturates_the_bound() {
        let m = critical();
        let sol = solve_vortex(&m, 1, m.default_r_max(), 512).unwrap();
        let t = sol.tension;
        assert!(t.converged && t.residual < 1e-6);
        assert!((t.bogomolny_ratio - 1.0).abs() < 1e-3, "{}", t.bogomolny_ratio);
        let p = &sol.profile;
        assert_eq!((p.f[0], p.a[0]), (0.0, 0.0));
        assert_eq!((*p.f.last().unwrap(), *p.a.last().unwrap()), (1.0, 1.0));
        assert!(p.is_monotone(0.0));
        let e = vortex_energy(&m, p).unwrap();
        assert!((e - t.tension).abs() < 1e-12);
    }

    #[test]
    fn newton_hessian_matches_finite_differences() {
        let sys = System::new(2, 1.7, 6.0, 12, 2.0);
        let x = sys.initial_guess();
        let (g, (diag, upper)) = sys.gradient_hessian(&x);
        let h = 1e-6;
        let tau = std::f64::consts::TAU;
        for j in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (sys.energy(&xp) - sys.energy(&xm)) / (2.0 * h) / tau;
            assert!((fd - g[j]).abs() < 1e-7, "grad {j}: {fd} vs {}", g[j]);
            let (gp, _) = sys.gradient_hessian(&xp);
            let (gm, _) = sys.gradient_hessian(&xm);
            for i in 0..x.len() {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                let (bi, bj) = (i / 2, j / 2);
                let exact = if bi == bj {
                    diag[bi][i % 2][j % 2]
                } else if bj == bi + 1 {
                    upper[bi][i % 2][j % 2]
                } else if bi == bj + 1 {
                    upper[bj][j % 2][i % 2]
                } else {
                    0.0
                };
                assert!((fd - exact).abs() < 1e-6, "H[{i}][{j}]: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn confinement_is_linear() {
        let t = TensionResult { tension: 2.5, bogomolny_ratio: 1.0, converged: true, residual: 0.0 };
        assert_eq!(confinement_energy(&t, 0.0).unwrap(), 0.0);
        assert_eq!(confinement_energy(&t, 4.0).unwrap(), 2.0 * confinement_energy(&t, 2.0).unwrap());
        assert!(confinement_energy(&t, -1.0).is_err());
    }

    #[test]
    fn tension_json_shape() {
        let t = TensionResult { tension: 6.25, bogomolny_ratio: 1.0, converged: true, residual: 1e-10 };
        let v: serde_json::Value = serde_json::to_value(t).unwrap();
        assert_eq!(v["T"], 6.25);
        assert_eq!(v["converged"], true);
        assert!(v.get("bogomolny_ratio").is_some() && v.get("residual").is_some());
    }
}
