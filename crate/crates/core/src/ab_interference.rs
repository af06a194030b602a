//! Aharonov–Bohm interference around a thin flux line.
//!
//! Two models of the same effect:
//!
//! * the two-path law: a flux `Φ` between two paths shifts the fringes by
//!   `(qΦ/2π) mod 1` of a period;
//! * a 2-D lattice Schrödinger equation with the string represented by Peierls
//!   phases on the links crossing a half-line cut from the puncture. Every
//!   plaquette has zero flux except the one holding the puncture, so for
//!   `qΦ ∈ 2πℤ` the link phases are all `1` and the string is exactly
//!   invisible.
//!
//! Sites `(i, j)` sit at `(i h, j h)` and are stored row-major (`j` is the row).
//! The lattice Hamiltonian is `H = (1/2mh²)(4ψ − Σ U ψ_nbr)`; time stepping is
//! a Strang-split Cayley (Crank–Nicolson) scheme `C_x(dt/2) C_y(dt) C_x(dt/2)`,
//! unitary and second order in `dt`. An optional sponge frame absorbs the
//! outgoing wave with a `sin²` ramp.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::scalar::{pairwise_sum, Real};

/// Fringe displacement of the two-path model as a fraction of a period,
/// `(qΦ/2π) mod 1` in `[0, 1)`.
pub fn two_path_fringe_shift<T: Real>(q: T, flux: T) -> T {
    let frac = (q * flux / T::TAU()).rem_euclid(T::one());
    // 2πn computed in floating point can land a hair below n
    if T::one() - frac < T::lit(1e-12) {
        T::zero()
    } else {
        frac
    }
}

/// Side of the puncture along which the cut runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CutDirection {
    #[default]
    Right,
    Left,
}

/// Puncture of the plane by the string, with the charge of the propagating
/// particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxLine<T> {
    pub position: [T; 2],
    pub flux: T,
    pub q: T,
    #[serde(default)]
    pub cut: CutDirection,
}

impl<T: Real> FluxLine<T> {
    pub fn new(position: [T; 2], flux: T, q: T) -> Self {
        Self { position, flux, q, cut: CutDirection::Right }
    }

    pub fn with_cut(mut self, cut: CutDirection) -> Self {
        self.cut = cut;
        self
    }

    /// AB phase `qΦ`.
    pub fn phase(&self) -> T {
        self.q * self.flux
    }

    /// Lower-left site `(i, j)` of the plaquette holding the puncture.
    pub fn plaquette(&self, h: T) -> (isize, isize) {
        let i = (self.position[0] / h).floor().to_isize().unwrap_or(-1);
        let j = (self.position[1] / h).floor().to_isize().unwrap_or(-1);
        (i, j)
    }
}

/// `sin²` absorbing frame: damping rate `strength · sin²(πs/2)` at depth
/// fraction `s` into a frame `width` sites wide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sponge<T> {
    pub width: usize,
    pub strength: T,
}

/// Time-integrated `|ψ|²` along one lattice column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector<T> {
    pub column: usize,
    pub intensity: Vec<T>,
}

/// Gaussian wave packet `exp(−(x−x₀)²/4σx² − (y−y₀)²/4σy² + i k·r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPacket<T> {
    pub center: [T; 2],
    pub sigma: [T; 2],
    pub momentum: [T; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub h: T,
    pub mass: T,
    pub dt: T,
    pub psi: Vec<Complex<T>>,
    /// Hard-wall sites, where `ψ = 0`.
    pub blocked: Vec<bool>,
    pub sponge: Option<Sponge<T>>,
    pub detector: Option<Detector<T>>,
    pub time: T,
    pub steps: usize,
}

impl<T: Real> WaveGrid<T> {
    pub fn new(nx: usize, ny: usize, h: T, mass: T, dt: T) -> Result<Self> {
        if nx < 64 || ny < 64 {
            return domain(format!("wave grid must be at least 64 x 64, got {nx} x {ny}"));
        }
        if !(h > T::zero()) || !(mass > T::zero()) || !(dt > T::zero()) {
            return domain("spacing, mass and time step must be positive");
        }
        let n = nx * ny;
        Ok(Self {
            nx,
            ny,
            h,
            mass,
            dt,
            psi: vec![Complex::new(T::zero(), T::zero()); n],
            blocked: vec![false; n],
            sponge: None,
            detector: None,
            time: T::zero(),
            steps: 0,
        })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Hopping amplitude `1/(2mh²)`.
    pub fn hopping(&self) -> T {
        T::one() / (T::lit(2.0) * self.mass * self.h * self.h)
    }

    /// Upper edge of the lattice spectrum, `4/(mh²)`.
    pub fn max_energy(&self) -> T {
        T::lit(8.0) * self.hopping()
    }

    /// Rejects a time step that over-rotates the top of the spectrum:
    /// `dt · E_max ≤ π`.
    pub fn check_stability(&self) -> Result<()> {
        let x = self.dt * self.max_energy();
        if !(x <= T::PI()) {
            return Err(LabError::Stability(format!(
                "dt * E_max = {x} exceeds pi; reduce dt below {}",
                T::PI() / self.max_energy()
            )));
        }
        Ok(())
    }

    pub fn with_sponge(mut self, sponge: Sponge<T>) -> Result<Self> {
        let min_side = self.nx.min(self.ny);
        if sponge.width * 10 < min_side || 2 * sponge.width >= min_side {
            return domain(format!(
                "sponge width {} must be at least 10% of the grid and leave an interior",
                sponge.width
            ));
        }
        if !(sponge.strength >= T::zero()) {
            return domain("sponge strength must be non-negative");
        }
        self.sponge = Some(sponge);
        Ok(self)
    }

    pub fn with_detector(mut self, column: usize) -> Result<Self> {
        if column >= self.nx {
            return domain(format!("detector column {column} outside the grid"));
        }
        self.detector = Some(Detector { column, intensity: vec![T::zero(); self.ny] });
        Ok(self)
    }

    /// Blocks the sites with `i0 ≤ i < i1`, `j0 ≤ j < j1`.
    pub fn block_rect(&mut self, i0: usize, i1: usize, j0: usize, j1: usize) {
        for j in j0..j1.min(self.ny) {
            for i in i0..i1.min(self.nx) {
                let k = self.index(i, j);
                self.blocked[k] = true;
                self.psi[k] = Complex::new(T::zero(), T::zero());
            }
        }
    }

    /// Replaces `ψ` with a unit-norm Gaussian packet (zero on blocked sites).
    pub fn set_packet(&mut self, packet: &GaussianPacket<T>) -> Result<()> {
        let [sx, sy] = packet.sigma;
        if !(sx >= T::lit(8.0) * self.h) || !(sy >= T::lit(8.0) * self.h) {
            return domain("packet widths must be at least 8 lattice spacings");
        }
        let four = T::lit(4.0);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k = self.index(i, j);
                if self.blocked[k] {
                    continue;
                }
                let dx = self.x(i) - packet.center[0];
                let dy = self.y(j) - packet.center[1];
                let env = (-(dx * dx) / (four * sx * sx) - (dy * dy) / (four * sy * sy)).exp();
                let ph = packet.momentum[0] * self.x(i) + packet.momentum[1] * self.y(j);
                self.psi[k] = Complex::from_polar(env, ph);
            }
        }
        let norm = self.norm();
        if !(norm > T::zero()) {
            return domain("packet lies entirely on blocked sites");
        }
        let s = T::one() / norm.sqrt();
        for z in &mut self.psi {
            *z = *z * s;
        }
        Ok(())
    }

    pub fn x(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.h
    }

    pub fn y(&self, j: usize) -> T {
        T::from_usize_lossy(j) * self.h
    }

    /// `Σ|ψ|² h²`.
    pub fn norm(&self) -> T {
        let rows: Vec<T> = self
            .psi
            .chunks(self.nx)
            .map(|row| pairwise_sum(&row.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()))
            .collect();
        pairwise_sum(&rows) * self.h * self.h
    }

    pub fn intensity(&self) -> Vec<T> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    fn in_sponge(&self, i: usize, j: usize) -> bool {
        match self.sponge {
            Some(s) => i < s.width || j < s.width || i >= self.nx - s.width || j >= self.ny - s.width,
            None => false,
        }
    }

    fn check_line(&self, line: &FluxLine<T>) -> Result<(usize, usize)> {
        let (i0, j0) = line.plaquette(self.h);
        let margin = self.sponge.map_or(1, |s| s.width.max(1)) as isize;
        let inside = |v: isize, n: usize| v >= margin && v + 1 < n as isize - margin;
        if !inside(i0, self.nx) || !inside(j0, self.ny) || !line.flux.is_finite() || !line.q.is_finite() {
            return domain(format!(
                "flux line at ({}, {}) must lie strictly inside the grid, clear of the sponge",
                line.position[0], line.position[1]
            ));
        }
        Ok((i0 as usize, j0 as usize))
    }
}

/// Precomputed Thomas factors of one Cayley sweep. For line position `k`:
/// `(1 + iθH) x = (1 − iθH) ψ` with `H` tridiagonal along the line.
struct Sweep<T> {
    theta: T,
    /// `H_kk`.
    diag: Vec<T>,
    /// `H_{k,k−1}` (zero at the line start and across walls).
    lower: Vec<Complex<T>>,
    /// `H_{k,k+1}`.
    upper: Vec<Complex<T>>,
    /// Modified super-diagonal `c′_k`.
    cprime: Vec<Complex<T>>,
    /// Inverse pivots.
    pivot: Vec<Complex<T>>,
}

/// Evolution operator for one grid and one (possibly absent) flux line.
pub struct Propagator<T> {
    nx: usize,
    ny: usize,
    x_half: Sweep<T>,
    y_full: Sweep<T>,
    damping: Option<Vec<T>>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: &WaveGrid<T>, line: Option<&FluxLine<T>>) -> Result<Self> {
        grid.check_stability()?;
        let (nx, ny) = (grid.nx, grid.ny);
        let t = grid.hopping();
        let zero = Complex::new(T::zero(), T::zero());
        let n = nx * ny;
        let open = |k: usize| !grid.blocked[k];
        let two_t = T::lit(2.0) * t;

        // x direction: lines are rows
        let mut xd = vec![T::zero(); n];
        let mut xl = vec![zero; n];
        let mut xu = vec![zero; n];
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.index(i, j);
                if !open(k) {
                    continue;
                }
                xd[k] = two_t;
                if i > 0 && open(k - 1) {
                    xl[k] = Complex::new(-t, T::zero());
                }
                if i + 1 < nx && open(k + 1) {
                    xu[k] = Complex::new(-t, T::zero());
                }
            }
        }

        // y direction: lines are columns, with the cut phases
        let cut = match line {
            Some(l) => Some((grid.check_line(l)?, Complex::from_polar(T::one(), l.phase()), l.cut)),
            None => None,
        };
        let mut yd = vec![T::zero(); n];
        let mut yl = vec![zero; n];
        let mut yu = vec![zero; n];
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.index(i, j);
                if !open(k) {
                    continue;
                }
                yd[k] = two_t;
                // hop from (i, j−1) up to (i, j) picks up `up`
                let link_phase = |jj: usize| -> Option<Complex<T>> {
                    let ((i0, j0), u, dir) = cut?;
                    if jj != j0 + 1 {
                        return None;
                    }
                    let crosses = match dir {
                        CutDirection::Right => i > i0,
                        CutDirection::Left => i <= i0,
                    };
                    crosses.then(|| match dir {
                        CutDirection::Right => u,
                        CutDirection::Left => u.conj(),
                    })
                };
                if j > 0 && open(k - nx) {
                    yl[k] = match link_phase(j) {
                        Some(u) => u * (-t),
                        None => Complex::new(-t, T::zero()),
                    };
                }
                if j + 1 < ny && open(k + nx) {
                    yu[k] = match link_phase(j + 1) {
                        Some(u) => u.conj() * (-t),
                        None => Complex::new(-t, T::zero()),
                    };
                }
            }
        }

        let half = grid.dt / T::lit(2.0);
        let x_half = Sweep::factor(half, xd, xl, xu, nx, ny, Layout::Rows);
        let y_full = Sweep::factor(grid.dt, yd, yl, yu, nx, ny, Layout::Columns);

        let damping = grid.sponge.map(|s| {
            let mut out = vec![T::one(); n];
            let w = T::from_usize_lossy(s.width);
            for j in 0..ny {
                for i in 0..nx {
                    if !grid.in_sponge(i, j) {
                        continue;
                    }
                    let depth = |p: usize, len: usize| -> T {
                        if p < s.width {
                            T::from_usize_lossy(s.width - p)
                        } else if p >= len - s.width {
                            T::from_usize_lossy(p + 1 - (len - s.width))
                        } else {
                            T::zero()
                        }
                    };
                    let d = depth(i, nx).max(depth(j, ny)) / w;
                    let ramp = (T::FRAC_PI_2() * d).sin();
                    out[grid.index(i, j)] = (-s.strength * ramp * ramp * grid.dt).exp();
                }
            }
            out
        });
        Ok(Self { nx, ny, x_half, y_full, damping })
    }

    /// One Strang step `C_x(dt/2) C_y(dt) C_x(dt/2)`, then the sponge and the
    /// detector.
    pub fn step(&self, grid: &mut WaveGrid<T>) {
        debug_assert_eq!((grid.nx, grid.ny), (self.nx, self.ny));
        self.x_half.apply_rows(&mut grid.psi, self.nx);
        self.y_full.apply_columns(&mut grid.psi, self.nx, self.ny);
        self.x_half.apply_rows(&mut grid.psi, self.nx);
        if let Some(d) = &self.damping {
            grid.psi.par_iter_mut().zip(d.par_iter()).for_each(|(z, &f)| {
                if f != T::one() {
                    *z = *z * f;
                }
            });
        }
        grid.time = grid.time + grid.dt;
        grid.steps += 1;
        if let Some(det) = &mut grid.detector {
            for j in 0..grid.ny {
                let z = grid.psi[j * grid.nx + det.column];
                det.intensity[j] = det.intensity[j] + z.norm_sqr() * grid.dt;
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Layout {
    Rows,
    Columns,
}

impl<T: Real> Sweep<T> {
    fn factor(
        dt: T,
        diag: Vec<T>,
        lower: Vec<Complex<T>>,
        upper: Vec<Complex<T>>,
        nx: usize,
        ny: usize,
        layout: Layout,
    ) -> Self {
        let theta = dt / T::lit(2.0);
        let i_theta = Complex::new(T::zero(), theta);
        let n = nx * ny;
        let mut cprime = vec![Complex::new(T::zero(), T::zero()); n];
        let mut pivot = cprime.clone();
        // walks each line in order, with `prev` the previous index on the line
        let mut visit = |k: usize, prev: Option<usize>| {
            let alpha = Complex::new(T::one(), T::zero()) + i_theta * diag[k];
            let beta = i_theta * lower[k];
            let gamma = i_theta * upper[k];
            let denom = match prev {
                Some(p) => alpha - beta * cprime[p],
                None => alpha,
            };
            let inv = Complex::new(T::one(), T::zero()) / denom;
            pivot[k] = inv;
            cprime[k] = gamma * inv;
        };
        match layout {
            Layout::Rows => {
                for j in 0..ny {
                    for i in 0..nx {
                        visit(j * nx + i, (i > 0).then(|| j * nx + i - 1));
                    }
                }
            }
            Layout::Columns => {
                for j in 0..ny {
                    for i in 0..nx {
                        visit(j * nx + i, (j > 0).then(|| (j - 1) * nx + i));
                    }
                }
            }
        }
        Self { theta, diag, lower, upper, cprime, pivot }
    }

    fn apply_rows(&self, psi: &mut [Complex<T>], nx: usize) {
        psi.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            let base = j * nx;
            let i_theta = Complex::new(T::zero(), self.theta);
            let zero = Complex::new(T::zero(), T::zero());
            let mut prev_old = zero;
            let mut prev_new = zero;
            for i in 0..nx {
                let k = base + i;
                let cur = row[i];
                let next = if i + 1 < nx { row[i + 1] } else { zero };
                let h_psi = cur * self.diag[k] + self.lower[k] * prev_old + self.upper[k] * next;
                let rhs = cur - i_theta * h_psi;
                let y = (rhs - i_theta * self.lower[k] * prev_new) * self.pivot[k];
                row[i] = y;
                prev_old = cur;
                prev_new = y;
            }
            for i in (0..nx - 1).rev() {
                let next = row[i + 1];
                row[i] = row[i] - self.cprime[base + i] * next;
            }
        });
    }

    fn apply_columns(&self, psi: &mut [Complex<T>], nx: usize, ny: usize) {
        let i_theta = Complex::new(T::zero(), self.theta);
        let zero = Complex::new(T::zero(), T::zero());
        let mut prev_old = vec![zero; nx];
        for j in 0..ny {
            let base = j * nx;
            for (i, prev) in prev_old.iter_mut().enumerate() {
                let k = base + i;
                let cur = psi[k];
                let next = if j + 1 < ny { psi[k + nx] } else { zero };
                let prev_new = if j > 0 { psi[k - nx] } else { zero };
                let h_psi = cur * self.diag[k] + self.lower[k] * *prev + self.upper[k] * next;
                let rhs = cur - i_theta * h_psi;
                psi[k] = (rhs - i_theta * self.lower[k] * prev_new) * self.pivot[k];
                *prev = cur;
            }
        }
        for j in (0..ny - 1).rev() {
            let base = j * nx;
            for i in 0..nx {
                let k = base + i;
                let next = psi[k + nx];
                psi[k] = psi[k] - self.cprime[k] * next;
            }
        }
    }
}

/// Evolves a copy of `grid` for `steps` steps with the string present.
pub fn propagate_with_flux<T: Real>(
    grid: &WaveGrid<T>,
    line: &FluxLine<T>,
    steps: usize,
) -> Result<WaveGrid<T>> {
    run(grid, Some(line), steps)
}

/// Evolves a copy of `grid` with no string.
pub fn propagate_free<T: Real>(grid: &WaveGrid<T>, steps: usize) -> Result<WaveGrid<T>> {
    run(grid, None, steps)
}

fn run<T: Real>(grid: &WaveGrid<T>, line: Option<&FluxLine<T>>, steps: usize) -> Result<WaveGrid<T>> {
    let prop = Propagator::new(grid, line)?;
    let mut out = grid.clone();
    for _ in 0..steps {
        prop.step(&mut out);
    }
    Ok(out)
}

/// Relative L2 distance `‖|ψ₁|² − |ψ₀|²‖ / ‖|ψ₀|²‖` over the sites downstream
/// of the flux line (`x` beyond the puncture) and outside the sponge.
pub fn invisibility_metric<T: Real>(
    with_flux: &WaveGrid<T>,
    free: &WaveGrid<T>,
    line: &FluxLine<T>,
) -> Result<T> {
    if (with_flux.nx, with_flux.ny) != (free.nx, free.ny) || with_flux.h != free.h {
        return domain(format!(
            "grid shapes differ: {}x{} vs {}x{}",
            with_flux.nx, with_flux.ny, free.nx, free.ny
        ));
    }
    let (i0, _) = free.check_line(line)?;
    let mut diff = Vec::new();
    let mut base = Vec::new();
    for j in 0..free.ny {
        for i in (i0 + 1)..free.nx {
            if free.in_sponge(i, j) || with_flux.in_sponge(i, j) {
                continue;
            }
            let k = free.index(i, j);
            let a = with_flux.psi[k].norm_sqr();
            let b = free.psi[k].norm_sqr();
            diff.push((a - b) * (a - b));
            base.push(b * b);
        }
    }
    let num = pairwise_sum(&diff).sqrt();
    let den = pairwise_sum(&base).sqrt();
    if den == T::zero() {
        return Ok(if num == T::zero() { T::zero() } else { T::infinity() });
    }
    Ok(num / den)
}

/// Local sinusoidal fit `I(y) ≈ b₀ + b₁y′ + b₂y′² + A cos(ky′ + δ)` around a
/// centre, `y′ = y − centre`, with Hann weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit<T> {
    /// `δ` in `(−π, π]`.
    pub phase: T,
    pub amplitude: T,
    pub wavenumber: T,
}

pub fn fit_fringe<T: Real>(intensity: &[T], h: T, center: T, k: T, half_window: T) -> Result<FringeFit<T>> {
    if !(k > T::zero()) || !(half_window > T::zero()) {
        return domain("fringe fit needs a positive wavenumber and window");
    }
    let mut ata = [[0.0f64; 5]; 5];
    let mut atb = [0.0f64; 5];
    let mut used = 0usize;
    let (kk, c, w) = (k.to_f64_lossy(), center.to_f64_lossy(), half_window.to_f64_lossy());
    for (j, &v) in intensity.iter().enumerate() {
        let y = j as f64 * h.to_f64_lossy() - c;
        if y.abs() >= w {
            continue;
        }
        let wt = (std::f64::consts::FRAC_PI_2 * y / w).cos().powi(2);
        let basis = [1.0, y / w, (y / w).powi(2), (kk * y).cos(), (kk * y).sin()];
        for r in 0..5 {
            atb[r] += wt * basis[r] * v.to_f64_lossy();
            for s in 0..5 {
                ata[r][s] += wt * basis[r] * basis[s];
            }
        }
        used += 1;
    }
    if used < 8 {
        return domain("fringe window covers too few samples");
    }
    let coef = solve_dense(ata, atb)
        .ok_or_else(|| LabError::Domain("fringe fit is degenerate for this window".into()))?;
    let (cc, cs) = (coef[3], coef[4]);
    Ok(FringeFit { phase: T::lit((-cs).atan2(cc)), amplitude: T::lit(cc.hypot(cs)), wavenumber: k })
}

fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let s: f64 = (r + 1..N).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Settings for reading a fringe displacement off two detector traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeReadout<T> {
    pub center: T,
    /// Search interval for the fringe wavenumber.
    pub k_min: T,
    pub k_max: T,
    /// Half-width of the fit window in fringe periods.
    pub periods: T,
}

/// Fringe wavenumber maximizing the fitted amplitude of the reference trace.
pub fn estimate_fringe_wavenumber<T: Real>(intensity: &[T], h: T, readout: &FringeReadout<T>) -> Result<T> {
    if !(readout.k_min > T::zero() && readout.k_max > readout.k_min) {
        return domain("fringe wavenumber interval must be positive and non-empty");
    }
    let amp = |k: T| -> T {
        let w = readout.periods * T::TAU() / k;
        fit_fringe(intensity, h, readout.center, k, w).map_or(T::zero(), |f| f.amplitude)
    };
    let samples = 200;
    let span = readout.k_max - readout.k_min;
    let mut best = (readout.k_min, T::neg_infinity());
    for s in 0..=samples {
        let k = readout.k_min + span * T::from_usize_lossy(s) / T::from_usize_lossy(samples);
        let a = amp(k);
        if a > best.1 {
            best = (k, a);
        }
    }
    // golden-section polish inside the bracketing samples
    let step = span / T::from_usize_lossy(samples);
    let (mut lo, mut hi) = ((best.0 - step).max(readout.k_min), (best.0 + step).min(readout.k_max));
    let g = T::lit(0.618_033_988_749_894_9);
    for _ in 0..40 {
        let a = hi - (hi - lo) * g;
        let b = lo + (hi - lo) * g;
        if amp(a) > amp(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Displacement of the fringes of `shifted` relative to `reference`, as a
/// fraction of a period in `[0, 1)`, in the convention
/// `I ∝ 1 + V cos(Δ(y) + 2π·fraction)` with `Δ` the path difference (lower
/// minus upper slit) increasing with `y`.
pub fn fringe_displacement<T: Real>(
    reference: &[T],
    shifted: &[T],
    h: T,
    readout: &FringeReadout<T>,
) -> Result<T> {
    if reference.len() != shifted.len() {
        return domain("detector traces differ in length");
    }
    let k = estimate_fringe_wavenumber(reference, h, readout)?;
    let w = readout.periods * T::TAU() / k;
    let a = fit_fringe(reference, h, readout.center, k, w)?;
    let b = fit_fringe(shifted, h, readout.center, k, w)?;
    let frac = ((b.phase - a.phase) / T::TAU()).rem_euclid(T::one());
    Ok(if T::one() - frac < T::lit(1e-12) { T::zero() } else { frac })
}

/// Double-slit arrangement with the string threading the barrier between the
/// slits. Lengths are in units of `h`; the lattice is mirror-symmetric about
/// the row midway between `ny/2 − 1` and `ny/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleSlit<T> {
    pub nx: usize,
    pub ny: usize,
    pub h: T,
    pub mass: T,
    pub dt: T,
    pub steps: usize,
    pub sponge_width: usize,
    pub sponge_strength: T,
    /// First column of the barrier.
    pub barrier_x: usize,
    pub barrier_thickness: usize,
    /// Centre-to-centre slit separation in rows (even).
    pub slit_separation: usize,
    pub slit_width: usize,
    pub packet_x: T,
    pub packet_sigma: [T; 2],
    pub k0: T,
    pub detector_x: usize,
    /// Charge of the propagating particle.
    pub q: T,
}

impl<T: Real> Default for DoubleSlit<T> {
    fn default() -> Self {
        Self {
            nx: 512,
            ny: 512,
            h: T::one(),
            mass: T::one(),
            dt: T::lit(0.6),
            steps: 800,
            sponge_width: 56,
            sponge_strength: T::lit(0.3),
            barrier_x: 200,
            barrier_thickness: 4,
            slit_separation: 40,
            slit_width: 6,
            packet_x: T::lit(120.0),
            packet_sigma: [T::lit(16.0), T::lit(32.0)],
            k0: T::lit(1.2),
            detector_x: 430,
            q: T::one(),
        }
    }
}

impl<T: Real> DoubleSlit<T> {
    /// `y` of the symmetry line.
    pub fn center_y(&self) -> T {
        (T::from_usize_lossy(self.ny) - T::one()) * self.h / T::lit(2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.ny.is_multiple_of(2) || !self.slit_separation.is_multiple_of(2) {
            return domain("ny and the slit separation must be even to keep the mirror symmetry");
        }
        if self.slit_width == 0 || self.slit_width >= self.slit_separation {
            return domain("slits must be open and narrower than their separation");
        }
        if !(self.q != T::zero() && self.q.is_finite()) {
            return domain("particle charge must be nonzero and finite");
        }
        if self.barrier_thickness < 2 {
            return domain("barrier must be at least two sites thick to hold the puncture");
        }
        let right = self.nx.saturating_sub(self.sponge_width);
        if !(self.sponge_width < self.barrier_x
            && self.barrier_x + self.barrier_thickness < self.detector_x
            && self.detector_x < right)
        {
            return domain("need sponge < barrier < detector < far sponge along x");
        }
        Ok(())
    }

    /// Grid with barrier, sponge, detector and the incoming packet.
    pub fn grid(&self) -> Result<WaveGrid<T>> {
        self.validate()?;
        let mut g = WaveGrid::new(self.nx, self.ny, self.h, self.mass, self.dt)?
            .with_sponge(Sponge { width: self.sponge_width, strength: self.sponge_strength })?
            .with_detector(self.detector_x)?;
        let bx = (self.barrier_x, self.barrier_x + self.barrier_thickness);
        let mid = self.ny / 2; // rows mid−1 and mid straddle the symmetry line
        let half_sep = self.slit_separation / 2;
        let upper = (mid + half_sep - self.slit_width / 2, mid + half_sep + self.slit_width.div_ceil(2));
        let lower = (self.ny - upper.1, self.ny - upper.0);
        g.block_rect(bx.0, bx.1, 0, lower.0);
        g.block_rect(bx.0, bx.1, lower.1, upper.0);
        g.block_rect(bx.0, bx.1, upper.1, self.ny);
        g.set_packet(&GaussianPacket {
            center: [self.packet_x, self.center_y()],
            sigma: self.packet_sigma,
            momentum: [self.k0, T::zero()],
        })?;
        Ok(g)
    }

    /// String through the middle of the barrier, on the symmetry line,
    /// carrying flux `Φ` for a particle of charge `q`.
    pub fn flux_line(&self, flux: T) -> FluxLine<T> {
        let x = (T::from_usize_lossy(self.barrier_x)
            + T::from_usize_lossy(self.barrier_thickness) / T::lit(2.0)
            - T::lit(0.5))
            * self.h;
        FluxLine::new([x, self.center_y()], flux, self.q)
    }

    /// Readout settings centred on the symmetry line, bracketing the
    /// geometric fringe wavenumber `k₀ s / L`.
    pub fn readout(&self) -> FringeReadout<T> {
        let l = T::from_usize_lossy(self.detector_x - self.barrier_x - self.barrier_thickness / 2);
        let k_geo = self.k0 * T::from_usize_lossy(self.slit_separation) / l / self.h;
        FringeReadout {
            center: self.center_y(),
            k_min: k_geo * T::lit(0.5),
            k_max: k_geo * T::lit(1.5),
            periods: T::lit(1.5),
        }
    }
}
