//! Angular momentum stored in the crossed fields of a charge–pole pair.
//!
//! The charge `q` sits at `(0, 0, d)` and the pole `g` at the origin. The
//! electric field is the (Yukawa-screened, when `μ > 0`) field of the charge;
//! the pole's field is never screened. The momentum density is `(E×B)/4π`.
//!
//! With the pair on the z axis the field angular momentum points along the
//! axis. It is reported as `j_z`, its component along the axis directed from
//! the charge to the pole, so that the massless pair gives `j_z = +qg`
//! independently of `d`.
//!
//! The volume integral is split into three regions, each integrated with
//! nested adaptive Gauss–Kronrod rules in coordinates adapted to it:
//!
//! * a shell `ε ≤ |r − dẑ| ≤ d/2` in spherical coordinates about the charge,
//! * a shell `ε ≤ |r| ≤ d/2` in spherical coordinates about the pole,
//! * the rest of the ball `|r| ≤ r_max`, in spherical coordinates about the
//!   pole with the charge's ball cut out of the polar range.
//!
//! The exclusion radius is refined `ε, ε/2, ε/4, …` and Richardson
//! extrapolated (the excluded balls contribute `O(ε²)`, with a regular power
//! series after that). Beyond `r_max` only the dipole moment of the charge's
//! potential survives the angular integration, so the tail is added in closed
//! form: `(2/3) qg d / r_max` without screening and `2qg i₁(μd) k₀(μ r_max)`
//! with it.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::fields::{monopole_field, yukawa_electric_field, PhysicalConfig};
use crate::quadrature::{adaptive_gk, richardson};
use crate::scalar::Real;
use crate::special::spherical_i1_scaled;
use crate::vec3::Vec3;

/// Charge `q` at `(0, 0, d)`, pole `g` at the origin, photon mass `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairConfig<T> {
    pub q: T,
    pub g: T,
    pub d: T,
    pub mu: T,
}

impl<T: Real> PairConfig<T> {
    pub fn new(q: T, g: T, d: T, mu: T) -> Result<Self> {
        if !(d > T::zero()) || !d.is_finite() {
            return domain(format!("separation must be positive, got {d}"));
        }
        PhysicalConfig::new(q, g, mu)?;
        Ok(Self { q, g, d, mu })
    }

    pub fn charge_position(&self) -> Vec3<T> {
        Vec3::new(T::zero(), T::zero(), self.d)
    }

    fn physical(&self) -> PhysicalConfig<T> {
        PhysicalConfig { q: self.q, g: self.g, mu: self.mu }
    }
}

/// Exclusion radius, outer cutoff, tolerance and refinement count of one
/// angular-momentum integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec<T> {
    /// Radius of the balls cut out around the charge and the pole.
    pub eps_exclusion: T,
    /// Radius of the integration sphere about the pole.
    pub r_max: T,
    /// Relative tolerance, measured against `|qg|`.
    pub target_tol: T,
    /// Number of exclusion radii `ε, ε/2, …` used in the extrapolation.
    pub refinement_levels: usize,
}

impl<T: Real> QuadratureSpec<T> {
    /// Defaults scaled to the separation: `ε = d/8`, `r_max = 8d`.
    pub fn for_separation(d: T) -> Self {
        SweepQuadrature::default().spec_for(d)
    }

    pub fn validate(&self, pair: &PairConfig<T>) -> Result<()> {
        let d = pair.d;
        if !(self.eps_exclusion > T::zero() && self.eps_exclusion < d / T::lit(4.0)) {
            return domain(format!(
                "exclusion radius must lie in (0, d/4), got {} for d = {d}",
                self.eps_exclusion
            ));
        }
        if !(self.r_max > T::lit(4.0) * d) || !self.r_max.is_finite() {
            return domain(format!("outer radius must exceed 4d, got {}", self.r_max));
        }
        if !(self.target_tol > T::zero()) {
            return domain("target tolerance must be positive");
        }
        if self.refinement_levels < 2 {
            return domain("at least two exclusion radii are needed to extrapolate");
        }
        Ok(())
    }
}

/// Quadrature settings relative to the separation, for sweeps over `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepQuadrature<T> {
    pub eps_fraction: T,
    pub r_max_factor: T,
    pub target_tol: T,
    pub refinement_levels: usize,
}

impl<T: Real> Default for SweepQuadrature<T> {
    fn default() -> Self {
        Self {
            eps_fraction: T::lit(0.125),
            r_max_factor: T::lit(8.0),
            target_tol: T::lit(1e-6),
            refinement_levels: 5,
        }
    }
}

impl<T: Real> SweepQuadrature<T> {
    pub fn spec_for(&self, d: T) -> QuadratureSpec<T> {
        QuadratureSpec {
            eps_exclusion: self.eps_fraction * d,
            r_max: self.r_max_factor * d,
            target_tol: self.target_tol,
            refinement_levels: self.refinement_levels,
        }
    }
}

/// `(E × B)/4π` at `r`.
pub fn field_momentum_density<T: Real>(pair: &PairConfig<T>, r: Vec3<T>) -> Result<Vec3<T>> {
    let cfg = pair.physical();
    let e = yukawa_electric_field(&cfg, r - pair.charge_position())?;
    let b = monopole_field(&cfg, r)?;
    Ok(e.cross(b) / (T::lit(4.0) * T::PI()))
}

/// Field angular momentum along the pair axis, with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMomentum<T> {
    pub j_z: T,
    pub error: T,
    /// Closed-form contribution from beyond `r_max`.
    pub tail: T,
    /// Integrals at each exclusion radius, before extrapolation and tail.
    pub refinements: [T; 8],
    pub levels: usize,
}

// Integrand evaluations are only ever requested at positive distance from both
// sources, so an evaluation error means a bug in the region geometry.
fn density_moment<T: Real>(pair: &PairConfig<T>, r: Vec3<T>) -> Vec3<T> {
    let p = field_momentum_density(pair, r).expect("integration point away from sources");
    r.cross(p)
}

struct Regions<T> {
    value: T,
    error: T,
}

/// Integrates `f(ρ, z)·dV/dφ` over the three regions for one exclusion radius.
/// `f` is the azimuthal integral of the density at cylindrical `(ρ, z)`.
fn integrate_regions<T: Real, F: Fn(T, T) -> T>(d: T, eps: T, r_max: T, abs_tol: T, f: &F) -> Regions<T> {
    const MAX_PANELS: usize = 400;
    let a = d / T::lit(2.0);
    let inner_abs = abs_tol * T::lit(1e-3) / (r_max + d);
    let inner_rel = T::lit(1e-11);
    let outer_abs = abs_tol * T::lit(0.1);
    let inner_error = Cell::new(T::zero());
    let mut total_error = T::zero();

    let inner = |lo: T, hi: T, g: &dyn Fn(T) -> T| {
        let r = adaptive_gk(g, lo, hi, inner_abs, inner_rel, MAX_PANELS);
        inner_error.set(inner_error.get().max(r.error));
        r.value
    };

    // ball about the charge
    let charge_shell = adaptive_gk(
        |s: T| {
            inner(T::zero(), T::PI(), &|chi: T| {
                let (sc, cc) = chi.sin_cos();
                f(s * sc, d + s * cc) * s * s * sc
            })
        },
        eps,
        a,
        outer_abs,
        T::zero(),
        MAX_PANELS,
    );
    // ball about the pole
    let pole_shell = adaptive_gk(
        |s: T| {
            inner(T::zero(), T::PI(), &|th: T| {
                let (st, ct) = th.sin_cos();
                f(s * st, s * ct) * s * s * st
            })
        },
        eps,
        a,
        outer_abs,
        T::zero(),
        MAX_PANELS,
    );
    // r ∈ [a, 3a] with the charge ball removed: r = 2a − a cos u
    let near = adaptive_gk(
        |u: T| {
            let (su, cu) = u.sin_cos();
            let r = a * (T::lit(2.0) - cu);
            let cos_cut = ((r * r + d * d - a * a) / (T::lit(2.0) * r * d)).min(T::one()).max(-T::one());
            let theta_cut = cos_cut.acos();
            inner(theta_cut, T::PI(), &|th: T| {
                let (st, ct) = th.sin_cos();
                f(r * st, r * ct) * r * r * st
            }) * a
                * su
        },
        T::zero(),
        T::PI(),
        outer_abs,
        T::zero(),
        MAX_PANELS,
    );
    // r ∈ [3a, r_max]
    let far = adaptive_gk(
        |r: T| {
            inner(T::zero(), T::PI(), &|th: T| {
                let (st, ct) = th.sin_cos();
                f(r * st, r * ct) * r * r * st
            })
        },
        T::lit(3.0) * a,
        r_max,
        outer_abs,
        T::zero(),
        MAX_PANELS,
    );
    let mut value = T::zero();
    for part in [charge_shell, pole_shell, near, far] {
        value = value + part.value;
        total_error = total_error + part.error;
    }
    total_error = total_error + inner_error.get() * (r_max + d);
    Regions { value, error: total_error }
}

/// Exact contribution of `|r| > r_max` to `ẑ·J`.
fn tail_z<T: Real>(pair: &PairConfig<T>, r_max: T) -> T {
    let qg = pair.q * pair.g;
    if pair.mu == T::zero() {
        -T::lit(2.0) / T::lit(3.0) * qg * pair.d / r_max
    } else {
        let x = pair.mu * pair.d;
        let y = pair.mu * r_max;
        // i₁(x) k₀(y) without overflow
        -T::lit(2.0) * qg * spherical_i1_scaled(x) * (x - y).exp() / y
    }
}

/// `ẑ·J` with the sign flipped to the charge→pole axis (see module docs).
pub fn field_angular_momentum<T: Real>(
    pair: &PairConfig<T>,
    quad: &QuadratureSpec<T>,
) -> Result<AngularMomentum<T>> {
    quad.validate(pair)?;
    let levels = quad.refinement_levels.min(8);
    let scale = (pair.q * pair.g).abs();
    let abs_tol = quad.target_tol * scale * T::lit(0.1);

    // azimuthal integral of ẑ·(r × p) at (ρ, 0, z): the integrand is axisymmetric
    let f = |rho: T, z: T| T::TAU() * density_moment(pair, Vec3::new(rho, T::zero(), z)).z;

    let mut refinements = [T::zero(); 8];
    let mut quad_error = T::zero();
    let mut eps = quad.eps_exclusion;
    for slot in refinements.iter_mut().take(levels) {
        let reg = integrate_regions(pair.d, eps, quad.r_max, abs_tol, &f);
        *slot = reg.value;
        quad_error = quad_error.max(reg.error);
        eps = eps / T::lit(2.0);
    }
    let (extrapolated, correction) = richardson(&refinements[..levels], T::lit(2.0), T::lit(2.0), T::one());
    let tail = tail_z(pair, quad.r_max);
    let z_component = extrapolated + tail;
    let error = correction + quad_error;
    let result =
        AngularMomentum { j_z: T::zero() - z_component, error, tail: T::zero() - tail, refinements, levels };
    if !z_component.is_finite() || error > quad.target_tol * scale {
        return Err(LabError::Convergence {
            message: format!(
                "field angular momentum for mu = {}, d = {} did not reach relative tolerance {}",
                pair.mu, pair.d, quad.target_tol
            ),
            best: result.j_z.to_f64_lossy(),
            error: error.to_f64_lossy(),
            history: refinements[..levels].iter().map(|v| -v.to_f64_lossy()).collect(),
        });
    }
    Ok(result)
}

/// Transverse components `(J_x, J_y)` by full three-dimensional quadrature
/// (periodic trapezoid in the azimuth), without extrapolation. Both vanish
/// for the axisymmetric pair.
pub fn transverse_angular_momentum<T: Real>(
    pair: &PairConfig<T>,
    quad: &QuadratureSpec<T>,
    azimuth_points: usize,
) -> Result<(T, T)> {
    quad.validate(pair)?;
    let n = azimuth_points.max(4);
    let step = T::TAU() / T::from_usize_lossy(n);
    let abs_tol = quad.target_tol * (pair.q * pair.g).abs() * T::lit(0.1);
    let component = |k: usize| {
        let f = |rho: T, z: T| {
            let mut acc = T::zero();
            for j in 0..n {
                let (s, c) = (step * (T::from_usize_lossy(j) + T::lit(0.25))).sin_cos();
                let m = density_moment(pair, Vec3::new(rho * c, rho * s, z));
                acc = acc + if k == 0 { m.x } else { m.y };
            }
            acc * step
        };
        integrate_regions(pair.d, quad.eps_exclusion, quad.r_max, abs_tol, &f).value
    };
    Ok((component(0), component(1)))
}

/// One cell of an angular-momentum sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell<T> {
    pub mu: T,
    pub d: T,
    pub j_z: T,
    pub err: T,
    pub converged: bool,
}

/// `J_z(μ, d)` on a grid: one row per photon mass, one column per separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable<T> {
    pub q: T,
    pub g: T,
    pub mu: Vec<T>,
    pub d: Vec<T>,
    pub cells: Vec<Vec<SweepCell<T>>>,
}

impl<T: Real> SweepTable<T> {
    pub fn all_converged(&self) -> bool {
        self.cells.iter().flatten().all(|c| c.converged)
    }

    pub fn row(&self, i: usize) -> &[SweepCell<T>] {
        &self.cells[i]
    }

    /// CSV with columns `mu,d,J_z,err`, preceded by `#`-comment lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("mu,d,J_z,err\n");
        for cell in self.cells.iter().flatten() {
            out.push_str(&format!("{},{},{},{}\n", cell.mu, cell.d, cell.j_z, cell.err));
        }
        out
    }
}

/// Evaluates every `(μ, d)` cell concurrently. Cells that fail to converge are
/// kept with their best estimate and `converged = false`; invalid inputs abort.
pub fn angular_momentum_sweep<T: Real>(
    q: T,
    g: T,
    mu_list: &[T],
    d_list: &[T],
    quad: &SweepQuadrature<T>,
) -> Result<SweepTable<T>> {
    if mu_list.is_empty() || d_list.is_empty() {
        return domain("sweep lists must not be empty");
    }
    let mut jobs = Vec::with_capacity(mu_list.len() * d_list.len());
    for &mu in mu_list {
        for &d in d_list {
            let pair = PairConfig::new(q, g, d, mu)?;
            let spec = quad.spec_for(d);
            spec.validate(&pair)?;
            jobs.push((pair, spec));
        }
    }
    let results: Vec<Result<SweepCell<T>>> = jobs
        .par_iter()
        .map(|(pair, spec)| match field_angular_momentum(pair, spec) {
            Ok(j) => Ok(SweepCell { mu: pair.mu, d: pair.d, j_z: j.j_z, err: j.error, converged: true }),
            Err(LabError::Convergence { best, error, .. }) => Ok(SweepCell {
                mu: pair.mu,
                d: pair.d,
                j_z: T::lit(best),
                err: T::lit(error),
                converged: false,
            }),
            Err(e) => Err(e),
        })
        .collect();
    let mut flat = Vec::with_capacity(results.len());
    for r in results {
        flat.push(r?);
    }
    let cells = flat.chunks(d_list.len()).map(<[SweepCell<T>]>::to_vec).collect();
    Ok(SweepTable { q, g, mu: mu_list.to_vec(), d: d_list.to_vec(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_vanishes_on_axis_and_without_charge() {
        let pair = PairConfig::new(1.0, 1.0, 1.0, 0.3).unwrap();
        for z in [-2.0, 0.4, 3.0] {
            let p = field_momentum_density(&pair, Vec3::new(0.0, 0.0, z)).unwrap();
            assert_eq!(p.max_abs(), 0.0);
        }
        let neutral = PairConfig::new(0.0, 1.0, 1.0, 0.0).unwrap();
        let p = field_momentum_density(&neutral, Vec3::new(0.3, 0.1, 0.7)).unwrap();
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn density_closed_form_point() {
        // charge at (0,0,1), point (1,0,0): E = (1,0,-1)/2^{3/2}, B = (1,0,0)
        let pair = PairConfig::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let p = field_momentum_density(&pair, Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let e = Vec3::new(1.0, 0.0, -1.0) / 8.0_f64.sqrt();
        let want = e.cross(Vec3::new(1.0, 0.0, 0.0)) / (4.0 * std::f64::consts::PI);
        assert!((p - want).max_abs() < 1e-16);
    }

    #[test]
    fn density_singular_at_sources() {
        let pair = PairConfig::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(field_momentum_density(&pair, Vec3::zero()).is_err());
        assert!(field_momentum_density(&pair, Vec3::new(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn spec_validation() {
        let pair = PairConfig::new(1.0, 0.5, 1.0, 0.0).unwrap();
        let mut spec = QuadratureSpec::for_separation(1.0);
        assert!(spec.validate(&pair).is_ok());
        spec.eps_exclusion = 0.3;
        assert!(spec.validate(&pair).is_err());
        let mut spec = QuadratureSpec::for_separation(1.0);
        spec.r_max = 3.0;
        assert!(spec.validate(&pair).is_err());
        assert!(PairConfig::new(1.0, 0.5, 0.0, 0.0).is_err());
        assert!(PairConfig::new(1.0, 0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn massless_value() {
        let pair = PairConfig::new(1.0_f64, 0.5, 1.0, 0.0).unwrap();
        let j = field_angular_momentum(&pair, &QuadratureSpec::for_separation(1.0)).unwrap();
        assert!((j.j_z - 0.5).abs() < 1e-6, "{j:?}");
    }

    #[test]
    fn zero_charge_sweep_is_zero() {
        let t =
            angular_momentum_sweep(0.0, 0.5, &[0.0, 1.0], &[1.0, 2.0], &SweepQuadrature::default()).unwrap();
        assert!(t.cells.iter().flatten().all(|c| c.j_z == 0.0 && c.converged));
        assert!(angular_momentum_sweep(1.0, 0.5, &[], &[1.0], &SweepQuadrature::default()).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = angular_momentum_sweep(0.0, 0.5, &[0.0], &[1.0], &SweepQuadrature::default()).unwrap();
        let csv = t.to_csv(&["config_hash=abc".into()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines, vec!["# config_hash=abc", "mu,d,J_z,err", "0,1,0,0"]);
    }
}
