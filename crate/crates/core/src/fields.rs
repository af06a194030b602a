//! Closed-form static configurations: the (screened) field of a point charge,
//! the unscreened field of a magnetic pole, the two Wu–Yang potentials, flux
//! tubes with and without photon mass, and the massive-photon dispersion law.
//!
//! Units: ħ = c = 1 with Gaussian-like normalization. A pole of strength `g`
//! emits total flux `4πg`; a point charge `q` has field magnitude `q/r²`; the
//! photon mass `μ` is an inverse length.

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;
use crate::special::{bessel_k0, bessel_k1};
use crate::vec3::Vec3;

/// Angular distance to an excluded Wu–Yang axis below which evaluation fails.
pub const AXIS_EXCLUSION: f64 = 1e-9;

/// Charge, pole strength and photon mass of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig<T> {
    pub q: T,
    pub g: T,
    pub mu: T,
}

impl<T: Real> PhysicalConfig<T> {
    pub fn new(q: T, g: T, mu: T) -> Result<Self> {
        if !q.is_finite() || !g.is_finite() {
            return domain("charge and pole strength must be finite");
        }
        if !mu.is_finite() || mu < T::zero() {
            return domain(format!("photon mass must be finite and non-negative, got {mu}"));
        }
        Ok(Self { q, g, mu })
    }

    /// Same charges with a different photon mass.
    pub fn with_mass(self, mu: T) -> Result<Self> {
        Self::new(self.q, self.g, mu)
    }
}

/// Straight flux tube along the z axis carrying the full pole flux `4πg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec<T> {
    pub g: T,
    /// Radius of the uniform tube.
    pub radius: T,
    /// Photon mass for the Proca-screened tube.
    pub mu: T,
}

impl<T: Real> TubeSpec<T> {
    pub fn new(g: T, radius: T, mu: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return domain(format!("tube radius must be positive, got {radius}"));
        }
        if !g.is_finite() || !mu.is_finite() || mu < T::zero() {
            return domain("tube pole strength and mass must be finite, mass non-negative");
        }
        Ok(Self { g, radius, mu })
    }

    /// Interior field of the uniform tube, `B = 4g/R²`.
    pub fn interior_field(&self) -> T {
        T::lit(4.0) * self.g / (self.radius * self.radius)
    }
}

fn radial_parts<T: Real>(r: Vec3<T>, what: &str) -> Result<(T, Vec3<T>)> {
    if !r.is_finite() {
        return domain(format!("{what}: non-finite position"));
    }
    let norm = r.norm();
    if norm == T::zero() {
        return Err(LabError::SingularPoint(format!("{what} evaluated at the source")));
    }
    Ok((norm, r / norm))
}

/// Static field of a point charge at the origin with photon mass `μ`:
/// `q (1 + μr) e^{−μr} / r² r̂`, the Coulomb field when `μ = 0`.
pub fn yukawa_electric_field<T: Real>(cfg: &PhysicalConfig<T>, r: Vec3<T>) -> Result<Vec3<T>> {
    let (norm, unit) = radial_parts(r, "electric field")?;
    let mr = cfg.mu * norm;
    let magnitude = cfg.q * (T::one() + mr) * (-mr).exp() / (norm * norm);
    Ok(unit * magnitude)
}

/// Electric flux through the sphere of radius `R` around the charge, over 4π.
pub fn local_charge<T: Real>(cfg: &PhysicalConfig<T>, radius: T) -> Result<T> {
    if !(radius > T::zero()) {
        return domain(format!("local charge needs a positive radius, got {radius}"));
    }
    let mr = cfg.mu * radius;
    Ok(cfg.q * (T::one() + mr) * (-mr).exp())
}

/// Field of a pole at the origin, `g/r² r̂`. The photon mass does not enter.
pub fn monopole_field<T: Real>(cfg: &PhysicalConfig<T>, r: Vec3<T>) -> Result<Vec3<T>> {
    let (norm, unit) = radial_parts(r, "monopole field")?;
    Ok(unit * (cfg.g / (norm * norm)))
}

/// Hemisphere chart of the Wu–Yang construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Patch {
    /// Regular everywhere except the negative z axis.
    North,
    /// Regular everywhere except the positive z axis.
    South,
}

impl Patch {
    pub fn other(self) -> Self {
        match self {
            Patch::North => Patch::South,
            Patch::South => Patch::North,
        }
    }
}

impl std::str::FromStr for Patch {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "north" | "N" | "n" => Ok(Patch::North),
            "south" | "S" | "s" => Ok(Patch::South),
            other => domain(format!("unknown patch '{other}'")),
        }
    }
}

/// Wu–Yang potential of a pole `g` at the origin on the given patch.
///
/// North: `A_φ = g(1 − cosθ)/(r sinθ)`, South: `A_φ = −g(1 + cosθ)/(r sinθ)`.
/// Evaluated in the cancellation-free form `±g/(r(r ± z)) (−y, x, 0)`.
pub fn wu_yang_potential<T: Real>(patch: Patch, g: T, r: Vec3<T>) -> Result<Vec3<T>> {
    let (norm, _) = radial_parts(r, "Wu-Yang potential")?;
    let rho = r.rho();
    // angular distance from the excluded half-axis
    let (axis_distance, denom, sign) = match patch {
        Patch::North => (rho.atan2(-r.z), norm * (norm + r.z), T::one()),
        Patch::South => (rho.atan2(r.z), norm * (norm - r.z), -T::one()),
    };
    if axis_distance < T::lit(AXIS_EXCLUSION) {
        return Err(LabError::SingularPoint(format!("{patch:?} patch evaluated on its excluded axis")));
    }
    let c = sign * g / denom;
    Ok(Vec3::new(-r.y * c, r.x * c, T::zero()))
}

/// Uniform flux tube of radius `R` along z: `A = B ẑ×r/2` inside with
/// `B = 4g/R²`, and the pure-gauge continuation `A_φ = 2g/ρ` outside.
pub fn tube_potential<T: Real>(spec: &TubeSpec<T>, r: Vec3<T>) -> Vec3<T> {
    let rho2 = r.x * r.x + r.y * r.y;
    let r2 = spec.radius * spec.radius;
    let c = if rho2 <= r2 { spec.interior_field() / T::lit(2.0) } else { T::lit(2.0) * spec.g / rho2 };
    Vec3::new(-r.y * c, r.x * c, T::zero())
}

/// Axial field of the Proca-screened tube, `B_z(ρ) = 2gμ² K₀(μρ)`.
pub fn proca_tube_profile<T: Real>(g: T, mu: T, rho: T) -> Result<T> {
    if !(mu > T::zero()) {
        return domain(format!("Proca tube needs a positive photon mass, got {mu}"));
    }
    if !(rho > T::zero()) {
        return domain(format!("Proca tube profile needs rho > 0, got {rho}"));
    }
    Ok(T::lit(2.0) * g * mu * mu * bessel_k0(mu * rho))
}

/// Azimuthal potential of the Proca tube, `A_φ = (2g/ρ)(1 − μρ K₁(μρ))`,
/// whose curl is [`proca_tube_profile`].
pub fn proca_tube_potential<T: Real>(g: T, mu: T, r: Vec3<T>) -> Result<Vec3<T>> {
    if !(mu > T::zero()) {
        return domain(format!("Proca tube needs a positive photon mass, got {mu}"));
    }
    let rho = r.rho();
    if rho == T::zero() {
        return Ok(Vec3::zero());
    }
    let x = mu * rho;
    // 1 − xK₁(x) ≈ (x²/2)(ln(2/x) + 1/2 − γ) for small x; the closed form
    // stays accurate to ~1e-16/x² relative, fine above x = 1e-4.
    let a_phi = if x < T::lit(1e-4) {
        let gamma = T::lit(0.577_215_664_901_532_9);
        T::lit(2.0) * g / rho * x * x / T::lit(2.0) * ((T::lit(2.0) / x).ln() + T::lit(0.5) - gamma)
    } else {
        T::lit(2.0) * g / rho * (T::one() - x * bessel_k1(x))
    };
    Ok(r.azimuthal_unit() * a_phi)
}

/// Frequency of a free massive photon, `ω = √(k² + μ²)`.
pub fn proca_dispersion<T: Real>(k: T, mu: T) -> Result<T> {
    if k < T::zero() || mu < T::zero() {
        return domain("dispersion needs k >= 0 and mu >= 0");
    }
    Ok(k.hypot(mu))
}

/// Total axial flux of the uniform tube, by radial quadrature of `B·2πρ` over
/// the interior.
pub fn uniform_tube_flux<T: Real>(spec: &TubeSpec<T>) -> T {
    let rule = GaussLegendre::<T>::new(8);
    let b = spec.interior_field();
    rule.integrate(|rho| b * T::TAU() * rho, T::zero(), spec.radius, 4)
}

/// Total axial flux of the Proca tube, `∫₀^∞ B_z(ρ) 2πρ dρ`.
///
/// Integrated in `s = ln(μρ)`, where the integrand `2πρ² B_z` is smooth and
/// decays like `e^{2s}|s|` to the left and doubly-exponentially to the right.
pub fn proca_tube_flux<T: Real>(g: T, mu: T) -> Result<T> {
    if !(mu > T::zero()) {
        return domain(format!("Proca tube needs a positive photon mass, got {mu}"));
    }
    let rule = GaussLegendre::<T>::new(20);
    let integrand = |s: T| {
        let x = s.exp();
        // x² K₀(x) in the scaled variable; B_z ρ² dρ/ds = 2g x² K₀(x)
        T::lit(2.0) * g * x * x * bessel_k0(x) * T::TAU()
    };
    Ok(rule.integrate(integrand, T::lit(-40.0), T::lit(4.5), 60))
}

/// Outward flux of a vector field through a sphere of the given radius centred
/// on the origin, by tensor Gauss–Legendre quadrature in (cosθ, φ).
pub fn sphere_flux<T: Real, F>(field: F, radius: T, order: usize) -> Result<T>
where
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    if !(radius > T::zero()) {
        return domain("sphere flux needs a positive radius");
    }
    let rule = GaussLegendre::<T>::new(order.max(2));
    let failure = std::cell::RefCell::new(None);
    let total = rule.integrate(
        |phi: T| {
            let (sp, cp) = phi.sin_cos();
            rule.integrate(
                |ct: T| {
                    let st = (T::one() - ct * ct).max(T::zero()).sqrt();
                    let n = Vec3::new(st * cp, st * sp, ct);
                    match field(n * radius) {
                        Ok(v) => v.dot(n) * radius * radius,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            T::zero()
                        }
                    }
                },
                -T::one(),
                T::one(),
                2,
            )
        },
        T::zero(),
        T::TAU(),
        2,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// A static vector potential that can be evaluated pointwise.
pub trait VectorPotential<T: Real>: Sync {
    fn potential(&self, r: Vec3<T>) -> Result<Vec3<T>>;

    /// Rejects a straight segment that touches a singular set of the
    /// potential. Quadrature nodes alone can miss such a crossing.
    fn check_segment(&self, _a: Vec3<T>, _b: Vec3<T>) -> Result<()> {
        Ok(())
    }
}

/// Point of the segment `[a, b]` closest to the z axis.
pub fn closest_to_axis<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    let d = b - a;
    let dd = d.x * d.x + d.y * d.y;
    if dd == T::zero() {
        return a;
    }
    let t = (-(a.x * d.x + a.y * d.y) / dd).max(T::zero()).min(T::one());
    a + d * t
}

/// One chart of the Wu–Yang pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WuYang<T> {
    pub patch: Patch,
    pub g: T,
}

impl<T: Real> VectorPotential<T> for WuYang<T> {
    fn potential(&self, r: Vec3<T>) -> Result<Vec3<T>> {
        wu_yang_potential(self.patch, self.g, r)
    }

    fn check_segment(&self, a: Vec3<T>, b: Vec3<T>) -> Result<()> {
        wu_yang_potential(self.patch, self.g, closest_to_axis(a, b)).map(|_| ())
    }
}

impl<T: Real> VectorPotential<T> for TubeSpec<T> {
    fn potential(&self, r: Vec3<T>) -> Result<Vec3<T>> {
        Ok(tube_potential(self, r))
    }
}

/// The Proca-screened tube as a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcaTube<T> {
    pub g: T,
    pub mu: T,
}

impl<T: Real> VectorPotential<T> for ProcaTube<T> {
    fn potential(&self, r: Vec3<T>) -> Result<Vec3<T>> {
        proca_tube_potential(self.g, self.mu, r)
    }
}

/// Homogeneous field `B ẑ` in symmetric gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformField<T> {
    pub b: T,
}

impl<T: Real> VectorPotential<T> for UniformField<T> {
    fn potential(&self, r: Vec3<T>) -> Result<Vec3<T>> {
        let c = self.b / T::lit(2.0);
        Ok(Vec3::new(-r.y * c, r.x * c, T::zero()))
    }
}

/// A potential shifted by a gradient, `A + ∇Λ`.
pub struct GaugeShifted<P, G> {
    pub base: P,
    pub gradient: G,
}

impl<T, P, G> VectorPotential<T> for GaugeShifted<P, G>
where
    T: Real,
    P: VectorPotential<T>,
    G: Fn(Vec3<T>) -> Vec3<T> + Sync,
{
    fn potential(&self, r: Vec3<T>) -> Result<Vec3<T>> {
        Ok(self.base.potential(r)? + (self.gradient)(r))
    }

    fn check_segment(&self, a: Vec3<T>, b: Vec3<T>) -> Result<()> {
        self.base.check_segment(a, b)
    }
}
