//! Gauge-theoretic checks: the Wu–Yang transition function, the quantization
//! predicate in its three equivalent forms, closed-loop holonomies, and the
//! covariant-derivative test for a pure-gauge Higgs configuration.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::fields::{wu_yang_potential, Patch, VectorPotential};
use crate::quadrature::{richardson, GaussLegendre};
use crate::scalar::{pairwise_sum, Real};
use crate::vec3::Vec3;

/// Default tolerance of the quantization predicates for analytic inputs.
pub const DEFAULT_QUANTIZATION_TOL: f64 = 1e-9;

/// Half-width (radians) of the equatorial band where both patches are used.
pub const OVERLAP_HALF_WIDTH: f64 = 0.3;

/// `e^{i n φ}` with `n = 2qg`: the gauge transformation relating the
/// northern and southern Wu–Yang charts for a particle of charge `q`.
pub fn transition_function<T: Real>(q: T, g: T, phi: T) -> Complex<T> {
    let n = T::lit(2.0) * q * g;
    Complex::from_polar(T::one(), n * phi)
}

/// Outcome of the quantization test `2qg ∈ ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport<T> {
    pub n_real: T,
    pub n_nearest: i64,
    pub residual: T,
    pub satisfied: bool,
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    if !(tol > T::zero()) || !tol.is_finite() {
        return domain(format!("tolerance must be positive and finite, got {tol}"));
    }
    Ok(())
}

/// Tests whether `2qg` is an integer to within `tol`.
///
/// The flux-tube statement `qΦ = 2πn` with `Φ = 4πg` and the Proca statement
/// `4πqg = 2πn` both reduce to this one predicate.
pub fn check_quantization<T: Real>(q: T, g: T, tol: T) -> Result<QuantizationReport<T>> {
    check_tol(tol)?;
    if !q.is_finite() || !g.is_finite() {
        return domain("charge and pole strength must be finite");
    }
    let n_real = T::lit(2.0) * q * g;
    let nearest = n_real.round();
    let residual = (n_real - nearest).abs();
    let n_nearest =
        nearest.to_i64().ok_or_else(|| LabError::Domain(format!("2qg = {n_real} out of integer range")))?;
    Ok(QuantizationReport { n_real, n_nearest, residual, satisfied: residual <= tol })
}

/// Chord length `|e^{2πiδ} − 1|` corresponding to a winding residual `δ`.
///
/// Comparing a unit phase against 1 with this threshold is the same test as
/// comparing the residual of `2qg` against `tol`.
pub fn phase_tolerance<T: Real>(tol: T) -> T {
    T::lit(2.0) * (T::PI() * tol.min(T::lit(0.5))).sin()
}

/// Holonomy of the complete string flux `4πg` for a charge `q`, compared with 1.
pub fn string_invisibility<T: Real>(q: T, g: T, tol: T) -> Result<bool> {
    check_tol(tol)?;
    let flux = T::lit(4.0) * T::PI() * g;
    let holonomy = Complex::from_polar(T::one(), q * flux);
    Ok((holonomy - Complex::new(T::one(), T::zero())).norm() <= phase_tolerance(tol))
}

/// A chart of the monopole bundle: a Wu–Yang potential and the polar-angle
/// interval on which it is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugePatch<T> {
    pub patch: Patch,
    pub theta_min: T,
    pub theta_max: T,
}

impl<T: Real> GaugePatch<T> {
    pub fn north() -> Self {
        Self {
            patch: Patch::North,
            theta_min: T::zero(),
            theta_max: T::FRAC_PI_2() + T::lit(OVERLAP_HALF_WIDTH),
        }
    }

    pub fn south() -> Self {
        Self {
            patch: Patch::South,
            theta_min: T::FRAC_PI_2() - T::lit(OVERLAP_HALF_WIDTH),
            theta_max: T::PI(),
        }
    }

    pub fn contains(&self, r: Vec3<T>) -> bool {
        let theta = r.theta();
        r.norm() > T::zero() && theta >= self.theta_min && theta <= self.theta_max
    }

    pub fn potential(&self, g: T, r: Vec3<T>) -> Result<Vec3<T>> {
        if !self.contains(r) {
            return domain(format!("point outside the {:?} patch domain", self.patch));
        }
        wu_yang_potential(self.patch, g, r)
    }
}

/// Whether `r` lies in the equatorial band shared by both patches.
pub fn in_overlap<T: Real>(r: Vec3<T>) -> bool {
    GaugePatch::<T>::north().contains(r) && GaugePatch::<T>::south().contains(r)
}

/// `Λ(φ) = 2gφ`, the gauge function relating the charts (multivalued; the
/// branch is `φ ∈ (−π, π]`).
pub fn overlap_gauge_function<T: Real>(g: T, r: Vec3<T>) -> T {
    T::lit(2.0) * g * r.phi()
}

/// `A_north − A_south` at a point where both charts are regular (anywhere off
/// the z axis; the patches are glued on the [`in_overlap`] band).
pub fn patch_mismatch<T: Real>(g: T, r: Vec3<T>) -> Result<Vec3<T>> {
    let pair = wu_yang_potential(Patch::North, g, r)
        .and_then(|north| Ok(north - wu_yang_potential(Patch::South, g, r)?));
    pair.map_err(|e| match e {
        LabError::SingularPoint(_) => {
            LabError::Domain("point lies on an excluded axis of one of the patches".into())
        }
        other => other,
    })
}

/// Sense of traversal of a loop about the z axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Counter-clockwise seen from +z.
    Positive,
    Negative,
    /// The loop's vector area has no z component.
    Vertical,
}

/// Closed polyline. The first vertex is repeated at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPath<T> {
    vertices: Vec<Vec3<T>>,
    orientation: Orientation,
}

impl<T: Real> LoopPath<T> {
    pub fn new(vertices: Vec<Vec3<T>>) -> Result<Self> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return domain("loop vertices must be finite");
        }
        if vertices.len() < 4 || vertices.first() != vertices.last() {
            return domain("a loop needs at least three distinct vertices and must end where it starts");
        }
        let open = &vertices[..vertices.len() - 1];
        let mut distinct: Vec<Vec3<T>> = Vec::new();
        for v in open {
            if !distinct.contains(v) {
                distinct.push(*v);
            }
        }
        if distinct.len() < 3 {
            return domain("a loop needs at least three distinct vertices");
        }
        let mut path = Self { vertices, orientation: Orientation::Vertical };
        let area_z = path.vector_area().z;
        let scale = path.vertices.iter().map(|v| v.norm_squared()).fold(T::zero(), T::max);
        path.orientation = if area_z.abs() <= T::epsilon() * scale * T::lit(16.0) {
            Orientation::Vertical
        } else if area_z > T::zero() {
            Orientation::Positive
        } else {
            Orientation::Negative
        };
        Ok(path)
    }

    /// Regular polygon inscribed in the circle of polar angle `theta` on the
    /// sphere of the given radius, traversed counter-clockwise about +z.
    pub fn polar_circle(radius: T, theta: T, n: usize) -> Result<Self> {
        if !(radius > T::zero()) {
            return domain("circle radius must be positive");
        }
        let (st, ct) = theta.sin_cos();
        Self::horizontal_circle(Vec3::new(T::zero(), T::zero(), radius * ct), radius * st, n)
    }

    /// Regular `n`-gon in a plane of constant z, counter-clockwise about +z.
    pub fn horizontal_circle(center: Vec3<T>, radius: T, n: usize) -> Result<Self> {
        if n < 3 {
            return domain("a polygonal circle needs n >= 3");
        }
        if !(radius > T::zero()) {
            return domain("circle radius must be positive");
        }
        let step = T::TAU() / T::from_usize_lossy(n);
        let mut v: Vec<Vec3<T>> = (0..n)
            .map(|k| {
                let (s, c) = (step * T::from_usize_lossy(k)).sin_cos();
                center + Vec3::new(radius * c, radius * s, T::zero())
            })
            .collect();
        v.push(v[0]);
        Self::new(v)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]` at height `z`,
    /// counter-clockwise when `x0 < x1` and `y0 < y1`.
    pub fn rectangle(x0: T, y0: T, x1: T, y1: T, z: T) -> Result<Self> {
        let c = [
            Vec3::new(x0, y0, z),
            Vec3::new(x1, y0, z),
            Vec3::new(x1, y1, z),
            Vec3::new(x0, y1, z),
            Vec3::new(x0, y0, z),
        ];
        Self::new(c.to_vec())
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self::new(v).expect("reversal preserves validity")
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `½ Σ vᵢ × vᵢ₊₁`.
    pub fn vector_area(&self) -> Vec3<T> {
        let mut a = Vec3::zero();
        for w in self.vertices.windows(2) {
            a += w[0].cross(w[1]);
        }
        a / T::lit(2.0)
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3<T>, Vec3<T>)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Line integral with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineIntegral<T> {
    pub value: T,
    pub error: T,
}

const SEGMENT_NODES: usize = 10;

fn segment_integral<T: Real, P: VectorPotential<T> + ?Sized>(
    potential: &P,
    rule: &GaussLegendre<T>,
    a: Vec3<T>,
    b: Vec3<T>,
    panels: usize,
) -> Result<T> {
    let tangent = b - a;
    let mut failure = None;
    let value = rule.integrate(
        |t| match potential.potential(a + tangent * t) {
            Ok(v) => v.dot(tangent),
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        },
        T::zero(),
        T::one(),
        panels,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `∮ A·dl` along the polyline, with composite Gauss–Legendre panels on each
/// segment. The error estimate is the change between one and two panels.
pub fn line_integral<T: Real, P: VectorPotential<T> + ?Sized>(
    potential: &P,
    path: &LoopPath<T>,
) -> Result<LineIntegral<T>> {
    let rule = GaussLegendre::<T>::new(SEGMENT_NODES);
    let mut coarse = Vec::new();
    let mut fine = Vec::new();
    for (a, b) in path.segments() {
        potential.check_segment(a, b)?;
        coarse.push(segment_integral(potential, &rule, a, b, 1)?);
        fine.push(segment_integral(potential, &rule, a, b, 2)?);
    }
    let value = pairwise_sum(&fine);
    Ok(LineIntegral { value, error: (value - pairwise_sum(&coarse)).abs() })
}

/// Phase `exp(iq∮A·dl)` and enclosed flux `∮A·dl` of a loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holonomy<T> {
    pub phase: Complex<T>,
    pub flux: T,
    pub error: T,
}

impl<T: Real> Holonomy<T> {
    fn from_flux(q: T, flux: T, error: T) -> Self {
        Self { phase: Complex::from_polar(T::one(), q * flux), flux, error }
    }
}

pub fn loop_holonomy<T: Real, P: VectorPotential<T> + ?Sized>(
    potential: &P,
    path: &LoopPath<T>,
    q: T,
) -> Result<Holonomy<T>> {
    let li = line_integral(potential, path)?;
    Ok(Holonomy::from_flux(q, li.value, li.error))
}

/// Holonomy of a smooth closed curve approximated by a family of inscribed
/// polygons: integrates polygons with `base_vertices · 2^k` vertices for
/// `k = 0..levels` and Richardson-extrapolates in `1/N²`.
pub fn refined_holonomy<T, P, F>(
    potential: &P,
    polygon: F,
    base_vertices: usize,
    levels: usize,
    q: T,
) -> Result<Holonomy<T>>
where
    T: Real,
    P: VectorPotential<T> + ?Sized,
    F: Fn(usize) -> Result<LoopPath<T>>,
{
    let levels = levels.max(1);
    let mut estimates = Vec::with_capacity(levels);
    let mut quad_error = T::zero();
    for k in 0..levels {
        let li = line_integral(potential, &polygon(base_vertices << k)?)?;
        quad_error = quad_error.max(li.error);
        estimates.push(li.value);
    }
    let (flux, extrapolation_error) = if estimates.len() > 1 {
        richardson(&estimates, T::lit(2.0), T::lit(2.0), T::lit(2.0))
    } else {
        (estimates[0], T::infinity())
    };
    Ok(Holonomy::from_flux(q, flux, extrapolation_error.max(quad_error)))
}

/// Points at which the Higgs covariant derivative is sampled, with the
/// finite-difference step used around each.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid<T> {
    pub points: Vec<Vec3<T>>,
    pub spacing: T,
}

impl<T: Real> SampleGrid<T> {
    /// `n_theta × n_phi` points on the sphere of the given radius within the
    /// equatorial overlap band, azimuths avoiding the `φ = ±π` branch cut.
    pub fn equatorial_band(radius: T, n_theta: usize, n_phi: usize, spacing: T) -> Self {
        let half = T::lit(OVERLAP_HALF_WIDTH) * T::lit(0.9);
        let mut points = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let s = if n_theta > 1 {
                T::from_usize_lossy(i) / T::from_usize_lossy(n_theta - 1)
            } else {
                T::lit(0.5)
            };
            let theta = T::FRAC_PI_2() - half + s * (half + half);
            for j in 0..n_phi {
                let phi = -T::lit(0.9) * T::PI()
                    + T::lit(1.8) * T::PI() * (T::from_usize_lossy(j) + T::lit(0.5))
                        / T::from_usize_lossy(n_phi.max(1));
                points.push(Vec3::from_spherical(radius, theta, phi));
            }
        }
        Self { points, spacing }
    }
}

/// `max |(∇ − iq∇Λ) H|` over the samples for the pure-gauge Higgs field
/// `H = H₀ e^{iqΛ}`. Both `∇H` and `∇Λ` use the same central differences, so
/// the residual is pure truncation error, `O(h²)`.
pub fn higgs_covariant_residual<T, F>(q: T, gauge_fn: F, grid: &SampleGrid<T>, h0: T) -> Result<T>
where
    T: Real,
    F: Fn(Vec3<T>) -> T,
{
    let h = grid.spacing;
    if grid.points.is_empty() || !(h > T::zero()) || !h.is_finite() {
        return domain("covariant residual needs a non-empty sample grid with positive spacing");
    }
    let higgs = |p: Vec3<T>| Complex::from_polar(h0, q * gauge_fn(p));
    let two_h = h + h;
    let mut worst = T::zero();
    for &p in &grid.points {
        let h_center = higgs(p);
        let mut sq = T::zero();
        for k in 0..3 {
            let e = match k {
                0 => Vec3::new(h, T::zero(), T::zero()),
                1 => Vec3::new(T::zero(), h, T::zero()),
                _ => Vec3::new(T::zero(), T::zero(), h),
            };
            let d_higgs = (higgs(p + e) - higgs(p - e)) / two_h;
            let a_k = (gauge_fn(p + e) - gauge_fn(p - e)) / two_h;
            let covariant = d_higgs - Complex::new(T::zero(), q * a_k) * h_center;
            sq = sq + covariant.norm_sqr();
        }
        worst = worst.max(sq.sqrt());
    }
    Ok(worst)
}
