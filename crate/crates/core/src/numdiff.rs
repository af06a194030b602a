//! Fourth-order central finite differences of vector fields.

use crate::error::Result;
use crate::scalar::Real;
use crate::vec3::Vec3;

fn axis<T: Real>(k: usize) -> Vec3<T> {
    match k {
        0 => Vec3::new(T::one(), T::zero(), T::zero()),
        1 => Vec3::new(T::zero(), T::one(), T::zero()),
        _ => Vec3::unit_z(),
    }
}

/// `∂F/∂x_k` at `p` by the five-point stencil.
pub fn partial<T: Real, F>(f: &F, p: Vec3<T>, k: usize, h: T) -> Result<Vec3<T>>
where
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let e = axis::<T>(k) * h;
    let two = T::lit(2.0);
    let fp1 = f(p + e)?;
    let fm1 = f(p - e)?;
    let fp2 = f(p + e * two)?;
    let fm2 = f(p - e * two)?;
    Ok(((fp1 - fm1) * T::lit(8.0) - (fp2 - fm2)) / (T::lit(12.0) * h))
}

/// Jacobian columns `[∂F/∂x, ∂F/∂y, ∂F/∂z]`.
pub fn jacobian<T: Real, F>(f: &F, p: Vec3<T>, h: T) -> Result<[Vec3<T>; 3]>
where
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    Ok([partial(f, p, 0, h)?, partial(f, p, 1, h)?, partial(f, p, 2, h)?])
}

pub fn curl<T: Real, F>(f: &F, p: Vec3<T>, h: T) -> Result<Vec3<T>>
where
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let [dx, dy, dz] = jacobian(f, p, h)?;
    Ok(Vec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x))
}

pub fn divergence<T: Real, F>(f: &F, p: Vec3<T>, h: T) -> Result<T>
where
    F: Fn(Vec3<T>) -> Result<Vec3<T>>,
{
    let [dx, dy, dz] = jacobian(f, p, h)?;
    Ok(dx.x + dy.y + dz.z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curl_of_rotation_field() {
        // F = (-y, x, 0) has curl (0, 0, 2)
        let f = |p: Vec3<f64>| Ok(Vec3::new(-p.y, p.x, 0.0));
        let c = curl(&f, Vec3::new(0.3, -1.2, 2.0), 1e-3).unwrap();
        assert!((c - Vec3::new(0.0, 0.0, 2.0)).max_abs() < 1e-12);
    }

    #[test]
    fn divergence_of_quartic() {
        let f = |p: Vec3<f64>| Ok(Vec3::new(p.x.powi(4), p.y * p.z, 0.0));
        let d = divergence(&f, Vec3::new(0.5, 1.0, 2.0), 1e-2).unwrap();
        // 4x³ + z; the five-point stencil is exact through quartics
        assert!((d - (4.0 * 0.125 + 2.0)).abs() < 1e-10);
    }
}
