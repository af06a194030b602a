use std::f64::consts::{PI, TAU};

use dirac_lab::gauge::{refined_holonomy, LoopPath};
use dirac_lab::vortex::{confinement_energy, solve_vortex, vortex_energy, VortexField};
use dirac_lab::{HiggsModel, Vec3, VortexSolution};
use proptest::prelude::*;

fn solve(q: f64, v: f64, beta: f64, n: i64) -> (HiggsModel, VortexSolution) {
    let m = HiggsModel::with_beta(q, v, beta).unwrap();
    let sol = solve_vortex(&m, n, m.default_r_max(), 512).unwrap();
    (m, sol)
}

/// Critical-coupling profile from the first-order system
/// `f′ = n f (1−a)/r`, `a′ = r (1 − f²)/n` in `r = |q|vρ`, shooting on the
/// core amplitude `f ≈ c rⁿ`.
struct Bogomolny {
    r: Vec<f64>,
    f: Vec<f64>,
    a: Vec<f64>,
}

fn bogomolny_rhs(n: f64, r: f64, y: [f64; 2]) -> [f64; 2] {
    [n * y[0] * (1.0 - y[1]) / r, r * (1.0 - y[0] * y[0]) / n]
}

/// Integrates outward; returns +1 if f overshoots 1, −1 if it turns back,
/// with the samples reached.
fn shoot(n: u32, c: f64, r_end: f64, dr: f64) -> (i32, Bogomolny) {
    let nf = n as f64;
    let r0: f64 = 1e-3;
    let mut y = [c * r0.powi(n as i32), r0 * r0 / (2.0 * nf)];
    let mut r = r0;
    let mut out = Bogomolny { r: vec![r], f: vec![y[0]], a: vec![y[1]] };
    while r < r_end {
        let k1 = bogomolny_rhs(nf, r, y);
        let k2 = bogomolny_rhs(nf, r + dr / 2.0, [y[0] + dr / 2.0 * k1[0], y[1] + dr / 2.0 * k1[1]]);
        let k3 = bogomolny_rhs(nf, r + dr / 2.0, [y[0] + dr / 2.0 * k2[0], y[1] + dr / 2.0 * k2[1]]);
        let k4 = bogomolny_rhs(nf, r + dr, [y[0] + dr * k3[0], y[1] + dr * k3[1]]);
        for k in 0..2 {
            y[k] += dr / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        r += dr;
        out.r.push(r);
        out.f.push(y[0]);
        out.a.push(y[1]);
        if y[0] > 1.0 {
            return (1, out);
        }
        if y[1] > 1.0 {
            return (-1, out);
        }
    }
    (0, out)
}

fn bogomolny_profile(n: u32, r_end: f64) -> Bogomolny {
    let (mut lo, mut hi) = (1e-3, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match shoot(n, mid, r_end, 1e-3).0 {
            1 => hi = mid,
            _ => lo = mid,
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    shoot(n, 0.5 * (lo + hi), r_end, 1e-3).1
}

fn sample(x: &[f64], y: &[f64], at: f64) -> f64 {
    let k = x.partition_point(|&xi| xi <= at).clamp(1, x.len() - 1);
    let t = (at - x[k - 1]) / (x[k] - x[k - 1]);
    y[k - 1] + (y[k] - y[k - 1]) * t
}

#[test]
fn critical_profiles_match_the_first_order_system() {
    for n in [1u32, 2] {
        let (m, sol) = solve(1.0, 1.0, 1.0, n as i64);
        let oracle = bogomolny_profile(n, 6.0);
        let p = &sol.profile;
        let scale = m.q.abs() * m.v;
        for r in [0.3, 0.8, 1.5, 2.5, 4.0] {
            let rho = r / scale;
            let (f_o, a_o) = (sample(&oracle.r, &oracle.f, r), sample(&oracle.r, &oracle.a, r));
            assert!((p.f_at(rho) - f_o).abs() < 2e-3, "n {n} r {r}: f {} vs {f_o}", p.f_at(rho));
            assert!((p.a_at(rho) - a_o).abs() < 2e-3, "n {n} r {r}: a {} vs {a_o}", p.a_at(rho));
        }
        assert!((sol.tension.bogomolny_ratio - 1.0).abs() < 0.01);
        assert!((sol.tension.tension - TAU * n as f64).abs() < 0.01 * TAU * n as f64);
    }
}

#[test]
fn tube_carries_quantized_flux() {
    for (q, n) in [(1.0, 1), (0.5, 1), (1.0, 2), (2.0, 3)] {
        let (_, sol) = solve(q, 1.0, 1.0, n);
        let p = &sol.profile;
        let field = VortexField { profile: p, q };
        let r_max = p.r_max();
        let h = refined_holonomy(&field, |k| LoopPath::horizontal_circle(Vec3::zero(), r_max, k), 64, 3, 1.0)
            .unwrap();
        let want = TAU * n as f64 / q;
        assert!((h.flux - want).abs() < 1e-6 * want.abs(), "q {q} n {n}: {}", h.flux);
        assert!((p.enclosed_flux(q, r_max) - want).abs() < 1e-12);
    }
}

#[test]
fn quantized_tube_holds_a_dirac_pole() {
    // 4πg fits an n-vortex exactly when 2qg = n
    let q = 1.0;
    let (_, sol) = solve(q, 1.0, 1.0, 1);
    let g = 0.5;
    let flux = sol.profile.enclosed_flux(q, sol.profile.r_max());
    assert!((flux - 4.0 * PI * g).abs() < 1e-12);
    assert!(dirac_lab::gauge::check_quantization(q, g, 1e-9).unwrap().satisfied);
}

#[test]
fn tension_grows_with_beta() {
    for n in [1, 2] {
        let t: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&b| solve(1.0, 1.0, b, n).1.tension.tension).collect();
        assert!(t[0] < t[1] && t[1] < t[2], "n {n}: {t:?}");
    }
}

#[test]
fn bogomolny_bound_holds_at_and_above_critical_coupling() {
    for beta in [1.0, 1.5, 2.0, 4.0] {
        for n in [1, 2] {
            let (m, sol) = solve(1.0, 1.0, beta, n);
            let bound = TAU * m.v * m.v * n as f64;
            assert!(sol.tension.tension >= bound * (1.0 - 1e-4), "beta {beta} n {n}");
        }
    }
}

#[test]
fn type_one_vortices_sit_below_the_bound() {
    let (_, sol) = solve(1.0, 1.0, 0.5, 1);
    assert!(sol.tension.bogomolny_ratio < 1.0);
}

#[test]
fn converged_profiles_are_clean() {
    for (beta, n) in [(0.5, 1), (1.0, 1), (2.0, 1), (1.0, 3), (8.0, 2)] {
        let (m, sol) = solve(1.0, 1.0, beta, n);
        let p = &sol.profile;
        assert!(sol.tension.converged && sol.tension.residual < 1e-6);
        assert_eq!((p.f[0], p.a[0]), (0.0, 0.0));
        assert!(p.is_monotone(1e-8) && p.within_unit_bounds(1e-8));
        assert!(p.rho_grid.len() >= 512);
        assert!((vortex_energy(&m, p).unwrap() - sol.tension.tension).abs() < 1e-12);
    }
}

#[test]
fn tension_is_insensitive_to_the_outer_radius() {
    for beta in [0.5, 1.0, 2.0] {
        let m = HiggsModel::with_beta(1.0, 1.0, beta).unwrap();
        let r = m.default_r_max();
        let t1 = solve_vortex(&m, 1, r, 512).unwrap().tension.tension;
        let t2 = solve_vortex(&m, 1, 2.0 * r, 512).unwrap().tension.tension;
        assert!(((t2 - t1) / t1).abs() < 1e-3, "beta {beta}: {t1} vs {t2}");
    }
}

#[test]
fn tension_scales_with_the_vacuum_value() {
    // at fixed β, T = v² × (function of β and n), independent of q
    let base = solve(1.0, 1.0, 2.0, 1).1.tension.tension;
    for (q, v) in [(0.5, 1.0), (2.0, 1.0), (1.0, 0.5), (3.0, 2.0)] {
        let t = solve(q, v, 2.0, 1).1.tension.tension;
        assert!((t / (v * v) / base - 1.0).abs() < 1e-3, "q {q} v {v}");
    }
}

#[test]
fn confinement_energy_at_ten_units() {
    let (m, sol) = solve(1.0, 1.0, 1.0, 1);
    let e = confinement_energy(&sol.tension, 10.0).unwrap();
    let want = 20.0 * PI * m.v * m.v;
    assert!((e / want - 1.0).abs() < 0.01);
    assert_eq!(confinement_energy(&sol.tension, 0.0).unwrap(), 0.0);
}

#[test]
fn profile_csv_columns() {
    let (m, sol) = solve(1.0, 1.0, 1.0, 1);
    let csv = sol.profile.to_csv(&m, &["beta = 1".into()]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# beta = 1"));
    assert_eq!(lines.next(), Some("rho,f,a,B_z,energy_density"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 512);
    // flux from the tabulated field: ∫ B_z 2πρ dρ ≈ 2π n / q
    let flux: f64 =
        rows.windows(2).map(|w| PI * (w[1][0] - w[0][0]) * (w[0][3] * w[0][0] + w[1][3] * w[1][0])).sum();
    assert!((flux / TAU - 1.0).abs() < 1e-3, "{flux}");
    // energy density integrates to the tension
    let t: f64 =
        rows.windows(2).map(|w| PI * (w[1][0] - w[0][0]) * (w[0][4] * w[0][0] + w[1][4] * w[1][0])).sum();
    assert!((t / sol.tension.tension - 1.0).abs() < 1e-3, "{t}");
    // at critical coupling the core field is B_z(0) = q v² (from a′ = r(1−f²)/n)
    assert!((rows[0][3] - 1.0).abs() < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn beta_is_the_mass_ratio(q in 0.1..3.0_f64, v in 0.1..3.0_f64, lambda in 0.01..10.0_f64) {
        let m = HiggsModel::new(q, v, lambda).unwrap();
        let ratio = (m.higgs_mass() / m.photon_mass()).powi(2);
        prop_assert!((ratio / m.beta() - 1.0).abs() < 1e-12);
        prop_assert!(m.default_r_max() >= 10.0 * m.correlation_length());
    }
}
