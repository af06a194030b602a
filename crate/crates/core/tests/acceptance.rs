//! Acceptance suite. Each criterion prints one PASS/FAIL line with the measured
//! quantities; the process exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p dirac-lab --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use dirac_lab::ab_interference::{
    fringe_displacement, invisibility_metric, propagate_free, propagate_with_flux, two_path_fringe_shift,
    CutDirection,
};
use dirac_lab::angmom::field_angular_momentum;
use dirac_lab::fields::{
    local_charge, proca_tube_flux, uniform_tube_flux, wu_yang_potential, Patch, ProcaTube, WuYang,
};
use dirac_lab::gauge::{
    check_quantization, in_overlap, phase_tolerance, refined_holonomy, string_invisibility,
    transition_function, LoopPath,
};
use dirac_lab::vortex::{confinement_energy, solve_vortex, VortexField};
use dirac_lab::{
    DoubleSlit, HiggsModel, PairConfig, PhysicalConfig, SweepQuadrature, TubeSpec, Vec3, WaveGrid,
};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn quantization_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairs = Vec::new();
    for k in 0..200 {
        let q: f64 = rng.gen_range(0.1..4.0) * if k % 2 == 0 { 1.0 } else { -1.0 };
        let g = if k % 4 < 2 {
            rng.gen_range(-3.0..3.0)
        } else {
            // land near a quantized pair now and then
            (rng.gen_range(-8i64..=8) as f64 + rng.gen_range(-1e-6..1e-6)) / (2.0 * q)
        };
        pairs.push((q, g));
    }
    for n in -6i64..=6 {
        for q in [0.5, 1.0, 2.0, 3.0] {
            for off in [-1e-12, 0.0, 1e-12] {
                pairs.push((q, (n as f64 + off) / (2.0 * q)));
            }
        }
    }
    let mut disagreements = 0;
    let mut satisfied = 0;
    for tol in [1e-9, 1e-6] {
        for &(q, g) in &pairs {
            let a = check_quantization(q, g, tol).unwrap().satisfied;
            let b = string_invisibility(q, g, tol).unwrap();
            let c = (transition_function(q, g, TAU) - Complex::new(1.0, 0.0)).norm() <= phase_tolerance(tol);
            if a != b || a != c {
                disagreements += 1;
            }
            satisfied += a as usize;
        }
    }
    outcome(
        disagreements == 0,
        format!("{} checks, {satisfied} quantized, {disagreements} disagreements", 2 * pairs.len()),
    )
}

fn massless_angular_momentum() -> Outcome {
    let quad = SweepQuadrature::default();
    let mut values = Vec::new();
    for d in [0.5, 1.0, 2.0, 4.0] {
        let pair = PairConfig::new(1.0, 0.5, d, 0.0).unwrap();
        match field_angular_momentum(&pair, &quad.spec_for(d)) {
            Ok(j) => values.push(j.j_z),
            Err(e) => return outcome(false, format!("d = {d}: {e}")),
        }
    }
    let worst = values.iter().map(|j| (j / 0.5 - 1.0).abs()).fold(0.0, f64::max);
    let spread =
        values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    outcome(
        worst < 1e-3 && spread / 0.5 < 1e-3,
        format!("J_z = {values:.8?}, worst rel {worst:.2e}, spread {spread:.2e}"),
    )
}

fn massive_decline() -> Outcome {
    let (q, g, mu) = (1.0, 0.5, 1.0);
    let quad = SweepQuadrature::default();
    let j = |d: f64| {
        field_angular_momentum(&PairConfig::new(q, g, d, mu).unwrap(), &quad.spec_for(d)).map(|a| a.j_z)
    };
    let mut values = Vec::new();
    for d in [1.0, 2.0, 4.0, 8.0] {
        match j(d) {
            Ok(v) => values.push(v),
            Err(e) => return outcome(false, format!("d = {d}: {e}")),
        }
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let far = match j(10.0 / mu) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("mu d = 10: {e}")),
    };
    let bound = 0.01 * q * g;
    outcome(
        decreasing && far < bound,
        format!(
            "J_z(d=1,2,4,8) = {values:.6?} decreasing: {decreasing}; J_z(mu d=10) = {far:.6} = {:.6} qg vs bound {bound} (0.01 qg)",
            far / (q * g)
        ),
    )
}

fn flux_conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut uniform_gap: f64 = 0.0;
    for (g, mu) in [(0.5, 1.0), (1.0, 2.0)] {
        let want = 4.0 * PI * g;
        let proca = proca_tube_flux(g, mu).unwrap();
        worst = worst.max((proca / want - 1.0).abs());
        for radius in [0.5, 1.0, 2.0] {
            let spec = TubeSpec::new(g, radius, 0.0).unwrap();
            // B = 4g/R² over πR²
            let by_hand = 4.0 * g / (radius * radius) * PI * radius * radius;
            uniform_gap = uniform_gap
                .max((uniform_tube_flux(&spec) - proca).abs() / want)
                .max((spec.interior_field() * PI * radius * radius - by_hand).abs() / want);
        }
    }
    outcome(
        worst < 1e-6 && uniform_gap < 1e-6,
        format!("Proca flux rel err {worst:.2e}, uniform vs Proca rel gap {uniform_gap:.2e}"),
    )
}

fn wu_yang_consistency() -> Outcome {
    let g = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 1000 {
        let p = Vec3::from_spherical(
            rng.gen_range(0.2..10.0),
            rng.gen_range(PI / 2.0 - 0.3..PI / 2.0 + 0.3),
            rng.gen_range(-PI..PI),
        );
        if !in_overlap(p) {
            continue;
        }
        let d =
            wu_yang_potential(Patch::North, g, p).unwrap() - wu_yang_potential(Patch::South, g, p).unwrap();
        // ∇φ = (−y, x, 0)/ρ²
        let rho2 = p.x * p.x + p.y * p.y;
        let grad = Vec3::new(-p.y / rho2, p.x / rho2, 0.0) * (2.0 * g);
        worst = worst.max((d - grad).norm() / grad.norm());
        count += 1;
    }
    let wy = WuYang { patch: Patch::North, g };
    let mut cap: f64 = 0.0;
    for theta in [0.3, 1.0, PI / 2.0, 2.2, 2.9] {
        let h = refined_holonomy(&wy, |n| LoopPath::polar_circle(1.0, theta, n), 64, 3, 1.0).unwrap();
        cap = cap.max((h.flux - TAU * g * (1.0 - theta.cos())).abs());
    }
    outcome(
        worst < 1e-10 && cap < 1e-8,
        format!("{count} band points, worst rel mismatch {worst:.2e}; cap flux max err {cap:.2e}"),
    )
}

struct Lattice {
    setup: DoubleSlit,
    grid: WaveGrid,
    free: WaveGrid,
}

fn trace(w: &WaveGrid) -> Vec<f64> {
    w.detector.as_ref().expect("double slit carries a detector").intensity.clone()
}

fn string_invisibility_by_simulation(lat: &Lattice) -> Outcome {
    let s = &lat.setup;
    let quantized = s.flux_line(TAU);
    let half = s.flux_line(PI);
    let a = propagate_with_flux(&lat.grid, &quantized, s.steps).unwrap();
    let b = propagate_with_flux(&lat.grid, &half, s.steps).unwrap();
    let left = propagate_with_flux(&lat.grid, &quantized.with_cut(CutDirection::Left), s.steps).unwrap();
    let m_quant = invisibility_metric(&a, &lat.free, &quantized).unwrap();
    let m_half = invisibility_metric(&b, &lat.free, &half).unwrap();
    let peak = a.intensity().into_iter().fold(0.0, f64::max);
    let cut_gap =
        a.psi.iter().zip(&left.psi).map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs()).fold(0.0, f64::max)
            / peak;
    outcome(
        m_quant < 1e-2 && m_half > 0.1 && cut_gap < 1e-10,
        format!(
            "{}x{}: metric(2pi) = {m_quant:.2e}, metric(pi) = {m_half:.3}, cut gap (rel to peak) = {cut_gap:.2e}",
            s.nx, s.ny
        ),
    )
}

fn fringe_shift_law(lat: &Lattice) -> Outcome {
    let s = &lat.setup;
    let readout = s.readout();
    let reference = trace(&lat.free);
    let mut pass = true;
    let mut parts = Vec::new();
    for phase in [PI / 2.0, PI, 1.5 * PI] {
        let line = s.flux_line(phase / s.q);
        let run = propagate_with_flux(&lat.grid, &line, s.steps).unwrap();
        let got = fringe_displacement(&reference, &trace(&run), s.h, &readout).unwrap();
        let want = two_path_fringe_shift(s.q, line.flux);
        let rel = (got - want).abs() / want;
        pass &= rel <= 0.05;
        parts.push(format!("qPhi={phase:.4}: {got:.5} vs {want:.5} (rel {rel:.1e})"));
    }
    outcome(pass, parts.join("; "))
}

fn vortex_suite() -> Outcome {
    let model = HiggsModel::with_beta(1.0, 1.0, 1.0).unwrap();
    let sol = match solve_vortex(&model, 1, model.default_r_max(), 512) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let bound = TAU * model.v * model.v;
    let t_rel = (sol.tension.tension / bound - 1.0).abs();
    let mut flux_rel: f64 = 0.0;
    let mut boundary = true;
    for (q, n) in [(1.0, 1), (1.0, 2), (0.5, 1)] {
        let m = HiggsModel::with_beta(q, 1.0, 1.0).unwrap();
        let s = solve_vortex(&m, n, m.default_r_max(), 512).unwrap();
        let p = &s.profile;
        let field = VortexField { profile: p, q };
        let h =
            refined_holonomy(&field, |k| LoopPath::horizontal_circle(Vec3::zero(), p.r_max(), k), 64, 3, 1.0)
                .unwrap();
        let want = TAU * n as f64 / q;
        flux_rel = flux_rel.max((h.flux / want - 1.0).abs());
        boundary &= p.f[0] == 0.0 && p.a[0] == 0.0;
    }
    let lengths = [0.5, 1.0, 10.0, 100.0, 1e4];
    let linear = lengths.iter().all(|&l| {
        let e = confinement_energy(&sol.tension, l).unwrap();
        let e2 = confinement_energy(&sol.tension, 2.0 * l).unwrap();
        e == sol.tension.tension * l && e2 == 2.0 * e
    });
    outcome(
        t_rel < 0.01 && flux_rel < 1e-6 && boundary && linear,
        format!(
            "T/2pi v^2 - 1 = {t_rel:.2e}, flux rel err {flux_rel:.2e}, f(0)=a(0)=0: {boundary}, E(L) = T L: {linear}"
        ),
    )
}

fn screening_dichotomy() -> Outcome {
    let q = 0.7;
    let mut decay = true;
    let mut parts = Vec::new();
    for mu in [0.5, 1.0, 2.0] {
        let cfg = PhysicalConfig::new(q, 0.0, mu).unwrap();
        // exponential: Q(R) e^{μR}/(1 + μR) stays q while Q itself vanishes
        for r in [1.0, 5.0, 20.0, 40.0] {
            let qr = local_charge(&cfg, r).unwrap();
            decay &= ((qr * (mu * r).exp() / (1.0 + mu * r)) / q - 1.0).abs() < 1e-12;
        }
        let far = local_charge(&cfg, 40.0 / mu).unwrap();
        decay &= far.abs() < 1e-15;
        parts.push(format!("Q(40/mu)|mu={mu} = {far:.1e}"));
    }
    let g = 0.37;
    let loop_phase = |p: &dyn dirac_lab::fields::VectorPotential<f64>| {
        refined_holonomy(p, |n| LoopPath::horizontal_circle(Vec3::new(0.3, -0.2, 0.0), 100.0, n), 64, 3, q)
            .unwrap()
            .phase
    };
    let massless = loop_phase(&TubeSpec::new(g, 1.0, 0.0).unwrap());
    let mut worst: f64 = 0.0;
    for mu in [0.5, 1.0, 2.0, 5.0] {
        worst = worst.max((loop_phase(&ProcaTube { g, mu }) - massless).norm());
    }
    let want = Complex::from_polar(1.0, q * 4.0 * PI * g);
    worst = worst.max((massless - want).norm());
    outcome(decay && worst < 1e-8, format!("{}; holonomy phase spread over mu {worst:.1e}", parts.join(", ")))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {id} ({name}) [{:.1}s]: {}", start.elapsed().as_secs_f64(), o.detail);
        failures += usize::from(!o.pass);
    };
    report(1, "quantization equivalence", &quantization_equivalence);
    report(2, "massless angular momentum", &massless_angular_momentum);
    report(3, "massive-photon decline", &massive_decline);
    report(4, "flux conservation with mass", &flux_conservation);
    report(5, "Wu-Yang patch consistency", &wu_yang_consistency);

    let setup = DoubleSlit::default();
    let grid = setup.grid().expect("default double slit is valid");
    let free = propagate_free(&grid, setup.steps).expect("free run");
    let lattice = Lattice { setup, grid, free };
    report(6, "string invisibility by simulation", &|| string_invisibility_by_simulation(&lattice));
    report(7, "fringe-shift law", &|| fringe_shift_law(&lattice));

    report(8, "vortex suite", &vortex_suite);
    report(9, "screening dichotomy", &screening_dichotomy);
    println!("{} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
