use std::f64::consts::PI;

use dirac_lab::ab_interference::{
    fringe_displacement, invisibility_metric, propagate_free, propagate_with_flux, two_path_fringe_shift,
};
use dirac_lab::angmom::angular_momentum_sweep;
use dirac_lab::fields::{
    local_charge, monopole_field, proca_tube_flux, sphere_flux, uniform_tube_flux, yukawa_electric_field,
    Patch, ProcaTube, WuYang,
};
use dirac_lab::gauge::{
    check_quantization, refined_holonomy, string_invisibility, transition_function, LoopPath,
};
use dirac_lab::vortex::{confinement_energy, solve_vortex_with};
use dirac_lab::{HiggsModel, LabError, PhysicalConfig, TubeSpec, Vec3, VortexSolution, WaveGrid};
use serde_json::json;

use crate::config::{
    AbsimConfig, AngmomConfig, CheckConfig, ConfineConfig, FieldsConfig, HolonomyConfig, VortexConfig,
};
use crate::output::{Run, Sink};
use crate::CliError;

pub fn check(cfg: &CheckConfig, sink: &mut Sink, run: &mut Run) -> Result<u8, CliError> {
    let (Some(q), Some(g)) = (cfg.q, cfg.g) else {
        return Err(CliError::Usage("check needs --q and --g (or q and g in the config)".into()));
    };
    let report = run.stage("quantization", || check_quantization(q, g, cfg.tol))?;
    let invisible = string_invisibility(q, g, cfg.tol)?;
    let out = json!({
        "q": q, "g": g, "tol": cfg.tol,
        "n_real": report.n_real, "n_nearest": report.n_nearest,
        "residual": report.residual, "satisfied": report.satisfied,
        "string_invisible": invisible,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("JSON value"));
    sink.write_json("check.json", &out)?;
    run.note("satisfied", report.satisfied);
    Ok(if report.satisfied { 0 } else { 1 })
}

pub fn fields(cfg: &FieldsConfig, sink: &mut Sink, run: &mut Run) -> Result<u8, CliError> {
    if cfg.radii.is_empty() {
        return Err(CliError::Usage("radii must not be empty".into()));
    }
    let phys = PhysicalConfig::new(cfg.q, cfg.g, cfg.mu)?;
    let mut csv = format!("# {}\nR,local_charge,electric_flux_over_4pi,magnetic_flux\n", sink.csv_header());
    run.stage("sphere fluxes", || -> Result<(), LabError> {
        for &r in &cfg.radii {
            let q_local = local_charge(&phys, r)?;
            let e = sphere_flux(|p| yukawa_electric_field(&phys, p), r, cfg.sphere_order)?;
            let b = sphere_flux(|p| monopole_field(&phys, p), r, cfg.sphere_order)?;
            csv.push_str(&format!("{r},{q_local},{},{b}\n", e / (4.0 * PI)));
        }
        Ok(())
    })?;
    sink.write("fields.csv", csv.as_bytes())?;
    let tube = TubeSpec::new(cfg.g, cfg.tube_radius, cfg.mu)?;
    let summary = json!({
        "pole_flux": 4.0 * PI * cfg.g,
        "uniform_tube_flux": uniform_tube_flux(&tube),
        "uniform_tube_field": tube.interior_field(),
        "proca_tube_flux": if cfg.mu > 0.0 { Some(proca_tube_flux(cfg.g, cfg.mu)?) } else { None },
    });
    sink.write_json("fields.json", &summary)?;
    Ok(0)
}

pub fn holonomy(cfg: &HolonomyConfig, sink: &mut Sink, run: &mut Run) -> Result<u8, CliError> {
    if cfg.thetas.is_empty() {
        return Err(CliError::Usage("thetas must not be empty".into()));
    }
    let north = WuYang { patch: Patch::North, g: cfg.g };
    let south = WuYang { patch: Patch::South, g: cfg.g };
    let mut csv = format!(
        "# {}\ntheta,flux_north,flux_south,cap_flux_exact,phase_north_re,phase_north_im,phase_south_re,phase_south_im\n",
        sink.csv_header()
    );
    run.stage("latitude loops", || -> Result<(), LabError> {
        for &theta in &cfg.thetas {
            let path = |n| LoopPath::polar_circle(cfg.radius, theta, n);
            let hn = refined_holonomy(&north, path, cfg.base_vertices, cfg.levels, cfg.q)?;
            let hs = refined_holonomy(&south, path, cfg.base_vertices, cfg.levels, cfg.q)?;
            let exact = 2.0 * PI * cfg.g * (1.0 - theta.cos());
            csv.push_str(&format!(
                "{theta},{},{},{exact},{},{},{},{}\n",
                hn.flux, hs.flux, hn.phase.re, hn.phase.im, hs.phase.re, hs.phase.im
            ));
        }
        Ok(())
    })?;
    sink.write("holonomy.csv", csv.as_bytes())?;

    let report = check_quantization(cfg.q, cfg.g, cfg.tol)?;
    let t = transition_function(cfg.q, cfg.g, 2.0 * PI);
    let tube_loop = |n| LoopPath::horizontal_circle(Vec3::zero(), cfg.tube_loop_radius, n);
    let uniform = TubeSpec::new(cfg.g, 1.0, 0.0)?;
    let (hu, hp) = run.stage("tube loops", || -> Result<_, LabError> {
        let hu = refined_holonomy(&uniform, tube_loop, cfg.base_vertices, cfg.levels, cfg.q)?;
        let hp = if cfg.mu > 0.0 {
            Some(refined_holonomy(
                &ProcaTube { g: cfg.g, mu: cfg.mu },
                tube_loop,
                cfg.base_vertices,
                cfg.levels,
                cfg.q,
            )?)
        } else {
            None
        };
        Ok((hu, hp))
    })?;
    let summary = json!({
        "quantization": report,
        "string_invisible": string_invisibility(cfg.q, cfg.g, cfg.tol)?,
        "transition_function_2pi": [t.re, t.im],
        "uniform_tube": {"flux": hu.flux, "phase": [hu.phase.re, hu.phase.im], "error": hu.error},
        "proca_tube": hp.map(|h| json!({"flux": h.flux, "phase": [h.phase.re, h.phase.im], "error": h.error})),
    });
    sink.write_json("holonomy.json", &summary)?;
    Ok(0)
}

pub fn angmom(cfg: &AngmomConfig, sink: &mut Sink, run: &mut Run) -> Result<u8, CliError> {
    if cfg.mu_list.is_empty() || cfg.d_list.is_empty() {
        return Err(CliError::Usage("mu_list and d_list must not be empty".into()));
    }
    let table = run.stage("sweep", || {
        angular_momentum_sweep(cfg.q, cfg.g, &cfg.mu_list, &cfg.d_list, &cfg.quadrature)
    })?;
    let failed: Vec<String> = table
        .cells
        .iter()
        .flatten()
        .filter(|c| !c.converged)
        .map(|c| format!("mu={},d={}", c.mu, c.d))
        .collect();
    let mut comments = vec![sink.csv_header()];
    if !failed.is_empty() {
        comments.push(format!("unconverged: {}", failed.join(" ")));
    }
    sink.write("angmom.csv", table.to_csv(&comments).as_bytes())?;
    run.note("unconverged_cells", &failed);
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} sweep cell(s) did not converge; results are flagged in angmom.csv", failed.len());
        Ok(3)
    }
}

fn detector(w: &WaveGrid) -> &[f64] {
    &w.detector.as_ref().expect("double slit grids carry a detector").intensity
}

fn snapshot_meta(w: &WaveGrid, phase: Option<f64>) -> serde_json::Value {
    json!({
        "quantity": "|psi|^2",
        "shape": [w.ny, w.nx],
        "layout": "row-major, index j*nx + i with j the y row",
        "h": w.h, "time": w.time, "steps": w.steps,
        "q_flux_phase": phase,
    })
}

pub fn absim(cfg: &AbsimConfig, sink: &mut Sink, run: &mut Run) -> Result<u8, CliError> {
    let s = &cfg.setup;
    let grid = s.grid()?;
    grid.check_stability()?;
    let free = run.stage("free run", || propagate_free(&grid, s.steps))?;
    let readout = s.readout();
    let mut runs = Vec::new();
    let mut traces = vec![detector(&free).to_vec()];
    for (k, &phase) in cfg.phases.iter().enumerate() {
        let line = s.flux_line(phase / s.q).with_cut(cfg.cut);
        let out = run.stage(&format!("flux run {k}"), || propagate_with_flux(&grid, &line, s.steps))?;
        let metric = invisibility_metric(&out, &free, &line)?;
        let measured = fringe_displacement(detector(&free), detector(&out), s.h, &readout)?;
        runs.push(json!({
            "q_flux_phase": phase,
            "invisibility_metric": metric,
            "fringe_measured": measured,
            "fringe_predicted": two_path_fringe_shift(s.q, line.flux),
        }));
        traces.push(detector(&out).to_vec());
        if cfg.snapshots {
            sink.write_snapshot(
                &format!("snapshot_run{k}.f64"),
                &out.intensity(),
                snapshot_meta(&out, Some(phase)),
            )?;
        }
    }
    if cfg.snapshots {
        sink.write_snapshot("snapshot_free.f64", &free.intensity(), snapshot_meta(&free, None))?;
    }
    let line0 = s.flux_line(0.0);
    let metrics = json!({
        "grid": [s.nx, s.ny],
        "free_vs_free_metric": invisibility_metric(&free, &free, &line0)?,
        "final_norm_free": free.norm(),
        "runs": runs,
    });
    sink.write_json("absim.json", &metrics)?;

    let mut csv = format!("# {}\n", sink.csv_header());
    csv.push_str(&format!("# detector column {}; run k has qPhi = phases[k]\n", s.detector_x));
    csv.push_str("y,free");
    for k in 0..cfg.phases.len() {
        csv.push_str(&format!(",run{k}"));
    }
    csv.push('\n');
    for j in 0..s.ny {
        csv.push_str(&format!("{}", grid.y(j)));
        for t in &traces {
            csv.push_str(&format!(",{}", t[j]));
        }
        csv.push('\n');
    }
    sink.write("absim_detector.csv", csv.as_bytes())?;
    run.note("runs", &metrics["runs"]);
    Ok(0)
}

fn model_of(cfg: &VortexConfig) -> Result<HiggsModel, LabError> {
    match cfg.lambda {
        Some(l) => HiggsModel::new(cfg.q, cfg.v, l),
        None => HiggsModel::with_beta(cfg.q, cfg.v, cfg.beta),
    }
}

fn solve(cfg: &VortexConfig, run: &mut Run) -> Result<(HiggsModel, VortexSolution), CliError> {
    let model = model_of(cfg)?;
    let r_max = cfg.r_max.unwrap_or_else(|| model.default_r_max());
    let sol = run.stage("vortex solve", || solve_vortex_with(&model, cfg.n, r_max, cfg.grid, &cfg.solver));
    match sol {
        Ok(s) => {
            run.note("iterations", s.iterations);
            run.note("residual_history", &s.residual_history);
            Ok((model, s))
        }
        Err(e) => {
            if let LabError::Convergence { history, .. } = &e {
                run.note("residual_history", history);
            }
            Err(e.into())
        }
    }
}

pub fn vortex(cfg: &VortexConfig, sink: &mut Sink, run: &mut Run) -> Result<u8, CliError> {
    let (model, sol) = solve(cfg, run)?;
    let comments =
        [sink.csv_header(), format!("q={} v={} lambda={} n={}", model.q, model.v, model.lambda, cfg.n)];
    sink.write("vortex_profile.csv", sol.profile.to_csv(&model, &comments).as_bytes())?;
    let out = json!({
        "tension": sol.tension,
        "beta": model.beta(),
        "photon_mass": model.photon_mass(),
        "higgs_mass": model.higgs_mass(),
        "iterations": sol.iterations,
        "residual_history": sol.residual_history,
    });
    sink.write_json("vortex_tension.json", &out)?;
    Ok(0)
}

pub fn confine(cfg: &ConfineConfig, sink: &mut Sink, run: &mut Run) -> Result<u8, CliError> {
    if cfg.lengths.is_empty() {
        return Err(CliError::Usage("lengths must not be empty".into()));
    }
    let (_, sol) = solve(&cfg.vortex, run)?;
    let mut csv = format!("# {}\nL,energy\n", sink.csv_header());
    for &l in &cfg.lengths {
        csv.push_str(&format!("{l},{}\n", confinement_energy(&sol.tension, l)?));
    }
    sink.write("confine.csv", csv.as_bytes())?;
    sink.write_json("confine.json", &json!({"tension": sol.tension}))?;
    Ok(0)
}
