use std::fs;
use std::path::{Path, PathBuf};

use gfbbm::evolution::{run_experiment, ExperimentSettings, PerturbationSpec};
use gfbbm::io::{self, fmt_f64};
use gfbbm::solitary::{pohozaev_ratio, solve_petviashvili, PetviashviliSettings, SolitaryWave};
use gfbbm::stability::{self, classify as classify_point, Verdict, DENSE_CAP};
use gfbbm::sweep::{lattice, map_points};
use gfbbm::{Error, GroundStateMap, ModelParams, Result, SpectralGrid};
use serde::{Deserialize, Serialize};

use crate::config::{require, Settings};

fn out_dir(s: &Settings) -> Result<PathBuf> {
    let dir = s.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn model(s: &Settings) -> Result<ModelParams> {
    ModelParams::new(
        require(s.alpha, "alpha")?,
        require(s.p, "p")?,
        require(s.c, "c")?,
    )
}

fn grid_for(params: &ModelParams, s: &Settings) -> Result<SpectralGrid> {
    let mut half_length = require(s.half_length, "half_length")?;
    if s.scaled_domain.unwrap_or(false) {
        half_length /= GroundStateMap::new(params)?.length_factor;
    }
    SpectralGrid::new(half_length, require(s.n_points, "n_points")?)
}

fn solver(s: &Settings) -> Result<PetviashviliSettings> {
    let out = PetviashviliSettings {
        tolerance: require(s.tolerance, "tolerance")?,
        max_iterations: require(s.max_iterations, "max_iterations")?,
        ..PetviashviliSettings::default()
    };
    if !(out.tolerance > 0.0) || out.max_iterations == 0 {
        return Err(Error::Config(
            "tolerance must be positive and max_iterations at least 1".into(),
        ));
    }
    Ok(out)
}

/// Validates everything, then solves.
fn solve_wave(s: &Settings) -> Result<SolitaryWave> {
    let params = model(s)?;
    params.require_wave()?;
    let grid = grid_for(&params, s)?;
    solve_petviashvili(&params, &grid, &solver(s)?)
}

/// Resolved settings of the run; kept apart from the data files.
fn write_run_sidecar(dir: &Path, command: &str, s: &Settings) -> Result<()> {
    #[derive(Serialize)]
    struct Run<'a> {
        command: &'a str,
        version: &'a str,
        settings: &'a Settings,
    }
    io::write_json(
        &dir.join(format!("{command}.run.json")),
        &Run {
            command,
            version: env!("CARGO_PKG_VERSION"),
            settings: s,
        },
    )
}

pub fn solve(s: &Settings) -> Result<()> {
    let wave = solve_wave(s)?;
    let dir = out_dir(s)?;
    io::write_profile(&dir.join("profile.csv"), &dir.join("profile.json"), &wave)?;
    write_run_sidecar(&dir, "solve", s)?;
    println!("residual {}", fmt_f64(wave.residual));
    println!("iterations {}", wave.iterations);
    println!("peak {}", fmt_f64(wave.peak()));
    for w in &wave.warnings {
        println!("warning {w}");
    }
    Ok(())
}

fn range(
    s: &Settings,
    point: Option<f64>,
    lo: Option<f64>,
    hi: Option<f64>,
    name: &str,
) -> Result<Vec<f64>> {
    let step = require(s.resolution, "resolution")?;
    if !(step > 0.0) {
        return Err(Error::Config(format!("resolution {step} must be positive")));
    }
    let (lo, hi) = match point {
        Some(v) => (v, v),
        None => (
            require(lo, &format!("{name}_min"))?,
            require(hi, &format!("{name}_max"))?,
        ),
    };
    let values = lattice(lo, hi, step);
    if values.is_empty() {
        return Err(Error::Config(format!(
            "empty {name} range [{lo}, {hi}] at resolution {step}"
        )));
    }
    Ok(values)
}

fn ranges(s: &Settings) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((
        range(s, s.alpha, s.alpha_min, s.alpha_max, "alpha")?,
        range(s, s.c, s.c_min, s.c_max, "c")?,
    ))
}

pub fn classify(s: &Settings) -> Result<()> {
    let p = require(s.p, "p")?;
    let (alphas, speeds) = ranges(s)?;
    let cells = stability::region_map(p, &alphas, &speeds)?;
    let dir = out_dir(s)?;
    io::write_region_map(&dir.join("region_map.csv"), &cells)?;
    write_run_sidecar(&dir, "classify", s)?;
    if let [cell] = cells.as_slice() {
        println!("{}", cell.verdict);
    } else {
        println!(
            "{} points written to {}",
            cells.len(),
            dir.join("region_map.csv").display()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct EvolveSummary {
    params: ModelParams,
    gamma: f64,
    dt: f64,
    t_final: f64,
    half_length: f64,
    n_points: usize,
    samples: usize,
    momentum_drift: f64,
    mass_drift: f64,
    energy_drift: f64,
    max_orbital_distance: f64,
}

pub fn evolve(s: &Settings) -> Result<()> {
    let wave = match &s.profile {
        Some(csv) => io::read_profile(csv, &csv.with_extension("json"))?,
        None => solve_wave(s)?,
    };
    let spec = PerturbationSpec::new(require(s.gamma, "gamma")?, wave)?;
    let t_final = require(s.t_final, "t_final")?;
    let settings = ExperimentSettings {
        dt: require(s.dt, "dt")?,
        t_final,
        sample_interval: require(s.sample_interval, "sample_interval")?,
        keep_snapshots: s.snapshots.unwrap_or(false),
    };
    let trace = run_experiment(&spec, &settings)?;
    let dir = out_dir(s)?;
    io::write_trace(&dir.join("trace.csv"), &trace)?;
    if settings.keep_snapshots {
        io::write_snapshot_file(
            &dir.join("snapshots.bin"),
            spec.base_wave.grid.len(),
            &trace.snapshots,
        )?;
    }
    let summary = EvolveSummary {
        params: trace.params,
        gamma: trace.gamma,
        dt: trace.dt,
        t_final,
        half_length: spec.base_wave.grid.half_length(),
        n_points: spec.base_wave.grid.len(),
        samples: trace.samples.len(),
        momentum_drift: trace.momentum_drift(),
        mass_drift: trace.mass_drift(),
        energy_drift: trace.energy_drift(),
        max_orbital_distance: trace
            .samples
            .iter()
            .fold(0.0f64, |m, x| m.max(x.orbital_distance)),
    };
    io::write_json(&dir.join("trace.json"), &summary)?;
    write_run_sidecar(&dir, "evolve", s)?;
    println!(
        "momentum drift |F(t)-F(0)| {}",
        fmt_f64(summary.momentum_drift)
    );
    println!("mass drift |I(t)-I(0)| {}", fmt_f64(summary.mass_drift));
    println!(
        "max orbital distance {}",
        fmt_f64(summary.max_orbital_distance)
    );
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSummary {
    report: stability::StabilityReport,
    analytic_verdict: Verdict,
    verdict_agreement: bool,
    n_zero: usize,
    spectral_radius: f64,
    lowest_eigenvalues: Vec<f64>,
    max_growth_rate: Option<f64>,
}

pub fn spectrum(s: &Settings) -> Result<()> {
    let params = model(s)?;
    params.require_wave()?;
    let grid = grid_for(&params, s)?;
    if grid.len() > DENSE_CAP {
        return Err(Error::Resource {
            n: grid.len(),
            cap: DENSE_CAP,
        });
    }
    let settings = solver(s)?;
    let wave = solve_petviashvili(&params, &grid, &settings)?;
    let (report, counts) =
        stability::analyze_with_spectrum(&wave, &settings, require(s.dc, "dc")?)?;
    let max_growth_rate = if s.growing_modes.unwrap_or(false) {
        Some(stability::growing_modes(&wave)?.max_real_part)
    } else {
        None
    };
    let analytic = classify_point(&params).verdict;
    let summary = SpectrumSummary {
        verdict_agreement: analytic == report.verdict,
        analytic_verdict: analytic,
        n_zero: counts.n_zero,
        spectral_radius: counts.spectral_radius,
        lowest_eigenvalues: counts.eigenvalues.iter().take(8).copied().collect(),
        max_growth_rate,
        report,
    };
    let dir = out_dir(s)?;
    io::write_json(&dir.join("spectrum.json"), &summary)?;
    write_run_sidecar(&dir, "spectrum", s)?;
    let r = &summary.report;
    println!(
        "n_negative {} n_I {} index {} verdict {} analytic {} agreement {}",
        r.n_negative, r.n_i, r.index, r.verdict, analytic, summary.verdict_agreement
    );
    Ok(())
}

/// One row of the sweep table. Failed points keep their error class and
/// leave the wave columns empty (written as NaN in the CSV).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub p: u32,
    pub c: f64,
    pub status: String,
    pub residual: Option<f64>,
    pub iterations: usize,
    pub peak: Option<f64>,
    pub momentum: Option<f64>,
    pub pohozaev_ratio: Option<f64>,
    pub pohozaev_predicted: Option<f64>,
    pub k_derivative_sign: i8,
    pub verdict: Verdict,
}

const SWEEP_COLUMNS: [&str; 12] = [
    "alpha",
    "p",
    "c",
    "status",
    "residual",
    "iterations",
    "peak",
    "momentum",
    "pohozaev_ratio",
    "pohozaev_predicted",
    "k_derivative_sign",
    "verdict",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), fmt_f64)
}

fn sweep_point(alpha: f64, c: f64, s: &Settings) -> Result<SweepRecord> {
    let p = require(s.p, "p")?;
    let params = ModelParams::new(alpha, p, c)?;
    let analytic = classify_point(&params);
    let mut record = SweepRecord {
        alpha,
        p,
        c,
        status: "ok".into(),
        residual: None,
        iterations: 0,
        peak: None,
        momentum: None,
        pohozaev_ratio: None,
        pohozaev_predicted: None,
        k_derivative_sign: analytic.k_derivative_sign,
        verdict: analytic.verdict,
    };
    let solved = params
        .require_wave()
        .and_then(|_| grid_for(&params, s))
        .and_then(|g| solve_petviashvili(&params, &g, &solver(s)?));
    match solved {
        Ok(w) => {
            let (measured, predicted) = pohozaev_ratio(&w)?;
            record.residual = Some(w.residual);
            record.iterations = w.iterations;
            record.peak = Some(w.peak());
            record.momentum = Some(w.momentum()?);
            record.pohozaev_ratio = Some(measured);
            record.pohozaev_predicted = Some(predicted);
        }
        Err(e) => record.status = e.class().into(),
    }
    Ok(record)
}

pub fn sweep(s: &Settings) -> Result<()> {
    let (alphas, speeds) = ranges(s)?;
    let dir = out_dir(s)?;
    let points_dir = dir.join("points");
    fs::create_dir_all(&points_dir)?;
    let lattice: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| speeds.iter().map(move |&c| (a, c)))
        .collect();
    // Each point is written on its own, then the files are merged.
    let files = map_points(&lattice, |&(alpha, c)| -> Result<PathBuf> {
        let record = sweep_point(alpha, c, s)?;
        let path = points_dir.join(format!("alpha_{alpha:.6}_c_{c:.6}.json"));
        io::write_json(&path, &record)?;
        Ok(path)
    });
    let mut records = files
        .into_iter()
        .map(|f| f.and_then(|path| io::read_json::<SweepRecord>(&path)))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.c.total_cmp(&b.c)));
    let rows = records.iter().map(|r| {
        vec![
            fmt_f64(r.alpha),
            r.p.to_string(),
            fmt_f64(r.c),
            r.status.clone(),
            opt(r.residual),
            r.iterations.to_string(),
            opt(r.peak),
            opt(r.momentum),
            opt(r.pohozaev_ratio),
            opt(r.pohozaev_predicted),
            r.k_derivative_sign.to_string(),
            r.verdict.label().to_string(),
        ]
    });
    let table = dir.join("sweep.csv");
    io::write_table(fs::File::create(&table)?, &SWEEP_COLUMNS, rows)?;
    write_run_sidecar(&dir, "sweep", s)?;
    let solved = records.iter().filter(|r| r.status == "ok").count();
    println!(
        "{} points ({} solved) written to {}",
        records.len(),
        solved,
        table.display()
    );
    Ok(())
}
