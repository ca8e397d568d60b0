use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use sbs::classical::{kalbfleisch_prentice, kaplan_meier, nelson_aalen};
use sbs::error::{Error, Result};
use sbs::grid::TimeGrid;
use sbs::io::{ingest, AnalysisConfig};
use sbs::posterior::{posterior_update_counts, predictive_distribution, CountStatistics};
use sbs::process::{sample_sbs, SbsParameters};
use sbs::regression::predictive::pointwise_bands;
use sbs::regression::{
    predictive_for_profile, prior_concentration_curve, rwmh_sample, LikelihoodKind, RegressionData,
    RegressionModel, ShapeMode,
};
use sbs::sim::{run_simulation_study, Arm};
use sbs::urn::UrnSystem;

const DEFAULT_OUT: &str = "sbs-output";

fn out_dir(config: &AnalysisConfig) -> Result<PathBuf> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row.iter().map(|s| s.as_ref()))?;
    }
    writer.flush()?;
    Ok(())
}

fn write_summary(dir: &Path, command: &str, config: &AnalysisConfig, body: Value) -> Result<()> {
    let mut summary = json!({
        "command": command,
        "seed": config.seed,
        "config": config,
    });
    if let (Value::Object(target), Value::Object(extra)) = (&mut summary, body) {
        target.extend(extra);
    }
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("summary.json"), text + "\n")?;
    Ok(())
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn fit_nonparametric(data_path: &Path, config: AnalysisConfig) -> Result<()> {
    let k = config.k;
    let (data, grid) = ingest(data_path, k, &config.grid, Some(&[]))?;
    let stats = CountStatistics::from_data(&data.observations, grid.horizon(), k)?;
    let prior = SbsParameters::constant(grid.clone(), k, config.nonparametric.alpha)?;
    let posterior = posterior_update_counts(&prior, &stats)?;
    let predictive = predictive_distribution(&posterior);

    let draws = config.nonparametric.band_draws.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let curves = (0..draws)
        .map(|_| sample_sbs(&posterior, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let (lower, upper) = pointwise_bands(&curves);

    let km = kaplan_meier(&stats);
    let kp = kalbfleisch_prentice(&stats);
    let hazards: Vec<Vec<Option<f64>>> = (1..=k).map(|c| nelson_aalen(&stats, c)).collect();
    let mut rows = Vec::new();
    for t in 1..=grid.horizon() {
        for c in 1..=k {
            rows.push(vec![
                t.to_string(),
                grid.edge(t).to_string(),
                c.to_string(),
                stats.risk_set(t).to_string(),
                stats.count(t, c).to_string(),
                cell(km[t - 1]),
                cell(hazards[c - 1][t - 1]),
                cell(kp.cumulative(t, c)),
                predictive.cumulative(t, c).to_string(),
                lower[(t - 1) * k + c - 1].to_string(),
                upper[(t - 1) * k + c - 1].to_string(),
            ]);
        }
    }
    let dir = out_dir(&config)?;
    write_csv(
        &dir.join("estimates.csv"),
        &[
            "t",
            "edge",
            "cause",
            "at_risk",
            "events",
            "kaplan_meier",
            "nelson_aalen",
            "kalbfleisch_prentice",
            "predictive",
            "lower",
            "upper",
        ],
        &rows,
    )?;

    let mut header = vec!["t".to_string(), "edge".to_string()];
    header.extend((0..=k).map(|d| format!("alpha_{d}")));
    let alpha_rows: Vec<Vec<String>> = (1..=grid.horizon())
        .map(|t| {
            let mut row = vec![t.to_string(), grid.edge(t).to_string()];
            row.extend(posterior.row(t).iter().map(f64::to_string));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&dir.join("posterior_alpha.csv"), &header, &alpha_rows)?;

    let events: Vec<u64> = (0..=k)
        .map(|d| (1..=grid.horizon()).map(|t| stats.count(t, d)).sum())
        .collect();
    write_summary(
        &dir,
        "fit-nonparametric",
        &config,
        json!({
            "n": data.len(),
            "horizon": grid.horizon(),
            "counts_by_status": events,
            "band_draws": draws,
        }),
    )
}

#[derive(Serialize)]
struct CoordinateSummary {
    name: String,
    mode: f64,
    mean: f64,
    sd: f64,
    geweke_z: Option<f64>,
}

pub fn fit_regression(data_path: &Path, config: AnalysisConfig) -> Result<()> {
    let (dataset, grid) = ingest(data_path, config.k, &config.grid, config.covariates.as_deref())?;
    let data = RegressionData::new(config.k, grid.clone(), &dataset.observations, &dataset.covariates)?;
    let likelihood = if config.parametric {
        LikelihoodKind::Parametric
    } else {
        LikelihoodKind::Nonparametric { m: config.m }
    };
    let model = RegressionModel::new(data, config.model, likelihood, config.prior, ShapeMode::Free)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let chain = rwmh_sample(&model, &config.mcmc, &mut rng)?;
    if chain.is_empty() {
        return Err(Error::ChainTooShort { len: 0, min: 1 });
    }

    let names = chain.names();
    let natural = chain.natural_draws();
    let dir = out_dir(&config)?;
    let mut header = vec!["draw".to_string(), "log_target".to_string()];
    header.extend(names.iter().cloned());
    let rows: Vec<Vec<String>> = natural
        .iter()
        .zip(&chain.log_targets)
        .enumerate()
        .map(|(i, (x, lp))| {
            let mut row = vec![(i + 1).to_string(), lp.to_string()];
            row.extend(x.iter().map(f64::to_string));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&dir.join("chain.csv"), &header, &rows)?;

    let profiles = match &config.profiles {
        Some(p) => p.clone(),
        None => model.data().profiles().to_vec(),
    };
    let mut curve_rows = Vec::new();
    for (j, w) in profiles.iter().enumerate() {
        let bands = predictive_for_profile(&model, &chain.draws, w, &mut rng)?;
        let label = w.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        for t in 1..=grid.horizon() {
            for c in 1..=config.k {
                curve_rows.push(vec![
                    (j + 1).to_string(),
                    label.clone(),
                    t.to_string(),
                    grid.edge(t).to_string(),
                    c.to_string(),
                    bands.mean.cumulative(t, c).to_string(),
                    bands.lower(t, c).to_string(),
                    bands.upper(t, c).to_string(),
                ]);
            }
        }
    }
    write_csv(
        &dir.join("predictive.csv"),
        &["profile", "covariates", "t", "edge", "cause", "mean", "lower", "upper"],
        &curve_rows,
    )?;

    let n = natural.len() as f64;
    let mode = chain.layout.natural(&chain.mode);
    let coordinates: Vec<CoordinateSummary> = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mean = natural.iter().map(|x| x[i]).sum::<f64>() / n;
            let var = natural.iter().map(|x| (x[i] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            CoordinateSummary {
                name: name.clone(),
                mode: mode[i],
                mean,
                sd: var.sqrt(),
                geweke_z: chain.geweke[i],
            }
        })
        .collect();
    write_summary(
        &dir,
        "fit-regression",
        &config,
        json!({
            "n": model.data().len(),
            "horizon": grid.horizon(),
            "covariates": dataset.covariate_names,
            "profiles": profiles,
            "draws": chain.len(),
            "acceptance_rate": chain.acceptance_rate,
            "diagonal_fallback": chain.diagonal_fallback,
            "coordinates": coordinates,
        }),
    )
}

pub fn simulate(config: AnalysisConfig) -> Result<()> {
    let sim = &config.simulation;
    let result = run_simulation_study(sim)?;
    let dir = out_dir(&config)?;
    let rows: Vec<Vec<String>> = result
        .records
        .iter()
        .map(|r| {
            vec![
                r.model.to_string(),
                cell(r.m),
                r.n.to_string(),
                (r.replicate + 1).to_string(),
                r.cause.to_string(),
                r.ks_distance.to_string(),
            ]
        })
        .collect();
    write_csv(&dir.join("distances.csv"), &["model", "m", "n", "replicate", "cause", "ks_distance"], &rows)?;

    let arms: Vec<Arm> = std::iter::once(Arm::Parametric)
        .chain(sim.masses.iter().map(|&m| Arm::Sbs { m }))
        .collect();
    let mut medians = Vec::new();
    for &n in &sim.sample_sizes {
        for &arm in &arms {
            for cause in 1..=2 {
                medians.push(json!({
                    "model": arm.name(),
                    "m": arm.mass(),
                    "n": n,
                    "cause": cause,
                    "median_ks": result.median(arm, n, cause),
                }));
            }
        }
    }
    write_summary(
        &dir,
        "simulate",
        &config,
        json!({ "medians": medians, "failures": result.failures }),
    )
}

pub fn urn_demo(config: AnalysisConfig) -> Result<()> {
    let settings = &config.urn;
    let k = config.k;
    if settings.bins == 0 {
        return Err(Error::Config("urn demo needs at least one bin".into()));
    }
    let rows: Vec<Vec<f64>> = (1..=settings.bins)
        .map(|t| {
            let mut row = vec![settings.alpha; k + 1];
            if t == settings.bins {
                row[0] = 0.0;
            }
            row
        })
        .collect();
    let params = SbsParameters::from_rows(TimeGrid::unit(settings.bins)?, &rows)?;
    let mut urn = UrnSystem::new(params, config.m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = Vec::new();
    let blocks = (0..settings.blocks)
        .map(|_| urn.draw_block_traced(&mut rng, &mut trace))
        .collect::<Result<Vec<_>>>()?;

    let dir = out_dir(&config)?;
    let block_rows: Vec<Vec<String>> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| vec![(i + 1).to_string(), b.time.to_string(), b.cause.to_string()])
        .collect();
    write_csv(&dir.join("blocks.csv"), &["block", "time", "cause"], &block_rows)?;

    let mut header = vec!["block".to_string(), "state_time".into(), "state_cause".into(), "color".into()];
    header.extend((0..=k).map(|d| format!("urn_{d}")));
    let trace_rows: Vec<Vec<String>> = trace
        .iter()
        .map(|r| {
            let mut row = vec![
                (r.block + 1).to_string(),
                r.state.0.to_string(),
                r.state.1.to_string(),
                r.color.to_string(),
            ];
            row.extend(r.composition.iter().map(f64::to_string));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&dir.join("trace.csv"), &header, &trace_rows)?;
    write_summary(&dir, "urn-demo", &config, json!({ "blocks": blocks, "draws": trace.len() }))
}

pub fn concentration_curve(config: AnalysisConfig) -> Result<()> {
    let settings = &config.concentration;
    let grid = TimeGrid::uniform(settings.bins, settings.width)?;
    let prior = config.prior.expect("resolved configuration has a prior");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let curve = prior_concentration_curve(
        config.model,
        &prior,
        config.k,
        &settings.profile,
        &settings.masses,
        &grid,
        settings.draws,
        &mut rng,
    )?;
    let mut rows = Vec::new();
    for (i, m) in curve.m_values.iter().enumerate() {
        for t in 1..=grid.horizon() {
            for c in 1..=config.k {
                rows.push(vec![
                    m.to_string(),
                    t.to_string(),
                    grid.edge(t).to_string(),
                    c.to_string(),
                    curve.sigma(i, t, c).to_string(),
                    curve.standard_error(i, t, c).to_string(),
                ]);
            }
        }
    }
    for t in 1..=grid.horizon() {
        for c in 1..=config.k {
            rows.push(vec![
                "inf".to_string(),
                t.to_string(),
                grid.edge(t).to_string(),
                c.to_string(),
                curve.limit(t, c).to_string(),
                curve.limit_standard_error(t, c).to_string(),
            ]);
        }
    }
    let dir = out_dir(&config)?;
    write_csv(
        &dir.join("concentration.csv"),
        &["m", "t", "edge", "cause", "sigma", "standard_error"],
        &rows,
    )?;
    write_summary(&dir, "concentration-curve", &config, json!({ "draws": curve.draws }))
}
