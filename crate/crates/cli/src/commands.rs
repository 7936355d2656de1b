//! Subcommand implementations. Each reads its inputs, delegates to the
//! library, and writes one text file that starts with the run configuration.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use coda_core::density::{default_bandwidth, spread_kde, CompositionalKde, GofTest, NullModel, SmoothingKernel};
use coda_core::expfam::{fit_mle, parse_theta_file, sample, write_model, ExpFamilyModel};
use coda_core::representer::{fit_interpolant, fit_ridge, min_independent_degree, FitReport};
use coda_core::{inflate, spread_out, Composition, RngStream, SpherePoint};

use crate::ingest::{ingest, Dataset};
use crate::output::{fmt_f64, lattice, write_file, RunConfig, Table};
use crate::{CommonArgs, Command, DataArgs, FitArgs, KernelName, ModelArgs, RenormArgs, SmoothingArgs};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate { data, common } => validate(&data, &common),
        Command::Spread { data, common } => spread(&data, &common),
        Command::Kde { data, smoothing, grid, common } => kde(&data, &smoothing, grid, &common),
        Command::Gof { data, smoothing, null, n_sim, n_mc, reference_size, common } => {
            gof(&data, &smoothing, &null, n_sim, n_mc, reference_size, &common)
        }
        Command::Interp { data, fit, common } => regression(&data, &fit, None, &common),
        Command::Ridge { data, fit, mu, common } => regression(&data, &fit, Some(mu), &common),
        Command::ExpfamEval { model, input, renorm, grid, common } => {
            expfam_eval(&model, input.as_deref(), &renorm, grid, &common)
        }
        Command::ExpfamSample { model, n, common } => expfam_sample(&model, n, &common),
        Command::ExpfamFit { data, m, n_mc, max_iter, tol, common } => {
            expfam_fit(&data, m, n_mc, max_iter, tol, &common)
        }
        Command::Grid { resolution, theta, n_mc, input, renorm, smoothing, common } => {
            grid(resolution, theta.as_deref(), n_mc, input.as_deref(), &renorm, &smoothing, &common)
        }
    }
}

/// Configures the worker pool and starts the run configuration.
fn start(command: &str, common: &CommonArgs) -> Result<RunConfig> {
    if let Some(n) = common.threads {
        ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot start worker pool")?;
    }
    let mut config = RunConfig::new(command);
    config.set("seed", common.seed);
    Ok(config)
}

fn load(data: &DataArgs, with_response: bool, config: &mut RunConfig) -> Result<Dataset> {
    load_path(&data.input, &data.renorm, with_response, config)
}

fn load_path(path: &Path, renorm: &RenormArgs, with_response: bool, config: &mut RunConfig) -> Result<Dataset> {
    let mode = renorm.mode();
    let ds = ingest(path, mode, with_response)?;
    config.set("renormalize", mode).set_dataset(&ds);
    Ok(ds)
}

fn composition_fields(x: &Composition) -> Vec<String> {
    x.coords().iter().map(|v| fmt_f64(*v)).collect()
}

fn validate(data: &DataArgs, common: &CommonArgs) -> Result<()> {
    let mut config = start("validate", common)?;
    let ds = load(data, false, &mut config)?;
    let mut table = Table::new(&config, &ds.labels);
    for x in &ds.rows {
        table.row(&composition_fields(x));
    }
    write_file(&common.output, &table.into_string())
}

fn spread(data: &DataArgs, common: &CommonArgs) -> Result<()> {
    let mut config = start("spread", common)?;
    let ds = load(data, false, &mut config)?;
    let mut columns = vec!["row".to_string()];
    columns.extend(ds.labels.iter().cloned());
    columns.push("multiplicity".into());
    let mut table = Table::new(&config, &columns);
    for (i, x) in ds.rows.iter().enumerate() {
        let orbit = spread_out(x);
        for p in &orbit.distinct_points {
            let mut fields = vec![(i + 1).to_string()];
            fields.extend(p.coords().iter().map(|v| fmt_f64(*v)));
            fields.push(orbit.multiplicity().to_string());
            table.row(&fields);
        }
    }
    write_file(&common.output, &table.into_string())
}

fn smoothing_kernel(name: KernelName) -> SmoothingKernel {
    match name {
        KernelName::Exponential => SmoothingKernel::exponential(),
        KernelName::Compact => SmoothingKernel::compact(),
        KernelName::Indicator => SmoothingKernel::indicator(),
    }
}

/// Kernel and bandwidth for `n` points in dimension `d`, recorded in `config`.
fn smoothing(args: &SmoothingArgs, n: usize, d: usize, config: &mut RunConfig) -> Result<(SmoothingKernel, f64)> {
    let kernel = smoothing_kernel(args.kernel);
    let h = args.h.unwrap_or_else(|| default_bandwidth(n, d));
    ensure!(h > 0.0 && h.is_finite(), "bandwidth must be positive and finite, got {h}");
    config.set("kernel", kernel.name()).set_f64("h", h);
    Ok((kernel, h))
}

fn build_kde(ds: &Dataset, args: &SmoothingArgs, config: &mut RunConfig) -> Result<CompositionalKde> {
    let (kernel, h) = smoothing(args, ds.rows.len(), ds.dim(), config)?;
    Ok(spread_kde(&ds.rows, kernel, h)?)
}

/// Writes the values of `eval` on the barycentric lattice of the 3-part
/// simplex, one column per name in `values`.
fn write_grid<F>(
    config: &mut RunConfig,
    resolution: usize,
    labels: &[String],
    values: &[&str],
    eval: F,
    output: &Path,
) -> Result<()>
where
    F: Fn(&Composition) -> Result<Vec<f64>>,
{
    ensure!(resolution >= 1, "grid resolution must be at least 1");
    config.set("resolution", resolution).set("density_measure", "first-orthant sphere surface");
    let mut columns: Vec<String> = ["i", "j", "k"].iter().map(|s| s.to_string()).collect();
    columns.extend(labels.iter().cloned());
    columns.extend(values.iter().map(|s| s.to_string()));
    let mut table = Table::new(config, &columns);
    let r = resolution as f64;
    for [i, j, k] in lattice(resolution) {
        let x = Composition::new(vec![i as f64 / r, j as f64 / r, k as f64 / r])?;
        let mut fields = vec![i.to_string(), j.to_string(), k.to_string()];
        fields.extend(composition_fields(&x));
        fields.extend(eval(&x)?.iter().map(|v| fmt_f64(*v)));
        table.row(&fields);
    }
    write_file(output, &table.into_string())
}

fn kde(data: &DataArgs, args: &SmoothingArgs, grid: Option<usize>, common: &CommonArgs) -> Result<()> {
    let mut config = start("kde", common)?;
    let ds = load(data, false, &mut config)?;
    let est = build_kde(&ds, args, &mut config)?;
    if let Some(r) = grid {
        ensure!(ds.dim() == 2, "grids need 3-part compositions, the data has {} parts", ds.dim() + 1);
        return write_grid(&mut config, r, &ds.labels, &["density"], |x| Ok(vec![est.density_at(x)?]), &common.output);
    }
    config.set("density_measure", "first-orthant sphere surface");
    let mut columns = ds.labels.clone();
    columns.push("density".into());
    let mut table = Table::new(&config, &columns);
    for x in &ds.rows {
        let mut fields = composition_fields(x);
        fields.push(fmt_f64(est.density_at(x)?));
        table.row(&fields);
    }
    write_file(&common.output, &table.into_string())
}

/// Reads a parameter file, estimating the log-partition when it is missing.
fn load_model(path: &Path, n_mc: usize, seed: u64, config: &mut RunConfig) -> Result<ExpFamilyModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let file = parse_theta_file(&text).with_context(|| format!("in {}", path.display()))?;
    config.set("theta", path.display());
    let model = match file.model() {
        Some(m) => m,
        None => {
            config.set("n_mc", n_mc);
            ExpFamilyModel::new(file.theta, n_mc, seed)?
        }
    };
    config
        .set("model_d", model.dim())
        .set("model_m", model.theta.degree())
        .set_f64("log_partition", model.log_partition)
        .set_f64("log_partition_se", model.log_partition_se);
    Ok(model)
}

fn gof(
    data: &DataArgs,
    args: &SmoothingArgs,
    null: &str,
    n_sim: usize,
    n_mc: usize,
    reference_size: usize,
    common: &CommonArgs,
) -> Result<()> {
    let mut config = start("gof", common)?;
    let ds = load(data, false, &mut config)?;
    let d = ds.dim();
    let (kernel, h) = smoothing(args, ds.rows.len(), d, &mut config)?;
    config.set("null", null).set("n_sim", n_sim);
    let null_model = if null == "uniform" {
        NullModel::Uniform
    } else {
        let model = load_model(Path::new(null), n_mc, common.seed, &mut config)?;
        ensure!(model.dim() == d, "null model has {} parts, the data has {}", model.dim() + 1, d + 1);
        config.set("reference_size", reference_size);
        NullModel::ExpFamily(model)
    };
    let stream = RngStream::new(common.seed, 0);
    let test = GofTest::with_reference_size(null_model, kernel, d, h, reference_size, stream)?;
    let points: Vec<SpherePoint> = ds.rows.iter().map(inflate).collect();
    let res = test.run(&points, n_sim, stream)?;
    let mut text = config.header();
    for (k, v) in [
        ("statistic", fmt_f64(res.statistic)),
        ("p_value", fmt_f64(res.p_value)),
        ("n_sim", res.n_sim.to_string()),
        ("z_score", fmt_f64(res.z_score)),
        ("null_mean", fmt_f64(res.null_mean)),
        ("null_sd", fmt_f64(res.null_sd)),
    ] {
        text.push_str(&format!("{k}={v}\n"));
    }
    write_file(&common.output, &text)
}

fn regression(data: &DataArgs, fit: &FitArgs, mu: Option<f64>, common: &CommonArgs) -> Result<()> {
    let mut config = start(if mu.is_some() { "ridge" } else { "interp" }, common)?;
    let ds = load(data, true, &mut config)?;
    let y = ds.responses.as_deref().expect("responses were requested");
    let points: Vec<SpherePoint> = ds.rows.iter().map(inflate).collect();
    let m = match fit.m {
        Some(m) => m,
        None => {
            config.set("m_max", fit.m_max);
            min_independent_degree(&points, fit.m_max)?
        }
    };
    config.set("m", m);
    let report: FitReport = match mu {
        Some(mu) => {
            config.set_f64("mu", mu);
            fit_ridge(&points, y, m, mu)?
        }
        None => fit_interpolant(&points, y, m)?,
    };
    let max_res = report.residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    config
        .set("degree_used", report.degree_used)
        .set_f64("gram_min_eigenvalue", report.gram_min_eigenvalue)
        .set_f64("max_abs_residual", max_res);

    let e = &report.expansion;
    let mut text = config.header();
    text.push_str(&format!("d {}\nm {}\nn {}\n", e.dim(), e.degree(), e.centers().len()));
    for (c, a) in e.centers().iter().zip(e.coefficients()) {
        let mut fields: Vec<String> = c.coords().iter().map(|v| fmt_f64(*v)).collect();
        fields.push(fmt_f64(*a));
        text.push_str(&fields.join(" "));
        text.push('\n');
    }
    write_file(&common.output, &text)?;

    if let Some(path) = &fit.report {
        let mut text = config.header();
        text.push_str(&format!("degree_used={}\n", report.degree_used));
        text.push_str(&format!("gram_min_eigenvalue={}\n", fmt_f64(report.gram_min_eigenvalue)));
        text.push_str(&format!("max_abs_residual={}\n", fmt_f64(max_res)));
        for (i, r) in report.residuals.iter().enumerate() {
            text.push_str(&format!("residual_{}={}\n", i + 1, fmt_f64(*r)));
        }
        write_file(path, &text)?;
    }
    Ok(())
}

fn expfam_eval(
    args: &ModelArgs,
    input: Option<&Path>,
    renorm: &RenormArgs,
    grid: Option<usize>,
    common: &CommonArgs,
) -> Result<()> {
    let mut config = start("expfam-eval", common)?;
    let model = load_model(&args.theta, args.n_mc, common.seed, &mut config)?;
    let eval = |x: &Composition| -> Result<Vec<f64>> {
        let z = inflate(x);
        Ok(vec![model.log_density(&z)?, model.density(&z)?])
    };
    if let Some(r) = grid {
        ensure!(model.dim() == 2, "grids need 3-part compositions, the model has {} parts", model.dim() + 1);
        let labels: Vec<String> = ["x1", "x2", "x3"].iter().map(|s| s.to_string()).collect();
        return write_grid(&mut config, r, &labels, &["log_density", "density"], eval, &common.output);
    }
    let Some(path) = input else { bail!("give --input or --grid") };
    let ds = load_path(path, renorm, false, &mut config)?;
    ensure!(ds.dim() == model.dim(), "model has {} parts, the data has {}", model.dim() + 1, ds.dim() + 1);
    config.set("density_measure", "first-orthant sphere surface");
    let mut columns = ds.labels.clone();
    columns.extend(["log_density".to_string(), "density".to_string()]);
    let mut table = Table::new(&config, &columns);
    for x in &ds.rows {
        let mut fields = composition_fields(x);
        fields.extend(eval(x)?.iter().map(|v| fmt_f64(*v)));
        table.row(&fields);
    }
    write_file(&common.output, &table.into_string())
}

fn expfam_sample(args: &ModelArgs, n: usize, common: &CommonArgs) -> Result<()> {
    let mut config = start("expfam-sample", common)?;
    let model = load_model(&args.theta, args.n_mc, common.seed, &mut config)?;
    config.set("n", n).set_f64("acceptance_rate", model.acceptance_rate()?);
    let draws = sample(&model, n, common.seed)?;
    let labels: Vec<String> = (1..=model.dim() + 1).map(|k| format!("x{k}")).collect();
    let mut table = Table::new(&config, &labels);
    for x in &draws {
        table.row(&composition_fields(x));
    }
    write_file(&common.output, &table.into_string())
}

fn expfam_fit(data: &DataArgs, m: usize, n_mc: usize, max_iter: usize, tol: f64, common: &CommonArgs) -> Result<()> {
    let mut config = start("expfam-fit", common)?;
    let ds = load(data, false, &mut config)?;
    config.set("m", m).set("n_mc", n_mc).set("max_iter", max_iter).set_f64("tol", tol);
    let fit = fit_mle(&ds.rows, m, n_mc, common.seed, max_iter, tol)?;
    if fit.gradient_norm >= tol {
        eprintln!(
            "warning: fit stopped after {} iterations with gradient norm {:e}",
            fit.iterations, fit.gradient_norm
        );
    }
    config.set("iterations", fit.iterations).set_f64("gradient_norm", fit.gradient_norm);
    write_file(&common.output, &write_model(&fit.model, &config.lines()))
}

fn grid(
    resolution: usize,
    theta: Option<&Path>,
    n_mc: usize,
    input: Option<&Path>,
    renorm: &RenormArgs,
    args: &SmoothingArgs,
    common: &CommonArgs,
) -> Result<()> {
    let mut config = start("grid", common)?;
    let labels: Vec<String> = ["x1", "x2", "x3"].iter().map(|s| s.to_string()).collect();
    match (theta, input) {
        (Some(path), None) => {
            let model = load_model(path, n_mc, common.seed, &mut config)?;
            ensure!(model.dim() == 2, "grids need 3-part compositions, the model has {} parts", model.dim() + 1);
            write_grid(&mut config, resolution, &labels, &["density"], |x| Ok(vec![model.density(&inflate(x))?]), &common.output)
        }
        (None, Some(path)) => {
            let ds = load_path(path, renorm, false, &mut config)?;
            ensure!(ds.dim() == 2, "grids need 3-part compositions, the data has {} parts", ds.dim() + 1);
            let est = build_kde(&ds, args, &mut config)?;
            write_grid(&mut config, resolution, &ds.labels, &["density"], |x| Ok(vec![est.density_at(x)?]), &common.output)
        }
        _ => bail!("give exactly one of --theta and --input"),
    }
}
