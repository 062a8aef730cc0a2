use std::fmt;
use std::fs::{self, File};
use std::io::Write;

use qtomo_core::harness::{linspace, run_sweep_with};
use qtomo_core::{
    apply_dark_counts, measured_counts, merits, pure_state, read_records, reconstruct,
    validate_povm, write_details, write_records, Complex, OptimizerOptions, RngStream, Scheme,
    SweepConfig, SweepRecord, TomoError,
};
use serde_json::json;

use crate::args::{Metric, PlotArgs, ReconstructArgs, SweepArgs};
use crate::chart::{Chart, Series};

/// CLI failure carrying its exit code: 1 for runtime or data problems,
/// 2 for usage errors.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn complex_json(c: Complex) -> serde_json::Value {
    json!([c.re, c.im])
}

/// Prints the validation report; `Ok(false)` when any check fails.
pub fn povm_validate(scheme: Scheme) -> Result<bool, CliError> {
    let report = validate_povm(&scheme.povm());
    let out = json!({
        "scheme": report.scheme,
        "completeness_residual": report.completeness_residual,
        "min_eigenvalue": report.min_eigenvalue,
        "rank": report.rank,
        "overlap_checks_passed": report.overlap_checks_passed,
        "max_overlap_deviation": report.max_overlap_deviation,
        "intra_basis_residual": report.intra_basis_residual,
        "completeness_passed": report.completeness_passed,
        "positivity_passed": report.positivity_passed,
        "rank_passed": report.rank_passed,
        "passed": report.passed(),
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(runtime)?);
    Ok(report.passed())
}

pub fn reconstruct_one(args: &ReconstructArgs) -> Result<(), CliError> {
    if !(args.photons.is_finite() && args.photons > 0.0) {
        return Err(usage(format!(
            "--photons must be positive, got {}",
            args.photons
        )));
    }
    if !(0.0..=1.0).contains(&args.dark_rate) {
        return Err(usage(format!(
            "--dark-rate must lie in [0, 1], got {}",
            args.dark_rate
        )));
    }
    let psi = pure_state(args.theta, args.delta, args.phi12, args.phi13).map_err(usage)?;
    let mut options = OptimizerOptions::default();
    if let Some(r) = args.restarts {
        if r == 0 {
            return Err(usage("--restarts must be at least 1"));
        }
        options.restarts = r;
    }

    let scheme: Scheme = args.scheme.into();
    let povm = scheme.povm();
    let input = apply_dark_counts(&psi, args.dark_rate).map_err(usage)?;
    let counts = measured_counts(
        &input,
        &povm,
        args.photons,
        &mut RngStream::new(args.seed, "counts"),
    )
    .map_err(runtime)?;
    let est = reconstruct(
        &counts,
        &povm,
        args.photons,
        &options,
        &mut RngStream::new(args.seed, "restarts"),
    )
    .map_err(runtime)?;
    let m = merits(&psi, &est.rho_hat).map_err(runtime)?;

    let rho: Vec<Vec<serde_json::Value>> = est
        .rho_hat
        .entries()
        .iter()
        .map(|row| row.iter().map(|c| complex_json(*c)).collect())
        .collect();
    let out = json!({
        "scheme": scheme,
        "photon_mean": args.photons,
        "dark_rate": args.dark_rate,
        "seed": args.seed,
        "source": {
            "theta": psi.theta,
            "delta": psi.delta,
            "phi12": psi.phi12,
            "phi13": psi.phi13,
            "amplitudes": psi.amplitudes().components().iter().map(|c| complex_json(*c)).collect::<Vec<_>>(),
        },
        "measured_counts": counts.values,
        "rho_hat": rho,
        "params": est.params.0,
        "objective": est.objective,
        "evaluations": est.evaluations,
        "restarts_used": est.restarts_used,
        "converged": est.converged,
        "fidelity": m.fidelity,
        "purity": m.purity,
        "entropy": m.entropy,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(runtime)?);
    Ok(())
}

/// Merges the optional JSON config with explicit flags.
pub fn sweep_config(args: &SweepArgs) -> Result<SweepConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<SweepConfig>(&text)
                .map_err(|e| usage(format!("bad config {}: {e}", path.display())))?
        }
        None => SweepConfig::default(),
    };

    if let Some(s) = &args.schemes {
        let mut schemes: Vec<Scheme> = Vec::new();
        for x in s {
            let scheme = Scheme::from(*x);
            if !schemes.contains(&scheme) {
                schemes.push(scheme);
            }
        }
        cfg.schemes = schemes;
    }
    if let Some(p) = &args.photons {
        cfg.photon_means = p.clone();
    }
    if args.p_min.is_some() || args.p_max.is_some() || args.p_steps.is_some() {
        let lo = args.p_min.unwrap_or(0.0);
        let hi = args.p_max.unwrap_or(1.0);
        let steps = args.p_steps.unwrap_or(21);
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(usage("--p-min and --p-max must lie in [0, 1]"));
        }
        if lo > hi {
            return Err(usage(format!("--p-min {lo} exceeds --p-max {hi}")));
        }
        if steps == 0 {
            return Err(usage("--p-steps must be at least 1"));
        }
        cfg.p_grid = linspace(lo, hi, steps);
    }
    if let Some(g) = &args.grid {
        cfg.state_grid = <[usize; 4]>::try_from(g.as_slice())
            .map_err(|_| usage("--grid takes four comma-separated integers"))?;
    }
    if args.max_states.is_some() {
        cfg.max_states = args.max_states;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(jobs) = args.jobs {
        cfg.parallelism = jobs;
    }
    if let Some(r) = args.restarts {
        cfg.optimizer.restarts = r;
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    if args.detail_out.is_some() {
        cfg.detail_output = args.detail_out.clone();
    }
    if cfg.output.is_none() {
        return Err(usage("--out is required (or set \"output\" in --config)"));
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn summary_table(records: &[SweepRecord]) -> String {
    let mut s = format!(
        "{:<6} {:>10} {:>6} {:>8} {:>10} {:>10} {:>10} {:>8}\n",
        "scheme", "N", "p", "states", "F_av", "gamma_av", "S_av", "unconv"
    );
    for r in records {
        s.push_str(&format!(
            "{:<6} {:>10} {:>6.3} {:>8} {:>10.5} {:>10.5} {:>10.5} {:>8}\n",
            r.scheme.as_str(),
            r.photon_mean,
            r.p,
            r.n_states,
            r.f_av,
            r.gamma_av,
            r.s_av,
            r.n_unconverged
        ));
    }
    s
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = sweep_config(args)?;
    let out = cfg.output.clone().expect("checked in sweep_config");
    // fail before the sweep rather than after it
    File::create(&out).map_err(|e| runtime(format!("cannot write {}: {e}", out.display())))?;
    if let Some(d) = &cfg.detail_output {
        File::create(d).map_err(|e| runtime(format!("cannot write {}: {e}", d.display())))?;
    }

    let total = cfg.schemes.len() * cfg.photon_means.len() * cfg.p_grid.len();
    let mut done = 0;
    let result = run_sweep_with(&cfg, |r| {
        done += 1;
        eprintln!(
            "[{done}/{total}] {} N={} p={:.3}: F_av={:.4}",
            r.scheme, r.photon_mean, r.p, r.f_av
        );
    })
    .map_err(runtime)?;

    write_records(&result.records, &out).map_err(runtime)?;
    if let Some(d) = &cfg.detail_output {
        write_details(&result.details, d).map_err(runtime)?;
    }
    print!("{}", summary_table(&result.records));
    std::io::stdout().flush().map_err(runtime)?;
    Ok(())
}

pub fn plot(args: &PlotArgs) -> Result<(), CliError> {
    let records = read_records(&args.input).map_err(|e| match e {
        TomoError::Csv { line, message } => {
            runtime(format!("{}: line {line}: {message}", args.input.display()))
        }
        other => runtime(format!("{}: {other}", args.input.display())),
    })?;
    if records.is_empty() {
        return Err(runtime(format!(
            "{} holds no records",
            args.input.display()
        )));
    }

    let photon_mean = match args.photons {
        Some(n) => n,
        None => {
            let first = records[0].photon_mean;
            if records.iter().any(|r| r.photon_mean != first) {
                return Err(usage(
                    "CSV holds several photon means; pick one with --photons",
                ));
            }
            first
        }
    };

    let (name, symbol) = match args.metric {
        Metric::Fidelity => ("Average fidelity", "F_av"),
        Metric::Purity => ("Average purity", "gamma_av"),
        Metric::Entropy => ("Average entropy", "S_av"),
    };
    let mut series = Vec::new();
    for (scheme, color) in [(Scheme::Sic, "#d62728"), (Scheme::Mub, "#1f77b4")] {
        let mut points: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.scheme == scheme && r.photon_mean == photon_mean)
            .map(|r| {
                let y = match args.metric {
                    Metric::Fidelity => r.f_av,
                    Metric::Purity => r.gamma_av,
                    Metric::Entropy => r.s_av,
                };
                (r.p, y)
            })
            .collect();
        if points.is_empty() {
            continue;
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        series.push(Series {
            label: scheme.display_name().to_string(),
            color,
            points,
        });
    }
    if series.is_empty() {
        return Err(runtime(format!(
            "no records with photon mean {photon_mean}"
        )));
    }

    let y_include = match args.metric {
        Metric::Entropy => vec![0.0, 3f64.ln()],
        Metric::Purity => vec![1.0 / 3.0, 1.0],
        Metric::Fidelity => vec![],
    };
    let chart = Chart {
        title: format!("{name}, N = {photon_mean}"),
        x_label: "dark count rate p".into(),
        y_label: symbol.into(),
        series,
        y_include,
    };
    fs::write(&args.out, chart.render())
        .map_err(|e| runtime(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}
