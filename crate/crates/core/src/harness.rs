//! Monte-Carlo sweep over measurement scheme, photon budget and dark-count
//! rate, averaging the figures of merit over a sample of pure states.
//!
//! Every (cell, state) task draws from its own random streams, seeded by
//! mixing the master seed with the scheme, the bit patterns of the photon
//! mean and dark-count rate, and the state's grid index. Results therefore
//! do not depend on thread count or scheduling.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::{measured_counts, mix_seed, RngStream};
use crate::error::{Result, TomoError};
use crate::estimator::{reconstruct, OptimizerOptions};
use crate::metrics::merits;
use crate::povm::Scheme;
use crate::states::{apply_dark_counts, sample_grid, subsample, PureQutrit};

pub const RECORD_HEADER: [&str; 13] = [
    "scheme",
    "photon_mean",
    "p",
    "n_states",
    "F_av",
    "F_std",
    "gamma_av",
    "gamma_std",
    "S_av",
    "S_std",
    "mean_objective",
    "n_unconverged",
    "master_seed",
];

pub const DETAIL_HEADER: [&str; 13] = [
    "scheme",
    "photon_mean",
    "p",
    "state_index",
    "theta",
    "delta",
    "phi12",
    "phi13",
    "fidelity",
    "purity",
    "entropy",
    "objective",
    "converged",
];

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub schemes: Vec<Scheme>,
    pub photon_means: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// `(n_theta, n_delta, n_phi12, n_phi13)`.
    pub state_grid: [usize; 4],
    /// Evenly strided cap on the number of grid states.
    pub max_states: Option<usize>,
    pub master_seed: u64,
    pub parallelism: usize,
    pub optimizer: OptimizerOptions,
    pub output: Option<PathBuf>,
    pub detail_output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            schemes: Scheme::ALL.to_vec(),
            photon_means: vec![10.0, 10_000.0],
            p_grid: linspace(0.0, 1.0, 21),
            state_grid: [6, 6, 12, 12],
            max_states: None,
            master_seed: 0,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            optimizer: OptimizerOptions::default(),
            output: None,
            detail_output: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(TomoError::invalid("no measurement schemes selected"));
        }
        if self.photon_means.is_empty() {
            return Err(TomoError::invalid("no photon means given"));
        }
        if let Some(n) = self
            .photon_means
            .iter()
            .find(|n| !(n.is_finite() && **n > 0.0))
        {
            return Err(TomoError::invalid(format!(
                "photon mean {n} is not positive"
            )));
        }
        if self.p_grid.is_empty() {
            return Err(TomoError::invalid("empty dark-count grid"));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(TomoError::invalid(format!(
                "dark-count rate {p} outside [0, 1]"
            )));
        }
        if self.state_grid.contains(&0) {
            return Err(TomoError::invalid(
                "state grid dimensions must be at least 1",
            ));
        }
        if self.max_states == Some(0) {
            return Err(TomoError::invalid("max_states must be at least 1"));
        }
        if self.parallelism == 0 {
            return Err(TomoError::invalid("parallelism must be at least 1"));
        }
        if self.optimizer.restarts == 0 {
            return Err(TomoError::invalid("optimizer needs at least one restart"));
        }
        Ok(())
    }

    /// Grid states selected by `max_states`, paired with their grid index.
    pub fn states(&self) -> Result<Vec<(usize, PureQutrit)>> {
        let [a, b, c, d] = self.state_grid;
        let grid = sample_grid(a, b, c, d)?;
        let keep = subsample(grid.len(), self.max_states.unwrap_or(usize::MAX));
        Ok(keep.into_iter().map(|i| (i, grid[i])).collect())
    }
}

/// Averages for one `(scheme, photon_mean, p)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub photon_mean: f64,
    pub p: f64,
    pub n_states: usize,
    #[serde(rename = "F_av")]
    pub f_av: f64,
    #[serde(rename = "F_std")]
    pub f_std: f64,
    pub gamma_av: f64,
    pub gamma_std: f64,
    #[serde(rename = "S_av")]
    pub s_av: f64,
    #[serde(rename = "S_std")]
    pub s_std: f64,
    pub mean_objective: f64,
    pub n_unconverged: usize,
    pub master_seed: u64,
}

/// Per-state outcome, written only on request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailRecord {
    pub scheme: Scheme,
    pub photon_mean: f64,
    pub p: f64,
    pub state_index: usize,
    pub theta: f64,
    pub delta: f64,
    pub phi12: f64,
    pub phi13: f64,
    pub fidelity: f64,
    pub purity: f64,
    pub entropy: f64,
    pub objective: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub details: Vec<DetailRecord>,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Seed for one state's task inside a cell.
pub fn task_seed(
    master_seed: u64,
    scheme: Scheme,
    photon_mean: f64,
    p: f64,
    state_index: usize,
) -> u64 {
    mix_seed(&[
        master_seed,
        scheme.index(),
        photon_mean.to_bits(),
        p.to_bits(),
        state_index as u64,
    ])
}

fn run_cell_indexed(
    scheme: Scheme,
    photon_mean: f64,
    p: f64,
    states: &[(usize, PureQutrit)],
    master_seed: u64,
    opts: &OptimizerOptions,
) -> Result<(SweepRecord, Vec<DetailRecord>)> {
    if states.is_empty() {
        return Err(TomoError::invalid("cell needs at least one state"));
    }
    let povm = scheme.povm();
    let details = states
        .par_iter()
        .map(|(index, psi)| {
            let seed = task_seed(master_seed, scheme, photon_mean, p, *index);
            let input = apply_dark_counts(psi, p)?;
            let counts = measured_counts(
                &input,
                &povm,
                photon_mean,
                &mut RngStream::new(seed, "counts"),
            )?;
            let est = reconstruct(
                &counts,
                &povm,
                photon_mean,
                opts,
                &mut RngStream::new(seed, "restarts"),
            )?;
            let m = merits(psi, &est.rho_hat)?;
            Ok(DetailRecord {
                scheme,
                photon_mean,
                p,
                state_index: *index,
                theta: psi.theta,
                delta: psi.delta,
                phi12: psi.phi12,
                phi13: psi.phi13,
                fidelity: m.fidelity,
                purity: m.purity,
                entropy: m.entropy,
                objective: est.objective,
                converged: est.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (f_av, f_std) = mean_std(details.iter().map(|d| d.fidelity));
    let (gamma_av, gamma_std) = mean_std(details.iter().map(|d| d.purity));
    let (s_av, s_std) = mean_std(details.iter().map(|d| d.entropy));
    let (mean_objective, _) = mean_std(details.iter().map(|d| d.objective));
    let record = SweepRecord {
        scheme,
        photon_mean,
        p,
        n_states: details.len(),
        f_av,
        f_std,
        gamma_av,
        gamma_std,
        s_av,
        s_std,
        mean_objective,
        n_unconverged: details.iter().filter(|d| !d.converged).count(),
        master_seed,
    };
    Ok((record, details))
}

/// Runs one cell on the current rayon pool. State `i` of `states` is seeded
/// as grid index `i`.
pub fn run_cell(
    scheme: Scheme,
    photon_mean: f64,
    p: f64,
    states: &[PureQutrit],
    master_seed: u64,
    opts: &OptimizerOptions,
) -> Result<SweepRecord> {
    let indexed: Vec<(usize, PureQutrit)> = states.iter().copied().enumerate().collect();
    run_cell_indexed(scheme, photon_mean, p, &indexed, master_seed, opts).map(|(r, _)| r)
}

/// Runs every `(scheme, photon_mean, p)` cell in configuration order.
///
/// Nothing is written to disk here; persist with [`write_records`] and
/// [`write_details`] so an I/O failure never discards computed results.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    run_sweep_with(config, |_| {})
}

/// [`run_sweep`] with a callback invoked after each finished cell.
pub fn run_sweep_with<F: FnMut(&SweepRecord)>(
    config: &SweepConfig,
    mut on_record: F,
) -> Result<SweepOutput> {
    config.validate()?;
    let states = config.states()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| TomoError::NumericalFailure(format!("cannot start worker pool: {e}")))?;
    let keep_details = config.detail_output.is_some();

    let mut out = SweepOutput::default();
    for &scheme in &config.schemes {
        for &photon_mean in &config.photon_means {
            for &p in &config.p_grid {
                let (record, details) = pool.install(|| {
                    run_cell_indexed(
                        scheme,
                        photon_mean,
                        p,
                        &states,
                        config.master_seed,
                        &config.optimizer,
                    )
                })?;
                on_record(&record);
                out.records.push(record);
                if keep_details {
                    out.details.extend(details);
                }
            }
        }
    }
    Ok(out)
}

fn write_csv<T: Serialize>(header: &[&str], rows: &[T], path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => TomoError::Io(io),
        other => TomoError::Csv {
            line: 0,
            message: format!("{other:?}"),
        },
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let mut inner = w.into_inner().map_err(|e| TomoError::Io(e.into_error()))?;
    inner.flush()?;
    Ok(())
}

/// Writes the summary CSV. An empty slice produces a header-only file.
pub fn write_records(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    write_csv(&RECORD_HEADER, records, path.as_ref())
}

pub fn write_details(details: &[DetailRecord], path: impl AsRef<Path>) -> Result<()> {
    write_csv(&DETAIL_HEADER, details, path.as_ref())
}

/// Reads a summary CSV written by [`write_records`].
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let file = File::open(path.as_ref())?;
    read_records_from(file)
}

pub fn read_records_from<R: std::io::Read>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let to_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(io) => TomoError::Io(io),
            csv::ErrorKind::Deserialize { err, .. } => TomoError::Csv {
                line,
                message: err.to_string(),
            },
            other => TomoError::Csv {
                line,
                message: format!("{other:?}"),
            },
        }
    };
    let header = rdr.headers().map_err(to_err)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(TomoError::Csv {
            line: 1,
            message: "file is empty".into(),
        });
    }
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(TomoError::Csv {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    rdr.deserialize().map(|r| r.map_err(to_err)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(p: f64) -> SweepRecord {
        SweepRecord {
            scheme: Scheme::Mub,
            photon_mean: 10.0,
            p,
            n_states: 16,
            f_av: 0.1 + p / 7.0,
            f_std: 1.0 / 3.0,
            gamma_av: std::f64::consts::PI / 10.0,
            gamma_std: 1e-17,
            s_av: 3f64.ln(),
            s_std: 0.0,
            mean_objective: 123456.789e-3,
            n_unconverged: 2,
            master_seed: u64::MAX,
        }
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 1.0, 21);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 1.0);
        assert_eq!(g[10], 0.5);
        assert_eq!(linspace(0.3, 0.9, 1), vec![0.3]);
    }

    #[test]
    fn empty_list_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_records(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{}\n", RECORD_HEADER.join(",")));
        assert!(read_records(&path).unwrap().is_empty());
    }

    #[test]
    fn one_record_is_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_records(&[record(0.25)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("mub,10.0,0.25,16,"));
    }

    #[test]
    fn records_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let records: Vec<SweepRecord> = (0..84).map(|i| record(i as f64 / 83.0)).collect();
        write_records(&records, &path).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back.len(), 84);
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(a, b);
            assert_eq!(a.f_av.to_bits(), b.f_av.to_bits());
            assert_eq!(a.gamma_std.to_bits(), b.gamma_std.to_bits());
        }
    }

    #[test]
    fn malformed_csv_reports_line() {
        let text = format!(
            "{}\nsic,10,0,1,0.9,0,1,0,0,0,0,0,1\nsic,10,zero,1,0.9,0,1,0,0,0,0,0,1\n",
            RECORD_HEADER.join(",")
        );
        match read_records_from(text.as_bytes()) {
            Err(TomoError::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected csv error, got {other:?}"),
        }
        assert!(matches!(
            read_records_from("".as_bytes()),
            Err(TomoError::Csv { .. })
        ));
        assert!(matches!(
            read_records_from("a,b\n1,2\n".as_bytes()),
            Err(TomoError::Csv { line: 1, .. })
        ));
    }

    #[test]
    fn config_validation() {
        let ok = SweepConfig::default();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.states().unwrap().len(), 5184);

        let bad_p = SweepConfig {
            p_grid: vec![0.0, 1.5],
            ..SweepConfig::default()
        };
        assert!(bad_p.validate().is_err());
        let no_schemes = SweepConfig {
            schemes: vec![],
            ..SweepConfig::default()
        };
        assert!(no_schemes.validate().is_err());
        let zero_jobs = SweepConfig {
            parallelism: 0,
            ..SweepConfig::default()
        };
        assert!(zero_jobs.validate().is_err());
    }

    #[test]
    fn config_parses_from_json() {
        let cfg: SweepConfig = serde_json::from_str(
            r#"{"schemes":["sic"],"photon_means":[10],"p_grid":[0,0.5],"max_states":4,"master_seed":9}"#,
        )
        .unwrap();
        assert_eq!(cfg.schemes, vec![Scheme::Sic]);
        assert_eq!(cfg.state_grid, [6, 6, 12, 12]);
        assert_eq!(cfg.optimizer, OptimizerOptions::default());
        assert!(serde_json::from_str::<SweepConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn sweep_cardinality_and_order() {
        let cfg = SweepConfig {
            photon_means: vec![10.0, 10_000.0],
            p_grid: linspace(0.0, 1.0, 3),
            max_states: Some(2),
            state_grid: [2, 2, 2, 2],
            parallelism: 2,
            optimizer: OptimizerOptions {
                restarts: 1,
                ..Default::default()
            },
            ..SweepConfig::default()
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 12);
        assert!(out.details.is_empty());
        let keys: Vec<(Scheme, f64, f64)> = out
            .records
            .iter()
            .map(|r| (r.scheme, r.photon_mean, r.p))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
    }

    #[test]
    fn cell_is_deterministic() {
        let states = sample_grid(1, 1, 1, 1).unwrap();
        let opts = OptimizerOptions::default();
        let a = run_cell(Scheme::Sic, 10.0, 0.2, &states, 5, &opts).unwrap();
        let b = run_cell(Scheme::Sic, 10.0, 0.2, &states, 5, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_states, 1);
        assert_eq!(a.f_std, 0.0);
    }
}
