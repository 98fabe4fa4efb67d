use std::path::{Path, PathBuf};

use maxscore_core::{run_coverage_study, run_normality_study, run_rate_study};

use crate::args::MonteCarloArgs;
use crate::config::{MonteCarloConfig, Study};
use crate::error::{CliError, CliResult};
use crate::output::{emit_json, fmt_f64, write_table};
use crate::report::{Report, StudyResult};

/// Runs the study and writes `summary.json` plus its CSV tables into the
/// report directory. Returns the one-line summary printed to stdout.
pub fn run(config: &MonteCarloConfig, dir: &Path, force: bool) -> CliResult<String> {
    let experiment = config.experiment();
    let (result, line) = match config.study {
        Study::Rate => {
            let r = run_rate_study(&experiment)?;
            let line = format!(
                "{} rate: slope {:.4} (se {:.4}) on log n; {:.4} (se {:.4}) on log cells",
                r.dgp, r.fit.slope, r.fit.slope_se, r.fit_cells.slope, r.fit_cells.slope_se
            );
            (StudyResult::Rate(r), line)
        }
        Study::Normality => {
            let r = run_normality_study(&experiment)?;
            let line = match r.ks_p_value {
                Some(p) => format!("{} normality at n = {}: sd {:.4}, KS p-value {:.4}", r.dgp, r.n, r.sd, p),
                None => format!("{} normality at n = {}: degenerate (sd = 0)", r.dgp, r.n),
            };
            (StudyResult::Normality(r), line)
        }
        Study::Coverage => {
            let r = run_coverage_study(&experiment)?;
            let cov: Vec<String> = r
                .rows
                .iter()
                .map(|row| format!("{:.2}: {:.3}", row.level, row.coverage))
                .collect();
            let line = format!(
                "{} coverage at n = {}: {}; KS distance {:.4} (se {:.4})",
                r.dgp,
                r.n,
                cov.join(", "),
                r.ks_distance,
                r.ks_distance_se
            );
            (StudyResult::Coverage(r), line)
        }
    };

    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    write_tables(&result, dir, force)?;
    let report = Report::new("montecarlo", Some(config.seed), config.clone(), result);
    emit_json(&report, Some(&dir.join("summary.json")), force)?;
    Ok(line)
}

fn write_tables(result: &StudyResult, dir: &Path, force: bool) -> CliResult<()> {
    match result {
        StudyResult::Rate(r) => {
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.n.to_string(),
                        row.replications.to_string(),
                        row.failed.to_string(),
                        fmt_f64(row.rmse_theta),
                        fmt_f64(row.rmse_theta_se),
                        fmt_f64(row.rmse_angle),
                        fmt_f64(row.sd_scaled_theta),
                    ]
                })
                .collect();
            write_table(
                &dir.join("rate.csv"),
                force,
                &["n", "replications", "failed", "rmse_theta", "rmse_theta_se", "rmse_angle", "sd_scaled_theta"],
                &rows,
            )
        }
        StudyResult::Normality(r) => {
            let draws: Vec<Vec<String>> = r
                .scaled_draws
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![i.to_string(), fmt_f64(v)])
                .collect();
            write_table(&dir.join("draws.csv"), force, &["draw", "scaled_theta"], &draws)?;
            let qq: Vec<Vec<String>> = r
                .qq
                .iter()
                .map(|q| vec![fmt_f64(q.theoretical), fmt_f64(q.sample)])
                .collect();
            write_table(&dir.join("qq.csv"), force, &["theoretical", "sample"], &qq)
        }
        StudyResult::Coverage(r) => {
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        fmt_f64(row.level),
                        fmt_f64(row.coverage),
                        fmt_f64(row.coverage_se),
                        fmt_f64(row.mean_length),
                        fmt_f64(row.symmetric_coverage),
                        fmt_f64(row.symmetric_mean_length),
                    ]
                })
                .collect();
            write_table(
                &dir.join("coverage.csv"),
                force,
                &["level", "coverage", "coverage_se", "mean_length", "symmetric_coverage", "symmetric_mean_length"],
                &rows,
            )
        }
    }
}

pub fn montecarlo(args: &MonteCarloArgs) -> CliResult<()> {
    let mut config = MonteCarloConfig::load(&args.config)?;
    let dir: PathBuf = args
        .out
        .clone()
        .or_else(|| config.output.clone())
        .ok_or_else(|| CliError::Usage("give a report directory with --out or `output`".into()))?;
    config.output = Some(dir.clone());
    let line = run(&config, &dir, args.force)?;
    println!("{line}");
    Ok(())
}
