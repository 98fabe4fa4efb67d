use clap::ValueEnum;
use maxscore_core::{decompose, materialize, DecompositionMode, Observation};
use serde::{Deserialize, Serialize};

use crate::args::{HoeffdingArgs, ModeArg};
use crate::commands::design;
use crate::error::CliResult;
use crate::output::{emit_json, fmt_f64, write_table};
use crate::report::{HoeffdingConfig, Report};

/// Function `f(W)` whose projections are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionChoice {
    /// The outcome `y`.
    Y,
    /// The first covariate (on the discrete design, the count `V`).
    X1,
    /// The score summand `y·1{x'β₀ ≥ 0}`.
    Score,
}

impl FunctionChoice {
    pub fn evaluate(self, obs: &Observation, beta0: &[f64]) -> f64 {
        match self {
            FunctionChoice::Y => f64::from(obs.y),
            FunctionChoice::X1 => obs.x[0],
            FunctionChoice::Score => {
                let idx: f64 = obs.x.iter().zip(beta0).map(|(a, b)| a * b).sum();
                if idx >= 0.0 {
                    f64::from(obs.y)
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn hoeffding_check(args: &HoeffdingArgs) -> CliResult<()> {
    let (spec, grid) = design(&args.design)?;
    let data = materialize(&spec, &grid, args.design.seed)?;
    let mode = match args.mode {
        ModeArg::Exact => DecompositionMode::Exact,
        ModeArg::Mc => DecompositionMode::Mc {
            draws: args.draws,
            ef_draws: args.ef_draws,
        },
    };
    let choice = args.function;
    let beta0 = spec.beta0.clone();
    let f = move |o: &Observation| choice.evaluate(o, &beta0);
    let table = decompose(&data, &spec, &f, mode, args.design.seed)?;

    if let Some(path) = &args.table {
        let rows: Vec<Vec<String>> = table
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.pattern.clone(),
                    e.order.to_string(),
                    e.cells.to_string(),
                    fmt_f64(e.h),
                    e.se.map(fmt_f64).unwrap_or_default(),
                ]
            })
            .collect();
        write_table(path, args.output.force, &["pattern", "order", "cells", "h", "se"], &rows)?;
    }
    let report = Report::new(
        "hoeffding-check",
        Some(args.design.seed),
        HoeffdingConfig {
            dgp: spec,
            grid: grid.sizes().to_vec(),
            seed: args.design.seed,
            function: choice,
            mode,
        },
        table,
    );
    emit_json(&report, args.output.report.as_deref(), args.output.force)
}
