use maxscore_core::oracle::oracle_hessian;
use maxscore_core::{
    bootstrap_estimate, materialize, oracle_variance, basis_complement, BootstrapConfig,
    ConstraintSet, Dataset, DgpSpec, DgpVariant, Direction, MultiIndexGrid, Quadrature,
    WeightSpec,
};

use crate::args::{
    BootstrapArgs, ConstraintKind, DataArgs, DesignArgs, EstimateArgs, EstimatorArgs, OracleArgs,
    SimulateArgs,
};
use crate::data::{load_dataset, write_dataset, LoadOptions, LoadSummary};
use crate::error::{CliError, CliResult};
use crate::output::{emit_json, fmt_f64, write_table};
use crate::report::{
    BootstrapResult, BootstrapRunConfig, EstimateConfig, EstimateResult, OracleConfig,
    OracleResult, Report, SimulateConfig,
};

pub(crate) fn design(args: &DesignArgs) -> CliResult<(DgpSpec, MultiIndexGrid)> {
    let sizes = match (&args.sizes, args.n) {
        (Some(s), _) => s.clone(),
        (None, Some(n)) => vec![n; 2],
        (None, None) => return Err(CliError::Usage("give the grid with --n or --sizes".into())),
    };
    let spec = if args.dgp == DgpVariant::DiscreteTest {
        DgpSpec::new(args.dgp).with_k_dims(sizes.len())?
    } else {
        DgpSpec::with_dim(args.dgp, args.d)?
    };
    let grid = MultiIndexGrid::new(sizes)?;
    spec.check_grid(&grid)?;
    Ok((spec, grid))
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let (spec, grid) = design(&args.design)?;
    let data = materialize(&spec, &grid, args.design.seed)?;
    write_dataset(&data, &args.out, args.output.force)?;
    let report = Report::new(
        "simulate",
        Some(args.design.seed),
        SimulateConfig {
            dgp: spec,
            grid: grid.sizes().to_vec(),
            seed: args.design.seed,
            out: args.out.clone(),
        },
        LoadSummary::of(&data),
    );
    emit_json(&report, args.output.report.as_deref(), args.output.force)
}

fn direction(v: &[f64], flag: &str) -> CliResult<Direction> {
    Direction::normalize(v).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn constraint(args: &EstimatorArgs) -> CliResult<ConstraintSet> {
    match args.constraint {
        ConstraintKind::Full => Ok(ConstraintSet::FullSphere),
        ConstraintKind::Hemisphere => {
            let r = args.reference.as_ref().ok_or_else(|| {
                CliError::Usage("--constraint hemisphere needs --ref".into())
            })?;
            Ok(ConstraintSet::Hemisphere {
                reference: direction(r, "ref")?,
            })
        }
        ConstraintKind::Component => {
            let (Some(l), Some(bound)) = (args.component, args.bound) else {
                return Err(CliError::Usage(
                    "--constraint component needs --component and --bound".into(),
                ));
            };
            if l == 0 {
                return Err(CliError::Usage("--component is 1-based".into()));
            }
            Ok(ConstraintSet::ComponentBound { index: l - 1, bound })
        }
    }
}

fn load(args: &DataArgs) -> CliResult<(Dataset, LoadOptions)> {
    let options = LoadOptions {
        y01: args.y01,
        require_complete: args.require_complete,
    };
    Ok((load_dataset(&args.data, options)?, options))
}

fn estimate_config(data_args: &DataArgs, args: &EstimatorArgs, load: LoadOptions) -> CliResult<EstimateConfig> {
    Ok(EstimateConfig {
        data: data_args.data.clone(),
        load,
        method: args.method,
        constraint: constraint(args)?,
        theta_reference: args
            .theta_ref
            .as_deref()
            .map(|r| direction(r, "theta-ref"))
            .transpose()?,
    })
}

pub fn estimate(args: &EstimateArgs) -> CliResult<()> {
    let (data, load) = load(&args.data)?;
    let config = estimate_config(&args.data, &args.estimator, load)?;
    let mut est = config.method.estimate(&data, &config.constraint, None)?;
    if let Some(r) = &config.theta_reference {
        est = est.with_reference(&basis_complement(r)?)?;
    }
    let result = EstimateResult {
        dataset: LoadSummary::of(&data),
        estimate: est,
    };
    let report = Report::new("estimate", None, config, result);
    emit_json(&report, args.output.report.as_deref(), args.output.force)
}

pub fn bootstrap(args: &BootstrapArgs) -> CliResult<()> {
    let (data, load) = load(&args.data)?;
    let estimation = estimate_config(&args.data, &args.estimator, load)?;
    let weights = WeightSpec {
        distribution: args.weights,
        replications: args.replications,
    };
    let boot = bootstrap_estimate(
        &data,
        &BootstrapConfig {
            weights,
            optimizer: estimation.method,
            constraint: estimation.constraint.clone(),
            reference: estimation.theta_reference.clone(),
            levels: args.levels.clone(),
            seed: args.seed,
        },
    )?;
    if let Some(path) = &args.draws {
        let k = boot.theta_hat.len();
        let mut header = vec!["replicate".to_owned()];
        header.extend((1..=k).map(|j| format!("theta{j}")));
        let rows: Vec<Vec<String>> = boot
            .theta_star
            .iter()
            .enumerate()
            .map(|(b, t)| {
                let mut row = vec![(b + 1).to_string()];
                row.extend(t.iter().map(|&v| fmt_f64(v)));
                row
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_table(path, args.output.force, &header, &rows)?;
    }
    let report = Report::new(
        "bootstrap",
        Some(args.seed),
        BootstrapRunConfig {
            estimation,
            weights,
            levels: args.levels.clone(),
            seed: args.seed,
        },
        BootstrapResult {
            dataset: LoadSummary::of(&data),
            bootstrap: boot,
        },
    );
    emit_json(&report, args.output.report.as_deref(), args.output.force)
}

pub fn oracle(args: &OracleArgs) -> CliResult<()> {
    let spec = DgpSpec::new(args.dgp);
    let quad = Quadrature {
        nodes: args.nodes,
        radius: args.radius,
    };
    let hessian = oracle_hessian(&spec, quad)?;
    let variance = if args.dgp == DgpVariant::Iid {
        None
    } else {
        Some(oracle_variance(&spec, &args.lambda, args.u_draws, args.seed, quad)?)
    };
    let report = Report::new(
        "oracle",
        Some(args.seed),
        OracleConfig {
            dgp: spec,
            lambda: args.lambda.clone(),
            u_draws: args.u_draws,
            seed: args.seed,
            quadrature: quad,
        },
        OracleResult { hessian, variance },
    );
    emit_json(&report, args.output.report.as_deref(), args.output.force)
}
