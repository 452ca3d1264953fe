//! Command line interface.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use linproj::{kepler_initial, kepler_system, KeplerParams, SolverSettings, SolverStrategy, System};

use crate::error::HarnessError;
use crate::experiment::{equivalence_study, integral_error_study, order_study, run_trajectory, step_size};
use crate::output;
use crate::presets::{parse_integrals, preset, Preset};

#[derive(Debug, Parser)]
#[command(
    name = "linproj",
    version,
    about = "Integral-preserving integrators on the Kepler problem"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one method and write the trajectory.
    Integrate(IntegrateArgs),
    /// Global error at whole periods over a range of step sizes.
    Order(OrderArgs),
    /// Differences between a reference method and variants.
    Equivalence(EquivalenceArgs),
    /// Integral errors along a run.
    Integrals(IntegrateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Newton,
    FixedPoint,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Orbit eccentricity.
    #[arg(long, default_value_t = 0.6)]
    pub e: f64,
    /// Per-step solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long, default_value = "b")]
    pub method: String,
    /// Step size is 2π divided by this.
    #[arg(long, default_value_t = 50)]
    pub h_num: usize,
    #[arg(long, default_value_t = 1)]
    pub periods: usize,
    /// Preserved integrals, 1-based, e.g. "1,2,3".
    #[arg(long)]
    pub integrals: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long, alias = "method", default_value = "a,b,c,d")]
    pub methods: String,
    #[arg(long, alias = "h-num", default_value = "25,50,100,200,400,800")]
    pub h_nums: String,
    #[arg(long, default_value_t = 1)]
    pub periods: usize,
    #[arg(long)]
    pub integrals: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EquivalenceArgs {
    /// Reference method.
    #[arg(long, default_value = "b")]
    pub method: String,
    #[arg(long, default_value = "b1,b2")]
    pub variants: String,
    #[arg(long, default_value_t = 50)]
    pub h_num: usize,
    #[arg(long, default_value_t = 50)]
    pub periods: usize,
    #[arg(long, default_value = "1,2")]
    pub integrals: String,
    #[command(flatten)]
    pub common: Common,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

fn solver_settings(common: &Common) -> Result<SolverSettings<f64>, HarnessError> {
    let mut s = SolverSettings::default();
    if let Some(tol) = common.tol {
        s = s.with_tolerance(tol);
    }
    if let Some(kind) = common.solver {
        s = s.with_strategy(match kind {
            SolverArg::Newton => SolverStrategy::NewtonFiniteDifference,
            SolverArg::FixedPoint => SolverStrategy::FixedPoint,
        });
    }
    s.validate()?;
    Ok(s)
}

fn build(name: &str, integrals: Option<&str>, common: &Common) -> Result<(Preset, System<f64>), HarnessError> {
    let subset = integrals.map(parse_integrals).transpose()?;
    let mut p = preset(name, subset)?;
    p.integrator.set_solver(solver_settings(common)?);
    let system = kepler_system::<f64>().select_integrals(&p.integrals)?;
    Ok((p, system))
}

fn initial(common: &Common) -> Result<Vec<f64>, HarnessError> {
    Ok(kepler_initial::<f64>(KeplerParams::new(common.e)?).into_vec())
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_counts(s: &str) -> Result<Vec<usize>, HarnessError> {
    split_list(s)
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| HarnessError::Config(format!("bad step count {p:?}")))
        })
        .collect()
}

pub fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Integrate(a) => {
            let (p, system) = build(&a.method, a.integrals.as_deref(), &a.common)?;
            let x0 = initial(&a.common)?;
            let n = a.h_num * a.periods;
            match run_trajectory(&p.integrator, &system, &x0, step_size(a.h_num), n) {
                Ok(rec) => output::write_trajectory(sink(&a.common.out)?, &rec, &p.integrals),
                Err(failure) => {
                    if !failure.record.states.is_empty() {
                        output::write_trajectory(sink(&a.common.out)?, &failure.record, &p.integrals)?;
                    }
                    Err(failure.error)
                }
            }
        }
        Command::Integrals(a) => {
            let (p, system) = build(&a.method, a.integrals.as_deref(), &a.common)?;
            let x0 = initial(&a.common)?;
            let (times, errors) =
                integral_error_study(&p.integrator, &system, &x0, step_size(a.h_num), a.h_num * a.periods)?;
            output::write_integral_errors(sink(&a.common.out)?, &times, &errors, &p.integrals)
        }
        Command::Order(a) => {
            let x0 = initial(&a.common)?;
            let methods = split_list(&a.methods)
                .into_iter()
                .map(|name| {
                    let (p, system) = build(&name, a.integrals.as_deref(), &a.common)?;
                    Ok((name, p.integrator, system))
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;
            let rows = order_study(&methods, &x0, &parse_counts(&a.h_nums)?, a.periods)?;
            output::write_order(sink(&a.common.out)?, &rows)
        }
        Command::Equivalence(a) => {
            let x0 = initial(&a.common)?;
            let (reference, ref_system) = build(&a.method, Some(&a.integrals), &a.common)?;
            let names = split_list(&a.variants);
            let variants = names
                .iter()
                .map(|name| build(name, Some(&a.integrals), &a.common))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<_> = variants.iter().map(|(p, s)| (&p.integrator, s)).collect();
            let series = equivalence_study(
                (&reference.integrator, &ref_system),
                &refs,
                &x0,
                step_size(a.h_num),
                a.h_num * a.periods,
            )?;
            output::write_equivalence(sink(&a.common.out)?, &series, &names)?;
            if a.common.out.is_some() {
                for (name, d) in names.iter().zip(series.single_step()) {
                    println!(
                        "single-step difference {} vs {name}: {}",
                        a.method,
                        output::fmt_float(d)
                    );
                }
            }
            Ok(())
        }
    }
}

/// JSON object describing a failure, for standard error.
pub fn error_line(err: &HarnessError) -> String {
    let mut obj = serde_json::json!({
        "error": err.kind(),
        "message": err.to_string(),
    });
    if let Some(step) = err.step() {
        obj["step"] = step.into();
    }
    obj.to_string()
}
