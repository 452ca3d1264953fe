//! Trajectories, order studies, equivalence and integral-error series.

use std::f64::consts::PI;

use rayon::prelude::*;

use linproj::{evaluate_integrals, max_abs_diff, rk_step, Integrator, SolverSettings, System, Underlying};

use crate::error::HarnessError;

/// Everything recorded along one run.
///
/// `times` and `states` hold `N + 1` entries (including the start); the
/// per-step arrays hold `N`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub integral_values: Vec<Vec<f64>>,
    pub lambda_norms: Vec<f64>,
    pub solver_iterations: Vec<usize>,
}

impl TrajectoryRecord {
    pub fn steps(&self) -> usize {
        self.lambda_norms.len()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    /// `|I_m(x_n) − I_m(x₀)|` for every recorded state, including `n = 0`.
    pub fn integral_errors(&self) -> Vec<Vec<f64>> {
        let Some(first) = self.integral_values.first() else {
            return Vec::new();
        };
        self.integral_values
            .iter()
            .map(|v| v.iter().zip(first).map(|(a, b)| (a - b).abs()).collect())
            .collect()
    }
}

/// A run that stopped early; `record` holds everything up to the failing step.
#[derive(Debug)]
pub struct TrajectoryFailure {
    pub record: TrajectoryRecord,
    pub error: HarnessError,
}

impl From<TrajectoryFailure> for HarnessError {
    fn from(f: TrajectoryFailure) -> Self {
        f.error
    }
}

/// Applies the step map `n_steps` times from `x0`.
///
/// Integral values are recorded for every integral of `system`.
#[allow(clippy::result_large_err)]
pub fn run_trajectory(
    integrator: &Integrator<f64>,
    system: &System<f64>,
    x0: &[f64],
    h: f64,
    n_steps: usize,
) -> Result<TrajectoryRecord, TrajectoryFailure> {
    let mut record = TrajectoryRecord::default();
    let fail = |record: TrajectoryRecord, error: HarnessError| TrajectoryFailure { record, error };
    if n_steps == 0 {
        return Err(fail(record, HarnessError::Config("n_steps must be at least 1".into())));
    }
    let initial = match evaluate_integrals(system, x0) {
        Ok(v) => v,
        Err(e) => return Err(fail(record, e.into())),
    };
    record.times.push(0.0);
    record.states.push(x0.to_vec());
    record.integral_values.push(initial.clone());
    let mut x = x0.to_vec();
    for n in 1..=n_steps {
        let out = match integrator.step(system, &x, h, &initial) {
            Ok(out) => out,
            Err(source) => return Err(fail(record, HarnessError::Step { step: n, source })),
        };
        x = out.x_new.into_vec();
        let values = match evaluate_integrals(system, &x) {
            Ok(v) => v,
            Err(source) => return Err(fail(record, HarnessError::Step { step: n, source })),
        };
        record.times.push(n as f64 * h);
        record.states.push(x.clone());
        record.integral_values.push(values);
        record
            .lambda_norms
            .push(out.lambda.iter().fold(0.0f64, |m, l| m.max(l.abs())));
        record.solver_iterations.push(out.solver_report.iterations);
    }
    Ok(record)
}

/// `h = 2π/n`
pub fn step_size(n: usize) -> f64 {
    2.0 * PI / n as f64
}

/// Exact Kepler state at `t`: `x₀` at whole periods, otherwise a fine RK6 run.
pub fn reference_state(system: &System<f64>, x0: &[f64], t: f64) -> Result<Vec<f64>, HarnessError> {
    let periods = t / (2.0 * PI);
    if (periods - periods.round()).abs() < 1e-12 {
        return Ok(x0.to_vec());
    }
    let n = ((t.abs() / (2.0 * PI / 10_000.0)).ceil() as usize).max(1);
    let h = t / n as f64;
    let f = |x: &[f64]| system.vector_field(x);
    let solver = SolverSettings::default();
    let mut x = x0.to_vec();
    for _ in 0..n {
        x = rk_step(&Underlying::rk6(), &f, &x, h, &solver)?;
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudyRow {
    pub method_name: String,
    pub h: f64,
    /// `NaN` when the run failed.
    pub final_error: f64,
    /// Per-method least-squares slope, repeated on each of its rows.
    pub fitted_slope: f64,
}

/// Errors inside this window enter the slope fit.
pub const FIT_WINDOW: (f64, f64) = (1e-12, 1e-1);

/// Least-squares slope of `ln error` against `ln h` over points inside [`FIT_WINDOW`].
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| e.is_finite() && *e >= FIT_WINDOW.0 && *e <= FIT_WINDOW.1)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if used.len() < 2 {
        return f64::NAN;
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = used.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = used.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Global error at `t = 2π·periods` for every (method, `h = 2π/n`) cell.
///
/// Cells run in parallel; rows come back in method-then-grid order.
pub fn order_study(
    methods: &[(String, Integrator<f64>, System<f64>)],
    x0: &[f64],
    h_nums: &[usize],
    periods: usize,
) -> Result<Vec<OrderStudyRow>, HarnessError> {
    if periods == 0 || h_nums.contains(&0) {
        return Err(HarnessError::Config("periods and step counts must be positive".into()));
    }
    let cells: Vec<(usize, usize)> = (0..methods.len())
        .flat_map(|m| h_nums.iter().map(move |&n| (m, n)))
        .collect();
    let errors: Vec<f64> = cells
        .par_iter()
        .map(|&(m, n)| {
            let (_, integrator, system) = &methods[m];
            match run_trajectory(integrator, system, x0, step_size(n), n * periods) {
                Ok(rec) => max_abs_diff(rec.final_state(), x0),
                Err(_) => f64::NAN,
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(cells.len());
    for (m, (name, _, _)) in methods.iter().enumerate() {
        let slice = &errors[m * h_nums.len()..(m + 1) * h_nums.len()];
        let points: Vec<(f64, f64)> = h_nums
            .iter()
            .map(|&n| step_size(n))
            .zip(slice.iter().copied())
            .collect();
        let slope = fit_slope(&points);
        for (h, e) in points {
            rows.push(OrderStudyRow {
                method_name: name.clone(),
                h,
                final_error: e,
                fitted_slope: slope,
            });
        }
    }
    Ok(rows)
}

/// Differences between a reference method and its variants.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceSeries {
    pub times: Vec<f64>,
    /// `diffs[v][n] = |x_ref(t_n) − x_v(t_n)|∞` along independent runs.
    pub diffs: Vec<Vec<f64>>,
    /// `local[v][n]`: one step of each method from the reference state `x_ref(t_n)`.
    pub local: Vec<Vec<f64>>,
}

impl EquivalenceSeries {
    /// Agreement of a single step from `x₀`, per variant.
    pub fn single_step(&self) -> Vec<f64> {
        self.local.iter().map(|l| l.first().copied().unwrap_or(0.0)).collect()
    }
}

pub fn equivalence_study(
    reference: (&Integrator<f64>, &System<f64>),
    variants: &[(&Integrator<f64>, &System<f64>)],
    x0: &[f64],
    h: f64,
    n_steps: usize,
) -> Result<EquivalenceSeries, HarnessError> {
    let base = run_trajectory(reference.0, reference.1, x0, h, n_steps)?;
    let initial = evaluate_integrals(reference.1, x0)?;
    let mut diffs = Vec::with_capacity(variants.len());
    let mut local = Vec::with_capacity(variants.len());
    for &(integrator, system) in variants {
        let run = run_trajectory(integrator, system, x0, h, n_steps)?;
        diffs.push(
            base.states[1..]
                .iter()
                .zip(&run.states[1..])
                .map(|(a, b)| max_abs_diff(a, b))
                .collect(),
        );
        let initial_v = evaluate_integrals(system, x0)?;
        let mut series = Vec::with_capacity(n_steps);
        for (n, x) in base.states[..n_steps].iter().enumerate() {
            let step_error = |source| HarnessError::Step { step: n + 1, source };
            let a = reference.0.step(reference.1, x, h, &initial).map_err(step_error)?;
            let b = integrator.step(system, x, h, &initial_v).map_err(step_error)?;
            series.push(max_abs_diff(&a.x_new, &b.x_new));
        }
        local.push(series);
    }
    Ok(EquivalenceSeries {
        times: base.times[1..].to_vec(),
        diffs,
        local,
    })
}

/// `|I_m(x_n) − I_m(x₀)|` for `n = 0..=N` and every integral of `system`.
pub fn integral_error_study(
    integrator: &Integrator<f64>,
    system: &System<f64>,
    x0: &[f64],
    h: f64,
    n_steps: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), HarnessError> {
    let rec = run_trajectory(integrator, system, x0, h, n_steps)?;
    let errors = rec.integral_errors();
    Ok((rec.times, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h: &f64| (h, 3.0 * h.powi(4))).collect();
        assert!((fit_slope(&pts) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn slope_ignores_points_outside_window() {
        let pts = vec![
            (0.1, 1e-2),
            (0.05, 1e-2 / 16.0),
            (0.01, 1e-14),
            (0.2, 0.5),
            (0.3, f64::NAN),
        ];
        assert!((fit_slope(&pts) - 4.0).abs() < 1e-12);
        assert!(fit_slope(&[(0.1, 1e-3)]).is_nan());
    }

    #[test]
    fn reference_at_whole_periods_is_start() {
        let sys = linproj::kepler_system::<f64>();
        let x0 = [0.4, 0.0, 0.0, 2.0];
        assert_eq!(reference_state(&sys, &x0, 4.0 * PI).unwrap(), x0.to_vec());
        let half = reference_state(&sys, &x0, PI).unwrap();
        // apoapsis of the e = 0.6 orbit
        assert!((half[0] + 1.6).abs() < 1e-9 && half[1].abs() < 1e-9, "{half:?}");
    }
}
