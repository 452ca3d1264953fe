//! CSV writers. Floats are written with 17 significant digits.

use std::io::Write;

use crate::error::HarnessError;
use crate::experiment::{EquivalenceSeries, OrderStudyRow, TrajectoryRecord};

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn floats(values: &[f64]) -> impl Iterator<Item = String> + '_ {
    values.iter().map(|v| fmt_float(*v))
}

/// `t, x1..xd, I1err..IMerr, lambda_norm, iters`, one row per recorded state.
pub fn write_trajectory<W: Write>(
    out: W,
    rec: &TrajectoryRecord,
    integral_labels: &[usize],
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let d = rec.states.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend(integral_labels.iter().map(|m| format!("I{}err", m + 1)));
    header.push("lambda_norm".into());
    header.push("iters".into());
    w.write_record(&header)?;
    let errors = rec.integral_errors();
    for (n, (t, x)) in rec.times.iter().zip(&rec.states).enumerate() {
        let mut row = vec![fmt_float(*t)];
        row.extend(floats(x));
        row.extend(floats(&errors[n]));
        let (lambda, iters) = if n == 0 {
            (0.0, 0)
        } else {
            (rec.lambda_norms[n - 1], rec.solver_iterations[n - 1])
        };
        row.push(fmt_float(lambda));
        row.push(iters.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `method, h, error, slope`
pub fn write_order<W: Write>(out: W, rows: &[OrderStudyRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "h", "error", "slope"])?;
    for r in rows {
        w.write_record([
            r.method_name.clone(),
            fmt_float(r.h),
            fmt_float(r.final_error),
            fmt_float(r.fitted_slope),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `t` then `<variant>_diff, <variant>_local` per variant.
pub fn write_equivalence<W: Write>(out: W, series: &EquivalenceSeries, names: &[String]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for name in names {
        header.push(format!("{name}_diff"));
        header.push(format!("{name}_local"));
    }
    w.write_record(&header)?;
    for (n, t) in series.times.iter().enumerate() {
        let mut row = vec![fmt_float(*t)];
        for (d, l) in series.diffs.iter().zip(&series.local) {
            row.push(fmt_float(d[n]));
            row.push(fmt_float(l[n]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `t, I1err..IMerr`
pub fn write_integral_errors<W: Write>(
    out: W,
    times: &[f64],
    errors: &[Vec<f64>],
    integral_labels: &[usize],
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(integral_labels.iter().map(|m| format!("I{}err", m + 1)));
    w.write_record(&header)?;
    for (t, e) in times.iter().zip(errors) {
        let mut row = vec![fmt_float(*t)];
        row.extend(floats(e));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
