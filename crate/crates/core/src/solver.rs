//! Per-step implicit equation solvers.
//!
//! Fixed-point iteration certifies convergence by the update norm, Newton by
//! the residual norm. Non-convergence is reported through
//! [`Report::converged`]; NaN/Inf iterates are an immediate error.

use crate::dense::{Lu, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::model::{SolverSettings, SolverStrategy};
use crate::scalar::{norm_inf, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Report<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// Max-norm of the last update (fixed point) or residual (Newton).
    pub final_residual: T,
    pub converged: bool,
}

impl<T: Scalar> Report<T> {
    /// Turns a non-converged report into [`Error::SolverDiverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::SolverDiverged {
                iterations: self.iterations,
                residual: self.final_residual.as_f64(),
            })
        }
    }

    pub(crate) fn trivial(solution: Vec<T>) -> Self {
        Report {
            solution,
            iterations: 0,
            final_residual: T::zero(),
            converged: true,
        }
    }
}

fn ensure_finite<T: Scalar>(v: &[T], iterations: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::SolverDiverged {
            iterations,
            residual: f64::INFINITY,
        })
    }
}

/// Iterates `x ← map(x)` until `|Δx|∞ ≤ tolerance` or the iteration budget runs out.
pub fn fixed_point_solve<T, F>(mut map: F, x0: &[T], config: &SolverSettings<T>) -> Result<Report<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    config.validate()?;
    let mut x = x0.to_vec();
    let mut update = T::infinity();
    for it in 1..=config.max_iterations {
        let next = map(&x)?;
        check_dim(x.len(), next.len())?;
        ensure_finite(&next, it)?;
        update = x.iter().zip(&next).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        x = next;
        if update <= config.tolerance {
            return Ok(Report {
                solution: x,
                iterations: it,
                final_residual: update,
                converged: true,
            });
        }
    }
    Ok(Report {
        solution: x,
        iterations: config.max_iterations,
        final_residual: update,
        converged: false,
    })
}

/// Forward-difference Jacobian with column step `fd_epsilon · (1 + |x_k|)`.
pub fn fd_jacobian<T, F>(residual: &mut F, x: &[T], r0: &[T], fd_epsilon: T) -> Result<Matrix<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    let n = x.len();
    let m = r0.len();
    let mut jac = Matrix::zeros(m, n);
    let mut probe = x.to_vec();
    for k in 0..n {
        let step = fd_epsilon * (T::one() + x[k].abs());
        probe[k] = x[k] + step;
        // actual representable step
        let dk = probe[k] - x[k];
        let rk = residual(&probe)?;
        check_dim(m, rk.len())?;
        for i in 0..m {
            jac[(i, k)] = (rk[i] - r0[i]) / dk;
        }
        probe[k] = x[k];
    }
    Ok(jac)
}

/// Newton iteration on `residual(x) = 0` with a forward-difference Jacobian.
///
/// Stops as soon as `|residual|∞ ≤ tolerance`; an initial guess that already
/// satisfies this returns with zero iterations.
pub fn newton_solve<T, F>(mut residual: F, x0: &[T], config: &SolverSettings<T>) -> Result<Report<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    config.validate()?;
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    check_dim(x.len(), r.len())?;
    ensure_finite(&r, 0)?;
    let mut norm = norm_inf(&r);
    let mut iterations = 0;
    while norm > config.tolerance && iterations < config.max_iterations {
        let jac = fd_jacobian(&mut residual, &x, &r, config.fd_epsilon)?;
        let neg_r: Vec<T> = r.iter().map(|&v| -v).collect();
        let delta = Lu::factor(&jac)?.solve(&neg_r)?;
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi = *xi + *di;
        }
        iterations += 1;
        ensure_finite(&x, iterations)?;
        r = residual(&x)?;
        ensure_finite(&r, iterations)?;
        norm = norm_inf(&r);
    }
    Ok(Report {
        solution: x,
        iterations,
        final_residual: norm,
        converged: norm <= config.tolerance,
    })
}

type VectorFn<'a, T> = Box<dyn FnMut(&[T]) -> Result<Vec<T>> + 'a>;

/// An implicit per-step equation in one of its two natural shapes.
pub(crate) enum Implicit<'a, T> {
    /// `z = map(z)`.
    Map(VectorFn<'a, T>),
    /// `residual(z) = 0`.
    Residual(VectorFn<'a, T>),
}

/// Solves an implicit step equation with the configured strategy.
///
/// A fixed-point map under Newton becomes the residual `z − map(z)`. A
/// residual under the fixed-point strategy is iterated with the chord map
/// `z ← z − J₀⁻¹ residual(z)`, `J₀` frozen at the initial guess.
pub(crate) fn solve_implicit<T: Scalar>(
    problem: Implicit<'_, T>,
    z0: &[T],
    config: &SolverSettings<T>,
) -> Result<Report<T>> {
    let report = match (problem, config.strategy) {
        (Implicit::Map(map), SolverStrategy::FixedPoint) => fixed_point_solve(map, z0, config)?,
        (Implicit::Map(mut map), SolverStrategy::NewtonFiniteDifference) => newton_solve(
            |z: &[T]| {
                let mz = map(z)?;
                Ok(z.iter().zip(&mz).map(|(&a, &b)| a - b).collect())
            },
            z0,
            config,
        )?,
        (Implicit::Residual(residual), SolverStrategy::NewtonFiniteDifference) => newton_solve(residual, z0, config)?,
        (Implicit::Residual(mut residual), SolverStrategy::FixedPoint) => {
            let r0 = residual(z0)?;
            check_dim(z0.len(), r0.len())?;
            let jac = fd_jacobian(&mut residual, z0, &r0, config.fd_epsilon)?;
            let lu = Lu::factor(&jac)?;
            if lu.is_singular() {
                return Err(Error::SingularMatrix {
                    pivot: lu.min_pivot().as_f64(),
                });
            }
            fixed_point_solve(
                |z: &[T]| {
                    let r = residual(z)?;
                    let dz = lu.solve(&r)?;
                    Ok(z.iter().zip(&dz).map(|(&a, &b)| a - b).collect())
                },
                z0,
                config,
            )?
        }
    };
    report.require_converged()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(tol: f64, iters: usize) -> SolverSettings<f64> {
        SolverSettings::new(tol, iters, SolverStrategy::FixedPoint, 1e-7).unwrap()
    }

    #[test]
    fn fixed_point_identity_converges_immediately() {
        let r = fixed_point_solve(|x: &[f64]| Ok(x.to_vec()), &[0.3, -1.2], &cfg(1e-12, 10)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.final_residual, 0.0);
        assert_eq!(r.solution, vec![0.3, -1.2]);
    }

    #[test]
    fn fixed_point_contraction() {
        let r = fixed_point_solve(|x: &[f64]| Ok(vec![x[0] / 2.0 + 1.0]), &[0.0], &cfg(1e-12, 200)).unwrap();
        assert!(r.converged);
        assert!((r.solution[0] - 2.0).abs() <= 1e-11);
        assert!(r.final_residual <= 1e-12);
    }

    #[test]
    fn fixed_point_expansion_does_not_converge() {
        match fixed_point_solve(|x: &[f64]| Ok(vec![3.0 * x[0]]), &[1.0], &cfg(1e-12, 50)) {
            Ok(r) => assert!(!r.converged),
            Err(e) => assert!(matches!(e, Error::SolverDiverged { .. })),
        }
    }

    #[test]
    fn fixed_point_nan_is_divergence() {
        let err = fixed_point_solve(|_: &[f64]| Ok(vec![f64::NAN]), &[1.0], &cfg(1e-12, 5)).unwrap_err();
        assert!(matches!(err, Error::SolverDiverged { iterations: 1, .. }));
    }

    #[test]
    fn newton_linear_one_iteration() {
        let c = cfg(1e-8, 10).with_strategy(SolverStrategy::NewtonFiniteDifference);
        let r = newton_solve(|x: &[f64]| Ok(vec![x[0] - 2.0]), &[0.0], &c).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!((r.solution[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn newton_square_root_of_four() {
        let c = SolverSettings::new(1e-12, 50, SolverStrategy::NewtonFiniteDifference, 1e-7).unwrap();
        let r = newton_solve(|x: &[f64]| Ok(vec![x[0] * x[0] - 4.0]), &[3.0], &c).unwrap();
        assert!(r.converged);
        assert!((r.solution[0] - 2.0).abs() <= 1e-12);
        assert!(r.iterations <= 8, "{} iterations", r.iterations);
    }

    #[test]
    fn newton_root_at_start_takes_no_iterations() {
        let c = SolverSettings::default();
        let r = newton_solve(|x: &[f64]| Ok(vec![x[0] * x[0] * x[0], x[1]]), &[0.0, 0.0], &c).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn newton_singular_jacobian() {
        let c = SolverSettings::default();
        let err = newton_solve(
            |x: &[f64]| Ok(vec![x[0] + x[1] - 1.0, 2.0 * x[0] + 2.0 * x[1]]),
            &[0.0, 0.0],
            &c,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }), "{err:?}");
    }

    #[test]
    fn solvers_are_deterministic() {
        let c = SolverSettings::default();
        let f = |x: &[f64]| Ok(vec![x[0].sin() + x[1] - 0.3, x[0] - x[1] * x[1]]);
        let a = newton_solve(f, &[0.2, 0.1], &c).unwrap();
        let b = newton_solve(f, &[0.2, 0.1], &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chord_iteration_for_residual_problems() {
        let c = cfg(1e-13, 100);
        let problem = Implicit::Residual(Box::new(|x: &[f64]| Ok(vec![x[0] * x[0] - 4.0])));
        let r = solve_implicit(problem, &[2.2], &c).unwrap();
        assert!((r.solution[0] - 2.0).abs() < 1e-12);
    }
}
