//! Uniform step interface over all method families.

use crate::dg_method::{dg_step_multi, dg_step_single, DgSpec};
use crate::error::Result;
use crate::model::{evaluate_integrals, SolverSettings, State, System};
use crate::projection::{projection_step, ConserveAgainst, ProjectionSpec, StepOutcome};
use crate::rk::{rk_step, Underlying};
use crate::scalar::Scalar;
use crate::solver::Report;

#[derive(Debug, Clone, PartialEq)]
pub enum Integrator<T> {
    /// The plain one-step method, no projection.
    Underlying {
        method: Underlying<T>,
        solver: SolverSettings<T>,
    },
    Projection(ProjectionSpec<T>),
    DiscreteGradient(DgSpec<T>),
}

impl<T: Scalar> Integrator<T> {
    pub fn plain(method: Underlying<T>) -> Self {
        Integrator::Underlying {
            method,
            solver: SolverSettings::default(),
        }
    }

    pub fn solver(&self) -> &SolverSettings<T> {
        match self {
            Integrator::Underlying { solver, .. } => solver,
            Integrator::Projection(s) => &s.solver,
            Integrator::DiscreteGradient(s) => &s.solver,
        }
    }

    pub fn set_solver(&mut self, settings: SolverSettings<T>) {
        match self {
            Integrator::Underlying { solver, .. } => *solver = settings,
            Integrator::Projection(s) => s.solver = settings,
            Integrator::DiscreteGradient(s) => s.solver = settings,
        }
    }

    /// Advances `x` by `h`; `initial_values` are `I_m(x₀)` for methods that
    /// conserve against the initial state and are ignored otherwise.
    pub fn step(&self, system: &System<T>, x: &[T], h: T, initial_values: &[T]) -> Result<StepOutcome<T>> {
        match self {
            Integrator::Underlying { method, solver } => {
                let f = |z: &[T]| system.vector_field(z);
                let y = rk_step(method, &f, x, h, solver)?;
                Ok(StepOutcome {
                    x_new: State::new(y.clone())?,
                    lambda: Vec::new(),
                    solver_report: Report::trivial(y),
                    degenerate: false,
                })
            }
            Integrator::Projection(spec) => match spec.conserve_against {
                ConserveAgainst::InitialValue => projection_step(spec, system, x, h, initial_values),
                ConserveAgainst::PreviousStep => {
                    let targets = evaluate_integrals(system, x)?;
                    projection_step(spec, system, x, h, &targets)
                }
            },
            // the determinant-ratio contraction; the explicit double sum of
            // `dg_step_two_integrals` has a roundoff floor near 1e-13 on Kepler
            Integrator::DiscreteGradient(spec) => match spec.num_integrals() {
                1 => dg_step_single(spec, system, x, h),
                _ => dg_step_multi(spec, system, x, h),
            },
        }
    }
}
