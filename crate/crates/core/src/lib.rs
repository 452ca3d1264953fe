//! Linear projection and discrete gradient integrators for ODEs with first
//! integrals.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`.
//!
//! ```
//! use linproj::{kepler_initial, kepler_system, make_standard_projection, evaluate_integrals,
//!     projection_step, KeplerParams, OneStepMethod, StandardVersion};
//!
//! let system = kepler_system::<f64>().select_integrals(&[0, 1, 2]).unwrap();
//! let x0 = kepler_initial::<f64>(KeplerParams::new(0.6).unwrap());
//! let spec = make_standard_projection(OneStepMethod::rk4(), StandardVersion::V1AtNew, 3);
//! let targets = evaluate_integrals(&system, &x0).unwrap();
//! let step = projection_step(&spec, &system, &x0, 0.1, &targets).unwrap();
//! let after = evaluate_integrals(&system, &step.x_new).unwrap();
//! assert!((after[0] - targets[0]).abs() < 1e-12);
//! ```

pub mod dense;
pub mod dg_method;
pub mod discrete_gradient;
pub mod error;
pub mod integrator;
pub mod model;
pub mod problems;
pub mod projection;
pub mod rk;
pub mod scalar;
pub mod solver;

pub use dense::{
    cramer_solve, determinant, oblique_coefficients, oblique_projector, projected_vector_field, solve_square,
    wedge_contract, Lu, Matrix,
};
pub use dg_method::{
    cramer_reduction, dg_step_multi, dg_step_single, dg_step_two_integrals, single_skew_matrix,
    two_integral_contraction, DgSpec, SkewTensor,
};
pub use discrete_gradient::{discrete_gradient, verify_discrete_gradient, DiscreteGradientKind};
pub use error::{Error, Result};
pub use integrator::Integrator;
pub use model::{check_gradient, evaluate_integrals, Integral, SolverSettings, SolverStrategy, State, System};
pub use problems::{harmonic_oscillator, kepler_initial, kepler_system, KeplerParams};
pub use projection::{
    make_dahlby, make_standard_projection, make_symmetric_projection, previous_step_targets, projection_step,
    single_integral_step_dg_form, ConserveAgainst, DahlbyVariant, DirectionRule, Formulation, IncrementRule,
    ProjectionSpec, Scheme, StandardVersion, StepOutcome,
};
pub use rk::{rk4_tableau, rk6_tableau, rk_step, Tableau, Underlying, UnderlyingKind};
pub use scalar::{max_abs_diff, Scalar};
pub use solver::{fixed_point_solve, newton_solve, Report};

pub type StateVector = State<f64>;
pub type DenseMatrix = Matrix<f64>;
pub type OdeSystem = System<f64>;
pub type FirstIntegral = Integral<f64>;
pub type ButcherTableau = Tableau<f64>;
pub type OneStepMethod = Underlying<f64>;
pub type SolverConfig = SolverSettings<f64>;
pub type SolveReport = Report<f64>;
pub type MethodSpec = ProjectionSpec<f64>;
pub type DgMethodSpec = DgSpec<f64>;
pub type StepResult = StepOutcome<f64>;
pub type OdeSystemF32 = System<f32>;
pub type MethodSpecF32 = ProjectionSpec<f32>;
