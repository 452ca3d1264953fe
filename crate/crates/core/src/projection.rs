//! Linear projection integrators.
//!
//! One step solves `x' = x + h f̃(x,x',h) + A(x,x',h) λ` together with
//! `I_m(x') = target_m`, where the columns of `A` are the projection
//! directions `ĩ_m`. The same map can be computed in three ways:
//!
//! * [`Formulation::LambdaForm`]: joint solve for `(x', λ)`;
//! * [`Formulation::ProjectorForm`]: `x' = x + h P f̃` with the oblique
//!   projector `P = I − A(BᵀA)⁻¹Bᵀ`, `B` built from discrete gradients;
//! * [`Formulation::DiscreteGradientForm`]: the skew-symmetric discrete
//!   gradient update (the `S̃ ī` matrix form for one integral, the wedge
//!   form through determinant ratios for several).
//!
//! When the targets differ from `I(x)` (drift correction against the initial
//! values) the projector and discrete-gradient forms carry the extra term
//! `A (BᵀA)⁻¹ (target − I(x))`, which keeps all three forms the same map.

use crate::dense::{cramer_solve, projected_vector_field, solve_square, Matrix};
use crate::dg_method::{cramer_reduction, single_skew_update};
use crate::discrete_gradient::{discrete_gradient, DiscreteGradientKind};
use crate::error::{check_dim, Error, Result};
use crate::model::{evaluate_integrals, SolverSettings, State, System};
use crate::rk::Underlying;
use crate::scalar::{axpy, dot, midpoint, Scalar};
use crate::solver::{solve_implicit, Implicit, Report};

/// How the projection direction `ĩ_m(x, x', h)` is formed from `∇I_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionRule {
    /// `∇I_m(x')`
    AtNew,
    /// `∇I_m(x)`
    AtOld,
    /// `∇I_m(y)` with `y = Φ_h(x)` frozen for the step.
    AtPredictor,
    /// `½(∇I_m(x) + ∇I_m(x'))`
    Midpoint,
    /// A discrete gradient `ī_m(x, x')`.
    FromDiscreteGradient(DiscreteGradientKind),
}

/// How the consistent approximation `f̃(x, x', h)` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementRule {
    /// `(Φ_h(x) − x)/h`, computed once per step.
    Predictor,
    /// `g̃(x, x', h)` re-evaluated at the current `x'` (differs from
    /// `Predictor` only for implicit underlying methods).
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    LambdaForm,
    ProjectorForm(DiscreteGradientKind),
    DiscreteGradientForm(DiscreteGradientKind),
}

/// Structure of the step equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `x' = x + h f̃ + Aλ`.
    Linear,
    /// Symmetric projection: perturb, step with a symmetric method, perturb
    /// again, `y = x + ½A''λ, z = y + h g̃(y,z,h), x' = z + ½A'λ`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConserveAgainst {
    /// `I_m(x') = I_m(x₀)`; prevents round-off drift.
    InitialValue,
    /// `I_m(x') = I_m(x)`.
    PreviousStep,
}

/// Full description of a projection integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpec<T> {
    pub underlying: Underlying<T>,
    pub increment: IncrementRule,
    pub scheme: Scheme,
    pub directions: Vec<DirectionRule>,
    pub formulation: Formulation,
    pub conserve_against: ConserveAgainst,
    pub solver: SolverSettings<T>,
}

impl<T: Scalar> ProjectionSpec<T> {
    /// Linear scheme in λ-form with predictor increment, conserving initial values.
    pub fn new(underlying: Underlying<T>, directions: Vec<DirectionRule>) -> Self {
        ProjectionSpec {
            underlying,
            increment: IncrementRule::Predictor,
            scheme: Scheme::Linear,
            directions,
            formulation: Formulation::LambdaForm,
            conserve_against: ConserveAgainst::InitialValue,
            solver: SolverSettings::default(),
        }
    }

    pub fn with_formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = formulation;
        self
    }

    pub fn with_solver(mut self, solver: SolverSettings<T>) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_conserve_against(mut self, c: ConserveAgainst) -> Self {
        self.conserve_against = c;
        self
    }

    pub fn num_integrals(&self) -> usize {
        self.directions.len()
    }
}

/// Outcome of one integrator step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T> {
    pub x_new: State<T>,
    pub lambda: Vec<T>,
    pub solver_report: Report<T>,
    /// All projection directions vanished; the unprojected step was returned.
    pub degenerate: bool,
}

impl<T: Scalar> StepOutcome<T> {
    pub(crate) fn new(x_new: Vec<T>, lambda: Vec<T>, solver_report: Report<T>) -> Result<Self> {
        Ok(StepOutcome {
            x_new: State::new(x_new)?,
            lambda,
            solver_report,
            degenerate: false,
        })
    }
}

/// Per-step quantities shared by the projection and discrete-gradient steps.
pub(crate) struct StepContext<'a, T> {
    pub system: &'a System<T>,
    pub underlying: &'a Underlying<T>,
    pub solver: &'a SolverSettings<T>,
    pub x: &'a [T],
    pub h: T,
    /// `f̃` of the underlying method at `x`, so that `y = x + h f̃`.
    pub predictor_increment: Vec<T>,
    pub predictor: Vec<T>,
}

impl<'a, T: Scalar> StepContext<'a, T> {
    pub fn new(
        system: &'a System<T>,
        underlying: &'a Underlying<T>,
        solver: &'a SolverSettings<T>,
        x: &'a [T],
        h: T,
    ) -> Result<Self> {
        check_dim(system.dimension(), x.len())?;
        solver.validate()?;
        let f = |z: &[T]| system.vector_field(z);
        let predictor_increment = underlying.increment(&f, x, h, solver)?;
        let predictor = axpy(x, h, &predictor_increment);
        Ok(StepContext {
            system,
            underlying,
            solver,
            x,
            h,
            predictor_increment,
            predictor,
        })
    }

    pub fn increment(&self, rule: IncrementRule, x_new: &[T]) -> Result<Vec<T>> {
        match rule {
            IncrementRule::Predictor => Ok(self.predictor_increment.clone()),
            IncrementRule::Implicit => {
                let f = |z: &[T]| self.system.vector_field(z);
                self.underlying.g_tilde(&f, self.x, x_new, self.h, self.solver)
            }
        }
    }

    pub fn direction(&self, rule: DirectionRule, m: usize, x_new: &[T]) -> Result<Vec<T>> {
        let integral = &self.system.integrals()[m];
        match rule {
            DirectionRule::AtNew => integral.gradient(x_new),
            DirectionRule::AtOld => integral.gradient(self.x),
            DirectionRule::AtPredictor => integral.gradient(&self.predictor),
            DirectionRule::Midpoint => Ok(midpoint(&integral.gradient(self.x)?, &integral.gradient(x_new)?)),
            DirectionRule::FromDiscreteGradient(kind) => discrete_gradient(kind, integral, self.x, x_new),
        }
    }

    /// `d × M` matrix of directions, one column per integral.
    pub fn directions(&self, rules: &[DirectionRule], x_new: &[T]) -> Result<Matrix<T>> {
        let cols = rules
            .iter()
            .enumerate()
            .map(|(m, &r)| self.direction(r, m, x_new))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(&cols)
    }

    /// `d × M` matrix of discrete gradients `ī_m(x, x')`.
    pub fn discrete_gradients(&self, kinds: &[DiscreteGradientKind], x_new: &[T]) -> Result<Matrix<T>> {
        let cols = kinds
            .iter()
            .zip(self.system.integrals())
            .map(|(&k, integral)| discrete_gradient(k, integral, self.x, x_new))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(&cols)
    }
}

fn validate(spec_m: usize, system: &System<impl Scalar>, targets_len: usize) -> Result<()> {
    let m = system.num_integrals();
    check_dim(m, spec_m)?;
    check_dim(m, targets_len)?;
    if m == 0 || m > system.dimension() {
        return Err(Error::InvalidConfig(format!(
            "cannot preserve {m} integrals in dimension {}",
            system.dimension()
        )));
    }
    Ok(())
}

/// Target values `I_m(x)` for a step conserving against the previous state.
pub fn previous_step_targets<T: Scalar>(system: &System<T>, x: &[T]) -> Result<Vec<T>> {
    evaluate_integrals(system, x)
}

/// One step of a linear projection method.
///
/// `targets` are the levels `I_m(x')` must hit (`I_m(x₀)` or `I_m(x)`
/// depending on [`ConserveAgainst`]); the system's integral list is the list
/// being preserved and must match `spec.directions` in length.
pub fn projection_step<T: Scalar>(
    spec: &ProjectionSpec<T>,
    system: &System<T>,
    x: &[T],
    h: T,
    targets: &[T],
) -> Result<StepOutcome<T>> {
    validate(spec.directions.len(), system, targets.len())?;
    let ctx = StepContext::new(system, &spec.underlying, &spec.solver, x, h)?;

    let a0 = ctx.directions(&spec.directions, &ctx.predictor)?;
    if a0.max_abs() < T::lit(1e-14) {
        return Ok(StepOutcome {
            x_new: State::new(ctx.predictor.clone())?,
            lambda: vec![T::zero(); targets.len()],
            solver_report: Report::trivial(ctx.predictor.clone()),
            degenerate: true,
        });
    }

    let current = evaluate_integrals(system, x)?;
    let drift: Vec<T> = targets.iter().zip(&current).map(|(&t, &c)| t - c).collect();

    match spec.scheme {
        Scheme::Linear => match spec.formulation {
            Formulation::LambdaForm => lambda_form(&ctx, spec, targets),
            Formulation::ProjectorForm(kind) => projector_form(&ctx, spec, kind, &drift),
            Formulation::DiscreteGradientForm(kind) => dg_form(&ctx, spec, kind, &drift),
        },
        Scheme::Symmetric => symmetric_form(&ctx, spec, targets),
    }
}

fn split<T: Scalar>(z: &[T], d: usize) -> (&[T], &[T]) {
    z.split_at(d)
}

fn lambda_form<T: Scalar>(ctx: &StepContext<'_, T>, spec: &ProjectionSpec<T>, targets: &[T]) -> Result<StepOutcome<T>> {
    let d = ctx.x.len();
    let residual = |z: &[T]| -> Result<Vec<T>> {
        let (xn, lambda) = split(z, d);
        let ft = ctx.increment(spec.increment, xn)?;
        let a = ctx.directions(&spec.directions, xn)?;
        let al = a.matvec(lambda)?;
        let mut r: Vec<T> = (0..d).map(|i| xn[i] - ctx.x[i] - ctx.h * ft[i] - al[i]).collect();
        for (integral, &t) in ctx.system.integrals().iter().zip(targets) {
            r.push(integral.value(xn)? - t);
        }
        Ok(r)
    };
    let mut z0 = ctx.predictor.clone();
    z0.extend(std::iter::repeat_n(T::zero(), targets.len()));
    let report = solve_implicit(Implicit::Residual(Box::new(residual)), &z0, &spec.solver)?;
    let (xn, lambda) = split(&report.solution, d);
    StepOutcome::new(xn.to_vec(), lambda.to_vec(), report)
}

fn projector_form<T: Scalar>(
    ctx: &StepContext<'_, T>,
    spec: &ProjectionSpec<T>,
    kind: DiscreteGradientKind,
    drift: &[T],
) -> Result<StepOutcome<T>> {
    let kinds = vec![kind; drift.len()];
    let no_drift = drift.iter().all(|v| *v == T::zero());
    // x' = x + h P f̃ + A (BᵀA)⁻¹ Δ
    let map = |xn: &[T]| -> Result<Vec<T>> {
        let ft = ctx.increment(spec.increment, xn)?;
        let a = ctx.directions(&spec.directions, xn)?;
        let b = ctx.discrete_gradients(&kinds, xn)?;
        let pf = projected_vector_field(&ft, &a, &b).map_err(to_complementarity)?;
        let mut out = axpy(ctx.x, ctx.h, &pf);
        if !no_drift {
            let bta = b.transpose().matmul(&a)?;
            let c = solve_square(&bta, drift).map_err(to_complementarity)?;
            let ac = a.matvec(&c)?;
            out = axpy(&out, T::one(), &ac);
        }
        Ok(out)
    };
    let report = solve_implicit(Implicit::Map(Box::new(map)), &ctx.predictor, &spec.solver)?;
    let xn = report.solution.clone();
    // λ = (BᵀA)⁻¹ (Δ − h Bᵀ f̃)
    let ft = ctx.increment(spec.increment, &xn)?;
    let a = ctx.directions(&spec.directions, &xn)?;
    let b = ctx.discrete_gradients(&kinds, &xn)?;
    let rhs: Vec<T> = b
        .tr_matvec(&ft)?
        .iter()
        .zip(drift)
        .map(|(&bf, &dm)| dm - ctx.h * bf)
        .collect();
    let lambda = solve_square(&b.transpose().matmul(&a)?, &rhs).map_err(to_complementarity)?;
    StepOutcome::new(xn, lambda, report)
}

fn dg_form<T: Scalar>(
    ctx: &StepContext<'_, T>,
    spec: &ProjectionSpec<T>,
    kind: DiscreteGradientKind,
    drift: &[T],
) -> Result<StepOutcome<T>> {
    let kinds = vec![kind; drift.len()];
    let single = drift.len() == 1;
    // update = h S̃ ī (+ drift term), with λ alongside
    let update = |xn: &[T]| -> Result<(Vec<T>, Vec<T>)> {
        let ft = ctx.increment(spec.increment, xn)?;
        let a = ctx.directions(&spec.directions, xn)?;
        let b = ctx.discrete_gradients(&kinds, xn)?;
        if single {
            let it = a.column(0);
            let ib = b.column(0);
            let denom = dot(&it, &ib);
            let s_ibar = single_skew_update(&ft, &it, &ib, &it, &ib)?;
            let coef = drift[0] / denom;
            let step: Vec<T> = (0..ft.len()).map(|i| ctx.h * s_ibar[i] + coef * it[i]).collect();
            let lambda = vec![(drift[0] - ctx.h * dot(&ft, &ib)) / denom];
            Ok((step, lambda))
        } else {
            let pf = cramer_reduction(&ft, &a, &b)?;
            let bta = b.transpose().matmul(&a)?;
            let dc = cramer_solve(&bta, drift).map_err(to_complementarity)?;
            let fc = cramer_solve(&bta, &b.tr_matvec(&ft)?).map_err(to_complementarity)?;
            let adc = a.matvec(&dc)?;
            let step: Vec<T> = (0..ft.len()).map(|i| ctx.h * pf[i] + adc[i]).collect();
            let lambda = dc.iter().zip(&fc).map(|(&p, &q)| p - ctx.h * q).collect();
            Ok((step, lambda))
        }
    };
    let map = |xn: &[T]| -> Result<Vec<T>> {
        let (step, _) = update(xn)?;
        Ok(axpy(ctx.x, T::one(), &step))
    };
    let report = solve_implicit(Implicit::Map(Box::new(map)), &ctx.predictor, &spec.solver)?;
    let xn = report.solution.clone();
    let (_, lambda) = update(&xn)?;
    StepOutcome::new(xn, lambda, report)
}

fn symmetric_form<T: Scalar>(
    ctx: &StepContext<'_, T>,
    spec: &ProjectionSpec<T>,
    targets: &[T],
) -> Result<StepOutcome<T>> {
    if spec.directions.iter().any(|&r| r != DirectionRule::Midpoint) {
        return Err(Error::InvalidConfig(
            "symmetric projection uses midpoint directions".into(),
        ));
    }
    let d = ctx.x.len();
    let integrals = ctx.system.integrals();
    let grads_old = integrals
        .iter()
        .map(|i| i.gradient(ctx.x))
        .collect::<Result<Vec<_>>>()?;
    let a_old = Matrix::from_columns(&grads_old)?;
    let half = T::lit(0.5);
    let f = |z: &[T]| ctx.system.vector_field(z);
    let residual = |z: &[T]| -> Result<Vec<T>> {
        let (xn, lambda) = split(z, d);
        let grads_new = integrals.iter().map(|i| i.gradient(xn)).collect::<Result<Vec<_>>>()?;
        let a_new = Matrix::from_columns(&grads_new)?;
        let shift_old = a_old.matvec(lambda)?;
        let shift_new = a_new.matvec(lambda)?;
        let y = axpy(ctx.x, half, &shift_old);
        let zz = axpy(xn, -half, &shift_new);
        let g = spec.underlying.g_tilde(&f, &y, &zz, ctx.h, ctx.solver)?;
        let mut r: Vec<T> = (0..d)
            .map(|i| xn[i] - ctx.x[i] - ctx.h * g[i] - half * (shift_old[i] + shift_new[i]))
            .collect();
        for (integral, &t) in integrals.iter().zip(targets) {
            r.push(integral.value(xn)? - t);
        }
        Ok(r)
    };
    let mut z0 = ctx.predictor.clone();
    z0.extend(std::iter::repeat_n(T::zero(), targets.len()));
    let report = solve_implicit(Implicit::Residual(Box::new(residual)), &z0, &spec.solver)?;
    let (xn, lambda) = split(&report.solution, d);
    StepOutcome::new(xn.to_vec(), lambda.to_vec(), report)
}

fn to_complementarity(e: Error) -> Error {
    match e {
        Error::SingularMatrix { pivot } => Error::ComplementarityFailure { pivot },
        other => other,
    }
}

/// Single-integral step in skew discrete-gradient form, `x' = x + h S̃ ī`
/// with `S̃ = (f̃ĩᵀ − ĩf̃ᵀ)/(ĩ·ī)`; conserves `I(x)`.
pub fn single_integral_step_dg_form<T: Scalar>(
    spec: &ProjectionSpec<T>,
    system: &System<T>,
    x: &[T],
    h: T,
    dg: DiscreteGradientKind,
) -> Result<StepOutcome<T>> {
    if spec.directions.len() != 1 || system.num_integrals() != 1 {
        return Err(Error::InvalidConfig(
            "single-integral discrete gradient form needs exactly one integral".into(),
        ));
    }
    let ctx = StepContext::new(system, &spec.underlying, &spec.solver, x, h)?;
    crate::dg_method::single_dg_solve(&ctx, spec.increment, spec.directions[0], dg, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardVersion {
    /// Directions at the new point, `∇I_m(x')`.
    V1AtNew,
    /// Directions at the predictor, `∇I_m(Φ_h(x))`.
    V2AtPredictor,
}

/// Standard (non-symmetric) projection: step with the underlying method, then
/// project linearly back onto the level set.
pub fn make_standard_projection<T: Scalar>(
    underlying: Underlying<T>,
    version: StandardVersion,
    num_integrals: usize,
) -> ProjectionSpec<T> {
    let rule = match version {
        StandardVersion::V1AtNew => DirectionRule::AtNew,
        StandardVersion::V2AtPredictor => DirectionRule::AtPredictor,
    };
    ProjectionSpec::new(underlying, vec![rule; num_integrals])
}

/// Symmetric projection around a symmetric underlying method.
pub fn make_symmetric_projection<T: Scalar>(
    symmetric_underlying: Underlying<T>,
    num_integrals: usize,
) -> Result<ProjectionSpec<T>> {
    if !symmetric_underlying.is_symmetric() {
        return Err(Error::InvalidConfig(
            "symmetric projection requires a symmetric underlying method".into(),
        ));
    }
    let mut spec = ProjectionSpec::new(symmetric_underlying, vec![DirectionRule::Midpoint; num_integrals]);
    spec.scheme = Scheme::Symmetric;
    spec.increment = IncrementRule::Implicit;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DahlbyVariant {
    /// `x' = x + P (Φ_h(x) − x)`
    PredictorDifference,
    /// `x' = x + h P g̃(x, x', h)`
    ProjectedRhs,
}

/// Orthogonal-projection methods built on a discrete gradient: `A = B = [ī_m]`.
pub fn make_dahlby<T: Scalar>(
    variant: DahlbyVariant,
    underlying: Underlying<T>,
    dg: DiscreteGradientKind,
    num_integrals: usize,
) -> ProjectionSpec<T> {
    let mut spec = ProjectionSpec::new(underlying, vec![DirectionRule::FromDiscreteGradient(dg); num_integrals])
        .with_formulation(Formulation::ProjectorForm(dg));
    spec.increment = match variant {
        DahlbyVariant::PredictorDifference => IncrementRule::Predictor,
        DahlbyVariant::ProjectedRhs => IncrementRule::Implicit,
    };
    spec
}
