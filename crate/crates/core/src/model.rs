//! ODE systems, first integrals and the per-step solver configuration.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// A finite, fixed-dimension state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T>(Vec<T>);

impl<T: Scalar> State<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(State(entries))
    }

    pub fn from_f64(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&v| T::lit(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for State<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> AsRef<[T]> for State<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

pub type FieldFn<T> = Arc<dyn Fn(&[T]) -> Result<Vec<T>> + Send + Sync>;
pub type ValueFn<T> = Arc<dyn Fn(&[T]) -> Result<T> + Send + Sync>;

/// A conserved scalar quantity together with its analytic gradient.
#[derive(Clone)]
pub struct Integral<T> {
    name: String,
    value: ValueFn<T>,
    gradient: FieldFn<T>,
}

impl<T: Scalar> Integral<T> {
    pub fn new<V, G>(name: impl Into<String>, value: V, gradient: G) -> Self
    where
        V: Fn(&[T]) -> Result<T> + Send + Sync + 'static,
        G: Fn(&[T]) -> Result<Vec<T>> + Send + Sync + 'static,
    {
        Integral {
            name: name.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        let g = (self.gradient)(x)?;
        check_dim(x.len(), g.len())?;
        Ok(g)
    }
}

impl<T> fmt::Debug for Integral<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integral").field("name", &self.name).finish()
    }
}

/// Autonomous ODE `x' = f(x)` with an ordered list of first integrals.
#[derive(Clone)]
pub struct System<T> {
    dimension: usize,
    vector_field: FieldFn<T>,
    integrals: Vec<Integral<T>>,
}

impl<T: Scalar> System<T> {
    pub fn new<F>(dimension: usize, vector_field: F, integrals: Vec<Integral<T>>) -> Result<Self>
    where
        F: Fn(&[T]) -> Result<Vec<T>> + Send + Sync + 'static,
    {
        if dimension == 0 {
            return Err(Error::InvalidConfig("system dimension must be positive".into()));
        }
        Ok(System {
            dimension,
            vector_field: Arc::new(vector_field),
            integrals,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn integrals(&self) -> &[Integral<T>] {
        &self.integrals
    }

    pub fn num_integrals(&self) -> usize {
        self.integrals.len()
    }

    pub fn vector_field(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.dimension, x.len())?;
        let f = (self.vector_field)(x)?;
        check_dim(self.dimension, f.len())?;
        Ok(f)
    }

    /// Copy of the system that keeps only the listed integrals (0-based, in the given order).
    pub fn select_integrals(&self, indices: &[usize]) -> Result<Self> {
        let integrals = indices
            .iter()
            .map(|&i| {
                self.integrals.get(i).cloned().ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "integral index {i} out of range (system has {})",
                        self.integrals.len()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(System {
            dimension: self.dimension,
            vector_field: Arc::clone(&self.vector_field),
            integrals,
        })
    }
}

impl<T> fmt::Debug for System<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("System")
            .field("dimension", &self.dimension)
            .field("integrals", &self.integrals)
            .finish()
    }
}

/// `[I_1(x), ..., I_M(x)]` in integral order.
pub fn evaluate_integrals<T: Scalar>(system: &System<T>, x: &[T]) -> Result<Vec<T>> {
    check_dim(system.dimension(), x.len())?;
    system.integrals().iter().map(|i| i.value(x)).collect()
}

/// Max-norm deviation between the analytic gradient and central differences with step `eps`.
pub fn check_gradient<T: Scalar>(integral: &Integral<T>, x: &[T], eps: T) -> Result<T> {
    let analytic = integral.gradient(x)?;
    let two = T::lit(2.0);
    let mut probe = x.to_vec();
    let mut worst = T::zero();
    for k in 0..x.len() {
        probe[k] = x[k] + eps;
        let plus = integral.value(&probe)?;
        probe[k] = x[k] - eps;
        let minus = integral.value(&probe)?;
        probe[k] = x[k];
        let fd = (plus - minus) / (two * eps);
        worst = worst.max((fd - analytic[k]).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStrategy {
    FixedPoint,
    NewtonFiniteDifference,
}

/// Settings for the per-step implicit solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    pub tolerance: T,
    pub max_iterations: usize,
    pub strategy: SolverStrategy,
    pub fd_epsilon: T,
}

impl<T: Scalar> SolverSettings<T> {
    pub fn new(tolerance: T, max_iterations: usize, strategy: SolverStrategy, fd_epsilon: T) -> Result<Self> {
        let cfg = SolverSettings {
            tolerance,
            max_iterations,
            strategy,
            fd_epsilon,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= T::zero() {
            return Err(Error::InvalidConfig("solver tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.fd_epsilon.is_nan() || self.fd_epsilon <= T::zero() {
            return Err(Error::InvalidConfig("fd_epsilon must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_strategy(mut self, strategy: SolverStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }
}

impl<T: Scalar> Default for SolverSettings<T> {
    /// Newton with a forward-difference Jacobian, tolerance 1e-14 (floored at
    /// ten machine epsilons for narrow types), 50 iterations, FD step 1e-7.
    fn default() -> Self {
        SolverSettings {
            tolerance: T::lit(1e-14).max(T::epsilon() * T::lit(10.0)),
            max_iterations: 50,
            strategy: SolverStrategy::NewtonFiniteDifference,
            fd_epsilon: T::lit(1e-7).max(T::epsilon().sqrt()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_norm_sq() -> Integral<f64> {
        Integral::new(
            "half_norm_sq",
            |x: &[f64]| Ok(0.5 * x.iter().map(|v| v * v).sum::<f64>()),
            |x: &[f64]| Ok(x.to_vec()),
        )
    }

    #[test]
    fn state_rejects_non_finite() {
        assert_eq!(State::new(vec![1.0, f64::NAN]), Err(Error::NonFinite { index: 1 }));
        assert!(State::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(State::<f64>::from_f64(&[1.0, 2.0]).unwrap().dim(), 2);
    }

    #[test]
    fn no_integrals_gives_empty_values() {
        let sys = System::new(2, |x: &[f64]| Ok(vec![x[1], -x[0]]), vec![]).unwrap();
        assert!(evaluate_integrals(&sys, &[0.3, 0.7]).unwrap().is_empty());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = System::new(2, |x: &[f64]| Ok(vec![x[1], -x[0]]), vec![half_norm_sq()]).unwrap();
        assert_eq!(
            evaluate_integrals(&sys, &[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
        assert!(sys.vector_field(&[1.0]).is_err());
    }

    #[test]
    fn quadratic_gradient_check_is_tight() {
        let dev = check_gradient(&half_norm_sq(), &[1.0, 2.0, 3.0], 1e-6).unwrap();
        assert!(dev <= 1e-8, "deviation {dev}");
    }

    #[test]
    fn select_integrals_rejects_out_of_range() {
        let sys = System::new(2, |x: &[f64]| Ok(vec![x[1], -x[0]]), vec![half_norm_sq()]).unwrap();
        assert_eq!(sys.select_integrals(&[0]).unwrap().num_integrals(), 1);
        assert!(sys.select_integrals(&[1]).is_err());
    }

    #[test]
    fn solver_settings_validation() {
        let d = SolverSettings::<f64>::default();
        assert_eq!(d.tolerance, 1e-14);
        assert_eq!(d.max_iterations, 50);
        assert_eq!(d.fd_epsilon, 1e-7);
        assert_eq!(d.strategy, SolverStrategy::NewtonFiniteDifference);
        assert!(SolverSettings::new(0.0, 5, SolverStrategy::FixedPoint, 1e-7).is_err());
        assert!(SolverSettings::new(1e-10, 0, SolverStrategy::FixedPoint, 1e-7).is_err());
        assert!(SolverSettings::new(1e-10, 5, SolverStrategy::FixedPoint, -1.0).is_err());
        let f32_default = SolverSettings::<f32>::default();
        assert!(f32_default.tolerance >= 10.0 * f32::EPSILON);
    }
}
