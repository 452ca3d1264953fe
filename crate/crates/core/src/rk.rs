//! Underlying (non-conservative) one-step methods.
//!
//! Every method is exposed through its increment `f̃` with `Φ_h(x) = x + h f̃`,
//! which stays well defined at `h = 0` (where `f̃ = f(x)`).

use crate::error::{Error, Result};
use crate::model::SolverSettings;
use crate::scalar::{axpy, midpoint, Scalar};
use crate::solver::{solve_implicit, Implicit};

/// Butcher coefficients for an autonomous Runge–Kutta method (nodes unused).
#[derive(Debug, Clone, PartialEq)]
pub struct Tableau<T> {
    stages: usize,
    a: Vec<Vec<T>>,
    b: Vec<T>,
    is_explicit: bool,
}

impl<T: Scalar> Tableau<T> {
    pub fn new(a: Vec<Vec<T>>, b: Vec<T>) -> Result<Self> {
        let stages = b.len();
        if stages == 0 || a.len() != stages || a.iter().any(|row| row.len() != stages) {
            return Err(Error::InvalidConfig("tableau must be s×s with s weights".into()));
        }
        let sum = b.iter().fold(T::zero(), |acc, &w| acc + w);
        if (sum - T::one()).abs() > T::rel_threshold(1e-14) {
            return Err(Error::InvalidConfig(format!(
                "tableau weights sum to {sum}, expected 1"
            )));
        }
        let is_explicit = (0..stages).all(|i| (i..stages).all(|j| a[i][j] == T::zero()));
        Ok(Tableau {
            stages,
            a,
            b,
            is_explicit,
        })
    }

    fn from_rational(rows: &[&[(i64, i64)]], weights: &[(i64, i64)]) -> Self {
        let s = weights.len();
        let q = |(n, d): (i64, i64)| T::lit(n as f64) / T::lit(d as f64);
        let mut a = vec![vec![T::zero(); s]; s];
        for (i, row) in rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                a[i + 1][j] = q(c);
            }
        }
        let b = weights.iter().map(|&c| q(c)).collect();
        Self::new(a, b).expect("built-in tableau is consistent")
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn a(&self) -> &[Vec<T>] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn is_explicit(&self) -> bool {
        self.is_explicit
    }
}

/// Classical four-stage, fourth-order Runge–Kutta.
pub fn rk4_tableau<T: Scalar>() -> Tableau<T> {
    Tableau::from_rational(
        &[&[(1, 2)], &[(0, 1), (1, 2)], &[(0, 1), (0, 1), (1, 1)]],
        &[(1, 6), (1, 3), (1, 3), (1, 6)],
    )
}

/// Seven-stage explicit Runge–Kutta of order six.
pub fn rk6_tableau<T: Scalar>() -> Tableau<T> {
    Tableau::from_rational(
        &[
            &[(1, 3)],
            &[(0, 1), (2, 3)],
            &[(1, 12), (1, 3), (-1, 12)],
            &[(25, 48), (-55, 24), (35, 48), (15, 8)],
            &[(3, 20), (-11, 24), (-1, 8), (1, 2), (1, 10)],
            &[(-261, 260), (33, 13), (43, 156), (-118, 39), (32, 195), (80, 39)],
        ],
        &[(13, 200), (0, 1), (11, 40), (11, 40), (4, 25), (4, 25), (13, 200)],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnderlyingKind<T> {
    ExplicitRk(Tableau<T>),
    ImplicitMidpoint,
    ExplicitEuler,
}

/// A one-step method `x ↦ Φ_h(x)` with its nominal order.
#[derive(Debug, Clone, PartialEq)]
pub struct Underlying<T> {
    pub kind: UnderlyingKind<T>,
    pub order: u32,
}

impl<T: Scalar> Underlying<T> {
    pub fn rk4() -> Self {
        Underlying {
            kind: UnderlyingKind::ExplicitRk(rk4_tableau()),
            order: 4,
        }
    }

    pub fn rk6() -> Self {
        Underlying {
            kind: UnderlyingKind::ExplicitRk(rk6_tableau()),
            order: 6,
        }
    }

    pub fn implicit_midpoint() -> Self {
        Underlying {
            kind: UnderlyingKind::ImplicitMidpoint,
            order: 2,
        }
    }

    pub fn explicit_euler() -> Self {
        Underlying {
            kind: UnderlyingKind::ExplicitEuler,
            order: 1,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.kind, UnderlyingKind::ImplicitMidpoint)
    }

    pub fn is_explicit(&self) -> bool {
        match &self.kind {
            UnderlyingKind::ExplicitRk(t) => t.is_explicit(),
            UnderlyingKind::ImplicitMidpoint => false,
            UnderlyingKind::ExplicitEuler => true,
        }
    }

    /// `f̃ = (Φ_h(x) − x) / h`, evaluated without the division.
    pub fn increment<F>(&self, f: &F, x: &[T], h: T, solver: &SolverSettings<T>) -> Result<Vec<T>>
    where
        F: Fn(&[T]) -> Result<Vec<T>>,
    {
        match &self.kind {
            UnderlyingKind::ExplicitEuler => f(x),
            UnderlyingKind::ExplicitRk(tab) if tab.is_explicit() => explicit_rk_increment(tab, f, x, h),
            UnderlyingKind::ExplicitRk(_) => Err(Error::InvalidConfig(
                "implicit Runge–Kutta tableaux are not supported".into(),
            )),
            UnderlyingKind::ImplicitMidpoint => {
                // stage unknown k = f(x + h/2 k)
                let half_h = h * T::lit(0.5);
                let k0 = f(x)?;
                let report = solve_implicit(Implicit::Map(Box::new(|k: &[T]| f(&axpy(x, half_h, k)))), &k0, solver)?;
                Ok(report.solution)
            }
        }
    }

    /// `g̃(x, x', h)` such that `x' = x + h g̃(x, x', h)` is this method.
    ///
    /// Explicit methods ignore `x_new`.
    pub fn g_tilde<F>(&self, f: &F, x: &[T], x_new: &[T], h: T, solver: &SolverSettings<T>) -> Result<Vec<T>>
    where
        F: Fn(&[T]) -> Result<Vec<T>>,
    {
        match &self.kind {
            UnderlyingKind::ImplicitMidpoint => f(&midpoint(x, x_new)),
            _ => self.increment(f, x, h, solver),
        }
    }
}

fn explicit_rk_increment<T, F>(tab: &Tableau<T>, f: &F, x: &[T], h: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let mut k: Vec<Vec<T>> = Vec::with_capacity(tab.stages());
    for i in 0..tab.stages() {
        let mut xi = x.to_vec();
        for (j, kj) in k.iter().enumerate() {
            let aij = tab.a()[i][j];
            if aij != T::zero() {
                for (xe, &ke) in xi.iter_mut().zip(kj) {
                    *xe = *xe + h * aij * ke;
                }
            }
        }
        k.push(f(&xi)?);
    }
    let mut out = vec![T::zero(); x.len()];
    for (bi, ki) in tab.b().iter().zip(&k) {
        for (o, &v) in out.iter_mut().zip(ki) {
            *o = *o + *bi * v;
        }
    }
    Ok(out)
}

/// One step `y = x + h f̃` of the underlying method.
pub fn rk_step<T, F>(method: &Underlying<T>, f: &F, x: &[T], h: T, solver: &SolverSettings<T>) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let inc = method.increment(f, x, h, solver)?;
    Ok(axpy(x, h, &inc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn growth(x: &[f64]) -> Result<Vec<f64>> {
        Ok(x.to_vec())
    }

    #[test]
    fn rk4_coefficients() {
        let t = rk4_tableau::<f64>();
        assert_eq!(t.stages(), 4);
        assert_eq!(t.b(), &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
        assert_eq!(t.a()[1][0], 0.5);
        assert_eq!(t.a()[2][1], 0.5);
        assert_eq!(t.a()[3][2], 1.0);
        assert_eq!(t.a()[2][0], 0.0);
        assert!(t.is_explicit());
        assert!((t.b().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rk6_coefficients() {
        let t = rk6_tableau::<f64>();
        assert_eq!(t.stages(), 7);
        assert_eq!(t.b()[0], 13.0 / 200.0);
        assert_eq!(t.b()[1], 0.0);
        assert_eq!(t.a()[1][0], 1.0 / 3.0);
        assert_eq!(t.a()[2][1], 2.0 / 3.0);
        assert_eq!(t.a()[6][0], -261.0 / 260.0);
        assert_eq!(t.a()[6][5], 80.0 / 39.0);
        assert!(t.is_explicit());
        assert!((t.b().iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rk4_on_linear_growth_is_taylor_polynomial() {
        let solver = SolverSettings::default();
        for &h in &[0.1, 0.37, 1.0] {
            let y = rk_step(&Underlying::rk4(), &growth, &[1.0], h, &solver).unwrap()[0];
            let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
            assert!((y - taylor).abs() < 1e-15, "h={h}: {y} vs {taylor}");
        }
    }

    #[test]
    fn rk6_local_error_slope() {
        let solver = SolverSettings::default();
        let err = |h: f64| {
            let y = rk_step(&Underlying::rk6(), &growth, &[1.0], h, &solver).unwrap()[0];
            (y - h.exp()).abs()
        };
        let (e1, e2) = (err(0.4), err(0.2));
        let slope = (e1 / e2).log2();
        assert!((slope - 7.0).abs() < 0.3, "local slope {slope}");
        assert!(err(0.1) < 1e-9);
    }

    #[test]
    fn zero_step_is_identity() {
        let solver = SolverSettings::default();
        let x = [0.3, -0.7];
        let rot = |x: &[f64]| Ok(vec![x[1], -x[0]]);
        for m in [
            Underlying::rk4(),
            Underlying::rk6(),
            Underlying::implicit_midpoint(),
            Underlying::explicit_euler(),
        ] {
            assert_eq!(rk_step(&m, &rot, &x, 0.0, &solver).unwrap(), x.to_vec());
        }
    }

    #[test]
    fn implicit_midpoint_on_decay() {
        let solver = SolverSettings::default();
        let y = rk_step(
            &Underlying::implicit_midpoint(),
            &|x: &[f64]| Ok(vec![-x[0]]),
            &[1.0],
            0.1,
            &solver,
        )
        .unwrap()[0];
        assert!((y - 0.95 / 1.05).abs() < 1e-15);
    }

    #[test]
    fn implicit_midpoint_is_symmetric() {
        let solver = SolverSettings::default();
        let pend = |x: &[f64]| Ok(vec![x[1], -x[0].sin()]);
        let m = Underlying::implicit_midpoint();
        let x = [1.1, -0.4];
        let y = rk_step(&m, &pend, &x, 0.2, &solver).unwrap();
        let back = rk_step(&m, &pend, &y, -0.2, &solver).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() <= 10.0 * solver.tolerance, "{a} vs {b}");
        }
    }

    #[test]
    fn explicit_methods_never_solve() {
        // a solver config that would fail validation proves it is never consulted
        let bogus = SolverSettings {
            tolerance: -1.0,
            ..SolverSettings::default()
        };
        let calls = Cell::new(0);
        let f = |x: &[f64]| {
            calls.set(calls.get() + 1);
            Ok(vec![x[1], -x[0]])
        };
        rk_step(&Underlying::rk6(), &f, &[1.0, 0.0], 0.1, &bogus).unwrap();
        assert_eq!(calls.get(), 7);
        assert!(rk_step(&Underlying::implicit_midpoint(), &f, &[1.0, 0.0], 0.1, &bogus).is_err());
    }

    fn global_error_slopes(method: Underlying<f64>) -> Vec<f64> {
        let solver = SolverSettings::default();
        let errs: Vec<f64> = (0..6)
            .map(|k| {
                let n = 10 * (1 << k);
                let h = 1.0 / n as f64;
                let mut x = vec![1.0];
                for _ in 0..n {
                    x = rk_step(&method, &growth, &x, h, &solver).unwrap();
                }
                (x[0] - std::f64::consts::E).abs()
            })
            .collect();
        errs.windows(2)
            .filter(|w| w[1] > 1e-13)
            .map(|w| (w[0] / w[1]).log2())
            .collect()
    }

    #[test]
    fn rk4_global_order() {
        let slopes = global_error_slopes(Underlying::rk4());
        assert!(!slopes.is_empty());
        for s in slopes {
            assert!((s - 4.0).abs() <= 0.3, "slope {s}");
        }
    }

    #[test]
    fn rk6_global_order() {
        let slopes = global_error_slopes(Underlying::rk6());
        assert!(!slopes.is_empty());
        for s in slopes {
            assert!((s - 6.0).abs() <= 0.5, "slope {s}");
        }
    }

    #[test]
    fn inconsistent_tableau_is_rejected() {
        assert!(Tableau::new(vec![vec![0.0]], vec![0.9]).is_err());
        assert!(Tableau::new(vec![vec![0.0, 0.0]], vec![0.5, 0.5]).is_err());
    }
}
