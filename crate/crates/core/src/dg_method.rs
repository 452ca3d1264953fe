//! Discrete gradient integrators in skew form, `x' = x + h S̃ ī`.
//!
//! The skew tensor is `S̃ = f̃ ∧ ĩ¹ ∧ ⋯ ∧ ĩᴹ / det(BᵀA)`. Its contraction
//! with `ī¹ ⊗ ⋯ ⊗ īᴹ` equals `f̃ − A(BᵀA)⁻¹Bᵀf̃`, which is how the general
//! step evaluates it. [`SkewTensor`] materializes the tensor for small
//! dimensions.

use crate::dense::{cramer_solve, determinant, Matrix};
use crate::discrete_gradient::DiscreteGradientKind;
use crate::error::{check_dim, Error, Result};
use crate::model::{SolverSettings, System};
use crate::projection::{DirectionRule, IncrementRule, StepContext, StepOutcome};
use crate::rk::Underlying;
use crate::scalar::{axpy, dot, norm2, norm_inf, Scalar};
use crate::solver::{solve_implicit, Implicit, Report};

/// Configuration of a discrete gradient method.
#[derive(Debug, Clone, PartialEq)]
pub struct DgSpec<T> {
    pub underlying: Underlying<T>,
    pub increment: IncrementRule,
    /// Rules for `ĩ_m`, one per integral.
    pub directions: Vec<DirectionRule>,
    /// Constructions for `ī_m`, one per integral.
    pub discrete_gradients: Vec<DiscreteGradientKind>,
    /// `(î, ĭ)` for the denominator of the single-integral `S̃`; `None`
    /// means `(ĩ, ī)`, the choice that makes the method a projection.
    pub denominator: Option<(DirectionRule, DirectionRule)>,
    pub solver: SolverSettings<T>,
}

impl<T: Scalar> DgSpec<T> {
    pub fn new(
        underlying: Underlying<T>,
        directions: Vec<DirectionRule>,
        discrete_gradients: Vec<DiscreteGradientKind>,
    ) -> Result<Self> {
        check_dim(directions.len(), discrete_gradients.len())?;
        if directions.is_empty() {
            return Err(Error::InvalidConfig("at least one integral is required".into()));
        }
        Ok(DgSpec {
            underlying,
            increment: IncrementRule::Predictor,
            directions,
            discrete_gradients,
            denominator: None,
            solver: SolverSettings::default(),
        })
    }

    pub fn with_denominator(mut self, hat: DirectionRule, breve: DirectionRule) -> Self {
        self.denominator = Some((hat, breve));
        self
    }

    pub fn with_solver(mut self, solver: SolverSettings<T>) -> Self {
        self.solver = solver;
        self
    }

    pub fn num_integrals(&self) -> usize {
        self.directions.len()
    }

    fn check(&self, system: &System<T>, expected_m: Option<usize>) -> Result<()> {
        check_dim(self.directions.len(), self.discrete_gradients.len())?;
        check_dim(system.num_integrals(), self.directions.len())?;
        let m = self.directions.len();
        if let Some(e) = expected_m {
            check_dim(e, m)?;
        }
        if m == 0 || m >= system.dimension() {
            return Err(Error::InvalidConfig(format!(
                "{m} integrals in dimension {}",
                system.dimension()
            )));
        }
        Ok(())
    }
}

fn denominator_check<T: Scalar>(value: T, u: &[T], v: &[T]) -> Result<T> {
    if value.abs() < T::lit(1e-13) * norm2(u) * norm2(v) || value == T::zero() {
        Err(Error::DegenerateDenominator { value: value.as_f64() })
    } else {
        Ok(value)
    }
}

/// `S̃ = (f̃ĩᵀ − ĩf̃ᵀ)/(î·ĭ)` as a dense skew-symmetric matrix.
pub fn single_skew_matrix<T: Scalar>(ftilde: &[T], itilde: &[T], ihat: &[T], ibreve: &[T]) -> Result<Matrix<T>> {
    check_dim(ftilde.len(), itilde.len())?;
    let denom = denominator_check(dot(ihat, ibreve), ihat, ibreve)?;
    let d = ftilde.len();
    let mut s = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            s[(i, j)] = (ftilde[i] * itilde[j] - itilde[i] * ftilde[j]) / denom;
        }
    }
    Ok(s)
}

/// `S̃ ī` for one integral.
pub(crate) fn single_skew_update<T: Scalar>(
    ftilde: &[T],
    itilde: &[T],
    ibar: &[T],
    ihat: &[T],
    ibreve: &[T],
) -> Result<Vec<T>> {
    single_skew_matrix(ftilde, itilde, ihat, ibreve)?.matvec(ibar)
}

/// Contraction of `f̃ ∧ ĩ¹ ∧ ⋯ ∧ ĩᴹ / det(BᵀA)` with `ī¹ ⊗ ⋯ ⊗ īᴹ`,
/// through the determinant ratios `det(BᵀA_j)/det(BᵀA)`, where `A_j` is
/// `A` with column `j` replaced by `f̃`.
pub fn cramer_reduction<T: Scalar>(ftilde: &[T], a: &Matrix<T>, b: &Matrix<T>) -> Result<Vec<T>> {
    let coeffs = wedge_coefficients(ftilde, a, b)?;
    let along = a.matvec(&coeffs)?;
    Ok(ftilde.iter().zip(&along).map(|(&f, &c)| f - c).collect())
}

fn wedge_coefficients<T: Scalar>(ftilde: &[T], a: &Matrix<T>, b: &Matrix<T>) -> Result<Vec<T>> {
    check_dim(a.rows(), ftilde.len())?;
    check_dim(a.rows(), b.rows())?;
    check_dim(a.cols(), b.cols())?;
    let bta = b.transpose().matmul(a)?;
    cramer_solve(&bta, &b.tr_matvec(ftilde)?).map_err(|e| match e {
        Error::SingularMatrix { pivot } => Error::ComplementarityFailure { pivot },
        other => other,
    })
}

fn solve_map<'a, T: Scalar>(
    ctx: &StepContext<'a, T>,
    solver: &SolverSettings<T>,
    map: impl FnMut(&[T]) -> Result<Vec<T>> + 'a,
) -> Result<Report<T>> {
    solve_implicit(Implicit::Map(Box::new(map)), &ctx.predictor, solver)
}

/// Shared single-integral solve; conserves `I(x)`.
pub(crate) fn single_dg_solve<T: Scalar>(
    ctx: &StepContext<'_, T>,
    increment: IncrementRule,
    direction: DirectionRule,
    dg: DiscreteGradientKind,
    denominator: Option<(DirectionRule, DirectionRule)>,
) -> Result<StepOutcome<T>> {
    let integral = &ctx.system.integrals()[0];
    if norm_inf(&integral.gradient(ctx.x)?) == T::zero() {
        return StepOutcome::new(ctx.x.to_vec(), vec![T::zero()], Report::trivial(ctx.x.to_vec()));
    }
    let update = |xn: &[T]| -> Result<(Vec<T>, T)> {
        let ft = ctx.increment(increment, xn)?;
        let it = ctx.direction(direction, 0, xn)?;
        let ib = crate::discrete_gradient::discrete_gradient(dg, integral, ctx.x, xn)?;
        let (ihat, ibreve) = match denominator {
            None => (it.clone(), ib.clone()),
            Some((hat, breve)) => (ctx.direction(hat, 0, xn)?, ctx.direction(breve, 0, xn)?),
        };
        let s_ibar = single_skew_update(&ft, &it, &ib, &ihat, &ibreve)?;
        let lambda = -ctx.h * dot(&ft, &ib) / dot(&ihat, &ibreve);
        Ok((s_ibar, lambda))
    };
    let report = solve_map(ctx, ctx.solver, |xn: &[T]| {
        let (s_ibar, _) = update(xn)?;
        Ok(axpy(ctx.x, ctx.h, &s_ibar))
    })?;
    let xn = report.solution.clone();
    let (_, lambda) = update(&xn)?;
    StepOutcome::new(xn, vec![lambda], report)
}

/// One step of the single-integral method `x' = x + h S̃ ī`.
///
/// Returns `x` unchanged where `∇I(x) = 0`.
pub fn dg_step_single<T: Scalar>(spec: &DgSpec<T>, system: &System<T>, x: &[T], h: T) -> Result<StepOutcome<T>> {
    spec.check(system, Some(1))?;
    let ctx = StepContext::new(system, &spec.underlying, &spec.solver, x, h)?;
    single_dg_solve(
        &ctx,
        spec.increment,
        spec.directions[0],
        spec.discrete_gradients[0],
        spec.denominator,
    )
}

fn det3<T: Scalar>(m: [[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `Σ_{m,n} S̃_lmn ī_m j̄_n` with `S̃_lmn` the 3×3 minor of `(f̃, ĩ, j̃)` over
/// rows `(l, m, n)`, divided by `(ĩ·ī)(j̃·j̄) − (ĩ·j̄)(ī·j̃)`.
pub fn two_integral_contraction<T: Scalar>(
    ftilde: &[T],
    itilde: &[T],
    jtilde: &[T],
    ibar: &[T],
    jbar: &[T],
) -> Result<Vec<T>> {
    let d = ftilde.len();
    for v in [itilde, jtilde, ibar, jbar] {
        check_dim(d, v.len())?;
    }
    let n = dot(itilde, ibar) * dot(jtilde, jbar) - dot(itilde, jbar) * dot(ibar, jtilde);
    let scale = norm2(itilde) * norm2(ibar) * norm2(jtilde) * norm2(jbar);
    if n.abs() < T::lit(1e-13) * scale || n == T::zero() {
        return Err(Error::DegenerateDenominator { value: n.as_f64() });
    }
    let mut out = vec![T::zero(); d];
    for (l, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for m in 0..d {
            for k in 0..d {
                let s = det3([
                    [ftilde[l], ftilde[m], ftilde[k]],
                    [itilde[l], itilde[m], itilde[k]],
                    [jtilde[l], jtilde[m], jtilde[k]],
                ]);
                acc = acc + s * ibar[m] * jbar[k];
            }
        }
        *o = acc / n;
    }
    Ok(out)
}

/// One step of the two-integral method via the explicit double sum.
pub fn dg_step_two_integrals<T: Scalar>(spec: &DgSpec<T>, system: &System<T>, x: &[T], h: T) -> Result<StepOutcome<T>> {
    spec.check(system, Some(2))?;
    let ctx = StepContext::new(system, &spec.underlying, &spec.solver, x, h)?;
    let update = |xn: &[T]| -> Result<(Vec<T>, Vec<T>)> {
        let ft = ctx.increment(spec.increment, xn)?;
        let a = ctx.directions(&spec.directions, xn)?;
        let b = ctx.discrete_gradients(&spec.discrete_gradients, xn)?;
        let dir = two_integral_contraction(&ft, &a.column(0), &a.column(1), &b.column(0), &b.column(1))?;
        let lambda = wedge_coefficients(&ft, &a, &b)?.iter().map(|&c| -ctx.h * c).collect();
        Ok((dir, lambda))
    };
    let report = solve_map(&ctx, &spec.solver, |xn: &[T]| {
        let (dir, _) = update(xn)?;
        Ok(axpy(ctx.x, ctx.h, &dir))
    })?;
    let xn = report.solution.clone();
    let (_, lambda) = update(&xn)?;
    StepOutcome::new(xn, lambda, report)
}

/// One step of the general `M`-integral method, contracting the wedge
/// tensor through determinant ratios.
pub fn dg_step_multi<T: Scalar>(spec: &DgSpec<T>, system: &System<T>, x: &[T], h: T) -> Result<StepOutcome<T>> {
    spec.check(system, None)?;
    let ctx = StepContext::new(system, &spec.underlying, &spec.solver, x, h)?;
    let update = |xn: &[T]| -> Result<(Vec<T>, Vec<T>)> {
        let ft = ctx.increment(spec.increment, xn)?;
        let a = ctx.directions(&spec.directions, xn)?;
        let b = ctx.discrete_gradients(&spec.discrete_gradients, xn)?;
        let coeffs = wedge_coefficients(&ft, &a, &b)?;
        let along = a.matvec(&coeffs)?;
        let dir = ft.iter().zip(&along).map(|(&f, &c)| f - c).collect();
        Ok((dir, coeffs.iter().map(|&c| -ctx.h * c).collect()))
    };
    let report = solve_map(&ctx, &spec.solver, |xn: &[T]| {
        let (dir, _) = update(xn)?;
        Ok(axpy(ctx.x, ctx.h, &dir))
    })?;
    let xn = report.solution.clone();
    let (_, lambda) = update(&xn)?;
    StepOutcome::new(xn, lambda, report)
}

/// Dense rank-`K` tensor over `ℝᵈ`, row-major in its indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewTensor<T> {
    dim: usize,
    rank: usize,
    data: Vec<T>,
}

impl<T: Scalar> SkewTensor<T> {
    pub const MAX_DIM: usize = 6;

    /// `u¹ ∧ ⋯ ∧ uᴷ` with entries `Σ_σ sgn σ Π_k u^{σ(k)}_{j_k}`.
    pub fn wedge(vectors: &[Vec<T>]) -> Result<Self> {
        let rank = vectors.len();
        let dim = vectors.first().map_or(0, Vec::len);
        for v in vectors {
            check_dim(dim, v.len())?;
        }
        if dim > Self::MAX_DIM || rank == 0 || rank > dim {
            return Err(Error::InvalidConfig(format!(
                "cannot materialize a rank {rank} tensor in dimension {dim}"
            )));
        }
        let len = dim.pow(rank as u32);
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; rank];
        for flat in 0..len {
            unflatten(flat, dim, &mut idx);
            // entry is the determinant of [u^c_{j_r}]_{r,c}
            let mut m = Matrix::zeros(rank, rank);
            for (r, &j) in idx.iter().enumerate() {
                for (c, v) in vectors.iter().enumerate() {
                    m[(r, c)] = v[j];
                }
            }
            data.push(determinant(&m)?);
        }
        Ok(SkewTensor { dim, rank, data })
    }

    /// `f̃ ∧ ĩ¹ ∧ ⋯ ∧ ĩᴹ / det(BᵀA)`.
    pub fn discrete_gradient_tensor(ftilde: &[T], a: &Matrix<T>, b: &Matrix<T>) -> Result<Self> {
        check_dim(a.cols(), b.cols())?;
        let bta = b.transpose().matmul(a)?;
        let det = determinant(&bta)?;
        if det.abs() < T::rel_threshold(1e-13) * bta.max_abs().powi(a.cols() as i32) || det == T::zero() {
            return Err(Error::ComplementarityFailure { pivot: det.as_f64() });
        }
        let mut vectors = vec![ftilde.to_vec()];
        vectors.extend(a.columns());
        let mut t = Self::wedge(&vectors)?;
        for v in &mut t.data {
            *v = *v / det;
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, idx: &[usize]) -> T {
        assert_eq!(idx.len(), self.rank);
        self.data[idx.iter().fold(0, |acc, &j| acc * self.dim + j)]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// Contracts the trailing `rank − 1` indices with `vectors`, leaving the first free.
    pub fn contract_tail(&self, vectors: &[Vec<T>]) -> Result<Vec<T>> {
        check_dim(self.rank - 1, vectors.len())?;
        for v in vectors {
            check_dim(self.dim, v.len())?;
        }
        let mut out = vec![T::zero(); self.dim];
        let mut idx = vec![0usize; self.rank];
        for (flat, &value) in self.data.iter().enumerate() {
            unflatten(flat, self.dim, &mut idx);
            let w = vectors.iter().zip(&idx[1..]).fold(value, |acc, (v, &j)| acc * v[j]);
            out[idx[0]] = out[idx[0]] + w;
        }
        Ok(out)
    }
}

fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}
