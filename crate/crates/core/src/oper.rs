//! Dense operators on a [`SpaceDescriptor`] and the norm-type quantities
//! built on them.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::crawford::{extremal, ComputeResult, Quantity, Strategy};
use crate::error::{Error, Result};
use crate::space::{Field, Functional, SpaceDescriptor, Vector};

/// A linear map `x -> Mx` on a finite-dimensional space. Column `j` of the
/// matrix is the image of the `j`-th coordinate unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: SpaceDescriptor,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(space: SpaceDescriptor, matrix: DMatrix<C64>) -> Result<Operator> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if matrix.nrows() != n { matrix.nrows() } else { matrix.ncols() },
            });
        }
        if matrix.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        if space.field() == Field::Real && matrix.iter().any(|c| c.im != 0.0) {
            return Err(Error::InvalidArgument("real-field operator with complex entries".into()));
        }
        Ok(Operator { space, matrix })
    }

    pub fn from_rows(space: SpaceDescriptor, rows: &[Vec<C64>]) -> Result<Operator> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Operator::new(space, m)
    }

    pub fn from_real_rows(space: SpaceDescriptor, rows: &[&[f64]]) -> Result<Operator> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&v| C64::new(v, 0.0)).collect()).collect();
        Operator::from_rows(space, &rows)
    }

    pub fn identity(space: SpaceDescriptor) -> Operator {
        let n = space.dim();
        Operator { space, matrix: DMatrix::identity(n, n) }
    }

    pub fn zero(space: SpaceDescriptor) -> Operator {
        let n = space.dim();
        Operator { space, matrix: DMatrix::zeros(n, n) }
    }

    pub fn diagonal(space: SpaceDescriptor, diag: &[f64]) -> Result<Operator> {
        space.check_dim(diag.len())?;
        let n = space.dim();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) });
        Operator::new(space, m)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Same matrix on another space of the same dimension and field.
    pub fn with_space(&self, space: SpaceDescriptor) -> Result<Operator> {
        Operator::new(space, self.matrix.clone())
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.space.check_dim(other.dim())?;
        Operator::new(self.space.clone(), &self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.space.check_dim(other.dim())?;
        Operator::new(self.space.clone(), &self.matrix - &other.matrix)
    }

    pub fn scaled(&self, s: C64) -> Result<Operator> {
        Operator::new(self.space.clone(), &self.matrix * s)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    #[inline]
    pub(crate) fn apply_raw(&self, x: &[C64], out: &mut [C64]) {
        let n = x.len();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate().take(n) {
                acc += self.matrix[(i, j)] * xj;
            }
            *o = acc;
        }
    }

    /// `W M W^-1`: the matrix seen in unweighted coordinates `y = Wx`.
    pub(crate) fn unweighted_matrix(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.matrix[(i, j)] * (self.space.weight(i) / self.space.weight(j)))
    }
}

/// `Tx`.
pub fn apply(t: &Operator, x: &Vector) -> Result<Vector> {
    t.space.check_dim(x.dim())?;
    let mut out = vec![C64::new(0.0, 0.0); t.dim()];
    t.apply_raw(x.coords(), &mut out);
    Ok(Vector::new(out))
}

/// `T*` on the dual space: the conjugate transpose (plain transpose over the reals).
pub fn adjoint(t: &Operator) -> Operator {
    Operator { space: t.space.dual(), matrix: t.matrix.adjoint() }
}

/// `x -> Tx + s f(x) v`.
pub fn rank_one_update(t: &Operator, f: &Functional, v: &Vector, s: C64) -> Result<Operator> {
    t.space.check_dim(f.dim())?;
    t.space.check_dim(v.dim())?;
    let n = t.dim();
    let m = DMatrix::from_fn(n, n, |i, j| t.matrix[(i, j)] + s * v.coords()[i] * f.coords()[j]);
    Operator::new(t.space.clone(), m)
}

/// Exact norm of the rank-one map `x -> f(x) v`: `|f|_* |v|`.
pub fn rank_one_norm(space: &SpaceDescriptor, f: &Functional, v: &Vector) -> Result<f64> {
    space.check_dim(f.dim())?;
    space.check_dim(v.dim())?;
    Ok(space.dual_norm_of(f.coords()) * space.norm_of(v.coords()))
}

/// `sup |Tx|` over the unit sphere, with an argmax certificate.
pub fn operator_norm(t: &Operator, strategy: Strategy, tol: f64) -> Result<ComputeResult> {
    extremal(t, Quantity::OpNorm, strategy, tol)
}

/// `m(T) = inf |Tx|` over the unit sphere, with an argmin certificate.
pub fn minimum_norm(t: &Operator, strategy: Strategy, tol: f64) -> Result<ComputeResult> {
    extremal(t, Quantity::MinNorm, strategy, tol)
}
