//! Modeling layer: named matrix variables and affine symmetric constraints.
//!
//! Constraint and objective expressions are given as closures over the
//! variable values. They must be affine; the problem is compiled by evaluating
//! each closure at zero and at every basis direction.

use nalgebra::{DMatrix, DVector};
use qls_core::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Scalar,
    Symmetric(usize),
    Rect(usize, usize),
}

impl VarKind {
    fn len(&self) -> usize {
        match *self {
            VarKind::Scalar => 1,
            VarKind::Symmetric(k) => k * (k + 1) / 2,
            VarKind::Rect(r, c) => r * c,
        }
    }
}

/// Handle to a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

#[derive(Debug, Clone)]
struct VarDecl {
    name: String,
    kind: VarKind,
    offset: usize,
}

/// `⪯ −εI` or `⪰ εI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    NegDef,
    PosDef,
}

/// Compiled affine constraint `F(x) = F0 + Σ xᵢ Fᵢ ≻ 0` (sense and margin folded in).
#[derive(Debug, Clone)]
pub(crate) struct Compiled<T: Real> {
    pub f0: DMatrix<T>,
    pub fi: Vec<DMatrix<T>>,
}

type Expr<'a, T> = Box<dyn Fn(&VarValues<T>) -> DMatrix<T> + 'a>;
type Objective<'a, T> = Box<dyn Fn(&VarValues<T>) -> T + 'a>;

struct ConstraintDecl<'a, T: Real> {
    name: String,
    sense: ConstraintSense,
    expr: Expr<'a, T>,
}

/// Variable assignment passed to expression closures.
pub struct VarValues<'p, T: Real> {
    vars: &'p [VarDecl],
    x: &'p DVector<T>,
}

impl<T: Real> VarValues<'_, T> {
    pub fn scalar(&self, id: VarId) -> T {
        let d = &self.vars[id.0];
        assert_eq!(d.kind, VarKind::Scalar, "{} is not a scalar", d.name);
        self.x[d.offset]
    }

    /// Symmetric or rectangular variable as a dense matrix.
    pub fn mat(&self, id: VarId) -> DMatrix<T> {
        let d = &self.vars[id.0];
        match d.kind {
            VarKind::Scalar => DMatrix::from_element(1, 1, self.x[d.offset]),
            VarKind::Symmetric(k) => {
                let mut m = DMatrix::zeros(k, k);
                let mut p = d.offset;
                for j in 0..k {
                    for i in 0..=j {
                        m[(i, j)] = self.x[p];
                        m[(j, i)] = self.x[p];
                        p += 1;
                    }
                }
                m
            }
            VarKind::Rect(r, c) => {
                DMatrix::from_column_slice(r, c, &self.x.as_slice()[d.offset..d.offset + r * c])
            }
        }
    }
}

/// Problem `min cᵀx` subject to affine LMIs held strictly with margin `eps`.
pub struct LmiProblem<'a, T: Real> {
    vars: Vec<VarDecl>,
    dim: usize,
    constraints: Vec<ConstraintDecl<'a, T>>,
    objective: Option<Objective<'a, T>>,
    eps: T,
}

impl<'a, T: Real> LmiProblem<'a, T> {
    pub fn new(eps: T) -> Self {
        LmiProblem {
            vars: Vec::new(),
            dim: 0,
            constraints: Vec::new(),
            objective: None,
            eps,
        }
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn var(&mut self, name: &str, kind: VarKind) -> VarId {
        self.vars.push(VarDecl {
            name: name.to_string(),
            kind,
            offset: self.dim,
        });
        self.dim += kind.len();
        VarId(self.vars.len() - 1)
    }

    pub fn scalar_var(&mut self, name: &str) -> VarId {
        self.var(name, VarKind::Scalar)
    }

    pub fn sym_var(&mut self, name: &str, k: usize) -> VarId {
        self.var(name, VarKind::Symmetric(k))
    }

    /// Number of scalar unknowns.
    pub fn num_scalars(&self) -> usize {
        self.dim
    }

    pub fn var_len(&self, id: VarId) -> usize {
        self.vars[id.0].kind.len()
    }

    /// `expr(x) ⪯ −εI` or `expr(x) ⪰ εI`; `expr` must be affine and symmetric.
    pub fn constrain(
        &mut self,
        name: &str,
        sense: ConstraintSense,
        expr: impl Fn(&VarValues<T>) -> DMatrix<T> + 'a,
    ) {
        self.constraints.push(ConstraintDecl {
            name: name.to_string(),
            sense,
            expr: Box::new(expr),
        });
    }

    /// Linear objective to minimize.
    pub fn minimize(&mut self, obj: impl Fn(&VarValues<T>) -> T + 'a) {
        self.objective = Some(Box::new(obj));
    }

    pub fn values<'p>(&'p self, x: &'p DVector<T>) -> VarValues<'p, T> {
        VarValues {
            vars: &self.vars,
            x,
        }
    }

    /// Evaluates a named constraint expression (without margin) at `x`.
    pub(crate) fn eval_constraint(&self, k: usize, x: &DVector<T>) -> DMatrix<T> {
        (self.constraints[k].expr)(&self.values(x))
    }

    pub(crate) fn constraint_meta(&self) -> Vec<(String, ConstraintSense)> {
        self.constraints
            .iter()
            .map(|c| (c.name.clone(), c.sense))
            .collect()
    }

    pub(crate) fn eval_objective(&self, x: &DVector<T>) -> T {
        self.objective
            .as_ref()
            .map_or(T::zero(), |f| f(&self.values(x)))
    }

    /// Objective vector and constraints in `F0 + Σ xᵢFᵢ ≻ 0` form.
    pub(crate) fn compile(&self) -> (DVector<T>, Vec<Compiled<T>>) {
        let zero = DVector::zeros(self.dim);
        let basis = |i: usize| {
            let mut e = DVector::zeros(self.dim);
            e[i] = T::one();
            e
        };
        let c0 = self.eval_objective(&zero);
        let c = DVector::from_fn(self.dim, |i, _| self.eval_objective(&basis(i)) - c0);
        let mut out = Vec::new();
        for (k, decl) in self.constraints.iter().enumerate() {
            let sign = match decl.sense {
                ConstraintSense::NegDef => -T::one(),
                ConstraintSense::PosDef => T::one(),
            };
            let e0 = self.eval_constraint(k, &zero);
            let dim = e0.nrows();
            let f0 = &e0 * sign - DMatrix::identity(dim, dim) * self.eps;
            let fi = (0..self.dim)
                .map(|i| (self.eval_constraint(k, &basis(i)) - &e0) * sign)
                .collect();
            out.push(Compiled { f0, fi });
        }
        (c, out)
    }
}
