//! Lifted problems: a symmetric matrix `Z` split into `base × base` blocks,
//! linear couplings of the form `entry = ±entry` or `entry = constant`, and a
//! rank bound. The affine projection is exact because the couplings only
//! identify entries up to sign: every equivalence class is replaced by its
//! (sign-corrected, Frobenius-weighted) mean.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use qls_core::Real;

use crate::psd::rank_project;

/// Global `(row, column)` position in `Z`.
pub type Entry = (usize, usize);

fn upper((i, j): Entry) -> Entry {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Union–find with parity: `value(x) = sign(x) · value(root(x))`.
struct SignedUnion {
    parent: Vec<usize>,
    sign: Vec<i8>,
}

impl SignedUnion {
    fn new(n: usize) -> Self {
        SignedUnion {
            parent: (0..n).collect(),
            sign: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, i8) {
        let p = self.parent[x];
        if p == x {
            return (x, 1);
        }
        let (root, s) = self.find(p);
        self.parent[x] = root;
        self.sign[x] *= s;
        (root, self.sign[x])
    }

    /// Records `value(a) = s · value(b)`; returns false on a parity conflict.
    fn union(&mut self, a: usize, b: usize, s: i8) -> bool {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            return sa == s * sb;
        }
        // value(ra) = sa·value(a) = sa·s·value(b) = sa·s·sb·value(rb)
        self.parent[ra] = rb;
        self.sign[ra] = sa * s * sb;
        true
    }
}

/// Collects couplings before compiling them into a [`LiftedProblem`].
pub struct LiftedBuilder {
    base: usize,
    names: Vec<String>,
    links: Vec<(Entry, Entry, i8)>,
    fixes: Vec<(Entry, f64)>,
}

impl LiftedBuilder {
    pub fn new(base: usize, names: &[&str]) -> Self {
        LiftedBuilder {
            base,
            names: names.iter().map(|s| s.to_string()).collect(),
            links: Vec::new(),
            fixes: Vec::new(),
        }
    }

    pub fn block(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("unknown block {name}"))
    }

    /// Global position of entry `(i, j)` of block `Z_{a,b}`.
    pub fn at(&self, a: &str, b: &str, i: usize, j: usize) -> Entry {
        (self.block(a) * self.base + i, self.block(b) * self.base + j)
    }

    /// `e1 = sign · e2`.
    pub fn link(&mut self, e1: Entry, e2: Entry, sign: i8) {
        self.links.push((e1, e2, sign));
    }

    pub fn fix(&mut self, e: Entry, value: f64) {
        self.fixes.push((e, value));
    }

    /// `Z_{a,b} = M` entrywise.
    pub fn fix_block(&mut self, a: &str, b: &str, m: &DMatrix<f64>) {
        for i in 0..self.base {
            for j in 0..self.base {
                let e = self.at(a, b, i, j);
                self.fix(e, m[(i, j)]);
            }
        }
    }

    /// `Z_{a,b} = Z_{c,d}`.
    pub fn equal(&mut self, (a, b): (&str, &str), (c, d): (&str, &str)) {
        for i in 0..self.base {
            for j in 0..self.base {
                let (e1, e2) = (self.at(a, b, i, j), self.at(c, d, i, j));
                self.link(e1, e2, 1);
            }
        }
    }

    /// `Z_{a,b} = Z_{c,d}ᵀ`.
    pub fn equal_transposed(&mut self, (a, b): (&str, &str), (c, d): (&str, &str)) {
        for i in 0..self.base {
            for j in 0..self.base {
                let (e1, e2) = (self.at(a, b, i, j), self.at(c, d, j, i));
                self.link(e1, e2, 1);
            }
        }
    }

    /// `Z_{a,b} = Z_{c,d} · P` for a signed partial permutation `P` (each
    /// column holds at most one entry, equal to ±1). Columns of `P` that are
    /// zero pin the corresponding block column to 0.
    pub fn equal_times(&mut self, (a, b): (&str, &str), (c, d): (&str, &str), p: &DMatrix<f64>) {
        for j in 0..self.base {
            let nz: Vec<usize> = (0..self.base).filter(|&k| p[(k, j)] != 0.0).collect();
            assert!(nz.len() <= 1, "column {j} of P is not a signed selection");
            for i in 0..self.base {
                let e1 = self.at(a, b, i, j);
                match nz.first() {
                    Some(&k) => {
                        assert!(p[(k, j)].abs() == 1.0, "P entries must be ±1");
                        let e2 = self.at(c, d, i, k);
                        self.link(e1, e2, p[(k, j)] as i8);
                    }
                    None => self.fix(e1, 0.0),
                }
            }
        }
    }

    /// `Z_{a,b}` symmetric.
    pub fn symmetric(&mut self, a: &str, b: &str) {
        for i in 0..self.base {
            for j in i + 1..self.base {
                let (e1, e2) = (self.at(a, b, i, j), self.at(a, b, j, i));
                self.link(e1, e2, 1);
            }
        }
    }

    /// Pins every entry of `Z_{a,b}` outside the leading `rows × cols` block to 0.
    pub fn zero_outside(&mut self, a: &str, b: &str, rows: usize, cols: usize) {
        for i in 0..self.base {
            for j in 0..self.base {
                if i >= rows || j >= cols {
                    let e = self.at(a, b, i, j);
                    self.fix(e, 0.0);
                }
            }
        }
    }

    pub fn build<T: Real>(self) -> LiftedProblem<T> {
        let dim = self.base * self.names.len();
        let index = |e: Entry| {
            let (i, j) = upper(e);
            i * dim + j
        };
        let mut uf = SignedUnion::new(dim * dim);
        let mut zero_roots: Vec<usize> = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        let mut contradictions = 0;
        for &(e1, e2, s) in &self.links {
            let (a, b) = (index(e1), index(e2));
            touched.push(a);
            touched.push(b);
            if !uf.union(a, b, s) {
                contradictions += 1;
                zero_roots.push(a);
            }
        }
        let mut constants: HashMap<usize, (f64, usize)> = HashMap::new();
        let mut fixed_entries = Vec::new();
        for &(e, v) in &self.fixes {
            let a = index(e);
            touched.push(a);
            fixed_entries.push((a, v));
        }
        for (a, v) in fixed_entries {
            let (root, s) = uf.find(a);
            let slot = constants.entry(root).or_insert((0.0, 0));
            slot.0 += f64::from(s) * v;
            slot.1 += 1;
        }
        let zero: Vec<usize> = zero_roots.into_iter().map(|a| uf.find(a).0).collect();
        for (root, (sum, count)) in &constants {
            // conflicting constants inside one class cannot all hold
            let mean = sum / *count as f64;
            if self.fixes.iter().any(|&(e, v)| {
                let (r, s) = uf.find(index(e));
                r == *root && (f64::from(s) * v - mean).abs() > 1e-12 * (1.0 + mean.abs())
            }) {
                contradictions += 1;
            }
        }

        touched.sort_unstable();
        touched.dedup();
        let mut groups: HashMap<usize, Vec<(usize, i8)>> = HashMap::new();
        for a in touched {
            let (root, s) = uf.find(a);
            groups.entry(root).or_default().push((a, s));
        }
        let mut classes: Vec<Class> = groups
            .into_iter()
            .map(|(root, members)| {
                let value = if zero.contains(&root) {
                    Some(0.0)
                } else {
                    constants.get(&root).map(|(s, c)| s / *c as f64)
                };
                Class {
                    members: members
                        .into_iter()
                        .map(|(a, s)| {
                            let (i, j) = (a / dim, a % dim);
                            (i, j, f64::from(s), if i == j { 1.0 } else { 2.0 })
                        })
                        .collect(),
                    value,
                }
            })
            .collect();
        classes.sort_by_key(|c| (c.members[0].0, c.members[0].1));
        LiftedProblem {
            base: self.base,
            names: self.names,
            classes,
            contradictions,
            objective: None,
        }
    }
}

struct Class {
    /// (row, col) in the upper triangle, sign, Frobenius weight
    members: Vec<(usize, usize, f64, f64)>,
    value: Option<f64>,
}

type Objective<T> = Box<dyn Fn(&DMatrix<T>) -> T + Send + Sync>;

/// Symmetric block matrix `Z` with coupling classes and rank bound `base`.
pub struct LiftedProblem<T: Real> {
    base: usize,
    names: Vec<String>,
    classes: Vec<Class>,
    contradictions: usize,
    objective: Option<Objective<T>>,
}

impl<T: Real> LiftedProblem<T> {
    pub fn base(&self) -> usize {
        self.base
    }

    /// Side length of `Z`.
    pub fn dim(&self) -> usize {
        self.base * self.names.len()
    }

    pub fn block_names(&self) -> &[String] {
        &self.names
    }

    /// Row/column range of a named block.
    pub fn range(&self, name: &str) -> std::ops::Range<usize> {
        let k = self
            .names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("unknown block {name}"));
        k * self.base..(k + 1) * self.base
    }

    pub fn block(&self, z: &DMatrix<T>, a: &str, b: &str) -> DMatrix<T> {
        let (ra, rb) = (self.range(a), self.range(b));
        z.view((ra.start, rb.start), (self.base, self.base))
            .into_owned()
    }

    /// Count of sign or constant conflicts found while compiling; nonzero
    /// means the affine set is empty.
    pub fn contradictions(&self) -> usize {
        self.contradictions
    }

    /// Attaches a diagnostic objective evaluated on each iterate.
    pub fn with_objective(mut self, f: impl Fn(&DMatrix<T>) -> T + Send + Sync + 'static) -> Self {
        self.objective = Some(Box::new(f));
        self
    }

    pub fn objective(&self, z: &DMatrix<T>) -> Option<T> {
        self.objective.as_ref().map(|f| f(z))
    }

    /// Frobenius projection onto the coupling set (within symmetric matrices).
    pub fn project_affine(&self, z: &DMatrix<T>) -> DMatrix<T> {
        let mut out = (z + z.transpose()) * T::lit(0.5);
        for class in &self.classes {
            let t = match class.value {
                Some(v) => T::lit(v),
                None => {
                    let (mut num, mut den) = (T::zero(), T::zero());
                    for &(i, j, s, w) in &class.members {
                        num += T::lit(w * s) * out[(i, j)];
                        den += T::lit(w);
                    }
                    num / den
                }
            };
            for &(i, j, s, _) in &class.members {
                let v = T::lit(s) * t;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// `‖Z − P_A(Z)‖_F`.
    pub fn affine_residual(&self, z: &DMatrix<T>) -> T {
        (z - self.project_affine(z)).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions<T> {
    pub max_iter: usize,
    /// Bound on relative coupling residual and rank gap.
    pub tol: T,
    /// Iterations without 0.1% improvement before declaring stagnation.
    pub stagnation_window: usize,
    /// Dykstra correction terms on both projections.
    pub dykstra: bool,
}

impl<T: Real> Default for RankOptions<T> {
    fn default() -> Self {
        RankOptions {
            max_iter: 300,
            tol: T::lit(1e-6),
            stagnation_window: 50,
            dykstra: false,
        }
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    /// `‖Z_k − P_A(Z_k)‖_F` for the rank-projected iterate.
    pub affine_residual: f64,
    /// `λ_{base+1}/λ_1` of the affine iterate.
    pub rank_gap: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct RankSolution<T: Real> {
    /// Best rank-projected iterate (PSD, rank ≤ base).
    pub z: DMatrix<T>,
    /// Factor with `z = V Vᵀ`.
    pub factor: DMatrix<T>,
    pub converged: bool,
    pub stagnated: bool,
    pub iterations: usize,
    /// Relative coupling residual of `z`.
    pub residual: T,
    pub rank_gap: T,
    pub trace: Vec<TraceRow>,
}

/// Alternating projections between the coupling set and `{Z ⪰ 0, rank Z ≤ base}`.
pub fn rank_projection_solve<T: Real>(
    lp: &LiftedProblem<T>,
    z0: &DMatrix<T>,
    opts: &RankOptions<T>,
) -> RankSolution<T> {
    let k = lp.base();
    let mut y = z0.clone();
    let (mut p_corr, mut q_corr) = (
        DMatrix::zeros(y.nrows(), y.ncols()),
        DMatrix::zeros(y.nrows(), y.ncols()),
    );
    let mut trace = Vec::new();
    let mut best: Option<RankSolution<T>> = None;
    let mut window_start = T::lit(f64::INFINITY);

    for step in 1..=opts.max_iter.max(1) {
        let x = if opts.dykstra {
            let input = &y + &p_corr;
            let x = lp.project_affine(&input);
            p_corr = input - &x;
            x
        } else {
            lp.project_affine(&y)
        };
        let proj = if opts.dykstra {
            let input = &x + &q_corr;
            let pr = rank_project(&input, k);
            q_corr = input - &pr.z;
            pr
        } else {
            rank_project(&x, k)
        };
        let gap = proj.rank_gap(k);
        y = proj.z;
        let abs_res = lp.affine_residual(&y);
        let rel_res = abs_res / T::one().max(y.norm());
        trace.push(TraceRow {
            step,
            affine_residual: abs_res.as_f64(),
            rank_gap: gap.as_f64(),
            objective: lp.objective(&y).map_or(f64::NAN, |v| v.as_f64()),
        });

        let improved = best.as_ref().map_or(true, |b| rel_res < b.residual);
        if improved {
            best = Some(RankSolution {
                z: y.clone(),
                factor: proj.factor,
                converged: false,
                stagnated: false,
                iterations: step,
                residual: rel_res,
                rank_gap: gap,
                trace: Vec::new(),
            });
        }
        if rel_res <= opts.tol && gap <= opts.tol {
            let mut sol = best.expect("set above");
            sol.converged = true;
            sol.iterations = step;
            sol.trace = trace;
            return sol;
        }
        if step % opts.stagnation_window.max(1) == 1 || opts.stagnation_window <= 1 {
            if step > 1 && rel_res > window_start * T::lit(0.999) {
                let mut sol = best.expect("set above");
                sol.stagnated = true;
                sol.iterations = step;
                sol.trace = trace;
                return sol;
            }
            window_start = rel_res;
        }
    }
    let mut sol = best.expect("at least one iteration");
    sol.iterations = trace.len();
    sol.trace = trace;
    sol
}

/// `step,affine_residual,rank_gap,objective` rows.
pub fn trace_to_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("step,affine_residual,rank_gap,objective\n");
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.step, r.affine_residual, r.rank_gap, r.objective
        );
    }
    out
}
