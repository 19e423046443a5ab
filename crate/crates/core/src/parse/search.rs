//! Building blocks of the record search: the linear feasibility system, the
//! minimal projectors of a commutative algebra, the assignment search over
//! them, and the projector descent for the noncommutative case.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::hilbert::linalg::{
    flatten_real, frobenius, hermitian_coords, hermitian_eigen, hs_real, identity, least_squares, min_eigenvalue,
    null_space, real, CMatrix, RMatrix, RVector,
};
use crate::hilbert::LabeledIsometry;
use crate::measurement::Povm;

/// The affine system `V† X_k V = Λ(k)`, `Σ_k X_k = 1`, with each `X_k` in the
/// real span of `basis`.
pub(crate) struct LinearSystem {
    pub basis: Vec<CMatrix>,
    pub labels: Vec<String>,
    pub lambdas: Vec<CMatrix>,
    /// Column `i` holds the Hermitian coordinates of `V† B_i V`.
    pulled: RMatrix,
    targets: Vec<RVector>,
    /// Coordinates of the identity in `basis`.
    identity_coords: RVector,
}

impl LinearSystem {
    pub fn new(v: &LabeledIsometry, povm: &Povm, basis: Vec<CMatrix>) -> Self {
        let m = basis.len();
        let ds = v.inputs().dim();
        let n = ds * ds;
        let mut pulled = RMatrix::zeros(n, m);
        for (i, b) in basis.iter().enumerate() {
            let pb = v.matrix().adjoint() * b * v.matrix();
            pulled.set_column(i, &hermitian_coords(&pb));
        }
        let d = v.outputs().dim();
        let id = identity(d);
        let identity_coords = RVector::from_iterator(m, basis.iter().map(|b| hs_real(b, &id)));
        Self {
            labels: povm.labels().map(str::to_string).collect(),
            lambdas: povm.outcomes().iter().map(|(_, e)| e.matrix().clone()).collect(),
            targets: povm
                .outcomes()
                .iter()
                .map(|(_, e)| hermitian_coords(e.matrix()))
                .collect(),
            basis,
            pulled,
            identity_coords,
        }
    }

    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    /// Least-squares residual of `V† X V = Λ(k)` alone.
    pub fn outcome_residual(&self, k: usize) -> f64 {
        least_squares(&self.pulled, &self.targets[k]).1
    }

    /// The coupled system over all outcomes, unknowns stacked per outcome.
    pub fn joint(&self) -> (RMatrix, RVector) {
        let (m, k) = (self.m(), self.k());
        let n = self.pulled.nrows();
        let mut a = RMatrix::zeros(k * n + m, k * m);
        let mut b = RVector::zeros(k * n + m);
        for o in 0..k {
            a.view_mut((o * n, o * m), (n, m)).copy_from(&self.pulled);
            b.rows_mut(o * n, n).copy_from(&self.targets[o]);
            for i in 0..m {
                a[(k * n + i, o * m + i)] = 1.0;
            }
        }
        b.rows_mut(k * n, m).copy_from(&self.identity_coords);
        (a, b)
    }

    pub fn joint_residual(&self) -> f64 {
        let (a, b) = self.joint();
        least_squares(&a, &b).1
    }

    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let d = self.basis[0].nrows();
        self.basis
            .iter()
            .zip(coeffs)
            .fold(CMatrix::zeros(d, d), |acc, (b, c)| acc + b * real(*c))
    }
}

/// Minimal projectors of the algebra generated by the commuting Hermitian
/// `basis`, or `None` when the elements are not simultaneously diagonal
/// after refinement.
pub(crate) fn minimal_projectors(basis: &[CMatrix], d: usize, cluster_tol: f64) -> Option<Vec<CMatrix>> {
    let mut blocks = vec![identity(d)];
    for b in basis {
        let mut next = Vec::with_capacity(blocks.len());
        for q in &blocks {
            let h = q.adjoint() * b * q;
            let (vals, vecs) = hermitian_eigen(&h);
            let mut start = 0;
            for i in 1..=vals.len() {
                if i == vals.len() || vals[i] - vals[i - 1] > cluster_tol {
                    next.push(q * vecs.columns(start, i - start));
                    start = i;
                }
            }
        }
        blocks = next;
    }
    let projectors: Vec<CMatrix> = blocks.iter().map(|q| q * q.adjoint()).collect();
    for b in basis {
        let rebuilt = blocks
            .iter()
            .zip(&projectors)
            .fold(CMatrix::zeros(d, d), |acc, (q, p)| {
                let mean = (q.adjoint() * b * q).trace().re / q.ncols() as f64;
                acc + p * real(mean)
            });
        if frobenius(&(b - rebuilt)) > 1e3 * cluster_tol {
            return None;
        }
    }
    Some(projectors)
}

/// Result of the assignment search.
pub(crate) enum Assignment {
    Found(Vec<usize>),
    Exhausted { nodes: u64 },
    Capped,
}

/// Assigns every projector (given by its pull-back `q[j]`) to one outcome so
/// that the pull-backs of each outcome sum to `targets[k]`.
///
/// Depth-first with two prunings: a partial sum must stay below its target in
/// the PSD order, and projectors with equal pull-backs are assigned in
/// nondecreasing outcome order. Zero pull-backs go to the first outcome.
pub(crate) fn assign(q: &[CMatrix], targets: &[CMatrix], tol_op: f64, node_cap: u64) -> Assignment {
    let n = q.len();
    let k = targets.len();
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = q.iter().map(frobenius).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let active: Vec<usize> = order.iter().copied().filter(|&j| norms[j] > tol_op).collect();
    let same_as_prev: Vec<bool> = (0..active.len())
        .map(|i| i > 0 && frobenius(&(&q[active[i]] - &q[active[i - 1]])) <= tol_op)
        .collect();

    struct State<'a> {
        q: &'a [CMatrix],
        active: &'a [usize],
        same_as_prev: &'a [bool],
        remaining: Vec<CMatrix>,
        choice: Vec<usize>,
        nodes: u64,
        cap: u64,
        slack: f64,
        tol: f64,
    }

    fn dfs(s: &mut State<'_>, depth: usize) -> Option<bool> {
        if depth == s.active.len() {
            return Some(s.remaining.iter().all(|r| frobenius(r) <= s.tol));
        }
        let j = s.active[depth];
        let lo = if s.same_as_prev[depth] { s.choice[depth - 1] } else { 0 };
        for o in lo..s.remaining.len() {
            s.nodes += 1;
            if s.nodes > s.cap {
                return None;
            }
            let rest = &s.remaining[o] - &s.q[j];
            if min_eigenvalue(&rest) < -s.slack {
                continue;
            }
            let saved = std::mem::replace(&mut s.remaining[o], rest);
            s.choice.push(o);
            match dfs(s, depth + 1) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            s.choice.pop();
            s.remaining[o] = saved;
        }
        Some(false)
    }

    let mut state = State {
        q,
        active: &active,
        same_as_prev: &same_as_prev,
        remaining: targets.to_vec(),
        choice: Vec::with_capacity(active.len()),
        nodes: 0,
        cap: node_cap,
        slack: 10.0 * tol_op,
        tol: tol_op,
    };
    if k == 0 {
        return Assignment::Exhausted { nodes: 0 };
    }
    match dfs(&mut state, 0) {
        Some(true) => {
            let mut result = vec![0; n];
            for (depth, &j) in active.iter().enumerate() {
                result[j] = state.choice[depth];
            }
            Assignment::Found(result)
        }
        Some(false) => Assignment::Exhausted { nodes: state.nodes },
        None => Assignment::Capped,
    }
}

/// Residual vector whose squared norm is
/// `Σ_k ‖X_k² − X_k‖² + Σ_{k≠k′} ‖X_k X_k′‖²`.
pub(crate) fn projector_residual(xs: &[CMatrix]) -> RVector {
    let mut r = Vec::new();
    for x in xs {
        r.extend(flatten_real(&(x * x - x)));
    }
    for (k, x) in xs.iter().enumerate() {
        for y in &xs[k + 1..] {
            r.extend(flatten_real(&(x * y)).into_iter().map(|v| v * std::f64::consts::SQRT_2));
        }
    }
    RVector::from_vec(r)
}

/// Derivative of [`projector_residual`] at `xs` along `dxs`.
fn projector_residual_derivative(xs: &[CMatrix], dxs: &[CMatrix]) -> Vec<f64> {
    let mut r = Vec::new();
    for (x, dx) in xs.iter().zip(dxs) {
        r.extend(flatten_real(&(x * dx + dx * x - dx)));
    }
    for k in 0..xs.len() {
        for kp in k + 1..xs.len() {
            let d = &dxs[k] * &xs[kp] + &xs[k] * &dxs[kp];
            r.extend(flatten_real(&d).into_iter().map(|v| v * std::f64::consts::SQRT_2));
        }
    }
    r
}

/// Spectral projector onto eigenvalues above one half.
pub(crate) fn round_to_projector(x: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(x);
    let d = x.nrows();
    let mut p = CMatrix::zeros(d, d);
    for (i, v) in vals.iter().enumerate() {
        if *v > 0.5 {
            let col = vecs.column(i);
            p += col * col.adjoint();
        }
    }
    p
}

/// The affine solution set `c0 + N z` of the joint system.
pub(crate) struct AffineSet {
    pub c0: RVector,
    pub null: RMatrix,
}

impl AffineSet {
    pub fn new(system: &LinearSystem) -> Self {
        let (a, b) = system.joint();
        let (c0, _) = least_squares(&a, &b);
        let smax = a.norm();
        let null = null_space(&a, 1e-10 * smax.max(1.0));
        Self { c0, null }
    }

    pub fn point(&self, z: &RVector) -> RVector {
        &self.c0 + &self.null * z
    }
}

/// Outcome of one descent run.
pub(crate) struct Descent {
    pub projectors: Vec<CMatrix>,
    pub penalty: f64,
}

fn split_matrices(system: &LinearSystem, c: &RVector) -> Vec<CMatrix> {
    let m = system.m();
    (0..system.k())
        .map(|k| system.combine(&c.as_slice()[k * m..(k + 1) * m]))
        .collect()
}

/// Levenberg–Marquardt on the projector residual over the affine set from a
/// random start, then rounding to spectral projectors.
pub(crate) fn descend<R: Rng + ?Sized>(system: &LinearSystem, affine: &AffineSet, rng: &mut R) -> Descent {
    let dim_z = affine.null.ncols();
    let mut z = RVector::from_fn(dim_z, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.5);
    // each null-space direction as one matrix per outcome
    let directions: Vec<Vec<CMatrix>> = (0..dim_z)
        .map(|j| {
            let col = affine.null.column(j).into_owned();
            split_matrices(system, &col)
        })
        .collect();

    let mut xs = split_matrices(system, &affine.point(&z));
    let mut r = projector_residual(&xs);
    let mut f = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..500 {
        if dim_z == 0 || f.sqrt() < 1e-14 {
            break;
        }
        let mut jac = RMatrix::zeros(r.len(), dim_z);
        for (j, dir) in directions.iter().enumerate() {
            jac.set_column(j, &RVector::from_vec(projector_residual_derivative(&xs, dir)));
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut improved = false;
        while mu < 1e12 {
            let damped = &jtj + RMatrix::identity(dim_z, dim_z) * mu;
            let Some(chol) = damped.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let trial = &z - chol.solve(&g);
            let txs = split_matrices(system, &affine.point(&trial));
            let tr = projector_residual(&txs);
            let tf = tr.norm_squared();
            if tf < f {
                z = trial;
                xs = txs;
                r = tr;
                f = tf;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    let projectors = xs.iter().map(round_to_projector).collect();
    Descent {
        projectors,
        penalty: f.sqrt(),
    }
}
