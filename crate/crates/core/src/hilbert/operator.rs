use super::linalg::{frobenius, hermitian_residual, identity, CMatrix, CVector, ONE, ZERO};
use super::registry::{Space, SystemLabel, SystemRegistry};
use crate::error::{Error, Result};

/// For every `(sub, rest)` index pair, the index in `full`.
///
/// `sub` must be a subset of `full`; `rest` is `full \ sub`. The table is laid
/// out as `table[sub_index * rest_dim + rest_index]`.
fn compose_table(full: &Space, sub: &Space) -> Vec<usize> {
    let rest = full.difference(sub);
    let rest_dim = rest.dim();
    let mut sub_strides = vec![0usize; full.len()];
    let mut rest_strides = vec![0usize; full.len()];
    let stride_of = |sp: &Space, label: &SystemLabel| -> usize {
        let mut stride = 1;
        for f in sp.factors().iter().rev() {
            if &f.label == label {
                return stride;
            }
            stride *= f.dim;
        }
        unreachable!("label belongs to the space")
    };
    for (i, f) in full.factors().iter().enumerate() {
        if sub.contains(&f.label) {
            sub_strides[i] = stride_of(sub, &f.label);
        } else {
            rest_strides[i] = stride_of(&rest, &f.label);
        }
    }
    let mut table = vec![0usize; full.dim()];
    for idx in 0..full.dim() {
        let digits = full.digits(idx);
        let s: usize = digits.iter().zip(&sub_strides).map(|(d, st)| d * st).sum();
        let r: usize = digits.iter().zip(&rest_strides).map(|(d, st)| d * st).sum();
        table[s * rest_dim + r] = idx;
    }
    table
}

/// Embeds a map `sub_in → sub_out` into `full_in → full_out` by tensoring with
/// the identity on the remaining factors, which must agree on both sides.
pub fn embed_map(
    matrix: &CMatrix,
    sub_in: &Space,
    sub_out: &Space,
    full_in: &Space,
    full_out: &Space,
) -> Result<CMatrix> {
    if matrix.nrows() != sub_out.dim() || matrix.ncols() != sub_in.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for map {} -> {}",
            matrix.nrows(),
            matrix.ncols(),
            sub_in,
            sub_out
        )));
    }
    if !sub_in.is_subset_of(full_in) || !sub_out.is_subset_of(full_out) {
        return Err(Error::DimensionMismatch(format!(
            "cannot embed {sub_in} -> {sub_out} into {full_in} -> {full_out}"
        )));
    }
    let rest_in = full_in.difference(sub_in);
    let rest_out = full_out.difference(sub_out);
    if rest_in != rest_out {
        return Err(Error::DimensionMismatch(format!(
            "spectator systems differ: {rest_in} vs {rest_out}"
        )));
    }
    let rest_dim = rest_in.dim();
    let tin = compose_table(full_in, sub_in);
    let tout = compose_table(full_out, sub_out);
    let mut out = CMatrix::zeros(full_out.dim(), full_in.dim());
    for col in 0..sub_in.dim() {
        for row in 0..sub_out.dim() {
            let v = matrix[(row, col)];
            if v == ZERO {
                continue;
            }
            for r in 0..rest_dim {
                out[(tout[row * rest_dim + r], tin[col * rest_dim + r])] = v;
            }
        }
    }
    Ok(out)
}

/// Index map from a space listed in arbitrary order to its canonical order.
fn canonical_permutation(given: &[(SystemLabel, usize)], canonical: &Space) -> Vec<usize> {
    let dim: usize = given.iter().map(|(_, d)| d).product();
    let mut strides = Vec::with_capacity(given.len());
    for (label, _) in given {
        let mut stride = 1;
        for f in canonical.factors().iter().rev() {
            if &f.label == label {
                break;
            }
            stride *= f.dim;
        }
        strides.push(stride);
    }
    (0..dim)
        .map(|mut idx| {
            let mut target = 0;
            for ((_, d), st) in given.iter().zip(&strides).rev() {
                target += (idx % d) * st;
                idx /= d;
            }
            target
        })
        .collect()
}

fn ordered_space(labels: &[SystemLabel], registry: &SystemRegistry) -> Result<(Space, Vec<usize>)> {
    let space = registry.space(labels)?;
    let given: Vec<_> = labels
        .iter()
        .map(|l| Ok((l.clone(), registry.dim_of(l)?)))
        .collect::<Result<_>>()?;
    let perm = canonical_permutation(&given, &space);
    Ok((space, perm))
}

fn permute(matrix: &CMatrix, row_perm: &[usize], col_perm: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(matrix.nrows(), matrix.ncols());
    for r in 0..matrix.nrows() {
        for c in 0..matrix.ncols() {
            out[(row_perm[r], col_perm[c])] = matrix[(r, c)];
        }
    }
    out
}

/// A square operator acting on a set of registry systems.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledOperator {
    matrix: CMatrix,
    space: Space,
}

impl LabeledOperator {
    /// `acts_on` may be in any order; the matrix is read in that order and
    /// permuted into canonical order.
    pub fn new(matrix: CMatrix, acts_on: &[SystemLabel], registry: &SystemRegistry) -> Result<Self> {
        let (space, perm) = ordered_space(acts_on, registry)?;
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {} (dimension {})",
                matrix.nrows(),
                matrix.ncols(),
                space,
                space.dim()
            )));
        }
        Ok(Self {
            matrix: permute(&matrix, &perm, &perm),
            space,
        })
    }

    /// Wraps a matrix already in the canonical order of `space`.
    pub fn on_space(matrix: CMatrix, space: Space) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {}",
                matrix.nrows(),
                matrix.ncols(),
                space
            )));
        }
        Ok(Self { matrix, space })
    }

    pub fn identity(space: Space) -> Self {
        Self {
            matrix: identity(space.dim()),
            space,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            space: self.space.clone(),
        }
    }

    /// Tensor with the identity on every system of `target` not already acted on.
    pub fn embed_into(&self, target: &Space) -> Result<LabeledOperator> {
        let matrix = embed_map(&self.matrix, &self.space, &self.space, target, target)?;
        Ok(Self {
            matrix,
            space: target.clone(),
        })
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermitian_residual(&self.matrix)
    }

    pub fn trace(&self) -> num_complex::Complex64 {
        self.matrix.trace()
    }
}

/// Tensor an operator with identities on all other registry systems.
pub fn embed(op: &LabeledOperator, registry: &SystemRegistry) -> Result<LabeledOperator> {
    for f in op.space.factors() {
        if registry.dim_of(&f.label)? != f.dim {
            return Err(Error::DimensionMismatch(format!(
                "dimension of `{}` differs from the registry",
                f.label
            )));
        }
    }
    op.embed_into(&registry.full_space())
}

/// Partial trace onto `keep`, which must be a subset of the operator's systems.
pub fn partial_trace(op: &LabeledOperator, keep: &Space) -> Result<LabeledOperator> {
    if !keep.is_subset_of(&op.space) {
        return Err(Error::DimensionMismatch(format!(
            "cannot keep {keep} of an operator on {}",
            op.space
        )));
    }
    let rest_dim = op.space.difference(keep).dim();
    let table = compose_table(&op.space, keep);
    let d = keep.dim();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = ZERO;
            for r in 0..rest_dim {
                acc += op.matrix[(table[i * rest_dim + r], table[j * rest_dim + r])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(LabeledOperator {
        matrix: out,
        space: keep.clone(),
    })
}

/// A linear map from `inputs` to `outputs` with `V†V = I`.
///
/// Every input system persists as an output; outputs not among the inputs are
/// fresh systems created by the operation.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledIsometry {
    matrix: CMatrix,
    inputs: Space,
    outputs: Space,
}

impl LabeledIsometry {
    pub fn new(
        matrix: CMatrix,
        inputs: &[SystemLabel],
        outputs: &[SystemLabel],
        registry: &SystemRegistry,
        tol_op: f64,
    ) -> Result<Self> {
        let (in_space, in_perm) = ordered_space(inputs, registry)?;
        let (out_space, out_perm) = ordered_space(outputs, registry)?;
        if matrix.nrows() != out_space.dim() || matrix.ncols() != in_space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for map {} -> {} (expected {}x{})",
                matrix.nrows(),
                matrix.ncols(),
                in_space,
                out_space,
                out_space.dim(),
                in_space.dim()
            )));
        }
        Self::on_spaces(permute(&matrix, &out_perm, &in_perm), in_space, out_space, tol_op)
    }

    /// Wraps a matrix already in canonical order.
    pub fn on_spaces(matrix: CMatrix, inputs: Space, outputs: Space, tol_op: f64) -> Result<Self> {
        if matrix.nrows() != outputs.dim() || matrix.ncols() != inputs.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for map {inputs} -> {outputs}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let consumed: Vec<String> = inputs.difference(&outputs).labels().map(|l| l.to_string()).collect();
        if !consumed.is_empty() {
            return Err(Error::ConsumedSystems(consumed));
        }
        for f in inputs.factors() {
            let out_dim = outputs.factors().iter().find(|g| g.label == f.label).map(|g| g.dim);
            if out_dim != Some(f.dim) {
                return Err(Error::DimensionMismatch(format!(
                    "system `{}` changes dimension",
                    f.label
                )));
            }
        }
        let residual = isometry_residual(&matrix);
        if residual > tol_op {
            return Err(Error::NotIsometry { residual });
        }
        Ok(Self {
            matrix,
            inputs,
            outputs,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn inputs(&self) -> &Space {
        &self.inputs
    }

    pub fn outputs(&self) -> &Space {
        &self.outputs
    }

    /// Systems created by this operation.
    pub fn created(&self) -> Space {
        self.outputs.difference(&self.inputs)
    }

    pub fn is_unitary(&self, tol_op: f64) -> bool {
        self.inputs == self.outputs
            && frobenius(&(&self.matrix * self.matrix.adjoint() - identity(self.matrix.nrows()))) <= tol_op
    }

    /// The map tensored with identities, from `full_in` to `full_in ∪ created`.
    pub fn embed_into(&self, full_in: &Space) -> Result<(CMatrix, Space)> {
        let full_out = full_in.union(&self.outputs);
        let m = embed_map(&self.matrix, &self.inputs, &self.outputs, full_in, &full_out)?;
        Ok((m, full_out))
    }
}

pub fn isometry_residual(m: &CMatrix) -> f64 {
    frobenius(&(m.adjoint() * m - identity(m.ncols())))
}

/// A unit vector on a set of systems.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    vector: CVector,
    space: Space,
}

impl PureState {
    /// Normalizes the vector unless it is already of unit norm to within
    /// rounding, so that serialized states read back bit-identically.
    pub fn new(vector: CVector, acts_on: &[SystemLabel], registry: &SystemRegistry) -> Result<Self> {
        let (space, perm) = ordered_space(acts_on, registry)?;
        if vector.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} on {} (dimension {})",
                vector.len(),
                space,
                space.dim()
            )));
        }
        let mut permuted = CVector::zeros(vector.len());
        for (i, &p) in perm.iter().enumerate() {
            permuted[p] = vector[i];
        }
        Self::on_space(permuted, space)
    }

    pub fn on_space(vector: CVector, space: Space) -> Result<Self> {
        if vector.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} on {}",
                vector.len(),
                space
            )));
        }
        let norm_sqr = vector.norm_squared();
        if norm_sqr <= f64::MIN_POSITIVE {
            return Err(Error::ZeroState);
        }
        let vector = if (norm_sqr - 1.0).abs() > 1e-14 {
            vector.unscale(norm_sqr.sqrt())
        } else {
            vector
        };
        Ok(Self { vector, space })
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn density(&self) -> LabeledOperator {
        LabeledOperator {
            matrix: &self.vector * self.vector.adjoint(),
            space: self.space.clone(),
        }
    }

    /// Tensor product, reordered canonically.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if !self.space.is_disjoint_from(&other.space) {
            return Err(Error::DimensionMismatch(format!(
                "states on {} and {} overlap",
                self.space, other.space
            )));
        }
        let full = self.space.union(&other.space);
        // |a⟩⊗|b⟩ as the map (trivial → a) applied after embedding b
        let col_a = CMatrix::from_column_slice(self.vector.len(), 1, self.vector.as_slice());
        let col_b = CMatrix::from_column_slice(other.vector.len(), 1, other.vector.as_slice());
        let append_a = embed_map(&col_a, &Space::trivial(), &self.space, &other.space, &full)?;
        let v = append_a * col_b;
        Ok(PureState {
            vector: v.column(0).into_owned(),
            space: full,
        })
    }
}

impl PureState {
    /// The computational basis state `|index⟩` on one system.
    pub fn basis(label: &SystemLabel, index: usize, registry: &SystemRegistry) -> Result<Self> {
        let space = registry.space([label])?;
        if index >= space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} on `{label}` of dimension {}",
                space.dim()
            )));
        }
        let mut v = CVector::zeros(space.dim());
        v[index] = ONE;
        Ok(Self { vector: v, space })
    }
}

/// Validates a time-ordered list of isometries and tracks which systems exist
/// before each step.
#[derive(Clone, Debug)]
pub struct TimelineLayout {
    /// Systems present before the first operation.
    pub initial: Space,
    /// `alive[i]` is the space before operation `i`; `alive[n]` is the final space.
    pub alive: Vec<Space>,
}

impl TimelineLayout {
    /// `steps` are `(time, inputs, outputs)` in time order.
    pub fn new<'a, I>(steps: I, registry: &SystemRegistry) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, &'a Space, &'a Space)> + Clone,
    {
        let mut created = Space::trivial();
        for (time, inputs, outputs) in steps.clone() {
            let fresh = outputs.difference(inputs);
            for label in fresh.labels() {
                if created.contains(label) {
                    return Err(Error::CreatedTwice {
                        label: label.to_string(),
                        time,
                    });
                }
            }
            created = created.union(&fresh);
        }
        let initial = registry.full_space().difference(&created);
        let mut alive = vec![initial.clone()];
        let mut current = initial.clone();
        for (time, inputs, outputs) in steps {
            for label in inputs.labels() {
                if !current.contains(label) {
                    return Err(Error::NotYetExisting {
                        label: label.to_string(),
                        time,
                    });
                }
            }
            current = current.union(outputs);
            alive.push(current.clone());
        }
        Ok(Self { initial, alive })
    }

    pub fn final_space(&self) -> &Space {
        self.alive.last().expect("layout has at least the initial space")
    }
}

/// Composes time-ordered isometries into one isometry from the initial systems
/// (registry systems no operation creates) to the final systems.
pub fn compose_timeline(
    ops: &[(i64, LabeledIsometry)],
    registry: &SystemRegistry,
    tol_op: f64,
) -> Result<LabeledIsometry> {
    let layout = TimelineLayout::new(ops.iter().map(|(t, op)| (*t, op.inputs(), op.outputs())), registry)?;
    let mut total = identity(layout.initial.dim());
    for (i, (_, op)) in ops.iter().enumerate() {
        let (m, out) = op.embed_into(&layout.alive[i])?;
        debug_assert_eq!(&out, &layout.alive[i + 1]);
        total = m * total;
    }
    LabeledIsometry::on_spaces(total, layout.initial.clone(), layout.final_space().clone(), tol_op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::linalg::{c, real};

    fn reg() -> SystemRegistry {
        SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap()
    }

    fn sz() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    #[test]
    fn embed_sigma_z_on_m() {
        let r = reg();
        let op = LabeledOperator::new(sz(), &["M".into()], &r).unwrap();
        let e = embed(&op, &r).unwrap();
        let want = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE, ONE, -ONE]));
        assert_eq!(e.matrix(), &want);
    }

    #[test]
    fn embed_identity_is_global_identity() {
        let r = SystemRegistry::from_entries([("S", 2), ("M", 3), ("E", 2)]).unwrap();
        let op = LabeledOperator::identity(r.space_of(&["S"]).unwrap());
        assert_eq!(embed(&op, &r).unwrap().matrix(), &identity(12));
    }

    #[test]
    fn constructor_permutes_to_canonical_order() {
        let r = reg();
        // |0⟩⟨0|_M ⊗ |1⟩⟨1|_S listed as (M, S)
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = ONE; // M=0, S=1
        let op = LabeledOperator::new(m, &["M".into(), "S".into()], &r).unwrap();
        // canonical (S, M): S=1, M=0 -> index 2
        assert_eq!(op.matrix()[(2, 2)], ONE);
        assert_eq!(op.matrix()[(1, 1)], ZERO);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let r = reg();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![real(h), ZERO, ZERO, real(h)]);
        let psi = PureState::new(v, &["S".into(), "M".into()], &r).unwrap();
        let red = partial_trace(&psi.density(), &r.space_of(&["S"]).unwrap()).unwrap();
        assert!(frobenius(&(red.matrix() - identity(2) * real(0.5))) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_factorizes() {
        let r = reg();
        let a = PureState::new(CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]), &["S".into()], &r).unwrap();
        let b = PureState::new(CVector::from_vec(vec![real(1.0), real(1.0)]), &["M".into()], &r).unwrap();
        let ab = a.tensor(&b).unwrap();
        let red = partial_trace(&ab.density(), a.space()).unwrap();
        assert!(frobenius(&(red.matrix() - a.density().matrix())) < 1e-14);
    }

    #[test]
    fn state_constructor_normalizes() {
        let r = reg();
        let s = PureState::new(CVector::from_vec(vec![ONE, ONE]), &["S".into()], &r).unwrap();
        assert!((s.vector().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            PureState::new(CVector::zeros(2), &["S".into()], &r),
            Err(Error::ZeroState)
        ));
    }

    #[test]
    fn isometry_rejects_consumed_inputs() {
        let r = reg();
        let swap_out = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]);
        let err = LabeledIsometry::new(swap_out, &["S".into()], &["M".into()], &r, 1e-9).unwrap_err();
        assert!(matches!(err, Error::ConsumedSystems(_)));
    }

    #[test]
    fn timeline_rejects_double_creation_and_missing_inputs() {
        let r = reg();
        let append = CMatrix::from_row_slice(4, 2, &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ONE]);
        let v = LabeledIsometry::new(append, &["S".into()], &["S".into(), "M".into()], &r, 1e-9).unwrap();
        let err = compose_timeline(&[(0, v.clone()), (1, v.clone())], &r, 1e-9).unwrap_err();
        assert!(matches!(err, Error::CreatedTwice { .. }));

        let on_m = LabeledIsometry::new(identity(2), &["M".into()], &["M".into()], &r, 1e-9).unwrap();
        let err = compose_timeline(&[(0, on_m), (1, v)], &r, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NotYetExisting { .. }));
    }
}
