use crate::error::{Error, Result};
use crate::hilbert::checks::is_observable;
use crate::hilbert::linalg::{frobenius, identity, real, CMatrix, CVector};
use crate::hilbert::{spectral_resolution, LabeledOperator, Space};
use crate::Tolerances;

/// One spectral cluster of an observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub value: f64,
    pub projector: LabeledOperator,
}

/// A Hermitian operator together with its labeled spectral projectors.
///
/// Record observables may carry a zero projector for an outcome that can
/// never occur; every other invariant of a spectral resolution holds.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    operator: LabeledOperator,
    outcomes: Vec<Outcome>,
}

impl Observable {
    /// Resolves `operator` and labels its clusters in ascending eigenvalue order.
    pub fn from_operator(operator: LabeledOperator, labels: &[&str], tols: &Tolerances) -> Result<Self> {
        let resolution = spectral_resolution(&operator, tols.cluster_tol, tols.tol_op)?;
        if resolution.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} outcome labels for {} eigenvalue clusters",
                labels.len(),
                resolution.len()
            )));
        }
        let outcomes = resolution
            .into_iter()
            .zip(labels)
            .map(|((value, projector), label)| Outcome {
                label: label.to_string(),
                value,
                projector,
            })
            .collect();
        Ok(Self { operator, outcomes })
    }

    /// Builds `Σ_k value_k P_k` from explicit projectors.
    pub fn from_projectors(outcomes: Vec<(String, f64, LabeledOperator)>, tol_op: f64) -> Result<Self> {
        let Some((_, _, first)) = outcomes.first() else {
            return Err(Error::DimensionMismatch("observable without outcomes".into()));
        };
        let space = first.space().clone();
        let d = space.dim();
        let mut op = CMatrix::zeros(d, d);
        for (i, (label, value, p)) in outcomes.iter().enumerate() {
            if p.space() != &space {
                return Err(Error::DimensionMismatch(format!(
                    "projector `{label}` acts on {} instead of {space}",
                    p.space()
                )));
            }
            if outcomes[..i].iter().any(|(l, v, _)| l == label || v == value) {
                return Err(Error::DimensionMismatch(format!(
                    "outcome labels and values must be distinct (`{label}`)"
                )));
            }
            op += p.matrix() * real(*value);
        }
        let obs = Self {
            operator: LabeledOperator::on_space(op, space)?,
            outcomes: outcomes
                .into_iter()
                .map(|(label, value, projector)| Outcome {
                    label,
                    value,
                    projector,
                })
                .collect(),
        };
        let check = obs.consistency(tol_op);
        if check > tol_op {
            return Err(Error::NotHermitian { residual: check });
        }
        Ok(obs)
    }

    /// Projectors onto orthonormal vectors, plus an optional complement
    /// outcome for the rest of the space. Values are the list positions.
    pub fn from_basis(
        vectors: Vec<(String, CVector)>,
        space: Space,
        complement: Option<String>,
        tol_op: f64,
    ) -> Result<Self> {
        let d = space.dim();
        let mut outcomes = Vec::new();
        let mut covered = CMatrix::zeros(d, d);
        for (i, (label, v)) in vectors.into_iter().enumerate() {
            if v.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "basis vector `{label}` has length {} on {space}",
                    v.len()
                )));
            }
            let p = &v * v.adjoint();
            covered += &p;
            outcomes.push((label, i as f64, LabeledOperator::on_space(p, space.clone())?));
        }
        if let Some(label) = complement {
            let rest = identity(d) - &covered;
            let n = outcomes.len() as f64;
            outcomes.push((label, n, LabeledOperator::on_space(rest, space.clone())?));
        }
        Self::from_projectors(outcomes, tol_op)
    }

    pub fn operator(&self) -> &LabeledOperator {
        &self.operator
    }

    pub fn space(&self) -> &Space {
        self.operator.space()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|o| o.label.as_str())
    }

    pub fn projector(&self, label: &str) -> Option<&LabeledOperator> {
        self.outcomes.iter().find(|o| o.label == label).map(|o| &o.projector)
    }

    /// Largest residual among Hermiticity, `Σ λ P = A`, orthogonality and completeness.
    pub fn consistency(&self, tol_op: f64) -> f64 {
        let res: Vec<(f64, &CMatrix)> = self.outcomes.iter().map(|o| (o.value, o.projector.matrix())).collect();
        is_observable(self.operator.matrix(), &res, tol_op).residual
    }

    /// Same observable tensored with the identity on the rest of `target`.
    pub fn embed_into(&self, target: &Space) -> Result<Observable> {
        Ok(Self {
            operator: self.operator.embed_into(target)?,
            outcomes: self
                .outcomes
                .iter()
                .map(|o| {
                    Ok(Outcome {
                        label: o.label.clone(),
                        value: o.value,
                        projector: o.projector.embed_into(target)?,
                    })
                })
                .collect::<Result<_>>()?,
        })
    }

    /// Same projectors and values under new labels, given in outcome order.
    pub fn relabel(&self, labels: &[&str]) -> Result<Observable> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} outcomes",
                labels.len(),
                self.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DimensionMismatch(format!("duplicate outcome label `{l}`")));
            }
        }
        Ok(Self {
            operator: self.operator.clone(),
            outcomes: self
                .outcomes
                .iter()
                .zip(labels)
                .map(|(o, l)| Outcome {
                    label: l.to_string(),
                    ..o.clone()
                })
                .collect(),
        })
    }

    /// Whether two observables have the same projector for every label.
    pub fn same_projectors(&self, other: &Observable, tol: f64) -> bool {
        self.len() == other.len()
            && self.outcomes.iter().all(|o| {
                other.projector(&o.label).is_some_and(|p| {
                    p.space() == o.projector.space() && frobenius(&(p.matrix() - o.projector.matrix())) <= tol
                })
            })
    }
}
