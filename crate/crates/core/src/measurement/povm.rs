use crate::error::{Error, Result};
use crate::hilbert::checks::is_povm;
use crate::hilbert::{LabeledOperator, Space};
use crate::measurement::Observable;

/// Statistical description of a measurement: labeled positive effects that
/// sum to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    space: Space,
    outcomes: Vec<(String, LabeledOperator)>,
}

impl Povm {
    pub fn new(outcomes: Vec<(String, LabeledOperator)>, tol_op: f64) -> Result<Self> {
        let Some((_, first)) = outcomes.first() else {
            return Err(Error::NotPovm {
                residual: f64::INFINITY,
            });
        };
        let space = first.space().clone();
        for (i, (label, e)) in outcomes.iter().enumerate() {
            if e.space() != &space {
                return Err(Error::DimensionMismatch(format!(
                    "effect `{label}` acts on {} but the first effect acts on {space}",
                    e.space()
                )));
            }
            if outcomes[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::NotPovm {
                    residual: f64::INFINITY,
                });
            }
        }
        let effects: Vec<_> = outcomes.iter().map(|(_, e)| e.matrix()).collect();
        let check = is_povm(&effects, tol_op);
        if !check.holds {
            return Err(Error::NotPovm {
                residual: check.residual,
            });
        }
        Ok(Self { space, outcomes })
    }

    /// The spectral projectors of `obs`, under the same labels.
    pub fn from_observable(obs: &Observable) -> Self {
        Self {
            space: obs.space().clone(),
            outcomes: obs
                .outcomes()
                .iter()
                .map(|o| (o.label.clone(), o.projector.clone()))
                .collect(),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn outcomes(&self) -> &[(String, LabeledOperator)] {
        &self.outcomes
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|(l, _)| l.as_str())
    }

    pub fn effect(&self, label: &str) -> Option<&LabeledOperator> {
        self.outcomes.iter().find(|(l, _)| l == label).map(|(_, e)| e)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}
