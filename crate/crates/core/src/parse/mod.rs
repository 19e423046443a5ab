//! Deciding whether an isometry parses as a measurement in a context.
//!
//! A claim parses when some record observable on the isometry's outputs
//! (condition 1) pulls back to the POVM and (condition 2) commutes with every
//! later operation of the context. [`ParseEngine::verify_parse`] checks a
//! supplied record; [`ParseEngine::find_record_observable`] searches for one:
//!
//! - **L1** solves the linear relaxation. No solution is a certificate.
//! - **L2** enumerates sums of minimal projectors when the admissible
//!   operators commute. This is exact in both directions. For a
//!   noncommutative commutant the same search runs on its center; success
//!   there is a valid record, failure proves nothing.
//! - **L3** descends on a projector penalty from random starts. Failure is
//!   reported as heuristic.

mod commutant;
mod conditions;
mod search;
mod verdict;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use commutant::{commutant_basis, record_commutant};
pub use conditions::{commutes_with_record, post_ops, pullback, verify_condition1, Condition1Report};
pub use verdict::{FailedCondition, ParseStatus, ParseVerdict, Residuals, SearchLayer, Witness};

use crate::error::{Error, Result};
use crate::hilbert::linalg::{frobenius, identity, CMatrix};
use crate::hilbert::{LabeledOperator, SystemRegistry};
use crate::measurement::{Observable, ParseClaim};
use crate::Tolerances;
use commutant::{center, pairwise_commuting, span_residual};
use search::{assign, descend, minimal_projectors, round_to_projector, AffineSet, Assignment, LinearSystem};

/// Search nodes before the assignment search gives up and defers to L3.
const ASSIGNMENT_NODE_CAP: u64 = 1_000_000;
/// Largest commutant dimension for which the center is computed.
const CENTER_MAX_DIM: usize = 128;

/// The parse engine for one system registry.
///
/// Randomness (state sampling in the condition-1 cross-check, L3 starts) is
/// seeded per claim from `seed` and the claim's time, so verdicts do not
/// depend on the order claims are processed in.
#[derive(Clone, Debug)]
pub struct ParseEngine<'a> {
    registry: &'a SystemRegistry,
    tols: Tolerances,
    seed: u64,
}

/// Whether a witness still certifies what it claims when re-evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessCheck {
    pub confirmed: bool,
    pub residual: Option<f64>,
}

impl<'a> ParseEngine<'a> {
    pub fn new(registry: &'a SystemRegistry, tols: Tolerances, seed: u64) -> Self {
        Self { registry, tols, seed }
    }

    pub fn registry(&self) -> &SystemRegistry {
        self.registry
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn rng_for(&self, claim: &ParseClaim, stream: u64) -> ChaCha8Rng {
        let t = claim.time as u64;
        ChaCha8Rng::seed_from_u64(
            self.seed ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03),
        )
    }

    /// Verifies the claim's candidate record, or searches when there is none.
    pub fn parse(&self, claim: &ParseClaim) -> Result<ParseVerdict> {
        if claim.candidate_record.is_some() {
            self.verify_parse(claim)
        } else {
            self.find_record_observable(claim)
        }
    }

    /// Checks both conditions for the claim's candidate record.
    pub fn verify_parse(&self, claim: &ParseClaim) -> Result<ParseVerdict> {
        let record = claim.candidate_record.as_ref().ok_or_else(|| Error::MalformedClaim {
            claim: claim.name.clone(),
            reason: "no candidate record to verify".into(),
        })?;
        self.verify_record(claim, record, SearchLayer::Verify)
    }

    /// Checks both conditions for `record`, reporting the first violation.
    pub fn verify_record(&self, claim: &ParseClaim, record: &Observable, layer: SearchLayer) -> Result<ParseVerdict> {
        let checked = ParseClaim {
            candidate_record: Some(record.clone()),
            ..claim.clone()
        };
        checked.validate()?;
        let timeline = claim.timeline()?;
        let layout = timeline.layout(self.registry)?;

        let mut residuals = Residuals::default();
        let mut rng = self.rng_for(claim, 1);
        let c1 = verify_condition1(
            &claim.isometry,
            &claim.povm,
            record,
            self.tols.tol_op,
            self.tols.n_random_states,
            &mut rng,
        )?;
        residuals.condition1 = Some(c1.residual);
        let verdict = |status, failed, witness, residuals| ParseVerdict {
            claim: claim.name.clone(),
            status,
            layer,
            record: Some(record.clone()),
            failed_condition: failed,
            witness,
            residuals,
        };
        if !c1.holds {
            let (outcome, residual) = c1
                .per_outcome
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .cloned()
                .expect("POVM has outcomes");
            return Ok(verdict(
                ParseStatus::RecordRejected,
                Some(FailedCondition::Condition1),
                Some(Witness::Outcome { outcome, residual }),
                residuals,
            ));
        }

        let mut worst: f64 = 0.0;
        for (i, op) in timeline.ops().iter().enumerate() {
            if op.time <= claim.time {
                continue;
            }
            let check = commutes_with_record(op, record, &layout.alive[i], self.tols.tol_op)?;
            worst = worst.max(check.residual);
            if !check.holds {
                residuals.condition2 = Some(check.residual);
                return Ok(verdict(
                    ParseStatus::RecordRejected,
                    Some(FailedCondition::Condition2),
                    Some(Witness::ContextOp {
                        time: op.time,
                        name: op.name.clone(),
                        residual: check.residual,
                    }),
                    residuals,
                ));
            }
        }
        residuals.condition2 = Some(worst);
        Ok(verdict(ParseStatus::Parsed, None, None, residuals))
    }

    /// Hermitian basis of the operators on the claim's outputs allowed by condition 2.
    pub fn admissible_basis(&self, claim: &ParseClaim) -> Result<Vec<LabeledOperator>> {
        let post = claim.context.post_ops(claim.time);
        record_commutant(&post, claim.isometry.outputs(), self.tols.feasibility_tol)
    }

    fn linear_system(&self, claim: &ParseClaim) -> Result<LinearSystem> {
        claim.validate()?;
        claim.timeline()?.layout(self.registry)?;
        let basis: Vec<CMatrix> = self
            .admissible_basis(claim)?
            .into_iter()
            .map(LabeledOperator::into_matrix)
            .collect();
        let d = claim.isometry.outputs().dim();
        let id_res = span_residual(&identity(d), &basis);
        if id_res > 1e-6 {
            return Err(Error::CrossValidation(format!(
                "identity is not in the computed commutant (residual {id_res:.3e})"
            )));
        }
        Ok(LinearSystem::new(&claim.isometry, &claim.povm, basis))
    }

    /// Searches for a record observable; see the module docs for the layers.
    /// Any candidate record on the claim is ignored.
    pub fn find_record_observable(&self, claim: &ParseClaim) -> Result<ParseVerdict> {
        let system = self.linear_system(claim)?;
        let mut residuals = Residuals {
            commutant_dim: Some(system.m()),
            ..Residuals::default()
        };
        let no_parse = |status, layer, failed, witness, residuals| ParseVerdict {
            claim: claim.name.clone(),
            status,
            layer,
            record: None,
            failed_condition: failed,
            witness,
            residuals,
        };

        // L1
        for k in 0..system.k() {
            let r = system.outcome_residual(k);
            if r > self.tols.feasibility_tol {
                residuals.feasibility = Some(r);
                return Ok(no_parse(
                    ParseStatus::NoParseCertified,
                    SearchLayer::L1,
                    Some(FailedCondition::LinearFeasibility),
                    Some(Witness::InfeasibleOutcome {
                        outcome: system.labels[k].clone(),
                        residual: r,
                    }),
                    residuals,
                ));
            }
        }
        let joint = system.joint_residual();
        residuals.feasibility = Some(joint);
        if joint > self.tols.feasibility_tol {
            return Ok(no_parse(
                ParseStatus::NoParseCertified,
                SearchLayer::L1,
                Some(FailedCondition::LinearFeasibility),
                Some(Witness::InfeasibleJoint { residual: joint }),
                residuals,
            ));
        }

        // L2
        if pairwise_commuting(&system.basis, 1e-8) {
            match self.assignment_search(claim, &system, &system.basis)? {
                L2::Found(verdict) => return Ok(self.with_layer(*verdict, SearchLayer::L2, &residuals)),
                L2::Exhausted { minimal, nodes } => {
                    return Ok(no_parse(
                        ParseStatus::NoParseCertified,
                        SearchLayer::L2,
                        Some(FailedCondition::Condition1),
                        Some(Witness::ExhaustedAssignments {
                            minimal_projectors: minimal,
                            nodes,
                        }),
                        residuals,
                    ));
                }
                L2::Inconclusive => {}
            }
        } else if system.m() <= CENTER_MAX_DIM {
            let z = center(&system.basis, self.tols.feasibility_tol);
            if let L2::Found(verdict) = self.assignment_search(claim, &system, &z)? {
                return Ok(self.with_layer(*verdict, SearchLayer::L2Center, &residuals));
            }
        }

        // L3
        if let Some(verdict) = self.aligned_candidate(claim, &system)? {
            return Ok(self.with_layer(verdict, SearchLayer::L3, &residuals));
        }
        let affine = AffineSet::new(&system);
        let mut rng = self.rng_for(claim, 2);
        let mut best = f64::INFINITY;
        for _ in 0..self.tols.n_restarts.max(1) {
            let run = descend(&system, &affine, &mut rng);
            best = best.min(run.penalty);
            if run.penalty > self.tols.tol_idem {
                continue;
            }
            let cleaned = split_at_image(claim, &run.projectors);
            if let Some(verdict) = self.try_projectors(claim, &system, cleaned)? {
                let mut verdict = self.with_layer(verdict, SearchLayer::L3, &residuals);
                verdict.residuals.idempotency = Some(run.penalty);
                return Ok(verdict);
            }
            let Some(record) = self.record_from(claim, &system, run.projectors) else {
                continue;
            };
            let verdict = self.verify_record(claim, &record, SearchLayer::L3)?;
            if verdict.is_parsed() {
                let mut verdict = self.with_layer(verdict, SearchLayer::L3, &residuals);
                verdict.residuals.idempotency = Some(run.penalty);
                return Ok(verdict);
            }
        }
        residuals.idempotency = Some(best);
        Ok(no_parse(
            ParseStatus::NoParseHeuristic,
            SearchLayer::L3,
            None,
            None,
            residuals,
        ))
    }

    fn try_projectors(
        &self,
        claim: &ParseClaim,
        system: &LinearSystem,
        projectors: Vec<CMatrix>,
    ) -> Result<Option<ParseVerdict>> {
        let Some(record) = self.record_from(claim, system, projectors) else {
            return Ok(None);
        };
        let verdict = self.verify_record(claim, &record, SearchLayer::L3)?;
        Ok(verdict.is_parsed().then_some(verdict))
    }

    /// For a sharp POVM, `V E_k V†` with the complement of the image given
    /// to the first outcome.
    fn aligned_candidate(&self, claim: &ParseClaim, system: &LinearSystem) -> Result<Option<ParseVerdict>> {
        let v = claim.isometry.matrix();
        let effects: Vec<&CMatrix> = claim.povm.outcomes().iter().map(|(_, e)| e.matrix()).collect();
        if effects.iter().any(|e| frobenius(&(*e * *e - *e)) > self.tols.tol_op) {
            return Ok(None);
        }
        let mut projectors: Vec<CMatrix> = effects.iter().map(|e| v * *e * v.adjoint()).collect();
        let d = v.nrows();
        projectors[0] += identity(d) - v * v.adjoint();
        self.try_projectors(claim, system, projectors)
    }
    fn with_layer(&self, mut verdict: ParseVerdict, layer: SearchLayer, search: &Residuals) -> ParseVerdict {
        verdict.layer = layer;
        verdict.residuals.feasibility = search.feasibility;
        verdict.residuals.commutant_dim = search.commutant_dim;
        verdict
    }

    /// Values are outcome positions in the POVM.
    fn record_from(&self, claim: &ParseClaim, system: &LinearSystem, projectors: Vec<CMatrix>) -> Option<Observable> {
        let space = claim.isometry.outputs().clone();
        let outcomes = system
            .labels
            .iter()
            .zip(projectors)
            .enumerate()
            .map(|(k, (l, p))| Ok((l.clone(), k as f64, LabeledOperator::on_space(p, space.clone())?)))
            .collect::<Result<Vec<_>>>()
            .ok()?;
        Observable::from_projectors(outcomes, 10.0 * self.tols.tol_op).ok()
    }

    fn assignment_search(&self, claim: &ParseClaim, system: &LinearSystem, algebra: &[CMatrix]) -> Result<L2> {
        let d = claim.isometry.outputs().dim();
        let Some(minimal) = minimal_projectors(algebra, d, self.tols.cluster_tol) else {
            return Ok(L2::Inconclusive);
        };
        if minimal
            .iter()
            .any(|p| span_residual(p, &system.basis) > 10.0 * self.tols.tol_op)
        {
            return Ok(L2::Inconclusive);
        }
        let v = claim.isometry.matrix();
        let pulled: Vec<CMatrix> = minimal.iter().map(|p| v.adjoint() * p * v).collect();
        match assign(&pulled, &system.lambdas, self.tols.tol_op, ASSIGNMENT_NODE_CAP) {
            Assignment::Found(choice) => {
                let mut projectors = vec![CMatrix::zeros(d, d); system.k()];
                for (p, k) in minimal.iter().zip(choice) {
                    projectors[k] += p;
                }
                let record = self
                    .record_from(claim, system, projectors)
                    .ok_or_else(|| Error::CrossValidation("minimal projectors do not form an observable".into()))?;
                let verdict = self.verify_record(claim, &record, SearchLayer::L2)?;
                if !verdict.is_parsed() {
                    return Err(Error::CrossValidation(format!(
                        "assignment search accepted a record that fails verification for `{}`",
                        claim.name
                    )));
                }
                Ok(L2::Found(Box::new(verdict)))
            }
            Assignment::Exhausted { nodes } => Ok(L2::Exhausted {
                minimal: minimal.len(),
                nodes,
            }),
            Assignment::Capped => Ok(L2::Inconclusive),
        }
    }

    /// Re-evaluates a witness attached to a verdict for `claim`.
    ///
    /// Infeasibility witnesses recompute their least-squares residual.
    /// Condition witnesses need the claim's candidate record. Exhausted
    /// assignments re-run the enumeration.
    pub fn recheck_witness(&self, claim: &ParseClaim, witness: &Witness) -> Result<WitnessCheck> {
        let feas = self.tols.feasibility_tol;
        match witness {
            Witness::InfeasibleOutcome { outcome, .. } => {
                let system = self.linear_system(claim)?;
                let k = system
                    .labels
                    .iter()
                    .position(|l| l == outcome)
                    .ok_or_else(|| Error::UnknownOutcome {
                        event: claim.name.clone(),
                        outcome: outcome.clone(),
                    })?;
                let r = system.outcome_residual(k);
                Ok(WitnessCheck {
                    confirmed: r > feas,
                    residual: Some(r),
                })
            }
            Witness::InfeasibleJoint { .. } => {
                let r = self.linear_system(claim)?.joint_residual();
                Ok(WitnessCheck {
                    confirmed: r > feas,
                    residual: Some(r),
                })
            }
            Witness::ExhaustedAssignments { .. } => {
                let system = self.linear_system(claim)?;
                if !pairwise_commuting(&system.basis, 1e-8) {
                    return Ok(WitnessCheck {
                        confirmed: false,
                        residual: None,
                    });
                }
                let confirmed = matches!(
                    self.assignment_search(claim, &system, &system.basis)?,
                    L2::Exhausted { .. }
                );
                Ok(WitnessCheck {
                    confirmed,
                    residual: None,
                })
            }
            Witness::Outcome { outcome, .. } => {
                let verdict = self.verify_parse(claim)?;
                let residual = match &verdict.witness {
                    Some(Witness::Outcome { outcome: o, residual }) if o == outcome => Some(*residual),
                    _ => None,
                };
                Ok(WitnessCheck {
                    confirmed: residual.is_some_and(|r| r > self.tols.tol_op),
                    residual,
                })
            }
            Witness::ContextOp { time, .. } => {
                let record = claim.candidate_record.as_ref().ok_or_else(|| Error::MalformedClaim {
                    claim: claim.name.clone(),
                    reason: "no candidate record to re-check".into(),
                })?;
                let timeline = claim.timeline()?;
                let layout = timeline.layout(self.registry)?;
                let i = timeline
                    .ops()
                    .iter()
                    .position(|o| o.time == *time)
                    .ok_or(Error::TimelineConflict(*time))?;
                let check = commutes_with_record(&timeline.ops()[i], record, &layout.alive[i], self.tols.tol_op)?;
                Ok(WitnessCheck {
                    confirmed: !check.holds,
                    residual: Some(check.residual),
                })
            }
        }
    }
}

enum L2 {
    Found(Box<ParseVerdict>),
    Exhausted { minimal: usize, nodes: u64 },
    Inconclusive,
}

/// Largest distance between corresponding projectors of two records with the
/// same labels, after embedding both into the union of their spaces.
pub fn record_distance(a: &Observable, b: &Observable) -> Result<f64> {
    let space = a.space().union(b.space());
    let (ea, eb) = (a.embed_into(&space)?, b.embed_into(&space)?);
    ea.outcomes()
        .iter()
        .map(|o| {
            let p = eb.projector(&o.label).ok_or_else(|| Error::UnknownOutcome {
                event: "record".into(),
                outcome: o.label.clone(),
            })?;
            Ok(frobenius(&(o.projector.matrix() - p.matrix())))
        })
        .try_fold(0.0f64, |acc, r: Result<f64>| Ok(acc.max(r?)))
}

#[cfg(test)]
mod tests;

/// Drops the blocks of each projector that couple the image of the claimed
/// isometry to its complement, then re-rounds.
fn split_at_image(claim: &ParseClaim, projectors: &[CMatrix]) -> Vec<CMatrix> {
    let v = claim.isometry.matrix();
    let q = v * v.adjoint();
    let qc = identity(q.nrows()) - &q;
    projectors
        .iter()
        .map(|p| round_to_projector(&(&q * p * &q + &qc * p * &qc)))
        .collect()
}
