use crate::error::{Error, Result};
use crate::hilbert::linalg::{frobenius, identity, CMatrix};
use crate::hilbert::{LabeledIsometry, LabeledOperator, PureState, Space, SystemLabel, SystemRegistry, TimelineLayout};
use crate::measurement::{dynamical_description, Context, Operation};

/// One step of an expanded timeline.
#[derive(Clone, Debug)]
pub struct Step {
    pub time: i64,
    pub name: String,
    pub isometry: LabeledIsometry,
}

/// A context with every observable measurement replaced by its copy-to-pointer
/// dilation, so the whole history is one pure-state evolution.
///
/// The pointer of the measurement at time `t` is the system `ptr:t`, with one
/// level per outcome, appended to a copy of the registry.
#[derive(Clone, Debug)]
pub struct ExpandedTimeline {
    registry: SystemRegistry,
    steps: Vec<Step>,
    layout: TimelineLayout,
}

pub fn pointer_label(time: i64) -> String {
    format!("ptr:{time}")
}

impl ExpandedTimeline {
    pub fn new(context: &Context, registry: &SystemRegistry, tol_op: f64) -> Result<Self> {
        context.layout(registry)?;
        let mut reg = registry.clone();
        let mut steps = Vec::with_capacity(context.len());
        for op in context.ops() {
            let isometry = match &op.op {
                Operation::Unitary(v) | Operation::Isometry(v) => v.clone(),
                Operation::Measurement(obs) => {
                    let label = pointer_label(op.time);
                    reg = reg.with_system(label.as_str(), obs.len())?;
                    dynamical_description(obs, &SystemLabel::new(label)?, &reg, tol_op)?
                }
            };
            steps.push(Step {
                time: op.time,
                name: op.name.clone(),
                isometry,
            });
        }
        let layout = TimelineLayout::new(
            steps
                .iter()
                .map(|s| (s.time, s.isometry.inputs(), s.isometry.outputs())),
            &reg,
        )?;
        Ok(Self {
            registry: reg,
            steps,
            layout,
        })
    }

    /// The registry extended with pointer systems.
    pub fn registry(&self) -> &SystemRegistry {
        &self.registry
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn initial_space(&self) -> &Space {
        &self.layout.initial
    }

    pub fn final_space(&self) -> &Space {
        self.layout.final_space()
    }

    /// Number of steps at or before `time`.
    pub fn steps_through(&self, time: i64) -> usize {
        self.steps.iter().take_while(|s| s.time <= time).count()
    }

    /// Systems present after every step at or before `time`.
    pub fn alive_after(&self, time: i64) -> &Space {
        &self.layout.alive[self.steps_through(time)]
    }

    /// Composition of steps `start..end`, mapping `alive[start]` to `alive[end]`.
    pub fn evolution(&self, start: usize, end: usize) -> Result<CMatrix> {
        let mut w = identity(self.layout.alive[start].dim());
        for (i, step) in self.steps.iter().enumerate().take(end).skip(start) {
            let (m, _) = step.isometry.embed_into(&self.layout.alive[i])?;
            w = m * w;
        }
        Ok(w)
    }

    /// Runs `state` (on the initial systems) through steps `0..end`.
    pub fn evolve(&self, state: &PureState, end: usize) -> Result<PureState> {
        if state.space() != self.initial_space() {
            return Err(Error::InitialStateMismatch {
                expected: self.initial_space().label_names(),
                found: state.space().label_names(),
            });
        }
        let v = self.evolution(0, end)? * state.vector();
        PureState::on_space(v, self.layout.alive[end].clone())
    }

    /// Runs a vector on `alive[start]` through the remaining steps.
    pub fn evolve_from(&self, vector: &crate::hilbert::CVector, start: usize) -> Result<crate::hilbert::CVector> {
        Ok(self.evolution(start, self.steps.len())? * vector)
    }

    pub fn alive(&self, index: usize) -> &Space {
        &self.layout.alive[index]
    }
}

/// The record `P`, placed after every step at or before `time`, as a
/// projector on the final space.
///
/// The later steps `W` must carry the record along, `W P̂ = P̂_end W` within
/// `10·tol_op`; on the image of `W` the result then equals `W P̂ W†`.
pub fn pushforward_projector(
    p: &LabeledOperator,
    time: i64,
    timeline: &ExpandedTimeline,
    tol_op: f64,
) -> Result<LabeledOperator> {
    check_carried(p, time, timeline, tol_op)?;
    p.embed_into(timeline.final_space())
}

/// Fails unless the steps after `time` carry `p` along within `10·tol_op`.
pub(crate) fn check_carried(p: &LabeledOperator, time: i64, timeline: &ExpandedTimeline, tol_op: f64) -> Result<()> {
    let start = timeline.steps_through(time);
    let alive = timeline.alive(start);
    if let Some(label) = p.space().labels().find(|l| !alive.contains(l)) {
        return Err(Error::RecordNotAlive {
            label: label.to_string(),
            time,
        });
    }
    let before = p.embed_into(alive)?;
    let after = p.embed_into(timeline.final_space())?;
    let w = timeline.evolution(start, timeline.steps().len())?;
    let residual = frobenius(&(&w * before.matrix() - after.matrix() * &w));
    if residual > 10.0 * tol_op {
        return Err(Error::RecordNotCarried { time, residual });
    }
    Ok(())
}

/// Largest commutator norm between projectors of different events, each
/// pair compared on the systems the two act on.
pub(crate) fn worst_commutator(events: &[Vec<LabeledOperator>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..events.len() {
        for b in a + 1..events.len() {
            for pa in &events[a] {
                for pb in &events[b] {
                    if pa.space().is_disjoint_from(pb.space()) {
                        continue;
                    }
                    let joint = pa.space().union(pb.space());
                    let ma = pa.embed_into(&joint)?.into_matrix();
                    let mb = pb.embed_into(&joint)?.into_matrix();
                    worst = worst.max(frobenius(&(&ma * &mb - &mb * &ma)));
                }
            }
        }
    }
    Ok(worst)
}

/// `|k⟩⟨k|` on the pointer of the measurement at `time`, on the final space.
pub fn pointer_projector(time: i64, k: usize, timeline: &ExpandedTimeline) -> Result<LabeledOperator> {
    local_pointer_projector(time, k, timeline)?.embed_into(timeline.final_space())
}

pub(crate) fn local_pointer_projector(time: i64, k: usize, timeline: &ExpandedTimeline) -> Result<LabeledOperator> {
    let label = SystemLabel::new(pointer_label(time))?;
    Ok(PureState::basis(&label, k, timeline.registry())?.density())
}
