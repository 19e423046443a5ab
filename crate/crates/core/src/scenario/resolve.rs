use std::fmt::Display;

use crate::error::Error;
use crate::hilbert::linalg::{c, CMatrix, CVector};
use crate::hilbert::{max_entangled, LabeledIsometry, LabeledOperator, PureState, SystemLabel, SystemRegistry};
use crate::measurement::{
    axis_basis, cnot, cnot_append, controlled_phase, dynamical_description, instrument_isometry, pauli, Axis, Context,
    ContextOp, MeasurementOperator, Observable, Operation, ParseClaim, Povm,
};
use crate::Tolerances;

use super::format::*;
use super::ScenarioError;

type Res<T> = std::result::Result<T, ScenarioError>;

fn model<T>(path: impl Display, r: crate::Result<T>) -> Res<T> {
    r.map_err(|source| ScenarioError::Model {
        path: path.to_string(),
        source,
    })
}

fn reference(path: impl Display, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Reference {
        path: path.to_string(),
        message: message.into(),
    }
}

fn axis(a: AxisSpec) -> Axis {
    match a {
        AxisSpec::X => Axis::X,
        AxisSpec::Y => Axis::Y,
        AxisSpec::Z => Axis::Z,
    }
}

/// A scenario with every spec turned into engine objects.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub registry: SystemRegistry,
    pub initial: PureState,
    /// Every timeline operation.
    pub timeline: Context,
    /// Claims in document order, each with its own context.
    pub claims: Vec<ParseClaim>,
}

impl Scenario {
    pub fn resolve(doc: &ScenarioDoc, tols: &Tolerances) -> Res<Self> {
        let r = Resolver {
            registry: registry(doc)?,
            tols: *tols,
        };
        let ops = doc
            .timeline
            .iter()
            .enumerate()
            .map(|(i, op)| r.op(op, &format!("timeline[{i}]")))
            .collect::<Res<Vec<_>>>()?;
        for (i, op) in doc.timeline.iter().enumerate() {
            if let Some(j) = doc.timeline[..i].iter().position(|o| o.time == op.time) {
                return Err(reference(
                    format!("timeline[{i}].time"),
                    format!("time {} is already used by timeline[{j}]", op.time),
                ));
            }
            if doc.timeline[..i].iter().any(|o| o.name == op.name) {
                return Err(reference(
                    format!("timeline[{i}].name"),
                    format!("duplicate name `{}`", op.name),
                ));
            }
        }
        let timeline = model("timeline", Context::new(ops))?;
        let layout = model("timeline", timeline.layout(&r.registry))?;
        let initial = r.state(&doc.initial_state, "initial_state")?;
        if initial.space() != &layout.initial {
            return Err(ScenarioError::Model {
                path: "initial_state".into(),
                source: Error::InitialStateMismatch {
                    expected: layout.initial.label_names(),
                    found: initial.space().label_names(),
                },
            });
        }
        let mut claims = Vec::with_capacity(doc.claims.len());
        for (i, spec) in doc.claims.iter().enumerate() {
            if doc.claims[..i].iter().any(|c| c.name == spec.name) {
                return Err(reference(
                    format!("claims[{i}].name"),
                    format!("duplicate claim `{}`", spec.name),
                ));
            }
            claims.push(r.claim(spec, &timeline, &format!("claims[{i}]"))?);
        }
        let scenario = Scenario {
            doc: doc.clone(),
            registry: r.registry,
            initial,
            timeline,
            claims,
        };
        for (i, q) in doc.queries.iter().enumerate() {
            scenario.check_query(q, &format!("queries[{i}]"))?;
        }
        Ok(scenario)
    }

    pub fn claim_index(&self, name: &str) -> Option<usize> {
        self.claims.iter().position(|c| c.name == name)
    }

    fn check_query(&self, q: &QuerySpec, path: &str) -> Res<()> {
        if let QuerySpec::Parse { claim } = q {
            return self
                .claim_index(claim)
                .map(|_| ())
                .ok_or_else(|| reference(format!("{path}.claim"), format!("no claim named `{claim}`")));
        }
        let joint = q.joint().expect("joint query");
        for (j, name) in joint.claims.iter().enumerate() {
            if self.claim_index(name).is_none() {
                return Err(reference(
                    format!("{path}.claims[{j}]"),
                    format!("no claim named `{name}`"),
                ));
            }
        }
        for (j, t) in joint.context.iter().enumerate() {
            if self.timeline.at(*t).is_none() {
                return Err(reference(
                    format!("{path}.context[{j}]"),
                    format!("no operation at time {t}"),
                ));
            }
        }
        for (j, t) in joint.finals.iter().enumerate() {
            match self.timeline.at(*t) {
                Some(ContextOp {
                    op: Operation::Measurement(_),
                    ..
                }) => {}
                Some(op) => {
                    return Err(reference(
                        format!("{path}.finals[{j}]"),
                        format!("operation `{}` at time {t} is not a measurement", op.name),
                    ))
                }
                None => {
                    return Err(reference(
                        format!("{path}.finals[{j}]"),
                        format!("no operation at time {t}"),
                    ))
                }
            }
        }
        match q {
            QuerySpec::Conditional { given, query, .. } => {
                for (field, events) in [("given", given), ("query", query)] {
                    for (j, e) in events.iter().enumerate() {
                        self.check_event(joint, e, &format!("{path}.{field}[{j}]"))?;
                    }
                }
            }
            QuerySpec::CollapseCompare { claim, .. } if !joint.claims.contains(claim) => {
                return Err(reference(
                    format!("{path}.claim"),
                    format!("`{claim}` is not among the query's claims"),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Outcome labels of a claim or final measurement named in `joint`.
    pub fn event_outcomes(&self, joint: JointRef<'_>, event: &str) -> Option<Vec<String>> {
        if joint.claims.iter().any(|c| c == event) {
            let claim = &self.claims[self.claim_index(event)?];
            return Some(claim.povm.labels().map(str::to_string).collect());
        }
        joint.finals.iter().find_map(|t| match self.timeline.at(*t) {
            Some(ContextOp {
                name,
                op: Operation::Measurement(obs),
                ..
            }) if name == event => Some(obs.labels().map(str::to_string).collect()),
            _ => None,
        })
    }

    fn check_event(&self, joint: JointRef<'_>, e: &EventSpec, path: &str) -> Res<()> {
        let outcomes = self.event_outcomes(joint, &e.event).ok_or_else(|| {
            reference(
                format!("{path}.event"),
                format!("`{}` is neither a claim nor a final measurement of this query", e.event),
            )
        })?;
        if !outcomes.contains(&e.outcome) {
            return Err(reference(
                format!("{path}.outcome"),
                format!("`{}` has outcomes {:?}, not `{}`", e.event, outcomes, e.outcome),
            ));
        }
        Ok(())
    }
}

fn registry(doc: &ScenarioDoc) -> Res<SystemRegistry> {
    let mut reg = SystemRegistry::new();
    for (i, s) in doc.systems.iter().enumerate() {
        let label = model(format!("systems[{i}].label"), SystemLabel::new(s.label.as_str()))?;
        model(format!("systems[{i}]"), reg.push(label, s.dim))?;
    }
    Ok(reg)
}

struct Resolver {
    registry: SystemRegistry,
    tols: Tolerances,
}

impl Resolver {
    fn label(&self, name: &str, path: &str) -> Res<SystemLabel> {
        let label = model(path, SystemLabel::new(name))?;
        if self.registry.index_of(&label).is_none() {
            return Err(reference(path, format!("unknown system `{name}`")));
        }
        Ok(label)
    }

    fn labels(&self, names: &[String], path: &str) -> Res<Vec<SystemLabel>> {
        names
            .iter()
            .enumerate()
            .map(|(i, n)| self.label(n, &format!("{path}[{i}]")))
            .collect()
    }

    fn matrix(&self, spec: &MatrixSpec, path: &str) -> Res<CMatrix> {
        let rows = spec.len();
        let cols = spec.first().map_or(0, Vec::len);
        if let Some(i) = spec.iter().position(|r| r.len() != cols) {
            return model(
                format!("{path}[{i}]"),
                Err(Error::DimensionMismatch(format!(
                    "row has {} entries, expected {cols}",
                    spec[i].len()
                ))),
            );
        }
        Ok(CMatrix::from_fn(rows, cols, |r, k| c(spec[r][k][0], spec[r][k][1])))
    }

    fn state(&self, spec: &StateSpec, path: &str) -> Res<PureState> {
        match spec {
            StateSpec::Basis { systems, indices } => {
                let labels = self.labels(systems, &format!("{path}.systems"))?;
                if labels.len() != indices.len() {
                    return model(
                        format!("{path}.indices"),
                        Err(Error::DimensionMismatch(format!(
                            "{} indices for {} systems",
                            indices.len(),
                            labels.len()
                        ))),
                    );
                }
                let mut state: Option<PureState> = None;
                for (i, (l, &k)) in labels.iter().zip(indices).enumerate() {
                    let s = model(format!("{path}.indices[{i}]"), PureState::basis(l, k, &self.registry))?;
                    state = Some(match state {
                        None => s,
                        Some(acc) => model(path, acc.tensor(&s))?,
                    });
                }
                state.ok_or_else(|| reference(format!("{path}.systems"), "no systems"))
            }
            StateSpec::Amplitudes { systems, amplitudes } => {
                let labels = self.labels(systems, &format!("{path}.systems"))?;
                let v = CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| c(a[0], a[1])));
                model(path, PureState::new(v, &labels, &self.registry))
            }
            StateSpec::Pauli {
                system,
                axis: a,
                outcome,
            } => {
                let label = self.label(system, &format!("{path}.system"))?;
                let basis = axis_basis(axis(*a));
                let Some((_, v)) = basis.iter().find(|(l, _)| l == outcome) else {
                    return Err(reference(
                        format!("{path}.outcome"),
                        format!("expected one of `{}`, `{}`", basis[0].0, basis[1].0),
                    ));
                };
                model(path, PureState::new(v.clone(), &[label], &self.registry))
            }
            StateSpec::Product { factors } => {
                let mut state: Option<PureState> = None;
                for (i, f) in factors.iter().enumerate() {
                    let s = self.state(f, &format!("{path}.factors[{i}]"))?;
                    state = Some(match state {
                        None => s,
                        Some(acc) => model(format!("{path}.factors[{i}]"), acc.tensor(&s))?,
                    });
                }
                state.ok_or_else(|| reference(format!("{path}.factors"), "empty product"))
            }
            StateSpec::Superposition { terms } => {
                let mut sum: Option<PureState> = None;
                let mut acc = CVector::zeros(0);
                for (i, t) in terms.iter().enumerate() {
                    let s = self.state(&t.state, &format!("{path}.terms[{i}].state"))?;
                    let w = c(t.coeff[0], t.coeff[1]);
                    match &sum {
                        None => acc = s.vector() * w,
                        Some(first) if first.space() == s.space() => acc += s.vector() * w,
                        Some(first) => {
                            return model(
                                format!("{path}.terms[{i}].state"),
                                Err(Error::DimensionMismatch(format!(
                                    "term on {} but the first term is on {}",
                                    s.space(),
                                    first.space()
                                ))),
                            )
                        }
                    }
                    sum.get_or_insert(s);
                }
                let first = sum.ok_or_else(|| reference(format!("{path}.terms"), "empty superposition"))?;
                model(path, PureState::on_space(acc, first.space().clone()))
            }
            StateSpec::MaxEntangled { a, b } => {
                let la = self.label(a, &format!("{path}.a"))?;
                let lb = self.label(b, &format!("{path}.b"))?;
                model(path, max_entangled(&la, &lb, &self.registry))
            }
        }
    }

    fn observable(&self, spec: &ObservableSpec, path: &str) -> Res<Observable> {
        let tol = self.tols.tol_op;
        match spec {
            ObservableSpec::Pauli { system, axis: a } => {
                let label = self.label(system, &format!("{path}.system"))?;
                model(path, pauli(axis(*a), &label, &self.registry))
            }
            ObservableSpec::Basis {
                systems,
                vectors,
                complement,
            } => {
                let labels = self.labels(systems, &format!("{path}.systems"))?;
                let space = model(format!("{path}.systems"), self.registry.space(&labels))?;
                let mut vs = Vec::with_capacity(vectors.len());
                for (i, v) in vectors.iter().enumerate() {
                    let p = format!("{path}.vectors[{i}].state");
                    let s = self.state(&v.state, &p)?;
                    if s.space() != &space {
                        return model(
                            p,
                            Err(Error::DimensionMismatch(format!(
                                "vector on {} instead of {space}",
                                s.space()
                            ))),
                        );
                    }
                    vs.push((v.label.clone(), s.vector().clone()));
                }
                model(path, Observable::from_basis(vs, space, complement.clone(), tol))
            }
            ObservableSpec::Projectors { systems, outcomes } => {
                let labels = self.labels(systems, &format!("{path}.systems"))?;
                let mut out = Vec::with_capacity(outcomes.len());
                for (i, o) in outcomes.iter().enumerate() {
                    let p = format!("{path}.outcomes[{i}].matrix");
                    let m = self.matrix(&o.matrix, &p)?;
                    out.push((
                        o.label.clone(),
                        o.value,
                        model(&p, LabeledOperator::new(m, &labels, &self.registry))?,
                    ));
                }
                model(path, Observable::from_projectors(out, tol))
            }
            ObservableSpec::Hermitian {
                systems,
                matrix,
                labels,
            } => {
                let ls = self.labels(systems, &format!("{path}.systems"))?;
                let m = self.matrix(matrix, &format!("{path}.matrix"))?;
                let op = model(format!("{path}.matrix"), LabeledOperator::new(m, &ls, &self.registry))?;
                let names: Vec<&str> = labels.iter().map(String::as_str).collect();
                model(path, Observable::from_operator(op, &names, &self.tols))
            }
        }
    }

    fn povm(&self, spec: &PovmSpec, path: &str) -> Res<Povm> {
        match spec {
            PovmSpec::Observable { observable } => {
                let obs = self.observable(observable, &format!("{path}.observable"))?;
                Ok(Povm::from_observable(&obs))
            }
            PovmSpec::Effects { systems, effects } => {
                let labels = self.labels(systems, &format!("{path}.systems"))?;
                let mut out = Vec::with_capacity(effects.len());
                for (i, e) in effects.iter().enumerate() {
                    let p = format!("{path}.effects[{i}].matrix");
                    let m = self.matrix(&e.matrix, &p)?;
                    out.push((
                        e.label.clone(),
                        model(&p, LabeledOperator::new(m, &labels, &self.registry))?,
                    ));
                }
                model(path, Povm::new(out, self.tols.tol_op))
            }
        }
    }

    fn isometry(&self, spec: &PayloadSpec, path: &str) -> Res<LabeledIsometry> {
        let reg = &self.registry;
        let tol = self.tols.tol_op;
        match spec {
            PayloadSpec::Cnot { control, target } => {
                let c = self.label(control, &format!("{path}.control"))?;
                let t = self.label(target, &format!("{path}.target"))?;
                model(path, cnot(&c, &t, reg))
            }
            PayloadSpec::CnotAppend { control, pointer } => {
                let c = self.label(control, &format!("{path}.control"))?;
                let p = self.label(pointer, &format!("{path}.pointer"))?;
                model(path, cnot_append(&c, &p, reg))
            }
            PayloadSpec::ControlledPhase { control, basis, target } => {
                let c = self.label(control, &format!("{path}.control"))?;
                let t = self.label(target, &format!("{path}.target"))?;
                model(path, controlled_phase(&c, axis(*basis), &t, reg))
            }
            PayloadSpec::Pauli { system, axis: a } => {
                let l = self.label(system, &format!("{path}.system"))?;
                let obs = model(path, pauli(axis(*a), &l, reg))?;
                let u = obs.operator().clone();
                model(path, crate::measurement::gates::unitary(&u, tol))
            }
            PayloadSpec::Matrix {
                inputs,
                outputs,
                matrix,
            } => {
                let ins = self.labels(inputs, &format!("{path}.inputs"))?;
                let outs = self.labels(outputs, &format!("{path}.outputs"))?;
                let m = self.matrix(matrix, &format!("{path}.matrix"))?;
                model(path, LabeledIsometry::new(m, &ins, &outs, reg, tol))
            }
            PayloadSpec::Columns {
                inputs,
                outputs,
                columns,
            } => {
                let ins = self.labels(inputs, &format!("{path}.inputs"))?;
                let outs = self.labels(outputs, &format!("{path}.outputs"))?;
                let out_space = model(format!("{path}.outputs"), reg.space(&outs))?;
                let in_dim = model(format!("{path}.inputs"), reg.space(&ins))?.dim();
                if columns.len() != in_dim {
                    return model(
                        format!("{path}.columns"),
                        Err(Error::DimensionMismatch(format!(
                            "{} columns for input dimension {in_dim}",
                            columns.len()
                        ))),
                    );
                }
                let mut m = CMatrix::zeros(out_space.dim(), in_dim);
                for (j, col) in columns.iter().enumerate() {
                    let p = format!("{path}.columns[{j}]");
                    let s = self.state(col, &p)?;
                    if s.space() != &out_space {
                        return model(
                            p,
                            Err(Error::DimensionMismatch(format!(
                                "column on {} instead of {out_space}",
                                s.space()
                            ))),
                        );
                    }
                    m.set_column(j, s.vector());
                }
                let canonical: Vec<SystemLabel> = out_space.labels().cloned().collect();
                model(path, LabeledIsometry::new(m, &ins, &canonical, reg, tol))
            }
            PayloadSpec::Instrument {
                inputs,
                outputs,
                pointer,
                aux,
                operators,
            } => {
                let ins = self.labels(inputs, &format!("{path}.inputs"))?;
                let outs = self.labels(outputs, &format!("{path}.outputs"))?;
                let in_space = model(format!("{path}.inputs"), reg.space(&ins))?;
                let out_space = model(format!("{path}.outputs"), reg.space(&outs))?;
                let ptr = self.label(pointer, &format!("{path}.pointer"))?;
                let aux = aux
                    .as_ref()
                    .map(|a| self.label(a, &format!("{path}.aux")))
                    .transpose()?;
                let mut ops = Vec::with_capacity(operators.len());
                for (i, o) in operators.iter().enumerate() {
                    let p = format!("{path}.operators[{i}].matrix");
                    let m = self.matrix(&o.matrix, &p)?;
                    // read in listed order, stored canonically
                    let as_map = model(&p, LabeledIsometry::new(m.clone(), &ins, &outs, reg, f64::INFINITY))?;
                    ops.push(MeasurementOperator {
                        outcome: o.outcome.clone(),
                        index: o.index,
                        matrix: as_map.matrix().clone(),
                    });
                }
                let (v, _) = model(
                    path,
                    instrument_isometry(&ops, &in_space, &out_space, &ptr, aux.as_ref(), reg, tol),
                )?;
                Ok(v)
            }
            PayloadSpec::DynamicalDescription { observable, pointer } => {
                let obs = self.observable(observable, &format!("{path}.observable"))?;
                let ptr = self.label(pointer, &format!("{path}.pointer"))?;
                model(path, dynamical_description(&obs, &ptr, reg, tol))
            }
            PayloadSpec::Measure { .. } => unreachable!("measurements are not isometries"),
        }
    }

    fn op(&self, spec: &OpSpec, path: &str) -> Res<ContextOp> {
        let p = format!("{path}.op");
        let op = match &spec.op {
            PayloadSpec::Measure { observable } => {
                Operation::Measurement(self.observable(observable, &format!("{p}.observable"))?)
            }
            other => Operation::from_isometry(self.isometry(other, &p)?, self.tols.tol_op),
        };
        Ok(ContextOp {
            time: spec.time,
            name: spec.name.clone(),
            op,
        })
    }

    fn claim(&self, spec: &ClaimSpec, timeline: &Context, path: &str) -> Res<ParseClaim> {
        let own = timeline
            .at(spec.time)
            .ok_or_else(|| reference(format!("{path}.time"), format!("no operation at time {}", spec.time)))?;
        let Some(v) = own.op.as_isometry() else {
            return Err(reference(
                format!("{path}.time"),
                format!("operation `{}` is a measurement, not an isometry", own.name),
            ));
        };
        let mut ops = Vec::with_capacity(spec.context.len());
        for (j, t) in spec.context.iter().enumerate() {
            let p = format!("{path}.context[{j}]");
            if *t == spec.time {
                return Err(reference(p, "a claim's own operation is never part of its context"));
            }
            let op = timeline
                .at(*t)
                .ok_or_else(|| reference(&p, format!("no operation at time {t}")))?;
            if ops.iter().any(|o: &ContextOp| o.time == *t) {
                return Err(reference(p, format!("time {t} listed twice")));
            }
            ops.push(op.clone());
        }
        let context = model(format!("{path}.context"), Context::new(ops))?;
        let povm = self.povm(&spec.povm, &format!("{path}.povm"))?;
        let record = spec
            .candidate_record
            .as_ref()
            .map(|r| self.observable(r, &format!("{path}.candidate_record")))
            .transpose()?;
        model(
            path,
            ParseClaim::new(spec.name.clone(), v.clone(), povm, spec.time, context, record),
        )
    }
}
