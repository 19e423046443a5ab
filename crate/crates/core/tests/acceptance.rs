//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use measurement_parsing::hilbert::linalg::{frobenius, real, CMatrix, CVector};
use measurement_parsing::hilbert::random::random_pure_state;
use measurement_parsing::hilbert::{LabeledOperator, SystemRegistry};
use measurement_parsing::inference::{collapse_oracle, joint_distribution};
use measurement_parsing::measurement::gates::sigma_z;
use measurement_parsing::measurement::{cnot_append, controlled_phase, pauli, plus_minus_states, Axis, ParseClaim};
use measurement_parsing::parse::{
    commutant_basis, record_distance, ParseEngine, ParseStatus, ParseVerdict, SearchLayer,
};
use measurement_parsing::scenario::{
    builtin, fr_experiment_with_env, run_scenario, QueryResult, QuerySpec, ReportDoc, Scenario, ScenarioDoc,
    BUILTIN_NAMES,
};
use measurement_parsing::Tolerances;

use common::{accepted_experiments, brute_force_parses, l2_instance, label, rng};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tols() -> Tolerances {
    Tolerances::default()
}

fn resolved(doc: &ScenarioDoc) -> Scenario {
    Scenario::resolve(doc, &tols()).map_err(|e| e.to_string()).unwrap()
}

fn claim<'a>(s: &'a Scenario, name: &str) -> &'a ParseClaim {
    &s.claims[s.claim_index(name).unwrap_or_else(|| panic!("no claim `{name}`"))]
}

fn run(doc: &ScenarioDoc) -> Result<ReportDoc, String> {
    run_scenario(doc, &tols(), 0).map_err(|e| e.to_string())
}

/// Re-verifies `verdict`'s record and returns the larger condition residual.
fn reverified(engine: &ParseEngine<'_>, claim: &ParseClaim, verdict: &ParseVerdict) -> Result<f64, String> {
    let record = verdict.record.as_ref().ok_or("parsed verdict without record")?;
    let check = engine
        .verify_record(claim, record, SearchLayer::Verify)
        .map_err(|e| e.to_string())?;
    ensure(check.is_parsed(), || {
        format!("record of `{}` fails re-verification", claim.name)
    })?;
    let r = check
        .residuals
        .condition1
        .unwrap_or(0.0)
        .max(check.residuals.condition2.unwrap_or(0.0));
    ensure(r <= 1e-8, || {
        format!("re-verification residual {r:.2e} for `{}`", claim.name)
    })?;
    Ok(r)
}

fn quartet() -> Verdict {
    let mut worst: f64 = 0.0;
    for (name, expected) in [
        ("wigner_friend_Z", Some(("M", true))),
        ("wigner_friend_XZ", Some(("M", false))),
        ("wigner_friend_XX", None),
        ("wigner_friend_ZX", Some(("S", true))),
    ] {
        let s = resolved(&builtin(name).unwrap());
        let engine = ParseEngine::new(&s.registry, tols(), 0);
        let c = claim(&s, "friend");
        let v = engine.find_record_observable(c).map_err(|e| e.to_string())?;
        match expected {
            Some((on, exact)) => {
                ensure(v.status == ParseStatus::Parsed, || format!("{name}: {:?}", v.status))?;
                worst = worst.max(reverified(&engine, c, &v)?);
                let want = pauli(Axis::Z, &label(on), &s.registry).unwrap();
                let d = record_distance(v.record.as_ref().unwrap(), &want).map_err(|e| e.to_string())?;
                if exact {
                    ensure(d <= 1e-8, || format!("{name}: record is {d:.2e} from sigma_z on {on}"))?;
                }
            }
            None => {
                ensure(
                    v.status == ParseStatus::NoParseCertified && v.layer == SearchLayer::L1,
                    || format!("{name}: {:?} at {:?}", v.status, v.layer),
                )?;
                let w = v.witness.as_ref().ok_or("no witness")?;
                let check = engine.recheck_witness(c, w).map_err(|e| e.to_string())?;
                ensure(check.confirmed, || format!("{name}: witness not confirmed"))?;
            }
        }
    }
    Ok(format!(
        "Z, XZ, ZX parsed, XX certified at L1; records re-verified to {worst:.1e}"
    ))
}

fn eraser() -> Verdict {
    let reg = SystemRegistry::from_entries([("S", 2), ("M", 2)]).unwrap();
    let copy = cnot_append(&label("S"), &label("M"), &reg).unwrap();
    let phase = controlled_phase(&label("M"), Axis::X, &label("S"), &reg).unwrap();
    let (plus, minus) = plus_minus_states();
    let zero = CVector::from_vec(vec![real(1.0), real(0.0)]);
    let mut r = rng(2);
    let (mut worst_copy, mut worst_restore): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let psi = random_pure_state(&[label("S")], &reg, &mut r).unwrap().vector().clone();
        let after = copy.matrix() * &psi;
        let z_psi = sigma_z() * &psi;
        let expected = (psi.kronecker(&plus) + z_psi.kronecker(&minus)) * real(FRAC_1_SQRT_2);
        worst_copy = worst_copy.max((&after - expected).norm());
        let restored = phase.matrix() * &after;
        worst_restore = worst_restore.max((restored - psi.kronecker(&zero)).norm());
    }
    ensure(worst_copy <= 1e-10 && worst_restore <= 1e-10, || {
        format!("copy error {worst_copy:.2e}, restore error {worst_restore:.2e}")
    })?;
    Ok(format!(
        "100 states; copy error {worst_copy:.1e}, restore error {worst_restore:.1e}"
    ))
}

fn fr_statuses(doc: &ScenarioDoc) -> Result<Vec<String>, String> {
    let report = run(doc)?;
    let r = &report.results;
    let parse = |i: usize| match &r[i].result {
        QueryResult::Parse { verdict } => Ok(verdict.status),
        other => Err(format!("query {i}: {other:?}")),
    };
    let joint = |i: usize| match &r[i].result {
        QueryResult::JointParse { joint, .. } => Ok((joint.accepted, joint.failing.clone())),
        other => Err(format!("query {i}: {other:?}")),
    };
    ensure(parse(0)? == ParseStatus::Parsed, || "alice is not parsed".into())?;
    ensure(parse(1)? == ParseStatus::NoParseCertified, || {
        "bob with wigner is not certified".into()
    })?;
    ensure(parse(2)? == ParseStatus::NoParseCertified, || {
        "alice with ursula is not certified".into()
    })?;
    ensure(joint(3)?.0, || "{alice, bob} rejected".into())?;
    let (accepted, failing) = joint(4)?;
    ensure(!accepted && failing == ["bob"], || {
        format!("{{alice, bob, wigner}}: accepted {accepted}, failing {failing:?}")
    })?;
    Ok(vec![
        format!("{:?}", parse(0)?),
        format!("{:?}", parse(1)?),
        format!("{:?}", parse(2)?),
        format!("{:?}", joint(3)?),
        format!("{:?}", joint(4)?),
    ])
}

fn fr_verdicts() -> Verdict {
    let base = fr_statuses(&builtin("fr_experiment").unwrap())?;
    let tilted = fr_statuses(&fr_experiment_with_env(PI / 5.0)).map_err(|e| format!("theta = pi/5: {e}"))?;
    ensure(base == tilted, || "verdicts change with the environment overlap".into())?;
    Ok("five verdicts exact, unchanged for env overlap pi/5".into())
}

fn fr_inferences() -> Verdict {
    let report = run(&builtin("fr_experiment").unwrap())?;
    let r = &report.results;
    let conditional = |i: usize| match &r[i].result {
        QueryResult::Conditional { probability, .. } => Ok(*probability),
        other => Err(format!("query {i}: {other:?}")),
    };
    let wigner = conditional(5)?;
    let alice = conditional(6)?;
    ensure((wigner - 1.0).abs() <= 1e-9, || {
        format!("P(wigner=+ | alice=1) = {wigner}")
    })?;
    ensure((alice - 1.0).abs() <= 1e-9, || format!("P(alice=1 | bob=1) = {alice}"))?;
    match &r[7].result {
        QueryResult::Unavailable { reason, .. } => ensure(reason.contains("do not parse"), || reason.clone())?,
        other => return Err(format!("bob's wigner inference: {other:?}")),
    }
    Ok(format!(
        "P(wigner=+|alice=1) = {wigner:.12}, P(alice=1|bob=1) = {alice:.12}, bob->wigner unavailable"
    ))
}

fn collapse_agreement() -> Verdict {
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for name in BUILTIN_NAMES {
        let doc = builtin(name).unwrap();
        let mut probe = doc.clone();
        probe.queries = doc
            .queries
            .iter()
            .filter_map(QuerySpec::joint)
            .filter(|j| !j.claims.is_empty())
            .flat_map(|j| {
                j.claims.iter().map(move |c| QuerySpec::CollapseCompare {
                    claims: j.claims.to_vec(),
                    context: j.context.to_vec(),
                    finals: j.finals.to_vec(),
                    claim: c.clone(),
                })
            })
            .collect();
        for q in run(&probe)?.results {
            if let QueryResult::CollapseCompare { max_difference, .. } = q.result {
                compared += 1;
                worst = worst.max(max_difference);
            }
        }
    }
    ensure(compared > 0, || "no accepted builtin claims".into())?;
    let builtin_cases = compared;
    for (seed, exp, report) in accepted_experiments(1000, 50, &tols()) {
        let unitary = joint_distribution(&report, &exp.finals, &exp.initial, &exp.registry, &tols())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        for c in 0..exp.claims.len() {
            let collapsed = collapse_oracle(&report, c, &exp.finals, &exp.initial, &exp.registry, &tols())
                .map_err(|e| format!("seed {seed}: {e}"))?;
            worst = worst.max(unitary.max_difference(&collapsed));
            compared += 1;
        }
    }
    ensure(worst <= 1e-9, || format!("largest difference {worst:.2e}"))?;
    Ok(format!(
        "{builtin_cases} builtin and {} random claims; largest difference {worst:.1e}",
        compared - builtin_cases
    ))
}

fn pauli_op(reg: &SystemRegistry, axis: Axis, on: &str) -> LabeledOperator {
    pauli(axis, &label(on), reg).unwrap().operator().clone()
}

fn commutant_cases() -> Verdict {
    let two = SystemRegistry::from_entries([("A", 2), ("B", 2)]).unwrap();
    let mixed = SystemRegistry::from_entries([("A", 2), ("C", 3)]).unwrap();
    let ab = two.space_of(&["A", "B"]).unwrap();
    let ac = mixed.space_of(&["A", "C"]).unwrap();
    let c = mixed.space_of(&["C"]).unwrap();
    let a = two.space_of(&["A"]).unwrap();
    let product = |x: &LabeledOperator, y: &LabeledOperator| {
        let m = x.embed_into(&ab).unwrap().matrix() * y.embed_into(&ab).unwrap().matrix();
        LabeledOperator::on_space(m, ab.clone()).unwrap()
    };
    let diag = |vals: &[f64], space: &measurement_parsing::hilbert::Space| {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|v| real(*v))));
        LabeledOperator::on_space(m, space.clone()).unwrap()
    };
    let mut swap = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            swap[(2 * j + i, 2 * i + j)] = real(1.0);
        }
    }
    let swap = LabeledOperator::on_space(swap, ab.clone()).unwrap();
    let xa = pauli_op(&two, Axis::X, "A");
    let xb = pauli_op(&two, Axis::X, "B");
    let za = pauli_op(&two, Axis::Z, "A");
    let zb = pauli_op(&two, Axis::Z, "B");

    let cases: Vec<(&str, Vec<LabeledOperator>, measurement_parsing::hilbert::Space, usize)> = vec![
        ("X on each qubit", vec![xa.clone(), xb.clone()], ab.clone(), 4),
        ("no generators, 2x2", vec![], ab.clone(), 16),
        ("no generators, qutrit", vec![], c.clone(), 9),
        (
            "full Pauli set",
            vec![xa.clone(), za.clone(), xb.clone(), zb.clone()],
            ab.clone(),
            1,
        ),
        ("Z on one qubit", vec![za.clone()], ab.clone(), 8),
        ("Z on each qubit", vec![za.clone(), zb.clone()], ab.clone(), 4),
        (
            "Bell stabilizers",
            vec![product(&xa, &xb), product(&za, &zb)],
            ab.clone(),
            4,
        ),
        (
            "X on qubit of qubit x qutrit",
            vec![pauli_op(&mixed, Axis::X, "A")],
            ac.clone(),
            18,
        ),
        (
            "degeneracies 1,1,2",
            vec![diag(&[0.0, 1.0, 2.0, 2.0], &ab)],
            ab.clone(),
            6,
        ),
        ("single qubit X", vec![xa.clone()], a.clone(), 2),
        ("swap", vec![swap], ab.clone(), 10),
    ];
    let n = cases.len();
    let mut worst: f64 = 0.0;
    for (name, gens, space, want) in cases {
        let basis = commutant_basis(&gens, &space, 1e-10).map_err(|e| e.to_string())?;
        ensure(basis.len() == want, || {
            format!("{name}: dimension {} (expected {want})", basis.len())
        })?;
        for b in &basis {
            for g in &gens {
                let g = g.embed_into(&space).unwrap().into_matrix();
                worst = worst.max(frobenius(&(b.matrix() * &g - &g * b.matrix())));
            }
        }
    }
    ensure(worst <= 1e-10, || format!("commutator residual {worst:.2e}"))?;
    Ok(format!("{n} cases; largest commutator {worst:.1e}"))
}

fn l2_oracle() -> Verdict {
    let (mut parsed, mut refused) = (0, 0);
    for seed in 0..200 {
        let inst = l2_instance(seed);
        let engine = ParseEngine::new(&inst.registry, tols(), seed);
        let v = engine
            .find_record_observable(&inst.claim)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let oracle = brute_force_parses(&inst, tols().tol_op);
        ensure(matches!(v.layer, SearchLayer::L1 | SearchLayer::L2), || {
            format!("seed {seed}: commutative instance reached {:?}", v.layer)
        })?;
        ensure(v.is_parsed() == oracle, || {
            format!("seed {seed}: engine {:?} at {:?}, oracle {oracle}", v.status, v.layer)
        })?;
        ensure(v.is_parsed() || v.status == ParseStatus::NoParseCertified, || {
            format!("seed {seed}: {:?}", v.status)
        })?;
        if oracle {
            parsed += 1;
        } else {
            refused += 1;
        }
    }
    Ok(format!("200 instances agree ({parsed} parse, {refused} do not)"))
}

/// Every parsed verdict of the builtins and the random suites, with its claim.
fn parsed_claims() -> Result<Vec<(SystemRegistry, ParseClaim, ParseVerdict)>, String> {
    let mut out = Vec::new();
    for name in BUILTIN_NAMES {
        let s = resolved(&builtin(name).unwrap());
        let engine = ParseEngine::new(&s.registry, tols(), 0);
        for c in &s.claims {
            let v = engine.find_record_observable(c).map_err(|e| e.to_string())?;
            if v.is_parsed() {
                out.push((s.registry.clone(), c.clone(), v));
            }
        }
    }
    for seed in 0..200 {
        let inst = l2_instance(seed);
        let engine = ParseEngine::new(&inst.registry, tols(), seed);
        let v = engine.find_record_observable(&inst.claim).map_err(|e| e.to_string())?;
        if v.is_parsed() {
            out.push((inst.registry.clone(), inst.claim.clone(), v));
        }
    }
    for (seed, exp, _) in accepted_experiments(1000, 20, &tols()) {
        let engine = ParseEngine::new(&exp.registry, tols(), seed);
        for c in &exp.claims {
            let joint = measurement_parsing::context_rule::joint_context_with(&exp.claims, &exp.final_ops())
                .map_err(|e| e.to_string())?;
            let c = c.with_context(joint.without(c.time));
            let v = engine.find_record_observable(&c).map_err(|e| e.to_string())?;
            if v.is_parsed() {
                out.push((exp.registry.clone(), c, v));
            }
        }
    }
    Ok(out)
}

fn anti_monotonicity() -> Verdict {
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    let cases = parsed_claims()?;
    for (reg, claim, verdict) in &cases {
        let engine = ParseEngine::new(reg, tols(), 0);
        for op in claim.context.post_ops(claim.time) {
            let mut smaller = claim.with_context(claim.context.without(op.time));
            smaller.candidate_record = verdict.record.clone();
            let v = engine.verify_parse(&smaller).map_err(|e| e.to_string())?;
            ensure(v.is_parsed(), || {
                format!("`{}` stops parsing without `{}`", claim.name, op.name)
            })?;
            worst = worst.max(reverified(&engine, &smaller, &v)?);
            checks += 1;
        }
    }
    Ok(format!(
        "{} parsed claims, {checks} reduced contexts; residual {worst:.1e}",
        cases.len()
    ))
}

/// `|k⟩|k⟩|k⟩` on three qubits.
fn lab(k: usize) -> CVector {
    let mut v = CVector::zeros(8);
    v[k * 7] = real(1.0);
    v
}

fn fr_final_statistics() -> Verdict {
    let h = FRAC_1_SQRT_2;
    let (a, b) = ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
    // R,A,Abar ⊗ S,B,Bbar after Alice, her preparation and Bob
    let bob_plus = (lab(0) + lab(1)) * real(h);
    let psi = lab(0).kronecker(&lab(0)) * real(a) + lab(1).kronecker(&bob_plus) * real(b);
    let minus = (lab(0) - lab(1)) * real(h);
    let amp = minus.kronecker(&minus).dotc(&psi);
    let brute = amp.norm_sqr();

    let report = run(&builtin("fr_experiment").unwrap())?;
    let engine = match &report.results[8].result {
        QueryResult::Distribution { table, .. } => table
            .iter()
            .find(|row| row.outcomes == ["-", "-"])
            .map(|row| row.probability)
            .ok_or("no (-, -) row")?,
        other => return Err(format!("{other:?}")),
    };
    let target = 1.0 / 12.0;
    ensure(
        (brute - target).abs() <= 1e-9 && (engine - target).abs() <= 1e-9,
        || format!("statevector {brute}, engine {engine}"),
    )?;
    Ok(format!(
        "P(ursula=-, wigner=-) = {brute:.12} (statevector), {engine:.12} (engine)"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("context-dependence quartet", quartet),
        ("quantum eraser identities", eraser),
        ("FR verdicts", fr_verdicts),
        ("FR inferences", fr_inferences),
        ("collapse vs unitary agreement", collapse_agreement),
        ("commutant dimensions", commutant_cases),
        ("L2 vs brute force", l2_oracle),
        ("anti-monotonicity", anti_monotonicity),
        ("FR final statistics", fr_final_statistics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
