//! Random instance generators shared by the property and acceptance suites.
#![allow(dead_code)]

use measurement_parsing::context_rule::{joint_parse_with, JointParseReport};
use measurement_parsing::hilbert::linalg::{frobenius, real, CMatrix};
use measurement_parsing::hilbert::random::{haar_unitary, random_pure_state};
use measurement_parsing::hilbert::{LabeledIsometry, LabeledOperator, PureState, SystemLabel, SystemRegistry};
use measurement_parsing::inference::FinalMeasurement;
use measurement_parsing::measurement::{
    dynamical_description, Context, ContextOp, Observable, Operation, ParseClaim, Povm,
};
use measurement_parsing::parse::ParseEngine;
use measurement_parsing::Tolerances;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn label(name: &str) -> SystemLabel {
    SystemLabel::new(name).unwrap()
}

/// The first `d_in` columns of a Haar unitary.
pub fn random_isometry<R: Rng>(d_out: usize, d_in: usize, rng: &mut R) -> CMatrix {
    haar_unitary(d_out, rng).columns(0, d_in).into_owned()
}

/// Rank-one projectors onto a random orthonormal basis.
pub fn random_basis_projectors<R: Rng>(d: usize, rng: &mut R) -> Vec<CMatrix> {
    let u = haar_unitary(d, rng);
    (0..d)
        .map(|i| {
            let col = u.column(i);
            col * col.adjoint()
        })
        .collect()
}

/// A nondegenerate observable measured in a random basis of `systems`.
pub fn random_observable<R: Rng>(prefix: &str, systems: &[&str], reg: &SystemRegistry, rng: &mut R) -> Observable {
    let labels: Vec<SystemLabel> = systems.iter().map(|s| label(s)).collect();
    let space = reg.space(&labels).unwrap();
    let outcomes = random_basis_projectors(space.dim(), rng)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            (
                format!("{prefix}{i}"),
                i as f64,
                LabeledOperator::on_space(p, space.clone()).unwrap(),
            )
        })
        .collect();
    Observable::from_projectors(outcomes, 1e-9).unwrap()
}

pub fn spectral_povm(obs: &Observable) -> Povm {
    Povm::from_observable(obs)
}

/// A claim whose only post-operation is a nondegenerate measurement on the
/// claim's outputs, so the admissible records form a commutative algebra.
pub struct L2Instance {
    pub registry: SystemRegistry,
    pub claim: ParseClaim,
    /// Pull-backs `V† P_i V` of the minimal projectors.
    pub pulled: Vec<CMatrix>,
    pub effects: Vec<CMatrix>,
}

const SHAPES: [(usize, usize); 8] = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (2, 6), (2, 8), (4, 4)];

pub fn l2_instance(seed: u64) -> L2Instance {
    let mut rng = rng(seed);
    let (d_in, d_p) = SHAPES[rng.random_range(0..SHAPES.len())];
    let registry = SystemRegistry::from_entries([("S", d_in), ("P", d_p)]).unwrap();
    let d_out = d_in * d_p;
    let v = random_isometry(d_out, d_in, &mut rng);
    let obs = random_observable("m", &["S", "P"], &registry, &mut rng);
    let minimal: Vec<CMatrix> = obs.outcomes().iter().map(|o| o.projector.matrix().clone()).collect();
    let pulled: Vec<CMatrix> = minimal.iter().map(|p| v.adjoint() * p * &v).collect();
    let n = pulled.len();
    let k = if n > 9 { 2 } else { rng.random_range(2..=3) };

    // weights[i][o]: share of minimal projector i given to outcome o
    let mut weights = vec![vec![0.0; k]; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for (pos, &i) in order.iter().enumerate() {
        let o = if pos < k { pos } else { rng.random_range(0..k) };
        weights[i][o] = 1.0;
    }
    match rng.random_range(0..4) {
        0 => {}
        1 => {
            let i = order[rng.random_range(0..n)];
            let t: f64 = rng.random_range(0.2..0.8);
            let o = weights[i].iter().position(|w| *w == 1.0).unwrap();
            weights[i][o] = t;
            weights[i][(o + 1) % k] += 1.0 - t;
        }
        2 => {
            for w in weights.iter_mut() {
                let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
                let s: f64 = raw.iter().sum();
                *w = raw.iter().map(|x| x / s).collect();
            }
        }
        _ => {
            // one minimal projector shared evenly by every outcome
            let a = order[0];
            weights[a] = vec![1.0 / k as f64; k];
        }
    }
    let effects: Vec<CMatrix> = (0..k)
        .map(|o| {
            pulled
                .iter()
                .zip(&weights)
                .fold(CMatrix::zeros(d_in, d_in), |acc, (q, w)| acc + q * real(w[o]))
        })
        .collect();

    let s_space = registry.space([&label("S")]).unwrap();
    let povm = Povm::new(
        effects
            .iter()
            .enumerate()
            .map(|(o, e)| {
                (
                    format!("e{o}"),
                    LabeledOperator::on_space(e.clone(), s_space.clone()).unwrap(),
                )
            })
            .collect(),
        1e-9,
    )
    .unwrap();
    let iso = LabeledIsometry::new(v, &[label("S")], &[label("S"), label("P")], &registry, 1e-9).unwrap();
    let context = Context::new(vec![ContextOp {
        time: 1,
        name: "read".into(),
        op: Operation::Measurement(obs),
    }])
    .unwrap();
    let claim = ParseClaim::new("claim", iso, povm, 0, context, None).unwrap();
    L2Instance {
        registry,
        claim,
        pulled,
        effects,
    }
}

/// Enumerates every map from minimal projectors to outcomes.
pub fn brute_force_parses(inst: &L2Instance, tol: f64) -> bool {
    let n = inst.pulled.len();
    let k = inst.effects.len();
    let d = inst.effects[0].nrows();
    let total = k.pow(n as u32);
    (0..total).any(|mut code| {
        let mut sums = vec![CMatrix::zeros(d, d); k];
        for q in &inst.pulled {
            sums[code % k] += q;
            code /= k;
        }
        sums.iter().zip(&inst.effects).all(|(s, e)| frobenius(&(s - e)) <= tol)
    })
}

/// A jointly parsed experiment: copies of random observables onto pointers,
/// a scrambling unitary in between and random final measurements.
pub struct RandomExperiment {
    pub registry: SystemRegistry,
    pub initial: PureState,
    pub claims: Vec<ParseClaim>,
    pub finals: Vec<FinalMeasurement>,
}

impl RandomExperiment {
    pub fn final_ops(&self) -> Vec<ContextOp> {
        self.finals.iter().map(FinalMeasurement::as_op).collect()
    }

    pub fn joint(&self, tols: &Tolerances, seed: u64) -> JointParseReport {
        let engine = ParseEngine::new(&self.registry, *tols, seed);
        joint_parse_with(&engine, &self.claims, &self.final_ops()).unwrap()
    }
}

pub fn random_experiment(seed: u64) -> RandomExperiment {
    let mut rng = rng(seed);
    let second = rng.random_bool(0.5);
    let mut entries = vec![("S", 2), ("E", 2), ("M", 2)];
    if second {
        entries.push(("N", 2));
    }
    let registry = SystemRegistry::from_entries(entries).unwrap();
    let initial = random_pure_state(&[label("S"), label("E")], &registry, &mut rng).unwrap();

    let first_obs = random_observable("a", &["S"], &registry, &mut rng);
    let first = dynamical_description(&first_obs, &label("M"), &registry, 1e-9).unwrap();
    let mut claims = Vec::new();
    let mut ops = vec![];
    if rng.random_bool(0.5) {
        let u = LabeledOperator::on_space(haar_unitary(4, &mut rng), registry.space_of(&["S", "E"]).unwrap()).unwrap();
        ops.push(ContextOp {
            time: 1,
            name: "scramble".into(),
            op: Operation::Unitary(
                LabeledIsometry::on_spaces(u.matrix().clone(), u.space().clone(), u.space().clone(), 1e-9).unwrap(),
            ),
        });
    }
    claims.push(
        ParseClaim::new(
            "first",
            first,
            spectral_povm(&first_obs),
            0,
            Context::new(ops).unwrap(),
            None,
        )
        .unwrap(),
    );
    if second {
        let obs = random_observable("b", &["E"], &registry, &mut rng);
        let iso = dynamical_description(&obs, &label("N"), &registry, 1e-9).unwrap();
        claims.push(ParseClaim::new("second", iso, spectral_povm(&obs), 2, Context::empty(), None).unwrap());
    }

    let mut finals = Vec::new();
    let choices: [&[&str]; 5] = [&["S"], &["E"], &["M"], &["S", "E"], &["E", "M"]];
    for (t, name) in [(3, "late"), (4, "last")] {
        if rng.random_bool(0.7) {
            let on = choices[rng.random_range(0..choices.len())];
            let obs = random_observable(&format!("{name}_"), on, &registry, &mut rng);
            finals.push(FinalMeasurement {
                time: t,
                name: name.into(),
                observable: obs,
            });
        }
    }
    RandomExperiment {
        registry,
        initial,
        claims,
        finals,
    }
}

/// Accepted random experiments, in seed order starting at `from`.
pub fn accepted_experiments(
    from: u64,
    count: usize,
    tols: &Tolerances,
) -> Vec<(u64, RandomExperiment, JointParseReport)> {
    let mut out = Vec::new();
    let mut seed = from;
    while out.len() < count {
        let exp = random_experiment(seed);
        let report = exp.joint(tols, seed);
        if report.accepted {
            out.push((seed, exp, report));
        }
        seed += 1;
        assert!(seed < from + 50 * count as u64 + 100, "too few accepted experiments");
    }
    out
}
