use std::f64::consts::FRAC_PI_2;

use super::format::*;

pub const BUILTIN_NAMES: [&str; 6] = [
    "wigner_friend_Z",
    "wigner_friend_XZ",
    "wigner_friend_XX",
    "wigner_friend_ZX",
    "quantum_eraser",
    "fr_experiment",
];

/// A built-in scenario by name, or `None`.
pub fn builtin(name: &str) -> Option<ScenarioDoc> {
    Some(match name {
        "wigner_friend_Z" => wigner_friend_z(),
        "wigner_friend_XZ" => wigner_friend_xz(),
        "wigner_friend_XX" => wigner_friend_xx(),
        "wigner_friend_ZX" => wigner_friend_zx(),
        "quantum_eraser" => quantum_eraser(),
        "fr_experiment" => fr_experiment(),
        _ => return None,
    })
}

fn s(x: &str) -> String {
    x.to_string()
}

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| s(x)).collect()
}

fn system(label: &str, dim: usize) -> SystemSpec {
    SystemSpec { label: s(label), dim }
}

fn real_amplitudes(systems: &[&str], amps: &[f64]) -> StateSpec {
    StateSpec::Amplitudes {
        systems: names(systems),
        amplitudes: amps.iter().map(|a| [*a, 0.0]).collect(),
    }
}

fn ket(system: &str, index: usize) -> StateSpec {
    StateSpec::Basis {
        systems: names(&[system]),
        indices: vec![index],
    }
}

fn pauli_obs(system: &str, axis: AxisSpec) -> ObservableSpec {
    ObservableSpec::Pauli {
        system: s(system),
        axis,
    }
}

fn z_povm(system: &str) -> PovmSpec {
    PovmSpec::Observable {
        observable: pauli_obs(system, AxisSpec::Z),
    }
}

fn op(time: i64, name: &str, op: PayloadSpec) -> OpSpec {
    OpSpec {
        time,
        name: s(name),
        op,
    }
}

fn measure(time: i64, name: &str, system: &str, axis: AxisSpec) -> OpSpec {
    op(
        time,
        name,
        PayloadSpec::Measure {
            observable: pauli_obs(system, axis),
        },
    )
}

fn event(name: &str, outcome: &str) -> EventSpec {
    EventSpec {
        event: s(name),
        outcome: s(outcome),
    }
}

fn copy_s_to_m() -> OpSpec {
    op(
        0,
        "friend",
        PayloadSpec::CnotAppend {
            control: s("S"),
            pointer: s("M"),
        },
    )
}

fn friend_claim(context: Vec<i64>) -> ClaimSpec {
    ClaimSpec {
        name: s("friend"),
        time: 0,
        povm: z_povm("S"),
        context,
        candidate_record: None,
    }
}

/// Queries shared by the friend scenarios: the verdict, then the inference
/// queries over the claim and Wigner's measurements.
fn friend_queries(finals: Vec<i64>, given: EventSpec, query: EventSpec) -> Vec<QuerySpec> {
    vec![
        QuerySpec::Parse { claim: s("friend") },
        QuerySpec::JointParse {
            claims: names(&["friend"]),
            context: vec![],
            finals: finals.clone(),
        },
        QuerySpec::Distribution {
            claims: names(&["friend"]),
            context: vec![],
            finals: finals.clone(),
        },
        QuerySpec::Conditional {
            claims: names(&["friend"]),
            context: vec![],
            finals: finals.clone(),
            given: vec![given],
            query: vec![query],
        },
        QuerySpec::CollapseCompare {
            claims: names(&["friend"]),
            context: vec![],
            finals,
            claim: s("friend"),
        },
    ]
}

/// The friend copies `S` into `M`; Wigner then reads `M`.
pub fn wigner_friend_z() -> ScenarioDoc {
    ScenarioDoc {
        name: s("wigner_friend_Z"),
        description: s("CNOT from S onto the friend's memory M, followed by Wigner reading M in the z basis."),
        systems: vec![system("S", 2), system("M", 2)],
        initial_state: real_amplitudes(&["S"], &[0.6, 0.8]),
        timeline: vec![copy_s_to_m(), measure(1, "wigner_M", "M", AxisSpec::Z)],
        claims: vec![friend_claim(vec![1])],
        queries: friend_queries(vec![1], event("friend", "1"), event("wigner_M", "1")),
    }
}

/// Wigner measures `S` in the x basis, then reads `M` in the z basis.
pub fn wigner_friend_xz() -> ScenarioDoc {
    ScenarioDoc {
        name: s("wigner_friend_XZ"),
        description: s("CNOT from S onto M, then Wigner measures S in the x basis and M in the z basis."),
        systems: vec![system("S", 2), system("M", 2)],
        initial_state: real_amplitudes(&["S"], &[0.6, 0.8]),
        timeline: vec![
            copy_s_to_m(),
            measure(1, "wigner_S", "S", AxisSpec::X),
            measure(2, "wigner_M", "M", AxisSpec::Z),
        ],
        claims: vec![friend_claim(vec![1, 2])],
        queries: friend_queries(vec![1, 2], event("friend", "0"), event("wigner_M", "0")),
    }
}

/// Wigner measures both `S` and `M` in the x basis.
pub fn wigner_friend_xx() -> ScenarioDoc {
    ScenarioDoc {
        name: s("wigner_friend_XX"),
        description: s("CNOT from S onto M, then Wigner measures S and M in the x basis."),
        systems: vec![system("S", 2), system("M", 2)],
        initial_state: real_amplitudes(&["S"], &[0.6, 0.8]),
        timeline: vec![
            copy_s_to_m(),
            measure(1, "wigner_S", "S", AxisSpec::X),
            measure(2, "wigner_M", "M", AxisSpec::X),
        ],
        claims: vec![friend_claim(vec![1, 2])],
        queries: friend_queries(vec![1, 2], event("friend", "0"), event("wigner_S", "+")),
    }
}

/// `S` starts maximally entangled with `E`; Wigner measures `S` in the z
/// basis and `M` in the x basis, and `E` is read in the z basis.
pub fn wigner_friend_zx() -> ScenarioDoc {
    ScenarioDoc {
        name: s("wigner_friend_ZX"),
        description: s(
            "CNOT from S onto M with S maximally entangled with E, then Wigner measures S in the z basis and M in the x basis.",
        ),
        systems: vec![system("S", 2), system("M", 2), system("E", 2)],
        initial_state: StateSpec::MaxEntangled { a: s("S"), b: s("E") },
        timeline: vec![
            copy_s_to_m(),
            measure(1, "wigner_S", "S", AxisSpec::Z),
            measure(2, "wigner_M", "M", AxisSpec::X),
            measure(3, "reference_E", "E", AxisSpec::Z),
        ],
        claims: vec![friend_claim(vec![1, 2])],
        queries: {
            let mut q = friend_queries(vec![1, 2, 3], event("friend", "1"), event("wigner_S", "1"));
            q.push(QuerySpec::Conditional {
                claims: names(&["friend"]),
                context: vec![],
                finals: vec![1, 2, 3],
                given: vec![event("wigner_S", "0")],
                query: vec![event("reference_E", "0")],
            });
            q.push(QuerySpec::Conditional {
                claims: names(&["friend"]),
                context: vec![],
                finals: vec![1, 2, 3],
                given: vec![event("wigner_S", "1")],
                query: vec![event("wigner_M", "+")],
            });
            q
        },
    }
}

/// CNOT from `S` to `M`, then a controlled phase from the x basis of `M`
/// back onto `S`, then an x measurement of `S`.
pub fn quantum_eraser() -> ScenarioDoc {
    ScenarioDoc {
        name: s("quantum_eraser"),
        description: s(
            "CNOT from S onto M, a controlled phase from the x basis of M onto S, then an x measurement of S.",
        ),
        systems: vec![system("S", 2), system("M", 2)],
        initial_state: real_amplitudes(&["S"], &[0.8, 0.6]),
        timeline: vec![
            copy_s_to_m(),
            op(
                1,
                "eraser",
                PayloadSpec::ControlledPhase {
                    control: s("M"),
                    basis: AxisSpec::X,
                    target: s("S"),
                },
            ),
            measure(2, "interference", "S", AxisSpec::X),
        ],
        claims: vec![
            friend_claim(vec![1, 2]),
            ClaimSpec {
                name: s("friend_unerased"),
                time: 0,
                povm: z_povm("S"),
                context: vec![2],
                candidate_record: None,
            },
        ],
        queries: vec![
            QuerySpec::Parse { claim: s("friend") },
            QuerySpec::Parse {
                claim: s("friend_unerased"),
            },
            QuerySpec::Distribution {
                claims: vec![],
                context: vec![0, 1],
                finals: vec![2],
            },
            QuerySpec::Distribution {
                claims: names(&["friend"]),
                context: vec![],
                finals: vec![2],
            },
            QuerySpec::Distribution {
                claims: names(&["friend_unerased"]),
                context: vec![],
                finals: vec![2],
            },
            QuerySpec::CollapseCompare {
                claims: names(&["friend_unerased"]),
                context: vec![],
                finals: vec![2],
                claim: s("friend_unerased"),
            },
        ],
    }
}

/// The laboratory state `|k⟩_sys |k⟩_mem |env_k⟩_env`.
fn lab(sys: &str, mem: &str, env: &str, k: usize, theta: f64) -> StateSpec {
    let env_state = if k == 0 {
        ket(env, 0)
    } else {
        real_amplitudes(&[env], &[theta.cos(), theta.sin()])
    };
    StateSpec::Product {
        factors: vec![ket(sys, k), ket(mem, k), env_state],
    }
}

/// `(lab_0 ± lab_1)/√2` with a complement outcome.
fn lab_basis(sys: &str, mem: &str, env: &str, theta: f64) -> ObservableSpec {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let vector = |label: &str, sign: f64| LabeledStateSpec {
        label: s(label),
        state: StateSpec::Superposition {
            terms: vec![
                TermSpec {
                    coeff: [h, 0.0],
                    state: lab(sys, mem, env, 0, theta),
                },
                TermSpec {
                    coeff: [sign * h, 0.0],
                    state: lab(sys, mem, env, 1, theta),
                },
            ],
        },
    };
    ObservableSpec::Basis {
        systems: names(&[sys, mem, env]),
        vectors: vec![vector("+", 1.0), vector("-", -1.0)],
        complement: Some(s("perp")),
    }
}

/// `|k⟩_sys ↦ |lab_k⟩`.
fn lab_isometry(sys: &str, mem: &str, env: &str, theta: f64) -> PayloadSpec {
    PayloadSpec::Columns {
        inputs: names(&[sys]),
        outputs: names(&[sys, mem, env]),
        columns: vec![lab(sys, mem, env, 0, theta), lab(sys, mem, env, 1, theta)],
    }
}

/// Two friends and two outside observers, with orthogonal environment states.
pub fn fr_experiment() -> ScenarioDoc {
    fr_experiment_with_env(FRAC_PI_2)
}

/// Two friends and two outside observers, with environment states `|0⟩` and
/// `cos θ|0⟩ + sin θ|1⟩` in both laboratories.
pub fn fr_experiment_with_env(theta: f64) -> ScenarioDoc {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let claim = |name: &str, time: i64, system: &str, context: Vec<i64>| ClaimSpec {
        name: s(name),
        time,
        povm: z_povm(system),
        context,
        candidate_record: None,
    };
    ScenarioDoc {
        name: s("fr_experiment"),
        description: format!(
            "Alice measures R, prepares S for Bob, Bob measures S; Ursula and Wigner then measure the two laboratories. Environment overlap angle {theta}."
        ),
        systems: vec![
            system("R", 2),
            system("A", 2),
            system("Abar", 2),
            system("S", 2),
            system("B", 2),
            system("Bbar", 2),
        ],
        initial_state: real_amplitudes(&["R"], &[(1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt()]),
        timeline: vec![
            op(0, "alice", lab_isometry("R", "A", "Abar", theta)),
            op(
                1,
                "alice_prepares_S",
                PayloadSpec::Columns {
                    inputs: names(&["A"]),
                    outputs: names(&["A", "S"]),
                    columns: vec![
                        StateSpec::Product {
                            factors: vec![ket("A", 0), ket("S", 0)],
                        },
                        StateSpec::Product {
                            factors: vec![ket("A", 1), real_amplitudes(&["S"], &[h, h])],
                        },
                    ],
                },
            ),
            op(2, "bob", lab_isometry("S", "B", "Bbar", theta)),
            op(
                3,
                "ursula",
                PayloadSpec::Measure {
                    observable: lab_basis("R", "A", "Abar", theta),
                },
            ),
            op(
                4,
                "wigner",
                PayloadSpec::Measure {
                    observable: lab_basis("S", "B", "Bbar", theta),
                },
            ),
        ],
        claims: vec![
            claim("alice", 0, "R", vec![1, 2, 4]),
            claim("alice_with_ursula", 0, "R", vec![1, 2, 3, 4]),
            claim("alice_for_bob", 0, "R", vec![1]),
            claim("bob", 2, "S", vec![0, 1]),
            claim("bob_with_wigner", 2, "S", vec![4]),
        ],
        queries: vec![
            QuerySpec::Parse { claim: s("alice") },
            QuerySpec::Parse {
                claim: s("bob_with_wigner"),
            },
            QuerySpec::Parse {
                claim: s("alice_with_ursula"),
            },
            QuerySpec::JointParse {
                claims: names(&["alice_for_bob", "bob"]),
                context: vec![],
                finals: vec![],
            },
            QuerySpec::JointParse {
                claims: names(&["alice_for_bob", "bob"]),
                context: vec![],
                finals: vec![4],
            },
            QuerySpec::Conditional {
                claims: names(&["alice"]),
                context: vec![],
                finals: vec![4],
                given: vec![event("alice", "1")],
                query: vec![event("wigner", "+")],
            },
            QuerySpec::Conditional {
                claims: names(&["alice_for_bob", "bob"]),
                context: vec![],
                finals: vec![],
                given: vec![event("bob", "1")],
                query: vec![event("alice_for_bob", "1")],
            },
            QuerySpec::Conditional {
                claims: names(&["alice_for_bob", "bob"]),
                context: vec![],
                finals: vec![4],
                given: vec![event("bob", "1")],
                query: vec![event("wigner", "+")],
            },
            QuerySpec::Distribution {
                claims: vec![],
                context: vec![0, 1, 2],
                finals: vec![3, 4],
            },
            QuerySpec::CollapseCompare {
                claims: names(&["alice"]),
                context: vec![],
                finals: vec![4],
                claim: s("alice"),
            },
        ],
    }
}
