#![allow(dead_code)]

use std::fmt::Write as _;

use rand::Rng;
use tslmi::lmi::{Assignment, Catalogue, VarShape};
use tslmi::model::parse_system;
use tslmi::{Mat, SystemSpec};

pub fn toml_matrix(m: &[Vec<f64>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Single subsystem, single mode, single rule, no disturbance coupling.
pub fn lti_plant(a: &[Vec<f64>], b: &[Vec<f64>], c: &[Vec<f64>], x0: &[f64]) -> SystemSpec {
    let n = a.len();
    let bw = vec![vec![0.0]; n];
    let text = format!(
        r#"
[system]
name = "lti"
[[subsystem]]
state_dim = {n}
output_dim = {p}
input_dim = {u}
disturbance_dim = 1
initial_state = {x0:?}
[subsystem.switching]
kind = "schedule"
entries = [{{ time = 0.0, mode = 0 }}]
[[subsystem.mode]]
[[subsystem.mode.rule]]
membership = "1"
lambda = 0.0
A = {a}
B = {b}
Bw = {bw}
C = {c}
"#,
        p = c.len(),
        u = b[0].len(),
        a = toml_matrix(a),
        b = toml_matrix(b),
        bw = toml_matrix(&bw),
        c = toml_matrix(c),
    );
    parse_system(&text).expect("lti plant parses")
}

fn random_rows(rng: &mut impl Rng, r: usize, c: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..r).map(|_| (0..c).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).collect()
}

/// Small random plant: up to three subsystems, up to two modes and two rules.
pub fn random_system(rng: &mut impl Rng) -> SystemSpec {
    let n = rng.gen_range(1..=3);
    let dims: Vec<(usize, usize, usize, usize)> = (0..n)
        .map(|_| (rng.gen_range(1..=3), rng.gen_range(1..=2), rng.gen_range(1..=2), rng.gen_range(1..=2)))
        .collect();
    let mut text = String::from("[system]\nname = \"random\"\n");
    for i in 0..n {
        let (nx, p, u, v) = dims[i];
        let modes = rng.gen_range(1..=2);
        let _ = writeln!(
            text,
            "[[subsystem]]\nstate_dim = {nx}\noutput_dim = {p}\ninput_dim = {u}\ndisturbance_dim = {v}\ninitial_state = {:?}",
            vec![0.0; nx]
        );
        let entries: Vec<String> = (0..modes).map(|j| format!("{{ time = {}.0, mode = {j} }}", j)).collect();
        let _ = writeln!(text, "[subsystem.switching]\nkind = \"schedule\"\nentries = [{}]", entries.join(", "));
        for _ in 0..modes {
            let rules = rng.gen_range(1..=2);
            text.push_str("[[subsystem.mode]]\n");
            for s in 0..rules {
                let membership = match (rules, s) {
                    (1, _) => "1".to_string(),
                    (_, 0) => "sin(x[0])^2".to_string(),
                    _ => "one_minus(0)".to_string(),
                };
                let _ = writeln!(
                    text,
                    "[[subsystem.mode.rule]]\nmembership = \"{membership}\"\nlambda = {:?}\nA = {}\nB = {}\nBw = {}\nC = {}",
                    -rng.gen_range(0.0..6.0),
                    toml_matrix(&random_rows(rng, nx, nx, 2.0)),
                    toml_matrix(&random_rows(rng, nx, u, 1.0)),
                    toml_matrix(&random_rows(rng, nx, v, 0.1)),
                    toml_matrix(&random_rows(rng, p, nx, 1.0)),
                );
                for alpha in (0..n).filter(|&a| a != i) {
                    let (na, _, _, va) = dims[alpha];
                    let _ = writeln!(
                        text,
                        "[[subsystem.mode.rule.coupling]]\nalpha = {alpha}\nF = {}\nBw = {}",
                        toml_matrix(&random_rows(rng, nx, na, 0.1)),
                        toml_matrix(&random_rows(rng, nx, va, 0.1)),
                    );
                }
            }
        }
    }
    parse_system(&text).unwrap_or_else(|e| panic!("random system invalid: {e}\n{text}"))
}

pub fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_symmetric(rng: &mut impl Rng, d: usize) -> Mat {
    let m = random_matrix(rng, d, d);
    (&m + m.transpose()) * 0.5
}

/// Every variable filled with entries in `[-1, 1]`.
pub fn random_assignment(rng: &mut impl Rng, cat: &Catalogue) -> Assignment {
    let mut x = cat.zero_assignment();
    for (n, info) in cat.vars().iter().enumerate() {
        let value = match info.shape {
            VarShape::Symmetric(d) => random_symmetric(rng, d),
            VarShape::Full(r, c) => random_matrix(rng, r, c),
            VarShape::Scalar => random_matrix(rng, 1, 1),
        };
        x.set(tslmi::lmi::VarId(n), value);
    }
    x
}
