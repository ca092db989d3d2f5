#![allow(dead_code)]

use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spherelight"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn spherelight")
}

pub fn run_ok(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed with {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

pub fn exit_code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

/// JSON text for a parameter file with the given nonzero atoms (shared by
/// all three channels).
pub fn sparse_params_json(
    n: usize,
    atoms: &[(usize, f64)],
    intensity: [f64; 3],
    ambient: [f64; 3],
) -> String {
    let mut weights = vec![0.0; n];
    for &(i, w) in atoms {
        weights[i] = w;
    }
    let row = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!(
        "{{\"n\": {n}, \"fraction\": 0.05, \"weighted\": true, \"distribution\": [[{r}], [{r}], [{r}]], \"intensity\": [{i}], \"ambient\": [{a}]}}",
        r = row(&weights),
        i = row(&intensity),
        a = row(&ambient),
    )
}

pub fn parse_distribution(bytes: &[u8]) -> [Vec<f64>; 3] {
    let v: serde_json::Value = serde_json::from_slice(bytes).expect("params json");
    let rows = v["distribution"].as_array().expect("distribution");
    let channel = |i: usize| -> Vec<f64> {
        rows[i]
            .as_array()
            .expect("channel")
            .iter()
            .map(|x| x.as_f64().expect("weight"))
            .collect()
    };
    [channel(0), channel(1), channel(2)]
}
