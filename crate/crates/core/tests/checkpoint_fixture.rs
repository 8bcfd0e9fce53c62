//! Loads a checkpoint written by an earlier build and verifies the forward
//! outputs match the values frozen alongside it. Guards the stability of the
//! `qnet-v1` format and of the forward arithmetic across builds.
//!
//! Regenerate the fixture (only after an intentional format change) with:
//! `cargo test -p uavedge-core --test checkpoint_fixture -- --ignored`

use std::path::PathBuf;

use uavedge_core::nn;
use uavedge_core::QNetwork;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn fixture_inputs() -> Vec<Vec<f64>> {
    // Five fixed probe vectors for the 6-input fixture network.
    vec![
        vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125],
        vec![-1.0, 1.0, -0.5, 0.5, -0.25, 0.25],
        vec![0.9, 0.1, 0.8, 0.2, 0.7, 0.3],
        vec![-0.33, -0.66, -0.99, 0.33, 0.66, 0.99],
    ]
}

#[test]
fn frozen_checkpoint_reproduces_frozen_outputs() {
    let net = nn::load(&data_dir().join("fixture.qnet")).expect("fixture checkpoint loads");
    assert_eq!(net.input_dim(), 6);
    assert_eq!(net.output_dim(), 3);

    let expected_text =
        std::fs::read_to_string(data_dir().join("fixture_outputs.txt")).expect("expected outputs");
    let expected: Vec<Vec<f64>> = expected_text
        .lines()
        .map(|line| {
            line.split_whitespace()
                .map(|t| t.parse::<f64>().unwrap())
                .collect()
        })
        .collect();

    for (x, want) in fixture_inputs().iter().zip(&expected) {
        let got = net.predict(x).unwrap();
        assert_eq!(&got, want, "forward output drifted for input {x:?}");
    }
}

#[test]
#[ignore = "writes tests/data; run manually to regenerate the fixture"]
fn regenerate_fixture() {
    let dir = data_dir();
    std::fs::create_dir_all(&dir).unwrap();
    let net = QNetwork::default_q(6, 3, 2024).unwrap();
    nn::save(&net, &dir.join("fixture.qnet")).unwrap();
    let mut out = String::new();
    for x in fixture_inputs() {
        let q = net.predict(&x).unwrap();
        let line: Vec<String> = q.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    std::fs::write(dir.join("fixture_outputs.txt"), out).unwrap();
}
