// Copyright 2026 Fluxgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Drive an experiment from a TOML config as the command-line tool does,
//! and write its files with provenance headers.

use fluxgate::experiments::{prepare, write_outputs, Config, Experiment, Header};

const CONFIG: &str = r#"
seed = 42

[rb]
lengths = [1, 10, 50, 200, 800]
sequences_per_length = 20
shots = 1000

[rb.backend]
depolarizing_prob = 0.002
"#;

fn main() -> fluxgate::Result<()> {
    let config = Config::from_toml(CONFIG)?;
    let job = prepare(Experiment::Rb, &config)?;
    print!("{}", job.plan_text());
    let output = job.run()?;
    for line in &output.summary {
        println!("{line}");
    }
    let dir = std::env::temp_dir().join("fluxgate-example");
    for path in write_outputs(&dir, &Header::new(Experiment::Rb, &config), &output)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
