//! Runs an experiment from an in-memory config and prints its CSV table.

use sense_rf::config::ExperimentSpec;
use sense_rf::experiment::{run, Overrides};

const CONFIG: &str = r#"
kind = "roc"

[detector]
samples = 5
pfa_range = { start = 0.01, stop = 0.5, count = 6, log = true }

[profile]
snr_db = 5.0
ibo_db = 3.0
irr_db = 20.0
phn_bandwidth_hz = 100.0
"#;

fn main() -> sense_rf::Result<()> {
    let spec = ExperimentSpec::parse(CONFIG)?;
    let outcome = run(&spec, Overrides::default())?;
    print!("{}", outcome.table.to_csv_string());
    Ok(())
}
