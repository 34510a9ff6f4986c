//! Run the bundled quick preset in-process and print per-method means.

use std::collections::BTreeMap;
use std::path::Path;

use dfpo::experiment::{run_sweep, ExperimentConfig};

fn main() -> dfpo::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/quick.toml");
    let cfg = ExperimentConfig::load(&path)?;
    let rows = run_sweep(&cfg, std::io::sink(), false)?;

    let mut means: BTreeMap<(&str, String), (f64, usize)> = BTreeMap::new();
    for r in &rows {
        let e = means.entry((r.method.as_str(), format!("{}", r.axis_value))).or_default();
        e.0 += r.sum_rate;
        e.1 += 1;
    }
    println!("{:<8} {:>8} {:>10}", "method", cfg.sweep.axis.as_str(), "mean rate");
    for ((method, value), (sum, n)) in means {
        println!("{method:<8} {value:>8} {:>10.3}", sum / n as f64);
    }
    Ok(())
}
