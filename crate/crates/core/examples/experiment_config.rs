//! Runs a scan from an inline TOML config and lists the files it wrote.

use graphreg::experiment::{run_gaussian_scan, ExperimentConfig};

const CONFIG: &str = r#"
[generator]
kind = "goe"
n = 50
sigma = 0.5

[sampling]
alpha = 10.0
seeds = [1, 2]

[outputs]
formats = ["csv", "svg"]
"#;

fn main() -> graphreg::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let out = std::env::temp_dir().join(format!("graphreg-example-{}", cfg.hash()));
    let artifacts = run_gaussian_scan(&cfg, &out)?;
    println!("config hash {}", cfg.hash());
    for f in &artifacts.files {
        println!("{}", f.display());
    }
    print!("{}", std::fs::read_to_string(out.join("summary.txt"))?);
    Ok(())
}
