//! The whole pipeline from a TOML config: generated corpora for two
//! groups, tokenizers, id corpora, and the report files.
//!
//! ```bash
//! cargo run --release --example full_pipeline -- /tmp/morphotok-run
//! ```

use std::fs;
use std::path::PathBuf;

use morphotok::pipeline::{self, ExperimentConfig};
use morphotok::stats::{generate_typology_corpus, TypologyGenConfig, TypologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("morphotok-run"));
    fs::create_dir_all(&dir)?;

    let mut config = String::from(
        "seed = 0\noutput_dir = \"out\"\n\n[schedule]\nsizes = [2500, 5000, 10000]\n\n[trainer]\nmerge_limit = 500\n",
    );
    for (kind, group, seeds) in [(TypologyKind::Agglutinative, "synthetic", 1..4), (TypologyKind::Analytic, "analytic", 4..7)] {
        for seed in seeds {
            let cfg = TypologyGenConfig::preset(kind, seed, 10_000);
            let lines: Vec<String> = generate_typology_corpus(&cfg)?.words().chunks(20).map(|c| c.join(" ")).collect();
            let file = format!("{}.txt", cfg.lang());
            fs::write(dir.join(&file), lines.join("\n"))?;
            config.push_str(&format!(
                "\n[[languages]]\nlang = \"{}\"\ngroup = \"{group}\"\ncorpus_path = \"{file}\"\n",
                cfg.lang()
            ));
        }
    }
    let config_path = dir.join("experiment.toml");
    fs::write(&config_path, &config)?;

    let cfg = ExperimentConfig::load(&config_path)?;
    let analysis = pipeline::run(&cfg)?;

    println!("{:<16} {:<9} {:>8} {:>8} {:>8}", "lang", "type", "rho", "slope", "R2");
    for r in analysis.records() {
        println!("{:<16} {:<9} {:>8.2} {:>8.3} {:>8.3}", r.lang, r.group.as_str(), r.rho.mean_rho, r.fit.slope, r.fit.r_squared);
    }
    println!();
    for c in &analysis.comparisons {
        let p = c.test.map(|t| format!("{:.2e}", t.p_adjusted)).unwrap_or_else(|| "-".into());
        println!("{:<18} delta {:>11.4e}  p_adj {p}", c.metric_name, c.delta);
    }
    println!("\nreport written to {}", cfg.output_dir.display());
    Ok(())
}
