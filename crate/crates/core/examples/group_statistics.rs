//! Group statistics: repetition trends over growing samples, a Welch test
//! at each sample size with Bonferroni correction, a Δ/σ comparison and a
//! one-way ANOVA across languages.

use morphotok::bpe::TrainerConfig;
use morphotok::corpus::SampleSchedule;
use morphotok::report::compare_values;
use morphotok::stats::{generate_typology_corpus, one_way_anova, sampled_group_test, Group, TypologyGenConfig, TypologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let words = 20_000;
    let mut streams = Vec::new();
    for (kind, seeds) in [(TypologyKind::Agglutinative, 1..4), (TypologyKind::Analytic, 4..7)] {
        for seed in seeds {
            streams.push((generate_typology_corpus(&TypologyGenConfig::preset(kind, seed, words))?, Group::from(kind)));
        }
    }
    let sched = SampleSchedule::prefix(vec![words / 8, words / 4, words / 2, words])?;
    let result = sampled_group_test(&streams, &sched, &TrainerConfig::with_merges(300), 100, 1)?;

    for (group, trend) in &result.trends {
        let vals: Vec<String> = trend.values.iter().map(|v| format!("{v:.5}")).collect();
        println!("{:<16} {:<9} {}", trend.lang, group.as_str(), vals.join(" "));
    }
    println!();
    for (size, t) in sched.sizes.iter().zip(&result.per_point) {
        println!("n={size:<6} t={:>7.3} df={:>5.2} p={:.2e} p_adj={:.2e}", t.statistic, t.df, t.p_value, t.p_adjusted);
    }

    let last = |g: Group| -> Vec<f64> {
        result.trends.iter().filter(|(tg, _)| *tg == g).map(|(_, t)| *t.values.last().unwrap()).collect()
    };
    let c = compare_values("repetition", &last(Group::Synthetic), &last(Group::Analytic), sched.sizes.len())?;
    println!("\ndelta {:.2e}, sigma synthetic {:.2e}, sigma analytic {:.2e}", c.delta, c.sigma_a, c.sigma_b);

    let per_language: Vec<Vec<f64>> = result.trends.iter().map(|(_, t)| t.values.clone()).collect();
    let anova = one_way_anova(&per_language)?;
    println!("ANOVA across languages: F={:.3} p={:.2e}", anova.statistic, anova.p_value);
    Ok(())
}
