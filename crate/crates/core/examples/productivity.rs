//! Subword productivity: the mean number of distinct words each subword
//! occurs in, on a hand example and on generated analytic vs agglutinative
//! corpora.

use morphotok::bpe::{self, TrainerConfig};
use morphotok::corpus::WordStream;
use morphotok::metrics::{self, DEFAULT_MERGE_ROUNDS};
use morphotok::stats::{generate_typology_corpus, TypologyGenConfig, TypologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = WordStream::from_whitespace("xx", "abc abd");
    let table = bpe::train(&s, &TrainerConfig::with_merges(1))?;
    let index = metrics::index_stream(&s, &table, 1)?;
    for (sub, entry) in index.entries() {
        println!("W_{sub} = {:?}", entry.words);
    }
    println!("rho = {:.6}\n", metrics::productivity(&index)?);

    println!("{:<16} {:>8} {:>8} {:>8} {:>8}", "language", "300", "400", "500", "std");
    for kind in [TypologyKind::Agglutinative, TypologyKind::Analytic] {
        for seed in 7..10 {
            let s = generate_typology_corpus(&TypologyGenConfig::preset(kind, seed, 10_000))?;
            let r = metrics::productivity_rounds(&s, &DEFAULT_MERGE_ROUNDS, &TrainerConfig::default(), 1)?;
            let row: Vec<String> = r.per_round.values().map(|v| format!("{v:>8.2}")).collect();
            println!("{:<16} {} {:>8.2}", r.lang, row.join(" "), r.std_rho);
        }
    }
    Ok(())
}
