//! Compression power of a merge table: how many symbols each merge removes,
//! the cumulative gain after every prefix, and the per-rank check of
//! whether successive gains grow.

use morphotok::bpe::{self, TrainerConfig};
use morphotok::corpus::WordStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "lowest lower newest newer wider widest lower newest low new wide \
                lowest newer wider lower newest";
    let stream = WordStream::from_whitespace("en", text);
    let table = bpe::train(&stream, &TrainerConfig::with_merges(12))?;

    let gains = bpe::compression_profile(&stream, &table)?;
    let symbols: usize = stream.words().iter().map(|w| w.chars().count()).sum();
    println!("{symbols} symbols before any merge\n");
    println!("rank  merge          gain  G(prefix)");
    for (k, rule) in table.rules().iter().enumerate() {
        let g = bpe::compression_power(&stream, &table, k + 1)?;
        println!("{k:>4}  {:<13} {:>5}  {g:>9}", format!("{}+{}", rule.left, rule.right), gains[k]);
    }
    assert_eq!(table.gain_ledger().last().copied(), Some(gains.iter().sum()));

    let relation = bpe::check_increment_relation(&stream, &table)?;
    let holding = relation.iter().filter(|(_, ok)| *ok).count();
    println!("\ngain[k] <= gain[k+1] holds at {holding} of {} ranks", relation.len());
    Ok(())
}
