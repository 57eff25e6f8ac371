//! Train a BPE tokenizer on a plain-text corpus, save it, load it back and
//! write the token-id corpus an LM trainer consumes.
//!
//! ```bash
//! cargo run --example train_tokenizer -- corpus.txt 300 out/
//! cargo run --example train_tokenizer          # uses a generated corpus
//! ```

use std::error::Error;
use std::fs;
use std::path::PathBuf;

use morphotok::bpe::{self, TrainerConfig};
use morphotok::corpus::{NormalizeConfig, WordStream};
use morphotok::pipeline::{self, CorpusFormat};
use morphotok::stats::{generate_typology_corpus, TypologyGenConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let corpus = args.next().map(PathBuf::from);
    let merges: usize = args.next().map(|m| m.parse()).transpose()?.unwrap_or(300);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("morphotok-tok"));

    let documents: Vec<WordStream> = match corpus {
        Some(path) => pipeline::load_corpus(&path, "und", CorpusFormat::Plaintext, &NormalizeConfig::default())?.documents,
        None => {
            let s = generate_typology_corpus(&TypologyGenConfig::agglutinative(1, 5000))?;
            s.words()
                .chunks(25)
                .map(|c| WordStream::new(s.lang(), c.to_vec()))
                .collect::<Result<_, _>>()?
        }
    };
    let stream = WordStream::concat("und", documents.iter().cloned());

    let table = bpe::train(&stream, &TrainerConfig::with_merges(merges))?;
    println!("{} words, alphabet {}, {} merges, vocab {}", stream.total_words(), table.alphabet().len(), table.len(), table.vocab_size());
    for rule in table.rules().iter().take(8) {
        println!("  #{:<3} {} + {} -> {}  (count {})", rule.rank, rule.left, rule.right, rule.merged(), rule.pair_count);
    }

    bpe::export_tokenizer(&table, &out)?;
    let reloaded = bpe::import_tokenizer(&out)?;
    assert_eq!(reloaded, table);

    let first = &documents[0];
    let enc = bpe::encode(first, &reloaded)?;
    let shown: Vec<String> = enc.words().take(6).map(|w| w.join("|")).collect();
    println!("first words: {}", shown.join(" "));

    let ids_path = out.join("ids.txt");
    bpe::write_id_corpus(fs::File::create(&ids_path)?, &documents, &reloaded)?;
    println!("wrote {} and {}", out.join("vocab.tsv").display(), ids_path.display());
    Ok(())
}
