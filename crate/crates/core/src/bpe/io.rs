//! Tokenizer files.
//!
//! * `merges.txt`: header line, then `<left> <right>` per merge in rank order.
//! * `vocab.tsv`: `<token>\t<id>` with dense ids, alphabet first.
//! * `ledger.tsv`: optional training record, `rank\tpair_count\tcumulative_gain`.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{encode, BpeError, MergeRule, MergeTable};
use crate::corpus::WordStream;

pub const MERGES_HEADER: &str = "#morphotok-merges v1";
const LEDGER_HEADER: &str = "rank\tpair_count\tcumulative_gain";

fn write_file(path: &Path, body: &str) -> Result<(), BpeError> {
    fs::write(path, body).map_err(|source| BpeError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, BpeError> {
    fs::read_to_string(path).map_err(|source| BpeError::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> BpeError {
    BpeError::Parse {
        file: file.to_owned(),
        line,
        message: message.into(),
    }
}

pub fn export_tokenizer(table: &MergeTable, dir: impl AsRef<Path>) -> Result<(), BpeError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| BpeError::Io {
        path: dir.to_owned(),
        source,
    })?;

    let mut merges = String::from(MERGES_HEADER);
    merges.push('\n');
    for rule in table.rules() {
        merges.push_str(&rule.left);
        merges.push(' ');
        merges.push_str(&rule.right);
        merges.push('\n');
    }
    write_file(&dir.join("merges.txt"), &merges)?;

    let mut vocab = String::new();
    for (id, token) in table.vocab().iter().enumerate() {
        vocab.push_str(&format!("{token}\t{id}\n"));
    }
    write_file(&dir.join("vocab.tsv"), &vocab)?;

    let ledger_path = dir.join("ledger.tsv");
    if table.gain_ledger().is_empty() {
        if ledger_path.exists() {
            fs::remove_file(&ledger_path).map_err(|source| BpeError::Io {
                path: ledger_path.clone(),
                source,
            })?;
        }
    } else {
        let mut ledger = format!("{LEDGER_HEADER}\n");
        for (rule, gain) in table.rules().iter().zip(table.gain_ledger()) {
            ledger.push_str(&format!("{}\t{}\t{}\n", rule.rank, rule.pair_count, gain));
        }
        write_file(&ledger_path, &ledger)?;
    }
    Ok(())
}

fn parse_merges(text: &str) -> Result<Vec<(String, String)>, BpeError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == MERGES_HEADER => {}
        _ => return Err(parse_err("merges.txt", 1, format!("expected header `{MERGES_HEADER}`"))),
    }
    lines
        .map(|(i, line)| {
            let n = i + 1;
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                    Ok((l.to_owned(), r.to_owned()))
                }
                _ => Err(parse_err("merges.txt", n, "expected `<left> <right>`")),
            }
        })
        .collect()
}

fn parse_vocab(text: &str) -> Result<Vec<String>, BpeError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let n = i + 1;
            let (token, id) = line
                .rsplit_once('\t')
                .ok_or_else(|| parse_err("vocab.tsv", n, "expected `<token>\\t<id>`"))?;
            let id: usize = id
                .parse()
                .map_err(|_| parse_err("vocab.tsv", n, format!("bad id {id:?}")))?;
            if id != i {
                return Err(parse_err("vocab.tsv", n, format!("id {id} is not dense (expected {i})")));
            }
            if token.is_empty() {
                return Err(parse_err("vocab.tsv", n, "empty token"));
            }
            Ok(token.to_owned())
        })
        .collect()
}

fn parse_ledger(text: &str, rules: usize) -> Result<(Vec<u64>, Vec<u64>), BpeError> {
    let mut counts = Vec::new();
    let mut gains = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if i == 0 {
            if line != LEDGER_HEADER {
                return Err(parse_err("ledger.tsv", 1, "bad header"));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parsed: Option<Vec<u64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[rank, count, gain]) if rank as usize == i - 1 => {
                counts.push(count);
                gains.push(gain);
            }
            _ => return Err(parse_err("ledger.tsv", n, "expected `rank\\tpair_count\\tgain`")),
        }
    }
    if gains.len() != rules {
        return Err(parse_err(
            "ledger.tsv",
            gains.len() + 1,
            format!("ledger has {} rows, merges.txt has {rules}", gains.len()),
        ));
    }
    Ok((counts, gains))
}

/// Reads a tokenizer written by [`export_tokenizer`]. Without `ledger.tsv`
/// the pair counts are zero and the gain ledger is empty.
pub fn import_tokenizer(dir: impl AsRef<Path>) -> Result<MergeTable, BpeError> {
    let dir = dir.as_ref();
    let pairs = parse_merges(&read_file(&dir.join("merges.txt"))?)?;
    let vocab = parse_vocab(&read_file(&dir.join("vocab.tsv"))?)?;

    let alphabet: BTreeSet<String> = vocab
        .iter()
        .take_while(|t| t.chars().count() == 1)
        .cloned()
        .collect();

    let ledger_path = dir.join("ledger.tsv");
    let (counts, gains) = if ledger_path.exists() {
        parse_ledger(&read_file(&ledger_path)?, pairs.len())?
    } else {
        (vec![0; pairs.len()], Vec::new())
    };

    let rules = pairs
        .into_iter()
        .zip(counts)
        .enumerate()
        .map(|(rank, ((left, right), pair_count))| MergeRule {
            left,
            right,
            rank,
            pair_count,
        })
        .collect();
    let table = MergeTable::from_parts(alphabet, rules, gains)
        .map_err(|e| parse_err("merges.txt", 0, e.to_string()))?;
    let expected = table.vocab();
    if let Some(pos) = expected.iter().zip(&vocab).position(|(a, b)| a != b) {
        return Err(parse_err(
            "vocab.tsv",
            pos + 1,
            format!("token {:?} disagrees with merges.txt (expected {:?})", vocab[pos], expected[pos]),
        ));
    }
    if expected.len() != vocab.len() {
        return Err(parse_err(
            "vocab.tsv",
            expected.len().min(vocab.len()) + 1,
            format!("vocabulary has {} entries, merges imply {}", vocab.len(), expected.len()),
        ));
    }
    Ok(table)
}

/// Writes one line per sentence of space-separated decimal token ids.
pub fn write_id_corpus<W: Write>(
    mut out: W,
    sentences: &[WordStream],
    table: &MergeTable,
) -> Result<(), BpeError> {
    let ids: HashMap<String, usize> = table
        .vocab()
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let io_err = |source| BpeError::Io {
        path: "<id corpus>".into(),
        source,
    };
    for sentence in sentences {
        let enc = encode(sentence, table)?;
        let line = enc
            .tokens()
            .iter()
            .map(|t| {
                ids.get(t)
                    .map(usize::to_string)
                    .ok_or_else(|| BpeError::UnknownToken(t.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?
            .join(" ");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    Ok(())
}
