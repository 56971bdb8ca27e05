//! Parsing KDD-format files, mapping labels to categories, counting the
//! attack census, and verifying files against a SHA256SUMS manifest.
//!
//! `cargo run --example dataset_tour [-- <KDDTrain+.txt>]`

use std::path::{Path, PathBuf};

use hierids::dataset::{
    category_counts, make_fixture, parse_kdd_file, parse_kdd_str, sha256_file, verify_checksums, AttackTaxonomy,
    Category, ConnectionRecord, Split, TRAIN_ATTACK_CENSUS,
};

fn main() -> hierids::Result<()> {
    let work = std::env::temp_dir().join("hierids-examples").join("dataset_tour");
    run(&work, std::env::args().nth(1).map(PathBuf::from).as_deref())
}

pub fn run(work: &Path, train_file: Option<&Path>) -> hierids::Result<()> {
    std::fs::create_dir_all(work).map_err(|e| hierids::IdsError::io(work, e))?;

    // one record, parsed and written back
    let line = "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,normal,21";
    let rec = ConnectionRecord::parse_line(line)?;
    println!(
        "{} via {} -> label {}, difficulty {}",
        rec.protocol_type(),
        rec.service(),
        rec.label(),
        rec.difficulty()
    );
    assert_eq!(rec.to_line(), line);

    // malformed input is rejected with a line number
    let err = parse_kdd_str("0,tcp,http\n", "<inline>", Split::Train).unwrap_err();
    println!("malformed input: {err}");

    let ds = match train_file {
        Some(p) => parse_kdd_file(p, Split::Train)?,
        None => make_fixture(20, 7)?,
    };
    let path = work.join("train.txt");
    ds.write(&path)?;

    let tax = AttackTaxonomy::extended();
    let cats = ds.categories(&tax)?;
    println!("{} rows: {:?}", ds.len(), category_counts(&cats));
    println!("\"mailbomb\" is {}", tax.categorize("mailbomb")?);

    // census against the reference training-set counts
    let counts = ds.label_counts();
    for (name, cat, expected) in TRAIN_ATTACK_CENSUS.iter().filter(|(_, c, _)| *c == Category::U2R) {
        let got = counts.get(*name).copied().unwrap_or(0);
        println!("{cat:>5} {name:<16} {got:>6} (reference {expected})");
    }

    let digest = sha256_file(&path)?;
    std::fs::write(work.join("SHA256SUMS"), format!("{digest}  train.txt\n"))
        .map_err(|e| hierids::IdsError::io(work, e))?;
    println!("verified: {:?}", verify_checksums(work)?);
    Ok(())
}
