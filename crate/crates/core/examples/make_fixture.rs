//! Writes a synthetic KDD-format train/test pair.
//!
//! ```text
//! cargo run --example make_fixture -- <out_dir> [per_class]
//! cargo run --release --example make_fixture -- <out_dir> nsl
//! ```
//!
//! `nsl` reproduces the real files' class sizes (about 126k train and
//! 22.5k test rows), which is handy for timing runs.

use std::path::{Path, PathBuf};

use hierids::dataset::{category_counts, AttackTaxonomy, FixtureSpec};

fn main() -> hierids::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "fixture".into()));
    let shape = args.next().unwrap_or_else(|| "200".into());
    run(&out, &shape)
}

pub fn run(out: &Path, shape: &str) -> hierids::Result<()> {
    // Normal, DoS, Probe, R2L, U2R
    let (train_counts, test_counts) = if shape == "nsl" {
        ([67_343, 45_927, 11_656, 995, 52], [9_711, 7_458, 2_421, 2_754, 200])
    } else {
        let n: usize = shape
            .parse()
            .map_err(|_| hierids::IdsError::Config(format!("expected a row count or 'nsl', got '{shape}'")))?;
        ([n; 5], [n / 4 + 1; 5])
    };
    std::fs::create_dir_all(out).map_err(|e| hierids::IdsError::io(out, e))?;

    let tax = AttackTaxonomy::extended();
    for (name, counts, seed) in [("train.txt", train_counts, 1), ("test.txt", test_counts, 2)] {
        let ds = FixtureSpec {
            counts,
            spread: 0.6,
            seed,
        }
        .generate()?;
        ds.write(&out.join(name))?;
        println!("{name}: {} rows {:?}", ds.len(), category_counts(&ds.categories(&tax)?));
    }
    Ok(())
}
