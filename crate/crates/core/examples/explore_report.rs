//! Exploratory output: per-category histograms, the Pearson correlation
//! matrix, scatter exports and constant-feature detection.
//!
//! `cargo run --example explore_report`

use std::path::Path;

use hierids::dataset::{make_fixture, AttackTaxonomy};
use hierids::explore::{
    feature_names, find_constant_features, histogram_feature, parse_scatter, pearson_matrix, raw_matrix,
    scatter_export, write_report, ExploreConfig,
};

fn main() -> hierids::Result<()> {
    run(&std::env::temp_dir().join("hierids-examples").join("explore_report"))
}

pub fn run(work: &Path) -> hierids::Result<()> {
    let ds = make_fixture(25, 3)?;
    let tax = AttackTaxonomy::extended();

    let h = histogram_feature(&ds, &tax, "serror_rate", 5)?;
    print!("{}", h.to_csv());

    let x = raw_matrix(&ds);
    let names = feature_names();
    let corr = pearson_matrix(&x, &names)?;
    println!(
        "corr(serror_rate, srv_serror_rate) = {:?}",
        corr.get("serror_rate", "srv_serror_rate")
    );
    println!("constant columns: {:?}", corr.constant);

    let redundancy = find_constant_features(&x, &names)?;
    println!(
        "{} constant features over {} rows",
        redundancy.constant_features.len(),
        redundancy.rows
    );

    let points = parse_scatter(&scatter_export(&ds, &tax, "count", "serror_rate")?)?;
    println!("scatter has {} points; first {:?}", points.len(), points[0]);

    let cfg = ExploreConfig {
        histogram_features: vec!["duration".into(), "src_bytes".into()],
        ..ExploreConfig::default()
    };
    let files = write_report(&ds, &tax, work, &cfg)?;
    println!("wrote {} files under {}", files.len(), work.display());
    Ok(())
}
