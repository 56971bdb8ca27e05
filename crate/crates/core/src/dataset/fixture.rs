use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Category, ConnectionRecord, FeatureKind, LabeledDataset, Split, FEATURES, N_FEATURES};
use crate::error::{IdsError, Result};

const PROTOCOLS: [&str; 3] = ["tcp", "udp", "icmp"];
const SERVICES: [&str; 8] = [
    "http", "private", "ftp_data", "smtp", "ecr_i", "telnet", "domain_u", "other",
];
const FLAGS: [&str; 5] = ["SF", "S0", "REJ", "RSTO", "SH"];

fn attack_names(cat: Category) -> &'static [&'static str] {
    match cat {
        Category::Normal => &["normal"],
        Category::DoS => &["neptune", "smurf", "back", "teardrop"],
        Category::Probe => &["satan", "ipsweep", "portsweep", "nmap"],
        Category::R2L => &["guess_passwd", "warezclient", "imap"],
        Category::U2R => &["buffer_overflow", "rootkit", "perl"],
    }
}

/// Synthetic dataset shape: per-category row counts (in
/// `Category::ALL` order), blob spread, and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub counts: [usize; 5],
    /// Standard deviation of the Gaussian noise around each class centre.
    /// Class centres sit 2.0 apart on every continuous feature.
    pub spread: f64,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn balanced(n_per_class: usize, seed: u64) -> Self {
        FixtureSpec {
            counts: [n_per_class; 5],
            spread: 0.5,
            seed,
        }
    }

    pub fn generate(&self) -> Result<LabeledDataset> {
        if self.counts.iter().all(|&c| c == 0) {
            return Err(IdsError::InvalidInput("fixture needs at least one row".into()));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return Err(IdsError::InvalidInput("fixture spread must be finite and >= 0".into()));
        }
        let mut rng = crate::rng_from_seed(self.seed);
        let max = *self.counts.iter().max().unwrap();
        let mut records = Vec::with_capacity(self.counts.iter().sum());
        // round-robin over classes so prefixes and splits see every class
        for i in 0..max {
            for (ci, &cat) in Category::ALL.iter().enumerate() {
                if i < self.counts[ci] {
                    records.push(self.record(ci, cat, i, &mut rng)?);
                }
            }
        }
        LabeledDataset::new(records, Split::Fixture)
    }

    fn record(&self, ci: usize, cat: Category, i: usize, rng: &mut impl Rng) -> Result<ConnectionRecord> {
        let mut fields = Vec::with_capacity(N_FEATURES);
        for spec in FEATURES.iter() {
            let j = spec.index;
            let value = match (j, spec.kind) {
                (1, _) => pick(&PROTOCOLS, ci % PROTOCOLS.len(), rng),
                (2, _) => pick(&SERVICES, ci, rng),
                (3, _) => pick(&FLAGS, ci, rng),
                // always-zero columns, as in the real training data
                (19, _) | (20, _) => "0".to_string(),
                (_, FeatureKind::Binary) => {
                    let p = 0.1 + 0.4 * ((ci + j) % 3) as f64;
                    if rng.random::<f64>() < p { "1" } else { "0" }.to_string()
                }
                _ => {
                    let level = ((2 * ci + 3 * j) % 5) as f64;
                    let noise: f64 = StandardNormal.sample(rng);
                    let v = (1.0 + 2.0 * level + self.spread * noise).max(0.0);
                    format!("{v:.2}")
                }
            };
            fields.push(value);
        }
        let names = attack_names(cat);
        let label = names[i % names.len()];
        let difficulty = rng.random_range(0..=21u8);
        ConnectionRecord::from_fields(&fields, label, difficulty)
    }
}

fn pick(options: &[&str], preferred: usize, rng: &mut impl Rng) -> String {
    if rng.random::<f64>() < 0.8 {
        options[preferred % options.len()].to_string()
    } else {
        options[rng.random_range(0..options.len())].to_string()
    }
}

/// Class-separable synthetic records, `n_per_class` for each of the five
/// categories. Deterministic per seed.
pub fn make_fixture(n_per_class: usize, seed: u64) -> Result<LabeledDataset> {
    if n_per_class == 0 {
        return Err(IdsError::InvalidInput("n_per_class must be >= 1".into()));
    }
    FixtureSpec::balanced(n_per_class, seed).generate()
}
