use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{IdsError, Result};

/// Top-level traffic category. The four attack variants are indexed
/// DoS=0, Probe=1, R2L=2, U2R=3 in every four-class structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "normal")]
    Normal,
    DoS,
    Probe,
    R2L,
    U2R,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Normal,
        Category::DoS,
        Category::Probe,
        Category::R2L,
        Category::U2R,
    ];

    pub const ATTACKS: [Category; 4] = [Category::DoS, Category::Probe, Category::R2L, Category::U2R];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Normal => "normal",
            Category::DoS => "DoS",
            Category::Probe => "Probe",
            Category::R2L => "R2L",
            Category::U2R => "U2R",
        }
    }

    pub fn is_attack(self) -> bool {
        self != Category::Normal
    }

    /// Index in the four-class attack order, `None` for normal traffic.
    pub fn attack_index(self) -> Option<usize> {
        Category::ATTACKS.iter().position(|&c| c == self)
    }

    pub fn from_attack_index(index: usize) -> Option<Category> {
        Category::ATTACKS.get(index).copied()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = IdsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Category::Normal),
            "dos" => Ok(Category::DoS),
            "probe" => Ok(Category::Probe),
            "r2l" => Ok(Category::R2L),
            "u2r" => Ok(Category::U2R),
            other => Err(IdsError::InvalidInput(format!("unknown category '{other}'"))),
        }
    }
}

/// Binary stage-one label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryLabel {
    Normal,
    Attack,
}

impl BinaryLabel {
    pub const ALL: [BinaryLabel; 2] = [BinaryLabel::Normal, BinaryLabel::Attack];

    pub fn index(self) -> usize {
        match self {
            BinaryLabel::Normal => 0,
            BinaryLabel::Attack => 1,
        }
    }

    pub fn from_index(i: usize) -> BinaryLabel {
        if i == 0 {
            BinaryLabel::Normal
        } else {
            BinaryLabel::Attack
        }
    }
}

impl fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinaryLabel::Normal => "normal",
            BinaryLabel::Attack => "attack",
        })
    }
}

impl From<Category> for BinaryLabel {
    fn from(c: Category) -> Self {
        if c.is_attack() {
            BinaryLabel::Attack
        } else {
            BinaryLabel::Normal
        }
    }
}

/// Training-set attack census: (name, category, KDDTrain+ record count).
pub const TRAIN_ATTACK_CENSUS: [(&str, Category, usize); 22] = [
    ("satan", Category::Probe, 3633),
    ("portsweep", Category::Probe, 2931),
    ("nmap", Category::Probe, 1493),
    ("ipsweep", Category::Probe, 3599),
    ("spy", Category::R2L, 2),
    ("phf", Category::R2L, 4),
    ("multihop", Category::R2L, 7),
    ("imap", Category::R2L, 11),
    ("guess_passwd", Category::R2L, 53),
    ("ftp_write", Category::R2L, 8),
    ("warezmaster", Category::R2L, 20),
    ("warezclient", Category::R2L, 890),
    ("rootkit", Category::U2R, 10),
    ("perl", Category::U2R, 3),
    ("loadmodule", Category::U2R, 9),
    ("buffer_overflow", Category::U2R, 30),
    ("teardrop", Category::DoS, 892),
    ("smurf", Category::DoS, 2646),
    ("pod", Category::DoS, 201),
    ("neptune", Category::DoS, 41214),
    ("land", Category::DoS, 18),
    ("back", Category::DoS, 956),
];

const EXTENDED_TAXONOMY: &str = include_str!("../../data/taxonomy.csv");

/// Attack-name to category mapping. Lookups of names outside the mapping
/// fail rather than being bucketed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackTaxonomy {
    mapping: BTreeMap<String, Category>,
}

impl AttackTaxonomy {
    /// The 22 training attacks plus `normal`.
    pub fn training() -> Self {
        let mut mapping: BTreeMap<String, Category> = TRAIN_ATTACK_CENSUS
            .iter()
            .map(|&(n, c, _)| (n.to_string(), c))
            .collect();
        mapping.insert("normal".to_string(), Category::Normal);
        AttackTaxonomy { mapping }
    }

    /// Training attacks plus the test-only attack names of KDDTest+.
    pub fn extended() -> Self {
        Self::parse(EXTENDED_TAXONOMY, "<builtin taxonomy>").expect("builtin taxonomy is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IdsError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `name,category` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut mapping = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| IdsError::Parse {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (name, cat) = line
                .split_once(',')
                .ok_or_else(|| parse_err("expected `name,category`".into()))?;
            let cat: Category = cat.parse().map_err(|e: IdsError| parse_err(e.to_string()))?;
            let name = name.trim().to_string();
            if let Some(prev) = mapping.insert(name.clone(), cat) {
                if prev != cat {
                    return Err(parse_err(format!("'{name}' mapped to both {prev} and {cat}")));
                }
            }
        }
        if mapping.is_empty() {
            return Err(IdsError::InvalidInput(format!("{origin}: empty taxonomy")));
        }
        Ok(AttackTaxonomy { mapping })
    }

    pub fn categorize(&self, label: &str) -> Result<Category> {
        self.mapping
            .get(label)
            .copied()
            .ok_or_else(|| IdsError::UnknownLabel(vec![label.to_string()]))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.mapping.contains_key(label)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.mapping.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }
}

impl Default for AttackTaxonomy {
    fn default() -> Self {
        Self::extended()
    }
}
