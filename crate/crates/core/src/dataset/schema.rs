use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Categorical,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Basic,
    Content,
    Traffic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub index: usize,
    pub name: &'static str,
    pub kind: FeatureKind,
    pub group: FeatureGroup,
}

use FeatureGroup::*;
use FeatureKind::*;

macro_rules! feature {
    ($idx:expr, $name:expr, $kind:expr, $group:expr) => {
        FeatureSpec {
            index: $idx,
            name: $name,
            kind: $kind,
            group: $group,
        }
    };
}

/// Column order of the NSL-KDD text files (0-based here; the usual
/// 1-based numbering puts `num_outbound_cmds` at 20 and `is_host_login`
/// at 21).
pub static FEATURES: [FeatureSpec; 41] = [
    feature!(0, "duration", Continuous, Basic),
    feature!(1, "protocol_type", Categorical, Basic),
    feature!(2, "service", Categorical, Basic),
    feature!(3, "flag", Categorical, Basic),
    feature!(4, "src_bytes", Continuous, Basic),
    feature!(5, "dst_bytes", Continuous, Basic),
    feature!(6, "land", Binary, Basic),
    feature!(7, "wrong_fragment", Continuous, Basic),
    feature!(8, "urgent", Continuous, Basic),
    feature!(9, "hot", Continuous, Content),
    feature!(10, "num_failed_logins", Continuous, Content),
    feature!(11, "logged_in", Binary, Content),
    feature!(12, "num_compromised", Continuous, Content),
    feature!(13, "root_shell", Binary, Content),
    feature!(14, "su_attempted", Continuous, Content),
    feature!(15, "num_root", Continuous, Content),
    feature!(16, "num_file_creations", Continuous, Content),
    feature!(17, "num_shells", Continuous, Content),
    feature!(18, "num_access_files", Continuous, Content),
    feature!(19, "num_outbound_cmds", Continuous, Content),
    feature!(20, "is_host_login", Binary, Content),
    feature!(21, "is_guest_login", Binary, Content),
    feature!(22, "count", Continuous, Traffic),
    feature!(23, "srv_count", Continuous, Traffic),
    feature!(24, "serror_rate", Continuous, Traffic),
    feature!(25, "srv_serror_rate", Continuous, Traffic),
    feature!(26, "rerror_rate", Continuous, Traffic),
    feature!(27, "srv_rerror_rate", Continuous, Traffic),
    feature!(28, "same_srv_rate", Continuous, Traffic),
    feature!(29, "diff_srv_rate", Continuous, Traffic),
    feature!(30, "srv_diff_host_rate", Continuous, Traffic),
    feature!(31, "dst_host_count", Continuous, Traffic),
    feature!(32, "dst_host_srv_count", Continuous, Traffic),
    feature!(33, "dst_host_same_srv_rate", Continuous, Traffic),
    feature!(34, "dst_host_diff_srv_rate", Continuous, Traffic),
    feature!(35, "dst_host_same_src_port_rate", Continuous, Traffic),
    feature!(36, "dst_host_srv_diff_host_rate", Continuous, Traffic),
    feature!(37, "dst_host_serror_rate", Continuous, Traffic),
    feature!(38, "dst_host_srv_serror_rate", Continuous, Traffic),
    feature!(39, "dst_host_rerror_rate", Continuous, Traffic),
    feature!(40, "dst_host_srv_rerror_rate", Continuous, Traffic),
];

pub const N_FEATURES: usize = 41;

/// Indices of the three categorical columns.
pub const CATEGORICAL: [usize; 3] = [1, 2, 3];

/// The 41-column NSL-KDD feature schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSchema;

impl FeatureSchema {
    pub fn entries(&self) -> &'static [FeatureSpec] {
        &FEATURES
    }

    pub fn len(&self) -> usize {
        FEATURES.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> Vec<&'static str> {
        FEATURES.iter().map(|f| f.name).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        FEATURES.iter().position(|f| f.name == name)
    }

    pub fn is_categorical(&self, index: usize) -> bool {
        FEATURES[index].kind == FeatureKind::Categorical
    }

    pub fn group_count(&self, group: FeatureGroup) -> usize {
        FEATURES.iter().filter(|f| f.group == group).count()
    }
}
