//! Feature metadata for KDD'99 connection records.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of features in a KDD'99 connection record.
pub const KDD_FEATURE_COUNT: usize = 41;

/// 1-based feature index, always within `1..=41`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FeatureId(u8);

impl FeatureId {
    pub fn new(index: usize) -> Result<Self> {
        if (1..=KDD_FEATURE_COUNT).contains(&index) {
            Ok(Self(index as u8))
        } else {
            Err(Error::InvalidFeature(index))
        }
    }

    /// Feature from a 0-based column position.
    pub fn from_column(column: usize) -> Result<Self> {
        Self::new(column + 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn column(self) -> usize {
        self.0 as usize - 1
    }
}

impl TryFrom<u8> for FeatureId {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Self::new(v as usize)
    }
}

impl From<FeatureId> for u8 {
    fn from(f: FeatureId) -> u8 {
        f.0
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Symbolic,
    Binary,
}

impl FeatureKind {
    pub fn is_symbolic(self) -> bool {
        matches!(self, FeatureKind::Symbolic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Basic,
    Content,
    TimeTraffic,
    HostTraffic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub id: FeatureId,
    pub name: String,
    pub kind: FeatureKind,
    pub group: FeatureGroup,
}

/// Ordered feature table. The KDD table has 41 entries; synthetic tables used
/// in tests may carry fewer, always numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    features: Vec<FeatureMeta>,
}

const KDD_FEATURES: [(&str, FeatureKind, FeatureGroup); KDD_FEATURE_COUNT] = {
    use FeatureGroup::*;
    use FeatureKind::*;
    [
        ("duration", Continuous, Basic),
        ("protocol_type", Symbolic, Basic),
        ("service", Symbolic, Basic),
        ("flag", Symbolic, Basic),
        ("src_bytes", Continuous, Basic),
        ("dst_bytes", Continuous, Basic),
        ("land", Binary, Basic),
        ("wrong_fragment", Continuous, Basic),
        ("urgent", Continuous, Basic),
        ("hot", Continuous, Content),
        ("num_failed_logins", Continuous, Content),
        ("logged_in", Binary, Content),
        ("num_compromised", Continuous, Content),
        ("root_shell", Continuous, Content),
        ("su_attempted", Continuous, Content),
        ("num_root", Continuous, Content),
        ("num_file_creations", Continuous, Content),
        ("num_shells", Continuous, Content),
        ("num_access_files", Continuous, Content),
        ("num_outbound_cmds", Continuous, Content),
        ("is_host_login", Binary, Content),
        ("is_guest_login", Binary, Content),
        ("count", Continuous, TimeTraffic),
        ("srv_count", Continuous, TimeTraffic),
        ("serror_rate", Continuous, TimeTraffic),
        ("srv_serror_rate", Continuous, TimeTraffic),
        ("rerror_rate", Continuous, TimeTraffic),
        ("srv_rerror_rate", Continuous, TimeTraffic),
        ("same_srv_rate", Continuous, TimeTraffic),
        ("diff_srv_rate", Continuous, TimeTraffic),
        ("srv_diff_host_rate", Continuous, TimeTraffic),
        ("dst_host_count", Continuous, HostTraffic),
        ("dst_host_srv_count", Continuous, HostTraffic),
        ("dst_host_same_srv_rate", Continuous, HostTraffic),
        ("dst_host_diff_srv_rate", Continuous, HostTraffic),
        ("dst_host_same_src_port_rate", Continuous, HostTraffic),
        ("dst_host_srv_diff_host_rate", Continuous, HostTraffic),
        ("dst_host_serror_rate", Continuous, HostTraffic),
        ("dst_host_srv_serror_rate", Continuous, HostTraffic),
        ("dst_host_rerror_rate", Continuous, HostTraffic),
        ("dst_host_srv_rerror_rate", Continuous, HostTraffic),
    ]
};

impl Schema {
    /// The bundled 41-feature KDD'99 table.
    pub fn kdd() -> Self {
        let features = KDD_FEATURES
            .iter()
            .enumerate()
            .map(|(i, &(name, kind, group))| FeatureMeta {
                id: FeatureId(i as u8 + 1),
                name: name.to_string(),
                kind,
                group,
            })
            .collect();
        Self { features }
    }

    /// A custom table; ids are assigned 1..=n in order.
    pub fn custom(entries: Vec<(String, FeatureKind)>) -> Result<Self> {
        if entries.is_empty() || entries.len() > KDD_FEATURE_COUNT {
            return Err(Error::Schema(format!(
                "a schema needs 1..={KDD_FEATURE_COUNT} features, got {}",
                entries.len()
            )));
        }
        let features = entries
            .into_iter()
            .enumerate()
            .map(|(i, (name, kind))| FeatureMeta {
                id: FeatureId(i as u8 + 1),
                name,
                kind,
                group: FeatureGroup::Basic,
            })
            .collect();
        Ok(Self { features })
    }

    /// `n` continuous features named `f1..fn`.
    pub fn numeric(n: usize) -> Result<Self> {
        Self::custom(
            (1..=n)
                .map(|i| (format!("f{i}"), FeatureKind::Continuous))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn get(&self, id: FeatureId) -> Option<&FeatureMeta> {
        self.features.get(id.column())
    }

    pub fn ids(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.features.iter().map(|m| m.id)
    }

    pub fn contains(&self, id: FeatureId) -> bool {
        id.column() < self.features.len()
    }
}
