//! Attack categories and the bundled label map.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Traffic class. Declaration order is the enumeration order used for
/// tie-breaking votes: NORMAL < DOS < PROBE < R2L < U2R.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "UPPERCASE")]
pub enum AttackClass {
    Normal,
    Dos,
    Probe,
    R2l,
    U2r,
}

impl AttackClass {
    pub const ALL: [AttackClass; 5] = [
        AttackClass::Normal,
        AttackClass::Dos,
        AttackClass::Probe,
        AttackClass::R2l,
        AttackClass::U2r,
    ];

    pub const ATTACKS: [AttackClass; 4] = [
        AttackClass::Dos,
        AttackClass::Probe,
        AttackClass::R2l,
        AttackClass::U2r,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AttackClass::Normal => "NORMAL",
            AttackClass::Dos => "DOS",
            AttackClass::Probe => "PROBE",
            AttackClass::R2l => "R2L",
            AttackClass::U2r => "U2R",
        }
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NORMAL" => Ok(AttackClass::Normal),
            "DOS" => Ok(AttackClass::Dos),
            "PROBE" => Ok(AttackClass::Probe),
            "R2L" => Ok(AttackClass::R2l),
            "U2R" => Ok(AttackClass::U2r),
            _ => Err(Error::Config(format!(
                "unknown class `{s}` (expected NORMAL, DOS, PROBE, R2L or U2R)"
            ))),
        }
    }
}

const BUNDLED_MAP: &str = include_str!("../../data/attack_classes.csv");

/// Raw attack name to category map.
#[derive(Debug, Clone)]
pub struct LabelMap {
    version: u32,
    entries: HashMap<String, AttackClass>,
}

impl LabelMap {
    /// The bundled map covering every label in the training and test files.
    pub fn bundled() -> &'static LabelMap {
        static MAP: OnceLock<LabelMap> = OnceLock::new();
        MAP.get_or_init(|| LabelMap::parse(BUNDLED_MAP).expect("bundled label map is valid"))
    }

    /// Parses `name,CLASS` lines; `#` lines are comments, `# version,N` sets
    /// the version.
    pub fn parse(text: &str) -> Result<Self> {
        let mut version = 0;
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version,") {
                    version = v.trim().parse().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("bad version `{v}`"),
                    })?;
                }
                continue;
            }
            let (name, class) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected `name,CLASS`".into(),
            })?;
            let class: AttackClass = class.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("unknown class `{class}`"),
            })?;
            if entries.insert(name.trim().to_string(), class).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate label `{name}`"),
                });
            }
        }
        Ok(Self { version, entries })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Maps a label, ignoring one trailing period.
    pub fn map(&self, raw_label: &str) -> Result<AttackClass> {
        let label = raw_label.strip_suffix('.').unwrap_or(raw_label);
        self.entries
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, AttackClass)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Maps a raw KDD label with the bundled map.
pub fn map_attack_label(raw_label: &str) -> Result<AttackClass> {
    LabelMap::bundled().map(raw_label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_examples() {
        assert_eq!(map_attack_label("normal").unwrap(), AttackClass::Normal);
        assert_eq!(map_attack_label("smurf").unwrap(), AttackClass::Dos);
        assert_eq!(map_attack_label("satan").unwrap(), AttackClass::Probe);
        assert_eq!(map_attack_label("guess_passwd").unwrap(), AttackClass::R2l);
        assert_eq!(map_attack_label("buffer_overflow").unwrap(), AttackClass::U2r);
        assert_eq!(map_attack_label("mscan").unwrap(), AttackClass::Probe);
        assert_eq!(map_attack_label("smurf.").unwrap(), AttackClass::Dos);
    }

    #[test]
    fn unknown_label_is_an_error() {
        let err = map_attack_label("teleport").unwrap_err();
        assert!(err.to_string().contains("teleport"));
    }

    #[test]
    fn bundled_map_covers_train_and_test_names() {
        let map = LabelMap::bundled();
        assert_eq!(map.version(), 1);
        // normal + 22 training attacks + 17 test-only attacks
        assert_eq!(map.len(), 40);
        let u2r: Vec<_> = map.names().filter(|(_, c)| *c == AttackClass::U2r).collect();
        assert_eq!(u2r.len(), 7);
    }

    #[test]
    fn class_order_and_parse() {
        assert!(AttackClass::Normal < AttackClass::Dos);
        assert!(AttackClass::R2l < AttackClass::U2r);
        assert_eq!("r2l".parse::<AttackClass>().unwrap(), AttackClass::R2l);
        assert_eq!(
            serde_json::to_string(&AttackClass::U2r).unwrap(),
            "\"U2R\""
        );
    }
}
