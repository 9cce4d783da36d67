use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid threat id {id:?}: {reason}")]
pub struct IdError {
    pub id: String,
    pub reason: &'static str,
}

/// The seven LINDDUN threat types, in acronym order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ThreatCode {
    L,
    I,
    Nr,
    D,
    DD,
    U,
    Nc,
}

impl ThreatCode {
    pub const ALL: [ThreatCode; 7] = [
        ThreatCode::L,
        ThreatCode::I,
        ThreatCode::Nr,
        ThreatCode::D,
        ThreatCode::DD,
        ThreatCode::U,
        ThreatCode::Nc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ThreatCode::L => "L",
            ThreatCode::I => "I",
            ThreatCode::Nr => "Nr",
            ThreatCode::D => "D",
            ThreatCode::DD => "DD",
            ThreatCode::U => "U",
            ThreatCode::Nc => "Nc",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Standard LINDDUN name of the type.
    pub fn name(self) -> &'static str {
        match self {
            ThreatCode::L => "Linking",
            ThreatCode::I => "Identifying",
            ThreatCode::Nr => "Non-repudiation",
            ThreatCode::D => "Detecting",
            ThreatCode::DD => "Data Disclosure",
            ThreatCode::U => "Unawareness and Unintervenability",
            ThreatCode::Nc => "Non-compliance",
        }
    }
}

impl fmt::Display for ThreatCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ThreatCode {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ThreatCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| IdError {
                id: s.to_string(),
                reason: "unknown threat type code",
            })
    }
}

/// Dotted characteristic id such as `DD.1.3`: a type code followed by one or
/// more positive integer segments.
///
/// Ordering is by type (acronym order) then numerically by segment, so
/// `DD.1.2 < DD.1.10 < DD.2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CharacteristicId {
    code: ThreatCode,
    segments: Vec<u32>,
}

impl CharacteristicId {
    pub fn code(&self) -> ThreatCode {
        self.code
    }

    pub fn segments(&self) -> &[u32] {
        &self.segments
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    /// Parent in the characteristic forest; `None` for single-segment ids,
    /// whose parent is the (virtual) type root.
    pub fn parent(&self) -> Option<CharacteristicId> {
        (self.segments.len() > 1).then(|| CharacteristicId {
            code: self.code,
            segments: self.segments[..self.segments.len() - 1].to_vec(),
        })
    }

    pub fn is_descendant_of(&self, other: &CharacteristicId) -> bool {
        self.code == other.code
            && self.segments.len() > other.segments.len()
            && self.segments.starts_with(&other.segments)
    }
}

impl FromStr for CharacteristicId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| IdError {
            id: s.to_string(),
            reason,
        };
        let mut parts = s.split('.');
        let code: ThreatCode = parts
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| err("unknown threat type code"))?;
        let segments = parts
            .map(|p| {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) || p.starts_with('0') {
                    return Err(err("segments must be positive integers"));
                }
                p.parse::<u32>().map_err(|_| err("segment out of range"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if segments.is_empty() {
            return Err(err("at least one numeric segment is required"));
        }
        Ok(CharacteristicId { code, segments })
    }
}

impl TryFrom<String> for CharacteristicId {
    type Error = IdError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<CharacteristicId> for String {
    fn from(value: CharacteristicId) -> Self {
        value.to_string()
    }
}

impl fmt::Display for CharacteristicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code.as_str())?;
        for s in &self.segments {
            write!(f, ".{s}")?;
        }
        Ok(())
    }
}

impl Ord for CharacteristicId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.code
            .cmp(&other.code)
            .then_with(|| self.segments.cmp(&other.segments))
    }
}

impl PartialOrd for CharacteristicId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
