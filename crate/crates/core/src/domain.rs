//! Domain tags and the hierarchy they live in.
//!
//! Every threat characteristic and example in the knowledge base is scoped to
//! one domain. Domains form a rooted tree (`General -> AI -> GenAI -> ...`);
//! filtering keeps the knowledge whose domain is an ancestor-or-self of the
//! queried domain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::json;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("malformed hierarchy: {0}")]
    Parse(String),
    #[error("invalid domain name {0:?}: expected letters, digits or underscore")]
    InvalidName(String),
    #[error("domain {node} has more than one parent")]
    Duplicate { node: String },
    #[error("domain {node} is part of a cycle")]
    Cycle { node: String },
    #[error("domain {node} is not reachable from root {root}")]
    Orphan { node: String, root: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown domain {0:?}")]
pub struct UnknownDomain(pub String);

/// Name of a node in a [`DomainHierarchy`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DomainId(String);

impl DomainId {
    pub fn new(name: impl Into<String>) -> Result<Self, HierarchyError> {
        let name = name.into();
        let valid = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if valid {
            Ok(DomainId(name))
        } else {
            Err(HierarchyError::InvalidName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for DomainId {
    type Error = HierarchyError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        DomainId::new(value)
    }
}

impl From<DomainId> for String {
    fn from(value: DomainId) -> Self {
        value.0
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for DomainId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for DomainId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[derive(Serialize, Deserialize)]
struct RawHierarchy {
    root: String,
    edges: Vec<(String, String)>,
}

/// Validated rooted tree of domains.
///
/// Immutable once built; `edges` keeps the declaration order so serialization
/// round-trips byte-for-byte on canonical inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainHierarchy {
    root: DomainId,
    parent: BTreeMap<DomainId, DomainId>,
    edges: Vec<(DomainId, DomainId)>,
}

impl DomainHierarchy {
    /// Parses and validates a hierarchy file (`{"root": .., "edges": [[parent, child], ..]}`).
    pub fn from_json(bytes: &[u8], strict: bool) -> Result<Self, HierarchyError> {
        let value =
            json::parse_object(bytes, strict, &["root", "edges"]).map_err(HierarchyError::Parse)?;
        let raw: RawHierarchy =
            serde_json::from_value(value).map_err(|e| HierarchyError::Parse(e.to_string()))?;
        let root = DomainId::new(raw.root)?;
        let edges = raw
            .edges
            .into_iter()
            .map(|(p, c)| Ok((DomainId::new(p)?, DomainId::new(c)?)))
            .collect::<Result<Vec<_>, HierarchyError>>()?;
        Self::from_edges(root, edges)
    }

    pub fn from_edges(
        root: DomainId,
        edges: Vec<(DomainId, DomainId)>,
    ) -> Result<Self, HierarchyError> {
        let mut parent = BTreeMap::new();
        for (p, c) in &edges {
            if p == c {
                return Err(HierarchyError::Cycle {
                    node: c.to_string(),
                });
            }
            if parent.insert(c.clone(), p.clone()).is_some() {
                return Err(HierarchyError::Duplicate {
                    node: c.to_string(),
                });
            }
        }

        let mut nodes: BTreeSet<&DomainId> = parent.keys().collect();
        nodes.extend(parent.values());
        nodes.insert(&root);

        // Every parent chain must end at the root without revisiting a node.
        for start in &nodes {
            let mut seen = BTreeSet::new();
            let mut cur = *start;
            seen.insert(cur);
            while let Some(p) = parent.get(cur) {
                if !seen.insert(p) {
                    return Err(HierarchyError::Cycle {
                        node: p.to_string(),
                    });
                }
                cur = p;
            }
            if *cur != root {
                return Err(HierarchyError::Orphan {
                    node: cur.to_string(),
                    root: root.to_string(),
                });
            }
        }

        Ok(DomainHierarchy {
            root,
            parent,
            edges,
        })
    }

    pub fn root(&self) -> &DomainId {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.parent.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, d: &DomainId) -> bool {
        *d == self.root || self.parent.contains_key(d)
    }

    /// Looks a domain up by name.
    pub fn get(&self, name: &str) -> Result<DomainId, UnknownDomain> {
        match DomainId::new(name) {
            Ok(d) if self.contains(&d) => Ok(d),
            _ => Err(UnknownDomain(name.to_string())),
        }
    }

    pub fn parent(&self, d: &DomainId) -> Option<&DomainId> {
        self.parent.get(d)
    }

    /// Nodes in declaration order: root first, then edge children.
    pub fn nodes(&self) -> impl Iterator<Item = &DomainId> {
        std::iter::once(&self.root).chain(self.edges.iter().map(|(_, c)| c))
    }

    pub fn edges(&self) -> &[(DomainId, DomainId)] {
        &self.edges
    }

    pub fn children<'a>(&'a self, d: &'a DomainId) -> impl Iterator<Item = &'a DomainId> + 'a {
        self.edges
            .iter()
            .filter(move |(p, _)| p == d)
            .map(|(_, c)| c)
    }

    /// Path from `d` up to the root, `d` first.
    pub fn ancestry<'a>(&'a self, d: &'a DomainId) -> impl Iterator<Item = &'a DomainId> + 'a {
        std::iter::successors(Some(d), move |cur| self.parent.get(*cur))
    }

    /// True iff `a` lies on the path from the root to `b`, inclusive.
    pub fn is_ancestor_or_self(&self, a: &DomainId, b: &DomainId) -> Result<bool, UnknownDomain> {
        for d in [a, b] {
            if !self.contains(d) {
                return Err(UnknownDomain(d.to_string()));
            }
        }
        Ok(self.ancestry(b).any(|x| x == a))
    }

    pub fn to_json(&self) -> String {
        let raw = RawHierarchy {
            root: self.root.to_string(),
            edges: self
                .edges
                .iter()
                .map(|(p, c)| (p.to_string(), c.to_string()))
                .collect(),
        };
        json::to_pretty(&raw)
    }
}
