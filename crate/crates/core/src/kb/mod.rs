//! LINDDUN threat knowledge base: threat types, the characteristic forest,
//! domain-tagged examples, and domain-filtered views.

mod id;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use id::{CharacteristicId, IdError, ThreatCode};

use crate::domain::{DomainHierarchy, DomainId, UnknownDomain};
use crate::json;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("malformed knowledge base: {0}")]
    Parse(String),
    #[error(transparent)]
    Id(#[from] IdError),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("threat types: {0}")]
    Types(String),
    #[error("{from} references missing characteristic {missing}")]
    Reference { from: String, missing: String },
    #[error("{item} is tagged with unknown domain {domain:?}")]
    Domain { item: String, domain: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatType {
    pub code: ThreatCode,
    pub name: String,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Characteristic {
    pub id: CharacteristicId,
    pub title: String,
    pub description: String,
    /// Untagged characteristics take the hierarchy root.
    pub domain: DomainId,
    /// Retained by a filter only to keep the tree connected.
    pub structural: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatExample {
    pub id: String,
    pub characteristic_id: CharacteristicId,
    pub text: String,
    pub domain: DomainId,
}

#[derive(Serialize, Deserialize)]
struct RawCharacteristic {
    id: String,
    title: String,
    description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    structural: bool,
}

#[derive(Serialize, Deserialize)]
struct RawExample {
    id: String,
    characteristic_id: String,
    text: String,
    domain: String,
}

#[derive(Serialize, Deserialize)]
struct RawKb {
    types: Vec<ThreatType>,
    characteristics: Vec<RawCharacteristic>,
    examples: Vec<RawExample>,
}

/// A validated knowledge base. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    hierarchy: DomainHierarchy,
    types: [ThreatType; 7],
    characteristics: BTreeMap<CharacteristicId, Characteristic>,
    examples: BTreeMap<String, ThreatExample>,
}

impl KnowledgeBase {
    /// Parses a KB file against `hierarchy` and enforces every structural
    /// invariant: seven types, id grammar, unique ids, resolvable parents and
    /// example targets, and known domain tags.
    pub fn from_json(
        bytes: &[u8],
        hierarchy: DomainHierarchy,
        strict: bool,
    ) -> Result<Self, KbError> {
        let value = json::parse_object(bytes, strict, &["types", "characteristics", "examples"])
            .map_err(KbError::Parse)?;
        let raw: RawKb =
            serde_json::from_value(value).map_err(|e| KbError::Parse(e.to_string()))?;

        let types = validate_types(raw.types)?;

        let domain_of = |item: &str, tag: Option<String>| -> Result<DomainId, KbError> {
            match tag {
                None => Ok(hierarchy.root().clone()),
                Some(tag) => hierarchy.get(&tag).map_err(|_| KbError::Domain {
                    item: item.to_string(),
                    domain: tag,
                }),
            }
        };

        let mut characteristics = BTreeMap::new();
        for rc in raw.characteristics {
            let id: CharacteristicId = rc.id.parse()?;
            let domain = domain_of(&rc.id, rc.domain)?;
            let c = Characteristic {
                id: id.clone(),
                title: rc.title,
                description: rc.description,
                domain,
                structural: rc.structural,
            };
            if characteristics.insert(id, c).is_some() {
                return Err(KbError::DuplicateId(rc.id));
            }
        }
        for id in characteristics.keys() {
            if let Some(parent) = id.parent() {
                if !characteristics.contains_key(&parent) {
                    return Err(KbError::Reference {
                        from: id.to_string(),
                        missing: parent.to_string(),
                    });
                }
            }
        }

        let mut examples = BTreeMap::new();
        for re in raw.examples {
            let characteristic_id: CharacteristicId = re.characteristic_id.parse()?;
            if !characteristics.contains_key(&characteristic_id) {
                return Err(KbError::Reference {
                    from: re.id,
                    missing: characteristic_id.to_string(),
                });
            }
            let domain = domain_of(&re.id, Some(re.domain))?;
            let ex = ThreatExample {
                id: re.id.clone(),
                characteristic_id,
                text: re.text,
                domain,
            };
            if examples.insert(re.id.clone(), ex).is_some() {
                return Err(KbError::DuplicateId(re.id));
            }
        }

        Ok(KnowledgeBase {
            hierarchy,
            types,
            characteristics,
            examples,
        })
    }

    /// A KB with the given types and no characteristics or examples.
    pub fn empty(hierarchy: DomainHierarchy, types: Vec<ThreatType>) -> Result<Self, KbError> {
        Ok(KnowledgeBase {
            hierarchy,
            types: validate_types(types)?,
            characteristics: BTreeMap::new(),
            examples: BTreeMap::new(),
        })
    }

    pub fn hierarchy(&self) -> &DomainHierarchy {
        &self.hierarchy
    }

    /// Threat types in acronym order.
    pub fn types(&self) -> &[ThreatType; 7] {
        &self.types
    }

    pub fn threat_type(&self, code: ThreatCode) -> &ThreatType {
        &self.types[code.index()]
    }

    /// All characteristics in canonical id order.
    pub fn characteristics(&self) -> impl Iterator<Item = &Characteristic> {
        self.characteristics.values()
    }

    pub fn characteristics_of(&self, code: ThreatCode) -> impl Iterator<Item = &Characteristic> {
        self.characteristics
            .values()
            .filter(move |c| c.id.code() == code)
    }

    pub fn len(&self) -> usize {
        self.characteristics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characteristics.is_empty()
    }

    /// Examples in id order.
    pub fn examples(&self) -> impl Iterator<Item = &ThreatExample> {
        self.examples.values()
    }

    pub fn examples_for<'a>(
        &'a self,
        id: &'a CharacteristicId,
    ) -> impl Iterator<Item = &'a ThreatExample> + 'a {
        self.examples
            .values()
            .filter(move |e| &e.characteristic_id == id)
    }

    pub fn get(&self, id: &CharacteristicId) -> Option<&Characteristic> {
        self.characteristics.get(id)
    }

    /// Exact-match lookup by textual id. A well-formed id that is not present
    /// yields `Ok(None)`.
    pub fn lookup(&self, id: &str) -> Result<Option<&Characteristic>, IdError> {
        let id: CharacteristicId = id.parse()?;
        Ok(self.characteristics.get(&id))
    }

    /// Direct children of `id`, or the forest roots of its type when `id`
    /// is `None`.
    pub fn children<'a>(
        &'a self,
        code: ThreatCode,
        id: Option<&'a CharacteristicId>,
    ) -> impl Iterator<Item = &'a Characteristic> + 'a {
        self.characteristics_of(code)
            .filter(move |c| c.id.parent().as_ref() == id)
    }

    pub fn is_leaf(&self, id: &CharacteristicId) -> bool {
        // Descendants sort immediately after their ancestor.
        self.characteristics
            .range(id.clone()..)
            .nth(1)
            .is_none_or(|(next, _)| !next.is_descendant_of(id))
    }

    /// Leaf characteristics of one type, in id order.
    pub fn leaves(&self, code: ThreatCode) -> impl Iterator<Item = &Characteristic> {
        self.characteristics_of(code)
            .filter(|c| self.is_leaf(&c.id))
    }

    /// Domain-specific view for `query`: keeps characteristics and examples
    /// whose domain is an ancestor-or-self of `query`. Ancestors of kept
    /// characteristics are retained as well, flagged `structural` when their
    /// own tag would have excluded them. Examples whose characteristic did not
    /// survive are dropped.
    pub fn filter(&self, query: &DomainId) -> Result<KnowledgeBase, UnknownDomain> {
        if !self.hierarchy.contains(query) {
            return Err(UnknownDomain(query.to_string()));
        }
        let relevant: BTreeSet<&DomainId> = self.hierarchy.ancestry(query).collect();

        let mut keep: BTreeMap<CharacteristicId, bool> = BTreeMap::new();
        for c in self.characteristics.values() {
            if relevant.contains(&c.domain) {
                keep.insert(c.id.clone(), false);
                let mut up = c.id.parent();
                while let Some(p) = up {
                    let own = relevant.contains(&self.characteristics[&p].domain);
                    keep.entry(p.clone()).or_insert(!own);
                    up = p.parent();
                }
            }
        }

        let characteristics = keep
            .into_iter()
            .map(|(id, structural)| {
                let mut c = self.characteristics[&id].clone();
                c.structural = structural;
                (id, c)
            })
            .collect::<BTreeMap<_, _>>();
        let examples = self
            .examples
            .iter()
            .filter(|(_, e)| {
                relevant.contains(&e.domain) && characteristics.contains_key(&e.characteristic_id)
            })
            .map(|(k, e)| (k.clone(), e.clone()))
            .collect();

        Ok(KnowledgeBase {
            hierarchy: self.hierarchy.clone(),
            types: self.types.clone(),
            characteristics,
            examples,
        })
    }

    /// Canonical serialization: types in acronym order, characteristics in
    /// numeric id order, examples by id. Root-domain tags are omitted.
    pub fn to_json(&self) -> String {
        let root = self.hierarchy.root();
        let raw = RawKb {
            types: self.types.to_vec(),
            characteristics: self
                .characteristics
                .values()
                .map(|c| RawCharacteristic {
                    id: c.id.to_string(),
                    title: c.title.clone(),
                    description: c.description.clone(),
                    domain: (&c.domain != root).then(|| c.domain.to_string()),
                    structural: c.structural,
                })
                .collect(),
            examples: self
                .examples
                .values()
                .map(|e| RawExample {
                    id: e.id.clone(),
                    characteristic_id: e.characteristic_id.to_string(),
                    text: e.text.clone(),
                    domain: e.domain.to_string(),
                })
                .collect(),
        };
        json::to_pretty(&raw)
    }
}

fn validate_types(types: Vec<ThreatType>) -> Result<[ThreatType; 7], KbError> {
    if types.len() != 7 {
        return Err(KbError::Types(format!(
            "expected 7 threat types, found {}",
            types.len()
        )));
    }
    let mut slots: [Option<ThreatType>; 7] = Default::default();
    for t in types {
        let slot = &mut slots[t.code.index()];
        if slot.is_some() {
            return Err(KbError::Types(format!(
                "threat type {} declared twice",
                t.code
            )));
        }
        *slot = Some(t);
    }
    Ok(slots.map(|t| t.expect("seven distinct codes fill every slot")))
}
