//! Gesture vocabulary: names, default stroke durations, permitted hands,
//! categories and baseline geometry.
//!
//! The catalog file is line oriented:
//!
//! ```text
//! # name, duration_s, hands, category, expanse_cm, height_cm, outwardness_cm
//! # catalog-version: fixture-1
//! Cup, 0.46, any, metaphoric, 25, 0, 20
//! ```
//!
//! `#` starts a comment and blank lines are ignored. A comment of the form
//! `# catalog-version: <v>` sets the catalog version.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::Millis;

/// Hand use of a single gesture occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hand {
    #[serde(rename = "LH")]
    Left,
    #[serde(rename = "RH")]
    Right,
    #[serde(rename = "2H")]
    Both,
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hand::Left => "LH",
            Hand::Right => "RH",
            Hand::Both => "2H",
        })
    }
}

impl FromStr for Hand {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "LH" => Ok(Hand::Left),
            "RH" => Ok(Hand::Right),
            "2H" => Ok(Hand::Both),
            _ => Err(()),
        }
    }
}

/// Hand configurations a catalog entry admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HandUsage {
    Only(Hand),
    Any,
}

impl HandUsage {
    pub fn permits(self, hand: Hand) -> bool {
        match self {
            HandUsage::Any => true,
            HandUsage::Only(h) => h == hand,
        }
    }
}

impl fmt::Display for HandUsage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HandUsage::Any => f.write_str("any"),
            HandUsage::Only(h) => h.fmt(f),
        }
    }
}

impl FromStr for HandUsage {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        if s == "any" {
            Ok(HandUsage::Any)
        } else {
            s.parse().map(HandUsage::Only)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Metaphoric,
    Iconic,
    Deictic,
    Beat,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Metaphoric => "metaphoric",
            Category::Iconic => "iconic",
            Category::Deictic => "deictic",
            Category::Beat => "beat",
        })
    }
}

impl FromStr for Category {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "metaphoric" => Ok(Category::Metaphoric),
            "iconic" => Ok(Category::Iconic),
            "deictic" => Ok(Category::Deictic),
            "beat" => Ok(Category::Beat),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureDef {
    pub name: String,
    pub default_stroke_duration: Millis,
    pub hands: HandUsage,
    pub category: Category,
    /// Distance from body center, cm.
    pub base_expanse: f64,
    /// Height above the waist reference, cm.
    pub base_height: f64,
    /// Distance forward of the torso plane, cm.
    pub base_outwardness: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("catalog is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate gesture `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: gesture `{name}` needs a positive stroke duration")]
    BadDuration { line: usize, name: String },
    #[error("line {line}: unknown category `{value}`")]
    BadCategory { line: usize, value: String },
    #[error("line {line}: unknown hand configuration `{value}`")]
    BadHands { line: usize, value: String },
    #[error("line {line}: gesture `{name}` has invalid geometry")]
    BadGeometry { line: usize, name: String },
    #[error("unknown gesture `{0}`")]
    NotFound(String),
    #[error("gesture `{name}` cannot be performed with {hand}")]
    HandNotPermitted { name: String, hand: Hand },
}

const VERSION_TAG: &str = "catalog-version:";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureCatalog {
    pub entries: BTreeMap<String, GestureDef>,
    pub version: String,
}

impl GestureCatalog {
    pub fn lookup(&self, name: &str) -> Result<&GestureDef, CatalogError> {
        self.entries
            .get(name)
            .ok_or_else(|| CatalogError::NotFound(name.to_string()))
    }

    /// Looks up `name` and checks that the entry admits `hand`.
    pub fn lookup_for(&self, name: &str, hand: Hand) -> Result<&GestureDef, CatalogError> {
        let def = self.lookup(name)?;
        if def.hands.permits(hand) {
            Ok(def)
        } else {
            Err(CatalogError::HandNotPermitted {
                name: name.to_string(),
                hand,
            })
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical text form; `load_catalog` of the result yields `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# name, duration_s, hands, category, expanse_cm, height_cm, outwardness_cm\n");
        out.push_str(&format!("# {VERSION_TAG} {}\n", self.version));
        for def in self.entries.values() {
            out.push_str(&format!(
                "{}, {}, {}, {}, {}, {}, {}\n",
                def.name,
                def.default_stroke_duration.to_compact_secs(),
                def.hands,
                def.category,
                def.base_expanse,
                def.base_height,
                def.base_outwardness,
            ));
        }
        out
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn load_catalog(source: &str) -> Result<GestureCatalog, CatalogError> {
    let mut entries = BTreeMap::new();
    let mut version = String::from("unversioned");

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix(VERSION_TAG) {
                version = v.trim().to_string();
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }

        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(CatalogError::Format {
                line,
                message: format!("expected 7 comma-separated fields, found {}", fields.len()),
            });
        }
        let name = fields[0];
        if !is_identifier(name) {
            return Err(CatalogError::Format {
                line,
                message: format!("`{name}` is not a gesture identifier"),
            });
        }
        let duration = fields[1].strip_suffix('s').unwrap_or(fields[1]);
        let duration = match Millis::parse_secs(duration) {
            Some(d) if d > Millis::ZERO => d,
            _ => {
                return Err(CatalogError::BadDuration {
                    line,
                    name: name.to_string(),
                })
            }
        };
        let hands = fields[2].parse().map_err(|_| CatalogError::BadHands {
            line,
            value: fields[2].to_string(),
        })?;
        let category = fields[3].parse().map_err(|_| CatalogError::BadCategory {
            line,
            value: fields[3].to_string(),
        })?;
        let geometry: Vec<f64> = fields[4..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CatalogError::BadGeometry {
                line,
                name: name.to_string(),
            })?;
        if geometry.iter().any(|g| !g.is_finite()) || geometry[0] < 0.0 {
            return Err(CatalogError::BadGeometry {
                line,
                name: name.to_string(),
            });
        }

        let def = GestureDef {
            name: name.to_string(),
            default_stroke_duration: duration,
            hands,
            category,
            base_expanse: geometry[0],
            base_height: geometry[1],
            base_outwardness: geometry[2],
        };
        if entries.insert(name.to_string(), def).is_some() {
            return Err(CatalogError::Duplicate {
                line,
                name: name.to_string(),
            });
        }
    }

    if entries.is_empty() {
        return Err(CatalogError::Empty);
    }
    Ok(GestureCatalog { entries, version })
}

/// The catalog shipped with the story fixtures.
pub const FIXTURE_CATALOG: &str = include_str!("../../../data/catalog.txt");

pub fn fixture_catalog() -> GestureCatalog {
    load_catalog(FIXTURE_CATALOG).expect("shipped catalog is valid")
}
