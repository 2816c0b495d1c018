//! The ordered class set and its pixel encoding.
//!
//! Every class owns one bit of the 24-bit `0xRRGGBB` pixel value. A registry
//! may also carry an ignore mask: bits that are cleared before decoding, such
//! as the boundary flag of the DIVA-HisDB ground truth.
//!
//! Registries can be loaded from a TOML file:
//!
//! ```toml
//! ignore_mask = 0x800000
//!
//! [[class]]
//! name = "background"
//! bit = 0x000001
//! background = true
//!
//! [[class]]
//! name = "main-text"
//! bit = 0x000008
//! ```
//!
//! Class order in the file is the column order of every report.

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Bits a pixel value may use.
pub const PIXEL_VALUE_MASK: u32 = 0x00FF_FFFF;

/// Upper bound on |C|: one class per pixel bit.
pub const MAX_CLASSES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassLabel {
    index: usize,
    encoding_bit: u32,
    name: String,
    is_background: bool,
}

impl ClassLabel {
    /// Position of the class in its registry.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn encoding_bit(&self) -> u32 {
        self.encoding_bit
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_background(&self) -> bool {
        self.is_background
    }
}

/// A class as supplied to [`ClassRegistry::new`].
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    pub bit: u32,
    #[serde(default)]
    pub background: bool,
}

impl ClassSpec {
    pub fn new(name: impl Into<String>, bit: u32, background: bool) -> Self {
        Self {
            name: name.into(),
            bit,
            background,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    ignore_mask: u32,
    #[serde(default)]
    class: Vec<ClassSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRegistry {
    classes: Vec<ClassLabel>,
    ignore_mask: u32,
    background: usize,
}

impl ClassRegistry {
    pub fn new(specs: Vec<ClassSpec>, ignore_mask: u32) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidRegistry(msg));
        if specs.is_empty() {
            return invalid("at least one class is required".into());
        }
        if specs.len() > MAX_CLASSES {
            return invalid(format!(
                "{} classes given, at most {MAX_CLASSES} fit in a pixel",
                specs.len()
            ));
        }
        if ignore_mask & !PIXEL_VALUE_MASK != 0 {
            return invalid(format!("ignore mask {ignore_mask:#x} exceeds 24 bits"));
        }

        let mut names = HashSet::new();
        let mut used_bits = 0u32;
        let mut background = None;
        for spec in &specs {
            if spec.name.trim().is_empty() {
                return invalid("class names must not be empty".into());
            }
            if !names.insert(spec.name.as_str()) {
                return invalid(format!("duplicate class name {:?}", spec.name));
            }
            if spec.bit.count_ones() != 1 || spec.bit & !PIXEL_VALUE_MASK != 0 {
                return invalid(format!(
                    "class {:?}: {:#x} is not a single bit within 24 bits",
                    spec.name, spec.bit
                ));
            }
            if used_bits & spec.bit != 0 {
                return invalid(format!("class {:?}: bit {:#x} already used", spec.name, spec.bit));
            }
            if ignore_mask & spec.bit != 0 {
                return invalid(format!(
                    "class {:?}: bit {:#x} overlaps the ignore mask",
                    spec.name, spec.bit
                ));
            }
            used_bits |= spec.bit;
            if spec.background {
                if let Some(prev) = background.replace(spec.name.as_str()) {
                    return invalid(format!(
                        "both {prev:?} and {:?} are marked as background",
                        spec.name
                    ));
                }
            }
        }
        let Some(background_name) = background else {
            return invalid("exactly one class must be marked as background".into());
        };
        let background = specs
            .iter()
            .position(|s| s.name == background_name)
            .expect("background name comes from specs");

        let classes = specs
            .into_iter()
            .enumerate()
            .map(|(index, spec)| ClassLabel {
                index,
                encoding_bit: spec.bit,
                name: spec.name,
                is_background: spec.background,
            })
            .collect();
        Ok(Self {
            classes,
            ignore_mask,
            background,
        })
    }

    /// DIVA-HisDB encoding: class bits in the blue channel, boundary flag in
    /// the top bit of red.
    pub fn diva_hisdb() -> Self {
        Self::new(
            vec![
                ClassSpec::new("background", 0x01, true),
                ClassSpec::new("comment", 0x02, false),
                ClassSpec::new("decoration", 0x04, false),
                ClassSpec::new("main-text", 0x08, false),
            ],
            0x80_0000,
        )
        .expect("built-in registry is valid")
    }

    /// Registry where the i-th name gets bit `1 << i`; the first name is the
    /// background class.
    pub fn sequential<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let specs = names
            .iter()
            .enumerate()
            .map(|(i, name)| ClassSpec::new(name.as_ref(), 1 << i, i == 0))
            .collect();
        Self::new(specs, 0)
    }

    pub fn from_toml_str(source: &str) -> Result<Self> {
        let file: RegistryFile =
            toml::from_str(source).map_err(|e| Error::InvalidRegistry(e.to_string()))?;
        Self::new(file.class, file.ignore_mask)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let source = std::fs::read_to_string(path)?;
        Self::from_toml_str(&source)
    }

    pub fn classes(&self) -> &[ClassLabel] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn ignore_mask(&self) -> u32 {
        self.ignore_mask
    }

    pub fn background(&self) -> &ClassLabel {
        &self.classes[self.background]
    }

    pub fn background_index(&self) -> usize {
        self.background
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&ClassLabel> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Union of all class encoding bits.
    pub fn encoding_mask(&self) -> u32 {
        self.classes.iter().fold(0, |acc, c| acc | c.encoding_bit)
    }
}

impl Default for ClassRegistry {
    fn default() -> Self {
        Self::diva_hisdb()
    }
}
