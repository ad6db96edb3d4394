//! Built-in curriculum models.
//!
//! The sources are the `.mc` files under `models/`, embedded verbatim.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Expected outcome of checking one property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    Holds,
    Violated,
    Error,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Holds => "holds",
            VerdictKind::Violated => "violated",
            VerdictKind::Error => "error",
        })
    }
}

#[derive(Debug)]
pub struct ExampleEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub blurb: &'static str,
    expected: &'static [(&'static str, VerdictKind)],
}

impl ExampleEntry {
    /// Property name to expected verdict under the default checks.
    pub fn expected(&self) -> BTreeMap<&'static str, VerdictKind> {
        self.expected.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown example `{name}`; available: {}", available.join(", "))]
pub struct UnknownExample {
    pub name: String,
    pub available: Vec<&'static str>,
}

use VerdictKind::{Holds, Violated};

pub static BUILTINS: &[ExampleEntry] = &[
    ExampleEntry {
        name: "microwave-v0",
        source: include_str!("../models/microwave-v0.mc"),
        blurb: "microwave with independent door and radiation; Start ignores the door",
        expected: &[("DoorSafety", Violated), ("HeatLiveness", Violated)],
    },
    ExampleEntry {
        name: "microwave-v1",
        source: include_str!("../models/microwave-v1.mc"),
        blurb: "microwave whose Start requires a closed door; opening the door still leaks",
        expected: &[("DoorSafety", Violated), ("HeatLiveness", Violated)],
    },
    ExampleEntry {
        name: "microwave-v2",
        source: include_str!("../models/microwave-v2.mc"),
        blurb: "safe microwave: OpenDoor shuts off radiation, Tick is weakly fair",
        expected: &[("DoorSafety", Holds), ("HeatLiveness", Holds)],
    },
    ExampleEntry {
        name: "counter",
        source: include_str!("../models/counter.mc"),
        blurb: "shared counter, two explicit threads, unsynchronized read-increment-write",
        expected: &[("NoLostUpdate", Violated)],
    },
    ExampleEntry {
        name: "bounded-buffer",
        source: include_str!("../models/bounded-buffer.mc"),
        blurb: "bounded buffer, producer and consumer threads, consumer weakly fair",
        expected: &[("Occupancy", Holds), ("Drains", Holds)],
    },
];

pub fn builtin(name: &str) -> Result<&'static ExampleEntry, UnknownExample> {
    BUILTINS
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| UnknownExample {
            name: name.to_string(),
            available: names(),
        })
}

pub fn names() -> Vec<&'static str> {
    BUILTINS.iter().map(|e| e.name).collect()
}
