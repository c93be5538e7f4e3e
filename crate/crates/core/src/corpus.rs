//! Bundled instances used by the tests, the benches and `report --corpus`.

use crate::error::LoadError;
use crate::problem_model::{load_instance, ProblemInstance};

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub json: &'static str,
    /// Groups presumed metrically subregular for the split check.
    pub partition: &'static [usize],
}

macro_rules! entry {
    ($name:literal, $part:expr) => {
        CorpusEntry {
            name: $name,
            json: include_str!(concat!("../instances/", $name, ".json")),
            partition: $part,
        }
    };
}

pub const CORPUS: &[CorpusEntry] = &[
    entry!("cone_theta", &[0]),
    entry!("second_order_origin", &[]),
    entry!("square_ineq", &[]),
    entry!("affine_polyhedral", &[]),
    entry!("cone_theta_soc", &[0]),
    entry!("soc3_case4_violation", &[]),
    entry!("soc3_interior", &[]),
    entry!("soc3_origin", &[]),
    entry!("split_example", &[0]),
    entry!("mpec_biactive", &[]),
];

pub fn entry(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

/// Loads a bundled instance by name; panics on an unknown name.
pub fn load(name: &str) -> Result<ProblemInstance, LoadError> {
    let e = entry(name).unwrap_or_else(|| panic!("no bundled instance named {name}"));
    load_instance(e.json.as_bytes())
}
