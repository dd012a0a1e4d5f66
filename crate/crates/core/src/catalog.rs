//! Program catalogs: the map `e ↦ Φ_e` used by requirement families
//! (`R_e`/`N_e`), low-basis forcing questions and Π₁ classes.
//!
//! Position `e` is the requirement number, and `Φ_e(e)` runs the program at
//! position `e` on input `e`. A catalog is an explicit list of programs,
//! optionally followed by the program numbering shifted past the list.

use serde::{Deserialize, Serialize};

use crate::machine::{library, Program};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    explicit: Vec<Program>,
    numbering_tail: bool,
}

impl Catalog {
    /// Position `e` is the program with index `e`.
    pub fn numbering() -> Self {
        Catalog { explicit: Vec::new(), numbering_tail: true }
    }

    pub fn explicit(programs: Vec<Program>) -> Self {
        Catalog { explicit: programs, numbering_tail: false }
    }

    pub fn with_numbering_tail(mut self) -> Self {
        self.numbering_tail = true;
        self
    }

    /// The default requirement catalog: oracle-dependent scanners mixed with
    /// always- and never-halting programs, then the numbering.
    pub fn standard() -> Self {
        Catalog::explicit(vec![
            library::halt_if_oracle_nonempty(),
            library::diverge(),
            library::halt_if_two_members(),
            library::halt_if_member_above_10(),
            library::halt_zero(),
            library::halt_if_odd_member(),
            library::halt_if_contains_3(),
            library::halt_if_contains_input(),
        ])
        .with_numbering_tail()
    }

    /// Oracle-free programs only.
    pub fn oracle_free() -> Self {
        Catalog::explicit(vec![
            library::halt_zero(),
            library::diverge(),
            library::halt_if_even(),
            library::halt_if_odd(),
            library::halt_at_step_17(),
            library::diverge(),
            library::identity(),
        ])
    }

    /// Program at position `e`. Positions past a list without numbering tail
    /// are the diverging program.
    pub fn get(&self, e: u64) -> Program {
        match self.explicit.get(e as usize) {
            Some(p) => p.clone(),
            None if self.numbering_tail => Program::decode(u128::from(e) - self.explicit.len() as u128),
            None => library::diverge(),
        }
    }

    pub fn explicit_programs(&self) -> &[Program] {
        &self.explicit
    }

    pub fn has_numbering_tail(&self) -> bool {
        self.numbering_tail
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::standard()
    }
}

/// Serialized form: program texts plus the tail flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogSpec {
    pub programs: Vec<String>,
    pub numbering_tail: bool,
}

impl From<&Catalog> for CatalogSpec {
    fn from(c: &Catalog) -> Self {
        CatalogSpec { programs: c.explicit.iter().map(Program::to_text).collect(), numbering_tail: c.numbering_tail }
    }
}

impl TryFrom<&CatalogSpec> for Catalog {
    type Error = crate::machine::AsmError;

    fn try_from(s: &CatalogSpec) -> Result<Self, Self::Error> {
        let explicit = s.programs.iter().map(|t| Program::parse(t)).collect::<Result<_, _>>()?;
        Ok(Catalog { explicit, numbering_tail: s.numbering_tail })
    }
}

impl Serialize for Catalog {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CatalogSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Catalog {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let spec = CatalogSpec::deserialize(deserializer)?;
        Catalog::try_from(&spec).map_err(serde::de::Error::custom)
    }
}
