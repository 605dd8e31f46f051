//! Hierarchical molecular model: [`Structure`] → [`Chain`] → [`Residue`] → [`Atom`].
//!
//! Structures are plain values. Every pipeline stage takes one by reference
//! and returns a new one.

mod address;
mod pdb;

pub use address::AtomAddress;
pub use pdb::{parse_pdb, parse_pdb_with_report, write_pdb, ParseReport};

use crate::error::{Error, Result};
use crate::Point;

/// Backbone heavy atoms, in output order.
pub const BACKBONE: [&str; 4] = ["N", "CA", "C", "O"];

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub serial: u32,
    /// Atom label such as `CA` or `CB`; at most four characters.
    pub name: String,
    pub element: String,
    pub position: Point,
    pub occupancy: f64,
    pub b_factor: f64,
    /// Read from (and written as) a `HETATM` record.
    pub hetero: bool,
}

impl Atom {
    pub fn new(serial: u32, name: &str, element: &str, position: Point) -> Result<Self> {
        if name.is_empty() || name.len() > 4 {
            return Err(Error::Structure(format!(
                "atom name {name:?} must have 1 to 4 characters"
            )));
        }
        if !position.iter().all(|c| c.is_finite()) {
            return Err(Error::Structure(format!(
                "atom {name} has non-finite coordinates"
            )));
        }
        Ok(Self {
            serial,
            name: name.to_string(),
            element: element.to_string(),
            position,
            occupancy: 1.0,
            b_factor: 0.0,
            hetero: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residue {
    /// Three-letter residue code.
    pub name: String,
    pub seq: i32,
    pub atoms: Vec<Atom>,
}

impl Residue {
    pub fn new(name: &str, seq: i32) -> Self {
        Self {
            name: name.to_string(),
            seq,
            atoms: Vec::new(),
        }
    }

    pub fn atom(&self, name: &str) -> Option<&Atom> {
        self.atoms.iter().find(|a| a.name == name)
    }

    pub fn position(&self, name: &str) -> Option<Point> {
        self.atom(name).map(|a| a.position)
    }

    /// Appends an atom, rejecting duplicate names.
    pub fn push_atom(&mut self, atom: Atom) -> Result<()> {
        if self.atom(&atom.name).is_some() {
            return Err(Error::Structure(format!(
                "duplicate atom {} in residue {}{}",
                atom.name, self.name, self.seq
            )));
        }
        self.atoms.push(atom);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub id: char,
    pub residues: Vec<Residue>,
}

impl Chain {
    pub fn new(id: char) -> Self {
        Self {
            id,
            residues: Vec::new(),
        }
    }

    pub fn residue(&self, seq: i32) -> Option<&Residue> {
        self.residues.iter().find(|r| r.seq == seq)
    }

    /// Appends a residue; sequence numbers must be strictly increasing.
    pub fn push_residue(&mut self, residue: Residue) -> Result<()> {
        if let Some(last) = self.residues.last() {
            if residue.seq <= last.seq {
                return Err(Error::Structure(format!(
                    "chain {}: residue {} follows residue {}",
                    self.id, residue.seq, last.seq
                )));
            }
        }
        self.residues.push(residue);
        Ok(())
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.residues.iter().flat_map(|r| r.atoms.iter())
    }

    /// Positions of all atoms named `name`, in residue order.
    pub fn positions_of(&self, name: &str) -> Vec<Point> {
        self.residues
            .iter()
            .filter_map(|r| r.position(name))
            .collect()
    }

    /// Same chain with the given id.
    pub fn with_id(mut self, id: char) -> Self {
        self.id = id;
        self
    }

    /// Keeps residues with `first <= seq <= last`.
    pub fn window(&self, first: i32, last: i32) -> Result<Chain> {
        if first > last {
            return Err(Error::Argument(format!(
                "empty residue window {first}..={last}"
            )));
        }
        let residues: Vec<Residue> = self
            .residues
            .iter()
            .filter(|r| (first..=last).contains(&r.seq))
            .cloned()
            .collect();
        if residues.len() as i64 != (last - first + 1) as i64 {
            return Err(Error::Structure(format!(
                "chain {}: window {first}..={last} is not fully present ({} residues found)",
                self.id,
                residues.len()
            )));
        }
        Ok(Chain {
            id: self.id,
            residues,
        })
    }

    /// Renumbers residues consecutively starting at `start`.
    pub fn renumbered(mut self, start: i32) -> Chain {
        for (k, r) in self.residues.iter_mut().enumerate() {
            r.seq = start + k as i32;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Structure {
    pub title: String,
    pub chains: Vec<Chain>,
}

impl Structure {
    pub fn new(title: &str) -> Self {
        Self {
            title: title.to_string(),
            chains: Vec::new(),
        }
    }

    pub fn chain(&self, id: char) -> Option<&Chain> {
        self.chains.iter().find(|c| c.id == id)
    }

    pub fn chain_ids(&self) -> Vec<char> {
        self.chains.iter().map(|c| c.id).collect()
    }

    /// Appends a chain; chain ids must be unique.
    pub fn push_chain(&mut self, chain: Chain) -> Result<()> {
        if self.chain(chain.id).is_some() {
            return Err(Error::Structure(format!("duplicate chain id {}", chain.id)));
        }
        self.chains.push(chain);
        Ok(())
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.chains.iter().flat_map(|c| c.atoms())
    }

    pub fn atom_count(&self) -> usize {
        self.atoms().count()
    }

    /// Assigns serial numbers 1..=n in file order.
    pub fn renumber_serials(&mut self) {
        let mut serial = 1;
        for chain in &mut self.chains {
            for residue in &mut chain.residues {
                for atom in &mut residue.atoms {
                    atom.serial = serial;
                    serial += 1;
                }
            }
        }
    }

    /// Every atom address present in the structure.
    pub fn addresses(&self) -> Vec<AtomAddress> {
        self.chains
            .iter()
            .flat_map(|c| {
                c.residues.iter().flat_map(move |r| {
                    r.atoms.iter().map(move |a| AtomAddress {
                        chain: c.id,
                        seq: r.seq,
                        name: a.name.clone(),
                    })
                })
            })
            .collect()
    }
}

/// Position of the atom `name` in residue `seq` of chain `chain`.
pub fn select_atom(s: &Structure, chain: char, seq: i32, name: &str) -> Result<Point> {
    let addr = || format!("{chain}{seq}.{name}");
    let c = s
        .chain(chain)
        .ok_or_else(|| Error::Lookup(format!("{}: no chain {chain}", addr())))?;
    let r = c
        .residue(seq)
        .ok_or_else(|| Error::Lookup(format!("{}: no residue {seq} in chain {chain}", addr())))?;
    r.position(name).ok_or_else(|| {
        Error::Lookup(format!(
            "{}: residue {}{} has no atom {name}",
            addr(),
            r.name,
            seq
        ))
    })
}

impl Structure {
    pub fn select(&self, address: &AtomAddress) -> Result<Point> {
        select_atom(self, address.chain, address.seq, &address.name)
    }
}
