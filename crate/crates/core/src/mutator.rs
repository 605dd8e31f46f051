//! Threads an Ala/Gly target sequence onto a template backbone.
//!
//! Backbone atoms N, CA, C and O are kept exactly. Every side chain is cut back
//! to CB (Ala) or removed (Gly). A missing CB is rebuilt from ideal internal
//! coordinates: |CA–CB| = 1.53 Å and N–CA–CB = C–CA–CB = 110.5°, on the
//! L-amino-acid side of the N–CA–C plane.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{Atom, Chain, Residue, Structure, BACKBONE};
use crate::Point;

/// Ideal CA–CB bond length, Å.
pub const CB_BOND_LENGTH: f64 = 1.53;
/// Ideal N–CA–CB and C–CA–CB angle, degrees.
pub const CB_BOND_ANGLE_DEG: f64 = 110.5;
/// Default backbone N···O hydrogen-bond cutoff, Å.
pub const HBOND_CUTOFF: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetResidue {
    Ala,
    Gly,
}

impl TargetResidue {
    pub fn code(self) -> &'static str {
        match self {
            Self::Ala => "ALA",
            Self::Gly => "GLY",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Self::Ala => 'A',
            Self::Gly => 'G',
        }
    }
}

/// A named sequence over {A, G}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSequence {
    pub name: String,
    pub residues: Vec<TargetResidue>,
}

impl TargetSequence {
    pub fn new(name: &str, letters: &str) -> Result<Self> {
        let residues = letters
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'A' => Ok(TargetResidue::Ala),
                'G' => Ok(TargetResidue::Gly),
                other => Err(Error::Argument(format!(
                    "target sequences may only contain A and G, found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        if residues.is_empty() {
            return Err(Error::Argument("empty target sequence".into()));
        }
        Ok(Self {
            name: name.to_string(),
            residues,
        })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn letters(&self) -> String {
        self.residues.iter().map(|r| r.letter()).collect()
    }
}

impl FromStr for TargetSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s, s)
    }
}

impl fmt::Display for TargetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.letters())
    }
}

/// Ideal CB position from backbone N, CA and C.
pub fn ideal_cb(n: &Point, ca: &Point, c: &Point) -> Result<Point> {
    let to_n = (n - ca).try_normalize(1e-9);
    let to_c = (c - ca).try_normalize(1e-9);
    let (Some(to_n), Some(to_c)) = (to_n, to_c) else {
        return Err(Error::Structure("backbone atom coincides with CA".into()));
    };
    let bisector = (to_n + to_c).try_normalize(1e-6);
    let normal = to_n.cross(&to_c).try_normalize(1e-6);
    let (Some(bisector), Some(normal)) = (bisector, normal) else {
        return Err(Error::Structure("N, CA and C are collinear".into()));
    };
    // CB = CA + L·(−a·bisector + b·normal) with n·d = c·d = cos(110.5°).
    let half_cos = bisector.dot(&to_n);
    let a = -CB_BOND_ANGLE_DEG.to_radians().cos() / half_cos;
    if a >= 1.0 {
        return Err(Error::Structure(
            "N-CA-C angle too open for tetrahedral CB placement".into(),
        ));
    }
    let b = (1.0 - a * a).sqrt();
    Ok(ca + CB_BOND_LENGTH * (-a * bisector + b * normal))
}

fn residue_label(chain: char, r: &Residue) -> String {
    format!("{chain}{}({})", r.seq, r.name)
}

fn thread_residue(chain: char, template: &Residue, target: TargetResidue) -> Result<Residue> {
    let mut out = Residue::new(target.code(), template.seq);
    for name in BACKBONE {
        let atom = template.atom(name).ok_or_else(|| {
            Error::Structure(format!(
                "residue {} lacks backbone atom {name}",
                residue_label(chain, template)
            ))
        })?;
        out.atoms.push(atom.clone());
    }
    if target == TargetResidue::Ala {
        let cb = match template.atom("CB") {
            Some(cb) => cb.clone(),
            None => {
                let pos = ideal_cb(
                    &template.position("N").unwrap(),
                    &template.position("CA").unwrap(),
                    &template.position("C").unwrap(),
                )
                .map_err(|e| {
                    Error::Structure(format!("{}: {e}", residue_label(chain, template)))
                })?;
                let ca = template.atom("CA").unwrap();
                let mut cb = Atom::new(0, "CB", "C", pos)?;
                cb.occupancy = ca.occupancy;
                cb.b_factor = ca.b_factor;
                cb
            }
        };
        out.atoms.push(cb);
    }
    Ok(out)
}

/// Renames residue `i` of `chain` to the `i`-th target residue and trims side chains.
pub fn thread_sequence(chain: &Chain, target: &TargetSequence) -> Result<Chain> {
    if chain.residues.len() != target.len() {
        return Err(Error::Argument(format!(
            "chain {} has {} residues but target {} has {}",
            chain.id,
            chain.residues.len(),
            target.name,
            target.len()
        )));
    }
    let residues = chain
        .residues
        .iter()
        .zip(&target.residues)
        .map(|(r, &t)| thread_residue(chain.id, r, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Chain {
        id: chain.id,
        residues,
    })
}

/// Threads `target` onto residues `first..=last` of `chain`, dropping the rest.
pub fn thread_window(chain: &Chain, first: i32, last: i32, target: &TargetSequence) -> Result<Chain> {
    thread_sequence(&chain.window(first, last)?, target)
}

/// One backbone N···O contact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackboneHbond {
    pub donor_chain: char,
    pub donor_seq: i32,
    pub acceptor_chain: char,
    pub acceptor_seq: i32,
    pub distance: f64,
}

impl BackboneHbond {
    fn key(&self) -> (char, i32, char, i32) {
        (self.donor_chain, self.donor_seq, self.acceptor_chain, self.acceptor_seq)
    }
}

/// Backbone N···O pairs within `cutoff` Å. Pairs within one residue or
/// between sequence neighbours of the same chain are excluded.
pub fn backbone_hbonds(s: &Structure, cutoff: f64) -> Vec<BackboneHbond> {
    let mut donors = Vec::new();
    let mut acceptors = Vec::new();
    for chain in &s.chains {
        for r in &chain.residues {
            if let Some(n) = r.position("N") {
                donors.push((chain.id, r.seq, n));
            }
            if let Some(o) = r.position("O") {
                acceptors.push((chain.id, r.seq, o));
            }
        }
    }
    let mut out = Vec::new();
    for &(dc, ds, n) in &donors {
        for &(ac, aseq, o) in &acceptors {
            if dc == ac && (ds - aseq).abs() <= 1 {
                continue;
            }
            let distance = (n - o).norm();
            if distance <= cutoff {
                out.push(BackboneHbond {
                    donor_chain: dc,
                    donor_seq: ds,
                    acceptor_chain: ac,
                    acceptor_seq: aseq,
                    distance,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbondRetention {
    pub cutoff: f64,
    pub before: Vec<BackboneHbond>,
    pub after: Vec<BackboneHbond>,
    /// Bonds present before that are still present after.
    pub retained: usize,
    /// `retained / before.len()`, or 1 when there was nothing to retain.
    pub retained_fraction: f64,
}

/// Compares backbone hydrogen bonds of two structures sharing a backbone.
pub fn preserved_hbond_check(before: &Structure, after: &Structure, cutoff: f64) -> HbondRetention {
    let b = backbone_hbonds(before, cutoff);
    let a = backbone_hbonds(after, cutoff);
    let retained = b
        .iter()
        .filter(|hb| a.iter().any(|x| x.key() == hb.key()))
        .count();
    let retained_fraction = if b.is_empty() {
        1.0
    } else {
        retained as f64 / b.len() as f64
    };
    HbondRetention {
        cutoff,
        before: b,
        after: a,
        retained,
        retained_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn atom(name: &str, p: [f64; 3]) -> Atom {
        let element = &name[..1];
        Atom::new(0, name, element, Point::new(p[0], p[1], p[2])).unwrap()
    }

    /// A residue with roughly ideal backbone geometry.
    fn residue(name: &str, seq: i32, side: &[(&str, [f64; 3])]) -> Residue {
        let mut r = Residue::new(name, seq);
        let dx = 3.4 * seq as f64;
        for (n, p) in [
            ("N", [-0.527 + dx, 1.359, 0.0]),
            ("CA", [dx, 0.0, 0.0]),
            ("C", [1.525 + dx, 0.0, 0.0]),
            ("O", [2.155 + dx, -1.057, 0.0]),
        ] {
            r.push_atom(atom(n, p)).unwrap();
        }
        for (n, p) in side {
            r.push_atom(atom(n, [p[0] + dx, p[1], p[2]])).unwrap();
        }
        r
    }

    fn angle_deg(a: &Point, vertex: &Point, b: &Point) -> f64 {
        (a - vertex).angle(&(b - vertex)).to_degrees()
    }

    #[test]
    fn constructed_cb_has_ideal_internal_coordinates() {
        let r = residue("GLY", 1, &[]);
        let chain = Chain { id: 'A', residues: vec![r.clone()] };
        let out = thread_sequence(&chain, &"A".parse().unwrap()).unwrap();
        let res = &out.residues[0];
        assert_eq!(res.name, "ALA");
        let (n, ca, c, cb) = (
            res.position("N").unwrap(),
            res.position("CA").unwrap(),
            res.position("C").unwrap(),
            res.position("CB").unwrap(),
        );
        assert!(((cb - ca).norm() - 1.53).abs() <= 0.01);
        assert!((angle_deg(&n, &ca, &cb) - 110.5).abs() <= 1.0);
        assert!((angle_deg(&c, &ca, &cb) - 110.5).abs() <= 1.0);
    }

    #[test]
    fn constructed_cb_is_on_the_l_side() {
        // Independent reference: the widely used virtual-CB formula
        // CB = -0.58273431·a + 0.56802827·b - 0.54067466·c + CA,
        // b = CA - N, c = C - CA, a = b × c.
        let r = residue("GLY", 1, &[]);
        let (n, ca, c) = (
            r.position("N").unwrap(),
            r.position("CA").unwrap(),
            r.position("C").unwrap(),
        );
        let b = ca - n;
        let cc = c - ca;
        let a = b.cross(&cc);
        let reference = -0.58273431 * a + 0.56802827 * b - 0.54067466 * cc + ca;
        let ours = ideal_cb(&n, &ca, &c).unwrap();
        let cos = (ours - ca).normalize().dot(&(reference - ca).normalize());
        assert!(cos > 0.99, "cos = {cos}");
    }

    #[test]
    fn val_to_ala_keeps_template_cb() {
        let cb = [-0.5, -0.8, 1.2];
        let r = residue("VAL", 3, &[("CB", cb), ("CG1", [-1.0, -1.0, 2.5]), ("CG2", [-1.8, -0.2, 0.9])]);
        let chain = Chain { id: 'B', residues: vec![r.clone()] };
        let out = thread_sequence(&chain, &"A".parse().unwrap()).unwrap();
        let res = &out.residues[0];
        let names: Vec<&str> = res.atoms.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["N", "CA", "C", "O", "CB"]);
        assert_eq!(res.position("CB"), r.position("CB"));
    }

    #[test]
    fn gly_drops_all_side_chain_atoms() {
        let r = residue("SER", 6, &[("CB", [-0.5, -0.8, 1.2]), ("OG", [-1.0, -1.0, 2.5])]);
        let chain = Chain { id: 'B', residues: vec![r] };
        let out = thread_sequence(&chain, &"G".parse().unwrap()).unwrap();
        let names: Vec<&str> = out.residues[0].atoms.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["N", "CA", "C", "O"]);
    }

    #[test]
    fn identity_threading_keeps_coordinates() {
        let chain = Chain {
            id: 'A',
            residues: vec![
                residue("ALA", 1, &[("CB", [-0.5, -0.8, 1.2])]),
                residue("GLY", 2, &[]),
            ],
        };
        let out = thread_sequence(&chain, &"AG".parse().unwrap()).unwrap();
        assert_eq!(out, chain);
    }

    #[test]
    fn backbone_never_moves() {
        let chain = Chain {
            id: 'A',
            residues: vec![residue("TYR", 1, &[("CB", [-0.5, -0.8, 1.2])]), residue("GLY", 2, &[])],
        };
        let out = thread_sequence(&chain, &"GA".parse().unwrap()).unwrap();
        for (before, after) in chain.residues.iter().zip(&out.residues) {
            for name in BACKBONE {
                assert_eq!(before.position(name), after.position(name));
            }
        }
    }

    #[test]
    fn length_mismatch_and_missing_backbone() {
        let chain = Chain { id: 'A', residues: vec![residue("GLY", 1, &[])] };
        assert!(matches!(
            thread_sequence(&chain, &"AA".parse().unwrap()),
            Err(Error::Argument(_))
        ));
        let mut broken = chain.clone();
        broken.residues[0].atoms.retain(|a| a.name != "O");
        match thread_sequence(&broken, &"A".parse().unwrap()) {
            Err(Error::Structure(msg)) => assert!(msg.contains("A1(GLY)") && msg.contains(" O"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_non_ala_gly_targets() {
        assert!("AGV".parse::<TargetSequence>().is_err());
        assert!("".parse::<TargetSequence>().is_err());
        assert_eq!("agaaa".parse::<TargetSequence>().unwrap().letters(), "AGAAA");
    }

    fn two_strands() -> Structure {
        let a = Chain { id: 'A', residues: vec![residue("VAL", 1, &[("CB", [-0.5, -0.8, 1.2])])] };
        // Second strand displaced so its N sits 2.9 Å from the first O.
        let mut b = a.clone().with_id('B');
        let shift = a.residues[0].position("O").unwrap() + Point::new(0.0, 0.0, 2.9)
            - a.residues[0].position("N").unwrap();
        for atom in &mut b.residues[0].atoms {
            atom.position += shift;
        }
        Structure { title: String::new(), chains: vec![a, b] }
    }

    #[test]
    fn hbonds_survive_side_chain_mutation() {
        let before = two_strands();
        let mut after = before.clone();
        for chain in &mut after.chains {
            *chain = thread_sequence(chain, &"G".parse().unwrap()).unwrap();
        }
        let report = preserved_hbond_check(&before, &after, HBOND_CUTOFF);
        assert_eq!(report.before.len(), 1);
        assert_relative_eq!(report.before[0].distance, 2.9, epsilon = 1e-12);
        assert_eq!(report.retained_fraction, 1.0);
    }

    #[test]
    fn zero_cutoff_finds_nothing() {
        let s = two_strands();
        let report = preserved_hbond_check(&s, &s, 0.0);
        assert!(report.before.is_empty() && report.after.is_empty());
    }
}
