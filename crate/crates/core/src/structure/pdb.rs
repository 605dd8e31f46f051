//! Fixed-column PDB `ATOM`/`HETATM` record reading and writing.
//!
//! Only coordinate records (plus `TITLE` and `TER`) are interpreted. Every other
//! record is counted in [`ParseReport::ignored_lines`] and otherwise skipped.

use std::collections::HashMap;
use std::fmt::Write as _;

use log::warn;

use super::{Atom, Chain, Residue, Structure};
use crate::error::{Error, Result};
use crate::Point;

/// Side information gathered while parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseReport {
    /// Lines whose record type is not interpreted.
    pub ignored_lines: usize,
    /// Alternate-location atoms dropped in favour of the first occurrence.
    pub altlocs_dropped: usize,
}

/// Parses PDB text into a [`Structure`].
pub fn parse_pdb(text: &str) -> Result<Structure> {
    parse_pdb_with_report(text).map(|(s, _)| s)
}

/// 1-based inclusive column slice, clipped to the line length.
fn columns(line: &str, first: usize, last: usize) -> &str {
    let start = (first - 1).min(line.len());
    let end = last.min(line.len());
    line.get(start..end).unwrap_or("")
}

fn parse_field<T: std::str::FromStr>(
    line: &str,
    line_no: usize,
    first: usize,
    last: usize,
    what: &str,
) -> Result<T> {
    let raw = columns(line, first, last).trim();
    raw.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("malformed {what} field {raw:?} (columns {first}-{last})"),
    })
}

fn optional_f64(line: &str, line_no: usize, first: usize, last: usize, what: &str, default: f64) -> Result<f64> {
    if columns(line, first, last).trim().is_empty() {
        Ok(default)
    } else {
        parse_field(line, line_no, first, last, what)
    }
}

fn element_from_name(name: &str) -> String {
    name.chars()
        .find(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_string())
        .unwrap_or_default()
}

/// Parses PDB text, also returning counts of ignored records and dropped altlocs.
pub fn parse_pdb_with_report(text: &str) -> Result<(Structure, ParseReport)> {
    let mut report = ParseReport::default();
    let mut title_parts: Vec<String> = Vec::new();
    // Residues are grouped by (chain, resSeq); chains and residues keep first-seen order.
    let mut chains: Vec<(char, Vec<Residue>)> = Vec::new();
    let mut index: HashMap<(char, i32), (usize, usize)> = HashMap::new();

    for (k, raw_line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw_line.trim_end_matches('\r');
        let record = columns(line, 1, 6);
        let hetero = record == "HETATM";
        if record == "TITLE " || record == "TITLE" {
            let part = columns(line, 11, 80).trim();
            if !part.is_empty() {
                title_parts.push(part.to_string());
            }
            continue;
        }
        if record.starts_with("TER") || record.starts_with("END") {
            continue;
        }
        if record != "ATOM  " && !hetero {
            if !line.trim().is_empty() {
                report.ignored_lines += 1;
            }
            continue;
        }

        if line.len() < 54 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("coordinate record too short ({} columns)", line.len()),
            });
        }
        let serial: u32 = parse_field(line, line_no, 7, 11, "serial")?;
        let name = columns(line, 13, 16).trim().to_string();
        if name.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty atom name".into(),
            });
        }
        let altloc = columns(line, 17, 17).trim().chars().next();
        let res_name = columns(line, 18, 20).trim().to_string();
        let chain_id = columns(line, 22, 22).chars().next().unwrap_or(' ');
        let seq: i32 = parse_field(line, line_no, 23, 26, "residue number")?;
        let x: f64 = parse_field(line, line_no, 31, 38, "x coordinate")?;
        let y: f64 = parse_field(line, line_no, 39, 46, "y coordinate")?;
        let z: f64 = parse_field(line, line_no, 47, 54, "z coordinate")?;
        let occupancy = optional_f64(line, line_no, 55, 60, "occupancy", 1.0)?;
        let b_factor = optional_f64(line, line_no, 61, 66, "temperature factor", 0.0)?;
        let mut element = columns(line, 77, 78).trim().to_string();
        if element.is_empty() {
            element = element_from_name(&name);
        }

        let mut atom = Atom::new(serial, &name, &element, Point::new(x, y, z)).map_err(|e| {
            Error::Parse {
                line: line_no,
                message: e.to_string(),
            }
        })?;
        atom.occupancy = occupancy;
        atom.b_factor = b_factor;
        atom.hetero = hetero;

        let (ci, ri) = match index.get(&(chain_id, seq)) {
            Some(&slot) => slot,
            None => {
                let ci = match chains.iter().position(|(id, _)| *id == chain_id) {
                    Some(ci) => ci,
                    None => {
                        chains.push((chain_id, Vec::new()));
                        chains.len() - 1
                    }
                };
                chains[ci].1.push(Residue::new(&res_name, seq));
                let slot = (ci, chains[ci].1.len() - 1);
                index.insert((chain_id, seq), slot);
                slot
            }
        };
        let residue = &mut chains[ci].1[ri];
        if residue.atom(&atom.name).is_some() {
            if altloc.is_some() {
                warn!(
                    "line {line_no}: dropping alternate location {} of {chain_id}{seq}.{}",
                    altloc.unwrap_or(' '),
                    atom.name
                );
                report.altlocs_dropped += 1;
                continue;
            }
            return Err(Error::Structure(format!(
                "line {line_no}: duplicate atom {chain_id}{seq}.{}",
                atom.name
            )));
        }
        residue.atoms.push(atom);
    }

    let mut structure = Structure::new(&title_parts.join(" "));
    for (id, residues) in chains {
        let mut chain = Chain::new(id);
        for r in residues {
            chain.push_residue(r)?;
        }
        structure.push_chain(chain)?;
    }
    Ok((structure, report))
}

fn fixed(value: f64, width: usize, decimals: usize, what: &str) -> Result<String> {
    let s = format!("{value:>width$.decimals$}");
    if s.len() > width || !value.is_finite() {
        return Err(Error::Format(format!(
            "{what} {value} does not fit in {width} columns"
        )));
    }
    Ok(s)
}

fn atom_name_field(atom: &Atom) -> String {
    if atom.name.len() < 4 && atom.element.len() <= 1 {
        format!(" {:<3}", atom.name)
    } else {
        format!("{:<4}", atom.name)
    }
}

/// Writes `ATOM`/`HETATM` records, one `TER` after each chain, then `END`.
pub fn write_pdb(s: &Structure) -> Result<String> {
    let mut out = String::new();
    if !s.title.is_empty() {
        writeln!(out, "TITLE     {}", s.title).unwrap();
    }
    for chain in &s.chains {
        let mut last_serial = 0;
        for residue in &chain.residues {
            if residue.seq < -999 || residue.seq > 9999 {
                return Err(Error::Format(format!(
                    "residue number {} does not fit in 4 columns",
                    residue.seq
                )));
            }
            for atom in &residue.atoms {
                if atom.serial > 99_999 {
                    return Err(Error::Format(format!(
                        "atom serial {} does not fit in 5 columns",
                        atom.serial
                    )));
                }
                let record = if atom.hetero { "HETATM" } else { "ATOM  " };
                writeln!(
                    out,
                    "{record}{:>5} {} {:>3} {}{:>4}    {}{}{}{}{}          {:>2}",
                    atom.serial,
                    atom_name_field(atom),
                    residue.name,
                    chain.id,
                    residue.seq,
                    fixed(atom.position.x, 8, 3, "x coordinate")?,
                    fixed(atom.position.y, 8, 3, "y coordinate")?,
                    fixed(atom.position.z, 8, 3, "z coordinate")?,
                    fixed(atom.occupancy, 6, 2, "occupancy")?,
                    fixed(atom.b_factor, 6, 2, "temperature factor")?,
                    atom.element,
                )
                .unwrap();
                last_serial = atom.serial;
            }
        }
        if let Some(last) = chain.residues.last() {
            writeln!(
                out,
                "TER   {:>5}      {:>3} {}{:>4}",
                (last_serial + 1).min(99_999),
                last.name,
                chain.id,
                last.seq
            )
            .unwrap();
        }
    }
    out.push_str("END\n");
    Ok(out)
}
