//! LAMMPS data files (`atom_style molecular`) plus a JSON sidecar carrying
//! the topology annotations the data format has no room for.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use polybead_core::{Bead, Bond, SimBox, Species, SystemState, Topology, Vec3};

use crate::{Error, Result};

const SECTIONS: [&str; 4] = ["Masses", "Atoms", "Velocities", "Bonds"];

/// Renders `state` as a data file. Floating-point values carry 17
/// significant digits so that reading the file back is exact.
pub fn lammps_data_string(state: &SystemState) -> String {
    let mut s = String::new();
    let b = state.sim_box.side();
    let _ = writeln!(s, "LAMMPS data file via polybead, timestep = {}", state.step);
    s.push('\n');
    let _ = writeln!(s, "{} atoms", state.beads.len());
    let _ = writeln!(s, "{} bonds", state.bonds.len());
    s.push_str("2 atom types\n1 bond types\n\n");
    for axis in ["x", "y", "z"] {
        let _ = writeln!(s, "{:.16e} {:.16e} {axis}lo {axis}hi", 0.0, b);
    }
    s.push_str("\nMasses\n\n");
    for species in [Species::Polymer, Species::Solvent] {
        let mass = state
            .beads
            .iter()
            .find(|bead| bead.species == species)
            .map_or(1.0, |bead| bead.mass);
        let _ = writeln!(s, "{} {:?}", species.atom_type(), mass);
    }
    s.push_str("\nAtoms # molecular\n\n");
    for bead in &state.beads {
        let p = bead.position;
        let molecule = match bead.species {
            Species::Polymer => 1,
            Species::Solvent => 0,
        };
        let _ = writeln!(
            s,
            "{} {} {} {:.16e} {:.16e} {:.16e} {} {} {}",
            bead.id + 1,
            molecule,
            bead.species.atom_type(),
            p.x,
            p.y,
            p.z,
            bead.image[0],
            bead.image[1],
            bead.image[2]
        );
    }
    s.push_str("\nVelocities\n\n");
    for bead in &state.beads {
        let v = bead.velocity;
        let _ = writeln!(s, "{} {:.16e} {:.16e} {:.16e}", bead.id + 1, v.x, v.y, v.z);
    }
    if !state.bonds.is_empty() {
        s.push_str("\nBonds\n\n");
        for (k, bond) in state.bonds.iter().enumerate() {
            let _ = writeln!(s, "{} 1 {} {}", k + 1, bond.i + 1, bond.j + 1);
        }
    }
    s
}

pub fn write_lammps_data(state: &SystemState, path: &Path) -> Result<()> {
    fs::write(path, lammps_data_string(state)).map_err(Error::io(path))
}

pub fn read_lammps_data(path: &Path) -> Result<SystemState> {
    let file = fs::File::open(path).map_err(Error::io(path))?;
    parse_lammps_data(BufReader::new(file), &path.display().to_string())
}

struct Line {
    number: usize,
    fields: Vec<String>,
}

fn parse_err(source_name: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        msg: msg.into(),
    }
}

fn field<T: std::str::FromStr>(line: &Line, k: usize, what: &str, name: &str) -> Result<T> {
    line.fields
        .get(k)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| parse_err(name, line.number, format!("expected {what} in column {}", k + 1)))
}

/// Parses a data file in the dialect written by [`write_lammps_data`].
/// Sections may appear in any order; the topology is left empty (linear
/// architecture) and must be supplied from the sidecar.
pub fn parse_lammps_data(reader: impl BufRead, name: &str) -> Result<SystemState> {
    let mut n_atoms = None;
    let mut n_bonds = None;
    let mut side = None;
    let mut step = 0;
    let mut sections: Vec<(String, usize, Vec<Line>)> = Vec::new();

    for (k, raw) in reader.lines().enumerate() {
        let number = k + 1;
        let raw = raw.map_err(|e| parse_err(name, number, e.to_string()))?;
        if number == 1 {
            if let Some(t) = raw.split("timestep =").nth(1) {
                step = t
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(name, number, "bad timestep in header"))?;
            }
            continue;
        }
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if SECTIONS.contains(&content) {
            sections.push((content.to_string(), number, Vec::new()));
            continue;
        }
        let fields: Vec<String> = content.split_whitespace().map(str::to_string).collect();
        let line = Line { number, fields };
        if let Some(section) = sections.last_mut() {
            section.2.push(line);
            continue;
        }
        match line.fields.iter().skip(1).map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["atoms"] => n_atoms = Some(field::<usize>(&line, 0, "atom count", name)?),
            ["bonds"] => n_bonds = Some(field::<usize>(&line, 0, "bond count", name)?),
            ["atom", "types"] | ["bond", "types"] => {}
            [_, lo, hi] if lo.ends_with("lo") && hi.ends_with("hi") => {
                let lo: f64 = field(&line, 0, "box lower bound", name)?;
                let hi: f64 = field(&line, 1, "box upper bound", name)?;
                if lo != 0.0 {
                    return Err(parse_err(name, number, "box must start at 0"));
                }
                if side.is_some_and(|s| s != hi) {
                    return Err(parse_err(name, number, "box must be cubic"));
                }
                side = Some(hi);
            }
            _ => return Err(parse_err(name, number, format!("unrecognised header line '{content}'"))),
        }
    }

    let n_atoms = n_atoms.ok_or_else(|| parse_err(name, 1, "missing 'atoms' count"))?;
    let n_bonds = n_bonds.unwrap_or(0);
    let side = side.ok_or_else(|| parse_err(name, 1, "missing box bounds"))?;
    let sim_box = SimBox::new(side)?;

    let mut masses = [1.0f64; 2];
    let mut beads: Vec<Option<Bead>> = vec![None; n_atoms];
    let mut velocities: Vec<Option<Vec3>> = vec![None; n_atoms];
    let mut bonds: Vec<Option<Bond>> = vec![None; n_bonds];
    let mut seen = Vec::new();

    for (section, header_line, lines) in &sections {
        if seen.contains(section) {
            return Err(parse_err(name, *header_line, format!("duplicate {section} section")));
        }
        seen.push(section.clone());
        let expected = match section.as_str() {
            "Masses" => 2,
            "Atoms" | "Velocities" => n_atoms,
            _ => n_bonds,
        };
        if lines.len() != expected {
            return Err(parse_err(
                name,
                *header_line,
                format!("{section} section has {} entries, header declares {expected}", lines.len()),
            ));
        }
        for line in lines {
            let bad = |msg: &str| parse_err(name, line.number, format!("{section}: {msg}"));
            match section.as_str() {
                "Masses" => {
                    let t: usize = field(line, 0, "atom type", name)?;
                    let m: f64 = field(line, 1, "mass", name)?;
                    if !(1..=2).contains(&t) {
                        return Err(bad("atom type must be 1 or 2"));
                    }
                    masses[t - 1] = m;
                }
                "Atoms" => {
                    if line.fields.len() != 6 && line.fields.len() != 9 {
                        return Err(bad("expected 6 or 9 columns"));
                    }
                    let id: usize = field(line, 0, "atom id", name)?;
                    let t: u32 = field(line, 2, "atom type", name)?;
                    let species = Species::from_atom_type(t).ok_or_else(|| bad("atom type must be 1 or 2"))?;
                    let p = Vec3::new(
                        field(line, 3, "x", name)?,
                        field(line, 4, "y", name)?,
                        field(line, 5, "z", name)?,
                    );
                    let mut image = [0; 3];
                    if line.fields.len() == 9 {
                        for (a, img) in image.iter_mut().enumerate() {
                            *img = field(line, 6 + a, "image flag", name)?;
                        }
                    }
                    let slot = id
                        .checked_sub(1)
                        .and_then(|i| beads.get_mut(i))
                        .ok_or_else(|| bad("atom id out of range"))?;
                    if slot.is_some() {
                        return Err(bad("duplicate atom id"));
                    }
                    *slot = Some(Bead::new(id - 1, species, p, image));
                }
                "Velocities" => {
                    let id: usize = field(line, 0, "atom id", name)?;
                    let v = Vec3::new(
                        field(line, 1, "vx", name)?,
                        field(line, 2, "vy", name)?,
                        field(line, 3, "vz", name)?,
                    );
                    let slot = id
                        .checked_sub(1)
                        .and_then(|i| velocities.get_mut(i))
                        .ok_or_else(|| bad("atom id out of range"))?;
                    if slot.is_some() {
                        return Err(bad("duplicate atom id"));
                    }
                    *slot = Some(v);
                }
                _ => {
                    let id: usize = field(line, 0, "bond id", name)?;
                    let i: usize = field(line, 2, "atom id", name)?;
                    let j: usize = field(line, 3, "atom id", name)?;
                    if i == 0 || j == 0 || i > n_atoms || j > n_atoms {
                        return Err(bad("bond atom id out of range"));
                    }
                    let slot = id
                        .checked_sub(1)
                        .and_then(|k| bonds.get_mut(k))
                        .ok_or_else(|| bad("bond id out of range"))?;
                    if slot.is_some() {
                        return Err(bad("duplicate bond id"));
                    }
                    *slot = Some(Bond::new(i - 1, j - 1));
                }
            }
        }
    }
    if n_atoms > 0 && !seen.iter().any(|s| s == "Atoms") {
        return Err(parse_err(name, 1, "missing Atoms section"));
    }
    if n_bonds > 0 && !seen.iter().any(|s| s == "Bonds") {
        return Err(parse_err(name, 1, "missing Bonds section"));
    }
    let beads = beads
        .into_iter()
        .zip(velocities)
        .map(|(b, v)| {
            let mut b = b.expect("every atom slot filled once counts match");
            b.velocity = v.unwrap_or(Vec3::ZERO);
            b.mass = masses[b.species.atom_type() as usize - 1];
            b
        })
        .collect();
    Ok(SystemState {
        beads,
        bonds: bonds.into_iter().map(|b| b.expect("every bond slot filled")).collect(),
        topology: Topology::new(polybead_core::Architecture::Linear),
        sim_box,
        step,
    })
}

pub fn write_topology(topology: &Topology, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(topology)?;
    s.push('\n');
    fs::write(path, s).map_err(Error::io(path))
}

pub fn read_topology(path: &Path) -> Result<Topology> {
    let s = fs::read_to_string(path).map_err(Error::io(path))?;
    Ok(serde_json::from_str(&s)?)
}

/// Writes `<stem>.data` and `<stem>.topology.json`.
pub fn write_system(state: &SystemState, dir: &Path, stem: &str) -> Result<()> {
    write_lammps_data(state, &dir.join(format!("{stem}.data")))?;
    write_topology(&state.topology, &dir.join(format!("{stem}.topology.json")))
}

/// Reads a system written by [`write_system`] and checks it.
pub fn read_system(dir: &Path, stem: &str) -> Result<SystemState> {
    let mut state = read_lammps_data(&dir.join(format!("{stem}.data")))?;
    state.topology = read_topology(&dir.join(format!("{stem}.topology.json")))?;
    state.validate()?;
    Ok(state)
}
