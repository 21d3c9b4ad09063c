//! Text dump trajectories with unwrapped coordinates
//! (`ITEM: ATOMS id type xu yu zu`).

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use polybead_core::engine::{Trajectory, TrajectoryFrame};
use polybead_core::{SimBox, Species, Vec3};

use crate::{Error, Result};

pub fn dump_frame_string(frame: &TrajectoryFrame, sim_box: SimBox, species: &[Species]) -> String {
    let mut s = String::with_capacity(80 * frame.positions.len() + 200);
    let b = sim_box.side();
    let _ = writeln!(s, "ITEM: TIMESTEP\n{}", frame.step);
    let _ = writeln!(s, "ITEM: NUMBER OF ATOMS\n{}", frame.positions.len());
    s.push_str("ITEM: BOX BOUNDS pp pp pp\n");
    for _ in 0..3 {
        let _ = writeln!(s, "{:.16e} {:.16e}", 0.0, b);
    }
    s.push_str("ITEM: ATOMS id type xu yu zu\n");
    for (i, (p, sp)) in frame.positions.iter().zip(species).enumerate() {
        let _ = writeln!(s, "{} {} {:.16e} {:.16e} {:.16e}", i + 1, sp.atom_type(), p.x, p.y, p.z);
    }
    s
}

pub fn write_dump_frame(
    out: &mut impl Write,
    frame: &TrajectoryFrame,
    sim_box: SimBox,
    species: &[Species],
) -> std::io::Result<()> {
    out.write_all(dump_frame_string(frame, sim_box, species).as_bytes())
}

pub fn write_dump(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(Error::io(path))?;
    let mut out = BufWriter::new(file);
    for frame in &traj.frames {
        write_dump_frame(&mut out, frame, traj.sim_box, &traj.species).map_err(Error::io(path))?;
    }
    out.flush().map_err(Error::io(path))
}

pub fn read_dump(path: &Path) -> Result<Trajectory> {
    let file = fs::File::open(path).map_err(Error::io(path))?;
    parse_dump(BufReader::new(file), &path.display().to_string())
}

struct Cursor<'a, R> {
    lines: std::io::Lines<R>,
    line: usize,
    frame: usize,
    name: &'a str,
}

impl<R: BufRead> Cursor<'_, R> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Dump {
            source_name: self.name.to_string(),
            frame: self.frame,
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<Option<String>> {
        match self.lines.next() {
            None => Ok(None),
            Some(l) => {
                self.line += 1;
                l.map(Some).map_err(|e| self.err(e.to_string()))
            }
        }
    }

    fn expect(&mut self, what: &str) -> Result<String> {
        self.next()?.ok_or_else(|| self.err(format!("truncated frame: expected {what}")))
    }

    fn item(&mut self, header: &str) -> Result<()> {
        let l = self.expect(header)?;
        if l.trim() != header {
            return Err(self.err(format!("expected '{header}', found '{}'", l.trim())));
        }
        Ok(())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad {what} '{s}'")))
    }
}

/// Reads every frame in order. Atoms are reordered by id; all frames must
/// share the atom count, box and types of the first.
pub fn parse_dump(reader: impl BufRead, name: &str) -> Result<Trajectory> {
    let mut c = Cursor {
        lines: reader.lines(),
        line: 0,
        frame: 0,
        name,
    };
    let mut traj: Option<Trajectory> = None;
    loop {
        let header = loop {
            match c.next()? {
                None => {
                    return traj.ok_or_else(|| c.err("no frames"));
                }
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => break l,
            }
        };
        if header.trim() != "ITEM: TIMESTEP" {
            return Err(c.err(format!("expected 'ITEM: TIMESTEP', found '{}'", header.trim())));
        }
        let step: u64 = {
            let l = c.expect("timestep")?;
            c.parse(l.trim(), "timestep")?
        };
        c.item("ITEM: NUMBER OF ATOMS")?;
        let n: usize = {
            let l = c.expect("atom count")?;
            c.parse(l.trim(), "atom count")?
        };
        c.item("ITEM: BOX BOUNDS pp pp pp")?;
        let mut side = None;
        for _ in 0..3 {
            let l = c.expect("box bounds")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 {
                return Err(c.err("box bounds need two values"));
            }
            let lo: f64 = c.parse(f[0], "box bound")?;
            let hi: f64 = c.parse(f[1], "box bound")?;
            if lo != 0.0 || side.is_some_and(|s| s != hi) {
                return Err(c.err("box must be cubic and start at 0"));
            }
            side = Some(hi);
        }
        let sim_box = SimBox::new(side.unwrap_or(0.0)).map_err(|e| c.err(e.to_string()))?;
        c.item("ITEM: ATOMS id type xu yu zu")?;
        let mut positions = vec![None; n];
        let mut species = vec![Species::Polymer; n];
        for _ in 0..n {
            let l = c.expect("atom line")?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 5 {
                return Err(c.err("atom lines need 5 columns"));
            }
            let id: usize = c.parse(f[0], "atom id")?;
            let t: u32 = c.parse(f[1], "atom type")?;
            let p = Vec3::new(c.parse(f[2], "xu")?, c.parse(f[3], "yu")?, c.parse(f[4], "zu")?);
            if id == 0 || id > n {
                return Err(c.err(format!("atom id {id} out of range")));
            }
            if positions[id - 1].is_some() {
                return Err(c.err(format!("duplicate atom id {id}")));
            }
            positions[id - 1] = Some(p);
            species[id - 1] = Species::from_atom_type(t).ok_or_else(|| c.err(format!("unknown atom type {t}")))?;
        }
        let frame = TrajectoryFrame {
            step,
            positions: positions.into_iter().map(|p| p.expect("all ids seen")).collect(),
        };
        match &mut traj {
            None => {
                let mut t = Trajectory::new(sim_box, species);
                t.push(frame).map_err(|e| c.err(e.to_string()))?;
                traj = Some(t);
            }
            Some(t) => {
                if t.sim_box != sim_box || t.species != species {
                    return Err(c.err("box or atom types differ from the first frame"));
                }
                t.push(frame).map_err(|e| c.err(e.to_string()))?;
            }
        }
        c.frame += 1;
    }
}
