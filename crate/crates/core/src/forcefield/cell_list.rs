use alloc::vec;
use alloc::vec::Vec;

use crate::{SimBox, Vec3};

/// Forward half of the 27-cell stencil; together with the home cell it
/// visits each neighbouring cell pair exactly once.
const HALF_STENCIL: [[i32; 3]; 13] = [
    [1, 0, 0],
    [-1, 1, 0],
    [0, 1, 0],
    [1, 1, 0],
    [-1, -1, 1],
    [0, -1, 1],
    [1, -1, 1],
    [-1, 0, 1],
    [0, 0, 1],
    [1, 0, 1],
    [-1, 1, 1],
    [0, 1, 1],
    [1, 1, 1],
];

/// Linked-cell decomposition of a periodic box.
///
/// Beads are bucketed into `n^3` cubic cells of side `>= r_cut`, stored in
/// compressed form (`starts` delimits each cell's slice of `members`). When
/// fewer than three cells fit along an edge the stencil would alias periodic
/// images, so the list degrades to plain all-pairs iteration.
#[derive(Clone, Debug)]
pub struct CellList {
    cells_per_side: usize,
    cell_side: f64,
    starts: Vec<usize>,
    members: Vec<usize>,
    n_beads: usize,
}

impl CellList {
    pub fn build(positions: &[Vec3], sim_box: SimBox, r_cut: f64) -> CellList {
        let side = sim_box.side();
        let n = libm::floor(side / r_cut) as usize;
        let n_beads = positions.len();
        if n < 3 {
            return CellList {
                cells_per_side: 0,
                cell_side: side,
                starts: Vec::new(),
                members: Vec::new(),
                n_beads,
            };
        }
        let cell_side = side / n as f64;
        let n_cells = n * n * n;
        let cell_of: Vec<usize> = positions
            .iter()
            .map(|p| {
                let idx = |c: f64| ((libm::floor(c / cell_side) as isize).clamp(0, n as isize - 1)) as usize;
                idx(p.x) + n * (idx(p.y) + n * idx(p.z))
            })
            .collect();

        // counting sort keeps bead order inside each cell deterministic
        let mut starts = vec![0usize; n_cells + 1];
        for &c in &cell_of {
            starts[c + 1] += 1;
        }
        for c in 0..n_cells {
            starts[c + 1] += starts[c];
        }
        let mut fill = starts.clone();
        let mut members = vec![0usize; n_beads];
        for (bead, &c) in cell_of.iter().enumerate() {
            members[fill[c]] = bead;
            fill[c] += 1;
        }
        CellList {
            cells_per_side: n,
            cell_side,
            starts,
            members,
            n_beads,
        }
    }

    /// True when the box is too small for a 3x3x3 stencil.
    pub fn is_all_pairs(&self) -> bool {
        self.cells_per_side == 0
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn cell(&self, index: usize) -> &[usize] {
        &self.members[self.starts[index]..self.starts[index + 1]]
    }

    /// Calls `f(i, j)` for candidate pairs. Every unordered pair whose
    /// minimum-image distance is within the build cutoff is visited exactly
    /// once; pairs further apart may or may not be visited.
    pub fn for_each_pair(&self, mut f: impl FnMut(usize, usize)) {
        if self.is_all_pairs() {
            for i in 0..self.n_beads {
                for j in (i + 1)..self.n_beads {
                    f(i, j);
                }
            }
            return;
        }
        let n = self.cells_per_side as i32;
        let wrap = |c: i32| ((c % n) + n) % n;
        for cz in 0..n {
            for cy in 0..n {
                for cx in 0..n {
                    let home = (cx + n * (cy + n * cz)) as usize;
                    let here = self.cell(home);
                    for (k, &i) in here.iter().enumerate() {
                        for &j in &here[k + 1..] {
                            f(i, j);
                        }
                    }
                    for off in HALF_STENCIL {
                        let nb = (wrap(cx + off[0]) + n * (wrap(cy + off[1]) + n * wrap(cz + off[2])))
                            as usize;
                        let there = self.cell(nb);
                        for &i in here {
                            for &j in there {
                                f(i, j);
                            }
                        }
                    }
                }
            }
        }
    }
}
