//! Masked Cartesian discretization of the disk territory.
//!
//! The disk of radius `r` is covered by an `nx`×`nx` lattice of square cells
//! of width `h = 2r/nx` spanning `[-r, r]²`; a cell belongs to the domain iff
//! its center lies strictly inside the disk. Interior cells carry midpoint
//! quadrature weights `h²`, a 5-point-stencil neighbor table, and — where a
//! stencil arm leaves the domain — boundary faces with axis-aligned outward
//! normals (a staircase approximation of the circle).

use crate::error::ModelError;
use crate::population::{Params, Schedule};

/// Sentinel for a missing stencil neighbor in the packed neighbor table.
const NO_NEIGHBOR: u32 = u32::MAX;

/// Explicit diffusion stability limit for the 2-D 5-point stencil:
/// `nu*dt/h² ≤ 1/4`.
pub const DIFFUSION_STABILITY_LIMIT: f64 = 0.25;

/// Commute relaxation limit: `dt*(λ_m + λ_e) ≤ 1` keeps each population
/// substep a convex combination (and therefore non-negative).
pub const COMMUTE_STABILITY_LIMIT: f64 = 1.0;

/// One interior cell: lattice coordinates and center position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    /// Column index in `0..nx` (x direction).
    pub i: u32,
    /// Row index in `0..nx` (y direction).
    pub j: u32,
    /// Center x coordinate, `(2i + 1 - nx) · r/nx`.
    pub x: f64,
    /// Center y coordinate, `(2j + 1 - nx) · r/nx`.
    pub y: f64,
}

/// One exposed face of an interior cell, where a stencil arm leaves the
/// domain. The face has length `h` and an axis-aligned outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    /// Index of the owning interior cell in the grid's cell list.
    pub cell: u32,
    /// Outward unit normal, one of (±1, 0) or (0, ±1).
    pub normal: [f64; 2],
}

/// The masked disk grid. Immutable after construction; cheap to share by
/// reference across any number of readers.
#[derive(Debug, Clone)]
pub struct Grid {
    radius: f64,
    nx: u32,
    h: f64,
    cells: Vec<Cell>,
    /// Row-major lattice lookup `j*nx + i` → interior index (or `NO_NEIGHBOR`).
    lattice: Vec<u32>,
    /// Per cell `[x-, x+, y-, y+]` interior neighbors (`NO_NEIGHBOR` = face).
    neighbors: Vec<[u32; 4]>,
    boundary_faces: Vec<BoundaryFace>,
    /// Per cell number of boundary faces, `4 - interior degree`.
    face_counts: Vec<u8>,
    id: u64,
}

impl Grid {
    /// Disk radius the mask was built from.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Lattice resolution per axis.
    pub fn nx(&self) -> u32 {
        self.nx
    }

    /// Cell width `2·radius/nx`; also the length of every boundary face.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of interior cells.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Interior cells in deterministic row-major `(j, i)` order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Interior index of lattice site `(i, j)`, if that cell is interior.
    pub fn cell_at(&self, i: u32, j: u32) -> Option<usize> {
        if i >= self.nx || j >= self.nx {
            return None;
        }
        let v = self.lattice[(j * self.nx + i) as usize];
        (v != NO_NEIGHBOR).then_some(v as usize)
    }

    /// The `[x-, x+, y-, y+]` interior neighbors of cell `k`.
    pub fn neighbors(&self, k: usize) -> [Option<usize>; 4] {
        self.neighbors[k].map(|v| (v != NO_NEIGHBOR).then_some(v as usize))
    }

    /// Packed neighbor table for stencil loops; `NO_NEIGHBOR` marks a face.
    pub(crate) fn neighbor_table(&self) -> &[[u32; 4]] {
        &self.neighbors
    }

    /// All exposed faces, in cell order then `[x-, x+, y-, y+]` slot order.
    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    /// Number of boundary faces owned by cell `k` (0 for fully interior).
    pub fn boundary_face_count(&self, k: usize) -> u8 {
        self.face_counts[k]
    }

    /// Per-cell boundary face counts, aligned with the cell list.
    pub(crate) fn face_counts(&self) -> &[u8] {
        &self.face_counts
    }

    /// Total quadrature area `cell_count · h²` (→ π·r² as nx → ∞).
    pub fn area(&self) -> f64 {
        self.cells.len() as f64 * self.h * self.h
    }

    /// Structural identity: equal-argument grids hash identically, so fields
    /// can verify they were built for a compatible grid without holding a
    /// reference to it.
    pub fn id(&self) -> u64 {
        self.id
    }
}

/// FNV-1a over the construction arguments. Deterministic across runs and
/// platforms (no per-process hash seeding).
fn structural_id(radius: f64, nx: u32) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in radius
        .to_bits()
        .to_le_bytes()
        .into_iter()
        .chain(nx.to_le_bytes())
    {
        hash = (hash ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Build the masked disk grid.
///
/// A cell is interior iff its center lies strictly inside the disk. Cell
/// centers are computed as `(2i + 1 - nx) · r/nx`, which makes the mask and
/// the coordinates exactly symmetric under the lattice's axis and diagonal
/// reflections (integer prefactors negate/swap exactly; IEEE products and
/// sums of equal operands agree bit-for-bit).
///
/// Errors: `nx < 4` (the 5-point stencil degenerates) and non-positive or
/// non-finite radius.
pub fn build_disk_grid(radius: f64, nx: u32) -> Result<Grid, ModelError> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(ModelError::BadRadius { radius });
    }
    if nx < 4 {
        return Err(ModelError::GridTooCoarse { nx });
    }

    let n = nx as usize;
    let half = radius / nx as f64; // r/nx: half a cell width
    let h = 2.0 * half;
    let r2 = radius * radius;

    let mut lattice = vec![NO_NEIGHBOR; n * n];
    let mut cells = Vec::new();
    for j in 0..n {
        let y = (2 * j as i64 + 1 - n as i64) as f64 * half;
        for i in 0..n {
            let x = (2 * i as i64 + 1 - n as i64) as f64 * half;
            if x * x + y * y < r2 {
                lattice[j * n + i] = cells.len() as u32;
                cells.push(Cell {
                    i: i as u32,
                    j: j as u32,
                    x,
                    y,
                });
            }
        }
    }

    // Stencil arms in fixed [x-, x+, y-, y+] order; the slot order also fixes
    // the deterministic ordering of the boundary face list.
    const ARMS: [(i64, i64, [f64; 2]); 4] = [
        (-1, 0, [-1.0, 0.0]),
        (1, 0, [1.0, 0.0]),
        (0, -1, [0.0, -1.0]),
        (0, 1, [0.0, 1.0]),
    ];

    let mut neighbors = Vec::with_capacity(cells.len());
    let mut face_counts = vec![0u8; cells.len()];
    let mut boundary_faces = Vec::new();
    for (k, cell) in cells.iter().enumerate() {
        let mut nb = [NO_NEIGHBOR; 4];
        for (slot, (di, dj, normal)) in ARMS.iter().enumerate() {
            let ii = cell.i as i64 + di;
            let jj = cell.j as i64 + dj;
            let interior = if (0..n as i64).contains(&ii) && (0..n as i64).contains(&jj) {
                lattice[jj as usize * n + ii as usize]
            } else {
                NO_NEIGHBOR
            };
            if interior != NO_NEIGHBOR {
                nb[slot] = interior;
            } else {
                face_counts[k] += 1;
                boundary_faces.push(BoundaryFace {
                    cell: k as u32,
                    normal: *normal,
                });
            }
        }
        debug_assert!(
            nb.iter().any(|&v| v != NO_NEIGHBOR),
            "isolated cell {k} has no interior neighbors"
        );
        neighbors.push(nb);
    }

    Ok(Grid {
        radius,
        nx,
        h,
        cells,
        lattice,
        neighbors,
        boundary_faces,
        face_counts,
        id: structural_id(radius, nx),
    })
}

/// Outcome of the pre-run stability check. The engine refuses to start a
/// simulation whose report does not pass.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Substep length, `1/substeps_per_day` (in days).
    pub dt: f64,
    /// `nu*dt/h²`, bounded by [`DIFFUSION_STABILITY_LIMIT`].
    pub diffusion_ratio: f64,
    /// `dt*(λ_m + λ_e)`, bounded by [`COMMUTE_STABILITY_LIMIT`].
    pub commute_weight: f64,
    /// One formatted line per violated bound, with the offending values.
    pub violations: Vec<String>,
}

impl StabilityReport {
    /// True iff no bound is violated.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "stability report (dt = {}):", self.dt)?;
        writeln!(
            f,
            "  diffusion: nu*dt/h^2 = {} (limit {})",
            self.diffusion_ratio, DIFFUSION_STABILITY_LIMIT
        )?;
        writeln!(
            f,
            "  commute:   dt*(lambda_m+lambda_e) = {} (limit {})",
            self.commute_weight, COMMUTE_STABILITY_LIMIT
        )?;
        if self.violations.is_empty() {
            write!(f, "  all bounds satisfied")
        } else {
            for v in &self.violations {
                writeln!(f, "  VIOLATED: {v}")?;
            }
            write!(f, "  {} bound(s) violated", self.violations.len())
        }
    }
}

/// Check the explicit-scheme stability bounds for a prospective run.
///
/// Passes iff `nu*dt/h² ≤ 0.25` (explicit diffusion) and
/// `dt*(λ_m + λ_e) ≤ 1` (the commute update stays a convex combination,
/// keeping P ≥ 0), with `dt = 1/substeps_per_day`. Always returns a report;
/// callers decide whether a failed report is fatal.
// Negated comparisons on purpose: a NaN ratio must count as a violation.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn enforce_stability(
    params: &Params,
    schedule: &Schedule,
    grid: &Grid,
    substeps_per_day: u32,
) -> StabilityReport {
    let dt = 1.0 / substeps_per_day as f64;
    let diffusion_ratio = params.nu * dt / (grid.h() * grid.h());
    let commute_weight = dt * (schedule.lambda_m + schedule.lambda_e);

    let mut violations = Vec::new();
    if !(diffusion_ratio <= DIFFUSION_STABILITY_LIMIT) {
        violations.push(format!(
            "nu*dt/h^2 = {diffusion_ratio} exceeds {DIFFUSION_STABILITY_LIMIT} \
             (nu = {}, dt = {dt}, h = {})",
            params.nu,
            grid.h()
        ));
    }
    if !(commute_weight <= COMMUTE_STABILITY_LIMIT) {
        violations.push(format!(
            "dt*(lambda_m+lambda_e) = {commute_weight} exceeds {COMMUTE_STABILITY_LIMIT} \
             (lambda_m = {}, lambda_e = {}, dt = {dt})",
            schedule.lambda_m, schedule.lambda_e
        ));
    }

    StabilityReport {
        dt,
        diffusion_ratio,
        commute_weight,
        violations,
    }
}
