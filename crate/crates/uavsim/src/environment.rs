//! Urban building map and line-of-sight queries.
//!
//! The city is a rectangular region rasterized into square cells, each holding
//! one building height (0 = open ground). A link between a UAV and a ground
//! point is line-of-sight iff the interpolated link height clears every
//! building cell the link's ground projection walks through.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in meters; `z` is height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Full 3-D Euclidean distance.
    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Distance between the ground projections.
    pub fn ground_distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Rectangular simulation region `[0, width] x [0, height]` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl Region {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && x <= self.width && y >= 0.0 && y <= self.height
    }

    /// Fold a coordinate pair back into the region by reflecting at the
    /// boundaries, mirroring how mobile users bounce off the region edge.
    pub fn reflect(&self, x: f64, y: f64) -> (f64, f64) {
        (fold(x, self.width), fold(y, self.height))
    }
}

fn fold(mut v: f64, len: f64) -> f64 {
    loop {
        if v < 0.0 {
            v = -v;
        } else if v > len {
            v = 2.0 * len - v;
        } else {
            return v;
        }
    }
}

/// City generation knobs: per-cell independent building occupancy with
/// uniform heights.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityParams {
    /// Square cell edge length in meters.
    pub cell_size_m: f64,
    /// Probability that a cell hosts a building.
    pub density: f64,
    /// `[min, max]` building height in meters.
    pub height_range_m: [f64; 2],
}

impl Default for CityParams {
    fn default() -> Self {
        Self {
            cell_size_m: 10.0,
            density: 0.25,
            height_range_m: [10.0, 60.0],
        }
    }
}

/// Rasterized city: per-cell building heights over a rectangular region.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingGrid {
    region: Region,
    cell_size: f64,
    cols: usize,
    rows: usize,
    /// Row-major heights, `heights[row * cols + col]`.
    heights: Vec<f64>,
}

impl BuildingGrid {
    /// Build a grid from explicit heights. Grid dimensions must equal
    /// `ceil(region / cell_size)` and all heights must be non-negative.
    pub fn new(region: Region, cell_size: f64, heights: Vec<f64>) -> Result<Self> {
        if !(cell_size > 0.0) {
            return Err(Error::invalid("cell size must be positive"));
        }
        if !(region.width > 0.0) || !(region.height > 0.0) {
            return Err(Error::invalid("region dimensions must be positive"));
        }
        let cols = (region.width / cell_size).ceil() as usize;
        let rows = (region.height / cell_size).ceil() as usize;
        if heights.len() != cols * rows {
            return Err(Error::invalid(format!(
                "expected {} heights for a {}x{} grid, got {}",
                cols * rows,
                cols,
                rows,
                heights.len()
            )));
        }
        if heights.iter().any(|h| !(*h >= 0.0)) {
            return Err(Error::invalid("building heights must be >= 0"));
        }
        Ok(Self {
            region,
            cell_size,
            cols,
            rows,
            heights,
        })
    }

    /// All-ground grid (no buildings).
    pub fn flat(region: Region, cell_size: f64) -> Result<Self> {
        let cols = (region.width / cell_size).ceil() as usize;
        let rows = (region.height / cell_size).ceil() as usize;
        Self::new(region, cell_size, vec![0.0; cols * rows])
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Cell indices containing a ground position (clamped to the grid).
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        (
            clamp_index(x / self.cell_size, self.cols),
            clamp_index(y / self.cell_size, self.rows),
        )
    }

    pub fn cell_height(&self, col: usize, row: usize) -> f64 {
        self.heights[row * self.cols + col]
    }

    pub fn set_cell_height(&mut self, col: usize, row: usize, h: f64) {
        self.heights[row * self.cols + col] = h;
    }

    /// Building height at a ground position.
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        let (c, r) = self.cell_of(x, y);
        self.cell_height(c, r)
    }

    /// Serialize as plain text: a `width height cell_size` header line,
    /// then one space-separated line of heights per grid row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.region.width, self.region.height, self.cell_size
        );
        for row in 0..self.rows {
            let line = self.heights[row * self.cols..(row + 1) * self.cols]
                .iter()
                .map(|h| h.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let head: Vec<f64> = header
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("grid header: {e}")))?;
        if head.len() != 3 {
            return Err(Error::Parse(
                "grid header must be `width height cell_size`".into(),
            ));
        }
        let mut heights = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.split_whitespace() {
                heights.push(
                    tok.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("grid height: {e}")))?,
                );
            }
        }
        Self::new(Region::new(head[0], head[1]), head[2], heights)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

fn clamp_index(raw: f64, n: usize) -> usize {
    let idx = raw.floor();
    if idx < 0.0 {
        0
    } else if idx as usize >= n {
        n - 1
    } else {
        idx as usize
    }
}

/// Generate a random city: each cell independently hosts a building with the
/// configured density, heights uniform in the configured range.
/// Deterministic for a given rng state.
pub fn generate_city<R: Rng + ?Sized>(
    region: Region,
    params: &CityParams,
    rng: &mut R,
) -> Result<BuildingGrid> {
    if !(params.cell_size_m > 0.0) {
        return Err(Error::invalid("cell size must be positive"));
    }
    if !(0.0..=1.0).contains(&params.density) {
        return Err(Error::invalid("building density must be in [0, 1]"));
    }
    let [h_min, h_max] = params.height_range_m;
    if h_min > h_max {
        return Err(Error::invalid("building height range is inverted"));
    }
    if h_min < 0.0 {
        return Err(Error::invalid("building heights must be >= 0"));
    }
    let mut grid = BuildingGrid::flat(region, params.cell_size_m)?;
    for row in 0..grid.rows() {
        for col in 0..grid.cols() {
            if rng.random_bool(params.density) {
                grid.set_cell_height(col, row, rng.random_range(h_min..=h_max));
            }
        }
    }
    Ok(grid)
}

/// Which grid line a link crossing sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossedLine {
    /// Vertical line `x = k * cell_size`.
    Vertical(usize),
    /// Horizontal line `y = k * cell_size`.
    Horizontal(usize),
}

/// One intersection of a link's ground projection with a grid line.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    /// Parameter along the segment from `a` (0) to `b` (1).
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Interpolated link height at this ground position.
    pub z: f64,
    pub line: CrossedLine,
}

/// Every point where the ground projection of segment `[a, b]` crosses a
/// grid line, with the link height interpolated at each, sorted by distance
/// from `a`. Degenerate vertical links (equal ground projections) yield an
/// empty list.
pub fn crossing_points(a: &Point3, b: &Point3, grid: &BuildingGrid) -> Vec<Crossing> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    if dx == 0.0 && dy == 0.0 {
        return Vec::new();
    }
    let cell = grid.cell_size();
    let mut out = Vec::new();

    if dx != 0.0 {
        let (lo, hi) = if a.x < b.x { (a.x, b.x) } else { (b.x, a.x) };
        let k_lo = (lo / cell).floor() as i64 + 1;
        let k_hi = (hi / cell).ceil() as i64 - 1;
        for k in k_lo..=k_hi {
            let x = k as f64 * cell;
            if x <= lo || x >= hi {
                continue; // endpoint sitting exactly on a line is handled as an endpoint
            }
            let t = (x - a.x) / dx;
            out.push(Crossing {
                t,
                x,
                y: a.y + t * dy,
                z: a.z + t * (b.z - a.z),
                line: CrossedLine::Vertical(k as usize),
            });
        }
    }
    if dy != 0.0 {
        let (lo, hi) = if a.y < b.y { (a.y, b.y) } else { (b.y, a.y) };
        let k_lo = (lo / cell).floor() as i64 + 1;
        let k_hi = (hi / cell).ceil() as i64 - 1;
        for k in k_lo..=k_hi {
            let y = k as f64 * cell;
            if y <= lo || y >= hi {
                continue;
            }
            let t = (y - a.y) / dy;
            out.push(Crossing {
                t,
                x: a.x + t * dx,
                y,
                z: a.z + t * (b.z - a.z),
                line: CrossedLine::Horizontal(k as usize),
            });
        }
    }
    out.sort_by(|p, q| p.t.partial_cmp(&q.t).unwrap());
    out
}

/// LoS indicator for a UAV-to-ground-point link: true iff the link height
/// strictly clears every building cell its ground projection touches.
/// A crossing exactly at a building's roof height is blocked, and both cells
/// sharing a crossed line are tested (all four at a corner).
pub fn los_link(uav: &Point3, user: &Point3, grid: &BuildingGrid) -> Result<bool> {
    let region = grid.region();
    for p in [uav, user] {
        if !region.contains(p.x, p.y) {
            return Err(Error::OutOfRegion {
                x: p.x,
                y: p.y,
                width: region.width,
                height: region.height,
            });
        }
    }

    // Endpoint cells are checked at the endpoint heights; the link height is
    // monotone along the segment, so the endpoint is the worst point of its
    // own cell's traversal.
    if user.z <= grid.height_at(user.x, user.y) || uav.z <= grid.height_at(uav.x, uav.y) {
        return Ok(false);
    }

    let cell = grid.cell_size();
    for c in crossing_points(uav, user, grid) {
        let (cols, rows) = match c.line {
            CrossedLine::Vertical(k) => (
                line_sides(k, grid.cols()),
                point_cells(c.y, cell, grid.rows()),
            ),
            CrossedLine::Horizontal(k) => (
                point_cells(c.x, cell, grid.cols()),
                line_sides(k, grid.rows()),
            ),
        };
        for &col in cols.iter() {
            for &row in rows.iter() {
                if c.z <= grid.cell_height(col, row) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Up to two cell indices, stack allocated.
#[derive(Debug, Clone, Copy)]
struct CellPair {
    cells: [usize; 2],
    len: usize,
}

impl CellPair {
    fn one(c: usize) -> Self {
        Self { cells: [c, 0], len: 1 }
    }

    fn iter(&self) -> impl Iterator<Item = &usize> {
        self.cells[..self.len].iter()
    }
}

/// Cells on both sides of interior grid line `k`, clipped at the region edge.
fn line_sides(k: usize, n: usize) -> CellPair {
    let mut cells = [0usize; 2];
    let mut len = 0;
    if k >= 1 && k - 1 < n {
        cells[len] = k - 1;
        len += 1;
    }
    if k < n {
        cells[len] = k;
        len += 1;
    }
    CellPair { cells, len }
}

/// Cell indices whose closure contains coordinate `v`: one in the interior,
/// both neighbors when `v` sits exactly on a grid line (corner crossings are
/// tested conservatively against all adjacent cells).
fn point_cells(v: f64, cell: f64, n: usize) -> CellPair {
    let k = (v / cell).floor();
    if k * cell == v && k >= 0.0 {
        line_sides(k as usize, n)
    } else {
        CellPair::one(clamp_index(v / cell, n))
    }
}
