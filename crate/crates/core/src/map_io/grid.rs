use crate::error::{Error, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Free,
    Occupied,
    Unknown,
}

/// Occupancy grid in a y-up world frame.
///
/// Row 0 is the bottom row; cell `(r, c)` covers
/// `origin + [c·res, (c+1)·res] × [r·res, (r+1)·res]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    resolution: f64,
    origin: Point2,
}

impl GridMap {
    pub fn new(width: usize, height: usize, cells: Vec<Cell>, resolution: f64, origin: Point2) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::Config(format!("resolution must be positive, got {resolution}")));
        }
        if width * height != cells.len() {
            return Err(Error::Config(format!(
                "{}x{} grid needs {} cells, got {}",
                width,
                height,
                width * height,
                cells.len()
            )));
        }
        if !origin.is_finite() {
            return Err(Error::Config("origin must be finite".into()));
        }
        Ok(Self {
            width,
            height,
            cells,
            resolution,
            origin,
        })
    }

    pub fn filled(width: usize, height: usize, cell: Cell, resolution: f64, origin: Point2) -> Result<Self> {
        Self::new(width, height, vec![cell; width * height], resolution, origin)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, cell: Cell) {
        self.cells[row * self.width + col] = cell;
    }

    pub fn count(&self, cell: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == cell).count()
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.resolution,
            self.origin.y + (row as f64 + 0.5) * self.resolution,
        )
    }

    /// World coordinates of grid corner `(row, col)`, `row ∈ 0..=height`.
    pub fn corner(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + col as f64 * self.resolution,
            self.origin.y + row as f64 * self.resolution,
        )
    }

    /// Cell containing `p`, if inside the grid.
    pub fn world_to_cell(&self, p: Point2) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.resolution).floor();
        let r = ((p.y - self.origin.y) / self.resolution).floor();
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((r as usize, c as usize))
    }

    /// World-frame axis-aligned extent as (min, max).
    pub fn extent(&self) -> (Point2, Point2) {
        (self.origin, self.corner(self.height, self.width))
    }

    /// Centroid of the free cells, or of the whole grid if none are free.
    pub fn free_centroid(&self) -> Point2 {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c) == Cell::Free {
                    let p = self.cell_center(r, c);
                    sx += p.x;
                    sy += p.y;
                    n += 1;
                }
            }
        }
        if n == 0 {
            let (lo, hi) = self.extent();
            return lo.midpoint(hi);
        }
        Point2::new(sx / n as f64, sy / n as f64)
    }
}
