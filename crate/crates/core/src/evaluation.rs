//! Synthetic floor plans with known transforms, error metrics and the
//! benchmark table.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{angle_distance, Point2, RigidMotion, RigidTransform2D};
use crate::map_io::{Cell, GridMap};
use crate::segmentation::{segment_grid_map, AreaGraph};
use crate::transform::{match_graphs, overlap_percentage, MatchConfig};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            Point2::new(self.x0, self.y0),
            Point2::new(self.x1, self.y0),
            Point2::new(self.x1, self.y1),
            Point2::new(self.x0, self.y1),
        ]
    }
}

/// Cell noise applied to the transformed map only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Noise {
    /// Probability that an occupied cell reads as free (missed wall return).
    pub dropout: f64,
    /// Probability that a free cell reads as occupied.
    pub speckle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Corridor bands stacked vertically, each with a room row on either side.
    pub bands: usize,
    pub rooms_per_row: usize,
    /// (min, max) room width along the corridor (m).
    pub room_width: (f64, f64),
    /// (min, max) room depth away from the corridor (m).
    pub room_depth: (f64, f64),
    pub corridor_width: f64,
    pub door_width: f64,
    pub wall_thickness: f64,
    pub resolution: f64,
    /// Chance of a door between two neighbouring rooms.
    pub extra_door_probability: f64,
    /// Chance that a room loses a corner block (L shape).
    pub notch_probability: f64,
    /// Maps map A coordinates into map B.
    pub gt: RigidTransform2D,
    pub noise: Noise,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            bands: 1,
            rooms_per_row: 6,
            room_width: (3.5, 6.0),
            room_depth: (3.5, 5.5),
            corridor_width: 2.4,
            door_width: 1.0,
            wall_thickness: 0.15,
            resolution: 0.05,
            extra_door_probability: 0.35,
            notch_probability: 0.3,
            gt: RigidTransform2D::identity(),
            noise: Noise::default(),
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.bands == 0 || self.rooms_per_row == 0 {
            return cfg(format!(
                "floor plan needs at least 2 rooms, got {} band(s) of {} room(s) per row",
                self.bands, self.rooms_per_row
            ));
        }
        for (name, v) in [
            ("corridor width", self.corridor_width),
            ("door width", self.door_width),
            ("wall thickness", self.wall_thickness),
            ("resolution", self.resolution),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return cfg(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, (lo, hi)) in [("room width", self.room_width), ("room depth", self.room_depth)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return cfg(format!("{name} range must be ordered, got ({lo}, {hi})"));
            }
            if lo < 2.0 * self.door_width + 0.6 {
                return cfg(format!(
                    "{name} {lo} is too small for the door width {}",
                    self.door_width
                ));
            }
        }
        for (name, p) in [
            ("dropout", self.noise.dropout),
            ("speckle", self.noise.speckle),
            ("extra door probability", self.extra_door_probability),
            ("notch probability", self.notch_probability),
        ] {
            if !(0.0..1.0).contains(&p) {
                return cfg(format!("{name} must be in [0, 1), got {p}"));
            }
        }
        Ok(())
    }
}

/// Free-space rectangles of a floor plan and its outer wall footprint.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorPlan {
    pub free: Vec<Rect>,
    pub footprint: Rect,
    pub rooms: usize,
}

impl FloorPlan {
    /// Larger side of the footprint (m).
    pub fn extent(&self) -> f64 {
        (self.footprint.x1 - self.footprint.x0).max(self.footprint.y1 - self.footprint.y0)
    }

    fn classify(&self, p: Point2) -> Cell {
        if self.free.iter().any(|r| r.contains(p)) {
            Cell::Free
        } else if self.footprint.contains(p) {
            Cell::Occupied
        } else {
            Cell::Unknown
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Lays out the rooms, corridors and doors of a spec.
pub fn floor_plan(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<FloorPlan> {
    spec.validate()?;
    let wt = spec.wall_thickness;
    let cw = spec.corridor_width;
    let dw = spec.door_width;
    let spine = spec.bands > 1;
    let x_start = if spine { cw + wt } else { 0.0 };
    let mut free = Vec::new();
    let mut rooms = 0;
    let mut y0 = 0.0;
    let mut length: f64 = 0.0;
    let mut corridors = Vec::new();

    for _ in 0..spec.bands {
        let depth_bottom = uniform(rng, spec.room_depth);
        let depth_top = uniform(rng, spec.room_depth);
        let widths: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..spec.rooms_per_row).map(|_| uniform(rng, spec.room_width)).collect())
            .collect();
        let row_len = |w: &Vec<f64>| w.iter().sum::<f64>() + wt * (w.len() - 1) as f64;
        let band_len = row_len(&widths[0]).max(row_len(&widths[1]));
        length = length.max(band_len);

        let corridor_y0 = y0 + depth_bottom + wt;
        let corridor_y1 = corridor_y0 + cw;
        corridors.push((corridor_y0, corridor_y1));
        let rows = [(y0, depth_bottom, true), (corridor_y1 + wt, depth_top, false)];
        for (row, &(ry, depth, below)) in rows.iter().enumerate() {
            let mut x = x_start;
            let n = widths[row].len();
            for (i, &w0) in widths[row].iter().enumerate() {
                // The last room absorbs any length difference between rows.
                let w = if i + 1 == n { x_start + band_len - x } else { w0 };
                let room = Rect::new(x, ry, x + w, ry + depth);
                rooms += 1;
                if rng.gen_bool(spec.notch_probability) {
                    let nw = w * rng.gen_range(0.25..0.4);
                    let nd = depth * rng.gen_range(0.25..0.4);
                    let left = rng.gen_bool(0.5);
                    // Notch on the side away from the corridor.
                    let (far_y0, far_y1, near_y0, near_y1) = if below {
                        (room.y0, room.y0 + nd, room.y0 + nd, room.y1)
                    } else {
                        (room.y1 - nd, room.y1, room.y0, room.y1 - nd)
                    };
                    let (fx0, fx1) = if left {
                        (room.x0 + nw, room.x1)
                    } else {
                        (room.x0, room.x1 - nw)
                    };
                    free.push(Rect::new(fx0, far_y0, fx1, far_y1));
                    free.push(Rect::new(room.x0, near_y0, room.x1, near_y1));
                } else {
                    free.push(room);
                }
                // Door into the corridor.
                let m = 0.3 + dw / 2.0;
                let c = uniform(rng, (room.x0 + m, room.x1 - m));
                let (dy0, dy1) = if below {
                    (room.y1 - 0.1, corridor_y0 + 0.1)
                } else {
                    (corridor_y1 - 0.1, room.y0 + 0.1)
                };
                free.push(Rect::new(c - dw / 2.0, dy0, c + dw / 2.0, dy1));
                // Door to the next room in the row, on the corridor half.
                if i + 1 < n && rng.gen_bool(spec.extra_door_probability) {
                    let (lo, hi) = if below {
                        (room.y0 + depth / 2.0 + dw / 2.0, room.y1 - 0.3 - dw / 2.0)
                    } else {
                        (room.y0 + 0.3 + dw / 2.0, room.y0 + depth / 2.0 - dw / 2.0)
                    };
                    let c = uniform(rng, (lo, hi));
                    free.push(Rect::new(room.x1 - 0.1, c - dw / 2.0, room.x1 + wt + 0.1, c + dw / 2.0));
                }
                x += w + wt;
            }
        }
        y0 = corridor_y1 + wt + depth_top + wt;
    }
    let corridor_x0 = if spine { 0.0 } else { x_start };
    for &(cy0, cy1) in &corridors {
        free.push(Rect::new(corridor_x0, cy0, x_start + length, cy1));
    }
    if spine {
        let (first, last) = (corridors[0], corridors[corridors.len() - 1]);
        free.push(Rect::new(0.0, first.0, cw, last.1));
    }
    let footprint = Rect::new(-wt, -wt, x_start + length + wt, y0);
    Ok(FloorPlan { free, footprint, rooms })
}

/// Rasterizes `plan` into a grid whose frame maps into the plan frame by
/// `to_plan`. Cells are classified at their centers.
pub fn render_plan(plan: &FloorPlan, to_plan: &RigidTransform2D, resolution: f64) -> Result<GridMap> {
    let margin = 0.5;
    let from_plan = to_plan.inverse();
    let pts: Vec<Point2> = plan.footprint.corners().iter().map(|&p| from_plan.apply(p)).collect();
    let min_x = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - margin;
    let min_y = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - margin;
    let max_x = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + margin;
    let max_y = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + margin;
    let origin = Point2::new(
        (min_x / resolution).floor() * resolution,
        (min_y / resolution).floor() * resolution,
    );
    let width = ((max_x - origin.x) / resolution).ceil() as usize;
    let height = ((max_y - origin.y) / resolution).ceil() as usize;
    let mut g = GridMap::filled(width, height, Cell::Unknown, resolution, origin)?;
    for r in 0..height {
        for c in 0..width {
            let p = to_plan.apply(g.cell_center(r, c));
            g.set(r, c, plan.classify(p));
        }
    }
    Ok(g)
}

pub fn apply_noise(g: &mut GridMap, noise: &Noise, rng: &mut ChaCha8Rng) {
    if noise.dropout == 0.0 && noise.speckle == 0.0 {
        return;
    }
    for r in 0..g.height() {
        for c in 0..g.width() {
            match g.get(r, c) {
                Cell::Occupied if rng.gen_bool(noise.dropout) => g.set(r, c, Cell::Free),
                Cell::Free if rng.gen_bool(noise.speckle) => g.set(r, c, Cell::Occupied),
                _ => {}
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    /// Transformed, noisy copy.
    pub a: GridMap,
    /// Rendered floor plan.
    pub b: GridMap,
    /// Maps map A coordinates into map B (what matching should return).
    pub gt: RigidTransform2D,
    pub plan: FloorPlan,
}

/// Renders a floor plan as map B and a copy moved by `gt⁻¹` (so that `gt`
/// carries A onto B) as map A, with noise on A only.
pub fn generate_synthetic_pair(spec: &SyntheticSpec) -> Result<SyntheticPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let plan = floor_plan(spec, &mut rng)?;
    let b = render_plan(&plan, &RigidTransform2D::identity(), spec.resolution)?;
    let mut a = render_plan(&plan, &spec.gt, spec.resolution)?;
    apply_noise(&mut a, &spec.noise, &mut rng);
    Ok(SyntheticPair {
        a,
        b,
        gt: spec.gt,
        plan,
    })
}

/// Rotation uniform in (−π, π], translation uniform in a disc of radius `max_t`.
pub fn random_transform(rng: &mut ChaCha8Rng, max_t: f64) -> RigidTransform2D {
    let theta = std::f64::consts::PI - rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let r = max_t * rng.gen_range(0.0f64..1.0).sqrt();
    let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    RigidTransform2D::new(theta, Point2::new(r * phi.cos(), r * phi.sin()))
}

/// [`random_transform`] drawn from its own seeded generator.
pub fn seeded_transform(seed: u64, max_t: f64) -> RigidTransform2D {
    random_transform(&mut ChaCha8Rng::seed_from_u64(seed), max_t)
}

/// Area correspondences implied by a known transform: each area of A is
/// paired with the area of B it overlaps most once moved by `gt`, if that
/// overlap percentage reaches `min_overlap`.
pub fn ground_truth_pairs(a: &AreaGraph, b: &AreaGraph, gt: &RigidTransform2D, min_overlap: f64) -> Vec<(u32, u32)> {
    a.areas()
        .iter()
        .filter_map(|x| {
            let moved = x.polygon.transformed(gt);
            b.areas()
                .iter()
                .map(|y| (y.id, overlap_percentage(&moved, &y.polygon)))
                .filter(|&(_, op)| op >= min_overlap)
                .max_by(|p, q| p.1.total_cmp(&q.1).then(q.0.cmp(&p.0)))
                .map(|(id, _)| (x.id, id))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub rotation_deg: f64,
    pub translation_m: f64,
}

impl Tolerances {
    /// 3° and two cells.
    pub fn for_resolution(resolution: f64) -> Self {
        Self {
            rotation_deg: 3.0,
            translation_m: 2.0 * resolution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub rotation_error_deg: f64,
    pub translation_error_m: f64,
    pub success: bool,
}

/// Compares an estimated transform with the truth. The translation error is
/// the distance between where the two transforms send `centroid`.
pub fn evaluate(result: &RigidTransform2D, gt: &RigidTransform2D, centroid: Point2, tol: &Tolerances) -> EvalReport {
    let rotation_error_deg = angle_distance(result.theta, gt.theta).to_degrees();
    let translation_error_m = result.apply(centroid).dist(gt.apply(centroid));
    EvalReport {
        rotation_error_deg,
        translation_error_m,
        success: rotation_error_deg <= tol.rotation_deg && translation_error_m <= tol.translation_m,
    }
}

/// Outcome of repeated seeded matching runs on one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatSummary {
    pub runs: usize,
    pub successes: usize,
    pub correctness_pct: f64,
    pub reports: Vec<Option<EvalReport>>,
    pub matching_s: Vec<f64>,
}

/// Repeat protocol: seeds `base_seed..base_seed + repeats`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Repeats {
    pub repeats: usize,
    pub base_seed: u64,
    pub tolerances: Tolerances,
}

/// Matches two segmented maps once per seed; a failed match counts as a
/// miss. Errors are measured at `centroid` (map A frame).
pub fn run_repeats(
    a: &AreaGraph,
    b: &AreaGraph,
    gt: &RigidTransform2D,
    centroid: Point2,
    config: &MatchConfig,
    protocol: &Repeats,
) -> RepeatSummary {
    let repeats = protocol.repeats;
    let tol = &protocol.tolerances;
    let mut reports = Vec::with_capacity(repeats);
    let mut matching_s = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let cfg = MatchConfig {
            seed: Some(protocol.base_seed + r as u64),
            ..config.clone()
        };
        let start = Instant::now();
        let res = match_graphs(a, b, &cfg);
        matching_s.push(start.elapsed().as_secs_f64());
        reports.push(res.ok().map(|m| evaluate(&m.transform, gt, centroid, tol)));
    }
    let successes = reports.iter().filter(|r| r.is_some_and(|r| r.success)).count();
    RepeatSummary {
        runs: repeats,
        successes,
        correctness_pct: if repeats == 0 {
            0.0
        } else {
            100.0 * successes as f64 / repeats as f64
        },
        reports,
        matching_s,
    }
}

/// One map pair for [`bench`].
#[derive(Debug, Clone)]
pub struct BenchPair {
    pub name: String,
    pub a: GridMap,
    pub b: GridMap,
    pub gt: RigidTransform2D,
    /// Time spent loading the maps, counted into the total.
    pub io_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub segmentation_s: f64,
    pub matching_s: f64,
    pub total_s: f64,
    pub correctness_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    pub average: BenchRow,
}

/// Segments every pair once and matches it `repeats` times. Matching time
/// is the mean over repeats; total adds segmentation and loading time.
/// Runs on a single worker thread so timings are comparable.
pub fn bench(pairs: &[BenchPair], repeats: usize, config: &MatchConfig, base_seed: u64) -> Result<BenchTable> {
    if pairs.is_empty() {
        return Err(Error::Config("bench needs at least one map pair".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(format!("cannot start the timing thread: {e}")))?;
    pool.install(|| bench_rows(pairs, repeats, config, base_seed))
}

fn bench_rows(pairs: &[BenchPair], repeats: usize, config: &MatchConfig, base_seed: u64) -> Result<BenchTable> {
    let mut rows = Vec::with_capacity(pairs.len());
    for p in pairs {
        let start = Instant::now();
        let ga = segment_grid_map(&p.a, &config.segmentation)?.graph;
        let gb = segment_grid_map(&p.b, &config.segmentation)?.graph;
        let segmentation_s = start.elapsed().as_secs_f64();
        let protocol = Repeats {
            repeats,
            base_seed,
            tolerances: Tolerances::for_resolution(p.a.resolution().max(p.b.resolution())),
        };
        let summary = run_repeats(&ga, &gb, &p.gt, p.a.free_centroid(), config, &protocol);
        let matching_s = if repeats == 0 {
            0.0
        } else {
            summary.matching_s.iter().sum::<f64>() / repeats as f64
        };
        rows.push(BenchRow {
            name: p.name.clone(),
            segmentation_s,
            matching_s,
            total_s: p.io_s + segmentation_s + matching_s,
            correctness_pct: summary.correctness_pct,
        });
    }
    let n = rows.len() as f64;
    let mean = |f: fn(&BenchRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let average = BenchRow {
        name: "Average".into(),
        segmentation_s: mean(|r| r.segmentation_s),
        matching_s: mean(|r| r.matching_s),
        total_s: mean(|r| r.total_s),
        correctness_pct: mean(|r| r.correctness_pct),
    };
    Ok(BenchTable { rows, average })
}

pub const BENCH_COLUMNS: [&str; 5] = [
    "Map",
    "Segmentation/Arrangement Time (s)",
    "Matching Time (s)",
    "Total Times (s)",
    "Correctness (%)",
];

impl BenchTable {
    fn cells(&self) -> Vec<[String; 5]> {
        self.rows
            .iter()
            .chain(std::iter::once(&self.average))
            .map(|r| {
                [
                    r.name.clone(),
                    format!("{:.3}", r.segmentation_s),
                    format!("{:.3}", r.matching_s),
                    format!("{:.3}", r.total_s),
                    format!("{:.1}", r.correctness_pct),
                ]
            })
            .collect()
    }

    /// Aligned plain-text table, one line per pair plus the average.
    pub fn to_text(&self) -> String {
        let cells = self.cells();
        let mut widths: Vec<usize> = BENCH_COLUMNS.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[String]| {
            let parts: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &BENCH_COLUMNS.map(String::from));
        for row in &cells {
            line(&mut out, row);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = BENCH_COLUMNS.join(",");
        out.push('\n');
        for row in self.cells() {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
