//! Region outlines from a label grid.
//!
//! Boundaries are traced on the cell-edge lattice and cut into chains at
//! junction corners (where three or more labels meet). Each chain is
//! simplified once and shared by the two regions on either side, so
//! neighbouring polygons keep a common border and never overlap.

use std::collections::BTreeMap;

use super::regions::NO_LABEL;

/// Lattice corner in padded-grid coordinates (row, col).
pub(crate) type Corner = (usize, usize);

#[derive(Debug, Clone)]
pub(crate) struct Chain {
    pub corners: Vec<Corner>,
    /// Label on the left when walking `corners` forward (y up).
    pub left: i32,
    pub right: i32,
}

impl Chain {
    pub fn is_closed(&self) -> bool {
        self.corners.first() == self.corners.last()
    }
}

/// Padded label grid: a `NO_LABEL` frame of one cell on every side.
pub(crate) struct LabelGrid<'a> {
    pub labels: &'a [i32],
    pub pw: usize,
    pub ph: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    E,
    N,
    W,
    S,
}

impl<'a> LabelGrid<'a> {
    fn at(&self, r: usize, c: usize) -> i32 {
        self.labels[r * self.pw + c]
    }

    /// Horizontal edge from corner (i, j) to (i, j+1).
    fn h_boundary(&self, i: usize, j: usize) -> bool {
        i > 0 && i < self.ph && j < self.pw && self.at(i - 1, j) != self.at(i, j)
    }

    /// Vertical edge from corner (i, j) to (i+1, j).
    fn v_boundary(&self, i: usize, j: usize) -> bool {
        j > 0 && j < self.pw && i < self.ph && self.at(i, j - 1) != self.at(i, j)
    }

    fn has_edge(&self, (i, j): Corner, d: Dir) -> bool {
        match d {
            Dir::E => self.h_boundary(i, j),
            Dir::W => j > 0 && self.h_boundary(i, j - 1),
            Dir::N => self.v_boundary(i, j),
            Dir::S => i > 0 && self.v_boundary(i - 1, j),
        }
    }

    fn degree(&self, c: Corner) -> usize {
        [Dir::E, Dir::N, Dir::W, Dir::S]
            .into_iter()
            .filter(|&d| self.has_edge(c, d))
            .count()
    }

    /// (left, right) labels when traversing from `c` in direction `d`.
    fn sides(&self, (i, j): Corner, d: Dir) -> (i32, i32) {
        match d {
            Dir::E => (self.at(i, j), self.at(i - 1, j)),
            Dir::W => (self.at(i - 1, j - 1), self.at(i, j - 1)),
            Dir::N => (self.at(i, j - 1), self.at(i, j)),
            Dir::S => (self.at(i - 1, j), self.at(i - 1, j - 1)),
        }
    }
}

fn step((i, j): Corner, d: Dir) -> Corner {
    match d {
        Dir::E => (i, j + 1),
        Dir::W => (i, j - 1),
        Dir::N => (i + 1, j),
        Dir::S => (i - 1, j),
    }
}

/// Identifier of an undirected lattice edge.
fn edge_key((i, j): Corner, d: Dir) -> (u8, usize, usize) {
    match d {
        Dir::E => (0, i, j),
        Dir::W => (0, i, j - 1),
        Dir::N => (1, i, j),
        Dir::S => (1, i - 1, j),
    }
}

struct Visited {
    h: Vec<bool>,
    v: Vec<bool>,
    pw: usize,
}

impl Visited {
    fn get_mut(&mut self, key: (u8, usize, usize)) -> &mut bool {
        let (k, i, j) = key;
        let idx = i * (self.pw + 1) + j;
        if k == 0 {
            &mut self.h[idx]
        } else {
            &mut self.v[idx]
        }
    }
}

const DIRS: [Dir; 4] = [Dir::E, Dir::N, Dir::W, Dir::S];

/// Splits all label boundaries into chains between junction corners.
///
/// Closed boundaries without junctions become closed chains anchored at the
/// first corner met in row-major order.
pub(crate) fn trace_chains(grid: &LabelGrid<'_>) -> Vec<Chain> {
    let (pw, ph) = (grid.pw, grid.ph);
    let n_corners = (pw + 1) * (ph + 1);
    let mut visited = Visited {
        h: vec![false; n_corners],
        v: vec![false; n_corners],
        pw,
    };
    let is_junction = |c: Corner| grid.degree(c) >= 3;
    let mut chains = Vec::new();

    let walk = |start: Corner, first: Dir, visited: &mut Visited, stop_at_junction: bool| -> Chain {
        let (left, right) = grid.sides(start, first);
        let mut corners = vec![start];
        let mut cur = start;
        let mut d = first;
        loop {
            *visited.get_mut(edge_key(cur, d)) = true;
            cur = step(cur, d);
            corners.push(cur);
            if cur == start || (stop_at_junction && is_junction(cur)) {
                break;
            }
            let next = DIRS
                .into_iter()
                .find(|&nd| grid.has_edge(cur, nd) && !*visited.get_mut(edge_key(cur, nd)));
            match next {
                Some(nd) => d = nd,
                None => break,
            }
        }
        Chain { corners, left, right }
    };

    for i in 0..=ph {
        for j in 0..=pw {
            let c = (i, j);
            if !is_junction(c) {
                continue;
            }
            for d in DIRS {
                if grid.has_edge(c, d) && !*visited.get_mut(edge_key(c, d)) {
                    chains.push(walk(c, d, &mut visited, true));
                }
            }
        }
    }
    // Junction-free loops.
    for i in 0..=ph {
        for j in 0..=pw {
            let c = (i, j);
            for d in [Dir::E, Dir::N] {
                if grid.has_edge(c, d) && !*visited.get_mut(edge_key(c, d)) {
                    chains.push(walk(c, d, &mut visited, false));
                }
            }
        }
    }
    chains
}

type P = (f64, f64);

fn to_f(c: Corner) -> P {
    (c.0 as f64, c.1 as f64)
}

fn perp_dist(p: P, a: P, b: P) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        return ((p.0 - a.0).powi(2) + (p.1 - a.1).powi(2)).sqrt();
    }
    ((p.0 - a.0) * dy - (p.1 - a.1) * dx).abs() / len
}

/// Drops interior corners lying on a straight run.
fn drop_collinear(pts: &[Corner]) -> Vec<Corner> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let mut out = vec![pts[0]];
    for k in 1..pts.len() - 1 {
        let a = *out.last().unwrap();
        let (b, c) = (pts[k], pts[k + 1]);
        let cross = (b.0 as i64 - a.0 as i64) * (c.1 as i64 - b.1 as i64)
            - (b.1 as i64 - a.1 as i64) * (c.0 as i64 - b.0 as i64);
        if cross != 0 {
            out.push(b);
        }
    }
    out.push(*pts.last().unwrap());
    out
}

/// Douglas–Peucker on an open polyline with fixed endpoints.
fn douglas_peucker(pts: &[Corner], tol: f64) -> Vec<Corner> {
    let n = pts.len();
    if n <= 2 || tol <= 0.0 {
        return pts.to_vec();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((s, e)) = stack.pop() {
        if e <= s + 1 {
            continue;
        }
        let (a, b) = (to_f(pts[s]), to_f(pts[e]));
        let mut best = (0.0, s);
        for (k, &p) in pts.iter().enumerate().take(e).skip(s + 1) {
            let d = perp_dist(to_f(p), a, b);
            if d > best.0 {
                best = (d, k);
            }
        }
        if best.0 > tol {
            keep[best.1] = true;
            stack.push((s, best.1));
            stack.push((best.1, e));
        }
    }
    pts.iter().zip(&keep).filter(|(_, &k)| k).map(|(&p, _)| p).collect()
}

/// Simplified copy of a chain's corners; endpoints are preserved.
pub(crate) fn simplify_chain(chain: &Chain, tol: f64) -> Vec<Corner> {
    let pts = drop_collinear(&chain.corners);
    if !chain.is_closed() {
        return douglas_peucker(&pts, tol);
    }
    // Closed: split at the corner farthest from the anchor.
    let anchor = to_f(pts[0]);
    let far = (1..pts.len() - 1)
        .max_by(|&x, &y| {
            let dx = perp_dist(to_f(pts[x]), anchor, anchor);
            let dy = perp_dist(to_f(pts[y]), anchor, anchor);
            dx.total_cmp(&dy).then(y.cmp(&x))
        })
        .unwrap_or(0);
    if far == 0 {
        return pts;
    }
    let mut first = douglas_peucker(&pts[..=far], tol);
    let second = douglas_peucker(&pts[far..], tol);
    first.pop();
    first.extend(second);
    if first.len() < 4 {
        return pts;
    }
    first
}

/// Outer boundary of one region as lattice corners (counter-clockwise, not
/// repeated at the end), plus the indices of the chains it uses.
pub(crate) fn region_outline(
    label: i32,
    chains: &[Chain],
    simplified: &[Vec<Corner>],
    by_label: &BTreeMap<i32, Vec<usize>>,
) -> Option<(Vec<Corner>, Vec<usize>)> {
    let ids = by_label.get(&label)?;
    // Directed pieces with the region on the left.
    let pieces: Vec<(usize, Vec<Corner>)> = ids
        .iter()
        .map(|&k| {
            let mut pts = simplified[k].clone();
            if chains[k].right == label {
                pts.reverse();
            }
            (k, pts)
        })
        .collect();
    let mut starts: BTreeMap<Corner, Vec<usize>> = BTreeMap::new();
    for (p, (_, pts)) in pieces.iter().enumerate() {
        starts.entry(pts[0]).or_default().push(p);
    }
    let mut used = vec![false; pieces.len()];
    let mut best: Option<(f64, Vec<Corner>, Vec<usize>)> = None;
    for first in 0..pieces.len() {
        if used[first] {
            continue;
        }
        let mut loop_pts: Vec<Corner> = Vec::new();
        let mut members = Vec::new();
        let mut cur = first;
        let origin = pieces[first].1[0];
        loop {
            used[cur] = true;
            members.push(pieces[cur].0);
            let pts = &pieces[cur].1;
            loop_pts.extend_from_slice(&pts[..pts.len() - 1]);
            let end = *pts.last().unwrap();
            if end == origin {
                break;
            }
            let next = starts
                .get(&end)
                .and_then(|cands| cands.iter().copied().find(|&p| !used[p]));
            match next {
                Some(n) => cur = n,
                None => break,
            }
        }
        if loop_pts.len() < 3 {
            continue;
        }
        let area = lattice_signed_area(&loop_pts);
        if area > 0.0 && best.as_ref().is_none_or(|(a, _, _)| area > *a) {
            best = Some((area, loop_pts, members));
        }
    }
    best.map(|(_, pts, members)| (pts, members))
}

/// Shoelace area in (col, row) = (x, y) orientation.
pub(crate) fn lattice_signed_area(pts: &[Corner]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for k in 0..n {
        let (r0, c0) = to_f(pts[k]);
        let (r1, c1) = to_f(pts[(k + 1) % n]);
        s += c0 * r1 - c1 * r0;
    }
    s * 0.5
}

pub(crate) fn chains_by_label(chains: &[Chain]) -> BTreeMap<i32, Vec<usize>> {
    let mut by_label: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (k, ch) in chains.iter().enumerate() {
        for l in [ch.left, ch.right] {
            if l != NO_LABEL {
                by_label.entry(l).or_default().push(k);
            }
        }
    }
    by_label
}
