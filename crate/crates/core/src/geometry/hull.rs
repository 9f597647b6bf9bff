use super::{Point2, Polygon2, Segment2};
use crate::error::{Error, Result};

/// Convex hull by Andrew's monotone chain. Collinear boundary points are dropped.
pub fn convex_hull(points: &[Point2]) -> Result<Polygon2> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite point".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegeneratePolygon("fewer than 3 distinct points".into()));
    }

    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(Error::DegeneratePolygon("all points collinear".into()));
    }
    Ok(Polygon2::from_ccw(hull))
}

/// Diameter of a convex polygon via rotating calipers, with the realizing pair.
///
/// The polygon must be convex and counter-clockwise (as produced by
/// [`convex_hull`]).
pub fn hull_diameter(p: &Polygon2) -> Segment2 {
    let v = p.vertices();
    let n = v.len();
    let mut best = (0usize, 1usize, v[0].dist(v[1]));
    let mut consider = |i: usize, j: usize| {
        let d = v[i].dist(v[j]);
        if d > best.2 {
            best = (i, j, d);
        }
    };

    let mut j = 1usize;
    for i in 0..n {
        let ni = (i + 1) % n;
        let edge = v[ni] - v[i];
        // Advance the antipodal pointer while the triangle area keeps growing.
        let mut steps = 0;
        while steps < n {
            let nj = (j + 1) % n;
            if edge.cross(v[nj] - v[j]) > 0.0 {
                j = nj;
                consider(i, j);
                consider(ni, j);
                steps += 1;
            } else {
                break;
            }
        }
        consider(i, j);
        consider(ni, j);
    }
    Segment2 {
        a: v[best.0],
        b: v[best.1],
    }
}

/// Longest distance between any two vertices of a convex polygon.
pub fn hull_longest_distance(p: &Polygon2) -> f64 {
    hull_diameter(p).length()
}
