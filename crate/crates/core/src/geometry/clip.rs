//! Intersection area of two simple (possibly concave) polygons.
//!
//! The boundary of `P ∩ Q` is made of the pieces of ∂P lying inside Q and the
//! pieces of ∂Q lying inside P. Summing the shoelace terms of those pieces
//! gives the intersection area without building the clipped polygon. Pieces
//! shared by both boundaries count once when both polygons lie on the same
//! side of them and not at all otherwise.

use super::{point_segment_distance, winding_number, Point2, Polygon2, POINT_EPS};

#[derive(Clone, Copy)]
enum Location {
    Inside,
    Outside,
    /// On the boundary edge with the given direction vector.
    OnEdge(Point2),
}

fn locate(poly: &[Point2], p: Point2) -> Location {
    let n = poly.len();
    let mut best = f64::INFINITY;
    let mut best_dir = Point2::default();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let d = point_segment_distance(p, a, b);
        if d < best {
            best = d;
            best_dir = b - a;
        }
    }
    if best <= POINT_EPS {
        return Location::OnEdge(best_dir);
    }
    if winding_number(poly, p) != 0 {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Split parameters in (0, 1) where segment s0->s1 meets the boundary of `clip`.
fn split_params(s0: Point2, s1: Point2, clip: &[Point2], out: &mut Vec<f64>) {
    let r = s1 - s0;
    let rlen2 = r.dot(r);
    let rlen = rlen2.sqrt();
    let n = clip.len();
    let t_eps = POINT_EPS / rlen;
    for i in 0..n {
        let c0 = clip[i];
        let c1 = clip[(i + 1) % n];
        let s = c1 - c0;
        let slen = s.norm();
        let denom = r.cross(s);
        let qp = c0 - s0;
        if denom.abs() > 1e-12 * rlen * slen {
            let t = qp.cross(s) / denom;
            let u = qp.cross(r) / denom;
            let u_eps = POINT_EPS / slen;
            if u >= -u_eps && u <= 1.0 + u_eps && t > t_eps && t < 1.0 - t_eps {
                out.push(t);
            }
        } else if (qp.cross(r)).abs() <= POINT_EPS * rlen {
            // Collinear: the overlap endpoints become split points.
            for c in [c0, c1] {
                let t = (c - s0).dot(r) / rlen2;
                if t > t_eps && t < 1.0 - t_eps {
                    out.push(t);
                }
            }
        }
    }
}

/// Twice the signed area contributed by the parts of `subject`'s boundary
/// inside `clip`.
fn boundary_contribution(subject: &[Point2], clip: &[Point2], keep_shared: bool) -> f64 {
    let n = subject.len();
    let mut total = 0.0;
    let mut params = Vec::new();
    for i in 0..n {
        let s0 = subject[i];
        let s1 = subject[(i + 1) % n];
        let r = s1 - s0;
        params.clear();
        params.push(0.0);
        split_params(s0, s1, clip, &mut params);
        params.push(1.0);
        params.sort_by(f64::total_cmp);

        for w in params.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            if tb - ta <= 0.0 {
                continue;
            }
            let a = if ta == 0.0 { s0 } else { s0 + r * ta };
            let b = if tb == 1.0 { s1 } else { s0 + r * tb };
            if a.dist(b) <= POINT_EPS * 0.5 {
                continue;
            }
            let keep = match locate(clip, a.midpoint(b)) {
                Location::Inside => true,
                Location::Outside => false,
                Location::OnEdge(dir) => keep_shared && dir.dot(r) > 0.0,
            };
            if keep {
                total += a.cross(b);
            }
        }
    }
    total
}

fn bounds_overlap(p: &Polygon2, q: &Polygon2) -> bool {
    let (plo, phi) = p.bounds();
    let (qlo, qhi) = q.bounds();
    plo.x <= qhi.x + POINT_EPS && qlo.x <= phi.x + POINT_EPS && plo.y <= qhi.y + POINT_EPS && qlo.y <= phi.y + POINT_EPS
}

/// Area of `p ∩ q` in m². Zero for disjoint or merely touching polygons.
pub fn polygon_overlap_area(p: &Polygon2, q: &Polygon2) -> f64 {
    if !bounds_overlap(p, q) {
        return 0.0;
    }
    let twice = boundary_contribution(p.vertices(), q.vertices(), true)
        + boundary_contribution(q.vertices(), p.vertices(), false);
    let cap = p.signed_area().abs().min(q.signed_area().abs());
    (twice * 0.5).clamp(0.0, cap)
}
