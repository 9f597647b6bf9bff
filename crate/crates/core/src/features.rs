//! Per-area features and the pairwise feature costs.

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, hull_diameter, polygon_area, Segment2, POINT_EPS};
use crate::segmentation::Area;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    /// Area size (m²).
    pub area: f64,
    /// Distances between every unordered pair of passages, ascending.
    pub passage_distances: Vec<f64>,
    /// Passage-to-passage segment for each entry of `passage_distances`.
    pub passage_segments: Vec<Segment2>,
    /// Diameter of the convex hull (m).
    pub hull_longest: f64,
    pub hull_segment: Segment2,
}

impl FeatureSet {
    pub fn has_passage_distances(&self) -> bool {
        !self.passage_distances.is_empty()
    }
}

pub fn extract_features(area: &Area) -> Result<FeatureSet> {
    let a = polygon_area(&area.polygon)?;
    let hull = convex_hull(area.polygon.vertices())?;
    let hull_segment = hull_diameter(&hull);

    let pts = &area.passages;
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            // Passages sorted by (x, y), so each segment runs in a canonical direction.
            let (p, q) = if pts[i].lex_cmp(&pts[j]).is_le() {
                (pts[i], pts[j])
            } else {
                (pts[j], pts[i])
            };
            if p.dist(q) > POINT_EPS {
                pairs.push((p.dist(q), Segment2::new(p, q)?));
            }
        }
    }
    pairs.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(x.1.a.lex_cmp(&y.1.a))
            .then(x.1.b.lex_cmp(&y.1.b))
    });
    Ok(FeatureSet {
        area: a,
        passage_distances: pairs.iter().map(|p| p.0).collect(),
        passage_segments: pairs.into_iter().map(|p| p.1).collect(),
        hull_longest: hull_segment.length(),
        hull_segment,
    })
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive and finite, got {x}")))
    }
}

/// `|√a_i − √a_j| / √max(a_i, a_j)`.
pub fn area_size_cost(a_i: f64, a_j: f64) -> Result<f64> {
    positive(a_i, "area")?;
    positive(a_j, "area")?;
    Ok((a_i.sqrt() - a_j.sqrt()).abs() / a_i.max(a_j).sqrt())
}

/// Best passage-distance match between two areas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageCost {
    pub cost: f64,
    /// Index into the first list.
    pub index_i: usize,
    /// Index into the second list.
    pub index_j: usize,
}

/// Minimum over all pairs of `|pd_n − pd_m| / max(pd_n, pd_m)`; `None` when
/// either list is empty. Ties keep the first pair in (n, m) order.
pub fn passage_distance_cost(pd_i: &[f64], pd_j: &[f64]) -> Option<PassageCost> {
    let mut best: Option<PassageCost> = None;
    for (n, &x) in pd_i.iter().enumerate() {
        for (m, &y) in pd_j.iter().enumerate() {
            let c = (x - y).abs() / x.max(y);
            if best.is_none_or(|b| c < b.cost) {
                best = Some(PassageCost {
                    cost: c,
                    index_i: n,
                    index_j: m,
                });
            }
        }
    }
    best
}

/// `|ld_i − ld_j| / max(ld_i, ld_j)`.
pub fn hull_longest_cost(ld_i: f64, ld_j: f64) -> Result<f64> {
    positive(ld_i, "hull length")?;
    positive(ld_j, "hull length")?;
    Ok((ld_i - ld_j).abs() / ld_i.max(ld_j))
}

/// Feature costs of one area pair; `None` marks an unavailable feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureCostVector {
    pub area: f64,
    pub passage: Option<PassageCost>,
    pub hull: Option<f64>,
}

impl FeatureCostVector {
    pub fn as_array(&self) -> [Option<f64>; 3] {
        [Some(self.area), self.passage.map(|p| p.cost), self.hull]
    }
}

/// Area cost always; passage cost when both sides have passage distances,
/// otherwise the hull cost.
pub fn feature_cost_vector(fa: &FeatureSet, fb: &FeatureSet) -> FeatureCostVector {
    let area = area_size_cost(fa.area, fb.area).expect("feature areas are positive");
    let passage = passage_distance_cost(&fa.passage_distances, &fb.passage_distances);
    let hull = match passage {
        Some(_) => None,
        None => Some(hull_longest_cost(fa.hull_longest, fb.hull_longest).expect("hull lengths are positive")),
    };
    FeatureCostVector { area, passage, hull }
}
