//! Rotation hypotheses, rotation clustering and transform selection.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    angle_distance, normalize_angle, polygon_overlap_area, rotation_between_segments, transform_from_match, Point2,
    Polygon2, RigidMotion, RigidTransform2D,
};
use crate::map_io::GridMap;
use crate::matching::{mutual_knn_pairs, FeatureTable, MatchPair, WeightVector, DEFAULT_K};
use crate::segmentation::{segment_grid_map, Area, AreaGraph, SegmentationParams};

pub const DEFAULT_ANGLE_THRESHOLD_DEG: f64 = 3.0;
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.7;
/// Reassignment passes before violators are split off.
pub const CLUSTER_PASS_LIMIT: usize = 20;

/// Passage correspondences farther apart than this (m) are not used when
/// refining the transform.
const REFINE_RADIUS: f64 = 0.5;
/// A refined transform is kept if it loses at most this fraction of the
/// overlap sum.
const REFINE_SLACK: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct RotationHypothesis {
    /// Rotation from map A to map B, in (−π, π].
    pub alpha: f64,
    /// Rotation center in map A (midpoint of the matched segment).
    pub center_a: Point2,
    pub center_b: Point2,
    pub pair: MatchPair,
    pub pair_overlap: f64,
}

impl RotationHypothesis {
    pub fn transform(&self) -> RigidTransform2D {
        transform_from_match(self.alpha, self.center_a, self.center_b)
    }
}

/// Intersection area over the smaller of the two areas.
pub fn overlap_percentage(a: &Polygon2, b: &Polygon2) -> f64 {
    let min = a.signed_area().min(b.signed_area());
    if min <= 0.0 {
        return 0.0;
    }
    (polygon_overlap_area(a, b) / min).clamp(0.0, 1.0)
}

/// Both rotations aligning the pair's matched segments, each kept if the
/// transformed area of A overlaps its partner by at least `threshold`.
pub fn pair_hypotheses(pair: &MatchPair, area_a: &Area, area_b: &Area, threshold: f64) -> Vec<RotationHypothesis> {
    let rot = rotation_between_segments(&pair.segment_a, &pair.segment_b);
    let (ca, cb) = (pair.segment_a.midpoint(), pair.segment_b.midpoint());
    rot.candidates()
        .into_iter()
        .filter_map(|alpha| {
            let t = transform_from_match(alpha, ca, cb);
            let op = overlap_percentage(&area_a.polygon.transformed(&t), &area_b.polygon);
            (op >= threshold).then_some(RotationHypothesis {
                alpha,
                center_a: ca,
                center_b: cb,
                pair: *pair,
                pair_overlap: op,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationCluster {
    /// Circular mean of the member angles.
    pub center: f64,
    /// Indices into the hypothesis list, ascending.
    pub members: Vec<usize>,
}

/// Mean direction of a set of angles; 0 for an empty or balanced set.
pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for a in angles {
        s += a.sin();
        c += a.cos();
    }
    normalize_angle(s.atan2(c))
}

fn nearest(centers: &[f64], a: f64) -> Option<(usize, f64)> {
    centers
        .iter()
        .enumerate()
        .map(|(k, &c)| (k, angle_distance(a, c)))
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
}

fn recenter(angles: &[f64], members: &[Vec<usize>]) -> Vec<f64> {
    members
        .iter()
        .map(|m| circular_mean(m.iter().map(|&h| angles[h])))
        .collect()
}

fn all_within(angles: &[f64], centers: &[f64], members: &[Vec<usize>], thr: f64) -> bool {
    members
        .iter()
        .zip(centers)
        .all(|(m, &c)| m.iter().all(|&h| angle_distance(angles[h], c) <= thr))
}

/// Greedy sequential clustering of angles followed by reassignment passes.
///
/// A hypothesis farther than `threshold` from every center starts a new
/// cluster, otherwise it joins the nearest one and that center moves to the
/// circular mean. Passes then reassign every hypothesis to its nearest
/// center until all members are within `threshold` or the pass limit is
/// reached; any member still out of range becomes its own cluster.
pub fn cluster_angles(angles: &[f64], threshold: f64) -> Result<Vec<RotationCluster>> {
    if angles.is_empty() {
        return Err(Error::NoHypotheses);
    }
    let mut centers: Vec<f64> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (h, &a) in angles.iter().enumerate() {
        match nearest(&centers, a) {
            Some((k, d)) if d <= threshold => {
                members[k].push(h);
                centers[k] = circular_mean(members[k].iter().map(|&m| angles[m]));
            }
            _ => {
                centers.push(circular_mean([a]));
                members.push(vec![h]);
            }
        }
    }

    for _ in 0..CLUSTER_PASS_LIMIT {
        if all_within(angles, &centers, &members, threshold) {
            break;
        }
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
        let mut new_centers = centers.clone();
        for (h, &a) in angles.iter().enumerate() {
            match nearest(&new_centers, a) {
                Some((k, d)) if d <= threshold => next[k].push(h),
                _ => {
                    new_centers.push(circular_mean([a]));
                    next.push(vec![h]);
                }
            }
        }
        let keep: Vec<Vec<usize>> = next.into_iter().filter(|m| !m.is_empty()).collect();
        let unchanged = keep == members;
        members = keep;
        centers = recenter(angles, &members);
        if unchanged {
            break;
        }
    }

    // Split off anything still out of range; each round shrinks a cluster.
    loop {
        let mut violators = Vec::new();
        for (m, &c) in members.iter_mut().zip(&centers) {
            let (ok, bad): (Vec<usize>, Vec<usize>) =
                m.iter().partition(|&&h| angle_distance(angles[h], c) <= threshold);
            if !bad.is_empty() {
                *m = ok;
                violators.extend(bad);
            }
        }
        if violators.is_empty() {
            break;
        }
        violators.sort_unstable();
        members.retain(|m| !m.is_empty());
        members.extend(violators.into_iter().map(|h| vec![h]));
        centers = recenter(angles, &members);
    }

    Ok(members
        .into_iter()
        .zip(centers)
        .map(|(mut m, center)| {
            m.sort_unstable();
            RotationCluster { center, members: m }
        })
        .collect())
}

pub fn cluster_rotations(h: &[RotationHypothesis], threshold: f64) -> Result<Vec<RotationCluster>> {
    let angles: Vec<f64> = h.iter().map(|x| x.alpha).collect();
    cluster_angles(&angles, threshold)
}

/// Cluster with the most members; ties go to the larger summed pair
/// overlap, then to the earlier cluster.
pub fn best_cluster<'a>(clusters: &'a [RotationCluster], h: &[RotationHypothesis]) -> &'a RotationCluster {
    let overlap = |c: &RotationCluster| c.members.iter().map(|&m| h[m].pair_overlap).sum::<f64>();
    let mut best = &clusters[0];
    let mut best_overlap = overlap(best);
    for c in &clusters[1..] {
        let o = overlap(c);
        if c.members.len() > best.members.len() || (c.members.len() == best.members.len() && o > best_overlap) {
            best = c;
            best_overlap = o;
        }
    }
    best
}

/// Sum of overlap percentages of every pair with its A-side area moved by `t`.
pub fn overlap_sum(t: &RigidTransform2D, pairs: &[MatchPair], a: &AreaGraph, b: &AreaGraph) -> f64 {
    pairs
        .iter()
        .map(|p| {
            overlap_percentage(
                &a.areas()[p.index_a].polygon.transformed(t),
                &b.areas()[p.index_b].polygon,
            )
        })
        .sum()
}

/// The best cluster's sample whose transform maximizes the overlap sum over
/// `pairs`, as (member index, transform, overlap sum). Ties keep the first.
pub fn select_best_transform(
    cluster: &RotationCluster,
    h: &[RotationHypothesis],
    pairs: &[MatchPair],
    a: &AreaGraph,
    b: &AreaGraph,
) -> (usize, RigidTransform2D, f64) {
    let scores: Vec<(usize, RigidTransform2D, f64)> = cluster
        .members
        .par_iter()
        .map(|&m| {
            let t = h[m].transform();
            (m, t, overlap_sum(&t, pairs, a, b))
        })
        .collect();
    let mut best = scores[0];
    for s in &scores[1..] {
        if s.2 > best.2 {
            best = *s;
        }
    }
    best
}

/// Which pairs the best-cluster samples are scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreScope {
    /// Every mutual pair.
    #[default]
    AllPairs,
    /// Only the pairs that contributed to the best cluster.
    BestCluster,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub segmentation: SegmentationParams,
    pub k: usize,
    pub weights: WeightVector,
    /// Radians.
    pub angle_threshold: f64,
    pub overlap_threshold: f64,
    /// Shuffles the hypothesis order before clustering.
    pub seed: Option<u64>,
    pub score_scope: ScoreScope,
    /// Least-squares polish of the selected transform on matched passages.
    pub refine: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            segmentation: SegmentationParams::default(),
            k: DEFAULT_K,
            weights: WeightVector::default(),
            angle_threshold: DEFAULT_ANGLE_THRESHOLD_DEG.to_radians(),
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            seed: None,
            score_scope: ScoreScope::AllPairs,
            refine: true,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        self.segmentation.validate()?;
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        WeightVector::new(self.weights.w_a, self.weights.w_p, self.weights.w_l)?;
        if !(self.angle_threshold.is_finite()
            && self.angle_threshold > 0.0
            && self.angle_threshold <= std::f64::consts::PI)
        {
            return Err(Error::Config(format!(
                "angle threshold must be in (0, π], got {}",
                self.angle_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.overlap_threshold) {
            return Err(Error::Config(format!(
                "overlap threshold must be in [0, 1], got {}",
                self.overlap_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timings {
    pub segmentation_s: f64,
    pub matching_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Maps map A coordinates into map B.
    pub transform: RigidTransform2D,
    pub overlap_sum: f64,
    pub best_cluster_size: usize,
    /// Every mutual pair; the overlap sum is taken over these (or over the
    /// best cluster's pairs, depending on the score scope).
    pub candidate_pairs: Vec<MatchPair>,
    /// Scored pairs whose overlap under the final transform reaches the
    /// verification threshold.
    pub matched_pairs: Vec<MatchPair>,
    pub hypotheses: usize,
    pub clusters: usize,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy)]
pub enum MapInput<'a> {
    Grid(&'a GridMap),
    Graph(&'a AreaGraph),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchDiagnostics {
    pub areas_a: usize,
    pub areas_b: usize,
    pub mutual_pairs: usize,
    pub hypotheses: usize,
}

impl fmt::Display for MatchDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "areas A={} B={}, mutual pairs={}, hypotheses={}",
            self.areas_a, self.areas_b, self.mutual_pairs, self.hypotheses
        )
    }
}

/// Full pipeline: segmentation of grid inputs, then [`match_graphs`].
pub fn match_maps(a: MapInput<'_>, b: MapInput<'_>, config: &MatchConfig) -> Result<MatchResult> {
    config.validate()?;
    let start = Instant::now();
    let segment = |m: MapInput<'_>| -> Result<Option<AreaGraph>> {
        match m {
            MapInput::Grid(g) => Ok(Some(segment_grid_map(g, &config.segmentation)?.graph)),
            MapInput::Graph(_) => Ok(None),
        }
    };
    let (ga, gb) = rayon::join(|| segment(a), || segment(b));
    let (ga, gb) = (ga?, gb?);
    let segmentation_s = match (a, b) {
        (MapInput::Graph(_), MapInput::Graph(_)) => 0.0,
        _ => start.elapsed().as_secs_f64(),
    };
    let graph_a = match a {
        MapInput::Graph(g) => g,
        MapInput::Grid(_) => ga.as_ref().expect("segmented"),
    };
    let graph_b = match b {
        MapInput::Graph(g) => g,
        MapInput::Grid(_) => gb.as_ref().expect("segmented"),
    };
    let mut result = match_graphs(graph_a, graph_b, config)?;
    result.timings.segmentation_s = segmentation_s;
    result.timings.total_s = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Matches two segmented maps.
pub fn match_graphs(a: &AreaGraph, b: &AreaGraph, config: &MatchConfig) -> Result<MatchResult> {
    config.validate()?;
    let start = Instant::now();
    let mut diag = MatchDiagnostics {
        areas_a: a.len(),
        areas_b: b.len(),
        ..Default::default()
    };
    let table = FeatureTable::new(a, b)?;
    let costs = table.costs(&config.weights);
    let candidate_pairs = mutual_knn_pairs(&table, &costs, config.k);
    diag.mutual_pairs = candidate_pairs.len();

    let per_pair: Vec<Vec<RotationHypothesis>> = candidate_pairs
        .par_iter()
        .map(|p| {
            pair_hypotheses(
                p,
                &a.areas()[p.index_a],
                &b.areas()[p.index_b],
                config.overlap_threshold,
            )
        })
        .collect();
    let mut hyps: Vec<RotationHypothesis> = per_pair.into_iter().flatten().collect();
    diag.hypotheses = hyps.len();
    if let Some(seed) = config.seed {
        hyps.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let clusters = match cluster_rotations(&hyps, config.angle_threshold) {
        Ok(c) => c,
        Err(Error::NoHypotheses) => return Err(Error::MatchFailed(diag)),
        Err(e) => return Err(e),
    };
    let best = best_cluster(&clusters, &hyps);

    let scored: Vec<MatchPair> = match config.score_scope {
        ScoreScope::AllPairs => candidate_pairs.clone(),
        ScoreScope::BestCluster => {
            let mut v: Vec<MatchPair> = Vec::new();
            for &m in &best.members {
                let p = hyps[m].pair;
                if !v.iter().any(|q| q.index_a == p.index_a && q.index_b == p.index_b) {
                    v.push(p);
                }
            }
            v
        }
    };
    let (_, mut transform, mut score) = select_best_transform(best, &hyps, &scored, a, b);

    if config.refine {
        let verified = verified_pairs(&transform, &scored, a, b, config.overlap_threshold);
        if let Some(t) = refine_on_passages(&transform, &verified, a, b) {
            let s = overlap_sum(&t, &scored, a, b);
            if s >= score * (1.0 - REFINE_SLACK) {
                transform = t;
                score = s;
            }
        }
    }
    let matched_pairs = verified_pairs(&transform, &scored, a, b, config.overlap_threshold);
    let matching_s = start.elapsed().as_secs_f64();
    Ok(MatchResult {
        transform,
        overlap_sum: score,
        best_cluster_size: best.members.len(),
        candidate_pairs,
        matched_pairs,
        hypotheses: hyps.len(),
        clusters: clusters.len(),
        timings: Timings {
            segmentation_s: 0.0,
            matching_s,
            total_s: matching_s,
        },
    })
}

fn verified_pairs(
    t: &RigidTransform2D,
    pairs: &[MatchPair],
    a: &AreaGraph,
    b: &AreaGraph,
    threshold: f64,
) -> Vec<MatchPair> {
    pairs
        .iter()
        .filter(|p| {
            overlap_percentage(
                &a.areas()[p.index_a].polygon.transformed(t),
                &b.areas()[p.index_b].polygon,
            ) >= threshold
        })
        .copied()
        .collect()
}

/// Least-squares rigid fit `R·p + t ≈ q` over point correspondences.
pub fn fit_rigid(pairs: &[(Point2, Point2)]) -> Option<RigidTransform2D> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let (mut ma, mut mb) = (Point2::default(), Point2::default());
    for (p, q) in pairs {
        ma = ma + *p;
        mb = mb + *q;
    }
    ma = ma * (1.0 / n);
    mb = mb * (1.0 / n);
    let (mut s, mut c) = (0.0, 0.0);
    for (p, q) in pairs {
        let (u, v) = (*p - ma, *q - mb);
        s += u.cross(v);
        c += u.dot(v);
    }
    if s == 0.0 && c <= 0.0 {
        return None;
    }
    Some(transform_from_match(s.atan2(c), ma, mb))
}

/// Refits the transform on passage points of verified pairs: each passage
/// of an A-side area is paired with the nearest passage of its partner
/// within a fixed radius, then a rigid fit is repeated with outliers
/// (residual above three times the median) trimmed.
fn refine_on_passages(
    t: &RigidTransform2D,
    pairs: &[MatchPair],
    a: &AreaGraph,
    b: &AreaGraph,
) -> Option<RigidTransform2D> {
    let mut corr: Vec<(Point2, Point2)> = Vec::new();
    for p in pairs {
        let (aa, bb) = (&a.areas()[p.index_a], &b.areas()[p.index_b]);
        for &pa in &aa.passages {
            let moved = t.apply(pa);
            let nearest = bb
                .passages
                .iter()
                .map(|&q| (q, q.dist(moved)))
                .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.lex_cmp(&y.0)));
            if let Some((q, d)) = nearest {
                if d <= REFINE_RADIUS && !corr.contains(&(pa, q)) {
                    corr.push((pa, q));
                }
            }
        }
    }
    // Too few correspondences cannot constrain the rotation reliably.
    if corr.len() < 3 {
        return None;
    }
    let mut fit = fit_rigid(&corr)?;
    for _ in 0..3 {
        let mut res: Vec<f64> = corr.iter().map(|(p, q)| fit.apply(*p).dist(*q)).collect();
        let mut sorted = res.clone();
        sorted.sort_by(f64::total_cmp);
        let cut = (3.0 * sorted[sorted.len() / 2]).max(1e-9);
        let kept: Vec<(Point2, Point2)> = corr
            .iter()
            .zip(res.drain(..))
            .filter(|(_, r)| *r <= cut)
            .map(|(c, _)| *c)
            .collect();
        if kept.len() == corr.len() || kept.len() < 3 {
            break;
        }
        corr = kept;
        fit = fit_rigid(&corr)?;
    }
    Some(fit)
}
