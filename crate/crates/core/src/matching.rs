//! Weighted area costs, mutual k-nearest matches and the weight sweep.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{extract_features, feature_cost_vector, FeatureCostVector, FeatureSet};
use crate::geometry::Segment2;
use crate::segmentation::AreaGraph;
use crate::transform::{best_cluster, cluster_rotations, pair_hypotheses, RotationHypothesis};

pub const DEFAULT_K: usize = 3;

/// Weights of the area, passage and hull costs, summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightVector {
    pub w_a: f64,
    pub w_p: f64,
    pub w_l: f64,
}

impl Default for WeightVector {
    fn default() -> Self {
        Self {
            w_a: 0.1,
            w_p: 0.1,
            w_l: 0.8,
        }
    }
}

impl WeightVector {
    pub fn new(w_a: f64, w_p: f64, w_l: f64) -> Result<Self> {
        let w = [w_a, w_p, w_l];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!(
                "weights must be non-negative, got {w_a},{w_p},{w_l}"
            )));
        }
        let sum = w_a + w_p + w_l;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("weights must sum to 1, got {sum}")));
        }
        Ok(Self { w_a, w_p, w_l })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w_a, self.w_p, self.w_l]
    }

    /// Weighted cost over the available features, with the active weights
    /// rescaled to sum to one. If every active weight is zero the available
    /// features are weighted equally.
    pub fn combine(&self, v: &FeatureCostVector) -> f64 {
        let d = v.as_array();
        let w = self.as_array();
        let (mut num, mut den, mut plain, mut count) = (0.0, 0.0, 0.0, 0usize);
        for (dv, wv) in d.iter().zip(w) {
            if let Some(c) = dv {
                num += wv * c;
                den += wv;
                plain += c;
                count += 1;
            }
        }
        if den > 0.0 {
            num / den
        } else {
            plain / count as f64
        }
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.w_a, self.w_p, self.w_l)
    }
}

/// Total costs between the areas of map A (rows) and map B (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    row_ids: Vec<u32>,
    col_ids: Vec<u32>,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn new(row_ids: Vec<u32>, col_ids: Vec<u32>, costs: Vec<f64>) -> Result<Self> {
        if row_ids.len() * col_ids.len() != costs.len() {
            return Err(Error::Config(format!(
                "{}x{} cost matrix needs {} entries, got {}",
                row_ids.len(),
                col_ids.len(),
                row_ids.len() * col_ids.len(),
                costs.len()
            )));
        }
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Config("costs must be finite and non-negative".into()));
        }
        Ok(Self {
            row_ids,
            col_ids,
            costs,
        })
    }

    pub fn rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn row_ids(&self) -> &[u32] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[u32] {
        &self.col_ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.costs[i * self.cols() + j]
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.rows(), self.cols());
        let mut costs = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                costs.push(self.get(i, j));
            }
        }
        Self {
            row_ids: self.col_ids.clone(),
            col_ids: self.row_ids.clone(),
            costs,
        }
    }
}

/// Weight-independent feature costs of every area pair of two graphs.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    ids_a: Vec<u32>,
    ids_b: Vec<u32>,
    features_a: Vec<FeatureSet>,
    features_b: Vec<FeatureSet>,
    vectors: Vec<FeatureCostVector>,
}

fn graph_features(g: &AreaGraph) -> Result<Vec<FeatureSet>> {
    g.areas().iter().map(extract_features).collect()
}

impl FeatureTable {
    pub fn new(a: &AreaGraph, b: &AreaGraph) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let features_a = graph_features(a)?;
        let features_b = graph_features(b)?;
        let vectors = features_a
            .par_iter()
            .flat_map_iter(|fa| features_b.iter().map(move |fb| feature_cost_vector(fa, fb)))
            .collect();
        Ok(Self {
            ids_a: a.areas().iter().map(|x| x.id).collect(),
            ids_b: b.areas().iter().map(|x| x.id).collect(),
            features_a,
            features_b,
            vectors,
        })
    }

    pub fn rows(&self) -> usize {
        self.ids_a.len()
    }

    pub fn cols(&self) -> usize {
        self.ids_b.len()
    }

    pub fn vector(&self, i: usize, j: usize) -> &FeatureCostVector {
        &self.vectors[i * self.cols() + j]
    }

    pub fn features_a(&self) -> &[FeatureSet] {
        &self.features_a
    }

    pub fn features_b(&self) -> &[FeatureSet] {
        &self.features_b
    }

    pub fn costs(&self, w: &WeightVector) -> CostMatrix {
        CostMatrix {
            row_ids: self.ids_a.clone(),
            col_ids: self.ids_b.clone(),
            costs: self.vectors.iter().map(|v| w.combine(v)).collect(),
        }
    }

    /// Match record for areas `i` of A and `j` of B with the segments used
    /// for transform estimation.
    pub fn pair(&self, i: usize, j: usize, cost: f64) -> MatchPair {
        let v = self.vector(i, j);
        let (fa, fb) = (&self.features_a[i], &self.features_b[j]);
        let (segment_a, segment_b, kind) = match v.passage {
            Some(p) => (
                fa.passage_segments[p.index_i],
                fb.passage_segments[p.index_j],
                SegmentKind::PassageDistance,
            ),
            None => (fa.hull_segment, fb.hull_segment, SegmentKind::HullLongest),
        };
        MatchPair {
            area_a: self.ids_a[i],
            area_b: self.ids_b[j],
            index_a: i,
            index_b: j,
            cost,
            segment_a,
            segment_b,
            kind,
        }
    }
}

pub fn cost_matrix(a: &AreaGraph, b: &AreaGraph, w: &WeightVector) -> Result<CostMatrix> {
    Ok(FeatureTable::new(a, b)?.costs(w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    PassageDistance,
    HullLongest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub area_a: u32,
    pub area_b: u32,
    /// Positions of the two areas in their graphs.
    pub index_a: usize,
    pub index_b: usize,
    pub cost: f64,
    pub segment_a: Segment2,
    pub segment_b: Segment2,
    pub kind: SegmentKind,
}

/// Rank lists of every row: column indices ordered by (cost, column id).
fn ranked(m: &CostMatrix) -> Vec<Vec<usize>> {
    (0..m.rows())
        .map(|i| {
            let mut idx: Vec<usize> = (0..m.cols()).collect();
            idx.sort_by(|&x, &y| {
                m.get(i, x)
                    .total_cmp(&m.get(i, y))
                    .then(m.col_ids[x].cmp(&m.col_ids[y]))
            });
            idx
        })
        .collect()
}

/// Index pairs `(i, j)` where `j` is among the `k` cheapest columns of row
/// `i` and `i` among the `k` cheapest rows of column `j`. Equal costs rank
/// the smaller area id first. Sorted by (cost, row id, column id).
pub fn mutual_knn(m: &CostMatrix, k: usize) -> Vec<(usize, usize)> {
    let k = k.max(1);
    let rows = ranked(m);
    let cols = ranked(&m.transpose());
    let mut in_col = vec![false; m.rows() * m.cols()];
    for (j, order) in cols.iter().enumerate() {
        for &i in order.iter().take(k) {
            in_col[i * m.cols() + j] = true;
        }
    }
    let mut out: Vec<(usize, usize)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, order)| order.iter().take(k).map(move |&j| (i, j)))
        .filter(|&(i, j)| in_col[i * m.cols() + j])
        .collect();
    out.sort_by(|&(a, b), &(c, d)| {
        m.get(a, b)
            .total_cmp(&m.get(c, d))
            .then(m.row_ids[a].cmp(&m.row_ids[c]))
            .then(m.col_ids[b].cmp(&m.col_ids[d]))
    });
    out
}

/// Mutual k-nearest area pairs with their matched segments.
pub fn mutual_knn_pairs(table: &FeatureTable, m: &CostMatrix, k: usize) -> Vec<MatchPair> {
    mutual_knn(m, k)
        .into_iter()
        .map(|(i, j)| table.pair(i, j, m.get(i, j)))
        .collect()
}

/// Weight vectors on the simplex lattice with spacing `step`.
pub fn weight_lattice(step: f64) -> Result<Vec<WeightVector>> {
    if !(step.is_finite() && step > 0.0 && step <= 1.0) {
        return Err(Error::Config(format!("step must be in (0, 1], got {step}")));
    }
    let n = (1.0 / step).round() as usize;
    if ((n as f64) * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("1/step must be an integer, got step {step}")));
    }
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=n - i {
            let l = n - i - j;
            out.push(WeightVector {
                w_a: i as f64 / n as f64,
                w_p: j as f64 / n as f64,
                w_l: l as f64 / n as f64,
            });
        }
    }
    Ok(out)
}

/// One map pair of a weight sweep with its true area correspondences.
#[derive(Debug, Clone)]
pub struct SweepCase<'a> {
    pub a: &'a AreaGraph,
    pub b: &'a AreaGraph,
    /// `(area id in A, area id in B)`.
    pub gt_pairs: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub weights: WeightVector,
    /// Mean over cases of the fraction of true pairs found in the best cluster.
    pub correctness: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepParams {
    pub step: f64,
    pub k: usize,
    pub angle_threshold: f64,
    pub overlap_threshold: f64,
}

struct PreparedCase {
    table: FeatureTable,
    hypotheses: Vec<Vec<RotationHypothesis>>,
    gt: Vec<(u32, u32)>,
}

/// Runs the matching pipeline at every lattice weight and records how many
/// true pairs end up in the best rotation cluster.
pub fn weight_sweep(cases: &[SweepCase<'_>], params: &SweepParams) -> Result<Vec<SweepPoint>> {
    let lattice = weight_lattice(params.step)?;
    let prepared: Vec<PreparedCase> = cases
        .iter()
        .map(|case| {
            let table = FeatureTable::new(case.a, case.b)?;
            let cols = table.cols();
            let hypotheses = (0..table.rows() * cols)
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx / cols, idx % cols);
                    let pair = table.pair(i, j, 0.0);
                    pair_hypotheses(&pair, &case.a.areas()[i], &case.b.areas()[j], params.overlap_threshold)
                })
                .collect();
            Ok(PreparedCase {
                table,
                hypotheses,
                gt: case.gt_pairs.clone(),
            })
        })
        .collect::<Result<_>>()?;

    Ok(lattice
        .par_iter()
        .map(|w| {
            let total: f64 = prepared.iter().map(|p| case_correctness(p, w, params)).sum();
            SweepPoint {
                weights: *w,
                correctness: if prepared.is_empty() {
                    0.0
                } else {
                    total / prepared.len() as f64
                },
            }
        })
        .collect())
}

fn case_correctness(p: &PreparedCase, w: &WeightVector, params: &SweepParams) -> f64 {
    if p.gt.is_empty() {
        return 0.0;
    }
    let m = p.table.costs(w);
    let cols = p.table.cols();
    let mut hyps = Vec::new();
    for (i, j) in mutual_knn(&m, params.k) {
        for h in &p.hypotheses[i * cols + j] {
            let mut h = h.clone();
            h.pair.cost = m.get(i, j);
            hyps.push(h);
        }
    }
    let Ok(clusters) = cluster_rotations(&hyps, params.angle_threshold) else {
        return 0.0;
    };
    let best = best_cluster(&clusters, &hyps);
    let found =
        p.gt.iter()
            .filter(|&&(ga, gb)| {
                best.members
                    .iter()
                    .any(|&h| hyps[h].pair.area_a == ga && hyps[h].pair.area_b == gb)
            })
            .count();
    found as f64 / p.gt.len() as f64
}

/// Comma-separated heatmap rows `w_a,w_p,w_l,correctness`.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("w_a,w_p,w_l,correctness\n");
    for p in points {
        s.push_str(&format!("{},{}\n", p.weights, p.correctness));
    }
    s
}
