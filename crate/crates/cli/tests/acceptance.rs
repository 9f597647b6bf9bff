//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use areamatch::evaluation::{
    generate_synthetic_pair, random_transform, run_repeats, Noise, Repeats, SyntheticSpec, Tolerances,
};
use areamatch::features::{area_size_cost, hull_longest_cost, passage_distance_cost};
use areamatch::geometry::{convex_hull, hull_longest_distance, polygon_overlap_area, Point2, Polygon2, Segment2};
use areamatch::matching::{
    mutual_knn, mutual_knn_pairs, CostMatrix, FeatureTable, MatchPair, SegmentKind, WeightVector,
};
use areamatch::segmentation::{segment_grid_map, Area, AreaGraph, SegmentationParams};
use areamatch::transform::{cluster_rotations, match_graphs, MatchConfig, RotationHypothesis};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Rotation within 3°, translation within 2 cells, in at least 90% of 20
/// seeded repeats on each of 5 noisy synthetic pairs.
fn rotation_recovery() -> Outcome {
    let start = Instant::now();
    let resolution = 0.05;
    let tolerances = Tolerances {
        rotation_deg: 3.0,
        translation_m: 2.0 * resolution,
    };
    let mut summary = Vec::new();
    for seed in 100..105u64 {
        let gt = random_transform(&mut ChaCha8Rng::seed_from_u64(seed), 5.0);
        let spec = SyntheticSpec {
            rooms_per_row: 7,
            resolution,
            gt,
            noise: Noise {
                dropout: 0.02,
                speckle: 0.0,
            },
            seed,
            ..SyntheticSpec::default()
        };
        let pair = generate_synthetic_pair(&spec).map_err(|e| e.to_string())?;
        ensure(pair.plan.rooms >= 6 && pair.plan.extent() >= 30.0, || {
            format!(
                "seed {seed}: plan has {} rooms, extent {:.1} m",
                pair.plan.rooms,
                pair.plan.extent()
            )
        })?;
        let params = SegmentationParams::default();
        let ga = segment_grid_map(&pair.a, &params).map_err(|e| e.to_string())?.graph;
        let gb = segment_grid_map(&pair.b, &params).map_err(|e| e.to_string())?.graph;
        let protocol = Repeats {
            repeats: 20,
            base_seed: seed * 1000,
            tolerances,
        };
        let s = run_repeats(
            &ga,
            &gb,
            &gt,
            pair.a.free_centroid(),
            &MatchConfig::default(),
            &protocol,
        );
        summary.push(format!("{:.0}%", s.correctness_pct));
        ensure(s.correctness_pct >= 90.0, || {
            format!(
                "seed {seed} (θ={:.1}°): correctness {:.0}%",
                gt.theta.to_degrees(),
                s.correctness_pct
            )
        })?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 120.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!("correctness {} in {elapsed:.1} s", summary.join("/")))
}

/// Every segmented map matched to itself returns the identity exactly.
fn self_match_identity() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut maps = 0;
    for (seed, bands, rooms) in [(1u64, 1usize, 3usize), (2, 1, 6), (3, 2, 4), (4, 2, 7), (5, 1, 8)] {
        let spec = SyntheticSpec {
            bands,
            rooms_per_row: rooms,
            resolution: 0.05,
            seed,
            ..SyntheticSpec::default()
        };
        let pair = generate_synthetic_pair(&spec).map_err(|e| e.to_string())?;
        let g = segment_grid_map(&pair.b, &SegmentationParams::default())
            .map_err(|e| e.to_string())?
            .graph;
        for config in [
            MatchConfig::default(),
            MatchConfig {
                seed: Some(seed),
                ..MatchConfig::default()
            },
        ] {
            let r = match_graphs(&g, &g, &config).map_err(|e| e.to_string())?;
            let dt = r.transform.t.x.hypot(r.transform.t.y);
            let ds = (r.overlap_sum - r.matched_pairs.len() as f64).abs();
            ensure(r.transform.theta.abs() < 1e-6 && dt < 1e-6 && ds < 1e-6, || {
                format!(
                    "seed {seed}: θ={:e}, |t|={dt:e}, overlap_sum={} vs {} pairs",
                    r.transform.theta,
                    r.overlap_sum,
                    r.matched_pairs.len()
                )
            })?;
            worst = (worst.0.max(r.transform.theta.abs()), worst.1.max(dt), worst.2.max(ds));
            maps += 1;
        }
    }
    Ok(format!(
        "{maps} runs, max |θ|={:.1e}, max |t|={:.1e}, max overlap gap={:.1e}",
        worst.0, worst.1, worst.2
    ))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo..hi))
}

fn ratio_oracle(x: f64, y: f64) -> f64 {
    1.0 - x.min(y) / x.max(y)
}

fn area_oracle(a: f64, b: f64) -> f64 {
    1.0 - (a.min(b) / a.max(b)).sqrt()
}

fn passage_oracle(x: &[f64], y: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for &p in x {
        for &q in y {
            best = best.min(ratio_oracle(p, q));
        }
    }
    best
}

/// Feature costs against direct formula evaluation, then under scaling.
fn feature_cost_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut inputs = Vec::new();
    for _ in 0..1000 {
        let (a, b) = (log_uniform(&mut rng, -2.0, 4.0), log_uniform(&mut rng, -2.0, 4.0));
        let n = rng.gen_range(1..8);
        let m = rng.gen_range(1..8);
        let x: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, -1.0, 2.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| log_uniform(&mut rng, -1.0, 2.0)).collect();
        let (l1, l2) = (log_uniform(&mut rng, -1.0, 2.0), log_uniform(&mut rng, -1.0, 2.0));

        let ca = area_size_cost(a, b).map_err(|e| e.to_string())?;
        let cp = passage_distance_cost(&x, &y).ok_or("passage cost missing")?.cost;
        let cl = hull_longest_cost(l1, l2).map_err(|e| e.to_string())?;
        for (got, want, what) in [
            (ca, area_oracle(a, b), "area"),
            (cp, passage_oracle(&x, &y), "passage"),
            (cl, ratio_oracle(l1, l2), "hull"),
        ] {
            let d = (got - want).abs();
            ensure(d <= 1e-12, || format!("{what} cost {got} vs oracle {want}"))?;
            worst = worst.max(d);
        }
        inputs.push((a, b, x, y, l1, l2, ca, cp, cl));
    }
    let mut worst_scale = 0.0f64;
    for _ in 0..100 {
        let s = log_uniform(&mut rng, -2.0, 2.0);
        for (a, b, x, y, l1, l2, ca, cp, cl) in &inputs {
            let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
            let ys: Vec<f64> = y.iter().map(|v| v * s).collect();
            let d = [
                (area_size_cost(a * s * s, b * s * s).unwrap() - ca).abs(),
                (passage_distance_cost(&xs, &ys).unwrap().cost - cp).abs(),
                (hull_longest_cost(l1 * s, l2 * s).unwrap() - cl).abs(),
            ];
            let m = d.iter().copied().fold(0.0, f64::max);
            ensure(m <= 1e-12, || format!("scaling by {s} changed a cost by {m:e}"))?;
            worst_scale = worst_scale.max(m);
        }
    }
    Ok(format!(
        "1000 inputs max diff {worst:.1e}; 100 scalings max drift {worst_scale:.1e}"
    ))
}

fn random_convex(rng: &mut ChaCha8Rng, center: Point2, radius: f64) -> Polygon2 {
    let n = rng.gen_range(3..16);
    let pts: Vec<Point2> = (0..n)
        .map(|_| {
            let r = radius * rng.gen_range(0.2f64..1.0).sqrt();
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            Point2::new(center.x + r * phi.cos(), center.y + r * phi.sin())
        })
        .collect();
    convex_hull(&pts).expect("random points span an area")
}

fn inside_convex(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let mut pos = false;
    let mut neg = false;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let c = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        pos |= c > 0.0;
        neg |= c < 0.0;
    }
    !(pos && neg)
}

/// Random convex polygon containing the origin, so that any two overlap
/// and the relative error is defined.
fn around_origin(rng: &mut ChaCha8Rng, center: Point2) -> Polygon2 {
    loop {
        let r = rng.gen_range(2.0..6.0);
        let poly = random_convex(rng, center, r);
        if inside_convex(poly.vertices(), Point2::default()) {
            return poly;
        }
    }
}

fn bounds(poly: &[Point2]) -> (f64, f64, f64, f64) {
    poly.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
    )
}

/// Overlap area against Monte-Carlo sampling; hull diameter against all
/// point pairs.
fn geometry_oracles() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = around_origin(&mut rng, Point2::default());
        let c = Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let q = around_origin(&mut rng, c);
        let got = polygon_overlap_area(&p, &q);
        let (a, b) = (bounds(p.vertices()), bounds(q.vertices()));
        let (x0, y0, x1, y1) = (a.0.max(b.0), a.1.max(b.1), a.2.min(b.2), a.3.min(b.3));
        let mut hits = 0usize;
        for _ in 0..SAMPLES {
            let s = Point2::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
            if inside_convex(p.vertices(), s) && inside_convex(q.vertices(), s) {
                hits += 1;
            }
        }
        let estimate = (x1 - x0) * (y1 - y0) * hits as f64 / SAMPLES as f64;
        let rel = (got - estimate).abs() / estimate;
        ensure(rel < 0.01, || {
            format!("overlap {got} vs Monte-Carlo {estimate} ({:.2}%)", rel * 100.0)
        })?;
        worst = worst.max(rel);
    }
    for i in 0..100 {
        let n = rng.gen_range(3..60);
        let integer = i % 3 == 0;
        let pts: Vec<Point2> = (0..n)
            .map(|_| {
                if integer {
                    Point2::new(rng.gen_range(-5..5) as f64, rng.gen_range(-5..5) as f64)
                } else {
                    Point2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0))
                }
            })
            .collect();
        let Ok(hull) = convex_hull(&pts) else {
            continue;
        };
        let mut brute = 0.0f64;
        for a in &pts {
            for b in &pts {
                brute = brute.max(a.dist(*b));
            }
        }
        let got = hull_longest_distance(&hull);
        ensure(got == brute, || format!("hull diameter {got} vs brute force {brute}"))?;
    }
    Ok(format!(
        "50 overlaps within {:.3}% of Monte-Carlo; 100 hull diameters exact",
        worst * 100.0
    ))
}

/// Row-then-column double rank filter; ties rank the smaller id first.
fn knn_oracle(costs: &[Vec<f64>], row_ids: &[u32], col_ids: &[u32], k: usize) -> Vec<(usize, usize)> {
    let rows = costs.len();
    let cols = costs[0].len();
    let before = |c1: f64, id1: u32, c2: f64, id2: u32| c1 < c2 || (c1 == c2 && id1 < id2);
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let row_rank = (0..cols)
                .filter(|&jj| before(costs[i][jj], col_ids[jj], costs[i][j], col_ids[j]))
                .count();
            let col_rank = (0..rows)
                .filter(|&ii| before(costs[ii][j], row_ids[ii], costs[i][j], row_ids[i]))
                .count();
            if row_rank < k && col_rank < k {
                out.push((i, j));
            }
        }
    }
    out.sort();
    out
}

fn random_area(rng: &mut ChaCha8Rng, id: u32) -> Area {
    let (w, h) = (rng.gen_range(1.0..10.0), rng.gen_range(1.0..10.0));
    let x0 = id as f64 * 20.0;
    let poly = Polygon2::new(vec![
        Point2::new(x0, 0.0),
        Point2::new(x0 + w, 0.0),
        Point2::new(x0 + w, h),
        Point2::new(x0, h),
    ])
    .unwrap();
    let count = rng.gen_range(0..5);
    let passages = (0..count)
        .map(|_| match rng.gen_range(0..4) {
            0 => Point2::new(x0 + rng.gen_range(0.0..w), 0.0),
            1 => Point2::new(x0 + w, rng.gen_range(0.0..h)),
            2 => Point2::new(x0 + rng.gen_range(0.0..w), h),
            _ => Point2::new(x0, rng.gen_range(0.0..h)),
        })
        .collect();
    Area::new(id, poly, passages)
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> AreaGraph {
    let mut ids: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    AreaGraph::new(ids.into_iter().map(|id| random_area(rng, id)).collect(), 0.05).unwrap()
}

/// Mutual k-NN on random matrices (with ties) and on feature-cost
/// matrices of random area graphs, against the brute-force filter.
fn mutual_knn_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut pairs_seen = 0;
    for case in 0..100 {
        let (rows, cols) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let coarse = case % 2 == 0;
        let costs: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        let c: f64 = rng.gen_range(0.0..1.0);
                        if coarse {
                            (c * 5.0).floor() / 5.0
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect();
        let row_ids: Vec<u32> = (0..rows as u32).map(|i| (i * 7 + 3) % 101).collect();
        let col_ids: Vec<u32> = (0..cols as u32).map(|j| (j * 13 + 5) % 103).collect();
        let m = CostMatrix::new(row_ids.clone(), col_ids.clone(), costs.concat()).map_err(|e| e.to_string())?;
        for k in [1, 2, 3, 5] {
            let mut got = mutual_knn(&m, k);
            got.sort();
            let want = knn_oracle(&costs, &row_ids, &col_ids, k);
            ensure(got == want, || format!("{rows}x{cols} k={k}: {got:?} vs {want:?}"))?;
            checked += 1;
        }
    }
    for _ in 0..100 {
        let (na, nb) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let a = random_graph(&mut rng, na);
        let b = random_graph(&mut rng, nb);
        let table = FeatureTable::new(&a, &b).map_err(|e| e.to_string())?;
        let w = WeightVector::default();
        let m = table.costs(&w);
        let costs: Vec<Vec<f64>> = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
            .collect();
        for k in [1, 2, 3, 5] {
            let mut got: Vec<(usize, usize)> = mutual_knn_pairs(&table, &m, k)
                .iter()
                .map(|p| (p.index_a, p.index_b))
                .collect();
            got.sort();
            let want = knn_oracle(&costs, m.row_ids(), m.col_ids(), k);
            ensure(got == want, || format!("graph pair k={k}: {got:?} vs {want:?}"))?;
            pairs_seen += got.len();
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} (matrix, k) cases agree, {pairs_seen} mutual pairs from area graphs"
    ))
}

fn hypotheses(angles_deg: &[f64]) -> Vec<RotationHypothesis> {
    let seg = Segment2::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)).unwrap();
    let pair = MatchPair {
        area_a: 0,
        area_b: 0,
        index_a: 0,
        index_b: 0,
        cost: 0.0,
        segment_a: seg,
        segment_b: seg,
        kind: SegmentKind::HullLongest,
    };
    angles_deg
        .iter()
        .map(|a| RotationHypothesis {
            alpha: a.to_radians(),
            center_a: Point2::default(),
            center_b: Point2::default(),
            pair,
            pair_overlap: 1.0,
        })
        .collect()
}

fn circular_distance(a: f64, b: f64) -> f64 {
    (a - b).sin().atan2((a - b).cos()).abs()
}

/// Members within the threshold of their cluster's circular mean, plus
/// the two hand-worked cases.
fn clustering_invariants() -> Outcome {
    let thr = 3f64.to_radians();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut members = 0;
    for _ in 0..300 {
        let n = rng.gen_range(1..60);
        let centers: Vec<f64> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(-180.0..180.0)).collect();
        let angles: Vec<f64> = (0..n)
            .map(|_| {
                let c = centers[rng.gen_range(0..centers.len())];
                let a: f64 = c + rng.gen_range(-4.0..4.0);
                if a > 180.0 {
                    a - 360.0
                } else if a <= -180.0 {
                    a + 360.0
                } else {
                    a
                }
            })
            .collect();
        let h = hypotheses(&angles);
        let clusters = cluster_rotations(&h, thr).map_err(|e| e.to_string())?;
        let mut seen = vec![0; n];
        for c in &clusters {
            let (s, co) = c
                .members
                .iter()
                .fold((0.0, 0.0), |(s, co), &m| (s + h[m].alpha.sin(), co + h[m].alpha.cos()));
            let mean = s.atan2(co);
            for &m in &c.members {
                seen[m] += 1;
                let d = circular_distance(h[m].alpha, mean);
                ensure(d <= thr + 1e-12, || {
                    format!(
                        "member {:.3}° is {:.3}° from its cluster mean",
                        angles[m],
                        d.to_degrees()
                    )
                })?;
            }
            members += c.members.len();
        }
        ensure(seen.iter().all(|&c| c == 1), || {
            "a hypothesis is not in exactly one cluster".into()
        })?;
    }

    let wrap = cluster_rotations(&hypotheses(&[179.0, -179.0]), thr).map_err(|e| e.to_string())?;
    ensure(wrap.len() == 1 && wrap[0].members.len() == 2, || {
        format!("wrap-around case gave {wrap:?}")
    })?;
    ensure(circular_distance(wrap[0].center, std::f64::consts::PI) < 1e-9, || {
        format!("wrap-around center {}", wrap[0].center)
    })?;

    let three = cluster_rotations(&hypotheses(&[10.0, 11.0, 50.0]), thr).map_err(|e| e.to_string())?;
    let mut parts: Vec<Vec<usize>> = three.iter().map(|c| c.members.clone()).collect();
    parts.iter_mut().for_each(|p| p.sort());
    parts.sort();
    ensure(parts == vec![vec![0, 1], vec![2]], || {
        format!("{{10°, 11°, 50°}} gave {parts:?}")
    })?;
    ensure(
        three.iter().any(|c| (c.center.to_degrees() - 10.5).abs() < 1e-9),
        || "the {10°, 11°} cluster is not centered at 10.5°".into(),
    )?;
    Ok(format!(
        "300 random sets ({members} members) hold; wrap-around and {{10°, 11°, 50°}} cases match"
    ))
}

/// Matching phase on a pair with at most 60 areas, single-threaded.
fn timing_sanity() -> Outcome {
    let gt = random_transform(&mut ChaCha8Rng::seed_from_u64(7), 5.0);
    let spec = SyntheticSpec {
        bands: 2,
        rooms_per_row: 8,
        gt,
        noise: Noise {
            dropout: 0.02,
            speckle: 0.0,
        },
        seed: 7,
        ..SyntheticSpec::default()
    };
    let pair = generate_synthetic_pair(&spec).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        let start = Instant::now();
        let ga = segment_grid_map(&pair.a, &SegmentationParams::default())
            .map_err(|e| e.to_string())?
            .graph;
        let gb = segment_grid_map(&pair.b, &SegmentationParams::default())
            .map_err(|e| e.to_string())?
            .graph;
        let seg_s = start.elapsed().as_secs_f64();
        ensure(ga.len() <= 60 && gb.len() <= 60, || {
            format!("{} and {} areas", ga.len(), gb.len())
        })?;
        let start = Instant::now();
        let r = match_graphs(&ga, &gb, &MatchConfig::default()).map_err(|e| e.to_string())?;
        let match_s = start.elapsed().as_secs_f64();
        ensure(match_s < 2.0, || format!("matching took {match_s:.3} s"))?;
        let err = circular_distance(r.transform.theta, gt.theta).to_degrees();
        Ok(format!(
            "{}/{} areas: segmentation {seg_s:.3} s, matching {match_s:.3} s (rotation error {err:.2}°)",
            ga.len(),
            gb.len()
        ))
    })
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_areamatch"));
    c.env_remove("AREAMATCH_CONFIG");
    c
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let o = bin().args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!(
            "{args:?} exited {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    String::from_utf8(o.stdout).map_err(|e| e.to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `sweep` at step 0.01 on a map paired with itself.
fn weight_sweep_harness() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let pair = dir.path().join("pair");
    run_cli(&["synth", "-o", s(&pair), "--seed", "8"])?;
    let manifest = dir.path().join("self.json");
    let body = format!(
        r#"{{"map_a": "{0}", "map_b": "{0}", "resolution_a": 0.05, "resolution_b": 0.05, "gt": {{"theta_rad": 0.0, "t": [0.0, 0.0]}}}}"#,
        s(&pair.join("map_b.pgm"))
    );
    std::fs::write(&manifest, body).map_err(|e| e.to_string())?;
    let csv = dir.path().join("sweep.csv");
    run_cli(&["sweep", s(&manifest), "--step", "0.01", "-o", s(&csv)])?;
    let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let rows: Vec<&str> = text.lines().skip(1).collect();
    ensure(rows.len() == 5151, || format!("{} lattice rows", rows.len()))?;
    let bad: Vec<&&str> = rows.iter().filter(|r| r.rsplit(',').next() != Some("1")).collect();
    ensure(bad.is_empty(), || {
        format!("{} rows below 1.0, first {}", bad.len(), bad[0])
    })?;
    Ok("5151 lattice points, all with correctness 1".into())
}

/// Drops the three timing columns from a bench table.
fn bench_without_timings(text: &str, sep: Option<char>) -> String {
    text.lines()
        .map(|l| {
            let cells: Vec<&str> = match sep {
                Some(c) => l.split(c).collect(),
                None => l.split("  ").map(str::trim).filter(|c| !c.is_empty()).collect(),
            };
            format!("{}|{}", cells[0], cells[cells.len() - 1])
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Each command, run twice with a fixed seed, gives byte-identical output.
fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let d = dir.path();
    let path = |name: &str| d.join(name).to_str().unwrap().to_string();
    let (pair, a, b, manifest) = (
        path("pair"),
        path("pair/map_a.pgm"),
        path("pair/map_b.pgm"),
        path("pair/pair.json"),
    );
    let (graph, overlay, result) = (path("a.areagraph"), path("overlay.png"), path("match.json"));
    let (sweep_csv, bench_csv) = (path("sweep.csv"), path("bench.csv"));
    let synth = [
        "synth",
        "-o",
        &pair,
        "--seed",
        "11",
        "--random-transform",
        "--dropout",
        "0.02",
        "--rooms-per-row",
        "4",
    ];
    let segment = ["segment", &a, "--resolution", "0.05", "-o", &graph];
    let match_args = [
        "match",
        &a,
        &b,
        "--resolution-a",
        "0.05",
        "--resolution-b",
        "0.05",
        "--seed",
        "11",
        "--render",
        &overlay,
        "-o",
        &result,
    ];
    let eval_repeats = ["eval", &manifest, "--seed", "11", "--repeats", "5"];
    let eval_result = ["eval", &manifest, "--result", &result];
    let sweep = ["sweep", &manifest, "--seed", "11", "-o", &sweep_csv];
    let bench = [
        "bench",
        &manifest,
        "--seed",
        "11",
        "--repeats",
        "3",
        "--csv",
        &bench_csv,
    ];
    let files = [
        "pair/map_a.pgm",
        "pair/map_b.pgm",
        "pair/pair.json",
        "a.areagraph",
        "overlay.png",
        "match.json",
        "sweep.csv",
    ];

    let mut runs = Vec::new();
    for _ in 0..2 {
        let mut out = vec![
            run_cli(&synth)?,
            run_cli(&segment)?,
            run_cli(&match_args)?,
            run_cli(&eval_repeats)?,
            run_cli(&eval_result)?,
            run_cli(&sweep)?,
            bench_without_timings(&run_cli(&bench)?, None),
        ];
        let table = std::fs::read_to_string(&bench_csv).map_err(|e| e.to_string())?;
        out.push(bench_without_timings(&table, Some(',')));
        let mut bytes = Vec::new();
        for f in files {
            bytes.push(std::fs::read(d.join(f)).map_err(|e| format!("{f}: {e}"))?);
        }
        runs.push((out, bytes));
    }
    let names = [
        "synth",
        "segment",
        "match",
        "eval",
        "eval --result",
        "sweep",
        "bench",
        "bench --csv",
    ];
    for (i, name) in names.iter().enumerate() {
        ensure(runs[0].0[i] == runs[1].0[i], || format!("{name} stdout differs"))?;
    }
    for (i, f) in files.iter().enumerate() {
        ensure(runs[0].1[i] == runs[1].1[i], || format!("{f} differs"))?;
    }
    Ok(format!(
        "{} command outputs and {} files identical (bench compared without wall-clock columns)",
        names.len(),
        files.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("rotation recovery", rotation_recovery),
        ("self-match identity", self_match_identity),
        ("feature-cost oracles", feature_cost_oracles),
        ("geometry oracles", geometry_oracles),
        ("mutual k-NN oracle", mutual_knn_oracle),
        ("clustering invariants", clustering_invariants),
        ("timing sanity", timing_sanity),
        ("weight sweep", weight_sweep_harness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
