use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use areamatch::evaluation::{
    bench, evaluate, generate_synthetic_pair, ground_truth_pairs, run_repeats, seeded_transform, BenchPair, EvalReport,
    Noise, Repeats, SyntheticSpec, Tolerances,
};
use areamatch::geometry::{Point2, RigidTransform2D};
use areamatch::map_io::{save_grid_map, write_alignment_png, write_area_graph};
use areamatch::matching::{sweep_csv, weight_sweep, SweepCase, SweepParams};
use areamatch::segmentation::{segment_grid_map, AreaGraph};
use areamatch::transform::{match_maps, MatchResult};
use areamatch::Error;

use crate::args::{BenchArgs, Command, EvalArgs, MatchArgs, SegmentArgs, SweepArgs, SynthArgs};
use crate::config::FileConfig;
use crate::manifest::{read_json, write_text, LoadedManifest, MapSource, PairManifest, TransformRecord};

pub fn dispatch(command: Command, file: &FileConfig) -> Result<(), Error> {
    match command {
        Command::Segment(a) => segment(&a, file),
        Command::Match(a) => match_cmd(&a, file),
        Command::Eval(a) => eval(&a, file),
        Command::Bench(a) => bench_cmd(&a, file),
        Command::Sweep(a) => sweep(&a, file),
        Command::Synth(a) => synth(&a),
    }
}

fn print(text: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn segment(args: &SegmentArgs, file: &FileConfig) -> Result<(), Error> {
    let thresholds = file.thresholds(&args.grid)?;
    let params = file.segmentation(&args.seg)?;
    let grid = areamatch::map_io::load_grid_map(&args.map, args.resolution, thresholds)?;
    let seg = segment_grid_map(&grid, &params)?;
    for w in &seg.warnings {
        log::warn!("{}: {w:?}", args.map.display());
    }
    let graph = seg.graph.with_source(args.map.display().to_string());
    write_area_graph(&graph, &args.output)?;
    print(&format!(
        "{} areas, {} adjacencies -> {}\n",
        graph.len(),
        graph.adjacency().len(),
        args.output.display()
    ))
}

#[derive(Serialize)]
struct TimingsRecord {
    segmentation_s: f64,
    matching_s: f64,
    total_s: f64,
}

#[derive(Serialize)]
struct MatchRecord {
    theta_rad: f64,
    t: [f64; 2],
    overlap_sum: f64,
    best_cluster_size: usize,
    matched_pairs: Vec<[u32; 2]>,
    candidate_pairs: usize,
    hypotheses: usize,
    clusters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<TimingsRecord>,
}

impl MatchRecord {
    fn new(r: &MatchResult, timings: bool) -> Self {
        Self {
            theta_rad: r.transform.theta,
            t: [r.transform.t.x, r.transform.t.y],
            overlap_sum: r.overlap_sum,
            best_cluster_size: r.best_cluster_size,
            matched_pairs: r.matched_pairs.iter().map(|p| [p.area_a, p.area_b]).collect(),
            candidate_pairs: r.candidate_pairs.len(),
            hypotheses: r.hypotheses,
            clusters: r.clusters,
            timings: timings.then_some(TimingsRecord {
                segmentation_s: r.timings.segmentation_s,
                matching_s: r.timings.matching_s,
                total_s: r.timings.total_s,
            }),
        }
    }
}

fn match_cmd(args: &MatchArgs, file: &FileConfig) -> Result<(), Error> {
    let config = file.match_config(&args.seg, &args.params)?;
    let thresholds = file.thresholds(&args.grid)?;
    if args.render.is_some()
        && (crate::manifest::is_graph_path(&args.map_a) || crate::manifest::is_graph_path(&args.map_b))
    {
        return Err(Error::Config("--render needs raster inputs for both maps".into()));
    }
    let a = MapSource::load(&args.map_a, args.resolution_a, thresholds, "--resolution-a")?;
    let b = MapSource::load(&args.map_b, args.resolution_b, thresholds, "--resolution-b")?;
    let result = match_maps(a.input(), b.input(), &config)?;
    if let (Some(path), Some(ga), Some(gb)) = (&args.render, a.grid(), b.grid()) {
        write_alignment_png(ga, gb, &result.transform, path)?;
    }
    let text = to_json(&MatchRecord::new(&result, args.timings));
    if let Some(path) = &args.output {
        write_text(path, &text)?;
    }
    print(&text)
}

#[derive(Serialize)]
struct SingleEval {
    #[serde(flatten)]
    report: EvalReport,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct RepeatEval {
    runs: usize,
    successes: usize,
    correctness_pct: f64,
    tolerances: Tolerances,
    /// One entry per seed; `null` when matching failed.
    reports: Vec<Option<EvalReport>>,
}

fn tolerances(args: &EvalArgs, resolution: f64) -> Tolerances {
    let d = Tolerances::for_resolution(resolution);
    Tolerances {
        rotation_deg: args.tol_deg.unwrap_or(d.rotation_deg),
        translation_m: args.tol_m.unwrap_or(d.translation_m),
    }
}

fn eval(args: &EvalArgs, file: &FileConfig) -> Result<(), Error> {
    let config = file.match_config(&args.seg, &args.params)?;
    let thresholds = file.thresholds(&args.grid)?;
    let m = LoadedManifest::read(&args.manifest)?;
    let a = MapSource::load(&m.map_a, m.resolution_a, thresholds, "resolution_a")?;
    let b = MapSource::load(&m.map_b, m.resolution_b, thresholds, "resolution_b")?;
    let tol = tolerances(args, a.resolution().max(b.resolution()));
    for (name, v) in [("--tol-deg", tol.rotation_deg), ("--tol-m", tol.translation_m)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
        }
    }
    let centroid = a.centroid();

    if let Some(path) = &args.result {
        let r: TransformRecord = read_json(path)?;
        let report = evaluate(&r.into(), &m.gt, centroid, &tol);
        return print(&to_json(&SingleEval {
            report,
            tolerances: tol,
        }));
    }

    let ga = a.into_graph(&config.segmentation)?;
    let gb = b.into_graph(&config.segmentation)?;
    let protocol = Repeats {
        repeats: file.repeats(args.repeats),
        base_seed: config.seed.unwrap_or(0),
        tolerances: tol,
    };
    let s = run_repeats(&ga, &gb, &m.gt, centroid, &config, &protocol);
    print(&to_json(&RepeatEval {
        runs: s.runs,
        successes: s.successes,
        correctness_pct: s.correctness_pct,
        tolerances: tol,
        reports: s.reports,
    }))
}

fn bench_cmd(args: &BenchArgs, file: &FileConfig) -> Result<(), Error> {
    let config = file.match_config(&args.seg, &args.params)?;
    let thresholds = file.thresholds(&args.grid)?;
    let mut pairs = Vec::with_capacity(args.manifests.len());
    for path in &args.manifests {
        let start = Instant::now();
        let m = LoadedManifest::read(path)?;
        let load = |p: &Path, r: Option<f64>, flag: &str| match MapSource::load(p, r, thresholds, flag)? {
            MapSource::Grid(g) => Ok(g),
            MapSource::Graph(_) => Err(Error::Config(format!(
                "bench times segmentation and needs raster maps, got {}",
                p.display()
            ))),
        };
        let a = load(&m.map_a, m.resolution_a, "resolution_a")?;
        let b = load(&m.map_b, m.resolution_b, "resolution_b")?;
        pairs.push(BenchPair {
            name: m.name(),
            a,
            b,
            gt: m.gt,
            io_s: start.elapsed().as_secs_f64(),
        });
    }
    let table = bench(&pairs, file.repeats(args.repeats), &config, config.seed.unwrap_or(0))?;
    if let Some(path) = &args.csv {
        write_text(path, &table.to_csv())?;
    }
    print(&table.to_text())
}

fn sweep(args: &SweepArgs, file: &FileConfig) -> Result<(), Error> {
    let config = file.match_config(&args.seg, &args.params)?;
    let thresholds = file.thresholds(&args.grid)?;
    if !(0.0..=1.0).contains(&args.gt_overlap) {
        return Err(Error::Config(format!(
            "--gt-overlap must be in [0, 1], got {}",
            args.gt_overlap
        )));
    }
    let mut graphs: Vec<(AreaGraph, AreaGraph, RigidTransform2D)> = Vec::new();
    for path in &args.manifests {
        let m = LoadedManifest::read(path)?;
        let a = MapSource::load(&m.map_a, m.resolution_a, thresholds, "resolution_a")?;
        let b = MapSource::load(&m.map_b, m.resolution_b, thresholds, "resolution_b")?;
        graphs.push((
            a.into_graph(&config.segmentation)?,
            b.into_graph(&config.segmentation)?,
            m.gt,
        ));
    }
    let cases: Vec<SweepCase<'_>> = graphs
        .iter()
        .map(|(a, b, gt)| SweepCase {
            a,
            b,
            gt_pairs: ground_truth_pairs(a, b, gt, args.gt_overlap),
        })
        .collect();
    for (case, path) in cases.iter().zip(&args.manifests) {
        if case.gt_pairs.is_empty() {
            log::warn!("{}: no ground-truth area correspondences", path.display());
        }
    }
    let points = weight_sweep(
        &cases,
        &SweepParams {
            step: args.step,
            k: config.k,
            angle_threshold: config.angle_threshold,
            overlap_threshold: config.overlap_threshold,
        },
    )?;
    write_text(&args.output, &sweep_csv(&points))?;
    let mean = points.iter().map(|p| p.correctness).sum::<f64>() / points.len() as f64;
    let best = points
        .iter()
        .max_by(|x, y| x.correctness.total_cmp(&y.correctness))
        .expect("lattice is never empty");
    print(&format!(
        "{} weight vectors, mean correctness {mean:.4}, best {:.4} at {} -> {}\n",
        points.len(),
        best.correctness,
        best.weights,
        args.output.display()
    ))
}

fn synth(args: &SynthArgs) -> Result<(), Error> {
    let gt = if args.random_transform {
        if !(args.max_translation.is_finite() && args.max_translation >= 0.0) {
            return Err(Error::Config(format!(
                "--max-translation must be non-negative, got {}",
                args.max_translation
            )));
        }
        seeded_transform(args.seed, args.max_translation)
    } else {
        RigidTransform2D::new(args.theta_deg.to_radians(), Point2::new(args.tx, args.ty))
    };
    let spec = SyntheticSpec {
        bands: args.bands,
        rooms_per_row: args.rooms_per_row,
        resolution: args.resolution,
        gt,
        noise: Noise {
            dropout: args.dropout,
            speckle: args.speckle,
        },
        seed: args.seed,
        ..SyntheticSpec::default()
    };
    let pair = generate_synthetic_pair(&spec)?;
    std::fs::create_dir_all(&args.output).map_err(|source| Error::Io {
        path: args.output.clone(),
        source,
    })?;
    save_grid_map(&pair.a, &args.output.join("map_a.pgm"))?;
    save_grid_map(&pair.b, &args.output.join("map_b.pgm"))?;
    // Rasters are reloaded with their origin at zero; express the truth in
    // those frames.
    let shift = |o: Point2| RigidTransform2D::new(0.0, o);
    let file_gt = shift(Point2::new(0.0, 0.0) - pair.b.origin())
        .compose(&pair.gt)
        .compose(&shift(pair.a.origin()));
    let manifest = PairManifest {
        map_a: "map_a.pgm".into(),
        map_b: "map_b.pgm".into(),
        resolution_a: Some(args.resolution),
        resolution_b: Some(args.resolution),
        gt: file_gt.into(),
    };
    let path = args.output.join("pair.json");
    write_text(&path, &to_json(&manifest))?;
    print(&format!(
        "{} rooms, extent {:.1} m -> {}\n",
        pair.plan.rooms,
        pair.plan.extent(),
        path.display()
    ))
}
