//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hstar_bench::config::{load_config, Algorithm};
use hstar_bench::experiment::{
    hole_family, run_alpha_sweep, run_hole_scaling, Prepared, Run, SweepOutcome,
};
use hstar_core::blk::{
    alpha_threshold, blk_enumerate_classes, blk_search, SignatureKey, WindingBound,
};
use hstar_core::complex::{
    boundary_matrix, build_grid_complex, euler_characteristic, GridSpec, Rect, VertexId,
};
use hstar_core::fixtures::{disk, tiny_annulus, two_hole, Fixture};
use hstar_core::homology::{
    are_homologous, chain_of_path, hodge_laplacian_1, hole_loop_values, path_projection,
    surface_harmonic_basis, DEFAULT_HOMOLOGY_TOLERANCE,
};
use hstar_core::hstar::hstar_search;
use hstar_core::oracle::{
    enumerate_classes, enumerate_simple_paths, for_each_simple_path, BoundarySpace, ClassTable,
    MAX_ORACLE_VERTICES,
};
use hstar_core::path::{dijkstra, Path};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, failure: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(failure())
    }
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn prepare(name: &str) -> Prepared {
    Prepared::new(load_config(config_path(name)).expect("shipped config loads"))
        .expect("shipped config builds")
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < budget, || {
        format!("took {spent:.1?}, budget {budget:?}")
    })
}

// 1. Algebraic identities on random surfaces.

struct RandomSurface {
    n: usize,
    holes: Vec<[usize; 4]>,
}

fn random_surface(rng: &mut ChaCha8Rng, wanted: usize) -> RandomSurface {
    loop {
        let n = rng.gen_range(5..=19);
        let mut holes: Vec<[usize; 4]> = Vec::new();
        for _ in 0..400 {
            if holes.len() == wanted {
                break;
            }
            let (w, h) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
            if n < w + 3 || n < h + 3 {
                continue;
            }
            let x = rng.gen_range(1..=n - 2 - w);
            let y = rng.gen_range(1..=n - 2 - h);
            let r = [x, y, x + w, y + h];
            let apart = |a: &[usize; 4]| a[2] < r[0] || r[2] < a[0] || a[3] < r[1] || r[3] < a[1];
            if holes.iter().all(apart) {
                holes.push(r);
            }
        }
        if holes.len() == wanted {
            return RandomSurface { n, holes };
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_residual = 0.0f64;
    let mut sizes = BTreeSet::new();
    for i in 0..50 {
        let spec = random_surface(&mut rng, i % 10);
        let side = (spec.n - 1) as f64;
        let grid = GridSpec {
            rows: spec.n,
            cols: spec.n,
            bounds: Rect::new(0.0, 0.0, side, side),
        };
        let rects: Vec<Rect> = spec
            .holes
            .iter()
            .map(|h| Rect::new(h[0] as f64, h[1] as f64, h[2] as f64, h[3] as f64))
            .collect();
        let s = build_grid_complex(&grid, &rects).map_err(|e| format!("surface {i}: {e}"))?;
        let d = spec.holes.len();
        sizes.insert((spec.n, d));

        let d1 = boundary_matrix(&s, 1).unwrap();
        let d2 = boundary_matrix(&s, 2).unwrap();
        ensure(d1.compose(&d2).is_empty(), || {
            format!("surface {i}: ∂1∂2 ≠ 0")
        })?;
        ensure(euler_characteristic(&s) == 1 - d as i64, || {
            format!(
                "surface {i}: χ = {} with {d} holes",
                euler_characteristic(&s)
            )
        })?;

        let basis = surface_harmonic_basis(&s).unwrap();
        ensure(basis.dim() == d, || {
            format!("surface {i}: dim ker L1 = {} with {d} holes", basis.dim())
        })?;
        let laplacian = hodge_laplacian_1(&s);
        let h = basis.columns();
        for j in 0..d {
            let col: Vec<f64> = h.column(j).iter().copied().collect();
            let inf = |v: Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let r = inf(laplacian.mul_vec(&col))
                .max(inf(d1.apply(&col)))
                .max(inf(d2.apply_transpose(&col)));
            worst_residual = worst_residual.max(r);
        }
        let gram = h.transpose() * &h;
        for a in 0..d {
            for b in 0..d {
                let expect = if a == b { 1.0 } else { 0.0 };
                worst_residual = worst_residual.max((gram[(a, b)] - expect).abs());
            }
        }

        for k in 0..4u64 {
            let mut walk = ChaCha8Rng::seed_from_u64(1000 * i as u64 + k);
            let mut v = VertexId(walk.gen_range(0..s.num_vertices()));
            let mut nodes = vec![v];
            for _ in 0..walk.gen_range(1..60) {
                let nbrs = s.neighbors(v);
                v = nbrs[walk.gen_range(0..nbrs.len())].vertex;
                nodes.push(v);
            }
            let path = Path::new(nodes).unwrap();
            let boundary = d1.apply(chain_of_path(&s, &path).unwrap().coefficients());
            for (u, value) in boundary.iter().enumerate() {
                let mut expect = 0.0;
                if u == path.dest().index() {
                    expect += 1.0;
                }
                if u == path.source().index() {
                    expect -= 1.0;
                }
                ensure((value - expect).abs() < 1e-12, || {
                    format!("surface {i}: ∂1Φ(τ) wrong at vertex {u}")
                })?;
            }
        }
    }
    ensure(worst_residual <= 1e-8, || {
        format!("Hodge residual {worst_residual:e} > 1e-8")
    })?;
    within_budget(start, Duration::from_secs(60))?;
    let hole_counts: BTreeSet<usize> = sizes.iter().map(|s| s.1).collect();
    Ok(format!(
        "50 surfaces, hole counts {:?}, worst Hodge residual {worst_residual:.1e}, {:.1?}",
        hole_counts,
        start.elapsed()
    ))
}

// 2. Projection-based homology test against the boundary residual test.

fn criterion_2() -> Outcome {
    let annulus = tiny_annulus().unwrap();
    let basis = surface_harmonic_basis(&annulus.surface).unwrap();
    let space = BoundarySpace::new(&annulus.surface).unwrap();
    let paths = enumerate_simple_paths(
        &annulus.surface,
        annulus.source,
        annulus.dest,
        MAX_ORACLE_VERTICES,
    )
    .unwrap();
    let chains: Vec<_> = paths
        .iter()
        .map(|p| chain_of_path(&annulus.surface, p).unwrap())
        .collect();
    let mut pairs = 0usize;
    let mut disagreements = 0usize;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let a = are_homologous(
                &annulus.surface,
                &basis,
                &paths[i],
                &paths[j],
                DEFAULT_HOMOLOGY_TOLERANCE,
            )
            .unwrap();
            let b = space.contains(&(&chains[i] - &chains[j]));
            pairs += 1;
            disagreements += usize::from(a != b);
        }
    }

    // On the larger fixture both tests are equivalence relations, so they
    // agree on every pair iff every path relates to the same class
    // representatives under both, and the representatives are pairwise
    // unrelated under both.
    let f = two_hole().unwrap();
    let basis2 = surface_harmonic_basis(&f.surface).unwrap();
    let space2 = BoundarySpace::new(&f.surface).unwrap();
    let table =
        enumerate_classes(&f.surface, &basis2, f.source, f.dest, MAX_ORACLE_VERTICES).unwrap();
    let reps: Vec<(Path, _)> = table
        .classes
        .values()
        .map(|c| {
            (
                c.representative.clone(),
                chain_of_path(&f.surface, &c.representative).unwrap(),
            )
        })
        .collect();
    for (i, (p, cp)) in reps.iter().enumerate() {
        for (q, cq) in &reps[i + 1..] {
            let a = are_homologous(&f.surface, &basis2, p, q, DEFAULT_HOMOLOGY_TOLERANCE).unwrap();
            disagreements += usize::from(a || space2.contains(&(cp - cq)));
        }
    }
    let mut checked = 0usize;
    for_each_simple_path(&f.surface, f.source, f.dest, MAX_ORACLE_VERTICES, |nodes| {
        let path = Path::new(nodes.to_vec()).unwrap();
        let chain = chain_of_path(&f.surface, &path).unwrap();
        for (rep, rep_chain) in &reps {
            let a = are_homologous(&f.surface, &basis2, &path, rep, DEFAULT_HOMOLOGY_TOLERANCE)
                .unwrap();
            let b = space2.contains(&(&chain - rep_chain));
            disagreements += usize::from(a != b);
        }
        checked += 1;
    })
    .unwrap();
    ensure(disagreements == 0, || {
        format!("{disagreements} disagreements")
    })?;
    Ok(format!(
        "annulus: {pairs} pairs of {} paths; two-hole: {checked} paths against {} classes; 0 disagreements",
        paths.len(),
        reps.len()
    ))
}

// 3. BLK class lengths against enumeration, and Dijkstra on a disk.

fn blk_against_oracle(f: &Fixture) -> Result<usize, String> {
    let basis = surface_harmonic_basis(&f.surface).unwrap();
    let table =
        enumerate_classes(&f.surface, &basis, f.source, f.dest, MAX_ORACLE_VERTICES).unwrap();
    let loops = hole_loop_values(&f.surface, &basis).unwrap();
    for (key, entry) in &table.classes {
        let out = blk_search(&f.surface, &basis, f.source, f.dest, &entry.representative).unwrap();
        ensure(out.result.length == entry.shortest_length, || {
            format!(
                "class {key}: BLK {} vs enumeration {}",
                out.result.length, entry.shortest_length
            )
        })?;
        let bound = WindingBound::around(&entry.projection, &loops);
        let records = blk_enumerate_classes(&f.surface, &basis, f.source, f.dest, bound).unwrap();
        for (other_key, other) in &table.classes {
            let found = records.iter().find(|r| &r.signature_key == other_key);
            ensure(
                found.is_some_and(|r| r.shortest_length == other.shortest_length),
                || {
                    format!(
                        "class {other_key} missing or with a different length in BLK enumeration"
                    )
                },
            )?;
        }
    }
    Ok(table.len())
}

fn criterion_3() -> Outcome {
    let annulus = blk_against_oracle(&tiny_annulus().unwrap())?;
    let two = blk_against_oracle(&two_hole().unwrap())?;
    let d = disk(6).unwrap();
    let basis = surface_harmonic_basis(&d.surface).unwrap();
    let tree = dijkstra(&d.surface, d.source, None).unwrap();
    let reference = tree.path_to(d.dest).unwrap();
    let out = blk_search(&d.surface, &basis, d.source, d.dest, &reference).unwrap();
    ensure(out.result.length == tree.distance(d.dest), || {
        format!(
            "disk: BLK {} vs Dijkstra {}",
            out.result.length,
            tree.distance(d.dest)
        )
    })?;
    Ok(format!(
        "annulus {annulus} classes, two-hole {two} classes, disk = Dijkstra {:.6}",
        out.result.length
    ))
}

// 4. Soft-cost threshold on the tiny annulus.

fn criterion_4() -> Outcome {
    let f = tiny_annulus().unwrap();
    let basis = surface_harmonic_basis(&f.surface).unwrap();
    let table: ClassTable =
        enumerate_classes(&f.surface, &basis, f.source, f.dest, MAX_ORACLE_VERTICES).unwrap();
    let reference = table
        .classes
        .values()
        .max_by(|a, b| a.shortest_length.total_cmp(&b.shortest_length))
        .unwrap();
    let target = path_projection(&f.surface, &basis, &reference.representative).unwrap();
    let target_key = SignatureKey::of(target.values());
    let dist = |p: &[f64]| {
        p.iter()
            .zip(target.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    let out = blk_search(
        &f.surface,
        &basis,
        f.source,
        f.dest,
        &reference.representative,
    )
    .unwrap();
    let alpha_star = alpha_threshold(&out.classes, out.result.length, &target).unwrap();

    // Per-class thresholds straight from the enumeration.
    let per_class: Vec<f64> = table
        .classes
        .values()
        .filter(|c| c.shortest_length < reference.shortest_length)
        .map(|c| (reference.shortest_length - c.shortest_length) / dist(c.projection.values()))
        .collect();
    let oracle_star = per_class.iter().copied().fold(0.0, f64::max);
    let smallest = per_class.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(
        (alpha_star - oracle_star).abs() <= 1e-9 * oracle_star.max(1.0),
        || format!("alpha_threshold {alpha_star} vs enumeration {oracle_star}"),
    )?;

    let minimiser = |alpha: f64| {
        table
            .classes
            .iter()
            .map(|(k, c)| (c.shortest_length + alpha * dist(c.projection.values()), k))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
            .1
            .clone()
    };
    for k in 1..=10 {
        let alpha = alpha_star * (1.0 + 0.1 * k as f64);
        ensure(minimiser(alpha) == target_key, || {
            format!("α = {alpha} above α* = {alpha_star} misses the target")
        })?;
    }
    for frac in [0.0, 0.5, 0.9, 0.999] {
        let alpha = smallest * frac;
        ensure(minimiser(alpha) != target_key, || {
            format!("α = {alpha} below {smallest} already picks the target")
        })?;
    }
    Ok(format!(
        "α* = {alpha_star:.6} (enumeration {oracle_star:.6}); 10 values above and 4 below checked"
    ))
}

// 5. Five-hole α sweep.

fn criterion_5(p: &Prepared, sweep: &SweepOutcome, elapsed: Duration) -> Outcome {
    let v = p.surface.num_vertices();
    ensure(v == 316, || {
        format!("surface has {v} vertices, expected 316")
    })?;
    let hstar: Vec<&Run> = sweep.runs_of(Algorithm::Hstar).collect();
    ensure(hstar.len() == 30, || format!("{} H* runs", hstar.len()))?;

    let base = hstar_search(&p.surface, &p.basis, p.source, p.dest, &p.reference, 0.0).unwrap();
    let tree = dijkstra(&p.surface, p.source, Some(p.dest)).unwrap();
    ensure(
        hstar[0].alpha == 0.0 && base.length == tree.distance(p.dest),
        || {
            format!(
                "H* at α = 0 has length {} but Dijkstra gives {}",
                base.length,
                tree.distance(p.dest)
            )
        },
    )?;

    let keys: BTreeSet<&SignatureKey> = hstar.iter().map(|r| &r.class_key).collect();
    ensure(keys.len() >= 3, || {
        format!("only {} distinct classes", keys.len())
    })?;
    ensure(hstar.last().unwrap().is_homologous(&p.target_key), || {
        "sweep does not end in the reference class".into()
    })?;
    for w in hstar.windows(2) {
        if w[0].class_key != w[1].class_key {
            ensure(w[1].result.proj_diff <= w[0].result.proj_diff, || {
                format!(
                    "Δγ rises from {} to {} at α = {}",
                    w[0].result.proj_diff, w[1].result.proj_diff, w[1].alpha
                )
            })?;
        }
    }
    let max_visits = hstar.iter().map(|r| r.result.visited_count).max().unwrap();
    ensure(max_visits <= v, || format!("H* visits {max_visits} > {v}"))?;

    let first = hstar
        .iter()
        .find(|r| r.is_homologous(&p.target_key))
        .unwrap();
    let blk = sweep.runs_of(Algorithm::Blk).next().ok_or("no BLK run")?;
    let gap = (first.result.length - blk.result.length) / blk.result.length;
    ensure(gap.abs() <= 0.05, || {
        format!(
            "H* length {} vs BLK {}",
            first.result.length, blk.result.length
        )
    })?;
    let ratio = blk.result.visited_count as f64 / first.result.visited_count as f64;
    ensure(ratio >= 10.0, || {
        format!("BLK visits only {ratio:.1}× H* visits")
    })?;
    ensure(elapsed < Duration::from_secs(300), || {
        format!("took {elapsed:.1?}")
    })?;
    Ok(format!(
        "{} classes; first homologous α = {:.3}, length {:.4} vs BLK {:.4}; visits H* ≤ {max_visits}, BLK/H* = {ratio:.0}×; {elapsed:.1?}",
        keys.len(),
        first.alpha,
        first.result.length,
        blk.result.length
    ))
}

// 6. Rollout never worse than its base heuristic.

fn criterion_6(sweeps: &[(&str, &SweepOutcome)]) -> Outcome {
    let mut compared = 0;
    for (name, sweep) in sweeps {
        let hstar: Vec<&Run> = sweep.runs_of(Algorithm::Hstar).collect();
        for alg in [Algorithm::Rhstar, Algorithm::Prhstar] {
            for (h, r) in hstar.iter().zip(sweep.runs_of(alg)) {
                ensure(h.alpha == r.alpha, || "sweep rows out of order".into())?;
                ensure(r.total_cost() <= h.total_cost(), || {
                    format!(
                        "{name}: {alg} cost {} > H* cost {} at α = {}",
                        r.total_cost(),
                        h.total_cost(),
                        r.alpha
                    )
                })?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} (algorithm, α) pairs, none above H*"))
}

// 7. Hole-count scaling.

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let config = load_config(config_path("holes_approx.json")).unwrap();
    let family = hole_family(&config);
    ensure(family.len() == 9, || {
        format!("family has {} surfaces", family.len())
    })?;
    let surfaces = run_hole_scaling(&family, &Algorithm::ALL).map_err(|e| e.to_string())?;

    let mut failures = Vec::new();
    for s in &surfaces {
        let blk = s.run(Algorithm::Blk).unwrap();
        for alg in Algorithm::ALL {
            let r = s.run(alg).unwrap();
            if !r.is_homologous(&s.target_key) {
                failures.push(format!(
                    "{}: {alg} never reaches the reference class",
                    s.experiment_id
                ));
            } else if (r.result.length - blk.result.length).abs() > 0.05 * blk.result.length {
                failures.push(format!(
                    "{}: {alg} length {:.4} vs BLK {:.4}",
                    s.experiment_id, r.result.length, blk.result.length
                ));
            }
        }
    }
    let visits = |alg: Algorithm| -> Vec<usize> {
        surfaces
            .iter()
            .map(|s| s.run(alg).unwrap().result.visited_count)
            .collect()
    };
    let mut spreads = Vec::new();
    for alg in [Algorithm::Hstar, Algorithm::Rhstar, Algorithm::Prhstar] {
        let v = visits(alg);
        let spread = *v.iter().max().unwrap() as f64 / *v.iter().min().unwrap() as f64;
        spreads.push(format!("{} {spread:.2}×", alg.label()));
        if spread >= 2.0 {
            failures.push(format!(
                "{alg} visits vary {spread:.2}× across the family: {v:?}"
            ));
        }
    }
    let blk = visits(Algorithm::Blk);
    let growth = blk[6] as f64 / blk[3] as f64;
    if growth < 5.0 {
        failures.push(format!(
            "BLK visits at 7 holes are only {growth:.1}× those at 4"
        ));
    }
    let classes: Vec<usize> = surfaces
        .iter()
        .map(|s| s.blk_classes.as_ref().unwrap().len())
        .collect();
    if !(classes[4] < classes[5] && classes[5] < classes[6]) {
        failures.push(format!(
            "BLK class counts at 5, 6, 7 holes: {:?}",
            &classes[4..7]
        ));
    }
    if start.elapsed() >= Duration::from_secs(600) {
        failures.push(format!("took {:.1?}", start.elapsed()));
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!(
        "lengths equal per surface; visit spread {}; BLK 7/4 holes {growth:.1}×; classes at 5,6,7 = {:?}; {:.1?}",
        spreads.join(", "),
        &classes[4..7],
        start.elapsed()
    ))
}

// 8. Byte-identical rows.csv across CLI runs.

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hstar-bench"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "`{}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn criterion_8() -> Outcome {
    let suite = [
        ("sweep", "fig2_approx.json"),
        ("holes", "holes_approx.json"),
        ("oracle", "tiny_annulus.json"),
        ("sweep", "tiny_annulus.json"),
    ];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut bytes = 0;
    for (i, (cmd, config)) in suite.iter().enumerate() {
        let config = config_path(config);
        let mut outputs = Vec::new();
        for dir in &dirs {
            let out = dir.path().join(format!("{i}-{cmd}"));
            run_cli(&[
                cmd,
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])?;
            outputs.push(std::fs::read(out.join("rows.csv")).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || {
            format!("{cmd} {}: rows.csv differs", config.display())
        })?;
        bytes += outputs[0].len();
    }
    Ok(format!(
        "{} commands run twice, {bytes} bytes of rows.csv identical",
        suite.len()
    ))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {message}"))
    });
    match &outcome {
        Ok(detail) => println!("criterion {name}: PASS  {detail}"),
        Err(detail) => println!("criterion {name}: FAIL  {detail}"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut passed = vec![
        run("1", criterion_1),
        run("2", criterion_2),
        run("3", criterion_3),
        run("4", criterion_4),
    ];

    let sweep_start = Instant::now();
    let fig2 = prepare("fig2_approx.json");
    let fig2_sweep = run_alpha_sweep(&fig2, &Algorithm::ALL, false).expect("fig2 sweep runs");
    let fig2_time = sweep_start.elapsed();
    let annulus = prepare("tiny_annulus.json");
    let annulus_sweep =
        run_alpha_sweep(&annulus, &Algorithm::ALL, false).expect("annulus sweep runs");

    passed.push(run("5", || criterion_5(&fig2, &fig2_sweep, fig2_time)));
    passed.push(run("6", || {
        criterion_6(&[("fig2", &fig2_sweep), ("tiny annulus", &annulus_sweep)])
    }));
    passed.push(run("7", criterion_7));
    passed.push(run("8", criterion_8));

    let failed = passed.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        passed.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
