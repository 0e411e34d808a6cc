//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rankframe::ballots::{parse_ballots, parse_names, tally, BallotFile};
use rankframe::cache::{
    load_cache, n_dir, read_manifest, write_cache, BuildOptions, CacheManifest,
};
use rankframe::combinatorics::{factorial, h_n_shapes, IntegerPartition, OrderedSetPartition};
use rankframe::frame::{
    energy_table, graph_fourier, AnalysisFilter, ExecMode, SetupOptions, ShapeSelection, Signal,
    Transform,
};
use rankframe::schreier::vertex_labels;
use rankframe::spectral::verify_dominance_conjecture;

use crate::tables::{self, emit, format_lambda, Format};
use crate::{CacheArgs, CliError, ModeArg};

/// Largest `n` whose full `H_n` is built without `--shapes`.
const MAX_FULL_N: usize = 10;
/// Cached mode is chosen automatically only below this many bytes of index maps.
const AUTO_CACHED_BYTES: f64 = (1u64 << 30) as f64;
const GIB: f64 = (1u64 << 30) as f64;

fn cache_root(args: &CacheArgs) -> Result<&Path, CliError> {
    args.cache.as_deref().ok_or_else(|| {
        CliError::Invalid("no cache given; pass --cache DIR or set RANKFRAME_CACHE".into())
    })
}

/// `DIR` itself when it holds a manifest, otherwise `DIR/n<N>`.
fn cache_dir(root: &Path, n: usize) -> PathBuf {
    if root.join("manifest.json").is_file() {
        root.to_path_buf()
    } else {
        n_dir(root, n)
    }
}

/// Bytes of index maps held at once in cached mode: the shape with most liftings.
fn cached_estimate(n: usize, shapes: &[IntegerPartition]) -> f64 {
    let z = shapes.iter().map(|s| s.constants().z).max().unwrap_or(0);
    z as f64 * factorial(n) as f64 * 4.0
}

fn mode_name(mode: ExecMode) -> &'static str {
    match mode {
        ExecMode::Cached => "cached",
        ExecMode::Streamed => "streamed",
    }
}

fn choose_mode(requested: ModeArg, estimate: f64, budget_gib: f64) -> Result<ExecMode, CliError> {
    let budget = budget_gib * GIB;
    match requested {
        ModeArg::Streamed => Ok(ExecMode::Streamed),
        ModeArg::Cached if estimate > budget => Err(CliError::Resource(format!(
            "cached mode needs about {:.2} GiB of index maps, above the {budget_gib} GiB budget; \
             use --mode streamed or raise --memory-budget-gib",
            estimate / GIB
        ))),
        ModeArg::Cached => Ok(ExecMode::Cached),
        ModeArg::Auto if estimate <= budget.min(AUTO_CACHED_BYTES) => Ok(ExecMode::Cached),
        ModeArg::Auto => Ok(ExecMode::Streamed),
    }
}

/// Explicit `--mode` wins; otherwise the mode recorded at setup, checked against the budget.
fn runtime_mode(
    args: &CacheArgs,
    manifest: &CacheManifest,
    t: &Transform,
) -> Result<ExecMode, CliError> {
    let estimate = t.cached_bytes() as f64;
    let requested = match args.mode {
        Some(m) => m,
        None if manifest.options.mode == "cached" => ModeArg::Cached,
        None if manifest.options.mode == "streamed" => ModeArg::Streamed,
        None => ModeArg::Auto,
    };
    match (
        args.mode,
        choose_mode(requested, estimate, args.memory_budget_gib),
    ) {
        (None, Err(_)) => Ok(ExecMode::Streamed),
        (_, r) => r,
    }
}

fn load_ballots(path: &Path) -> Result<(BallotFile, Signal), CliError> {
    let text = fs::read_to_string(path)?;
    let mut b = parse_ballots(&text)?;
    b.label = path.file_name().map(|s| s.to_string_lossy().into_owned());
    let f = tally(&b);
    Ok((b, f))
}

fn open_cache(args: &CacheArgs, n: usize) -> Result<(Transform, CacheManifest), CliError> {
    let root = cache_root(args)?;
    let dir = cache_dir(root, n);
    if !dir.join("manifest.json").is_file() {
        let mut found: Vec<String> = fs::read_dir(root)
            .map(|it| {
                it.filter_map(|e| e.ok())
                    .filter(|e| e.path().join("manifest.json").is_file())
                    .map(|e| e.file_name().to_string_lossy().into_owned())
                    .collect()
            })
            .unwrap_or_default();
        found.sort();
        return Err(CliError::Invalid(format!(
            "no cache for n = {n} under {} (found: {}); run `rankframe setup --n {n}` first",
            root.display(),
            if found.is_empty() {
                "none".into()
            } else {
                found.join(", ")
            }
        )));
    }
    let manifest = read_manifest(&dir)?;
    if manifest.n != n {
        return Err(CliError::Invalid(format!(
            "cache at {} is for n = {}, ballots have n = {n}",
            dir.display(),
            manifest.n
        )));
    }
    Ok(load_cache(&dir)?)
}

pub fn setup(
    n: usize,
    args: &CacheArgs,
    shapes: Option<usize>,
    all_shapes: bool,
    hook_fastpath: bool,
    force: bool,
) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Invalid("n must be positive".into()));
    }
    if n > MAX_FULL_N && (shapes.is_none() || all_shapes) {
        return Err(CliError::Resource(format!(
            "n = {n} exceeds the full-transform maximum of {MAX_FULL_N}; pass --shapes K to build the first K shapes of H_n"
        )));
    }
    if shapes == Some(0) {
        return Err(CliError::Invalid("--shapes must be at least 1".into()));
    }
    let selection = if all_shapes {
        ShapeSelection::All
    } else {
        ShapeSelection::H(shapes)
    };
    let dir = n_dir(cache_root(args)?, n);
    let options = |mode: ExecMode| BuildOptions {
        top_k: shapes,
        conjugates_included: all_shapes,
        mode: mode_name(mode).into(),
        hook_fastpath,
    };

    if dir.join("manifest.json").is_file() && !force {
        let t0 = Instant::now();
        let (t, manifest) = load_cache(&dir)?;
        let same = manifest.n == n
            && manifest.options.top_k == shapes
            && manifest.options.conjugates_included == all_shapes
            && manifest.options.hook_fastpath == hook_fastpath;
        if !same {
            return Err(CliError::Invalid(format!(
                "{} holds a cache built with different options; pass --force to rebuild",
                dir.display()
            )));
        }
        println!(
            "cache verified: {} ({} shapes, {} atoms, {:.3}s)",
            dir.display(),
            t.bundles().len(),
            t.atom_count(),
            t0.elapsed().as_secs_f64()
        );
        return Ok(());
    }

    let shape_list = selection.shapes(n);
    let estimate = cached_estimate(n, &shape_list);
    let mode = choose_mode(
        args.mode.unwrap_or(ModeArg::Auto),
        estimate,
        args.memory_budget_gib,
    )?;

    let (t, timings) = Transform::setup(
        n,
        &SetupOptions {
            selection,
            hook_fastpath,
        },
    )?;
    let t0 = Instant::now();
    let manifest = write_cache(&dir, &t, &options(mode))?;
    let write_time = t0.elapsed();
    for b in t.bundles() {
        for w in &b.spectrum.warnings {
            eprintln!("warning: {}: {w}", b.shape);
        }
    }
    println!("spectra            {:>9.3}s", timings.spectra.as_secs_f64());
    println!(
        "graphs and paths   {:>9.3}s",
        timings.graphs_and_paths.as_secs_f64()
    );
    println!(
        "characteristic     {:>9.3}s",
        timings.characteristic.as_secs_f64()
    );
    println!("cache write        {:>9.3}s", write_time.as_secs_f64());
    let labels: Vec<String> = t.bundles().iter().map(|b| b.shape.to_string()).collect();
    println!("shapes: {}", labels.join(" "));
    println!("atoms: {}", manifest.atoms);
    println!(
        "mode: {} (cached index maps about {:.3} GiB)",
        mode_name(mode),
        estimate / GIB
    );
    println!("cache: {}", dir.display());
    Ok(())
}

pub fn analyze(
    args: &CacheArgs,
    ballots: &Path,
    shapes: Option<usize>,
    shape: &[String],
    max_eigs: Option<usize>,
    out: &Path,
    format: Format,
) -> Result<(), CliError> {
    let (b, f) = load_ballots(ballots)?;
    let (t, manifest) = open_cache(args, b.n)?;
    let mode = runtime_mode(args, &manifest, &t)?;
    let explicit = if shape.is_empty() {
        None
    } else {
        Some(
            shape
                .iter()
                .map(|s| IntegerPartition::parse(s))
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    let filter = AnalysisFilter {
        top_shapes: shapes,
        shapes: explicit,
        max_eigs,
    };
    let mut table = t.analyze(&f, &filter, mode)?;
    table.dataset = b.label.clone();
    tables::write_coefficients(&table, out, format)?;
    let total = f.norm_sq();
    let captured = table.energy();
    let fraction = if total > 0.0 {
        format!("{:.9}", captured / total)
    } else {
        "n/a".into()
    };
    println!(
        "ballots: {}  |f|^2: {}  captured: {}  fraction: {fraction}  coefficients: {}",
        b.total(),
        total,
        captured,
        table.rows.len()
    );
    let all = IntegerPartition::all(b.n).len();
    if t.bundles().len() < all {
        println!(
            "cache covers {} of {all} shapes; build with --all-shapes for a complete expansion",
            t.bundles().len()
        );
    }
    Ok(())
}

pub fn energy(
    args: &CacheArgs,
    ballots: Option<&Path>,
    coefficients: Option<&Path>,
    conjugates: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let rows = match (ballots, coefficients) {
        (Some(path), _) => {
            let (b, f) = load_ballots(path)?;
            let (t, manifest) = open_cache(args, b.n)?;
            let mode = runtime_mode(args, &manifest, &t)?;
            t.complete_energies(&f, conjugates, mode)?
        }
        (None, Some(path)) => {
            if conjugates {
                return Err(CliError::Invalid("--conjugates needs --ballots".into()));
            }
            energy_table(&tables::read_coefficients(path)?)
        }
        (None, None) => return Err(CliError::Invalid("pass --ballots or --coefficients".into())),
    };
    emit(&tables::energy_csv(&rows)?, out)
}

fn named_groups(
    lifting: &OrderedSetPartition,
    names: &std::collections::BTreeMap<usize, String>,
) -> String {
    lifting
        .blocks()
        .iter()
        .map(|b| {
            b.iter()
                .map(|e| names.get(e).cloned().unwrap_or_else(|| e.to_string()))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

pub fn top(
    coefficients: &Path,
    k: usize,
    names: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let table = tables::read_coefficients(coefficients)?;
    let names = match names {
        Some(p) => parse_names(&fs::read_to_string(p)?)?,
        None => Default::default(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "rank",
        "shape",
        "lambda",
        "k",
        "partition",
        "alpha",
        "groups",
    ])?;
    for (i, r) in table.top(k).into_iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.shape.label(),
            format_lambda(r.lambda),
            r.k.to_string(),
            r.lifting.label(),
            r.alpha.to_string(),
            named_groups(&r.lifting, &names),
        ])?;
    }
    emit(
        &w.into_inner().map_err(|e| CliError::Io(e.into_error()))?,
        out,
    )
}

pub fn reconstruct(
    args: &CacheArgs,
    ballots: &Path,
    coefficients: &Path,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (b, f) = load_ballots(ballots)?;
    let (t, manifest) = open_cache(args, b.n)?;
    let mode = runtime_mode(args, &manifest, &t)?;
    let mut table = tables::read_coefficients(coefficients)?;
    if table.rows.is_empty() {
        table.n = b.n;
    }
    if table.n != b.n {
        return Err(CliError::Invalid(format!(
            "coefficients are for n = {}, ballots have n = {}",
            table.n, b.n
        )));
    }
    tables::resolve_keys(&t, &mut table)?;
    let g = t.synthesize(&table, mode)?;
    let diff: f64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm = f.norm_sq().sqrt();
    let rel = if norm > 0.0 { diff / norm } else { diff };
    println!("relative error: {rel:.3e}");
    if let Some(path) = out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rank", "value"])?;
        for (r, v) in g.values().iter().enumerate() {
            w.write_record([r.to_string(), v.to_string()])?;
        }
        emit(
            &w.into_inner().map_err(|e| CliError::Io(e.into_error()))?,
            Some(path),
        )?;
    }
    Ok(())
}

pub fn gft(args: &CacheArgs, ballots: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (b, f) = load_ballots(ballots)?;
    let (t, manifest) = open_cache(args, b.n)?;
    let mode = runtime_mode(args, &manifest, &t)?;
    let rows = t.complete_energies(&f, true, mode)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "norm"])?;
    for (_, lambda, norm) in graph_fourier(&rows) {
        w.write_record([format_lambda(lambda), norm.to_string()])?;
    }
    emit(
        &w.into_inner().map_err(|e| CliError::Io(e.into_error()))?,
        out,
    )
}

pub fn project(
    ballots: &Path,
    shape: &str,
    blocks: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (b, f) = load_ballots(ballots)?;
    let shape = IntegerPartition::parse(shape)?;
    if shape.n() != b.n {
        return Err(CliError::Invalid(format!(
            "shape {shape} does not partition n = {}",
            b.n
        )));
    }
    let lifting = OrderedSetPartition::parse_label(blocks, b.n)?;
    if lifting.sizes() != shape.parts() {
        return Err(CliError::Invalid(format!(
            "{blocks} is not a lifting of {shape}"
        )));
    }
    let t = Transform::from_bundles(b.n, Vec::new())?;
    let g = t.project_lifting(&f, &lifting)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["vertex", "value"])?;
    for (label, v) in vertex_labels(&shape).into_iter().zip(&g) {
        w.write_record([label, v.to_string()])?;
    }
    emit(
        &w.into_inner().map_err(|e| CliError::Io(e.into_error()))?,
        out,
    )
}

pub fn conjecture(n: usize, out: Option<&Path>) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Invalid("n must be positive".into()));
    }
    let report = verify_dominance_conjecture(n)?;
    emit(report.to_string().as_bytes(), out)?;
    let shapes = h_n_shapes(n, None).len();
    eprintln!(
        "n = {n}: {shapes} shapes solved, {} violations",
        report.violations.len()
    );
    Ok(())
}
