use std::path::{Path, PathBuf};
use std::sync::Arc;

use gdn_core::features::{self, FeatureMatrix};
use gdn_core::generation::{self, GenerationConfig};
use gdn_core::gradcheck::{self, GradCheckReport};
use gdn_core::graph::{self, SparseGraph};
use gdn_core::imputation::{self, BenchmarkConfig, Method};
use gdn_core::laplacian::LaplacianOperator;
use gdn_core::nn::{train_autoencoder, Checkpoint, DecoderKind};
use gdn_core::noise::{self, Activation, KernelSpec, SuiteConfig};
use gdn_core::oracle;
use gdn_core::report::{config_hash, mean};
use gdn_core::retention::{spectral_retention, RetentionConfig, RetentionResult};
use gdn_core::spectral::{self, kernels, PolynomialFilter, DEFAULT_ORACLE_LIMIT};
use gdn_core::{rng, synth};
use ndarray::Array1;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::*;
use crate::config::{overlay, profile, read_config_file, take_string};
use crate::error::{CliError, CliResult};

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    text.push('\n');
    write_file(path, &text)
}

/// Benchmark config plus the data paths it refers to.
struct ResolvedBenchmark {
    config: BenchmarkConfig,
    synthetic: bool,
    graph: Option<PathBuf>,
    features: Option<PathBuf>,
    mask: Option<PathBuf>,
}

fn resolve_benchmark(flags: &BenchmarkFlags) -> CliResult<ResolvedBenchmark> {
    let mut config = BenchmarkConfig::default();
    let mut synthetic = false;
    if let Some(name) = &flags.profile {
        let p = profile(name)?;
        p.apply(&mut config);
        synthetic = p.name == "synthetic";
    }
    let (mut graph, mut feats, mut mask) = (None, None, None);
    if let Some(path) = &flags.config {
        let mut map = read_config_file(path)?;
        graph = take_string(&mut map, "graph")?.map(PathBuf::from);
        feats = take_string(&mut map, "features")?.map(PathBuf::from);
        mask = take_string(&mut map, "mask")?.map(PathBuf::from);
        config = overlay(&config, map)?;
    }
    if let Some(names) = &flags.methods {
        config.methods = names
            .iter()
            .map(|n| {
                Method::from_name(n.trim()).ok_or_else(|| CliError::usage(format!("unknown method '{n}'")))
            })
            .collect::<CliResult<_>>()?;
    }
    if let Some(s) = &flags.seeds {
        config.seeds = s.0.clone();
    }
    let m = &mut config.model;
    if let Some(v) = flags.hidden1 {
        m.hidden1 = v;
    }
    if let Some(v) = flags.hidden2 {
        m.hidden2 = v;
    }
    if let Some(v) = flags.wavelet {
        m.wavelet = Some(v);
    }
    if let Some(v) = flags.order {
        m.order = v;
    }
    if let Some(v) = flags.scale {
        m.scale = v;
    }
    if let Some(v) = flags.lr {
        config.lr = v;
    }
    if let Some(v) = flags.epochs {
        config.epochs = v;
    }
    if let Some(v) = flags.keep_prob {
        config.keep_prob = v;
    }
    if let Some(v) = flags.knn_k {
        config.knn_k = v;
    }
    if let Some(v) = flags.svd_rank {
        config.svd_rank = v;
    }
    if !(config.lr > 0.0 && config.lr.is_finite()) {
        return Err(CliError::usage(format!("learning rate must be positive, got {}", config.lr)));
    }
    Ok(ResolvedBenchmark {
        config,
        synthetic,
        graph: flags.graph.clone().or(graph),
        features: flags.features.clone().or(feats),
        mask,
    })
}

fn load_benchmark_data(
    r: &ResolvedBenchmark,
    data_seed: u64,
) -> CliResult<(Arc<SparseGraph>, FeatureMatrix)> {
    match (&r.graph, &r.features) {
        (Some(g), Some(f)) => {
            let graph = graph::load_edge_list(g)?;
            let feats = features::load_feature_csv(f)?;
            if graph.n_nodes() > feats.nrows() {
                return Err(CliError::io(format!(
                    "graph has {} nodes but the feature file has {} rows",
                    graph.n_nodes(),
                    feats.nrows()
                )));
            }
            // Trailing isolated nodes are absent from an edge list.
            let graph = if graph.n_nodes() < feats.nrows() {
                SparseGraph::from_edges(feats.nrows(), graph.edges().iter().copied())?
            } else {
                graph
            };
            Ok((Arc::new(graph), feats))
        }
        (None, None) if r.synthetic => {
            let ds = synth::citation_surrogate(&synth::CitationSpec::CORA_SMALL, data_seed)?;
            Ok((ds.graph, ds.features))
        }
        (None, None) => Err(CliError::usage(
            "--graph and --features are required unless --profile synthetic is used",
        )),
        _ => Err(CliError::usage("--graph and --features must be given together")),
    }
}

pub fn impute(args: &ImputeArgs) -> CliResult<()> {
    let mut resolved = resolve_benchmark(&args.common)?;
    if let Some(rate) = args.missing_rate {
        resolved.config.missing_rate = rate;
    }
    let mask_path = args.mask.clone().or(resolved.mask.clone());
    let (graph, feats) = load_benchmark_data(&resolved, args.common.data_seed)?;
    let mask = mask_path.map(features::load_mask_csv).transpose()?;
    let config = &resolved.config;
    log::info!(
        "imputing {}x{} features on {} edges with {} method(s), {} seed(s)",
        feats.nrows(),
        feats.ncols(),
        graph.n_edges(),
        config.methods.len(),
        config.seeds.len()
    );
    let reports = imputation::run_benchmark(graph.clone(), &feats, config, mask.as_ref())?;
    write_json(&args.out, &reports)?;
    if let Some(csv) = &args.csv {
        let mut text = String::from("method,seed,rmse\n");
        for r in &reports {
            for (seed, rmse) in r.seeds.iter().zip(&r.rmse_per_seed) {
                text.push_str(&format!("{},{seed},{rmse}\n", r.method));
            }
        }
        write_file(csv, &text)?;
    }
    if let Some(path) = &args.save_model {
        let method = config
            .methods
            .iter()
            .copied()
            .find(|m| m.decoder().is_some())
            .ok_or_else(|| CliError::usage("--save-model needs a neural method"))?;
        let seed = config.seeds[0];
        let mf = match &mask {
            Some(m) => features::apply_explicit_mask(&feats, m)?,
            None => features::generate_mask(&feats, config.missing_rate, &mut rng::stream(seed, rng::MASK))?,
        };
        let tc = config.train_config(method, seed).expect("neural method");
        let (params, _) = train_autoencoder(graph, &mf, &tc)?;
        Checkpoint::new(&tc.model, tc.model.dims(feats.ncols()), seed, &params).save(path)?;
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let resolved = resolve_benchmark(&args.common)?;
    let (graph, feats) = load_benchmark_data(&resolved, args.common.data_seed)?;
    let rows = imputation::run_sweep(graph, &feats, &resolved.config, &args.rates)?;
    write_file(&args.out, &imputation::sweep_csv(&rows))
}

fn load_molecules(args: &GenerateArgs) -> CliResult<(Vec<synth::LabeledGraph>, usize)> {
    if args.dataset == "synthetic" {
        let graphs = synth::molecule_surrogate(args.graphs, args.data_seed)?;
        return Ok((graphs, synth::MOLECULE_LABELS));
    }
    let path = Path::new(&args.dataset);
    let graphs = if path.is_dir() {
        generation::load_tu_dataset(path, &args.tu_name)?
    } else {
        generation::load_molecules(path)?
    };
    let labels = generation::label_count(&graphs);
    Ok((graphs, labels))
}

pub fn generate(args: &GenerateArgs) -> CliResult<()> {
    let mut config = GenerationConfig::default();
    if let Some(path) = &args.config {
        config = overlay(&config, read_config_file(path)?)?;
    }
    if let Some(v) = args.iters {
        config.iters = v;
    }
    if let Some(v) = args.lr {
        config.lr = v;
    }
    if let Some(v) = args.hidden {
        config.hidden = v;
    }
    if let Some(v) = args.latent {
        config.latent = v;
    }
    if args.feature_term == OnOff::Off {
        config.feature_weight = 0.0;
    } else if config.feature_weight == 0.0 {
        return Err(CliError::usage("--feature-term on with a zero feature_weight in the config"));
    }
    let seeds = match (args.seed, &args.seeds) {
        (Some(s), _) => vec![s],
        (None, Some(s)) => s.0.clone(),
        (None, None) => (0..5).collect(),
    };
    let (graphs, n_labels) = load_molecules(args)?;
    if let Some(path) = &args.export {
        write_file(path, &generation::write_molecules(&graphs))?;
    }
    log::info!("training on {} graphs with {} label(s)", graphs.len(), n_labels);
    let (report, _) = generation::run_generation(&graphs, n_labels, &config, &seeds)?;
    write_json(&args.out, &report)
}

fn preset_graph(name: &str) -> CliResult<SparseGraph> {
    let edges: &[(usize, usize)] = match name {
        "k2" => &[(0, 1)],
        "p3" => &[(0, 1), (1, 2)],
        _ => return Err(CliError::usage(format!("unknown preset '{name}' (expected k2 or p3)"))),
    };
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    Ok(SparseGraph::from_edges(n, edges.iter().copied())?)
}

pub fn noise(args: &NoiseArgs) -> CliResult<()> {
    let (name, g) = match (&args.graph, &args.preset) {
        (Some(path), None) => {
            let name = path.file_stem().map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned());
            (name, graph::load_edge_list(path)?)
        }
        (None, Some(p)) => (p.clone(), preset_graph(p)?),
        _ => return Err(CliError::usage("one of --graph or --preset is required")),
    };
    let kernels = args
        .kernel
        .iter()
        .map(|k| k.parse::<KernelSpec>())
        .collect::<Result<Vec<_>, _>>()?;
    let activations = args
        .activation
        .iter()
        .map(|a| a.parse::<Activation>())
        .collect::<Result<Vec<_>, _>>()?;
    if !(args.sigma > 0.0 && args.sigma.is_finite()) || args.trials < 2 {
        return Err(CliError::usage("--sigma must be positive and --trials at least 2"));
    }
    let suite = SuiteConfig {
        kernels,
        activations,
        sigma: args.sigma,
        trials: args.trials,
        seed: args.seed,
    };
    let reports = noise::amplification_report(&[(name, Arc::new(g))], &suite)?;
    write_json(&args.out, &reports)?;
    if let Some(csv) = &args.csv {
        write_file(csv, &noise::amplification_csv(&reports))?;
    }
    Ok(())
}

fn kernel_curves(step: f64) -> CliResult<String> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(CliError::usage("--step must lie in (0, 1]"));
    }
    let poly: Vec<(&str, PolynomialFilter)> = vec![
        ("gcn", PolynomialFilter::gcn_propagation()),
        ("inverse_1", PolynomialFilter::maclaurin_inverse(1)),
        ("inverse_3", PolynomialFilter::maclaurin_inverse(3)),
        ("heat_3", PolynomialFilter::heat(1.0, 3, false)?),
        ("heat_10", PolynomialFilter::heat(1.0, 10, false)?),
        ("inverse_heat_3", PolynomialFilter::heat(1.0, 3, true)?),
    ];
    let mut out = String::from("lambda");
    for (name, _) in &poly {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",exact_inverse,heat_exact,inverse_heat_exact\n");
    let steps = (2.0 / step).round() as usize;
    for i in 0..=steps {
        let lambda = (i as f64 * step).min(2.0);
        out.push_str(&format!("{lambda}"));
        for (_, f) in &poly {
            out.push_str(&format!(",{}", f.eval(lambda)));
        }
        out.push_str(&format!(
            ",{},{},{}\n",
            kernels::exact_inverse(lambda),
            kernels::heat(1.0)(lambda),
            kernels::inverse_heat(1.0)(lambda)
        ));
    }
    Ok(out)
}

#[derive(Serialize)]
struct DecoderSummary {
    decoder: String,
    high_fraction_mean: f64,
    high_fraction_per_seed: Vec<f64>,
}

#[derive(Serialize)]
struct RetentionReport {
    cutoff: f64,
    seeds: Vec<u64>,
    input_fraction_mean: f64,
    decoders: Vec<DecoderSummary>,
    runs: Vec<RetentionResult>,
    config_hash: String,
}

fn retention(args: &SpectraArgs) -> CliResult<RetentionReport> {
    let mut config = RetentionConfig::default();
    if let Some(e) = args.epochs {
        config.epochs = e;
    }
    let seeds = args.seeds.0.clone();
    let runs: Vec<RetentionResult> = seeds
        .par_iter()
        .map(|&s| spectral_retention(&config, s))
        .collect::<Result<_, _>>()?;
    let decoders = config
        .decoders
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let per_seed: Vec<f64> = runs.iter().map(|r| r.decoders[k].1).collect();
            DecoderSummary {
                decoder: d.name().to_string(),
                high_fraction_mean: mean(&per_seed),
                high_fraction_per_seed: per_seed,
            }
        })
        .collect();
    let inputs: Vec<f64> = runs.iter().map(|r| r.input_fraction).collect();
    Ok(RetentionReport {
        cutoff: config.cutoff,
        input_fraction_mean: mean(&inputs),
        decoders,
        runs,
        config_hash: config_hash(&(&config, &seeds))?,
        seeds,
    })
}

pub fn spectra(args: &SpectraArgs) -> CliResult<()> {
    if args.kernel_curves {
        return write_file(&args.out, &kernel_curves(args.step)?);
    }
    if args.retention {
        return write_json(&args.out, &retention(args)?);
    }
    let path = args
        .graph
        .as_ref()
        .ok_or_else(|| CliError::usage("--graph is required (or use --kernel-curves / --retention)"))?;
    let g = Arc::new(graph::load_edge_list(path)?);
    let es = spectral::eigen_decompose(&LaplacianOperator::symmetric(g.clone()), DEFAULT_ORACLE_LIMIT)?;
    let signal = match &args.features {
        Some(f) => {
            let feats = features::load_feature_csv(f)?;
            if args.column >= feats.ncols() {
                return Err(CliError::usage(format!(
                    "--column {} out of range for {} columns",
                    args.column,
                    feats.ncols()
                )));
            }
            if feats.nrows() != g.n_nodes() {
                return Err(CliError::io(format!(
                    "feature file has {} rows for {} nodes",
                    feats.nrows(),
                    g.n_nodes()
                )));
            }
            feats.values.column(args.column).to_owned()
        }
        None => {
            let mut x = Array1::zeros(g.n_nodes());
            x[0] = 1.0;
            x
        }
    };
    write_file(&args.out, &spectral::spectrum_csv(&es, signal.view())?)
}

pub fn gradcheck(args: &GradcheckArgs) -> CliResult<()> {
    let mut reports: Vec<GradCheckReport> = DecoderKind::ALL
        .iter()
        .map(|&d| gradcheck::autoencoder_gradcheck(args.nodes, args.seed, d))
        .collect::<Result<_, _>>()?;
    reports.push(gradcheck::generation_gradcheck(args.nodes, args.seed)?);
    for r in &reports {
        println!("{}: max relative error {:.3e}", r.model, r.max_rel_error);
    }
    let worst = reports.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    println!("max relative error {worst:.3e}");
    if let Some(out) = &args.out {
        write_json(out, &reports)?;
    }
    if reports.iter().all(GradCheckReport::passed) {
        Ok(())
    } else {
        Err(CliError::numerical(format!(
            "gradient check failed: max relative error {worst:.3e} above {:.0e}",
            gradcheck::TOLERANCE
        )))
    }
}

pub fn oracle_check(args: &OracleCheckArgs) -> CliResult<()> {
    let report = oracle::oracle_check(args.nodes, args.trials, args.seed)?;
    for f in &report.filters {
        println!("{}: max relative error {:.3e}", f.filter, f.max_rel_error);
    }
    println!("max relative error {:.3e}", report.max_rel_error);
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::numerical(format!(
            "filter/oracle mismatch {:.3e} above {:.0e}",
            report.max_rel_error,
            oracle::TOLERANCE
        )))
    }
}
