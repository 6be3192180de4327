use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use graphglove::analysis::{
    calibrate_tau, chinese_whispers_with, cluster_hyperbolicity, degree_centrality_top, edge_density,
    eigenvector_centrality, extract_hierarchy, gromov_delta, hierarchy_correlations, induce_graph, k_core, save_with,
    score_top, write_centrality_csv, write_core_csv, write_correlations_csv, write_hyperbolicity_csv,
    write_membership_tsv, InducedGraphSpec, Taxonomy,
};
use graphglove::corpus::{build_cooccurrence_sharded, build_vocabulary_sharded, SparseCooccurrence, Vocabulary};
use graphglove::eval::{
    analogy_eval_rows, similarity_eval, AnalogyBenchmark, EvalReport, OovPolicy, Representation, SimilarityBenchmark,
    SimilarityRows,
};
use graphglove::glove::{train_dense, DenseEmbedding};
use graphglove::graph::{prune, write_edge_tsv, PrunedGraph, StochasticGraph};
use graphglove::pipeline::{run_planted, variance_study, Manifest, PlantedConfig};
use graphglove::train::{init_graph, train, TrainConfig, Trainer};
use graphglove::{Error, Result};
use log::info;
use serde::Serialize;

use crate::config::{set, FileConfig};
use crate::{Cli, Command, InduceMode, VarianceTask};

pub fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let workers = cli.workers.or(file.workers);
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::InvalidArgument { field: "workers", message: "must be at least 1".into() });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument { field: "workers", message: e.to_string() })?;
    }
    let ctx = Context { file, config_path: cli.config };
    match cli.command {
        Command::BuildVocab(a) => ctx.build_vocab(a),
        Command::BuildCooc(a) => ctx.build_cooc(a),
        Command::TrainDense(a) => ctx.train_dense(a),
        Command::InitGraph(a) => ctx.init_graph(a),
        Command::TrainGraph(a) => ctx.train_graph(a),
        Command::Evaluate(a) => ctx.evaluate(a),
        Command::Analyze(a) => ctx.analyze(a),
        Command::ExportEdges(a) => ctx.export_edges(a),
        Command::Variance(a) => ctx.variance(a),
    }
}

struct Context {
    file: FileConfig,
    config_path: Option<PathBuf>,
}

impl Context {
    fn manifest(&self, command: &str, config: &impl Serialize) -> Result<Manifest> {
        let mut m = Manifest::new(command, config)?;
        m.workers = Some(rayon::current_num_threads());
        if let Some(p) = &self.config_path {
            m.input(p)?;
        }
        Ok(m)
    }

    fn build_vocab(&self, a: crate::BuildVocab) -> Result<()> {
        let mut cfg = self.file.vocab.clone();
        set(&mut cfg.max_size, a.max_size);
        set(&mut cfg.min_count, a.min_count);
        let lines = read_lines(&a.corpus)?;
        let vocab = build_vocabulary_sharded(&lines, cfg.max_size, cfg.min_count, rayon::current_num_threads())?;
        vocab.save(&a.out)?;
        info!("vocabulary of {} words", vocab.len());
        let mut m = self.manifest("build-vocab", &cfg)?;
        m.input(&a.corpus)?.output(&a.out).metric("vocab_size", vocab.len() as f64);
        m.save(&Manifest::path_for(&a.out))
    }

    fn build_cooc(&self, a: crate::BuildCooc) -> Result<()> {
        let mut cfg = self.file.cooc.clone();
        set(&mut cfg.window, a.window);
        let vocab = Vocabulary::load(&a.vocab)?;
        let lines = read_lines(&a.corpus)?;
        let cooc = build_cooccurrence_sharded(&lines, &vocab, cfg.window, rayon::current_num_threads())?;
        cooc.save(&a.out)?;
        info!("{} stored co-occurrence entries", cooc.nnz_total());
        let mut m = self.manifest("build-cooc", &cfg)?;
        m.input(&a.corpus)?.input(&a.vocab)?.output(&a.out);
        m.metric("nnz", cooc.nnz_total() as f64).metric("total_mass", cooc.total_mass());
        m.save(&Manifest::path_for(&a.out))
    }

    fn train_dense(&self, a: crate::TrainDense) -> Result<()> {
        let mut cfg = self.file.dense.clone();
        set(&mut cfg.dim, a.dim);
        set(&mut cfg.epochs, a.epochs);
        set(&mut cfg.lr, a.lr);
        set(&mut cfg.seed, a.seed);
        let vocab = Vocabulary::load(&a.vocab)?;
        let cooc = SparseCooccurrence::load(&a.cooc)?;
        check_words("co-occurrence matrix", cooc.n_words(), &vocab)?;
        let (emb, report): (DenseEmbedding<f64>, _) = train_dense(&cooc, &cfg)?;
        emb.save(&vocab, &a.out)?;
        let loss_path = suffixed(&a.out, ".loss.csv");
        save_with(&loss_path, |w| {
            writeln!(w, "epoch,loss")?;
            writeln!(w, "0,{}", report.initial_loss)?;
            for (e, l) in report.epoch_losses.iter().enumerate() {
                writeln!(w, "{},{l}", e + 1)?;
            }
            Ok(())
        })?;
        let mut m = self.manifest("train-dense", &cfg)?;
        m.seed = Some(cfg.seed);
        m.input(&a.cooc)?.input(&a.vocab)?;
        m.output(&a.out).output(&graphglove::glove::bias_path(&a.out)).output(&loss_path);
        m.metric("initial_loss", report.initial_loss).metric("final_loss", report.final_loss());
        m.save(&Manifest::path_for(&a.out))
    }

    fn init_graph(&self, a: crate::InitGraph) -> Result<()> {
        let mut cfg = self.file.train.clone();
        set(&mut cfg.k_neighbors, a.k);
        set(&mut cfg.m_random, a.m);
        set(&mut cfg.r_zero, a.r_zero);
        set(&mut cfg.seed, a.seed);
        cfg.validate()?;
        let vocab = Vocabulary::load(&a.vocab)?;
        let emb = DenseEmbedding::<f64>::load(&vocab, &a.embedding)?;
        let graph = init_graph(&emb, &cfg)?;
        graph.save(&a.out)?;
        info!("initial graph with {} edges", graph.n_edges());
        let mut m = self.manifest("init-graph", &cfg)?;
        m.seed = Some(cfg.seed);
        m.input(&a.embedding)?.input(&a.vocab)?.output(&a.out);
        m.metric("edges", graph.n_edges() as f64);
        m.save(&Manifest::path_for(&a.out))
    }

    fn train_graph(&self, a: crate::TrainGraph) -> Result<()> {
        let mut cfg = self.file.train.clone();
        set(&mut cfg.steps, a.steps);
        set(&mut cfg.lr, a.lr);
        set(&mut cfg.lambda, a.lambda);
        set(&mut cfg.loss_kind, a.loss);
        set(&mut cfg.b_anchors, a.b_anchors);
        set(&mut cfg.n_per_anchor, a.n_per_anchor);
        set(&mut cfg.seed, a.seed);
        if a.target_ppt.is_some() {
            cfg.target_params_per_token = a.target_ppt;
        }
        cfg.validate()?;
        let cooc = SparseCooccurrence::load(&a.cooc)?;
        let mut m = self.manifest("train-graph", &cfg)?;
        m.seed = Some(cfg.seed);
        m.input(&a.cooc)?;
        let mut trainer = match (&a.resume, &a.graph) {
            (Some(ckpt), _) => {
                m.input(ckpt)?.input(&Trainer::optimizer_path(ckpt))?;
                Trainer::resume(&cooc, ckpt, cfg.clone())?
            }
            (None, Some(g)) => {
                m.input(g)?;
                Trainer::new(&cooc, StochasticGraph::load(g)?, cfg.clone())?
            }
            (None, None) => return Err(Error::InvalidArgument { field: "graph", message: "give --graph or --resume".into() }),
        };
        let log = trainer.run()?;
        trainer.save_checkpoint(&a.out)?;
        let log_path = a.log.clone().unwrap_or_else(|| suffixed(&a.out, ".log.csv"));
        log.save_csv(&log_path)?;
        let g = trainer.graph();
        m.output(&a.out).output(&Trainer::optimizer_path(&a.out)).output(&log_path);
        m.metric("steps_done", trainer.steps_done() as f64)
            .metric("kept_edges", g.kept_edge_count() as f64)
            .metric("mean_edge_prob", g.mean_prob())
            .metric("params_per_token", trainer.params_per_token());
        if let Some(last) = log.last() {
            m.metric("final_loss", last.loss);
        }
        m.metric("target_reached", f64::from(u8::from(matches!(log.stop_reason, graphglove::train::StopReason::TargetReached))));
        m.save(&Manifest::path_for(&a.out))
    }

    fn evaluate(&self, a: crate::Evaluate) -> Result<()> {
        if a.similarity.is_empty() && a.analogy.is_empty() {
            return Err(Error::InvalidArgument { field: "similarity", message: "give at least one --similarity or --analogy".into() });
        }
        let vocab = Vocabulary::load(&a.vocab)?;
        let model = load_model(&a.model, &vocab)?;
        let rep = model.representation();
        let mut report = EvalReport::default();
        let mut m = self.manifest("evaluate", &serde_json::json!({ "oov": format!("{:?}", a.oov).to_lowercase() }))?;
        m.input(model.path())?.input(&a.vocab)?;
        for path in &a.similarity {
            let bench = SimilarityBenchmark::load(path)?;
            m.input(path)?;
            for policy in a.oov.policies() {
                let r = similarity_eval(rep, &vocab, &bench, policy)?;
                report.add_similarity(&r, policy_name(policy));
            }
        }
        if !a.analogy.is_empty() {
            let rows = SimilarityRows::build(rep, vocab.len())?;
            for path in &a.analogy {
                let bench = AnalogyBenchmark::load(path)?;
                if path.is_file() {
                    m.input(path)?;
                }
                report.add_analogy(&analogy_eval_rows(&rows, &vocab, &bench));
            }
        }
        report.save_csv(&a.out)?;
        for row in &report.rows {
            println!("{}\t{}\t{:.4}\t{}/{}", row.benchmark, row.metric, row.value, row.attempted, row.attempted + row.skipped);
            m.metric(&format!("{}/{}", row.benchmark, row.metric), row.value);
        }
        m.output(&a.out);
        m.save(&Manifest::path_for(&a.out))
    }

    fn analyze(&self, a: crate::Analyze) -> Result<()> {
        let mut cfg = self.file.analyze.clone();
        set(&mut cfg.top, a.top);
        set(&mut cfg.cw_iterations, a.cw_iterations);
        set(&mut cfg.samples, a.samples);
        set(&mut cfg.seed, a.seed);
        let vocab = Vocabulary::load(&a.vocab)?;
        std::fs::create_dir_all(&a.out_dir).map_err(|source| Error::File { path: a.out_dir.clone(), source })?;
        let mut m = self.manifest("analyze", &cfg)?;
        m.input(&a.vocab)?;
        let graph: PrunedGraph<f64> = match (&a.model.graph, &a.model.embedding) {
            (Some(path), _) => {
                m.input(path)?;
                let g = prune(&StochasticGraph::load(path)?);
                check_words("graph", g.n_vertices() - 1, &vocab)?;
                // Word vertices only: the zero node is an artefact of the parametrization.
                g.induced_subgraph(&(0..vocab.len()).collect::<Vec<_>>()).0
            }
            (None, Some(path)) => {
                m.input(path)?;
                let emb = DenseEmbedding::<f64>::load(&vocab, path)?;
                let spec = match (a.induce, a.tau, a.k) {
                    (InduceMode::Thr, Some(tau), _) => InducedGraphSpec::Thr { tau },
                    (InduceMode::Thr, None, Some(k)) => {
                        let target = induce_graph(&emb, InducedGraphSpec::Knn { k })?.n_edges();
                        InducedGraphSpec::Thr { tau: calibrate_tau(&emb, target)? }
                    }
                    (InduceMode::Thr, None, None) => {
                        return Err(Error::InvalidArgument { field: "tau", message: "--induce thr needs --tau or --k".into() })
                    }
                    (InduceMode::Knn, _, k) => InducedGraphSpec::Knn { k: k.unwrap_or(10) },
                };
                if let InducedGraphSpec::Thr { tau } = spec {
                    m.metric("tau", tau);
                }
                induce_graph(&emb, spec)?
            }
            (None, None) => unreachable!("clap requires one model input"),
        };
        m.metric("edges", graph.n_edges() as f64).metric("edge_density", edge_density(&graph));
        let out = |name: &str| a.out_dir.join(name);
        let top = cfg.top.min(vocab.len());

        let degree = degree_centrality_top(&graph, &vocab, top)?;
        save_with(&out("degree_centrality.csv"), |w| write_centrality_csv(w, &degree, &vocab))?;
        let eigen = eigenvector_centrality(&graph, cfg.eigen_tol, cfg.eigen_max_iter)?;
        let eigen_top = score_top(&eigen, &vocab, top)?;
        save_with(&out("eigenvector_centrality.csv"), |w| write_centrality_csv(w, &eigen_top, &vocab))?;
        let mean_pct = |e: &[graphglove::analysis::CentralityEntry]| {
            e.iter().map(|x| x.freq_percentile).sum::<f64>() / e.len().max(1) as f64
        };
        m.metric("degree_top_mean_freq_percentile", mean_pct(&degree));
        m.metric("eigenvector_top_mean_freq_percentile", mean_pct(&eigen_top));

        let core = k_core(&graph);
        save_with(&out("kcore.csv"), |w| write_core_csv(w, &core))?;
        m.metric("k_max", core.k_max as f64).metric("main_core_size", core.main_core.len() as f64);

        if let Some(path) = &a.taxonomy {
            m.input(path)?;
            let taxonomy = Taxonomy::load(path)?;
            let levels = extract_hierarchy(&graph, &vocab, &taxonomy)?;
            let (word, level) = hierarchy_correlations(&levels)?;
            save_with(&out("hierarchy.csv"), |w| write_correlations_csv(w, word, level))?;
            m.metric("word_corr", word).metric("level_corr", level);
        }

        let clusters = chinese_whispers_with(&graph, cfg.cw_iterations, cfg.seed, cfg.affinity);
        save_with(&out("clusters.tsv"), |w| write_membership_tsv(w, &clusters, &vocab))?;
        m.metric("clusters", clusters.len() as f64).metric("clusters_converged", f64::from(u8::from(clusters.converged)));
        let hyper = cluster_hyperbolicity(&graph, &clusters.clusters, cfg.min_cluster_size, cfg.samples, cfg.seed);
        save_with(&out("hyperbolicity.csv"), |w| write_hyperbolicity_csv(w, &hyper))?;
        match gromov_delta(&graph, cfg.samples, cfg.seed) {
            Ok(h) => {
                m.metric("mean_delta", h.mean_delta).metric("normalized_delta", h.normalized_delta);
            }
            Err(e) => info!("skipping whole-graph hyperbolicity: {e}"),
        }
        for name in ["degree_centrality.csv", "eigenvector_centrality.csv", "kcore.csv", "clusters.tsv", "hyperbolicity.csv"] {
            m.output(&out(name));
        }
        if a.taxonomy.is_some() {
            m.output(&out("hierarchy.csv"));
        }
        m.save(&out("analyze.manifest.json"))
    }

    fn export_edges(&self, a: crate::ExportEdges) -> Result<()> {
        let stochastic = StochasticGraph::load(&a.graph)?;
        let graph = prune(&stochastic);
        let mut m = self.manifest("export-edges", &serde_json::json!({ "tokens": a.vocab.is_some() }))?;
        m.input(&a.graph)?;
        match &a.vocab {
            None => save_with(&a.out, |w| write_edge_tsv(&graph, w))?,
            Some(vp) => {
                m.input(vp)?;
                let vocab = Vocabulary::load(vp)?;
                check_words("graph", stochastic.n_words(), &vocab)?;
                let name = |v: usize| if v < vocab.len() { vocab.token(v).to_string() } else { "<zero>".to_string() };
                save_with(&a.out, |w| {
                    for &(u, v, weight) in graph.edges() {
                        writeln!(w, "{}\t{}\t{weight}", name(u as usize), name(v as usize))?;
                    }
                    Ok(())
                })?;
            }
        }
        m.output(&a.out).metric("edges", graph.n_edges() as f64);
        m.save(&Manifest::path_for(&a.out))
    }

    fn variance(&self, a: crate::Variance) -> Result<()> {
        let seeds = a.seeds.clone().unwrap_or_else(|| self.file.variance.seeds.clone());
        let report = match a.task {
            VarianceTask::Planted => {
                let mut base = PlantedConfig { n_words: a.planted_words, tree_seed: a.tree_seed, ..Default::default() };
                set(&mut base.train.steps, a.steps);
                set(&mut base.train.lr, a.lr);
                set(&mut base.train.lambda, a.lambda);
                let mut m = self.manifest("variance", &base)?;
                let report = variance_study(&seeds, |seed| {
                    info!("planted run, seed {seed}");
                    let o = run_planted(&base.with_seed(seed))?;
                    Ok(vec![
                        ("spearman".into(), o.spearman),
                        ("mean_edge_prob".into(), o.mean_edge_prob),
                        ("pruned_edges".into(), o.pruned_edges as f64),
                        ("final_loss".into(), o.log.last().map_or(f64::NAN, |r| r.loss)),
                    ])
                })?;
                finish_variance(&mut m, &report, &a.out)?;
                report
            }
            VarianceTask::Corpus => {
                let (Some(cooc_path), Some(vocab_path), Some(emb_path)) = (&a.cooc, &a.vocab, &a.embedding) else {
                    return Err(Error::InvalidArgument { field: "cooc", message: "corpus task needs --cooc, --vocab and --embedding".into() });
                };
                if a.similarity.is_empty() {
                    return Err(Error::InvalidArgument { field: "similarity", message: "corpus task needs --similarity".into() });
                }
                let mut cfg = self.file.train.clone();
                set(&mut cfg.steps, a.steps);
                set(&mut cfg.lr, a.lr);
                set(&mut cfg.lambda, a.lambda);
                let vocab = Vocabulary::load(vocab_path)?;
                let cooc = SparseCooccurrence::load(cooc_path)?;
                check_words("co-occurrence matrix", cooc.n_words(), &vocab)?;
                let emb = DenseEmbedding::<f64>::load(&vocab, emb_path)?;
                let benches = a.similarity.iter().map(|p| SimilarityBenchmark::load(p)).collect::<Result<Vec<_>>>()?;
                let mut m = self.manifest("variance", &cfg)?;
                m.input(cooc_path)?.input(vocab_path)?.input(emb_path)?;
                for p in &a.similarity {
                    m.input(p)?;
                }
                let report = variance_study(&seeds, |seed| {
                    info!("corpus run, seed {seed}");
                    let cfg = TrainConfig { seed, ..cfg.clone() };
                    let (trained, log) = train(&cooc, init_graph(&emb, &cfg)?, &cfg)?;
                    let g = prune(&trained);
                    let mut out = Vec::new();
                    for b in &benches {
                        let r = similarity_eval(Representation::Graph(&g), &vocab, b, OovPolicy::Skip)?;
                        out.push((format!("{}_spearman_skip", b.name), r.spearman));
                    }
                    out.push(("kept_edges".into(), trained.kept_edge_count() as f64));
                    out.push(("final_loss".into(), log.last().map_or(f64::NAN, |r| r.loss)));
                    Ok(out)
                })?;
                finish_variance(&mut m, &report, &a.out)?;
                report
            }
        };
        for (name, mean, std) in report.summary() {
            println!("{name}\tmean {mean:.6}\tstd {std:.6}");
        }
        Ok(())
    }
}

fn finish_variance(m: &mut Manifest, report: &graphglove::pipeline::VarianceReport, out: &Path) -> Result<()> {
    report.save_csv(out)?;
    for (name, mean, std) in report.summary() {
        m.metric(&format!("{name}_mean"), mean).metric(&format!("{name}_std"), std);
    }
    m.output(out);
    m.save(&Manifest::path_for(out))
}

enum Model {
    Graph(PathBuf, PrunedGraph<f64>),
    Dense(PathBuf, DenseEmbedding<f64>),
}

impl Model {
    fn representation(&self) -> Representation<'_, f64> {
        match self {
            Model::Graph(_, g) => Representation::Graph(g),
            Model::Dense(_, e) => Representation::Dense(e),
        }
    }

    fn path(&self) -> &Path {
        match self {
            Model::Graph(p, _) | Model::Dense(p, _) => p,
        }
    }
}

fn load_model(input: &crate::ModelInput, vocab: &Vocabulary) -> Result<Model> {
    match (&input.graph, &input.embedding) {
        (Some(p), _) => {
            let g = StochasticGraph::load(p)?;
            check_words("graph", g.n_words(), vocab)?;
            Ok(Model::Graph(p.clone(), prune(&g)))
        }
        (None, Some(p)) => Ok(Model::Dense(p.clone(), DenseEmbedding::load(vocab, p)?)),
        (None, None) => Err(Error::InvalidArgument { field: "graph", message: "give --graph or --embedding".into() }),
    }
}

fn check_words(what: &str, n_words: usize, vocab: &Vocabulary) -> Result<()> {
    if n_words == vocab.len() {
        Ok(())
    } else {
        Err(Error::Format {
            what: what.to_string(),
            message: format!("{n_words} words, but the vocabulary has {}", vocab.len()),
        })
    }
}

fn policy_name(p: OovPolicy) -> &'static str {
    match p {
        OovPolicy::Skip => "skip",
        OovPolicy::Infer => "infer",
    }
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Lines of a text file, gunzipped when the name ends in `.gz`.
fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = std::fs::File::open(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(flate2::read::MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let mut lines = Vec::new();
    for line in BufReader::new(reader).lines() {
        lines.push(line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Format { what: path.display().to_string(), message: "not valid UTF-8 text".into() },
            _ => Error::File { path: path.to_path_buf(), source: e },
        })?);
    }
    Ok(lines)
}
