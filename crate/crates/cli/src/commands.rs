use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use botsift_core::dataset::{
    read_ground_truth, stratified_split, undersample, LabeledDataset, Preprocessing, TrainingSet,
};
use botsift_core::eval::{
    chi_squared, chi_squared_critical_95, derive_seed, evaluate_scores, impurity_importance,
    permutation_importance, CvOptions, MetricsReport, RocPoint,
};
use botsift_core::events::{
    filter_active, index_by_actor, open_archive, parse_archive, read_profiles, sample_accounts, TimelineSet,
    Window,
};
use botsift_core::features::{
    extract_all, read_feature_table, write_feature_table, ExtractOptions, FeatureKind, SubstringLexicon,
    FEATURE_KINDS, FEATURE_NAMES,
};
use botsift_core::models::{fit_bagging, grid_search_cv, BaggingConfig, BaseParams, ParamGrid};
use botsift_core::synth::{generate_corpus, Archetype, CorpusSpec};
use botsift_core::Ensemble;

use crate::args::*;
use crate::UsageError;

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
    ))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

/// Feature rows, with labels overridden from a ground-truth file or journal.
fn load_dataset(features: &Path, labels: Option<&Path>) -> Result<LabeledDataset> {
    let rows = read_feature_table(open(features)?)
        .with_context(|| format!("reading features {}", features.display()))?;
    let mut ds = LabeledDataset::new(rows)?;
    if let Some(p) = labels {
        let truth = read_ground_truth(open(p)?).with_context(|| format!("reading labels {}", p.display()))?;
        ds.apply_labels(&truth);
    }
    Ok(ds)
}

fn labeled_set(features: &Path, labels: Option<&Path>) -> Result<TrainingSet> {
    let set = load_dataset(features, labels)?.training_set();
    if set.is_empty() {
        bail!("{} has no labeled rows", features.display());
    }
    Ok(set)
}

fn load_model(path: &Path) -> Result<Ensemble> {
    Ensemble::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn check_threshold(t: Option<f64>) -> Result<()> {
    match t {
        Some(t) if !t.is_finite() => Err(UsageError(format!("threshold must be finite, got {t}")).into()),
        _ => Ok(()),
    }
}

pub fn synth(a: &SynthArgs, seed: Option<u64>) -> Result<()> {
    let mut spec: CorpusSpec = match &a.spec {
        Some(p) => serde_json::from_reader(open(p)?).with_context(|| format!("reading spec {}", p.display()))?,
        None => CorpusSpec::default(),
    };
    if let Some(n) = a.humans {
        spec.n_humans = n;
    }
    if let Some(n) = a.bots_per_archetype {
        spec.n_bots_per_archetype = n;
    }
    if let Some(n) = a.repositories {
        spec.n_repositories = Some(n);
    }
    if let Some(w) = &a.window {
        spec.window = parse_window(w)?;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    log::info!(
        "corpus: {} humans, {} bots per archetype, {} repositories, window {}, seed {}",
        spec.n_humans,
        spec.n_bots_per_archetype,
        spec.n_repositories(),
        spec.window,
        spec.seed
    );
    let corpus = generate_corpus(&spec)?;
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    corpus.write_dir(&a.out)?;
    let bots = corpus.archetypes.values().filter(|&&k| k != Archetype::Human).count();
    println!(
        "accounts: {} ({} humans, {} bots); events: {}; written to {}",
        corpus.profiles.len(),
        corpus.profiles.len() - bots,
        bots,
        corpus.events.len(),
        a.out.display()
    );
    Ok(())
}

fn parse_window(s: &str) -> Result<Window> {
    s.parse().map_err(|e: botsift_core::Error| UsageError(format!("--window: {e}")).into())
}

pub fn ingest(a: &IngestArgs, seed: u64) -> Result<()> {
    let window = parse_window(&a.window)?;
    if let Some(rate) = a.sample_rate {
        if !(0.0..=1.0).contains(&rate) {
            return Err(UsageError(format!("--sample-rate {rate} outside [0, 1]")).into());
        }
    }
    let profiles = match &a.profiles {
        Some(p) => read_profiles(open(p)?).with_context(|| format!("reading profiles {}", p.display()))?,
        None => BTreeMap::new(),
    };
    let mut events = Vec::new();
    let (mut lines, mut skipped, mut outside) = (0, 0, 0);
    for path in &a.archives {
        let parsed = parse_archive(open_archive(path)?, &window)
            .with_context(|| format!("parsing {}", path.display()))?;
        if parsed.skipped > 0 {
            log::warn!("{}: skipped {} malformed lines", path.display(), parsed.skipped);
        }
        lines += parsed.lines;
        skipped += parsed.skipped;
        outside += parsed.out_of_window;
        events.extend(parsed.events);
    }
    let accounts = index_by_actor(&events, &profiles, &window);
    let n_actors = accounts.len();
    let kept = match a.sample_rate {
        Some(rate) => sample_accounts(accounts, a.active_threshold, rate, seed)?,
        None => filter_active(accounts, a.min_events),
    };
    let retained_events: usize = kept.values().map(|acc| acc.timeline.len()).sum();
    let set = TimelineSet::new(window, &kept, events);
    set.write(create(&a.out)?)?;
    println!("lines: {lines}; malformed: {skipped}; outside window: {outside}");
    println!(
        "actors: {n_actors}; retained accounts: {}; their events: {retained_events}; stored events: {}",
        kept.len(),
        set.events.len()
    );
    Ok(())
}

pub fn extract(a: &ExtractArgs) -> Result<()> {
    let options = ExtractOptions {
        lexicon: match &a.lexicon {
            Some(terms) => SubstringLexicon::parse(terms).map_err(|e| UsageError(e.to_string()))?,
            None => SubstringLexicon::default(),
        },
        similarity: a.similarity,
    };
    let set = TimelineSet::read(open(&a.timelines)?)
        .with_context(|| format!("reading timelines {}", a.timelines.display()))?;
    let rows = match set {
        None => Vec::new(),
        Some(set) => extract_all(&set.accounts(), &set.store(), &options),
    };
    let mut ds = LabeledDataset::new(rows)?;
    if let Some(p) = &a.labels {
        ds.apply_labels(&read_ground_truth(open(p)?)?);
    }
    write_feature_table(create(&a.out)?, &ds.rows)?;
    let (h, b, u) = ds.class_counts();
    println!(
        "accounts: {}; labeled bots: {b}; labeled humans: {h}; unlabeled: {u}",
        ds.rows.len()
    );
    Ok(())
}

pub fn label_serve(a: &ServeArgs) -> Result<()> {
    let rows = read_feature_table(open(&a.features)?)?;
    let timelines = match &a.timelines {
        Some(p) => TimelineSet::read(open(p)?)?,
        None => None,
    };
    let state = Arc::new(crate::serve::AppState::new(rows, timelines, Some(&a.labels))?);
    let app = crate::serve::router(state, a.ui_dir.as_deref());
    let addr = format!("{}:{}", a.host, a.port);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        log::info!("annotation API listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn metric_cells(m: &MetricsReport) -> Vec<String> {
    vec![
        m.accuracy.to_string(),
        m.precision.to_string(),
        m.recall.to_string(),
        m.f1.to_string(),
        m.auc.map(|v| v.to_string()).unwrap_or_default(),
    ]
}

fn score_set(model: &Ensemble, set: &TrainingSet, threshold: Option<f64>) -> Result<MetricsReport> {
    let mut pred = Vec::with_capacity(set.len());
    let mut scores = Vec::with_capacity(set.len());
    for row in &set.raw {
        let (p, g) = model.predict_raw(row, threshold)?;
        pred.push(p);
        scores.push(g);
    }
    Ok(evaluate_scores(&set.y, &pred, &scores)?)
}

fn read_grid(a: &TrainArgs) -> Result<ParamGrid> {
    match &a.grid {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read grid {}", p.display()))?;
            ParamGrid::parse(&text).map_err(|e| UsageError(format!("{}: {e}", p.display())).into())
        }
        None => Ok(ParamGrid::default_for(a.base)),
    }
}

pub fn train(a: &TrainArgs, seed: u64) -> Result<()> {
    check_threshold(Some(a.threshold))?;
    let mut base = BaggingConfig::new(BaseParams::default_for(a.base));
    base.members = a.members;
    base.threshold = a.threshold;
    base.bootstrap = !a.no_bootstrap;
    base.validate().map_err(|e| UsageError(e.to_string()))?;
    let grid = read_grid(a)?;

    let mut set = labeled_set(&a.features, a.labels.as_deref())?;
    let holdout = match a.holdout {
        Some(f) => {
            let (train, test) = stratified_split(&set, f, derive_seed(seed, 4, 0))?;
            set = train;
            Some(test)
        }
        None => None,
    };
    let (humans, bots) = set.class_counts();
    log::info!("training rows: {} ({bots} bots, {humans} humans)", set.len());

    let opts = CvOptions {
        folds: a.folds,
        repeats: a.repeats,
        seed,
        undersample: !a.no_undersample,
    };
    let outcome = grid_search_cv::<f64>(&set, &base, &grid, &opts)?;
    let best = outcome.best_result();

    let fit_set = if opts.undersample {
        undersample(&set, derive_seed(seed, 5, 0))?
    } else {
        set.clone()
    };
    let pre = Preprocessing::fit(&fit_set.raw)?;
    let x = pre.transform::<f64>(&fit_set.raw);
    let mut model = fit_bagging(&x, &fit_set.y, &best.config, seed)?;
    model.preprocessing = Some(pre);
    model.save(&a.model).with_context(|| format!("writing model {}", a.model.display()))?;

    let report = a.report.clone().unwrap_or_else(|| default_report_path(&a.model));
    let mut w = csv_writer(&report)?;
    let mut header = vec!["model".to_string(), "params".into(), "folds".into(), "repeats".into()];
    for m in ["accuracy", "precision", "recall", "f1", "auc"] {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_sd"));
    }
    header.push("best".into());
    w.write_record(&header)?;
    for (i, r) in outcome.results.iter().enumerate() {
        let s = &r.cv.summary;
        let mut rec = vec![
            a.base.to_string(),
            serde_json::to_string(&r.params)?,
            a.folds.to_string(),
            a.repeats.to_string(),
        ];
        for m in [&s.accuracy, &s.precision, &s.recall, &s.f1, &s.auc] {
            rec.push(m.mean.to_string());
            rec.push(m.sd.to_string());
        }
        rec.push(u8::from(i == outcome.best).to_string());
        w.write_record(&rec)?;
        println!(
            "{} {}: auc {:.4} ± {:.4}, f1 {:.4} ± {:.4}",
            a.base,
            serde_json::to_string(&r.params)?,
            s.auc.mean,
            s.auc.sd,
            s.f1.mean,
            s.f1.sd
        );
    }
    w.flush()?;
    println!(
        "best: {} (cv auc {:.4}); model written to {}",
        serde_json::to_string(&best.params)?,
        best.cv.summary.auc.mean,
        a.model.display()
    );
    if let Some(test) = holdout {
        let m = score_set(&model, &test, None)?;
        println!(
            "holdout ({} rows): accuracy {:.4}, precision {:.4}, recall {:.4}, f1 {:.4}, auc {}",
            test.len(),
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            m.auc.map_or("n/a".to_string(), |v| format!("{v:.4}"))
        );
    }
    Ok(())
}

fn default_report_path(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".cv.csv");
    PathBuf::from(s)
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    check_threshold(a.threshold)?;
    let model = load_model(&a.model)?;
    let rows = read_feature_table(open(&a.features)?)?;
    let mut w = csv_writer(&a.out)?;
    w.write_record(["login", "label", "vote_fraction"])?;
    let mut bots = 0;
    for r in &rows {
        let (label, g) = model.predict_raw(&r.features.values(), a.threshold)?;
        bots += label as usize;
        w.write_record([r.login.clone(), label.to_string(), g.to_string()])?;
    }
    w.flush()?;
    println!("accounts: {}; predicted bots: {bots}", rows.len());
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    check_threshold(a.threshold)?;
    let model = load_model(&a.model)?;
    let set = labeled_set(&a.features, a.labels.as_deref())?;
    let m = score_set(&model, &set, a.threshold)?;
    let mut w = csv_writer(&a.out)?;
    w.write_record([
        "model",
        "members",
        "threshold",
        "n",
        "accuracy",
        "precision",
        "recall",
        "f1",
        "auc",
        "tp",
        "fp",
        "tn",
        "fn",
    ])?;
    let c = &m.confusion;
    let mut rec = vec![
        model.kind().to_string(),
        model.members.len().to_string(),
        a.threshold.unwrap_or(model.threshold).to_string(),
        set.len().to_string(),
    ];
    rec.extend(metric_cells(&m));
    rec.extend([c.tp, c.fp, c.tn, c.fn_].map(|v| v.to_string()));
    w.write_record(&rec)?;
    w.flush()?;
    if let Some(p) = &a.roc {
        let mut w = csv_writer(p)?;
        w.write_record(["fpr", "tpr", "threshold"])?;
        for pt in &m.roc {
            w.write_record([pt.fpr.to_string(), pt.tpr.to_string(), pt.threshold.to_string()])?;
        }
        w.flush()?;
    }
    if !m.roc.is_empty() {
        print!("{}", ascii_roc(&m.roc, 41, 16));
    }
    println!(
        "accuracy {:.4}, precision {:.4}, recall {:.4}, f1 {:.4}",
        m.accuracy, m.precision, m.recall, m.f1
    );
    match m.auc {
        Some(auc) => println!("AUC: {auc:.6}"),
        None => println!("AUC: undefined (single class)"),
    }
    Ok(())
}

/// Step-function ROC drawn on a `width` x `height` character grid.
pub fn ascii_roc(points: &[RocPoint], width: usize, height: usize) -> String {
    let tpr_at = |fpr: f64| {
        points
            .iter()
            .filter(|p| p.fpr <= fpr + 1e-12)
            .map(|p| p.tpr)
            .fold(0.0, f64::max)
    };
    let mut grid = vec![vec![' '; width]; height];
    for (c, x) in (0..width).map(|c| (c, c as f64 / (width - 1) as f64)) {
        let diag = ((x * (height - 1) as f64).round()) as usize;
        grid[height - 1 - diag][c] = '.';
        let r = (tpr_at(x) * (height - 1) as f64).round() as usize;
        grid[height - 1 - r][c] = '*';
    }
    let mut out = String::new();
    for (i, row) in grid.iter().enumerate() {
        let label = match i {
            0 => "1.0",
            _ if i == height - 1 => "0.0",
            _ => "   ",
        };
        out.push_str(&format!("{label} |{}\n", row.iter().collect::<String>()));
    }
    out.push_str(&format!("    +{}\n", "-".repeat(width)));
    out.push_str(&format!("     0.0{}1.0  (fpr)\n", " ".repeat(width.saturating_sub(6))));
    out
}

pub fn importance(a: &ImportanceArgs, seed: u64) -> Result<()> {
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(&mut out);
    match a.method {
        ImportanceMethod::Permutation | ImportanceMethod::Impurity => {
            let model = load_model(&a.model)?;
            let scores = if a.method == ImportanceMethod::Impurity {
                impurity_importance(&model)?
            } else {
                let set = labeled_set(&a.features, a.labels.as_deref())?;
                let pre = model
                    .preprocessing
                    .as_ref()
                    .context("model carries no preprocessing")?;
                let x = pre.transform::<f64>(&set.raw);
                permutation_importance(&model, &x, &set.y, a.repeats, seed)?
            };
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
            let mut rank = vec![0; scores.len()];
            for (r, &j) in order.iter().enumerate() {
                rank[j] = r + 1;
            }
            w.write_record(["feature", "importance", "rank"])?;
            for (j, s) in scores.iter().enumerate() {
                w.write_record([FEATURE_NAMES[j].to_string(), s.to_string(), rank[j].to_string()])?;
            }
        }
        ImportanceMethod::Chi2 => {
            let set = labeled_set(&a.features, a.labels.as_deref())?;
            w.write_record(["feature", "statistic", "df", "critical_95", "significant", "bins", "n"])?;
            for (j, name) in FEATURE_NAMES.iter().enumerate() {
                let (col, y): (Vec<f64>, Vec<u8>) = set
                    .raw
                    .iter()
                    .zip(&set.y)
                    .filter_map(|(r, &y)| r[j].map(|v| (v, y)))
                    .unzip();
                if col.is_empty() {
                    w.write_record([name.to_string(), String::new(), "0".into(), String::new(), "0".into(), "0".into(), "0".into()])?;
                    continue;
                }
                let c = chi_squared(&col, &y, FEATURE_KINDS[j] == FeatureKind::Binary, a.bins)?;
                let crit = chi_squared_critical_95(c.df);
                let significant = crit.is_some_and(|k| c.statistic > k);
                w.write_record([
                    name.to_string(),
                    c.statistic.to_string(),
                    c.df.to_string(),
                    crit.map(|k| k.to_string()).unwrap_or_default(),
                    u8::from(significant).to_string(),
                    c.bins.to_string(),
                    col.len().to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
