//! Subcommand implementations. Each writes its artifacts into the output
//! directory followed by `manifest_<command>.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use superspreader_core::behavior::{
    build_profiles, prominence_crosstab, read_annotation_csv, read_status_csv, select_top, write_profiles_csv, CachedScorer,
    OfflineStubScorer, ProfileInputs, RecordScorer, ToxicityScorer,
};
use superspreader_core::dismantle::{misinfo_share, write_curves_csv};
use superspreader_core::ingest::{
    load_domain_list, load_shortener_map, read_corpus, read_corpus_lenient, DomainList, IngestCounters, Labeler,
    LinkExpander, OfflineResolver, Period, TweetRecord,
};
use superspreader_core::stats::{cvm_two_sample, krippendorff_alpha, mann_whitney_u, read_annotations_csv, spearman, Alternative};
use superspreader_core::synth::generate;
use superspreader_core::{Analysis, DismantlingCurve, MetricName, Ranking};

use crate::config::{PipelineConfig, ScorerMode};
use crate::error::CliError;
use crate::manifest::Manifest;

const DAY: i64 = 86_400;

/// Corpus and label inputs shared by the analysis subcommands.
struct Inputs {
    records: Vec<TweetRecord>,
    domains: DomainList,
    resolver: Option<OfflineResolver>,
    counters: IngestCounters,
}

impl Inputs {
    fn load(cfg: &PipelineConfig, manifest: &mut Manifest) -> Result<Self, CliError> {
        if cfg.input.corpus.is_empty() {
            return Err(CliError::usage("no corpus given (--corpus or input.corpus)"));
        }
        let domains_path = cfg.input.domains.as_ref().ok_or_else(|| CliError::usage("no domain list given (--domains or input.domains)"))?;
        let domains = load_domain_list(domains_path)?;
        manifest.input(domains_path)?;
        let resolver = match &cfg.input.shorteners {
            Some(p) => {
                let r = load_shortener_map(p)?;
                manifest.input(p)?;
                Some(r)
            }
            None => None,
        };
        let mut records = Vec::new();
        let mut skipped = 0usize;
        for path in &cfg.input.corpus {
            if cfg.input.lenient {
                let read = read_corpus_lenient(path)?;
                for e in read.errors.iter().take(5) {
                    eprintln!("warning: {}: skipped {e}", path.display());
                }
                skipped += read.errors.len();
                records.extend(read.records);
            } else {
                records.extend(read_corpus(path)?);
            }
            manifest.input(path)?;
        }
        manifest.note("records", records.len());
        manifest.note("skipped_lines", skipped);
        Ok(Self { records, domains, resolver, counters: IngestCounters::default() })
    }

    fn labeler(&self) -> Labeler<'_> {
        let l = Labeler::new(&self.domains, &self.counters);
        match &self.resolver {
            Some(r) => l.with_expander(LinkExpander::new(r)),
            None => l,
        }
    }

    fn analyze(&self, cfg: &PipelineConfig) -> Result<Analysis, CliError> {
        let split = cfg.split()?;
        Analysis::run(self.records.clone(), &self.labeler(), split).map_err(|e| CliError::internal(e.to_string()))
    }
}

fn write_artifact(manifest: &mut Manifest, path: PathBuf, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = File::create(&path).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
    manifest.output(&path)
}

fn write_json(manifest: &mut Manifest, path: PathBuf, value: &serde_json::Value) -> Result<(), CliError> {
    write_artifact(manifest, path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn finish(cfg: &PipelineConfig, mut manifest: Manifest, counters: Option<&IngestCounters>) -> Result<(), CliError> {
    if let Some(c) = counters {
        manifest.counters = c.snapshot();
    }
    let path = manifest.write(&cfg.output)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn rankings<'a>(cfg: &PipelineConfig, a: &'a Analysis) -> Vec<&'a Ranking> {
    cfg.metrics.iter().filter_map(|&m| a.ranking(m)).collect()
}

pub fn ingest(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut manifest = Manifest::new("ingest", cfg);
    let inputs = Inputs::load(cfg, &mut manifest)?;
    let split = cfg.split()?;
    let labeler = inputs.labeler();
    let labeled = labeler.label_all(inputs.records.clone());
    write_artifact(&mut manifest, cfg.output.join("labels.csv"), |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["tweet_id", "author_id", "timestamp", "period", "low_credibility"])?;
        for r in &labeled {
            let period = match split.assign(r.record.timestamp) {
                Some(Period::Observation) => "observation",
                Some(Period::Evaluation) => "evaluation",
                None => "dropped",
            };
            wtr.write_record([
                r.record.tweet_id.as_str(),
                &r.record.author_id,
                &r.record.timestamp.to_string(),
                period,
                if r.low_credibility { "true" } else { "false" },
            ])?;
        }
        wtr.flush()
    })?;
    let lowcred = labeled.iter().filter(|r| r.low_credibility).count();
    let a: Analysis = Analysis::from_labeled(labeled, split).map_err(|e| CliError::internal(e.to_string()))?;
    write_artifact(&mut manifest, cfg.output.join("edges_observation.csv"), |w| a.observation.write_edges_csv(w))?;
    write_artifact(&mut manifest, cfg.output.join("edges_evaluation.csv"), |w| a.evaluation.write_edges_csv(w))?;
    let summary = json!({
        "records": inputs.records.len(),
        "low_credibility_records": lowcred,
        "observation_records": a.observation_records.len(),
        "evaluation_records": a.evaluation_records.len(),
        "dropped_records": a.dropped_records,
        "observation": { "posters": a.observation.poster_count(), "edges": a.observation.edge_count(), "total_weight": a.observation.total_weight(), "self_retweets": a.observation.self_retweets() },
        "evaluation": { "posters": a.evaluation.poster_count(), "edges": a.evaluation.edge_count(), "total_weight": a.evaluation.total_weight(), "self_retweets": a.evaluation.self_retweets() },
    });
    write_json(&mut manifest, cfg.output.join("ingest_summary.json"), &summary)?;
    manifest.note("dropped_records", a.dropped_records);
    finish(cfg, manifest, Some(&inputs.counters))
}

fn write_selected(manifest: &mut Manifest, path: PathBuf, cfg: &PipelineConfig, rankings: &[&Ranking]) -> Result<BTreeSet<String>, CliError> {
    let heads: Vec<(MetricName, Vec<String>)> = rankings.iter().map(|r| (r.metric, select_top(r, cfg.top))).collect();
    write_artifact(manifest, path, |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["metric", "rank", "account_id"])?;
        for (m, ids) in &heads {
            for (i, id) in ids.iter().enumerate() {
                wtr.write_record([m.as_str(), &(i + 1).to_string(), id])?;
            }
        }
        wtr.flush()
    })?;
    Ok(heads.into_iter().flat_map(|(_, ids)| ids).collect())
}

pub fn rank(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut manifest = Manifest::new("rank", cfg);
    let inputs = Inputs::load(cfg, &mut manifest)?;
    let a = inputs.analyze(cfg)?;
    write_artifact(&mut manifest, cfg.output.join("metrics.csv"), |w| superspreader_core::metrics::write_metrics_csv(&a.metrics, w))?;
    let rs = rankings(cfg, &a);
    for r in &rs {
        write_artifact(&mut manifest, cfg.output.join(format!("ranking_{}.csv", r.metric)), |w| r.write_csv(w))?;
        manifest.note(&format!("excluded_{}", r.metric), r.excluded);
    }
    write_selected(&mut manifest, cfg.output.join("top_accounts.csv"), cfg, &rs)?;
    manifest.note("candidates", a.candidates.len());
    finish(cfg, manifest, Some(&inputs.counters))
}

pub fn dismantle(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut manifest = Manifest::new("dismantle", cfg);
    let inputs = Inputs::load(cfg, &mut manifest)?;
    let a = inputs.analyze(cfg)?;
    let wanted: Vec<MetricName> = cfg.metrics.iter().copied().chain(std::iter::once(MetricName::Optimal)).collect();
    // Without evaluation-period weight nothing can be removed; every
    // curve is the single point (0, 1).
    let curves: Vec<DismantlingCurve> = wanted
        .iter()
        .map(|&m| {
            a.curve(m).cloned().unwrap_or(DismantlingCurve {
                metric: m,
                points: vec![(0, 1.0)],
                increments: vec![],
                residual_floor: 1.0,
                total_weight: 0,
            })
        })
        .collect();
    write_artifact(&mut manifest, cfg.output.join("curves.csv"), |w| write_curves_csv(&curves, cfg.dismantle.curve_every, w))?;
    let total = a.evaluation.total_weight();
    write_artifact(&mut manifest, cfg.output.join("shares.csv"), |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["account_id", "m", "candidate"])?;
        if total > 0 {
            for id in a.evaluation.posters().iter().chain(a.candidates.iter()).collect::<BTreeSet<_>>() {
                let m = misinfo_share::<f64>(&a.evaluation, id).expect("nonzero total").m;
                wtr.write_record([id.as_str(), &m.to_string(), if a.candidates.contains(id) { "true" } else { "false" }])?;
            }
        }
        wtr.flush()
    })?;
    let at = |c: &DismantlingCurve| {
        let mut m = serde_json::Map::new();
        for k in [1usize, 10, 100, 1000] {
            if k <= c.len() {
                m.insert(format!("k{k}"), json!(c.removed(k)));
            }
        }
        serde_json::Value::Object(m)
    };
    let removed: serde_json::Map<String, serde_json::Value> = curves.iter().map(|c| (c.metric.to_string(), at(c))).collect();
    let summary = json!({
        "candidates": a.candidates.len(),
        "evaluation_total_weight": total,
        "residual_floor": a.residual_floor,
        "removed": removed,
    });
    write_json(&mut manifest, cfg.output.join("dismantle_summary.json"), &summary)?;
    manifest.note("candidates", a.candidates.len());
    finish(cfg, manifest, Some(&inputs.counters))
}

pub fn scan(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut manifest = Manifest::new("scan", cfg);
    let inputs = Inputs::load(cfg, &mut manifest)?;
    let a = inputs.analyze(cfg)?;
    let (ma, mb) = (cfg.scan.a, cfg.scan.b);
    let (Some(ca), Some(cb)) = (a.curve(ma), a.curve(mb)) else {
        return Err(CliError::input("the evaluation period has no low-credibility retweets to scan"));
    };
    let available = ca.len().min(cb.len());
    let max_k = cfg.scan.max_k.unwrap_or(available);
    if max_k > available {
        return Err(CliError::usage(format!("scan.max_k {max_k} exceeds the {available} ranked accounts")));
    }
    let points = a.scan(ma, mb, max_k, &cfg.test_config()).map_err(|e| CliError::internal(e.to_string()))?;
    write_artifact(&mut manifest, cfg.output.join("scan.csv"), |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "statistic", "p_value", "method"])?;
        for p in &points {
            wtr.write_record([p.k.to_string(), p.statistic.to_string(), p.p_value.to_string(), p.method.as_str().to_string()])?;
        }
        wtr.flush()
    })?;
    let first = points.iter().find(|p| p.p_value < cfg.stats.alpha).map(|p| p.k);
    let summary = json!({
        "a": ma, "b": mb, "max_k": max_k, "alpha": cfg.stats.alpha,
        "first_significant_k": first,
    });
    write_json(&mut manifest, cfg.output.join("scan_summary.json"), &summary)?;
    finish(cfg, manifest, Some(&inputs.counters))
}

enum Scorer {
    Stub(OfflineStubScorer),
    Cached(CachedScorer<RecordScorer>),
    #[cfg(feature = "live")]
    Live(superspreader_core::behavior::PerspectiveScorer),
    #[cfg(feature = "live")]
    LiveCached(CachedScorer<superspreader_core::behavior::PerspectiveScorer>),
}

impl Scorer {
    fn open(cfg: &PipelineConfig) -> Result<Self, CliError> {
        let ch = &cfg.characterize;
        let cache_err = |e: superspreader_core::behavior::ScoreError| CliError::input(e.to_string());
        match ch.scorer {
            ScorerMode::OfflineStub => Ok(Scorer::Stub(OfflineStubScorer { salt: cfg.seed })),
            ScorerMode::Cached => {
                let path = ch.score_cache.as_ref().ok_or_else(|| CliError::usage("scorer cached needs characterize.score_cache"))?;
                Ok(Scorer::Cached(CachedScorer::open(RecordScorer, path).map_err(cache_err)?))
            }
            #[cfg(feature = "live")]
            ScorerMode::Live => {
                use superspreader_core::behavior::PerspectiveScorer;
                let key = std::env::var("PERSPECTIVE_API_KEY").map_err(|_| CliError::usage("scorer live needs PERSPECTIVE_API_KEY in the environment"))?;
                let s = PerspectiveScorer::new(key, ch.requests_per_second);
                match &ch.score_cache {
                    Some(p) => Ok(Scorer::LiveCached(CachedScorer::open(s, p).map_err(cache_err)?)),
                    None => Ok(Scorer::Live(s)),
                }
            }
            #[cfg(not(feature = "live"))]
            ScorerMode::Live => Err(CliError::usage("scorer live requires a build with the `live` feature")),
        }
    }

    fn as_dyn(&self) -> &dyn ToxicityScorer {
        match self {
            Scorer::Stub(s) => s,
            Scorer::Cached(s) => s,
            #[cfg(feature = "live")]
            Scorer::Live(s) => s,
            #[cfg(feature = "live")]
            Scorer::LiveCached(s) => s,
        }
    }

    fn save(&self) -> Result<(), CliError> {
        let r = match self {
            Scorer::Cached(s) => s.save(),
            #[cfg(feature = "live")]
            Scorer::LiveCached(s) => s.save(),
            _ => Ok(()),
        };
        r.map_err(|e| CliError::internal(e.to_string()))
    }
}

fn open_input(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn characterize(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut manifest = Manifest::new("characterize", cfg);
    let inputs = Inputs::load(cfg, &mut manifest)?;
    let a = inputs.analyze(cfg)?;
    let ch = &cfg.characterize;
    let statuses = match &ch.status {
        Some(p) => {
            manifest.input(p)?;
            read_status_csv(open_input(p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    let annotations = match &ch.annotations {
        Some(p) => {
            manifest.input(p)?;
            read_annotation_csv(open_input(p)?).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    let rs = rankings(cfg, &a);
    let selected: Vec<String> = write_selected(&mut manifest, cfg.output.join("selected.csv"), cfg, &rs)?.into_iter().collect();

    let start = inputs.records.iter().map(|r| r.timestamp).min().unwrap_or(0);
    let end = start.saturating_add(i64::from(ch.ratio_window_days) * DAY);
    let window: Vec<TweetRecord> = inputs.records.iter().filter(|r| r.timestamp >= start && r.timestamp < end).cloned().collect();
    let observation: Vec<TweetRecord> = a.observation_records.iter().map(|r| r.record.clone()).collect();
    let scorer = Scorer::open(cfg)?;
    let labeler = inputs.labeler();
    let profile_inputs = ProfileInputs {
        ratio_records: &window,
        toxicity_records: &observation,
        labeler: &labeler,
        scorer: scorer.as_dyn(),
        statuses: &statuses,
        annotations: &annotations,
    };
    let profiles = build_profiles::<f64>(&selected, &profile_inputs).map_err(|e| CliError::input(e.to_string()))?;
    scorer.save()?;
    write_artifact(&mut manifest, cfg.output.join("profiles.csv"), |w| write_profiles_csv(&profiles, w))?;
    let table = prominence_crosstab(&profiles, ch.follower_threshold);
    let no_ratio = profiles.iter().filter(|p| p.r_m.is_none()).count();
    let value = json!({
        "prominence": table,
        "accounts": profiles.len(),
        "accounts_without_links_in_window": no_ratio,
        "ratio_window": { "start": start, "end": end },
    });
    write_json(&mut manifest, cfg.output.join("characterize_summary.json"), &value)?;
    finish(cfg, manifest, Some(&inputs.counters))
}

pub fn synth(cfg: &PipelineConfig, gzip: bool) -> Result<(), CliError> {
    let mut manifest = Manifest::new("synth", cfg);
    let gen = cfg.generator();
    let corpus = generate(&gen).map_err(|e| CliError::usage(e.to_string()))?;
    corpus.write_to(&cfg.output, gzip).map_err(|e| CliError::internal(e.to_string()))?;
    let corpus_name = if gzip { "corpus.jsonl.gz" } else { "corpus.jsonl" };
    for name in [corpus_name, "ground_truth.json", "domains.txt"] {
        manifest.output(&cfg.output.join(name))?;
    }
    // A ready-to-run configuration for the generated corpus.
    let split = corpus.truth.split;
    let mut run = cfg.clone();
    run.synth = gen;
    run.input.corpus = vec![cfg.output.join(corpus_name)];
    run.input.domains = Some(cfg.output.join("domains.txt"));
    run.period.observation_start = Some(split.observation.start);
    run.period.observation_end = Some(split.observation.end);
    run.period.evaluation_start = Some(split.evaluation.start);
    run.period.evaluation_end = Some(split.evaluation.end);
    write_artifact(&mut manifest, cfg.output.join("pipeline.toml"), |w| w.write_all(run.to_toml().as_bytes()))?;
    manifest.note("records", corpus.records.len());
    manifest.note("superspreaders", corpus.truth.superspreaders.len());
    manifest.note("residual_fraction", corpus.truth.residual_fraction);
    finish(cfg, manifest, None)
}

pub fn stats_alpha(cfg: &PipelineConfig, path: &Path) -> Result<(), CliError> {
    let mut manifest = Manifest::new("stats_alpha", cfg);
    manifest.input(path)?;
    let m = read_annotations_csv(open_input(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let alpha: f64 = krippendorff_alpha(&m.labels).map_err(|e| CliError::input(e.to_string()))?;
    let value = json!({ "alpha": alpha, "items": m.items.len(), "annotators": m.annotators.len() });
    write_json(&mut manifest, cfg.output.join("stats_alpha.json"), &value)?;
    finish(cfg, manifest, None)
}

fn read_columns(path: &Path, names: [&str; 2]) -> Result<Vec<(String, String)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open_input(path)?);
    let bad = |e: csv::Error| CliError::input(format!("{}: {e}", path.display()));
    let headers = rdr.headers().map_err(bad)?.clone();
    let idx = |n: &str| {
        headers.iter().position(|h| h == n).ok_or_else(|| CliError::input(format!("{}: missing column {n:?}", path.display())))
    };
    let (i, j) = (idx(names[0])?, idx(names[1])?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(bad)?;
        out.push((row.get(i).unwrap_or("").to_string(), row.get(j).unwrap_or("").to_string()));
    }
    Ok(out)
}

fn parse_value(path: &Path, row: usize, s: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::input(format!("{}, line {}: bad number {s:?}", path.display(), row + 2)))
}

pub fn stats_two_sample(cfg: &PipelineConfig, path: &Path, ga: &str, gb: &str, mwu: Option<Alternative>) -> Result<(), CliError> {
    let name = if mwu.is_some() { "stats_mwu" } else { "stats_cvm" };
    let mut manifest = Manifest::new(name, cfg);
    manifest.input(path)?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (row, (g, v)) in read_columns(path, ["group", "value"])?.into_iter().enumerate() {
        if g == ga {
            x.push(parse_value(path, row, &v)?);
        } else if g == gb {
            y.push(parse_value(path, row, &v)?);
        }
    }
    let tc = cfg.test_config();
    let r = match mwu {
        Some(alt) => mann_whitney_u(&x, &y, alt, &tc),
        None => cvm_two_sample(&x, &y, &tc),
    }
    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut value = json!({
        "group_a": ga, "group_b": gb, "n_a": r.n1, "n_b": r.n2,
        "statistic": r.statistic, "p_value": r.p_value, "method": r.method.as_str(),
    });
    if let Some(alt) = mwu {
        value["alternative"] = json!(alt);
    }
    write_json(&mut manifest, cfg.output.join(format!("{name}.json")), &value)?;
    finish(cfg, manifest, None)
}

pub fn stats_spearman(cfg: &PipelineConfig, path: &Path) -> Result<(), CliError> {
    let mut manifest = Manifest::new("stats_spearman", cfg);
    manifest.input(path)?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (row, (a, b)) in read_columns(path, ["x", "y"])?.into_iter().enumerate() {
        x.push(parse_value(path, row, &a)?);
        y.push(parse_value(path, row, &b)?);
    }
    let c = spearman(&x, &y).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let value = json!({ "r": c.r, "p_value": c.p_value, "n": c.n });
    write_json(&mut manifest, cfg.output.join("stats_spearman.json"), &value)?;
    finish(cfg, manifest, None)
}
