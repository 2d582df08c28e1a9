use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use radkg::annotation::{parse_annotations, AnnotatedSentence, FallbackAnnotator};
use radkg::eval::{parse_descriptions, parse_gold, score_descriptions, triple_prf, EvalMode, LexicalCosine};
use radkg::extract::{parse_triples, serialize_triples, Extractor, Triple, TripleRecord};
use radkg::generate::ReportGenerator;
use radkg::kg::{augment_corpus, serialize_quarantine, slug, to_ntriples, KnowledgeGraph, DEFAULT_NAMESPACE};
use radkg::ontology::Ontology;
use radkg::preprocess::{load_corpus, CleanSentence};

use crate::config::{load_graph, AnnotationMode, RunConfig};
use crate::{Cli, Command, DumpFormat, Exit};

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Preprocess { corpus } => preprocess(&cfg, corpus.as_deref(), out, cli.strict),
        Command::Extract { inputs, texts, annotated } => extract(&cfg, inputs, texts, *annotated, out, cli.strict),
        Command::BuildKg { triples, graphs } => build_kg(&cfg, triples, graphs, out),
        Command::Generate { dictations, file, graphs, json, descriptions } => {
            let mode = match (json, descriptions) {
                (true, _) => GenerateOutput::Json,
                (_, true) => GenerateOutput::Descriptions,
                _ => GenerateOutput::Report,
            };
            generate(&cfg, dictations, file.as_deref(), graphs, mode, out)
        }
        Command::Evaluate { system, gold, mode, descriptions, csv, no_smoothing } => {
            let smoothing = cfg.smoothing() && !no_smoothing;
            evaluate(system, gold, mode, *descriptions, *csv, smoothing, out)
        }
        Command::DumpKg { graph, format } => dump_kg(graph, *format, out),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// All output leaves through here, in one piece, after the work is done.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn preprocess(cfg: &RunConfig, corpus: Option<&Path>, out: Option<&Path>, strict: bool) -> Result<()> {
    let dir = match corpus {
        Some(d) => d,
        None => cfg.corpus_dir()?,
    };
    let reports = load_corpus(dir)?;
    let pre = cfg.preprocessor()?;
    let (sentences, skipped) = pre.clean_corpus(&reports);
    let mut text = String::new();
    for s in &sentences {
        text.push_str(&serde_json::to_string(s)?);
        text.push('\n');
    }
    emit(out, &text)?;
    for (id, e) in &skipped {
        log::warn!("skipped report {id}: {e}");
    }
    log::info!("{} reports, {} sentences, {} skipped", reports.len(), sentences.len(), skipped.len());
    if strict && !skipped.is_empty() {
        return Err(Exit::Skipped(skipped.len()).into());
    }
    Ok(())
}

enum Input {
    Raw(String, String),
    Annotated(AnnotatedSentence),
}

fn read_inputs(cfg: &RunConfig, inputs: &[PathBuf], texts: &[String], annotated: bool) -> Result<Vec<Input>> {
    let mut items = Vec::new();
    for (i, t) in texts.iter().enumerate() {
        items.push(Input::Raw(format!("s{}", i + 1), t.clone()));
    }
    for path in inputs {
        let text = read(path)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if path.extension().is_some_and(|e| e == "jsonl") {
            for (n, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let s: CleanSentence = serde_json::from_str(line)
                    .with_context(|| format!("{} line {}", path.display(), n + 1))?;
                items.push(Input::Raw(format!("{}:{}", s.report_id, s.sentence_index), s.text));
            }
        } else if annotated || cfg.annotation.mode == AnnotationMode::Files {
            let sentences = parse_annotations(&text).with_context(|| format!("{}", path.display()))?;
            items.extend(sentences.into_iter().map(Input::Annotated));
        } else {
            for (n, line) in text.lines().enumerate() {
                let line = line.trim_end_matches('\r');
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                match line.split_once('\t') {
                    Some((id, t)) => items.push(Input::Raw(id.trim().to_string(), t.trim().to_string())),
                    None => items.push(Input::Raw(format!("{stem}:{}", n + 1), line.trim().to_string())),
                }
            }
        }
    }
    Ok(items)
}

fn extract(
    cfg: &RunConfig,
    inputs: &[PathBuf],
    texts: &[String],
    annotated: bool,
    out: Option<&Path>,
    strict: bool,
) -> Result<()> {
    let items = read_inputs(cfg, inputs, texts, annotated)?;
    let extractor = cfg.extractor()?;
    let sentences: Vec<AnnotatedSentence> = {
        let annotator = FallbackAnnotator::new(&extractor.lexicon, &extractor.senses);
        radkg::par::map(&items, |item| match item {
            Input::Raw(id, text) => annotator.annotate(id, text),
            Input::Annotated(s) => s.clone(),
        })
    };
    let results = extractor.extract_batch(&sentences);
    let mut text = String::new();
    let mut skipped = 0;
    for (s, r) in sentences.iter().zip(results) {
        match r {
            Ok(triples) if triples.is_empty() => text.push_str(&format!("#sentence\t{}\n", s.sentence_id)),
            Ok(triples) => {
                let records: Vec<TripleRecord> = triples.iter().map(Triple::record).collect();
                text.push_str(&serialize_triples(&records));
            }
            Err(e) => {
                log::warn!("skipped sentence {}: {e}", s.sentence_id);
                skipped += 1;
            }
        }
    }
    emit(out, &text)?;
    if strict && skipped > 0 {
        return Err(Exit::Skipped(skipped).into());
    }
    Ok(())
}

fn graph_file_names(paths: &[PathBuf], graphs: &[KnowledgeGraph]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    paths
        .iter()
        .zip(graphs)
        .map(|(p, g)| {
            let base = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .or_else(|| g.root.clone())
                .unwrap_or_else(|| "graph".into());
            let mut name = slug(&base);
            let mut k = 2;
            while !seen.insert(name.clone()) {
                name = format!("{}-{k}", slug(&base));
                k += 1;
            }
            format!("{name}.nt")
        })
        .collect()
}

fn build_kg(cfg: &RunConfig, triple_files: &[PathBuf], graph_paths: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let Some(dir) = out else {
        bail!("build-kg needs --out DIR");
    };
    let ontology = Ontology::default();
    let paths = if graph_paths.is_empty() { &cfg.kg.preliminary } else { graph_paths };
    let mut graphs = cfg.graphs(paths, &ontology)?;
    let extractor = cfg.extractor()?;
    let mut triples = Vec::new();
    for f in triple_files {
        let records = parse_triples(&read(f)?).with_context(|| format!("{}", f.display()))?;
        triples.extend(records.iter().map(|r| Triple::from_record(r, &extractor.lexicon)));
    }
    let report = augment_corpus(&mut graphs, &triples, &ontology);
    for (g, p) in graphs.iter().zip(paths) {
        g.validate(&ontology)
            .with_context(|| format!("augmented graph from {} is invalid", p.display()))?;
    }

    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let names = graph_file_names(paths, &graphs);
    let mut summaries = Vec::new();
    for (g, name) in graphs.iter().zip(&names) {
        std::fs::write(dir.join(name), to_ntriples(g, DEFAULT_NAMESPACE))?;
        summaries.push(json!({
            "file": name,
            "root": g.root,
            "nodes": g.nodes.len(),
            "edges": g.edges.len(),
        }));
    }
    std::fs::write(dir.join("quarantine.tsv"), serialize_quarantine(&report.quarantined))?;
    let summary = json!({
        "graphs": summaries,
        "added_nodes": report.added_nodes.len(),
        "added_edges": report.added_edges.len(),
        "quarantined": report.quarantined.len(),
        "details": report,
    });
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    log::info!(
        "added {} nodes and {} edges, quarantined {}",
        report.added_nodes.len(),
        report.added_edges.len(),
        report.quarantined.len()
    );
    Ok(())
}

enum GenerateOutput {
    Report,
    Json,
    Descriptions,
}

fn generate(
    cfg: &RunConfig,
    dictations: &[String],
    file: Option<&Path>,
    graph_paths: &[PathBuf],
    mode: GenerateOutput,
    out: Option<&Path>,
) -> Result<()> {
    let mut ids: Vec<String> = (1..=dictations.len()).map(|i| format!("d{i}")).collect();
    let mut all: Vec<String> = dictations.to_vec();
    if let Some(f) = file {
        for (n, line) in read(f)?.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, text) = line.split_once('\t').unwrap_or(("", line));
            ids.push(if id.is_empty() { format!("line{}", n + 1) } else { id.trim().to_string() });
            all.push(text.trim().to_string());
        }
    }
    if all.is_empty() {
        bail!("no dictation given");
    }
    let ontology = Ontology::default();
    let extractor: Extractor = cfg.extractor()?;
    let graphs = cfg.graphs(graph_paths, &ontology)?;
    let templates = cfg.templates()?;
    let corpus = cfg.parallel_corpus()?;
    let normal = cfg.normal_template()?;
    let generator = ReportGenerator {
        extractor: &extractor,
        ontology: &ontology,
        graphs: &graphs,
        templates: &templates,
        corpus: &corpus,
        normal: &normal,
        config: cfg.generate_config(),
    };
    if let GenerateOutput::Descriptions = mode {
        let pairs: Vec<(&String, &String)> = ids.iter().zip(&all).collect();
        let described = radkg::par::map(&pairs, |(id, text)| generator.describe(id, text));
        let mut text = String::new();
        for ((id, _), r) in pairs.iter().zip(described) {
            let (_, d) = r?;
            text.push_str(&format!("{id}\t{}\n", d.text));
        }
        return emit(out, &text);
    }
    let generated = generator.generate_report(&all)?;
    for item in &generated.items {
        for w in &item.description.warnings {
            log::warn!("{}: {w}", item.dictation);
        }
    }
    match mode {
        GenerateOutput::Json => emit(out, &(serde_json::to_string_pretty(&generated)? + "\n")),
        _ => emit(out, &generated.report),
    }
}

fn evaluate(
    system: &Path,
    gold: &Path,
    mode: &str,
    descriptions: bool,
    csv: bool,
    smoothing: bool,
    out: Option<&Path>,
) -> Result<()> {
    let text = if descriptions {
        let sys = parse_descriptions(&read(system)?).with_context(|| format!("{}", system.display()))?;
        let gold_rows = parse_descriptions(&read(gold)?).with_context(|| format!("{}", gold.display()))?;
        let mut pairs = Vec::with_capacity(sys.len());
        for (id, cand) in sys {
            let Some((_, reference)) = gold_rows.iter().find(|(g, _)| *g == id) else {
                bail!("system description `{id}` has no gold counterpart");
            };
            pairs.push((id, cand, reference.clone()));
        }
        let m = score_descriptions(&pairs, smoothing, &LexicalCosine);
        if csv {
            m.to_csv()
        } else {
            m.to_json()
        }
    } else {
        let mode: EvalMode = mode.parse()?;
        let sys = parse_gold(&read(system)?).with_context(|| format!("{}", system.display()))?;
        let gold_set = parse_gold(&read(gold)?).with_context(|| format!("{}", gold.display()))?;
        let m = triple_prf(&sys, &gold_set, mode)?;
        if csv {
            m.to_csv()
        } else {
            m.to_json()
        }
    };
    emit(out, &text)
}

fn dump_kg(path: &Path, format: DumpFormat, out: Option<&Path>) -> Result<()> {
    let ontology = Ontology::default();
    let g = load_graph(path, &ontology)?;
    let text = match format {
        DumpFormat::Nt => to_ntriples(&g, DEFAULT_NAMESPACE),
        DumpFormat::Summary => {
            let mut by_relation = std::collections::BTreeMap::new();
            for e in &g.edges {
                *by_relation.entry(e.relation.as_str()).or_insert(0usize) += 1;
            }
            let summary = json!({
                "root": g.root,
                "kind": g.kind.as_str(),
                "nodes": g.nodes.len(),
                "edges": g.edges.len(),
                "edges_by_relation": by_relation,
            });
            serde_json::to_string_pretty(&summary)? + "\n"
        }
    };
    emit(out, &text)
}
