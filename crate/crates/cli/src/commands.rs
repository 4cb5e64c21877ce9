use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crisis_mt_backends::evaluate_system;
use crisis_mt_core::backend::BackendConfig;
use crisis_mt_core::leaderboard::{
    build_leaderboard, for_direction, load_baselines, load_records_json, render_report, shipped_baselines, ReportFormat,
};
use crisis_mt_core::{
    contamination_check, deduplicate, export_corpus, export_split, ingest_file, split, Corpus, CrisisPhase, ExportFormat,
    LanguagePair, ReviewStatus, SplitName, Stream,
};
use crisis_mt_service::{replay, Service, ServiceConfig};

use crate::error::CliError;
use crate::{Cli, Command, Input, Result};

pub fn run(cli: Cli) -> Result<()> {
    let json = cli.json;
    let config = cli.config;
    match cli.command {
        Command::Serve { listen } => serve(config, listen),
        Command::Ingest { input, accept } => ingest(json, config, &input, accept),
        Command::Dedup {
            input,
            out_dir,
            name,
            output_format,
        } => dedup(json, &input, out_dir.as_deref(), &name, output_format),
        Command::Split {
            input,
            ratios,
            seed,
            dedup,
            manifest,
            out_dir,
            output_format,
        } => {
            let corpus = load(&input)?;
            let corpus = if dedup { deduplicate(&corpus).0 } else { corpus };
            let manifest_doc = split(&corpus, ratios, seed)?;
            if let Some(path) = manifest {
                write(&path, &manifest_doc.to_json())?;
            }
            if let Some(dir) = out_dir {
                create_dir(&dir)?;
                let format = output_format.unwrap_or(input_format(&input));
                export_split(&corpus, &manifest_doc, format, &dir)?;
            }
            let human = format!(
                "train {}, validation {}, test {} (seed {}, manifest {})",
                manifest_doc.count(SplitName::Train),
                manifest_doc.count(SplitName::Validation),
                manifest_doc.count(SplitName::Test),
                seed,
                manifest_doc.fingerprint()
            );
            emit(json, &manifest_doc, human)
        }
        Command::CheckContamination { train, test, format, pair } => {
            let as_input = |path: PathBuf| Input {
                input: path,
                format,
                pair: pair.clone(),
                stream: Stream::Community,
                phase: 1,
            };
            let train = load(&as_input(train))?;
            let test = load(&as_input(test))?;
            let report = contamination_check(train.segments(), test.segments());
            let mut human = format!(
                "{} overlaps ({} test segments share a source sentence with training data)",
                report.pair_count, report.source_count
            );
            for hit in &report.pair_hits {
                human.push_str(&format!("\n  train {} = test {}", hit.train_id, hit.test_id));
            }
            emit(json, &report, human)?;
            if report.pair_count > 0 {
                return Err(CliError::validation(format!("{} test segments also occur in training data", report.pair_count)));
            }
            Ok(())
        }
        Command::Evaluate {
            backend_config,
            testset,
            format,
            pair,
            name,
            out_dir,
        } => {
            let cfg = load_backend_config(&backend_config)?;
            let testset_input = Input {
                input: testset,
                format,
                pair,
                stream: Stream::Community,
                phase: 1,
            };
            let segments = load(&testset_input)?.into_segments();
            let eval = runtime()?.block_on(evaluate_system(&cfg, &segments, &name))?;
            let files = eval.persist(&segments, &out_dir)?;
            let r = &eval.record;
            let meta = r.run_metadata.as_ref().expect("local runs carry metadata");
            if meta.partial {
                eprintln!(
                    "warning: {} of {} segments failed and were excluded",
                    meta.segments_failed, meta.segments_total
                );
            }
            let human = format!(
                "{} {}: BLEU {:.2}  TER {:.4}  ChrF3 {:.4}  ({}/{} segments scored)\nrun written to {}",
                r.system_name,
                r.direction,
                r.bleu,
                r.ter,
                r.chrf3,
                meta.segments_total - meta.segments_failed,
                meta.segments_total,
                files.sidecar.display()
            );
            let doc = json!({
                "record": r,
                "files": {
                    "sources": files.sources,
                    "hypotheses": files.hypotheses,
                    "sidecar": files.sidecar,
                },
            });
            emit(json, &doc, human)
        }
        Command::Leaderboard {
            direction,
            reference,
            records,
            baselines,
        } => {
            let mut all = match baselines {
                Some(path) => load_baselines(&path)?,
                None => shipped_baselines(),
            };
            for path in &records {
                all.extend(load_records_json(path)?);
            }
            let board = build_leaderboard(&for_direction(&all, &direction), &reference)?;
            let format = if json { ReportFormat::Json } else { ReportFormat::Markdown };
            print!("{}", ensure_newline(render_report(&board, format)));
            Ok(())
        }
        Command::Export {
            format,
            pair,
            out_dir,
            ratios,
            seed,
            dedup,
            all,
        } => {
            let cfg = service_config(config, "export")?;
            let state = replay(&cfg.store, &cfg.pairs)?;
            if state.phase(&pair).is_none() {
                return Err(CliError::validation(format!("the store does not serve {pair}")));
            }
            let segments = state
                .segments_of(&pair)
                .filter(|s| all || s.segment.status == ReviewStatus::Accepted)
                .map(|s| s.segment.clone())
                .collect();
            let corpus = Corpus::new(pair.clone(), segments)?;
            let corpus = if dedup { deduplicate(&corpus).0 } else { corpus };
            if corpus.is_empty() {
                return Err(CliError::validation(format!("no {} segments for {pair}", if all { "stored" } else { "accepted" })));
            }
            create_dir(&out_dir)?;
            let receipt = match ratios {
                Some(ratios) => export_split(&corpus, &split(&corpus, ratios, seed)?, format, &out_dir)?,
                None => export_corpus(&corpus, format, &out_dir, &pair.to_string())?,
            };
            let human = format!(
                "exported {} segments to {}: {}",
                receipt.segment_count,
                out_dir.display(),
                receipt.files.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join(", ")
            );
            emit(json, &receipt, human)
        }
    }
}

fn serve(config: Option<PathBuf>, listen: Option<String>) -> Result<()> {
    let mut cfg = service_config(config, "serve")?;
    if let Some(listen) = listen {
        cfg.listen = listen;
    }
    runtime()?.block_on(crisis_mt_service::serve(cfg, |addr| eprintln!("listening on http://{addr}")))?;
    Ok(())
}

fn ingest(json: bool, config: Option<PathBuf>, input: &Input, accept: bool) -> Result<()> {
    let cfg = service_config(config, "ingest")?;
    let corpus = load(input)?;
    let pair = corpus.pair().clone();
    let segments: Vec<_> = corpus
        .into_segments()
        .into_iter()
        .map(|s| if accept { s.with_status(ReviewStatus::Accepted) } else { s })
        .collect();
    let service = Service::open(cfg)?;
    let n = service.import(segments)?;
    emit(
        json,
        &json!({"imported": n, "pair": pair}),
        format!("imported {n} segments into {pair}"),
    )
}

fn dedup(json: bool, input: &Input, out_dir: Option<&Path>, name: &str, output_format: Option<ExportFormat>) -> Result<()> {
    let corpus = load(input)?;
    let (kept, report) = deduplicate(&corpus);
    let receipt = match out_dir {
        Some(dir) => {
            create_dir(dir)?;
            Some(export_corpus(&kept, output_format.unwrap_or(input_format(input)), dir, name)?)
        }
        None => None,
    };
    let human = format!(
        "kept {} of {} segments ({} duplicates removed)",
        report.kept,
        report.input,
        report.removals.len()
    );
    emit(json, &json!({"report": report, "receipt": receipt}), human)
}

fn emit<T: Serialize>(json: bool, value: &T, human: String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
    } else {
        println!("{human}");
    }
    Ok(())
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn runtime() -> Result<tokio::runtime::Runtime> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io(format!("cannot start async runtime: {e}")))
}

fn service_config(path: Option<PathBuf>, command: &str) -> Result<ServiceConfig> {
    let path = path.ok_or_else(|| {
        CliError::validation(format!("{command} needs a service config: pass --config or set CRISIS_CORPUS_CONFIG"))
    })?;
    Ok(ServiceConfig::load(&path)?)
}

fn load_backend_config(path: &Path) -> Result<BackendConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn input_format(input: &Input) -> ExportFormat {
    input.format.unwrap_or_else(|| match input.input.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => ExportFormat::Jsonl,
        Some("tsv") => ExportFormat::Tsv,
        _ => ExportFormat::Bitext,
    })
}

/// Pair named by the first record of a JSONL file.
fn jsonl_pair(path: &Path) -> Result<LanguagePair> {
    let file = fs::File::open(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| CliError::validation(format!("{}: line 1: {e}", path.display())))?;
        let (Some(src), Some(tgt)) = (v["src_lang"].as_str(), v["tgt_lang"].as_str()) else {
            break;
        };
        return Ok(format!("{src}-{tgt}").parse()?);
    }
    Err(CliError::validation(format!("{}: cannot infer the language pair; pass --pair", path.display())))
}

fn load(input: &Input) -> Result<Corpus> {
    let format = input_format(input);
    let pair = match (&input.pair, format) {
        (Some(p), _) => p.clone(),
        (None, ExportFormat::Jsonl) => jsonl_pair(&input.input)?,
        (None, _) => return Err(CliError::validation("--pair is required for tsv and bitext input")),
    };
    let phase = CrisisPhase::from_ordinal(input.phase).expect("clap restricts the range");
    Ok(ingest_file(&input.input, format, &pair, input.stream, phase)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
