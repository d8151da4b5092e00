use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use metrics::report::{evaluate, EvalConfig};
use prefgen::{check_pair, generate_pairs, LvmClient, LvmConfig, LvmScorer, OracleScorer, PipelineOutput, PromptItem, Scorer, Template};
use sem_core::dataset::{read_jsonl, write_jsonl, SlRecord};
use sem_core::{parse_sequence, serialize, CommandArrays, DecodeConfig, ValidationReport};
use serde::Serialize;
use serde_json::json;
use trainkit::{checkpoint, synth, Decoder, TrainConfig, TrainError, Trainer, Vocabulary};

use crate::error::CliError;
use crate::provenance::{RunRecord, SCHEMA_VERSION};
use crate::{Cli, CliResult, Command, PairsArgs, ScorerKind, TrainArgs};

pub fn dispatch(cli: &Cli, run: &mut RunRecord) -> CliResult {
    let out = &cli.global.out;
    match &cli.command {
        Command::Parse { file, json } => parse(file.as_deref(), *json),
        Command::Render { file, res, points } => {
            let seed = cli.global.seed_or(None);
            run.set_config(&json!({"file": file, "res": res, "points": points, "seed": seed}));
            render_file(file, *res, *points, seed, out, run)
        }
        Command::Eval { generated, reference, points, res } => {
            let cfg = EvalConfig { points: *points, resolution: *res, seed: cli.global.seed_or(None), ..EvalConfig::default() };
            run.set_config(&json!({"generated": generated, "reference": reference, "eval": cfg}));
            eval(generated, reference, &cfg, out, run)
        }
        Command::Pairs(args) => pairs(cli, args, run),
        Command::Train(args) => train(cli, args, run),
        Command::DecodeArrays { file, xy_pad, ext_pad } => decode_arrays(file, DecodeConfig { xy_pad: *xy_pad, ext_pad: *ext_pad }),
    }
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn write_json(path: &Path, value: &impl Serialize, run: &mut RunRecord) -> CliResult {
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    fs::write(path, text).map_err(CliError::io(path))?;
    run.outputs.push(path.to_path_buf());
    Ok(())
}

fn read_text(file: Option<&Path>) -> Result<String, CliError> {
    match file {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).map_err(CliError::io(p)),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(CliError::io("<stdin>"))?;
            Ok(s)
        }
    }
}

fn read_records(path: &Path) -> Result<Vec<SlRecord>, CliError> {
    let f = File::open(path).map_err(CliError::io(path))?;
    read_jsonl(BufReader::new(f)).map_err(|e| match e {
        sem_core::dataset::JsonlError::Io(source) => CliError::Io { path: path.into(), source },
        other => CliError::Invalid(format!("{}: {other}", path.display())),
    })
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn parse(file: Option<&Path>, as_json: bool) -> CliResult {
    let text = read_text(file)?;
    let (report, canonical) = match parse_sequence(&text) {
        Ok(model) => (render::is_renderable(&model), serialize(&model).ok()),
        Err(e) => (ValidationReport::from_error(&e), None),
    };
    if as_json {
        print_json(&json!({"schema_version": SCHEMA_VERSION, "report": report, "canonical": canonical}));
    } else if let (true, Some(c)) = (report.is_valid, &canonical) {
        println!("{c}");
    } else {
        for issue in &report.issues {
            eprintln!("{} {} at {}: {}", issue.severity_word(), issue.code, issue.location, issue.message);
        }
    }
    if report.is_valid {
        Ok(())
    } else {
        Err(CliError::Invalid("sequence is invalid".into()))
    }
}

trait SeverityWord {
    fn severity_word(&self) -> &'static str;
}

impl SeverityWord for sem_core::Issue {
    fn severity_word(&self) -> &'static str {
        match self.severity {
            sem_core::Severity::Error => "error",
            sem_core::Severity::Warning => "warning",
        }
    }
}

fn render_file(file: &Path, res: usize, points: usize, seed: u64, out: &Path, run: &mut RunRecord) -> CliResult {
    let text = fs::read_to_string(file).map_err(CliError::io(file))?;
    let model = match parse_sequence(&text) {
        Ok(m) => m,
        Err(e) => {
            print_json(&json!({"schema_version": SCHEMA_VERSION, "report": ValidationReport::from_error(&e)}));
            return Err(CliError::Invalid(e.to_string()));
        }
    };
    let (report, solid) = render::render_report(&model, res);
    let solid = match (report.is_valid, solid) {
        (true, Some(s)) => s,
        _ => {
            print_json(&json!({"schema_version": SCHEMA_VERSION, "report": report}));
            return Err(CliError::Invalid("model does not render".into()));
        }
    };
    let cloud = render::sample_points(&solid, points, seed).map_err(|e| CliError::Invalid(e.to_string()))?;
    create_dir(out)?;
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let xyz = out.join(format!("{stem}.xyz"));
    let vox = out.join(format!("{stem}.vox"));
    let pgm = out.join(format!("{stem}.pgm"));
    let write = |path: &Path, f: &dyn Fn(&mut BufWriter<File>) -> io::Result<()>| -> CliResult {
        let mut w = BufWriter::new(File::create(path).map_err(CliError::io(path))?);
        f(&mut w).and_then(|_| w.flush()).map_err(CliError::io(path))
    };
    write(&xyz, &|w| render::export::write_xyz(w, &cloud))?;
    write(&vox, &|w| render::export::write_voxels(w, &solid))?;
    fs::write(&pgm, render::export::silhouette_pgm(&solid)).map_err(CliError::io(&pgm))?;
    run.outputs.extend([xyz.clone(), vox.clone(), pgm.clone()]);
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "report": report,
        "resolution": res,
        "voxels": solid.count(),
        "volume": solid.volume(),
        "points": cloud.len(),
        "outputs": [xyz, vox, pgm],
    }));
    Ok(())
}

fn eval(generated: &Path, reference: &Path, cfg: &EvalConfig, out: &Path, run: &mut RunRecord) -> CliResult {
    let gen = read_records(generated)?;
    let refs = read_records(reference)?;
    if gen.is_empty() {
        return Err(CliError::Invalid(format!("{}: no records", generated.display())));
    }
    let report = evaluate(&gen, &refs, cfg).map_err(|e| CliError::Invalid(e.to_string()))?;
    create_dir(out)?;
    write_json(&out.join("eval.json"), &report, run)?;
    print_json(&report);
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig, CliError> {
    match path {
        Some(p) => TrainConfig::from_toml(&fs::read_to_string(p).map_err(CliError::io(p))?).map_err(|e| CliError::Config(e.to_string())),
        None => Ok(TrainConfig::toy()),
    }
}

fn lvm_scorer(endpoint: Option<&String>, cfg: &TrainConfig) -> Result<LvmScorer<prefgen::lvm::UreqTransport>, CliError> {
    let mut lvm = LvmConfig::default();
    if let Some(e) = endpoint {
        lvm.endpoint = e.clone();
    }
    let client = LvmClient::from_env(lvm).map_err(|e| CliError::from(prefgen::PrefError::Lvm(e)))?;
    Ok(LvmScorer { client, template: Template::grading(), resolution: cfg.oracle.resolution, fallback: None })
}

fn synth_records(n: usize, seed: u64) -> Vec<SlRecord> {
    synth::dataset(n, seed)
}

fn pairs(cli: &Cli, args: &PairsArgs, run: &mut RunRecord) -> CliResult {
    let mut cfg = load_config(args.config.as_deref())?;
    let lvm = match args.scorer {
        ScorerKind::Lvm => Some(lvm_scorer(args.lvm_endpoint.as_ref(), &cfg)?),
        ScorerKind::Oracle => None,
    };
    let seed = cli.global.seed_or(Some(cfg.seed));
    cfg.seed = seed;
    cfg.sampling.seed = seed;
    if let Some(k) = args.k {
        cfg.sampling.k = k;
    }
    run.seed = seed;
    run.set_config(&json!({"train_config": cfg, "checkpoint": args.checkpoint, "name": args.name, "prompts": args.prompts, "synth": args.synth, "scorer": format!("{:?}", args.scorer)}));

    let records = match (&args.prompts, args.synth) {
        (Some(p), _) => read_records(p)?,
        (None, Some(n)) => synth_records(n, seed),
        (None, None) => return Err(CliError::Config("pass --prompts FILE or --synth N".into())),
    };
    let items: Vec<PromptItem> = records.iter().map(|r| PromptItem { text: r.text.clone(), reference: Some(r.sequence.clone()) }).collect();
    let (model, _) = checkpoint::load(&args.checkpoint, &args.name).map_err(|e| match e {
        TrainError::Io(source) => CliError::Io { path: args.checkpoint.join(&args.name), source },
        other => CliError::Invalid(other.to_string()),
    })?;
    let vocab = Vocabulary::standard();
    let policy = Decoder { model: &model, vocab: &vocab };
    let output: PipelineOutput = match &lvm {
        Some(s) => run_pipeline(&policy, &items, &cfg, s)?,
        None => run_pipeline(&policy, &items, &cfg, &OracleScorer { cfg: cfg.oracle.clone() })?,
    };
    for p in &output.pairs {
        check_pair(p, cfg.pairing.margin).map_err(|e| CliError::Invalid(format!("pair for {:?}: {e}", p.prompt)))?;
    }
    let out = &cli.global.out;
    create_dir(out)?;
    let path = out.join("pairs.jsonl");
    let f = File::create(&path).map_err(CliError::io(&path))?;
    let mut w = BufWriter::new(f);
    write_jsonl(&mut w, &output.pairs).and_then(|_| w.flush()).map_err(CliError::io(&path))?;
    run.outputs.push(path);
    let stats = json!({"schema_version": SCHEMA_VERSION, "stats": output.stats});
    write_json(&out.join("pairs_stats.json"), &stats, run)?;
    print_json(&stats);
    Ok(())
}

fn run_pipeline(policy: &Decoder, items: &[PromptItem], cfg: &TrainConfig, scorer: &impl Scorer) -> Result<PipelineOutput, CliError> {
    Ok(generate_pairs(policy, items, &cfg.sampling, scorer, &cfg.pairing)?)
}

fn train(cli: &Cli, args: &TrainArgs, run: &mut RunRecord) -> CliResult {
    let mut cfg = load_config(args.config.as_deref())?;
    if args.fast {
        cfg = cfg.fast();
    }
    if let Some(r) = args.rounds {
        cfg.rounds = r;
    }
    let seed = cli.global.seed_or(Some(cfg.seed));
    cfg.seed = seed;
    cfg.sampling.seed = seed;
    cfg.check().map_err(|e| CliError::Config(e.to_string()))?;
    run.seed = seed;
    run.set_config(&json!({"train_config": cfg, "data": args.data, "heldout": args.heldout, "scorer": format!("{:?}", args.scorer)}));

    let train_data = match &args.data {
        Some(p) => read_records(p)?,
        None => synth_records(cfg.sl_examples, seed),
    };
    let heldout = match &args.heldout {
        Some(p) => read_records(p)?,
        None => synth_records(cfg.probe_prompts.max(1), seed.wrapping_add(1)),
    };
    let out = cli.global.out.clone();
    create_dir(&out)?;
    let result = match args.scorer {
        ScorerKind::Lvm => {
            let scorer = lvm_scorer(args.lvm_endpoint.as_ref(), &cfg)?;
            train_with(cfg, &train_data, &heldout, &scorer, &out, run)
        }
        ScorerKind::Oracle => {
            let scorer = OracleScorer { cfg: cfg.oracle.clone() };
            train_with(cfg, &train_data, &heldout, &scorer, &out, run)
        }
    };
    result
}

fn write_log(path: &Path, records: &[trainkit::LogRecord], run: &mut RunRecord) -> CliResult {
    let f = File::create(path).map_err(CliError::io(path))?;
    let mut w = BufWriter::new(f);
    write_jsonl(&mut w, records).and_then(|_| w.flush()).map_err(CliError::io(path))?;
    run.outputs.push(path.to_path_buf());
    Ok(())
}

fn train_with<S: Scorer>(cfg: TrainConfig, data: &[SlRecord], heldout: &[SlRecord], scorer: &S, out: &Path, run: &mut RunRecord) -> CliResult {
    let ckpt: PathBuf = out.join("checkpoints");
    let mut trainer = Trainer::new(cfg, data, heldout, scorer)?.with_output(ckpt.clone());
    let log_path = out.join("training_log.jsonl");
    let result = trainer.run();
    match result {
        Ok(()) => {
            write_log(&log_path, trainer.log(), run)?;
            for (i, pairs) in trainer.round_pairs().iter().enumerate() {
                let path = out.join(format!("pairs_round_{}.jsonl", i + 1));
                let mut w = BufWriter::new(File::create(&path).map_err(CliError::io(&path))?);
                write_jsonl(&mut w, pairs).and_then(|_| w.flush()).map_err(CliError::io(&path))?;
                run.outputs.push(path);
            }
            run.outputs.push(ckpt);
            let summary = json!({
                "schema_version": SCHEMA_VERSION,
                "phases": trainer.phases(),
                "checkpoints": trainer.checkpoints().iter().map(|c| json!({"name": c.name, "sha256": c.params_sha256, "metrics": c.metrics})).collect::<Vec<_>>(),
                "pair_stats": trainer.pair_stats(),
            });
            write_json(&out.join("summary.json"), &summary, run)?;
            print_json(&summary);
            Ok(())
        }
        Err(TrainError::Collapse { round, ir, limit, log }) => {
            write_log(&log_path, &log, run)?;
            Err(CliError::Invalid(format!("training collapsed in round {round}: probe IR {ir:.1}% > {limit}%")))
        }
        Err(e) => {
            write_log(&log_path, trainer.log(), run)?;
            Err(e.into())
        }
    }
}

fn decode_arrays(file: &Path, cfg: DecodeConfig) -> CliResult {
    let text = fs::read_to_string(file).map_err(CliError::io(file))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
    let items = match value {
        serde_json::Value::Array(v) => v,
        other => vec![other],
    };
    let mut failed = 0;
    for item in items {
        let name = item.get("name").cloned();
        let arrays: CommandArrays = serde_json::from_value(item).map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
        let line = match arrays.decode(cfg).and_then(|m| serialize(&m)) {
            Ok(seq) => json!({"name": name, "sequence": seq}),
            Err(e) => {
                failed += 1;
                json!({"name": name, "error": e.code(), "message": e.to_string()})
            }
        };
        println!("{line}");
    }
    if failed > 0 {
        return Err(CliError::Invalid(format!("{failed} record(s) failed to decode")));
    }
    Ok(())
}
