use std::fmt::Write as _;
use std::path::Path;

use ihas_core::data::{generate_synthetic, DatasetSchema, Encoder, RawTable, SynthSpec};
use ihas_core::numeric::RngStream;
use ihas_core::pipeline::{
    cluster_stage, evaluate, load_checkpoint, predict, pretrain_stage, retrain_stage, save_checkpoint,
    search_from_pretrained, EncodedDataset, PipelineConfig, PipelineState, Stage,
};
use ihas_core::{Error, Result};

use crate::config::{parse_config, parse_config_over, render_config};
use crate::rundir::{RunDir, Session};
use crate::{Command, Common};

/// Run one subcommand against its run directory.
pub fn dispatch(cmd: &Command) -> Result<()> {
    let common = cmd.common();
    let mut s = Session::open(RunDir::create(&common.out)?, cmd.name())?;
    match cmd {
        Command::Ingest(c) => {
            let config = fresh_config(&mut s, c)?;
            ingest(&mut s, c, &config)?;
        }
        Command::Synth { common: c, samples, spec } => synth(&mut s, c, *samples, spec.as_deref())?,
        Command::Search(c) => {
            let config = fresh_config(&mut s, c)?;
            let ds = dataset(&mut s, c, &config)?;
            search(&mut s, &ds, &config)?;
        }
        Command::Cluster(c) => {
            let ds = dataset(&mut s, c, &PipelineConfig::default())?;
            let state = resume(&mut s, c, &ds, Stage::Searched)?;
            cluster(&mut s, &ds, state)?;
        }
        Command::Retrain(c) => {
            let ds = dataset(&mut s, c, &PipelineConfig::default())?;
            let state = resume(&mut s, c, &ds, Stage::Clustered)?;
            retrain(&mut s, &ds, state)?;
        }
        Command::RunAll(c) => {
            let config = fresh_config(&mut s, c)?;
            let ds = ingest(&mut s, c, &config)?;
            let state = search(&mut s, &ds, &config)?;
            let state = cluster(&mut s, &ds, state)?;
            let state = retrain(&mut s, &ds, state)?;
            print!("{}", eval(&mut s, &ds, &state)?);
        }
        Command::Eval(c) => {
            let ds = dataset(&mut s, c, &PipelineConfig::default())?;
            let state = latest(&s, &ds, Stage::Searched, "eval")?;
            print!("{}", eval(&mut s, &ds, &state)?);
        }
        Command::Predict(c) => {
            let ds = dataset_only(&s)?;
            let state = latest(&s, &ds, Stage::Retrained, "predict")?;
            let data = c
                .data
                .as_deref()
                .ok_or_else(|| Error::config("data", "predict needs --data with rows to score"))?;
            s.input(data)?;
            let out = score_rows(&ds, &state, data)?;
            std::fs::write(s.dir.path("predictions.csv"), out)?;
            s.output("predictions.csv")?;
            println!("{}", s.dir.path("predictions.csv").display());
        }
        Command::InspectDims(_) => {
            let ds = dataset_only(&s)?;
            let state = latest(&s, &ds, Stage::Clustered, "inspect-dims")?;
            print!("{}", dims_table(&ds.schema, &state)?);
        }
    }
    s.finish()
}

fn fresh_config(s: &mut Session, c: &Common) -> Result<PipelineConfig> {
    let config = parse_config(c.config.as_deref(), &c.overrides())?;
    if let Some(p) = &c.config {
        s.input(p)?;
    }
    s.config(&config)?;
    std::fs::write(s.dir.path("config.toml"), render_config(&config))?;
    s.output("config.toml")?;
    Ok(config)
}

/// Encode `--data` into the run directory's dataset, or load the existing one.
fn dataset(s: &mut Session, c: &Common, config: &PipelineConfig) -> Result<EncodedDataset> {
    if c.data.is_some() {
        ingest(s, c, config)
    } else {
        dataset_only(s)
    }
}

fn dataset_only(s: &Session) -> Result<EncodedDataset> {
    let path = s.dir.dataset_path();
    if !path.is_file() {
        return Err(Error::StagePrecondition(format!(
            "no encoded dataset in {}; run `ingest` or pass --data",
            s.dir.root().display()
        )));
    }
    EncodedDataset::load(&path)
}

fn ingest(s: &mut Session, c: &Common, config: &PipelineConfig) -> Result<EncodedDataset> {
    let data = c.data.as_deref().ok_or_else(|| Error::config("data", "--data is required"))?;
    if !data.is_file() {
        return Err(Error::config("data", format!("{} does not exist", data.display())));
    }
    s.input(data)?;
    let ds = if data.extension().is_some_and(|e| e == "json") {
        EncodedDataset::load(data)?
    } else {
        let schema_path = c
            .schema
            .as_deref()
            .ok_or_else(|| Error::config("schema", "--schema is required for CSV input"))?;
        s.input(schema_path)?;
        let schema = DatasetSchema::load(schema_path)?;
        EncodedDataset::from_table(&RawTable::read_csv(data)?, &schema, config.min_freq, config.seed)?
    };
    ds.save(&s.dir.dataset_path())?;
    s.output("dataset.json")?;
    s.dir.log(&serde_json::json!({
        "event": "ingest",
        "train": ds.train.len(),
        "val": ds.val.len(),
        "test": ds.test.len(),
        "vocab_sizes": ds.vocab_sizes(),
    }))?;
    Ok(ds)
}

fn synth(s: &mut Session, c: &Common, samples: usize, spec: Option<&Path>) -> Result<()> {
    let config = fresh_config(s, c)?;
    let spec = match spec {
        Some(p) => {
            s.input(p)?;
            let mut spec: SynthSpec = toml::from_str(&std::fs::read_to_string(p)?)
                .map_err(|e| Error::config("spec", e.to_string()))?;
            spec.num_samples = samples;
            spec
        }
        None => SynthSpec::two_group_default(samples),
    };
    let data = generate_synthetic(&spec, &mut RngStream::new(config.seed))?;
    data.write_csv(&s.dir.path("data.csv"))?;
    std::fs::write(s.dir.path("schema.toml"), data.schema().to_toml_string())?;
    let truth = toml::to_string(&data.truth).map_err(|e| Error::Pipeline(e.to_string()))?;
    std::fs::write(s.dir.path("truth.toml"), truth)?;
    let spec_text = toml::to_string(&spec).map_err(|e| Error::Pipeline(e.to_string()))?;
    std::fs::write(s.dir.path("synth.toml"), spec_text)?;
    for name in ["data.csv", "schema.toml", "truth.toml", "synth.toml"] {
        s.output(name)?;
    }
    Ok(())
}

fn checkpoint(s: &mut Session, ds: &EncodedDataset, state: &PipelineState, from: usize) -> Result<()> {
    s.dir.log_events(&state.log[from.min(state.log.len())..])?;
    let name = RunDir::checkpoint_name(state.stage);
    save_checkpoint(&s.dir.path(&name), state, &ds.schema.hash())?;
    s.output(&name)
}

fn search(s: &mut Session, ds: &EncodedDataset, config: &PipelineConfig) -> Result<PipelineState> {
    let pre = pretrain_stage(&ds.train, &ds.val, &ds.vocab_sizes(), config)?;
    checkpoint(s, ds, &pre, 0)?;
    let n = pre.log.len();
    let searched = search_from_pretrained(pre, &ds.train, &ds.val)?;
    checkpoint(s, ds, &searched, n)?;
    Ok(searched)
}

fn cluster(s: &mut Session, ds: &EncodedDataset, state: PipelineState) -> Result<PipelineState> {
    let n = state.log.len();
    let clustered = cluster_stage(state, &ds.train)?;
    checkpoint(s, ds, &clustered, n)?;
    Ok(clustered)
}

fn retrain(s: &mut Session, ds: &EncodedDataset, state: PipelineState) -> Result<PipelineState> {
    let n = state.log.len();
    let retrained = retrain_stage(state, &ds.train, &ds.val)?;
    checkpoint(s, ds, &retrained, n)?;
    Ok(retrained)
}

fn load_stage(s: &Session, ds: &EncodedDataset, stage: Stage) -> Result<PipelineState> {
    let ckpt = load_checkpoint(&s.dir.checkpoint_path(stage), Some(&ds.schema.hash()))?;
    Ok(ckpt.state)
}

/// The checkpoint of exactly `stage`, with config re-resolved on top of its stored config.
fn resume(s: &mut Session, c: &Common, ds: &EncodedDataset, stage: Stage) -> Result<PipelineState> {
    if !s.dir.checkpoint_path(stage).is_file() {
        return Err(Error::StagePrecondition(format!("no {} checkpoint in {}", stage, s.dir.root().display())));
    }
    let mut state = load_stage(s, ds, stage)?;
    state.config = parse_config_over(state.config.clone(), c.config.as_deref(), &c.overrides())?;
    if let Some(p) = &c.config {
        s.input(p)?;
    }
    s.config(&state.config)?;
    Ok(state)
}

/// The furthest checkpoint on disk, which must be at least `needed`.
fn latest(s: &Session, ds: &EncodedDataset, needed: Stage, what: &str) -> Result<PipelineState> {
    match s.dir.latest_checkpoint() {
        Some(stage) if stage >= needed => load_stage(s, ds, stage),
        found => Err(Error::StagePrecondition(format!(
            "`{what}` needs a {needed} checkpoint, found {}",
            found.map_or("none".to_string(), |st| st.to_string())
        ))),
    }
}

fn eval(s: &mut Session, ds: &EncodedDataset, state: &PipelineState) -> Result<String> {
    let report = evaluate(state, &ds.test)?;
    for w in &report.warnings {
        s.dir.log(&serde_json::json!({ "event": "warning", "message": w }))?;
    }
    s.dir.log(&serde_json::json!({ "event": "report", "report": report }))?;
    let text = report.to_text();
    std::fs::write(s.dir.path("report.txt"), &text)?;
    s.output("report.txt")?;
    if !report.dims.is_empty() {
        let names: Vec<String> = ds.schema.fields.iter().map(|f| f.name.clone()).collect();
        std::fs::write(s.dir.path("dims.csv"), report.dims_csv(&names))?;
        s.output("dims.csv")?;
    }
    Ok(text)
}

/// Score every row of a CSV; a missing label column is treated as all zeros.
fn score_rows(ds: &EncodedDataset, state: &PipelineState, data: &Path) -> Result<String> {
    let mut table = RawTable::read_csv(data)?;
    if !table.header.contains(&ds.schema.label) {
        table.header.push(ds.schema.label.clone());
        for row in &mut table.rows {
            row.push("0".into());
        }
    }
    let enc = Encoder::new(&ds.schema, &ds.vocab, &table.header)?;
    let mut out = String::from("row,cluster,probability\n");
    for (i, row) in table.rows.iter().enumerate() {
        let sample = enc.encode(row)?;
        let cluster = ihas_core::pipeline::route(state, &sample)?;
        writeln!(out, "{i},{cluster},{:.6}", predict(state, &sample)?).expect("string write");
    }
    Ok(out)
}

/// Fixed-width table of kept widths: one row per cluster, one column per field.
pub fn dims_table(schema: &DatasetSchema, state: &PipelineState) -> Result<String> {
    let spec = state
        .spec
        .as_ref()
        .ok_or_else(|| Error::StagePrecondition("state has no cluster dimensions".into()))?;
    let names: Vec<&str> = schema.fields.iter().map(|f| f.name.as_str()).collect();
    let w = names.iter().map(|n| n.len()).max().unwrap_or(0).max(3);
    let mut out = format!("{:<8}{:>8}", "cluster", "size");
    for n in &names {
        write!(out, " {n:>w$}").expect("string write");
    }
    writeln!(out, " {:>w$}", "sum").expect("string write");
    for (c, dims) in spec.clusters.iter().enumerate() {
        write!(out, "{c:<8}{:>8}", dims.size).expect("string write");
        for d in &dims.widths {
            write!(out, " {d:>w$}").expect("string write");
        }
        writeln!(out, " {:>w$}", dims.widths.iter().sum::<usize>()).expect("string write");
    }
    Ok(out)
}
