//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde_json::json;

use graphite_core::corpus::{encode, load_jsonl, RawSample};
use graphite_core::inference::{self, ExplainTrace, ScratchSpace};
use graphite_core::metrics::{evaluate, truth_sets};
use graphite_core::model::{build_model, GraphiteModel};
use graphite_core::oracle::oracle_predict;
use graphite_core::synth::{generate, SynthConfig};

use crate::cli::{
    BenchArgs, EvalArgs, ExplainArgs, InferFlags, PredictArgs, ServeArgs, SynthArgs, TrainArgs,
};
use crate::config;

fn load_samples(path: &Path) -> anyhow::Result<Vec<RawSample>> {
    load_jsonl(path).with_context(|| format!("loading {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<GraphiteModel> {
    GraphiteModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn output_writer(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

pub fn train(args: TrainArgs) -> anyhow::Result<()> {
    let samples = load_samples(&args.input)?;
    let started = Instant::now();
    let model = build_model(encode(&samples)?)?;
    let elapsed = started.elapsed().as_secs_f64();
    model
        .save(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    let size = std::fs::metadata(&args.output)?.len();
    println!(
        "trained {} instances, {} labels, {} words in {:.2}s -> {} ({} bytes)",
        model.num_instances(),
        model.num_labels(),
        model.num_words(),
        elapsed,
        args.output.display(),
        size
    );
    Ok(())
}

pub fn predict(args: PredictArgs) -> anyhow::Result<()> {
    let resolved = config::resolve(&args.infer)?;
    let samples = load_samples(&args.input)?;
    let titles: Vec<String> = samples.into_iter().map(|s| s.title).collect();

    let predictions: Vec<Vec<String>> = if args.oracle {
        let train = load_samples(args.train.as_deref().expect("clap enforces --train"))?;
        let dataset = encode(&train)?;
        titles
            .iter()
            .map(|t| oracle_predict(&dataset, t, resolved.config.k, resolved.config.strategy))
            .collect()
    } else {
        let model = load_model(args.model.as_deref().expect("clap enforces --model"))?;
        inference::predict_batch(&model, &titles, &resolved.config, resolved.workers)
    };

    let mut out = output_writer(args.output.as_deref())?;
    for (title, preds) in titles.iter().zip(&predictions) {
        let line = json!({ "title": title, "predictions": preds });
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn trace_json(trace: &ExplainTrace) -> serde_json::Value {
    let instances: Vec<serde_json::Value> = trace
        .instances
        .iter()
        .map(|r| json!([r.instance, r.similarity]))
        .collect();
    let provenance: serde_json::Map<String, serde_json::Value> = trace
        .provenance
        .iter()
        .map(|(label, ids)| (label.clone(), json!(ids)))
        .collect();
    json!({ "instances": instances, "provenance": provenance })
}

pub fn explain(args: ExplainArgs) -> anyhow::Result<()> {
    let resolved = config::resolve(&args.infer)?;
    let model = load_model(&args.model)?;
    let samples = load_samples(&args.input)?;
    let mut scratch = ScratchSpace::for_model(&model);
    let mut out = output_writer(args.output.as_deref())?;
    for sample in &samples {
        let (preds, trace) =
            inference::explain_with(&model, &mut scratch, &sample.title, &resolved.config);
        let line = json!({
            "title": sample.title,
            "predictions": preds,
            "trace": trace_json(&trace),
        });
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn eval(args: EvalArgs) -> anyhow::Result<()> {
    let flags = InferFlags {
        k: None,
        strategy: args.strategy.clone(),
        budget: args.budget,
        workers: args.workers,
        config: args.config.clone(),
    };
    let mut resolved = config::resolve(&flags)?;
    // Predict deep enough for every cutoff and for the AVP depth.
    let deepest = args.k.iter().copied().max().unwrap_or(1);
    resolved.config.k = deepest.max(graphite_core::metrics::AVP_TRUTH_CAP);

    let model = load_model(&args.model)?;
    let test = load_samples(&args.test)?;
    let titles: Vec<String> = test.iter().map(|s| s.title.clone()).collect();
    let preds =
        inference::predict_batch_ids(&model, &titles, &resolved.config, resolved.workers);
    let truths = truth_sets(&model, &test);
    let report = evaluate(&truths, &preds, &args.k)?;

    println!("{}", serde_json::to_string(&report)?);
    println!();
    println!("{:<12}{:>10}", "metric", "value");
    for (k, v) in &report.precision_at {
        println!("{:<12}{:>10.4}", format!("P@{k}"), v);
    }
    for (k, v) in &report.recall_at {
        println!("{:<12}{:>10.4}", format!("R@{k}"), v);
    }
    println!("{:<12}{:>10.4}", "AVP", report.avp);
    println!("{:<12}{:>10}", "samples", report.sample_count);
    Ok(())
}

pub fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let config = SynthConfig {
        train_n: args.train_n,
        test_n: args.test_n,
        valid_n: args.valid_n,
        label_n: args.label_n,
        title_len: args.title_len,
        labels_per: args.labels_per,
        seed: args.seed,
    };
    let data = generate(&config)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for (name, split) in [
        ("train.jsonl", &data.train),
        ("test.jsonl", &data.test),
        ("valid.jsonl", &data.valid),
    ] {
        let path = args.out_dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        for sample in split {
            let line = json!({ "title": sample.title, "keyphrases": sample.keyphrases });
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        println!("wrote {} samples -> {}", split.len(), path.display());
    }
    Ok(())
}

pub fn bench(args: BenchArgs) -> anyhow::Result<()> {
    let resolved = config::resolve(&args.infer)?;
    let train = load_samples(&args.input)?;

    let started = Instant::now();
    let model = build_model(encode(&train)?)?;
    let train_secs = started.elapsed().as_secs_f64();

    let tmp_dir;
    let model_path = match &args.model_out {
        Some(p) => p.clone(),
        None => {
            tmp_dir = tempdir()?;
            tmp_dir.join("bench-model.gx")
        }
    };
    model.save(&model_path)?;
    let size = std::fs::metadata(&model_path)?.len();

    let titles: Vec<String> = match &args.test {
        Some(path) => load_samples(path)?.into_iter().map(|s| s.title).collect(),
        None => train.iter().map(|s| s.title.clone()).collect(),
    };
    let started = Instant::now();
    let predictions =
        inference::predict_batch(&model, &titles, &resolved.config, resolved.workers);
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    let per_sample_ms = total_ms / titles.len().max(1) as f64;

    println!("training_time_s: {train_secs:.3}");
    println!("model_size_bytes: {size}");
    println!(
        "inference_ms_per_sample: {per_sample_ms:.4} ({} titles, {} workers, k {})",
        titles.len(),
        resolved.workers,
        resolved.config.k
    );
    // Keep the optimizer honest about the batch.
    let produced: usize = predictions.iter().map(Vec::len).sum();
    println!("predictions_total: {produced}");
    if args.model_out.is_none() {
        std::fs::remove_file(&model_path).ok();
    }
    Ok(())
}

fn tempdir() -> anyhow::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("graphite-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let resolved = config::resolve(&args.infer)?;
    let model = load_model(&args.model)?;
    crate::serve::run(model, &args.bind, resolved.workers)
}
