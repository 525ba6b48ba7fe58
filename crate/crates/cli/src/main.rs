mod args;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde_json::json;
use tmuq_core::bits::Literals;
use tmuq_core::harness::archive::{Encoder, Model, ModelArchive};
use tmuq_core::harness::cifar::{self, parse_records};
use tmuq_core::harness::config::{Dataset, ExperimentConfig};
use tmuq_core::harness::experiments::{self, run_cpt, run_image, run_moons, run_single_pattern};
use tmuq_core::uncertainty::{probability_score, report, report_image, PredictionReport};

use args::{Cli, Command, Common, ImageArgs, MoonsArgs};

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::SinglePattern { common, copies, levels, window, label_noise } => {
            let mut cfg = resolve("single-pattern", &common)?;
            if let Dataset::SinglePattern { copies: c, levels: l, window: w, label_noise: n } = &mut cfg.dataset {
                set(c, copies);
                set(l, levels);
                set(w, window);
                set(n, label_noise.map(Into::into));
            }
            let runs = run_single_pattern(&cfg)?;
            for r in &runs {
                println!("p = {:.2}  averaged score = {:.4}", r.level, r.averaged_score);
            }
            done(&cfg);
        }
        Command::Cpt { common, copies, specificities, window, label_noise } => {
            let mut cfg = resolve("cpt", &common)?;
            if let Dataset::Cpt { copies: c, specificities: s, window: w, label_noise: n } = &mut cfg.dataset {
                set(c, copies);
                set(s, specificities);
                set(w, window);
                set(n, label_noise.map(Into::into));
            }
            for r in run_cpt(&cfg)? {
                let scores: Vec<String> = r.averaged_scores.iter().map(|v| format!("{v:.3}")).collect();
                println!(
                    "s = {}  spearman = {:.3}  unique clauses = {}  scores = [{}]",
                    r.specificity,
                    r.spearman,
                    r.unique_clauses,
                    scores.join(", ")
                );
            }
            done(&cfg);
        }
        Command::Moons { common, moons, save_model } => {
            let mut cfg = resolve("moons", &common)?;
            apply_moons(&mut cfg, moons);
            let out = run_moons(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&out.metrics)?);
            if let Some(path) = save_model {
                save(&path, Model::Binary(out.tm), Encoder::Thermometer(out.encoder), &cfg)?;
            }
            done(&cfg);
        }
        Command::Image { common, image, save_model } => {
            let mut cfg = resolve("image", &common)?;
            apply_image(&mut cfg, image);
            let out = image_run(&cfg)?;
            if let Some(path) = save_model {
                save(&path, Model::Convolutional(out.model), Encoder::Image(out.encoder), &cfg)?;
            }
            done(&cfg);
        }
        Command::Save { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            match cfg.dataset {
                Dataset::Moons { .. } => {
                    let o = run_moons(&cfg)?;
                    save(&out, Model::Binary(o.tm), Encoder::Thermometer(o.encoder), &cfg)?;
                }
                Dataset::Image { .. } => {
                    let o = image_run(&cfg)?;
                    save(&out, Model::Convolutional(o.model), Encoder::Image(o.encoder), &cfg)?;
                }
                _ => bail!("only moons and image runs produce a single model to save"),
            }
        }
        Command::Load { archive } => {
            let a = ModelArchive::load(&archive)?;
            println!("{}", serde_json::to_string_pretty(&describe(&a))?);
        }
        Command::Predict { archive, inputs, cifar_batch, limit } => {
            let a = ModelArchive::load(&archive)?;
            predict(&a, &inputs, cifar_batch.as_deref(), limit)?;
        }
    }
    Ok(())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn resolve(kind: &str, c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_kind(kind)?,
    };
    if cfg.dataset.kind() != kind {
        bail!("config describes a {} run, not {kind}", cfg.dataset.kind());
    }
    set(&mut cfg.seed, c.seed);
    set(&mut cfg.epochs, c.epochs);
    set(&mut cfg.params.target, c.target);
    set(&mut cfg.params.specificity, c.specificity);
    set(&mut cfg.params.num_clauses, c.clauses);
    set(&mut cfg.params.states_per_action, c.states);
    set(&mut cfg.params.boost_true_positive, c.boost);
    set(&mut cfg.memory_cap_bytes, c.memory_cap);
    if c.literal_budget.is_some() {
        cfg.params.literal_budget = c.literal_budget;
    }
    if c.output_dir.is_some() {
        cfg.output_dir = c.output_dir.clone();
    }
    if cfg.output_dir.is_none() {
        cfg.output_dir = Some(PathBuf::from("results").join(kind));
    }
    Ok(cfg)
}

fn apply_moons(cfg: &mut ExperimentConfig, a: MoonsArgs) {
    if let Dataset::Moons { samples, test_samples, noise_sd, bins, boundary_bit, mesh_steps } = &mut cfg.dataset {
        set(samples, a.samples);
        set(test_samples, a.test_samples);
        set(noise_sd, a.noise);
        set(bins, a.bins);
        set(boundary_bit, a.boundary_bit);
        set(mesh_steps, a.mesh_steps);
    }
}

fn apply_image(cfg: &mut ExperimentConfig, a: ImageArgs) {
    if let Dataset::Image {
        data_dir,
        classes,
        train_per_class,
        test_per_class,
        resolution,
        patch,
        position_literals,
    } = &mut cfg.dataset
    {
        set(data_dir, a.data_dir);
        set(classes, a.classes);
        if a.train_per_class.is_some() {
            *train_per_class = a.train_per_class;
        }
        if a.test_per_class.is_some() {
            *test_per_class = a.test_per_class;
        }
        set(resolution, a.resolution);
        if let Some(p) = a.patch {
            *patch = [p[0], p[1]];
        }
        set(position_literals, a.position_literals);
    }
}

fn image_run(cfg: &ExperimentConfig) -> Result<experiments::ImageOutcome> {
    let out = run_image(cfg, |epoch, secs| eprintln!("epoch {epoch}/{} done after {secs:.1}s", cfg.epochs))
        .context("image run failed (is the CIFAR-10 binary batch directory set?)")?;
    println!("{}", serde_json::to_string_pretty(&out.metrics)?);
    Ok(out)
}

fn done(cfg: &ExperimentConfig) {
    if let Some(dir) = &cfg.output_dir {
        eprintln!("results written to {}", dir.display());
    }
}

fn save(path: &Path, model: Model, encoder: Encoder, cfg: &ExperimentConfig) -> Result<()> {
    ModelArchive::new(model, encoder)
        .with_meta("experiment", &cfg.id)
        .with_meta("epochs", cfg.epochs)
        .with_meta("seed", cfg.seed)
        .save(path)?;
    eprintln!("model saved to {}", path.display());
    Ok(())
}

fn describe(a: &ModelArchive) -> serde_json::Value {
    let (kind, params, classes, features) = match &a.model {
        Model::Binary(tm) => ("binary", tm.params().clone(), vec![], tm.num_features()),
        Model::Multiclass(tm) => ("multiclass", tm.params().clone(), tm.classes().to_vec(), tm.num_features()),
        Model::Convolutional(tm) => (
            "convolutional",
            tm.inner().params().clone(),
            tm.inner().classes().to_vec(),
            tm.inner().num_features(),
        ),
    };
    let encoder = match &a.encoder {
        Encoder::None => json!(null),
        Encoder::Thermometer(e) => json!({ "kind": "thermometer", "features": e.num_features(), "bins": e.bins(), "boundary_bit": e.boundary_bit() }),
        Encoder::Image(e) => json!({ "kind": "image", "channels": e.channels, "resolution": e.resolution }),
    };
    json!({
        "kind": kind,
        "params": params,
        "classes": classes,
        "features": features,
        "encoder": encoder,
        "metadata": a.metadata,
    })
}

fn parse_input(encoder: &Encoder, raw: &str) -> Result<Vec<u8>> {
    let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
    match encoder {
        Encoder::Thermometer(e) => {
            let xs = fields.iter().map(|f| f.parse::<f64>()).collect::<Result<Vec<_>, _>>()?;
            Ok(e.encode(&xs)?)
        }
        _ => fields
            .iter()
            .map(|f| match *f {
                "0" => Ok(0),
                "1" => Ok(1),
                other => bail!("expected a 0/1 bit, got `{other}`"),
            })
            .collect(),
    }
}

fn predict(a: &ModelArchive, inputs: &[String], batch: Option<&Path>, limit: usize) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &a.model {
        Model::Binary(tm) => {
            writeln!(out, "class_sum,score,pos_active,neg_active")?;
            for raw in inputs {
                let bits = parse_input(&a.encoder, raw)?;
                if bits.len() != tm.num_features() {
                    bail!("input encodes to {} bits, model expects {}", bits.len(), tm.num_features());
                }
                let lits = Literals::from_bits(&bits);
                let v = tm.clipped_sum(&lits);
                let (pos, neg) = tm.bank().active_counts(&lits);
                writeln!(out, "{v},{},{pos},{neg}", probability_score(v, tm.target())?.value())?;
            }
        }
        Model::Multiclass(tm) => {
            writeln!(out, "{}", PredictionReport::csv_header(tm.num_classes()).join(","))?;
            for raw in inputs {
                let r = report(tm, &parse_input(&a.encoder, raw)?)?;
                writeln!(out, "{}", r.csv_record().join(","))?;
            }
        }
        Model::Convolutional(tm) => {
            let Encoder::Image(enc) = &a.encoder else { bail!("image model archive lacks its image encoder") };
            let Some(path) = batch else { bail!("image models score records from --cifar-batch") };
            let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let mut header = vec!["label".to_string()];
            header.extend(PredictionReport::csv_header(tm.num_classes()));
            writeln!(out, "{}", header.join(","))?;
            for (label, pixels) in parse_records(&bytes)?.into_iter().take(limit) {
                let img = enc.encode_image(pixels, cifar::SIDE, cifar::SIDE)?;
                let r = report_image(tm, &img)?;
                writeln!(out, "{},{}", cifar::LABELS[usize::from(label)], r.csv_record().join(","))?;
            }
        }
    }
    Ok(())
}
