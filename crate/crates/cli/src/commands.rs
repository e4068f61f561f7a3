use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use jamdet::config::RunConfig;
use jamdet::io::{read_dataset, write_dataset, DATASET_MAGIC};
use jamdet::manifest::{RunManifest, Timings};
use jamdet::nn::{Checkpoint, ModelKind, CHECKPOINT_MAGIC};
use jamdet::pipeline::{
    evaluate, generate, latent_sweep, sjr_sweep, train_config_for, train_dataset, write_sweep_csv, Detector, SweepAxis,
    SweepRow,
};
use jamdet::sim::{Dataset, DatasetMode, Label};
use jamdet::vae::{write_loss_csv, write_scores_csv, EpochRecord};
use jamdet::{Error, Result};

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Writes `<stem>.manifest.json` and `<stem>.timings.json` next to `primary`.
fn save_records(primary: &Path, manifest: &RunManifest, timings: &Timings) -> Result<()> {
    manifest.save(sibling(primary, ".manifest.json"))?;
    timings.save(sibling(primary, ".timings.json"))
}

fn progress(kind: ModelKind, total: usize) -> impl FnMut(&EpochRecord) {
    let every = (total / 10).max(1);
    move |r: &EpochRecord| {
        if r.epoch.is_multiple_of(every) || r.epoch == total {
            match r.validation_loss {
                Some(v) => eprintln!("{kind} epoch {}/{total}: train {:.5} validation {v:.5}", r.epoch, r.train_loss),
                None => eprintln!("{kind} epoch {}/{total}: train {:.5}", r.epoch, r.train_loss),
            }
        }
    }
}

fn train_observed(cfg: &RunConfig, kind: ModelKind, data: &Dataset, latent_dim: Option<usize>) -> Result<Detector> {
    let epochs = train_config_for(cfg, kind)?.epochs;
    jamdet::pipeline::train(cfg, kind, data, latent_dim, progress(kind, epochs))
}

fn check_compatible(cfg: &RunConfig, data: &Dataset) -> Result<()> {
    let expected = cfg.system().observation_len();
    if data.observation_len() != expected {
        return Err(Error::DimensionMismatch { expected, actual: data.observation_len() });
    }
    Ok(())
}

pub fn gen(
    cfg: &RunConfig,
    mode: DatasetMode,
    n: Option<usize>,
    seed: Option<u64>,
    sjr: Option<f64>,
    output: Option<PathBuf>,
) -> Result<()> {
    let e = &cfg.experiment;
    let (count, seed) = match mode {
        DatasetMode::Train if sjr.is_some() => {
            return Err(Error::InvalidConfig("--sjr only applies to test datasets".into()))
        }
        DatasetMode::Train => (n.unwrap_or(e.train_count), seed.unwrap_or(e.train_seed)),
        DatasetMode::Test => (n.unwrap_or(e.test_count), seed.unwrap_or(e.test_seed)),
    };
    let path = output.unwrap_or_else(|| {
        let name = match mode {
            DatasetMode::Train => format!("train_s{seed}.isac"),
            DatasetMode::Test => format!("test_sjr{}_s{seed}.isac", sjr.unwrap_or(cfg.jammer.sjr_db)),
        };
        cfg.paths.dataset_dir.join(name)
    });

    let start = Instant::now();
    let ds = generate(cfg, mode, count, seed, sjr)?;
    ensure_parent(&path)?;
    write_dataset(&path, &ds)?;
    let mut timings = Timings::default();
    timings.record("generate", start.elapsed());

    let mut manifest = RunManifest::new("gen", cfg);
    manifest.seed("dataset", seed).output(&path)?;
    save_records(&path, &manifest, &timings)?;

    let (h0, h1) = ds.label_counts();
    println!("{}: N={} K={} H0={h0} H1={h1}", path.display(), ds.len(), ds.system.num_subcarriers);
    Ok(())
}

pub fn train(
    cfg: &RunConfig,
    kind: ModelKind,
    dataset: &Path,
    latent_dim: Option<usize>,
    output: Option<PathBuf>,
) -> Result<()> {
    let data = read_dataset(dataset)?;
    check_compatible(cfg, &data)?;
    let path = output.unwrap_or_else(|| {
        let name = match latent_dim {
            Some(l) => format!("{kind}_L{l}.ckpt"),
            None => format!("{kind}.ckpt"),
        };
        cfg.paths.checkpoint_dir.join(name)
    });

    let start = Instant::now();
    let det = train_observed(cfg, kind, &data, latent_dim)?;
    let mut timings = Timings::default();
    timings.record("train", start.elapsed());

    ensure_parent(&path)?;
    det.to_checkpoint()?.save(&path)?;
    let loss = sibling(&path, "_loss.csv");
    write_loss_csv(&loss, &det.trace)?;

    let mut manifest = RunManifest::new("train", cfg);
    manifest.seed("model", det.train_config.seed).input(dataset)?.output(&path)?.output(&loss)?;
    save_records(&path, &manifest, &timings)?;

    let last = det.trace.last().map(|r| r.train_loss).unwrap_or(f64::NAN);
    println!("{}: {kind}, {} epochs, final train loss {last:.6}", path.display(), det.trace.len());
    Ok(())
}

pub fn eval(
    cfg: &RunConfig,
    checkpoint: &Path,
    dataset: &Path,
    calibration: &Path,
    pfa: Option<f64>,
    output: Option<PathBuf>,
) -> Result<()> {
    let det = Detector::from_checkpoint(&Checkpoint::load(checkpoint)?)?;
    let test = read_dataset(dataset)?;
    let cal_data = read_dataset(calibration)?;
    let e = &cfg.experiment;
    let pfa = pfa.unwrap_or(e.pfa[0]);

    let start = Instant::now();
    let cal = det.calibration_scores(&cal_data, e.score_seed)?;
    let ev = evaluate(&det, &cal, &test, pfa, e.null_method, e.score_seed)?;
    let mut timings = Timings::default();
    timings.record("eval", start.elapsed());

    let dir = output.unwrap_or_else(|| cfg.paths.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = format!("{}_{}", stem(checkpoint), stem(dataset));
    let scores = dir.join(format!("{name}_scores.csv"));
    let roc = dir.join(format!("{name}_roc.csv"));
    let report = dir.join(format!("{name}_report.toml"));
    write_scores_csv(&scores, &ev.scores, det.kind())?;
    ev.roc.write_csv(&roc)?;
    std::fs::write(&report, ev.point.to_text())?;

    let mut manifest = RunManifest::new("eval", cfg);
    manifest.seed("score", e.score_seed);
    manifest.input(checkpoint)?.input(dataset)?.input(calibration)?;
    manifest.output(&scores)?.output(&roc)?.output(&report)?;
    save_records(&dir.join(format!("{name}.eval")), &manifest, &timings)?;

    print!("{}", ev.point.to_text());
    Ok(())
}

fn parse_values<T: std::str::FromStr>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::InvalidConfig(format!("invalid axis value '{s}'"))))
        .collect()
}

pub fn sweep(
    mut cfg: RunConfig,
    axis: SweepAxis,
    values: Option<&str>,
    models: &[ModelKind],
    dataset: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<()> {
    if let Some(text) = values {
        match axis {
            SweepAxis::Sjr => cfg.experiment.sjr_db = parse_values(text)?,
            SweepAxis::LatentDim => cfg.experiment.latent_dims = parse_values(text)?,
        }
    }
    let empty = match axis {
        SweepAxis::Sjr => cfg.experiment.sjr_db.is_empty() || models.is_empty(),
        SweepAxis::LatentDim => cfg.experiment.latent_dims.is_empty(),
    };
    if empty {
        return Err(Error::InvalidConfig(format!("nothing to sweep on the {axis} axis")));
    }
    cfg.validate()?;

    let mut timings = Timings::default();
    let start = Instant::now();
    let data = match &dataset {
        Some(p) => read_dataset(p)?,
        None => train_dataset(&cfg)?,
    };
    check_compatible(&cfg, &data)?;
    timings.record("dataset", start.elapsed());

    let start = Instant::now();
    let mut checkpoints = Vec::new();
    let rows: Vec<SweepRow> = match axis {
        SweepAxis::Sjr => {
            let dets = models.iter().map(|&k| train_observed(&cfg, k, &data, None)).collect::<Result<Vec<_>>>()?;
            timings.record("train", start.elapsed());
            for d in &dets {
                checkpoints.push((format!("{}.ckpt", d.kind()), d.to_checkpoint()));
            }
            let start = Instant::now();
            let rows = sjr_sweep(&cfg, &dets.iter().collect::<Vec<_>>(), &data)?;
            timings.record("evaluate", start.elapsed());
            rows
        }
        SweepAxis::LatentDim => {
            let rows = latent_sweep(&cfg, &data, |d| {
                checkpoints.push((format!("vae_L{}.ckpt", d.latent_dim().unwrap_or(0)), d.to_checkpoint()));
            })?;
            timings.record("train_and_evaluate", start.elapsed());
            rows
        }
    };

    let path = output.unwrap_or_else(|| cfg.paths.output_dir.join(format!("sweep_{axis}.csv")));
    ensure_parent(&path)?;
    write_sweep_csv(&path, &rows)?;

    let mut manifest = RunManifest::new(format!("sweep --axis {axis}"), &cfg);
    manifest.seed("dataset", cfg.experiment.train_seed).seed("test", cfg.experiment.test_seed);
    manifest.seed("score", cfg.experiment.score_seed);
    if let Some(p) = &dataset {
        manifest.input(p)?;
    }
    manifest.output(&path)?;
    std::fs::create_dir_all(&cfg.paths.checkpoint_dir)?;
    for (name, ckpt) in checkpoints {
        let ckpt_path = cfg.paths.checkpoint_dir.join(name);
        ckpt?.save(&ckpt_path)?;
        manifest.output(&ckpt_path)?;
    }
    save_records(&path, &manifest, &timings)?;

    println!("{:<6} {:>8} {:>6} {:>7} {:>7} {:>7}", "model", axis.to_string(), "sjr", "pd", "pfa", "auc");
    for r in &rows {
        println!(
            "{:<6} {:>8} {:>6} {:>7.4} {:>7.4} {:>7.4}",
            r.model_kind.to_string(),
            r.axis_value,
            r.sjr_db,
            r.pd,
            r.pfa,
            r.auc
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn inspect_dataset(path: &Path) -> Result<()> {
    let ds = read_dataset(path)?;
    let (h0, h1) = ds.label_counts();
    let s = &ds.system;
    println!("dataset {}", path.display());
    println!("  observations  {} (H0 {h0}, H1 {h1})", ds.len());
    println!("  entries       {} (K = {})", ds.observation_len(), s.num_subcarriers);
    println!("  arrays        N_T = {}, N_R = {}", s.num_tx_antennas, s.num_rx_antennas);
    println!("  carrier       {:.3} GHz, spacing {:.1} kHz", s.carrier_freq_hz / 1e9, s.subcarrier_spacing_hz / 1e3);
    println!("  seed          {}", ds.seed);
    if let Some(j) = &ds.jammer {
        println!("  jammer        SJR {} dB, {} antennas, range {} m", j.sjr_db, j.num_jam_antennas, j.range_m);
    }
    for label in [Label::H0, Label::H1] {
        let power: Vec<f64> =
            ds.observations.iter().filter(|o| o.label == label).map(|o| o.g.iter().map(|v| v * v).sum()).collect();
        if !power.is_empty() {
            let mean = power.iter().sum::<f64>() / power.len() as f64;
            println!("  mean |g|^2 {label:?}  {mean:.4e}");
        }
    }
    Ok(())
}

fn inspect_checkpoint(path: &Path) -> Result<()> {
    let ckpt = Checkpoint::load(path)?;
    println!("checkpoint {}", path.display());
    println!("  kind          {}", ckpt.kind);
    println!("  epochs        {}", ckpt.epochs_completed);
    println!("  seed          {}", ckpt.seed);
    for (name, entry) in ["encoder", "decoder"].iter().zip(&ckpt.entries) {
        let net = &entry.network;
        let widths: Vec<String> = net.trunk().iter().map(|l| l.outputs().to_string()).collect();
        println!(
            "  {name:<13} {} -> [{}] -> heads {:?}, {} parameters",
            net.input_dim(),
            widths.join(", "),
            net.head_dims(),
            net.param_count()
        );
    }
    Ok(())
}

pub fn inspect(path: &Path) -> Result<()> {
    let mut magic = [0u8; 8];
    std::fs::File::open(path)?.read_exact(&mut magic)?;
    if &magic == DATASET_MAGIC {
        inspect_dataset(path)
    } else if &magic == CHECKPOINT_MAGIC {
        inspect_checkpoint(path)
    } else {
        Err(Error::Format(format!("{} is neither a dataset nor a checkpoint", path.display())))
    }
}
