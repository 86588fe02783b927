use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use skelmotion_core::angles::extract_trajectory;
use skelmotion_core::control::{summarize, ExecutionMode};
use skelmotion_core::pipeline::export::{angle_csv, errors_csv, trace_csv};
use skelmotion_core::pipeline::fixtures::gen_fixtures;
use skelmotion_core::pipeline::store::load_annotations_file;
use skelmotion_core::pipeline::{
    detect_noisy_frames, execute_trajectory, load_recording, read_angle_csv, recording_id,
    run_and_export, ActionOutcome, DataDir, PipelineConfig, PipelineSettings,
};
use skelmotion_core::{map_trajectory, Side};

#[derive(Parser)]
#[command(name = "skelmotion", version, about = "Skeleton demonstrations to robot joint trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Pipeline configuration (TOML); shipped defaults when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn settings(&self) -> Result<PipelineSettings> {
        match &self.config {
            Some(path) => Ok(PipelineConfig::load(path)?.resolve()?),
            None => Ok(PipelineSettings::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract human joint angles from a recording into an angle CSV.
    Extract {
        recording: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// List frames with sudden joint jumps as JSON.
    DetectNoise {
        recording: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        /// Jump threshold in meters.
        #[arg(long)]
        threshold: Option<f64>,
        /// Frame lag used for differencing.
        #[arg(long)]
        window: Option<usize>,
        /// Compare the mean displacement over all joints instead of each joint.
        #[arg(long)]
        mean_displacement: bool,
    },
    /// Map the human rows of an angle CSV onto the robot ranges.
    Retarget {
        angles: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Execute the robot rows of an angle CSV; writes trace.csv, errors.csv
    /// and summary.json.
    Execute {
        angles: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value = "closed")]
        mode: ExecutionMode,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Full pipeline; each recording is exported to `<out>/<id>/`.
    Run {
        recordings: Vec<PathBuf>,
        /// Run every recording of a data directory with its stored
        /// annotations and `config.toml`.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Annotation file, only with a single recording.
        #[arg(long, short)]
        annotations: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value = "closed")]
        mode: ExecutionMode,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write the synthetic fixture set into a data directory.
    GenFixtures {
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the HTTP API over a data directory.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        data_dir: PathBuf,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn run_command(
    recordings: Vec<PathBuf>,
    data_dir: Option<PathBuf>,
    annotations: Option<PathBuf>,
    config: ConfigArg,
    mode: ExecutionMode,
    out: PathBuf,
) -> Result<()> {
    if annotations.is_some() && (recordings.len() != 1 || data_dir.is_some()) {
        bail!("--annotations needs exactly one recording and no --data-dir");
    }
    let mut jobs = Vec::new();
    if let Some(dir) = &data_dir {
        let data = DataDir::new(dir);
        let settings = match &config.config {
            Some(_) => config.settings()?,
            None => data.settings()?,
        };
        for id in data.recording_ids()? {
            jobs.push((id.clone(), data.recording_path(&id), Some(data.annotation_path(&id)), settings.clone()));
        }
    }
    let settings = config.settings()?;
    for path in recordings {
        jobs.push((recording_id(&path), path, annotations.clone(), settings.clone()));
    }
    if jobs.is_empty() {
        bail!("nothing to run: give recordings or --data-dir");
    }

    let mut failed = 0;
    for (id, path, ann_path, settings) in jobs {
        let seq = load_recording(&path)?;
        let ann = match &ann_path {
            Some(p) => load_annotations_file(p)?,
            None => None,
        };
        let report = run_and_export(&id, &seq, ann.as_ref(), &settings, mode, &out.join(&id))?;
        for action in &report.actions {
            match action {
                ActionOutcome::Completed(a) => eprintln!(
                    "{id}/{}: {} frames, mean |E_t| {:.4}, max |E_t| {:.4}, timeouts {}",
                    a.action_label,
                    a.trace.len(),
                    a.summary.mean_abs_error,
                    a.summary.max_abs_error,
                    a.summary.timeouts
                ),
                ActionOutcome::Failed(f) => {
                    failed += 1;
                    eprintln!("{id}/{}: failed at {}: {}", f.action_label, f.stage, f.message);
                }
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} action(s) failed");
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Extract { recording, config, out } => {
            let settings = config.settings()?;
            let seq = load_recording(&recording)?;
            let ex = extract_trajectory(&seq, &settings.extraction)?;
            for d in &ex.dropped {
                eprintln!("dropped frame {} (t = {})", d.frame, d.timestamp);
            }
            emit(out.as_deref(), &angle_csv(&[&ex.trajectory]))
        }
        Command::DetectNoise { recording, config, threshold, window, mean_displacement } => {
            let mut cfg = config.settings()?.noise.unwrap_or_default();
            if let Some(t) = threshold {
                cfg.jump_threshold = t;
            }
            if let Some(w) = window {
                cfg.window = w;
            }
            if mean_displacement {
                cfg.per_joint = false;
            }
            cfg.validate().map_err(anyhow::Error::msg)?;
            let seq = load_recording(&recording)?;
            let flagged = detect_noisy_frames(&seq, &cfg);
            emit(None, &pretty(&json!({
                "recording_id": recording_id(&recording),
                "config": cfg,
                "noisy_frames": flagged,
            })))
        }
        Command::Retarget { angles, config, out } => {
            let settings = config.settings()?;
            let human = read_angle_csv(&angles, Side::Human)?;
            let robot = map_trajectory(&human, settings.human_limits(), settings.robot_limits())?;
            emit(out.as_deref(), &angle_csv(&[&robot]))
        }
        Command::Execute { angles, config, mode, out } => {
            let settings = config.settings()?;
            let robot = read_angle_csv(&angles, Side::Robot)?;
            let trace = execute_trajectory(&robot, &settings, mode, 0)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            emit(Some(&out.join("trace.csv")), &trace_csv(&trace))?;
            emit(Some(&out.join("errors.csv")), &errors_csv(&trace))?;
            let summary = pretty(&json!({ "mode": mode.as_str(), "summary": summarize(&trace) }));
            emit(Some(&out.join("summary.json")), &summary)?;
            emit(None, &summary)
        }
        Command::Run { recordings, data_dir, annotations, config, mode, out } => {
            run_command(recordings, data_dir, annotations, config, mode, out)
        }
        Command::GenFixtures { dir, seed } => {
            for path in gen_fixtures(&dir, seed)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Serve { port, data_dir } => {
            if !data_dir.is_dir() {
                bail!("data directory {} does not exist", data_dir.display());
            }
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("serving {} on port {port}", data_dir.display());
            rt.block_on(skelmotion_server::serve(port, data_dir))?;
            Ok(())
        }
    }
}
