use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use copresence::attack::{AttackSpec, PhysicalMode, RadioDirection};
use copresence::datagen::{gen_dataset, GenConfig, Generator};
use copresence::dataset::read_dataset;
use copresence::fusion::{load_fused, save_fused, train_fused, FusedTrainParams, FusionStrategy};
use copresence::learn::ClassifierKind;
use copresence::proto::ProbeTone;

use copresence_harness::grid::{run_audio_relay_grid, ChannelPreset, GridPlan};
use copresence_harness::matrix::{evaluate_model, run_matrix, EvalReport, ReportRow};
use copresence_harness::plan::{ExperimentPlan, FusionKind, SystemKind};
use copresence_harness::render::render_matrix;
use copresence_harness::simulate::{simulate, SimulationPlan};
use copresence_harness::HarnessError;

#[derive(Parser)]
#[command(
    name = "copresence",
    version,
    about = "Contextual co-presence workbench"
)]
struct Cli {
    /// Root seed for every randomized component.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AttackArgs {
    /// Manipulated modalities, e.g. "B,W" or "Au,B,G,W". Repeatable.
    #[arg(long = "attack")]
    attacks: Vec<String>,
    /// Radio manipulation direction.
    #[arg(long, default_value = "bi", value_parser = parse_direction)]
    radio_direction: RadioDirection,
    /// Physical manipulation mode.
    #[arg(long, default_value = "zero", value_parser = parse_physical_mode)]
    physical_mode: PhysicalMode,
    /// Run attacks outside the feasibility catalog.
    #[arg(long)]
    force: bool,
}

impl AttackArgs {
    fn parse_attacks(&self) -> Result<Vec<AttackSpec>, HarnessError> {
        self.attacks
            .iter()
            .map(|s| {
                AttackSpec::from_str(s)
                    .map(|spec| {
                        spec.with_direction(self.radio_direction)
                            .with_physical_mode(self.physical_mode)
                    })
                    .map_err(|e| HarnessError::InvalidPlan(e.to_string()))
            })
            .collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (JSON Lines).
    Gen {
        /// Generator config; defaults to the shipped benchmark config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built-in preset: `benchmark` (335/203 mixed venues) or
        /// `physical-imbalance` (non-co-present class ~18x larger).
        #[arg(long, default_value = "benchmark", conflicts_with = "config")]
        preset: String,
        /// Override the co-present pair count.
        #[arg(long)]
        co: Option<usize>,
        /// Override the non-co-present pair count.
        #[arg(long)]
        non_co: Option<usize>,
        /// Write the effective generator config to this path and exit.
        #[arg(long)]
        emit_config: Option<PathBuf>,
        /// Output dataset path.
        #[arg(long, required_unless_present = "emit_config")]
        out: Option<PathBuf>,
    },
    /// Train a fused model and save it as a model directory.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = SystemKind::from_str)]
        system: SystemKind,
        #[arg(long, default_value = "features", value_parser = FusionKind::from_str)]
        fusion: FusionKind,
        #[arg(long, default_value = "tree", value_parser = parse_classifier)]
        classifier: ClassifierKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained model on a dataset, optionally under attacks.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        attack: AttackArgs,
    },
    /// Cross-validated attack matrix over (fusion, classifier, attack).
    AttackMatrix {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = SystemKind::from_str)]
        system: SystemKind,
        /// Fusion strategies to evaluate. Repeatable.
        #[arg(long = "fusion", value_parser = FusionKind::from_str)]
        fusions: Vec<FusionKind>,
        /// Classifiers to evaluate. Repeatable.
        #[arg(long = "classifier", value_parser = parse_classifier)]
        classifiers: Vec<ClassifierKind>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// 19-subset rotation under-sampling of the non-co-present class.
        #[arg(long)]
        undersample: bool,
        #[command(flatten)]
        attack: AttackArgs,
        /// CSV output path; the rendered table always prints to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audio streaming relay grid over (prover class -> verifier class).
    RelayGrid {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Enable the verifier probe tone countermeasure.
        #[arg(long)]
        probe: bool,
        #[arg(long, default_value_t = 7_500.0)]
        probe_freq: f64,
        #[arg(long, default_value_t = 0.6)]
        probe_amplitude: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run protocol sessions (benign / relay / MAC-forging) and report
    /// acceptance statistics.
    Simulate {
        #[arg(long, default_value_t = 100)]
        benign: usize,
        #[arg(long, default_value_t = 100)]
        relay: usize,
        #[arg(long, default_value_t = 0)]
        forged: usize,
        /// Trained model directory; omitted = train a features/tree model
        /// on the benchmark dataset first.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        attack: AttackArgs,
        /// Probe-tone amplitude (0 disables).
        #[arg(long, default_value_t = 0.0)]
        probe_amplitude: f64,
        #[arg(long, default_value_t = 7_500.0)]
        probe_freq: f64,
    },
    /// Render a saved attack-matrix CSV as a text table.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_classifier(s: &str) -> Result<ClassifierKind, String> {
    match s {
        "tree" => Ok(ClassifierKind::Tree),
        "forest" => Ok(ClassifierKind::Forest),
        other => Err(format!("unknown classifier {other:?} (tree|forest)")),
    }
}

fn parse_direction(s: &str) -> Result<RadioDirection, String> {
    match s {
        "bi" | "bidirectional" => Ok(RadioDirection::Bidirectional),
        "uni" | "unidirectional" => Ok(RadioDirection::Unidirectional),
        other => Err(format!("unknown direction {other:?} (bi|uni)")),
    }
}

fn parse_physical_mode(s: &str) -> Result<PhysicalMode, String> {
    match s {
        "zero" | "zero-distance" => Ok(PhysicalMode::ZeroDistance),
        "mode" | "mode-substitution" => Ok(PhysicalMode::ModeSubstitution),
        other => Err(format!("unknown physical mode {other:?} (zero|mode)")),
    }
}

fn load_gen_config(path: &Option<PathBuf>, seed: u64) -> Result<GenConfig, HarnessError> {
    let mut cfg = match path {
        Some(p) => serde_json::from_slice(&fs::read(p)?)
            .map_err(|e| HarnessError::InvalidPlan(format!("config {}: {e}", p.display())))?,
        None => GenConfig::benchmark(),
    };
    cfg.seed = seed;
    Ok(cfg)
}

fn parse_report_csv(text: &str) -> Result<EvalReport, HarnessError> {
    let mut rows = Vec::new();
    let mut seed = 0;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(s) = rest.split("seed=").nth(1) {
                seed = s.trim().parse().unwrap_or(0);
            }
            continue;
        }
        if line.starts_with("system,") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(HarnessError::InvalidPlan(format!(
                "bad report line: {line}"
            )));
        }
        let count = |i: usize| cols[i].parse::<usize>().unwrap_or(0);
        let attack = cols[2].to_string();
        let manipulated_count = if attack == "none" {
            0
        } else {
            attack.matches('+').count() + 1
        };
        rows.push(ReportRow {
            system: cols[0].to_string(),
            fusion: cols[1].to_string(),
            attack,
            classifier: cols[3].to_string(),
            manipulated_count,
            metrics: copresence::learn::Metrics::from_counts(
                count(4),
                count(5),
                count(6),
                count(7),
            ),
        });
    }
    Ok(EvalReport {
        rows,
        seed,
        tool: "report".into(),
    })
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Gen {
            config,
            preset,
            co,
            non_co,
            emit_config,
            out,
        } => {
            let mut cfg = match (&config, preset.as_str()) {
                (Some(_), _) => load_gen_config(&config, cli.seed)?,
                (None, "benchmark") => GenConfig::benchmark(),
                (None, "physical-imbalance") => GenConfig::physical_imbalance(),
                (None, other) => {
                    return Err(HarnessError::InvalidPlan(format!(
                        "unknown preset {other:?} (benchmark|physical-imbalance)"
                    )))
                }
            };
            cfg.seed = cli.seed;
            if let Some(co) = co {
                cfg.co_count = co;
            }
            if let Some(non_co) = non_co {
                cfg.non_co_count = non_co;
            }
            if let Some(path) = emit_config {
                fs::write(
                    &path,
                    serde_json::to_vec_pretty(&cfg).expect("config serializes"),
                )?;
                println!("wrote generator config to {}", path.display());
                return Ok(());
            }
            let out = out.expect("clap enforces out");
            let n = gen_dataset(cfg, &out)?;
            println!("wrote {n} pairs to {}", out.display());
            Ok(())
        }
        Command::Train {
            data,
            system,
            fusion,
            classifier,
            out,
        } => {
            let pairs = read_dataset(&data)?;
            let params = FusedTrainParams {
                classifier,
                seed: cli.seed,
                ..FusedTrainParams::tree_default(cli.seed)
            };
            let model = train_fused(&pairs, &system.modalities(), &fusion.strategy(), &params)?;
            save_fused(&model, &out)?;
            println!(
                "trained {} {} model on {} pairs -> {}",
                system.name(),
                fusion.name(),
                pairs.len(),
                out.display()
            );
            Ok(())
        }
        Command::Eval {
            data,
            model,
            attack,
        } => {
            let pairs = read_dataset(&data)?;
            let model = load_fused(&model)?;
            let attacks = attack.parse_attacks()?;
            let specs = if attacks.is_empty() {
                vec![AttackSpec::zero_modality()]
            } else {
                attacks
            };
            for spec in specs {
                let metrics = evaluate_model(&model, &pairs, &spec, attack.force)?;
                let fmt = |v: Option<f64>| {
                    v.map(|x| format!("{:.2}%", 100.0 * x))
                        .unwrap_or_else(|| "n/a".into())
                };
                println!(
                    "attack {:<12} FPR {:<8} FNR {:<8} F1 {}",
                    spec.label(),
                    fmt(metrics.fpr),
                    fmt(metrics.fnr),
                    metrics
                        .f1
                        .map(|x| format!("{x:.3}"))
                        .unwrap_or_else(|| "n/a".into()),
                );
            }
            Ok(())
        }
        Command::AttackMatrix {
            data,
            system,
            fusions,
            classifiers,
            folds,
            undersample,
            attack,
            out,
        } => {
            let pairs = read_dataset(&data)?;
            let mut plan = ExperimentPlan::new(system);
            if !fusions.is_empty() {
                plan.fusions = fusions;
            }
            if !classifiers.is_empty() {
                plan.classifiers = classifiers;
            }
            plan.folds = folds;
            plan.undersample = undersample;
            plan.attacks = attack.parse_attacks()?;
            plan.force = attack.force;
            plan.seed = cli.seed;
            plan.threads = cli.threads;
            plan.dataset = Some(data);
            let report = run_matrix(&plan, &pairs)?;
            print!("{}", render_matrix(&report));
            if let Some(path) = out {
                fs::write(&path, report.to_csv())?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::RelayGrid {
            trials,
            probe,
            probe_freq,
            probe_amplitude,
            out,
        } => {
            let mut plan = GridPlan::new(cli.seed);
            plan.trials_per_cell = trials;
            plan.threads = cli.threads;
            plan.channels = vec![ChannelPreset::clean(), ChannelPreset::lossy()];
            if probe {
                plan.probe = Some(
                    ProbeTone::new(probe_freq, probe_amplitude)
                        .map_err(HarnessError::InvalidPlan)?,
                );
            }
            let report = run_audio_relay_grid(&plan)?;
            println!(
                "relay grid (seed {}, probe {:?}):",
                report.seed, report.probe
            );
            print!("{}", report.to_csv());
            if let Some(path) = out {
                fs::write(&path, report.to_csv())?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Simulate {
            benign,
            relay,
            forged,
            model,
            attack,
            probe_amplitude,
            probe_freq,
        } => {
            let fused = match model {
                Some(dir) => load_fused(&dir)?,
                None => {
                    let mut cfg = GenConfig::benchmark();
                    cfg.seed = cli.seed;
                    let pairs = Generator::new(cfg)?.generate()?;
                    train_fused(
                        &pairs,
                        &SystemKind::AudioRadioPhysical.modalities(),
                        &FusionStrategy::features_fusion(),
                        &FusedTrainParams::tree_default(cli.seed),
                    )?
                }
            };
            let mut plan = SimulationPlan::new(cli.seed);
            plan.benign_sessions = benign;
            plan.relay_sessions = relay;
            plan.forged_sessions = forged;
            let attacks = attack.parse_attacks()?;
            plan.attack = attacks.into_iter().next();
            plan.force = attack.force;
            if probe_amplitude > 0.0 {
                plan.probe = Some(
                    ProbeTone::new(probe_freq, probe_amplitude)
                        .map_err(HarnessError::InvalidPlan)?,
                );
            }
            let report = simulate(&plan, &fused)?;
            print!("{}", report.to_text());
            Ok(())
        }
        Command::Report { input } => {
            let text = fs::read_to_string(&input)?;
            let report = parse_report_csv(&text)?;
            print!("{}", render_matrix(&report));
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
