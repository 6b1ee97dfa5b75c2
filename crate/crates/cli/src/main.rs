use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use mkbsc::io::dot::{export_dot, export_dot_expanded, DotOptions};
use mkbsc::io::dsl::{parse_game, parse_objective, serialize_game};
use mkbsc::io::profile::{parse_profile, parse_transducers, serialize_profile, serialize_transducers};
use mkbsc::io::report::{format_verdict, synth_report};
use mkbsc::mkbsc::{check_pdk, expand_to, Limits};
use mkbsc::strategy::{induced_profile, validate_profile};
use mkbsc::synth::{global_loop, stabilization, Algorithm, Budget, SynthConfig, SynthOutcome};
use mkbsc::{validate_game, Case, Game, Objective};

/// Exit codes.
const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "mkbsc", version, about = "Knowledge-based subset construction for multi-agent games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Limit {
    /// Stop expanding beyond this many locations.
    #[arg(long)]
    max_states: Option<usize>,
    /// Stop searching after this many nodes.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Stop searching after this many seconds.
    #[arg(long)]
    timeout: Option<u64>,
}

impl Limit {
    fn budget(&self) -> Budget {
        Budget { max_nodes: self.max_nodes, max_time: self.timeout.map(Duration::from_secs), max_states: self.max_states }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a game.
    Validate { game: PathBuf },
    /// Build expansions and report their sizes.
    Expand {
        game: PathBuf,
        #[arg(long, default_value_t = 1)]
        iterations: usize,
        #[arg(long, default_value = "nn")]
        case: Case,
        /// Write each level's game and state labels here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limit: Limit,
    },
    /// Check perfect distributed knowledge of an expansion.
    Pdk {
        game: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value = "nn")]
        case: Case,
    },
    /// Search for a winning memoryless profile level by level.
    Synthesize {
        game: PathBuf,
        #[arg(long)]
        objective: PathBuf,
        #[arg(long, default_value = "exhaustive")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 5)]
        max_iterations: usize,
        #[arg(long, default_value = "nn")]
        case: Case,
        /// Write report.txt, profile.txt and transducers.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        limit: Limit,
    },
    /// Decide whether a profile or transducer file wins.
    Check {
        game: PathBuf,
        #[arg(long)]
        objective: PathBuf,
        #[arg(long, conflicts_with = "transducers", required_unless_present = "transducers")]
        profile: Option<PathBuf>,
        #[arg(long)]
        transducers: Option<PathBuf>,
        #[arg(long, default_value = "nn")]
        case: Case,
    },
    /// Write a game or one of its expansions as DOT.
    Export {
        game: PathBuf,
        #[arg(long)]
        dot: PathBuf,
        /// Label expansion states with knowledge trees.
        #[arg(long)]
        trees: bool,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value = "nn")]
        case: Case,
        /// Only draw these agents' observation relations.
        #[arg(long = "agent")]
        agents: Vec<String>,
    },
    /// Find the first level whose expansion is isomorphic to the next.
    Stabilize {
        game: PathBuf,
        #[arg(long, default_value_t = 5)]
        max: usize,
        #[arg(long, default_value = "nn")]
        case: Case,
        /// Also require the translated objective to match.
        #[arg(long)]
        objective: Option<PathBuf>,
        #[command(flatten)]
        limit: Limit,
    },
}

/// An error with the exit code it should produce.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<mkbsc::Error>() {
            Some(mkbsc::Error::BudgetExceeded(_)) => EXIT_BUDGET,
            Some(mkbsc::Error::Parse(_) | mkbsc::Error::Invalid(_) | mkbsc::Error::NotObservable(_)) => EXIT_INPUT,
            _ => EXIT_FAILURE,
        };
        Failure { code, error }
    }
}

impl From<mkbsc::Error> for Failure {
    fn from(e: mkbsc::Error) -> Self {
        anyhow::Error::new(e).into()
    }
}

fn input(error: anyhow::Error) -> Failure {
    Failure { code: EXIT_INPUT, error }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(input)
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    let src = read(path)?;
    parse_game(&src).map_err(|e| input(anyhow!("{}:{e}", path.display())))
}

fn load_objective(path: &Path, g: &Game) -> Result<Objective, Failure> {
    let src = read(path)?;
    parse_objective(&src, g).map_err(|e| input(anyhow!("{}:{e}", path.display())))
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let name = path.file_name().ok_or_else(|| anyhow!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { game } => {
            let g = load_game(&game)?;
            let report = validate_game(&g);
            if !report.is_empty() {
                return Err(input(anyhow!("{report}")));
            }
            println!(
                "valid: {} agents, {} locations, {} transitions",
                g.num_agents(),
                g.num_locations(),
                g.transitions().len()
            );
        }
        Command::Expand { game, iterations, case, out, limit } => {
            let g = load_game(&game)?;
            let chain = expand_to(&g, case, iterations, Limits { max_states: limit.max_states })?;
            for eg in &chain {
                let pdk = if check_pdk(eg).holds() { "holds" } else { "fails" };
                println!(
                    "level {}: {} locations, {} transitions, PDK {pdk}",
                    eg.level(),
                    eg.game().num_locations(),
                    eg.game().transitions().len()
                );
                if let Some(dir) = &out {
                    write_atomic(&dir.join(format!("level{}.game", eg.level())), &serialize_game(eg.game()))?;
                    let labels: String = eg
                        .game()
                        .locations()
                        .map(|l| format!("{} {}\n", eg.game().location_name(l), eg.state_text(l)))
                        .collect();
                    write_atomic(&dir.join(format!("level{}.states", eg.level())), &labels)?;
                }
            }
        }
        Command::Pdk { game, level, case } => {
            if level == 0 {
                return Err(input(anyhow!("--level must be at least 1")));
            }
            let g = load_game(&game)?;
            let chain = expand_to(&g, case, level, Limits::default())?;
            let eg = chain.last().expect("level >= 1");
            match check_pdk(eg).witness {
                None => println!("PDK holds at level {level}"),
                Some(l) => println!("PDK fails at level {level}: {}", eg.state_text(l)),
            }
        }
        Command::Synthesize { game, objective, algorithm, max_iterations, case, out, limit } => {
            let g = load_game(&game)?;
            let obj = load_objective(&objective, &g)?;
            let cfg = SynthConfig { algorithm, max_iterations, case, budget: limit.budget() };
            let outcome = global_loop(&g, &obj, &cfg)?;
            let report = synth_report(&outcome, &g, &cfg);
            print!("{report}");
            if let Some(dir) = &out {
                write_atomic(&dir.join("report.txt"), &report)?;
                if let SynthOutcome::Found(f) = &outcome {
                    write_atomic(&dir.join("profile.txt"), &serialize_profile(&f.profile, &g))?;
                    write_atomic(&dir.join("transducers.txt"), &serialize_transducers(&f.transducers, &g))?;
                }
            }
        }
        Command::Check { game, objective, profile, transducers, case } => {
            let g = load_game(&game)?;
            let obj = load_objective(&objective, &g)?;
            let ts = if let Some(path) = profile {
                let src = read(&path)?;
                let p = parse_profile(&src, &g).map_err(|e| input(anyhow!("{}:{e}", path.display())))?;
                if p.level == 0 {
                    return Err(input(anyhow!("{}: profile level must be at least 1", path.display())));
                }
                let chain = expand_to(&g, case, p.level, Limits::default())?;
                let eg: &Arc<_> = chain.last().expect("level >= 1");
                let (p, added) = p.completed(eg);
                if added > 0 {
                    println!("completed {added} unlisted knowledge states with each agent's first action");
                }
                induced_profile(eg, &p)?
            } else {
                let path = transducers.expect("clap requires one of the two");
                let src = read(&path)?;
                parse_transducers(&src, &g).map_err(|e| input(anyhow!("{}:{e}", path.display())))?
            };
            print!("{}", format_verdict(&validate_profile(&g, &obj, &ts)?, &g));
        }
        Command::Export { game, dot, trees, level, case, agents } => {
            let g = load_game(&game)?;
            let agents = if agents.is_empty() {
                None
            } else {
                Some(
                    agents
                        .iter()
                        .map(|n| g.agent_by_name(n).ok_or_else(|| input(anyhow!("unknown agent {n}"))))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            };
            let opts = DotOptions { show_trees: trees, agents };
            let text = if level == 0 {
                export_dot(&g, &opts)
            } else {
                let chain = expand_to(&g, case, level, Limits::default())?;
                export_dot_expanded(chain.last().expect("level >= 1"), &opts)
            };
            write_atomic(&dot, &text)?;
            println!("wrote {}", dot.display());
        }
        Command::Stabilize { game, max, case, objective, limit } => {
            let g = load_game(&game)?;
            let obj = objective.map(|p| load_objective(&p, &g)).transpose()?;
            let info = stabilization(&g, obj.as_ref(), case, max, &limit.budget())?;
            let sizes: Vec<String> = info.sizes.iter().map(usize::to_string).collect();
            println!("locations per level: {}", sizes.join(" "));
            match info.stable_at {
                Some(j) => println!("stable at {j}"),
                None => println!("not stable up to {max}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
