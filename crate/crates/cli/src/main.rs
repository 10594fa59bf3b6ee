//! Command-line front end: typecheck, run, explore, translate and test
//! programs of the calculus.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aic_core::harness::{run_property, GenConfig, Property};
use aic_core::machine::{explore, run, MachineState, Outcome, Scheduler};
use aic_core::surface::{parse, print, SourceFile};
use aic_core::translation::{check_simulation, forget_file, SimulationOutcome};
use aic_core::typing::{typecheck, Mode, System};

const EXIT_TYPE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_FAILURE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "aic", version, about = "Affine-intuitionistic concurrent calculus workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Base,
    Effects,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Leftmost,
    Seeded,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropArg {
    SubjectReduction,
    Confluence,
    Termination,
    Simulation,
    Progress,
    Roundtrip,
}

impl From<PropArg> for Property {
    fn from(p: PropArg) -> Property {
        match p {
            PropArg::SubjectReduction => Property::SubjectReduction,
            PropArg::Confluence => Property::Confluence,
            PropArg::Termination => Property::Termination,
            PropArg::Simulation => Property::Simulation,
            PropArg::Progress => Property::Progress,
            PropArg::Roundtrip => Property::Roundtrip,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck a file.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "base")]
        system: SystemArg,
        /// Require stratified region declarations (implies effects).
        #[arg(long)]
        stratified: bool,
        /// Use the restricted rules that guarantee confluence.
        #[arg(long)]
        confluent: bool,
        /// Print the full report instead of just the type.
        #[arg(long)]
        report: bool,
    },
    /// Run a program under a scheduler.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "leftmost")]
        scheduler: SchedulerArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Print every step.
        #[arg(long)]
        trace: bool,
    },
    /// Explore every interleaving and check the diamond property.
    Explore {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_states: usize,
    },
    /// Print the translation into the intuitionistic target system.
    Translate { file: PathBuf },
    /// Run a program and its translation in lockstep.
    Simulate {
        file: PathBuf,
        /// Seed for the source scheduler; leftmost when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
    /// Test a property on generated programs.
    Prop {
        #[arg(value_enum)]
        property: PropArg,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Typing system for subject reduction.
        #[arg(long, value_enum)]
        system: Option<SystemArg>,
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// Pretty-print a file.
    Fmt { file: PathBuf },
}

struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    fn new(code: u8, msg: impl ToString) -> Self {
        Fail { code, msg: msg.to_string() }
    }
}

fn load(path: &PathBuf) -> Result<SourceFile, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| Fail::new(EXIT_PARSE, format!("{}:{e}", path.display())))
}

fn state(file: &SourceFile) -> Result<MachineState, Fail> {
    MachineState::new(&file.program).map_err(|e| Fail::new(EXIT_PARSE, e))
}

fn mode_of(system: SystemArg, stratified: bool, confluent: bool) -> Mode {
    let mut mode = match (system, stratified) {
        (_, true) => Mode::stratified(),
        (SystemArg::Effects, false) => Mode::effects(),
        (SystemArg::Base, false) => Mode::base(),
    };
    if confluent {
        mode = mode.with_confluent();
    }
    mode
}

fn exec(cmd: Command) -> Result<(), Fail> {
    match cmd {
        Command::Check { file, system, stratified, confluent, report } => {
            let f = load(&file)?;
            let r = typecheck(&f, mode_of(system, stratified, confluent)).map_err(|e| Fail::new(EXIT_TYPE, e))?;
            if report {
                print!("{}", r.render());
            } else {
                println!("{}", r.ty);
            }
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Run { file, scheduler, seed, max_steps, trace } => {
            let f = load(&file)?;
            let sched = match scheduler {
                SchedulerArg::Leftmost => Scheduler::Leftmost,
                SchedulerArg::Seeded => Scheduler::Seeded(seed),
            };
            let t = run(&state(&f)?, sched, max_steps).map_err(|e| Fail::new(EXIT_FAILURE, e))?;
            if trace {
                print!("{}", t.render());
            }
            println!("{} after {} steps: {}", t.outcome, t.steps.len(), t.last.print());
            match t.outcome {
                Outcome::NormalForm => Ok(()),
                Outcome::StepLimit => Err(Fail::new(EXIT_BUDGET, format!("step limit of {max_steps} reached"))),
            }
        }
        Command::Explore { file, max_states } => {
            let f = load(&file)?;
            let r = explore(&state(&f)?, max_states).map_err(|e| Fail::new(EXIT_FAILURE, e))?;
            println!("states: {}", r.states);
            println!("normal forms: {}", r.normal_forms.len());
            for p in &r.normal_form_prints {
                println!("  {p}");
            }
            println!("diamond violations: {}", r.violations.len());
            for v in &r.violations {
                println!("  at {}: {} vs {}", v.state, v.left, v.right);
            }
            if r.budget_exceeded {
                return Err(Fail::new(EXIT_BUDGET, format!("state budget of {max_states} exceeded")));
            }
            Ok(())
        }
        Command::Translate { file } => {
            let f = load(&file)?;
            let r = typecheck(&f, Mode::effects()).map_err(|e| Fail::new(EXIT_TYPE, e))?;
            let t = forget_file(&f, &r.decorated).map_err(|e| Fail::new(EXIT_TYPE, e))?;
            print!("{t}");
            Ok(())
        }
        Command::Simulate { file, seed, max_steps } => {
            let f = load(&file)?;
            let sched = seed.map_or(Scheduler::Leftmost, Scheduler::Seeded);
            let v = check_simulation(&f, sched, max_steps).map_err(|e| Fail::new(EXIT_TYPE, e))?;
            print!("{v}");
            match (&v.outcome, v.source_outcome) {
                (SimulationOutcome::Mismatch { .. }, _) => Err(Fail::new(EXIT_FAILURE, "simulation mismatch")),
                (_, Outcome::StepLimit) => Err(Fail::new(EXIT_BUDGET, format!("step limit of {max_steps} reached"))),
                _ => Ok(()),
            }
        }
        Command::Prop { property, n, seed, system, max_depth } => {
            let prop = Property::from(property);
            let mut mode = prop.default_mode();
            if let Some(s) = system {
                mode.system = match s {
                    SystemArg::Base => System::Base,
                    SystemArg::Effects => System::Effects,
                };
            }
            let mut cfg = GenConfig::new(mode, seed);
            if let Some(d) = max_depth {
                cfg.max_depth = d;
            }
            let r = run_property(prop, n, &cfg);
            print!("{r}");
            if r.passed() {
                Ok(())
            } else {
                Err(Fail::new(EXIT_FAILURE, format!("{} of {n} cases failed", r.failures.len())))
            }
        }
        Command::Fmt { file } => {
            print!("{}", print(&load(&file)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
