//! Command-line front end: solving, the interactive player, the reference
//! oracle, random game generation and the HTTP service.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use alpaga_core::cpre::SymbolicContext;
use alpaga_core::testkit::{generate_game, oracle_solve, GeneratorConfig};
use alpaga_core::{parse_game, solve_game, Choice, CpreKind, PlayError, Session, Solution, SolveOptions, Status, VarOrder};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "alpaga",
    version,
    about = "Solver for parity games with imperfect information",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub solve: SolveArgs,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a game file (the default when no subcommand is given)
    Solve(SolveArgs),
    /// Decide the initial cell with the explicit knowledge-game solver
    Oracle(OracleArgs),
    /// Print a random game
    Gen(GenArgs),
    /// Run the HTTP service
    Serve(ServeArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct SolveArgs {
    /// Play the computed strategy interactively after solving
    #[arg(short = 'i', long)]
    pub interactive: bool,
    /// Use the enumerative controllable predecessor
    #[arg(short = 'e', long)]
    pub enumerative: bool,
    /// Reject non-total transition relations instead of adding SINK
    #[arg(short = 'n', long = "no-totalize")]
    pub no_totalize: bool,
    /// Print debug traces and detailed errors
    #[arg(short = 'r', long)]
    pub trace: bool,
    /// Keep the strategy unsimplified
    #[arg(short = 's', long = "no-simplify")]
    pub no_simplify: bool,
    /// Print phase timings
    #[arg(short = 't', long)]
    pub times: bool,
    /// Print totalization warnings
    #[arg(short = 'v', long)]
    pub warnings: bool,
    /// Seed for random moves in the interactive player
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the symbolic observation relation in DOT format to this path
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
    /// Variable order of the symbolic encoding
    #[arg(long, value_enum, default_value_t = OrderArg::CodesFirst)]
    pub var_order: OrderArg,
    /// Game file, or `-` for standard input
    pub file: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OrderArg {
    #[default]
    CodesFirst,
    CellsFirst,
}

impl From<OrderArg> for VarOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::CodesFirst => VarOrder::CodesFirst,
            OrderArg::CellsFirst => VarOrder::CellsFirst,
        }
    }
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(short = 'n', long = "no-totalize")]
    pub no_totalize: bool,
    /// Game file, or `-` for standard input
    pub file: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of locations
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
    #[arg(long, default_value_t = 3)]
    pub observations: usize,
    #[arg(long, default_value_t = 3)]
    pub max_priority: u32,
    /// Probability of each possible transition
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    #[arg(long, default_value_t = 1.0)]
    pub safe_density: f64,
    #[arg(long, default_value_t = 0.0)]
    pub target_density: f64,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// Bind address, overriding ALPAGA_ADDR
    #[arg(long)]
    pub addr: Option<std::net::SocketAddr>,
}

pub const EXIT_WINNING: i32 = 0;
pub const EXIT_LOSING: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Standard streams, abstracted for tests.
pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

pub fn run(cli: Cli, io: &mut Io<'_>) -> i32 {
    let outcome = match cli.command {
        None => run_solve(&cli.solve, io),
        Some(Command::Solve(args)) => run_solve(&args, io),
        Some(Command::Oracle(args)) => run_oracle(&args, io),
        Some(Command::Gen(args)) => run_gen(&args, io),
        Some(Command::Serve(args)) => run_serve(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn read_input(path: &Path, stdin: &mut dyn BufRead) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        stdin.read_to_string(&mut text)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}

fn run_solve(args: &SolveArgs, io: &mut Io<'_>) -> anyhow::Result<i32> {
    let Some(path) = &args.file else {
        anyhow::bail!("no input file (see --help)");
    };
    let text = read_input(path, io.stdin)?;
    let start = Instant::now();
    let report = match parse_game(&text, !args.no_totalize) {
        Ok(r) => r,
        Err(e) => {
            if args.trace {
                writeln!(io.stderr, "{e:?}")?;
            }
            return Err(e.into());
        }
    };
    let parse_time = start.elapsed();
    log::debug!(
        "parsed {} locations, {} actions, {} observations",
        report.game.num_locations(),
        report.game.actions().len(),
        report.game.observations().len()
    );
    if args.warnings {
        for w in &report.warnings {
            writeln!(io.stderr, "warning: {w}")?;
        }
    }
    let options = SolveOptions {
        cpre: if args.enumerative { CpreKind::Enumerative } else { CpreKind::Symbolic },
        simplify: !args.no_simplify,
        var_order: args.var_order.into(),
    };
    let solution = solve_game(&report.game, options)?;
    if let Some(dot) = &args.dot {
        let ctx = SymbolicContext::with_options(&solution.game, options.var_order, alpaga_core::cpre::DEFAULT_VAR_CAP)?;
        std::fs::write(dot, ctx.b_gamma_dot()).map_err(|e| anyhow::anyhow!("{}: {e}", dot.display()))?;
    }
    io.stdout.write_all(solution.render().as_bytes())?;
    if args.times {
        let stats = &solution.result.stats;
        writeln!(io.stdout, "TIMES:")?;
        for (phase, d) in [
            ("parse", parse_time),
            ("encode", stats.encode_time),
            ("solve", stats.solve_time),
            ("simplify", stats.simplify_time),
        ] {
            writeln!(io.stdout, "{phase}: {:.3}s", d.as_secs_f64())?;
        }
    }
    if args.interactive {
        return Ok(repl(&solution, args.seed, io.stdin, io.stdout)?);
    }
    Ok(if solution.initial_winning { EXIT_WINNING } else { EXIT_LOSING })
}

fn run_oracle(args: &OracleArgs, io: &mut Io<'_>) -> anyhow::Result<i32> {
    let text = read_input(&args.file, io.stdin)?;
    let game = parse_game(&text, !args.no_totalize)?.game;
    let winning = oracle_solve(&game)?;
    writeln!(io.stdout, "{}", if winning { "winning" } else { "losing" })?;
    Ok(if winning { EXIT_WINNING } else { EXIT_LOSING })
}

fn run_gen(args: &GenArgs, io: &mut Io<'_>) -> anyhow::Result<i32> {
    anyhow::ensure!(args.n >= 1 && args.actions >= 1 && args.observations >= 1, "counts must be positive");
    let cfg = GeneratorConfig {
        seed: args.seed,
        locations: args.n,
        actions: args.actions,
        observations: args.observations,
        max_priority: args.max_priority,
        density: args.density,
        safe_density: args.safe_density,
        target_density: args.target_density,
    };
    io.stdout.write_all(generate_game(&cfg).render().as_bytes())?;
    Ok(EXIT_WINNING)
}

fn run_serve(args: &ServeArgs) -> anyhow::Result<i32> {
    let mut cfg = alpaga_server::Config::from_env().map_err(anyhow::Error::msg)?;
    if let Some(addr) = args.addr {
        cfg.addr = addr;
    }
    tokio::runtime::Runtime::new()?.block_on(alpaga_server::serve(cfg))?;
    Ok(EXIT_WINNING)
}

const HELP: &str = "\
commands:
  go        show the knowledge, the strategy's move and the possible observations
  <number>  answer with the numbered observation
  random    answer with a random observation
  history   list the moves played so far
  help      show this message
  quit      leave
";

fn show_state(session: &Session<'_>, out: &mut dyn Write) -> io::Result<Vec<usize>> {
    let g = session.game();
    writeln!(out, "knowledge: {}", g.format_cell(session.knowledge()))?;
    match session.proposed_move() {
        Ok((action, obs)) => {
            writeln!(out, "move: {}", g.actions()[action])?;
            let listed: Vec<String> =
                obs.iter().enumerate().map(|(i, &o)| format!("{}) {}", i + 1, g.observations()[o].id)).collect();
            writeln!(out, "observations: {}", listed.join(" "))?;
            Ok(obs)
        }
        Err(_) => {
            writeln!(out, "status: {}", session.status().as_str())?;
            Ok(Vec::new())
        }
    }
}

/// Interactive player. Returns the process exit code.
pub fn repl(solution: &Solution, seed: u64, input: &mut dyn BufRead, out: &mut dyn Write) -> io::Result<i32> {
    if !solution.initial_winning {
        writeln!(out, "the initial cell is losing; there is no strategy to play")?;
        return Ok(EXIT_LOSING);
    }
    let g = &solution.game;
    let mut session = Session::new(g, &solution.result.strategy, seed);
    writeln!(out, "type help for the list of commands")?;
    let mut line = String::new();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(EXIT_WINNING);
        }
        let cmd = line.trim();
        let choice = match cmd {
            "" => continue,
            "help" => {
                out.write_all(HELP.as_bytes())?;
                continue;
            }
            "quit" | "exit" => return Ok(EXIT_WINNING),
            "go" => {
                show_state(&session, out)?;
                continue;
            }
            "history" => {
                if session.history().is_empty() {
                    writeln!(out, "no moves yet")?;
                }
                for (i, h) in session.history().iter().enumerate() {
                    writeln!(
                        out,
                        "{}. play {}, observe {}, knowledge {}",
                        i + 1,
                        g.actions()[h.action],
                        g.observations()[h.observation].id,
                        g.format_cell(&h.knowledge)
                    )?;
                }
                continue;
            }
            "random" => Choice::Random,
            other => match other.parse::<usize>() {
                Ok(n) => {
                    let listed = match session.proposed_move() {
                        Ok((_, obs)) => obs,
                        Err(_) => Vec::new(),
                    };
                    match n.checked_sub(1).and_then(|i| listed.get(i)) {
                        Some(&o) => Choice::Observation(o),
                        None if listed.is_empty() => {
                            writeln!(out, "the play is over ({})", session.status().as_str())?;
                            continue;
                        }
                        None => {
                            writeln!(out, "no observation numbered {n}; choose between 1 and {}", listed.len())?;
                            continue;
                        }
                    }
                }
                Err(_) => {
                    writeln!(out, "unknown command `{other}`; type help")?;
                    continue;
                }
            },
        };
        match session.step(choice) {
            Ok(h) => writeln!(out, "observed {}", g.observations()[h.observation].id)?,
            Err(PlayError::IllegalState) => {
                writeln!(out, "the play is over ({})", session.status().as_str())?;
                continue;
            }
            Err(e) => writeln!(out, "{e}")?,
        }
        show_state(&session, out)?;
        if session.status() == Status::Won {
            writeln!(out, "player 1 wins")?;
        }
    }
}
