use std::path::PathBuf;
use std::process::ExitCode;

use bootlab::lattice::{EventKind, RuleFamily};
use bootlab_cli::output::{sibling_path, write_atomic};
use bootlab_cli::spec::EnumerateTarget;
use bootlab_cli::{run, CliError, CommandKind, ExperimentSpec, Format};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bootstrap percolation experiments.
///
/// Settings are resolved as built-in defaults, then the `--config` JSON
/// file, then command-line flags; later sources win.
#[derive(Parser, Debug)]
#[command(name = "bootlab", version)]
struct Cli {
    /// JSON experiment spec; any subset of fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output file; stdout when absent. Auxiliary artifacts go beside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; overrides BOOTLAB_WORKERS.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the resolved spec as JSON and exit.
    #[arg(long, global = true)]
    print_spec: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Monte Carlo estimate of a rectangle event.
    Simulate {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, value_enum)]
        event: Option<EventArg>,
    },
    /// Closure of one random seed set, with stable regions.
    Closure(RegionArgs),
    /// Traversability of one random seed set, with the exact structure
    /// for small rectangles.
    Traverse(RegionArgs),
    /// Critical-probability bisection and the analytic comparison report.
    PcSearch(SearchArgs),
    /// Width of the window between the eps and 1-eps crossings.
    Window {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Droplet filling scan, or the staged-growth experiment.
    Droplet {
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long)]
        staged: bool,
    },
    /// Exhaustive enumerations.
    Enumerate {
        #[arg(long, group = "target")]
        pairs: bool,
        #[arg(long, group = "target")]
        infectors: bool,
        #[arg(long, group = "target")]
        growth: bool,
        #[arg(long)]
        b: Option<u32>,
        #[arg(long)]
        rows: Option<u32>,
        #[arg(long)]
        halfwidth: Option<u32>,
    },
    /// Expansion terms and the inverted equation.
    Asymptotics {
        /// Values of ln L.
        #[arg(long = "logL", value_delimiter = ',', num_args = 1..)]
        log_l: Option<Vec<f64>>,
        #[arg(long)]
        b: Option<u32>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Optimal growth path against the trajectory curve.
    Variational {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        log_inv_p: Option<f64>,
        #[arg(long)]
        grid_n: Option<usize>,
    },
    /// Crossover arithmetic for the expansion terms.
    Paradox,
    /// Infection-time image of one random seed set.
    Render(RegionArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum RuleArg {
    TwoNeighbour,
    Anisotropic,
    Duarte,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum EventArg {
    InternallyFilled,
    HorTrav,
    UpTrav,
    DownTrav,
}

#[derive(Args, Debug, Default)]
struct RuleArgs {
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
    /// Range of the anisotropic rule.
    #[arg(long)]
    b: Option<u32>,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[command(flatten)]
    rule: RuleArgs,
    /// Square side; sets width and height.
    #[arg(short = 'L', long = "L")]
    side: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    p_list: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    rule: RuleArgs,
    /// Side lengths.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    trials_per_probe: Option<u64>,
    #[arg(long)]
    probe_cap: Option<u64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RuleArgs {
    fn apply(self, s: &mut ExperimentSpec) {
        set(&mut s.b, self.b);
        match self.rule {
            Some(RuleArg::TwoNeighbour) => s.rule = RuleFamily::TwoNeighbour,
            Some(RuleArg::Duarte) => s.rule = RuleFamily::Duarte,
            Some(RuleArg::Anisotropic) => s.rule = RuleFamily::Anisotropic1b { b: s.b },
            None => {
                if let (Some(b), RuleFamily::Anisotropic1b { .. }) = (self.b, &s.rule) {
                    s.rule = RuleFamily::Anisotropic1b { b };
                }
            }
        }
    }
}

impl RegionArgs {
    fn apply(self, s: &mut ExperimentSpec) {
        self.rule.apply(s);
        if let Some(l) = self.side {
            s.width = l;
            s.height = l;
            s.sizes = vec![l];
        }
        set(&mut s.width, self.width);
        set(&mut s.height, self.height);
        set(&mut s.p, self.p);
        set(&mut s.p_list, self.p_list);
    }
}

impl SearchArgs {
    fn apply(self, s: &mut ExperimentSpec) {
        self.rule.apply(s);
        set(&mut s.sizes, self.sizes);
        set(&mut s.target, self.target);
        set(&mut s.tol, self.tol);
        set(&mut s.trials_per_probe, self.trials_per_probe);
        set(&mut s.probe_cap, self.probe_cap);
    }
}

fn resolve(cli: Cli) -> Result<(ExperimentSpec, bool), CliError> {
    let mut s = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            ExperimentSpec::from_json(&text).map_err(|e| CliError::BadSpec(format!("{}: {e}", path.display())))?
        }
        None => ExperimentSpec::default(),
    };
    s.command = match cli.command {
        Cmd::Simulate { region, event } => {
            region.apply(&mut s);
            if let Some(e) = event {
                s.event = match e {
                    EventArg::InternallyFilled => EventKind::InternallyFilled,
                    EventArg::HorTrav => EventKind::HorTrav,
                    EventArg::UpTrav => EventKind::UpTrav,
                    EventArg::DownTrav => EventKind::DownTrav,
                };
            }
            CommandKind::Simulate
        }
        Cmd::Closure(r) => {
            r.apply(&mut s);
            CommandKind::Closure
        }
        Cmd::Traverse(r) => {
            r.apply(&mut s);
            CommandKind::Traverse
        }
        Cmd::Render(r) => {
            r.apply(&mut s);
            CommandKind::Render
        }
        Cmd::PcSearch(a) => {
            a.apply(&mut s);
            CommandKind::PcSearch
        }
        Cmd::Window { search, eps } => {
            search.apply(&mut s);
            set(&mut s.eps, eps);
            CommandKind::Window
        }
        Cmd::Droplet { region, staged } => {
            region.apply(&mut s);
            s.staged |= staged;
            CommandKind::Droplet
        }
        Cmd::Enumerate {
            pairs,
            infectors,
            growth,
            b,
            rows,
            halfwidth,
        } => {
            if pairs {
                s.enumerate = EnumerateTarget::Pairs;
            } else if infectors {
                s.enumerate = EnumerateTarget::Infectors;
            } else if growth {
                s.enumerate = EnumerateTarget::Growth;
            }
            set(&mut s.b, b);
            set(&mut s.infector_rows, rows);
            set(&mut s.infector_halfwidth, halfwidth);
            CommandKind::Enumerate
        }
        Cmd::Asymptotics { log_l, b, eta } => {
            set(&mut s.log_l, log_l);
            set(&mut s.b, b);
            set(&mut s.eta, eta);
            CommandKind::Asymptotics
        }
        Cmd::Variational { p, log_inv_p, grid_n } => {
            if p.is_some() {
                s.log_inv_p = None;
            }
            set(&mut s.p, p);
            if log_inv_p.is_some() {
                s.log_inv_p = log_inv_p;
            }
            set(&mut s.grid_n, grid_n);
            CommandKind::Variational
        }
        Cmd::Paradox => CommandKind::Paradox,
    };
    set(&mut s.seed, cli.seed);
    set(&mut s.trials, cli.trials);
    if cli.workers.is_some() {
        s.workers = cli.workers;
    }
    if cli.out.is_some() {
        s.out = cli.out;
    }
    if cli.format.is_some() {
        s.format = cli.format;
    }
    Ok((s, cli.print_spec))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (spec, print_spec) = resolve(cli)?;
    if print_spec {
        println!("{}", spec.to_json());
        return Ok(());
    }
    let out = run(&spec)?;
    let io = |path: &std::path::Path, e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    match &spec.out {
        Some(path) => {
            write_atomic(path, &out.primary).map_err(|e| io(path, e))?;
            for (name, bytes) in &out.extras {
                let p = sibling_path(path, name);
                write_atomic(&p, bytes).map_err(|e| io(&p, e))?;
            }
            println!("{} -> {}", out.summary, path.display());
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&out.primary)
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            eprintln!("{}", out.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::BadSpec(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
