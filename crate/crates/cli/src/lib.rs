//! The `race` command-line tool.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multirace::asym::{
    limit_last_n1_inf, limit_last_nm_inf, limit_last_proportional, limit_win_n1_inf,
    limit_win_nm_inf, limit_win_proportional, LimitConfig, LimitEstimate, LimitMethod,
    ProportionVector,
};
use multirace::exact::{
    last_probs_dp, last_probs_inclusion_exclusion, win_probs_dp, win_probs_negmulti,
    win_probs_sum_beta,
};
use multirace::inverse::solve_advancing;
use multirace::model::classify_recurrence;
use multirace::quad::{probs_quad, QuadConfig};
use multirace::sample::{mc_estimate, McConfig, McMethod};
use multirace::{
    dice_preset, game_from_real_goals, game_from_real_goals_probs, Budget, GameSpec64, Kind,
    RaceError,
};

mod report;

pub use report::{fixed, format_report, Cell, Format, OutputReport};

/// Lattices up to this many states default to the exact recursion.
const DEFAULT_DP_STATES: f64 = 1e6;

#[derive(Debug, Parser)]
#[command(name = "race", version, about = "Win and last-place probabilities of multinomial races")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability of finishing first.
    Win(RaceArgs),
    /// Probability of finishing last.
    Last(RaceArgs),
    /// The two-dice game with eleven players.
    Dice(DiceArgs),
    /// Monte Carlo simulation of a game.
    Simulate(SimulateArgs),
    /// Limits of player 1's probabilities as goals grow.
    Limit(LimitArgs),
    /// Advancing probabilities that produce given win or last-place probabilities.
    Solve(SolveArgs),
    /// Recurrence or transience of the centred walk.
    Recurrence(RecurrenceArgs),
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Decimals shown in tables [default: 6, or 3 for `dice`].
    #[arg(long)]
    digits: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dp,
    Negmulti,
    Sumbeta,
    Inclexcl,
    Quad,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McMethodArg {
    Walk,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Win,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DiceKind {
    Win,
    Last,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LimitMode {
    N1,
    Nm,
    Prop,
    LastN1,
    LastNm,
    LastProp,
}

#[derive(Debug, Args)]
struct GameArgs {
    /// Comma-separated goals.
    #[arg(long, value_delimiter = ',', required = true)]
    goals: Vec<f64>,
    /// Comma-separated advancing probabilities [default: proportional to goals].
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "mc-method", value_enum, default_value_t = McMethodArg::Gamma)]
    mc_method: McMethodArg,
}

#[derive(Debug, Args)]
struct RaceArgs {
    #[command(flatten)]
    game: GameArgs,
    /// [default: dp for small integer games, quad otherwise]
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct DiceArgs {
    #[arg(long, value_enum, default_value_t = DiceKind::Both)]
    kind: DiceKind,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct LimitArgs {
    #[arg(long, value_enum)]
    mode: LimitMode,
    /// Fixed goals: n_2..n_m for n1 modes, n_1..n_{m-1} for nm modes.
    #[arg(long, value_delimiter = ',')]
    goals: Option<Vec<f64>>,
    /// Goal proportions for prop modes.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Draws for the Monte Carlo fallback (nm modes, four or more players).
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    goals: Vec<u64>,
    /// Comma-separated target probabilities.
    #[arg(long, value_delimiter = ',', conflicts_with = "equal", required_unless_present = "equal")]
    target: Option<Vec<f64>>,
    /// Target 1/m for every player.
    #[arg(long)]
    equal: bool,
    #[arg(long, value_enum, default_value_t = KindArg::Win)]
    map: KindArg,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct RecurrenceArgs {
    #[arg(long, value_delimiter = ',', required_unless_present = "goals", conflicts_with = "goals")]
    probs: Option<Vec<f64>>,
    /// Use the canonical probabilities of these goals.
    #[arg(long, value_delimiter = ',')]
    goals: Option<Vec<f64>>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Library(RaceError),
}

impl From<RaceError> for Failure {
    fn from(e: RaceError) -> Self {
        Failure::Library(e)
    }
}

type Outcome = std::result::Result<(OutputReport, Format, usize), Failure>;

/// Runs the tool with `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, err) {
        Ok((report, format, digits)) => {
            let _ = out.write_all(format_report(&report, format, digits).as_bytes());
            0
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Library(e)) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                RaceError::Convergence { .. } | RaceError::Unsolved { .. } | RaceError::Runaway { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn dispatch(command: Command, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Win(a) => race(Kind::Win, a, err),
        Command::Last(a) => race(Kind::Last, a, err),
        Command::Dice(a) => dice(a),
        Command::Simulate(a) => simulate(a, err),
        Command::Limit(a) => limit(a),
        Command::Solve(a) => solve(a),
        Command::Recurrence(a) => recurrence(a),
    }
}

fn settings(out: &Output, default_digits: usize) -> (Format, usize) {
    let format = match out.format {
        FormatArg::Table => Format::Table,
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    (format, out.digits.unwrap_or(default_digits))
}

fn build_game(args: &GameArgs, err: &mut dyn Write) -> std::result::Result<GameSpec64, Failure> {
    let game = match &args.probs {
        Some(p) => game_from_real_goals_probs(&args.goals, p)?,
        None => game_from_real_goals(&args.goals)?,
    };
    if let Some(sum) = game.normalization_warning() {
        let _ = writeln!(err, "warning: probabilities summed to {sum}; renormalised");
    }
    Ok(game)
}

fn game_rows(report: &mut OutputReport, game: &GameSpec64) {
    report.row("Player number", (1..=game.m() as u64).map(Cell::Int).collect());
    report.row(
        "Steps needed to win",
        game.goals().iter().map(|&g| Cell::number(g)).collect(),
    );
    report.reals("Probability of step", game.probs());
}

fn kind_label(kind: Kind) -> &'static str {
    match kind {
        Kind::Win => "Probability to win",
        Kind::Last => "Probability to be last",
    }
}

fn default_method(game: &GameSpec64, kind: Kind) -> MethodArg {
    if game.int_goals().is_err() {
        return MethodArg::Quad;
    }
    let extra = if kind == Kind::Last { 1.0 } else { 0.0 };
    let states: f64 = game.goals().iter().map(|g| g + extra).product();
    if states <= DEFAULT_DP_STATES {
        MethodArg::Dp
    } else {
        MethodArg::Quad
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Dp => "dp",
        MethodArg::Negmulti => "negmulti",
        MethodArg::Sumbeta => "sumbeta",
        MethodArg::Inclexcl => "inclexcl",
        MethodArg::Quad => "quad",
        MethodArg::Mc => "mc",
    }
}

fn mc_config(a: &McArgs) -> McConfig {
    McConfig {
        samples: a.samples,
        seed: a.seed,
        method: match a.mc_method {
            McMethodArg::Walk => McMethod::Walk,
            McMethodArg::Gamma => McMethod::GammaRace,
        },
        ..McConfig::default()
    }
}

fn race(kind: Kind, a: RaceArgs, err: &mut dyn Write) -> Outcome {
    let game = build_game(&a.game, err)?;
    let method = a.method.unwrap_or_else(|| default_method(&game, kind));
    let integer_only = matches!(
        method,
        MethodArg::Dp | MethodArg::Negmulti | MethodArg::Sumbeta | MethodArg::Inclexcl
    );
    if integer_only && game.int_goals().is_err() {
        return Err(Failure::Usage(format!(
            "method {} needs integer goals; use --method quad for real goals",
            method_name(method)
        )));
    }
    let name = if kind == Kind::Win { "win" } else { "last" };
    let wrong_kind = |what: &str| {
        Failure::Usage(format!(
            "method {} computes {what} probabilities only",
            method_name(method)
        ))
    };
    let budget = Budget::default();
    let mut report = OutputReport::new(name, method_name(method));
    report.input("goals", &a.game.goals);
    if let Some(p) = &a.game.probs {
        report.input("probs", p);
    }
    report.input("method", method_name(method));
    game_rows(&mut report, &game);

    let values = match method {
        MethodArg::Dp => match kind {
            Kind::Win => win_probs_dp(&game, &budget)?.values,
            Kind::Last => last_probs_dp(&game, &budget)?.values,
        },
        MethodArg::Negmulti if kind == Kind::Win => win_probs_negmulti(&game, &budget)?.values,
        MethodArg::Sumbeta if kind == Kind::Win => win_probs_sum_beta(&game, &budget)?.values,
        MethodArg::Inclexcl if kind == Kind::Last => {
            last_probs_inclusion_exclusion(&game, &budget)?.values
        }
        MethodArg::Negmulti | MethodArg::Sumbeta => return Err(wrong_kind("win")),
        MethodArg::Inclexcl => return Err(wrong_kind("last-place")),
        MethodArg::Quad => {
            report.input("tol", a.tol);
            let cfg = QuadConfig::default().with_tol(a.tol);
            let p = probs_quad(&game, kind, &cfg)?;
            report.error_bound_or_stderr = Some(p.error_bound);
            p.values
        }
        MethodArg::Mc => {
            let cfg = mc_config(&a.mc);
            report.input("samples", cfg.samples);
            report.input("seed", cfg.seed);
            report.input("mc_method", mc_name(cfg.method));
            let est = mc_estimate(&game, &cfg)?;
            let (hat, se) = match kind {
                Kind::Win => (est.win_hat, est.stderr_win),
                Kind::Last => (est.last_hat, est.stderr_last),
            };
            report.error_bound_or_stderr = Some(se.iter().fold(0.0f64, |m, &s| m.max(s)));
            report.error_label = "max standard error";
            report.reals(kind_label(kind), &hat);
            report.reals("Standard error", &se);
            let (f, d) = settings(&a.out, 6);
            return Ok((report, f, d));
        }
    };
    report.reals(kind_label(kind), &values);
    let (f, d) = settings(&a.out, 6);
    Ok((report, f, d))
}

fn mc_name(m: McMethod) -> &'static str {
    match m {
        McMethod::Walk => "walk",
        McMethod::GammaRace => "gamma",
    }
}

fn dice(a: DiceArgs) -> Outcome {
    let game = dice_preset::<f64>();
    let budget = Budget::default();
    let mut report = OutputReport::new("dice", "dp");
    report.input("kind", format!("{:?}", a.kind).to_lowercase());
    game_rows(&mut report, &game);
    if a.kind != DiceKind::Last {
        report.reals(kind_label(Kind::Win), &win_probs_dp(&game, &budget)?.values);
    }
    if a.kind != DiceKind::Win {
        report.reals(kind_label(Kind::Last), &last_probs_dp(&game, &budget)?.values);
    }
    let (f, d) = settings(&a.out, 3);
    Ok((report, f, d))
}

fn simulate(a: SimulateArgs, err: &mut dyn Write) -> Outcome {
    let game = build_game(&a.game, err)?;
    let cfg = mc_config(&a.mc);
    let est = mc_estimate(&game, &cfg)?;
    let mut report = OutputReport::new("simulate", format!("mc-{}", mc_name(cfg.method)));
    report.input("goals", &a.game.goals);
    if let Some(p) = &a.game.probs {
        report.input("probs", p);
    }
    report.input("samples", cfg.samples);
    report.input("seed", cfg.seed);
    report.input("mc_method", mc_name(cfg.method));
    game_rows(&mut report, &game);
    report.reals(kind_label(Kind::Win), &est.win_hat);
    report.reals("Standard error (win)", &est.stderr_win);
    report.reals(kind_label(Kind::Last), &est.last_hat);
    report.reals("Standard error (last)", &est.stderr_last);
    let finish = match cfg.method {
        McMethod::Walk => "Mean finishing round",
        McMethod::GammaRace => "Mean finishing time",
    };
    report.reals(finish, &est.mean_finish);
    report.reals("Standard error (finish)", &est.stderr_finish);
    let worst = est
        .stderr_win
        .iter()
        .chain(&est.stderr_last)
        .fold(0.0f64, |m, &s| m.max(s));
    report.error_bound_or_stderr = Some(worst);
    report.error_label = "max standard error";
    let (f, d) = settings(&a.out, 6);
    Ok((report, f, d))
}

fn limit(a: LimitArgs) -> Outcome {
    let need = |v: &Option<Vec<f64>>, flag: &str| {
        v.clone()
            .ok_or_else(|| Failure::Usage(format!("this mode needs --{flag}")))
    };
    let mut report = OutputReport::new("limit", "");
    report.input(
        "mode",
        match a.mode {
            LimitMode::N1 => "n1",
            LimitMode::Nm => "nm",
            LimitMode::Prop => "prop",
            LimitMode::LastN1 => "last-n1",
            LimitMode::LastNm => "last-nm",
            LimitMode::LastProp => "last-prop",
        },
    );
    let quad = QuadConfig::default().with_tol(a.tol);
    let cfg = LimitConfig {
        quad,
        mc: McConfig {
            samples: a.samples,
            seed: a.seed,
            ..McConfig::default()
        },
    };
    let est: LimitEstimate<f64> = match a.mode {
        LimitMode::N1 | LimitMode::LastN1 => {
            let g = need(&a.goals, "goals")?;
            report.input("goals", &g);
            let value = if a.mode == LimitMode::N1 {
                limit_win_n1_inf(&g)?
            } else {
                limit_last_n1_inf(&g)?
            };
            LimitEstimate {
                value,
                error: 0.0,
                method: LimitMethod::Exact,
            }
        }
        LimitMode::Nm | LimitMode::LastNm => {
            let g = need(&a.goals, "goals")?;
            report.input("goals", &g);
            if g.len() >= 3 {
                report.input("samples", a.samples);
                report.input("seed", a.seed);
            }
            if a.mode == LimitMode::Nm {
                limit_win_nm_inf(&g, &cfg)?
            } else {
                limit_last_nm_inf(&g, &cfg)?
            }
        }
        LimitMode::Prop | LimitMode::LastProp => {
            let al = need(&a.alphas, "alphas")?;
            report.input("alphas", &al);
            let props = ProportionVector::new(al)?;
            if a.mode == LimitMode::Prop {
                limit_win_proportional(&props, &quad)?
            } else {
                limit_last_proportional(&props, &quad)?
            }
        }
    };
    report.method = match est.method {
        LimitMethod::Exact => "exact",
        LimitMethod::Quadrature => "quad",
        LimitMethod::MonteCarlo => "mc",
    }
    .to_string();
    report.reals("Limit", &[est.value]);
    if est.method != LimitMethod::Exact {
        report.error_bound_or_stderr = Some(est.error);
        if est.method == LimitMethod::MonteCarlo {
            report.error_label = "standard error";
        }
    }
    let (f, d) = settings(&a.out, 6);
    Ok((report, f, d))
}

fn solve(a: SolveArgs) -> Outcome {
    let m = a.goals.len();
    let target = match &a.target {
        Some(t) => t.clone(),
        None => vec![1.0 / m.max(1) as f64; m],
    };
    let kind = match a.map {
        KindArg::Win => Kind::Win,
        KindArg::Last => Kind::Last,
    };
    let cfg = QuadConfig::default();
    let r = solve_advancing(&a.goals, &target, kind, a.tol, &cfg)?;
    let mut report = OutputReport::new("solve", "newton-quad");
    report.input("goals", &a.goals);
    report.input("target", &target);
    report.input("map", if kind == Kind::Win { "win" } else { "last" });
    report.input("tol", a.tol);
    report.row("Player number", (1..=m as u64).map(Cell::Int).collect());
    report.row("Steps needed to win", a.goals.iter().map(|&g| Cell::Int(g)).collect());
    report.reals("Target", &target);
    report.reals("Advancing probability", &r.probs);
    report.row("Iterations", vec![Cell::Int(r.iterations as u64)]);
    report.error_bound_or_stderr = Some(r.residual_inf);
    report.error_label = "residual";
    let (f, d) = settings(&a.out, 6);
    Ok((report, f, d))
}

fn recurrence(a: RecurrenceArgs) -> Outcome {
    let probs = match (&a.probs, &a.goals) {
        (Some(p), _) => p.clone(),
        (None, Some(g)) => game_from_real_goals(g)?.probs().to_vec(),
        (None, None) => return Err(Failure::Usage("give --probs or --goals".into())),
    };
    let v = classify_recurrence(&probs)?;
    let mut report = OutputReport::new("recurrence", "geometric-mean");
    report.input("probs", &probs);
    report.reals("eta", &[v.eta]);
    let verdict = serde_json::to_value(v.verdict).expect("verdict serializes");
    report.row(
        "Verdict",
        vec![Cell::Text(verdict.as_str().unwrap_or_default().to_string())],
    );
    let (f, d) = settings(&a.out, 6);
    Ok((report, f, d))
}
