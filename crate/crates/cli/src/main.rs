//! `gearsynth` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 resource cap exceeded,
//! 3 a verification ran and failed.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use gearsynth::cost::{self, AncillaMode};
use gearsynth::exact::{eval_circuit, exact_synthesize, GateWord};
use gearsynth::expr::parse_angle;
use gearsynth::float_synth::{synthesize_floating, FloatOptions, MantissaSource};
use gearsynth::gearbox::{composed_angle, Angle, GearboxNode};
use gearsynth::report::{self, Fig6Source, Figure, FigureParams};
use gearsynth::ring::{RingElement, Root2Scaled};
use gearsynth::search::{self, SearchCaps};
use gearsynth::sim::verify_gearbox;

#[derive(Parser, Debug)]
#[command(name = "gearsynth", version, about = "Small-rotation synthesis with gearbox circuits over Clifford+T")]
struct Cli {
    /// Master seed for every Monte-Carlo run.
    #[arg(long, global = true, env = "GEARSYNTH_SEED", default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// key = value file with search caps (max_tcount, max_pairlist, jobs).
    #[arg(long, global = true, env = "GEARSYNTH_CONFIG")]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ring arithmetic helpers.
    #[command(subcommand)]
    Ring(RingCmd),
    /// Exact and floating-point synthesis.
    #[command(subcommand)]
    Synth(SynthCmd),
    /// Minimal off-diagonal entries at a given optimal T-count.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Monte-Carlo T-count of gearbox processes.
    #[command(subcommand)]
    Cost(CostCmd),
    /// Check gearbox formulas against the state-vector simulator.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Fit cost = a·log2(1/theta) + b to a two-column CSV.
    Fit(FitArgs),
    /// Regenerate tables and figure data as CSV.
    #[command(subcommand)]
    Tables(TablesCmd),
}

#[derive(Subcommand, Debug)]
enum RingCmd {
    /// sde of |x|² for x = (a + bω + cω² + dω³)/√2^kappa, or of (A + B√2)/√2^m.
    Sde {
        /// a,b,c,d of a Z[ω] numerator.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "root2")]
        entry: Option<Vec<i64>>,
        /// A,B of a Z[√2] numerator.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        root2: Option<Vec<i64>>,
        /// Denominator exponent (kappa for --entry, m for --root2).
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
}

#[derive(Subcommand, Debug)]
enum SynthCmd {
    /// T-optimal exact synthesis of the unitary of a word.
    Exact {
        /// Gate word, e.g. "H T H S T".
        #[arg(long)]
        word: String,
    },
    /// Floating-point synthesis plan for e^{-i·angle·X}.
    Float(FloatArgs),
}

#[derive(Args, Debug)]
struct FloatArgs {
    /// Angle: decimal, pi/2^k, pi/k, a*10^-b or scientific.
    #[arg(long)]
    angle: String,
    /// Relative mantissa precision.
    #[arg(long, conflicts_with = "digits")]
    delta: Option<f64>,
    /// Decimal digits of mantissa precision (delta = 10^-digits).
    #[arg(long)]
    digits: Option<u32>,
    /// Monte-Carlo trials for the T-count (0 = skip).
    #[arg(long, default_value_t = 0)]
    trials: usize,
    /// Use this mantissa word instead of the search oracle.
    #[arg(long, conflicts_with = "ideal")]
    um: Option<String>,
    /// Use the exact ideal mantissa magnitude (no circuit).
    #[arg(long)]
    ideal: bool,
    /// T-count cap of the mantissa oracle.
    #[arg(long, default_value_t = 12)]
    max_t: usize,
}

#[derive(Subcommand, Debug)]
enum SearchCmd {
    /// One CSV row n_t,abs_u,a,b,c,d,kappa.
    MinOffdiag {
        #[arg(long)]
        tcount: u32,
        /// Initial bound on |u|² (default: the n_t − 1 result).
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Records of the minimal |u| for n_t = 1..=max.
    Table2 {
        #[arg(long, default_value_t = 23)]
        max_tcount: u32,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Online,
    Offline,
}

#[derive(Subcommand, Debug)]
enum CostCmd {
    /// n_d of the composed gearbox C∘d with base angle theta0.
    Composed {
        #[arg(long, default_value = "pi/8")]
        theta0: String,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// T-count of a plan in gearbox grammar, e.g. "GB(H Z T H, C*2(H T H))".
    Plan {
        #[arg(long)]
        circuit: String,
        #[arg(long, default_value_t = 40_000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Mode::Online)]
        ancilla: Mode,
    },
    /// Flat gearbox of d identical leaves with off-diagonal magnitude j.
    Gearbox {
        #[arg(long)]
        j: f64,
        /// T-count of one leaf.
        #[arg(long, default_value_t = 1)]
        leaf_t: u64,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Gearbox {
        #[arg(long)]
        circuit: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV of (theta, cost) points. A header naming `theta` and `mean_t` or
    /// `cost` selects those columns, otherwise the first two are used. Lines
    /// starting with '#' are skipped.
    #[arg(long)]
    input: PathBuf,
    /// Keep only rows whose `series` column equals this value.
    #[arg(long)]
    series: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fig6From {
    Search,
    Paper,
}

#[derive(Subcommand, Debug)]
enum TablesCmd {
    Table1 {
        #[arg(long, default_value_t = 40_000)]
        trials: usize,
    },
    Fig1(FigArgs),
    Fig3(FigArgs),
    Fig4(FigArgs),
    Fig6 {
        #[arg(long, default_value_t = 30)]
        max_tcount: u32,
        #[arg(long, value_enum, default_value_t = Fig6From::Search)]
        source: Fig6From,
    },
}

#[derive(Args, Debug)]
struct FigArgs {
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    /// Largest composition depth (fig1).
    #[arg(long, default_value_t = 9)]
    max_d: u32,
    /// Largest j of S_j (fig3).
    #[arg(long, default_value_t = 15)]
    max_j: usize,
    /// Largest exponent weight (fig4).
    #[arg(long, default_value_t = 256)]
    max_weight: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    max_tcount: Option<u32>,
    max_pairlist: Option<usize>,
    jobs: Option<usize>,
}

struct Effective {
    seed: u64,
    jobs: usize,
    caps: SearchCaps,
}

fn load_config(cli: &Cli) -> Result<Effective> {
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<ConfigFile>(&text)
                .map_err(|e| gearsynth::Error::Parse(format!("config {}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let mut caps = SearchCaps::default();
    if let Some(m) = file.max_tcount {
        caps.max_tcount = m;
    }
    if let Some(m) = file.max_pairlist {
        caps.max_pairlist = m;
    }
    let jobs = cli.jobs.or(file.jobs).unwrap_or(0);
    caps.jobs = jobs;
    Ok(Effective { seed: cli.seed, jobs, caps })
}

fn csv_stats_row(theta: &Angle, st: &cost::CostStats) -> String {
    format!(
        "{:.6e},{:.6},{:.6},{:.6},{},{},{}",
        theta.radians,
        theta.log2_inv,
        st.mean,
        st.variance,
        st.percentile(2.5).unwrap_or(f64::NAN),
        st.percentile(97.5).unwrap_or(f64::NAN),
        st.analytic_mean.map_or(String::new(), |v| format!("{v:.6}"))
    )
}

const STATS_HEADER: &str = "theta,log2_inv_theta,mean_t,var_t,p2_5,p97_5,analytic_mean";

/// Output text and the exit code it implies (0, or 3 for a failed check).
fn run(cli: &Cli, eff: &Effective) -> Result<(String, u8)> {
    let seed = eff.seed;
    let out = match &cli.cmd {
        Command::Ring(RingCmd::Sde { entry, root2, k }) => match (entry, root2) {
            (Some(e), None) if e.len() == 4 => {
                let x = RingElement::new(e[0], e[1], e[2], e[3], *k);
                let a = x.abs_sq();
                format!("x = {x}\n|x|^2 = ({},{})/√2^{}\nsde = {}\n", a.a, a.b, a.m, a.sde())
            }
            (None, Some(r)) if r.len() == 2 => {
                let x = Root2Scaled::new(r[0], r[1], *k);
                format!("value = ({},{})/√2^{}\nsde = {}\n", x.a, x.b, x.m, x.sde())
            }
            _ => {
                return Err(
                    gearsynth::Error::InvalidInput("give exactly one of --entry a,b,c,d or --root2 A,B".into()).into()
                )
            }
        },
        Command::Synth(SynthCmd::Exact { word }) => {
            let w = GateWord::parse(word)?;
            let u = eval_circuit(&w);
            let s = exact_synthesize(&u)?;
            let ok = eval_circuit(&s).equals_up_to_phase(&u);
            let j = serde_json::json!({
                "input": w.to_string(),
                "input_tcount": w.tcount(),
                "output": s.to_string(),
                "output_tcount": s.tcount(),
                "sde": u.sde(),
                "equal_up_to_phase": ok,
            });
            format!("{}\n", serde_json::to_string_pretty(&j)?)
        }
        Command::Synth(SynthCmd::Float(a)) => {
            let phi = parse_angle(&a.angle)?;
            let delta = match (a.delta, a.digits) {
                (Some(d), _) => d,
                (None, Some(n)) => 10f64.powi(-(n as i32)),
                (None, None) => return Err(gearsynth::Error::InvalidInput("give --delta or --digits".into()).into()),
            };
            let mantissa = if a.ideal {
                MantissaSource::Ideal
            } else if let Some(w) = &a.um {
                MantissaSource::Fixed(GateWord::parse(w)?)
            } else {
                MantissaSource::Oracle { max_t: a.max_t }
            };
            let opts = FloatOptions { mantissa, trials: a.trials, seed };
            let (plan, stats) = synthesize_floating(phi, delta, &opts)?;
            let j = serde_json::json!({ "plan": plan, "cost": stats });
            format!("{}\n", serde_json::to_string_pretty(&j)?)
        }
        Command::Search(SearchCmd::MinOffdiag { tcount, eps }) => {
            let r = search::min_offdiag(*tcount, *eps, &eff.caps)?;
            format!("{}\n{}\n", search::CSV_HEADER, r.csv_row())
        }
        Command::Search(SearchCmd::Table2 { max_tcount }) => {
            let rows = search::table2(*max_tcount, &eff.caps)?;
            let mut s = format!("{}\n", search::CSV_HEADER);
            for r in rows.iter().filter(|r| r.record) {
                if let Some(b) = &r.best {
                    s.push_str(&b.csv_row());
                    s.push('\n');
                }
            }
            s
        }
        Command::Cost(CostCmd::Composed { theta0, d, trials }) => {
            let t0 = Angle::from_radians(parse_angle(theta0)?);
            let st = cost::simulate_composed(&t0, *d, *trials, seed)?;
            format!("{STATS_HEADER}\n{}\n", csv_stats_row(&composed_angle(&t0, *d)?, &st))
        }
        Command::Cost(CostCmd::Plan { circuit, trials, ancilla }) => {
            let node = GearboxNode::parse(circuit)?;
            let mode = match ancilla {
                Mode::Online => AncillaMode::Online,
                Mode::Offline => AncillaMode::Offline,
            };
            let st = cost::simulate_plan(&node, *trials, seed, mode)?;
            let theta = node.success_angle()?;
            let j = serde_json::json!({
                "circuit": node.to_string(),
                "angle": theta,
                "static_tcount": node.static_tcount(),
                "static_tdepth": node.static_tdepth(),
                "success_prob": node.success_prob()?,
                "mode": mode,
                "stats": st,
            });
            format!("{}\n", serde_json::to_string_pretty(&j)?)
        }
        Command::Cost(CostCmd::Gearbox { j, leaf_t, d, trials }) => {
            let st = cost::simulate_direct_gearbox(*j, *leaf_t, *d, *trials, seed)?;
            format!("{STATS_HEADER}\n{}\n", csv_stats_row(&cost::direct_gearbox_angle(*j, *d)?, &st))
        }
        Command::Verify(VerifyCmd::Gearbox { circuit, tol }) => {
            let node = GearboxNode::parse(circuit)?;
            let v = verify_gearbox(&node)?;
            let pass = v.max_deviation() <= *tol;
            let s = format!(
                "{} max_deviation={:.3e} success_prob={:.12} formula={:.12} output_dev={:.3e} failure_dev={:.3e}\n",
                if pass { "PASS" } else { "FAIL" },
                v.max_deviation(),
                v.success_prob,
                v.success_prob_formula,
                v.output_dev,
                v.failure_dev
            );
            return Ok((s, if pass { 0 } else { 3 }));
        }
        Command::Fit(FitArgs { input, series }) => {
            let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
            let pts = fit_points(&text, series.as_deref())?;
            let f = gearsynth::fit::fit_log_model(&pts)?;
            format!("a,b,ci_lo,ci_hi,n\n{:.6},{:.6},{:.6},{:.6},{}\n", f.a, f.b, f.ci_a.0, f.ci_a.1, f.n)
        }
        Command::Tables(TablesCmd::Table1 { trials }) => report::emit_table1(seed, *trials)?,
        Command::Tables(t) => {
            let (which, p) = match t {
                TablesCmd::Fig1(a) => (Figure::Fig1, fig_params(a, eff)),
                TablesCmd::Fig3(a) => (Figure::Fig3, fig_params(a, eff)),
                TablesCmd::Fig4(a) => (Figure::Fig4, fig_params(a, eff)),
                TablesCmd::Fig6 { max_tcount, source } => {
                    let mut caps = eff.caps.clone();
                    caps.max_tcount = caps.max_tcount.min(*max_tcount);
                    let p = FigureParams {
                        seed,
                        caps,
                        fig6_source: match source {
                            Fig6From::Search => Fig6Source::Search,
                            Fig6From::Paper => Fig6Source::Paper,
                        },
                        ..FigureParams::default()
                    };
                    (Figure::Fig6, p)
                }
                TablesCmd::Table1 { .. } => unreachable!("handled above"),
            };
            report::emit_figure_data(which, &p)?
        }
    };
    Ok((out, 0))
}

fn fig_params(a: &FigArgs, eff: &Effective) -> FigureParams {
    FigureParams {
        trials: a.trials,
        seed: eff.seed,
        max_d: a.max_d,
        max_j: a.max_j,
        max_weight: a.max_weight,
        caps: eff.caps.clone(),
        fig6_source: Fig6Source::Search,
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<gearsynth::Error>() {
        Some(gearsynth::Error::Resource(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = load_config(&cli).and_then(|eff| {
        eprintln!(
            "# effective config: seed={} jobs={} max_tcount={} max_pairlist={}",
            eff.seed, eff.jobs, eff.caps.max_tcount, eff.caps.max_pairlist
        );
        search::with_jobs(eff.jobs, || run(&cli, &eff))?
    });
    match result {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, &text).with_context(|| format!("writing {}", p.display())),
                None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Reads (theta, cost) pairs, picking columns by header name when there is one.
fn fit_points(text: &str, series: Option<&str>) -> gearsynth::Result<Vec<(f64, f64)>> {
    let parse_err = |i: usize, m: &str| gearsynth::Error::Parse(format!("line {}: {m}", i + 1));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let (mut xi, mut yi, mut si) = (0, 1, None);
    if let Some(&(_, first)) = lines.peek() {
        let cols: Vec<&str> = first.split(',').map(str::trim).collect();
        if cols.iter().any(|c| !c.is_empty() && c.parse::<f64>().is_err()) {
            let find = |names: &[&str]| cols.iter().position(|c| names.contains(c));
            xi = find(&["theta"]).unwrap_or(0);
            yi = find(&["mean_t", "cost"]).unwrap_or(1);
            si = find(&["series"]);
            lines.next();
        }
    }
    if series.is_some() && si.is_none() {
        return Err(gearsynth::Error::Parse("--series needs a header with a series column".into()));
    }
    let mut pts = Vec::new();
    for (i, line) in lines {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if let (Some(want), Some(si)) = (series, si) {
            if cols.get(si) != Some(&want) {
                continue;
            }
        }
        let (Some(x), Some(y)) = (cols.get(xi), cols.get(yi)) else {
            return Err(parse_err(i, "missing column"));
        };
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(x), Ok(y)) => pts.push((x, y)),
            _ => return Err(parse_err(i, "not numeric")),
        }
    }
    Ok(pts)
}
