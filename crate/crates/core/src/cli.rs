//! Command-line runner.
//!
//! Every subcommand writes one CSV document, to `--output` or standard
//! output. The document starts with `# key = value` lines holding the fully
//! resolved configuration. Exit codes: 0 on success, 2 on usage or
//! configuration errors, 3 on numeric failures. `SEMCOMM_THREADS` bounds the
//! worker pool.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bottleneck::{
    count_statistic, factorization_check, first_draw_statistic, information_plane, sufficiency_check,
    PlanePoint, RelevanceProblem, SolverOptions, Sufficiency, SUFFICIENCY_TOL,
};
use crate::channel::FadingKind;
use crate::codec::{ChannelCode, SourceCodeKind, SyntacticCodec, DEFAULT_TAU};
use crate::config::{load_matrix, parse_statistic, EdgeFile, FedFile, LanguageConfig};
use crate::edgesim::{fedavg, sweep, FedRound, SweepPoint};
use crate::harness::{reference_language, simulate_arq, sweep_snr, ArqMetrics, LinkExperiment};
use crate::measures::MeasuresRow;
use crate::language::StochasticMapping;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "semcomm", version, about = "Semantic communication experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy decomposition and meaning-class coding rate of a language.
    Measures {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Semantic versus syntactic decoding across an SNR grid.
    LinkSim(LinkArgs),
    /// ARQ with semantic feedback versus ARQ with genie error detection.
    ArqSim {
        #[command(flatten)]
        link: LinkArgs,
        /// Retransmissions allowed per sentence.
        #[arg(long, default_value_t = 4)]
        max_retx: usize,
    },
    /// Information bottleneck over a joint table p(x, θ).
    IbSolve {
        /// Text matrix, one row of p(x, θ) per line.
        #[arg(long)]
        joint: PathBuf,
        #[arg(long = "z-card")]
        z_card: usize,
        /// One value or a comma-separated grid.
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long = "max-iter", default_value_t = 5000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sufficiency and factorization tests of a statistic.
    SuffCheck {
        #[arg(long)]
        joint: PathBuf,
        /// `identity`, `sum` (ones in the row index), `first` (lowest bit
        /// of the row index) or a file listing t(x) for each row.
        #[arg(long, default_value = "identity")]
        statistic: String,
        #[arg(long, default_value_t = SUFFICIENCY_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Drift-plus-penalty edge learning simulation over a (V, λ) grid.
    EdgeSim {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Federated averaging on quadratic device losses.
    FedSim {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LinkArgs {
    /// Grammar file; the built-in 64-sentence grammar when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated values or `start:stop:step`.
    #[arg(long = "snr-db", default_value = "-6:12:1", allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long, default_value = "none", value_parser = ["none", "rayleigh"])]
    fading: String,
    /// Bits per fade; one fade per sentence when absent.
    #[arg(long = "block-len")]
    block_len: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "source-code", default_value = "fixed")]
    source_code: String,
    #[arg(long = "channel-code", default_value = "none")]
    channel_code: String,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[command(flatten)]
    out: OutputArgs,
}

/// Parse `a,b,c` or `start:stop:step` (inclusive, within half a step).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::config(format!("`{t}` is not a number")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(Error::config("grid needs start ≤ stop and a positive step"));
            }
            let n = ((b - a) / step + 0.5).floor() as usize;
            (0..=n).map(|i| a + i as f64 * step).collect()
        }
        [_] => s.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::config(format!("cannot read grid `{s}`"))),
    };
    if grid.is_empty() {
        return Err(Error::config("empty grid"));
    }
    Ok(grid)
}

struct Csv {
    text: String,
}

impl Csv {
    fn empty() -> Self {
        Self { text: String::new() }
    }

    fn new(command: &str) -> Self {
        let mut c = Self::empty();
        c.meta("command", command);
        c
    }

    fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "# {key} = {value}");
    }

    fn meta_block(&mut self, prefix: &str, toml_text: &str) {
        for line in toml_text.lines().filter(|l| !l.trim().is_empty()) {
            let _ = writeln!(self.text, "# {prefix}{line}");
        }
    }

    fn row(&mut self, line: &str) {
        self.text.push_str(line);
        self.text.push('\n');
    }

    fn finish(self, out: &OutputArgs) -> Result<()> {
        match &out.output {
            Some(path) => std::fs::write(path, self.text)?,
            None => std::io::stdout().write_all(self.text.as_bytes())?,
        }
        Ok(())
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn path_meta(p: &Path) -> String {
    p.display().to_string()
}

fn measures(config: &Path, out: &OutputArgs) -> Result<()> {
    let (space, mapping) = match LanguageConfig::load(config)? {
        LanguageConfig::Space { space, mapping, .. } => (space, mapping),
        LanguageConfig::Grammar { language, .. } => {
            let k = language.len();
            (language.message_space()?, StochasticMapping::identity(k)?)
        }
    };
    let row = MeasuresRow::compute(&mapping, &space)?;
    let mut csv = Csv::new("measures");
    csv.meta("config", path_meta(config));
    csv.meta("messages", space.len());
    csv.meta("symbols", mapping.num_symbols());
    csv.row(MeasuresRow::HEADER);
    csv.row(&row.to_csv());
    csv.finish(out)
}

fn link_experiment(a: &LinkArgs) -> Result<(LinkExperiment, Csv)> {
    let (language, kb_destination) = match &a.config {
        None => (reference_language(), None),
        Some(p) => match LanguageConfig::load(p)? {
            LanguageConfig::Grammar { language, kb_destination } => (language, kb_destination),
            LanguageConfig::Space { .. } => {
                return Err(Error::config("link experiments need a grammar file (`vocabulary`, `slots`)"))
            }
        },
    };
    let source: SourceCodeKind = a.source_code.parse()?;
    let channel: ChannelCode = a.channel_code.parse()?;
    let codec = SyntacticCodec::for_language(&language, source, channel)?;
    let fading = match a.fading.as_str() {
        "rayleigh" => FadingKind::RayleighBlock,
        _ => FadingKind::None,
    };
    let snr_db = parse_grid(&a.snr_db)?;
    let mut csv = Csv::empty();
    csv.meta("config", a.config.as_deref().map_or("built-in grammar".into(), path_meta));
    csv.meta("sentences", language.len());
    csv.meta("snr_db", fmt_list(&snr_db));
    csv.meta("fading", &a.fading);
    csv.meta(
        "block_len",
        a.block_len.map_or("sentence".to_string(), |b| b.to_string()),
    );
    csv.meta("seed", a.seed);
    csv.meta("source_code", source);
    csv.meta("channel_code", channel);
    csv.meta("tau", a.tau);
    csv.meta("trials", a.trials);
    let exp = LinkExperiment {
        language,
        kb_destination,
        codec,
        fading,
        block_len: a.block_len,
        snr_db,
        trials: a.trials,
        seed: a.seed,
        tau: a.tau,
    };
    exp.validate()?;
    Ok((exp, csv))
}

fn with_command(command: &str, body: Csv) -> Csv {
    let mut csv = Csv::new(command);
    csv.text.push_str(&body.text);
    csv
}

fn link_sim(a: &LinkArgs) -> Result<()> {
    let (exp, body) = link_experiment(a)?;
    let mut csv = with_command("link-sim", body);
    for line in sweep_snr(&exp)? {
        csv.row(&line);
    }
    csv.finish(&a.out)
}

fn arq_sim(a: &LinkArgs, max_retx: usize) -> Result<()> {
    let (exp, body) = link_experiment(a)?;
    let mut csv = with_command("arq-sim", body);
    csv.meta("max_retx", max_retx);
    csv.row(ArqMetrics::HEADER);
    for m in simulate_arq(&exp, max_retx)? {
        csv.row(&m.to_csv());
    }
    csv.finish(&a.out)
}

#[allow(clippy::too_many_arguments)]
fn ib_solve(
    joint: &Path,
    z_card: usize,
    beta: &[f64],
    restarts: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    out: &OutputArgs,
) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::config("tol must be positive"));
    }
    let problem = RelevanceProblem::new(load_matrix(joint)?, z_card, beta[0])?;
    let opts = SolverOptions {
        restarts,
        tol,
        max_iter,
        seed,
    };
    let points = information_plane(&problem, beta, &opts)?;
    let mut csv = Csv::new("ib-solve");
    csv.meta("joint", path_meta(joint));
    csv.meta("z_card", z_card);
    csv.meta("beta", fmt_list(beta));
    csv.meta("restarts", restarts);
    csv.meta("tol", tol);
    csv.meta("max_iter", max_iter);
    csv.meta("seed", seed);
    csv.row(PlanePoint::HEADER);
    for p in points {
        csv.row(&p.to_csv());
    }
    csv.finish(out)
}

fn suff_check(joint: &Path, statistic: &str, tol: f64, out: &OutputArgs) -> Result<()> {
    let table = load_matrix(joint)?;
    let n = table.len();
    let bits = || -> Result<usize> {
        if n.is_power_of_two() {
            Ok(n.trailing_zeros() as usize)
        } else {
            Err(Error::config("`sum` and `first` need 2^n rows"))
        }
    };
    let t = match statistic {
        "identity" => (0..n).collect(),
        "sum" => count_statistic(bits()?),
        "first" => first_draw_statistic(bits()?),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config(format!("cannot read statistic file {path}: {e}")))?;
            parse_statistic(&text)?
        }
    };
    let s = sufficiency_check(&table, &t, tol)?;
    let factorizes = factorization_check(&table, &t)?;
    let mut csv = Csv::new("suff-check");
    csv.meta("joint", path_meta(joint));
    csv.meta("statistic", statistic);
    csv.meta("tol", tol);
    csv.row(&format!("{},factorizes", Sufficiency::HEADER));
    csv.row(&format!("{},{factorizes}", s.to_csv()));
    csv.finish(out)
}

fn edge_sim(config: Option<&Path>, seeds: usize, seed: u64, out: &OutputArgs) -> Result<()> {
    let file = match config {
        Some(p) => EdgeFile::load(p)?,
        None => EdgeFile::default(),
    };
    let (vs, lambdas) = (file.v_values(), file.lambda_values());
    let points = sweep(&file.model, &vs, &lambdas, seeds, seed)?;
    let mut csv = Csv::new("edge-sim");
    csv.meta("config", config.map_or("defaults".into(), path_meta));
    csv.meta("seeds", seeds);
    csv.meta("seed", seed);
    csv.meta("v_values", fmt_list(&vs));
    csv.meta("lambda_values", fmt_list(&lambdas));
    let model = toml::to_string(&file.model).map_err(|e| Error::config(e.to_string()))?;
    csv.meta_block("model.", &model);
    csv.row(SweepPoint::HEADER);
    for p in points {
        csv.row(&p.to_csv());
    }
    csv.finish(out)
}

fn fed_sim(config: &Path, out: &OutputArgs) -> Result<()> {
    let (cfg, init) = FedFile::load(config)?;
    let result = fedavg(&cfg, &init)?;
    let mut csv = Csv::new("fed-sim");
    csv.meta("config", path_meta(config));
    csv.meta("weights", fmt_list(&cfg.weights()));
    csv.meta("curvatures", fmt_list(&cfg.curvatures));
    csv.meta("step_size", cfg.step_size);
    csv.meta("rounds", cfg.rounds);
    csv.meta("init", fmt_list(&init));
    csv.meta("optimum", fmt_list(&cfg.optimum()));
    csv.meta("converged", result.converged);
    csv.row(FedRound::HEADER);
    for r in &result.trace {
        csv.row(&r.to_csv());
    }
    csv.finish(out)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Measures { config, out } => measures(&config, &out),
        Command::LinkSim(a) => link_sim(&a),
        Command::ArqSim { link, max_retx } => arq_sim(&link, max_retx),
        Command::IbSolve {
            joint,
            z_card,
            beta,
            restarts,
            tol,
            max_iter,
            seed,
            out,
        } => ib_solve(&joint, z_card, &beta, restarts, tol, max_iter, seed, &out),
        Command::SuffCheck {
            joint,
            statistic,
            tol,
            out,
        } => suff_check(&joint, &statistic, tol, &out),
        Command::EdgeSim {
            config,
            seeds,
            seed,
            out,
        } => edge_sim(config.as_deref(), seeds, seed, &out),
        Command::FedSim { config, out } => fed_sim(&config, &out),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SEMCOMM_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::config(format!("SEMCOMM_THREADS=`{v}` is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))
}

/// Run the command line and return the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| dispatch(cli)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("semcomm: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-6:12:1").unwrap().len(), 19);
        assert_eq!(parse_grid("0,3.5").unwrap(), vec![0.0, 3.5]);
        assert_eq!(parse_grid("2").unwrap(), vec![2.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_cli(["semcomm", "bogus"]), 2);
        assert_eq!(run_cli(["semcomm", "--help"]), 0);
        assert_eq!(run_cli(["semcomm", "measures", "--config", "/nonexistent/lang.toml"]), 2);
    }
}
