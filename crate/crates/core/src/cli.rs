//! The `construct-audit` command line.
//!
//! Exit codes: 0 pass, 1 substantive failure, 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::audit::{run_audit, AuditConfig, CriterionKind, InputFormat, MetricChoice, TestKind};
use crate::constructions::{
    alpha_counterexample, eqodds_amplifying_counterexample, optimal_dem_parity_model, pp_adversarial_model,
    xor_example, ypz_example,
};
use crate::criteria::Worldview;
use crate::distances::{emd_cost, MetricSupport};
use crate::error::{AuditError, Result};
use crate::harness::{replay, run_all_with, run_suite_with, SuiteConfig, TheoremId, DEFAULT_KERNELS};
use crate::io::{joint_to_json, law_from_json, read_joint_path};
use crate::probability::{Distribution, Label, Support};
use crate::scalar::{parse_rational, Mode, Rational, Scalar};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "construct-audit",
    version,
    about = "Audit classifiers for disparity amplification in construct space"
)]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Arithmetic mode; CONSTRUCT_AUDIT_MODE overrides it.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run empirical tests and amplification criteria on a dataset or distribution file.
    Audit(AuditArgs),
    /// Earth mover's distance between two laws (JSON `{"label": p}` files).
    Distance(DistanceArgs),
    /// Write a generated distribution file.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Run the randomized theorem suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    pub input: PathBuf,
    /// `csv` or `dist-json`; inferred from the extension by default.
    #[arg(long, value_parser = parse_format)]
    pub format: Option<InputFormat>,
    /// Comma-separated subset of dp, eo, pp, alpha, misclass, ppct.
    #[arg(long, value_delimiter = ',', value_parser = parse_test)]
    pub tests: Vec<TestKind>,
    #[arg(long, default_value = "0", value_parser = parse_rational)]
    pub tau: Rational,
    #[arg(long, value_parser = parse_rational)]
    pub alpha: Option<Rational>,
    /// Ratio threshold of the p%-rule.
    #[arg(long, default_value = "0.8", value_parser = parse_rational)]
    pub p: Rational,
    #[arg(long, default_value = "1")]
    pub favorable: String,
    /// wae, wysiwyg or alpha:<a>.
    #[arg(long, value_parser = parse_worldview)]
    pub worldview: Option<Worldview>,
    /// Comma-separated subset of categorical, general.
    #[arg(long, value_delimiter = ',', value_parser = parse_criterion)]
    pub criteria: Vec<CriterionKind>,
    /// indicator, numeric, or a metric JSON file.
    #[arg(long, default_value = "indicator", value_parser = parse_metric)]
    pub metric: MetricChoice,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// indicator, numeric, or a metric JSON file.
    #[arg(long, default_value = "indicator", value_parser = parse_metric)]
    pub metric: MetricChoice,
}

#[derive(Debug, Subcommand)]
pub enum ConstructKind {
    /// Demographic-parity model of maximal construct accuracy for a base file.
    OptimalDp {
        #[arg(long)]
        base: PathBuf,
    },
    /// Predictive-parity adversary on binary `Yo`.
    PpAdversarial {
        /// Pr[Yo=1 | Z=0].
        #[arg(long, value_parser = parse_rational)]
        yo0: Rational,
        /// Pr[Yo=1 | Z=1].
        #[arg(long, value_parser = parse_rational)]
        yo1: Rational,
        #[arg(long, value_parser = parse_rational)]
        epsilon: Rational,
    },
    /// Equalized odds without WYSIWYG, with amplification.
    Eqodds,
    /// α-Hybrid(α) table passing the α'-test with amplification.
    Alpha {
        #[arg(long, value_parser = parse_rational)]
        alpha: Rational,
        #[arg(long, value_parser = parse_rational)]
        alpha_prime: Rational,
    },
    /// Yp = Yc XOR Z.
    Xor,
    /// Yp = Z.
    Ypz,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// A theorem id (T1..T11, L1, TBL) or `all`.
    #[arg(long, default_value = "all")]
    pub theorem: String,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Models sampled per base in T2 and T7.
    #[arg(long, default_value_t = DEFAULT_KERNELS)]
    pub kernels: usize,
    /// Rerun the single trial with this seed (from a reported counterexample).
    #[arg(long)]
    pub replay: Option<u64>,
}

fn parse_mode(s: &str) -> Result<Mode> {
    s.parse()
}

fn parse_format(s: &str) -> Result<InputFormat> {
    s.parse()
}

fn parse_test(s: &str) -> Result<TestKind> {
    s.parse()
}

fn parse_criterion(s: &str) -> Result<CriterionKind> {
    s.parse()
}

fn parse_worldview(s: &str) -> Result<Worldview> {
    s.parse()
}

fn parse_metric(s: &str) -> Result<MetricChoice> {
    s.parse()
}

/// The flag value unless `CONSTRUCT_AUDIT_MODE` is set.
fn resolve_mode(flag: Option<Mode>) -> Result<Option<Mode>> {
    Ok(Mode::from_env()?.or(flag))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json value") + "\n"
}

/// Parses `args` (program name first), runs the command, returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("construct-audit: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let mode = resolve_mode(cli.mode)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Audit(a) => {
            let cfg = AuditConfig {
                input: a.input.clone(),
                format: a.format,
                tests: a.tests.clone(),
                tau: a.tau.clone(),
                alpha: a.alpha.clone(),
                p: a.p.clone(),
                favorable: Label::parse(&a.favorable),
                worldview: a.worldview.clone(),
                criteria: a.criteria.clone(),
                metric: a.metric.clone(),
                mode,
                output: cli.out.clone(),
                seed: cli.seed,
            };
            let report = run_audit(&cfg)?;
            emit(out, &report.to_json())?;
            Ok(report.exit_code())
        }
        Command::Distance(d) => {
            let text = match mode.unwrap_or(Mode::Rational) {
                Mode::Rational => distance::<Rational>(d)?,
                Mode::Float => distance::<f64>(d)?,
            };
            emit(out, &(text + "\n"))?;
            Ok(EXIT_PASS)
        }
        Command::Construct { kind } => {
            let text = match mode.unwrap_or(Mode::Rational) {
                Mode::Rational => construct::<Rational>(kind, cli.seed)?,
                Mode::Float => construct::<f64>(kind, cli.seed)?,
            };
            emit(out, &text)?;
            Ok(EXIT_PASS)
        }
        Command::Verify(v) => verify(v, mode.unwrap_or(Mode::Rational), cli.seed, out),
    }
}

fn distance<T: Scalar>(d: &DistanceArgs) -> Result<String> {
    let p: Distribution<T> = law_from_json(&std::fs::read_to_string(&d.a)?)?;
    let q: Distribution<T> = law_from_json(&std::fs::read_to_string(&d.b)?)?;
    let support = p.support().union(q.support());
    let ms = match &d.metric {
        MetricChoice::Indicator => MetricSupport::indicator(support),
        MetricChoice::Numeric => MetricSupport::numeric(support)?,
        MetricChoice::File(path) => MetricSupport::from_json(&std::fs::read_to_string(path)?)?,
    };
    Ok(emd_cost(&p, &q, &ms)?.render())
}

fn binary_margin<T: Scalar>(p_one: &Rational) -> Result<Distribution<T>> {
    let p = T::from_ratio(p_one);
    Distribution::new(Support::binary(), vec![T::one() - p.clone(), p])
}

fn construct<T: Scalar>(kind: &ConstructKind, seed: u64) -> Result<String> {
    let dist = match kind {
        ConstructKind::OptimalDp { base } => optimal_dem_parity_model(&read_joint_path::<T>(base)?)?.dist,
        ConstructKind::PpAdversarial { yo0, yo1, epsilon } => {
            let margins = [binary_margin::<T>(yo0)?, binary_margin::<T>(yo1)?];
            pp_adversarial_model(&margins, &T::from_ratio(epsilon))?.dist
        }
        ConstructKind::Eqodds => eqodds_amplifying_counterexample(seed)?,
        ConstructKind::Alpha { alpha, alpha_prime } => alpha_counterexample(alpha, alpha_prime, seed)?,
        ConstructKind::Xor => xor_example(),
        ConstructKind::Ypz => ypz_example(),
    };
    Ok(joint_to_json(&dist))
}

fn verify(v: &VerifyArgs, mode: Mode, seed: u64, out: Option<&Path>) -> Result<i32> {
    let cfg = SuiteConfig::new(v.trials, seed).mode(mode).kernels(v.kernels);
    let ids: Vec<TheoremId> =
        if v.theorem.eq_ignore_ascii_case("all") { TheoremId::ALL.to_vec() } else { vec![v.theorem.parse()?] };
    if let Some(trial_seed) = v.replay {
        if ids.len() != 1 {
            return Err(AuditError::InvalidParameter("--replay needs a single --theorem".into()));
        }
        let outcome = replay(ids[0], trial_seed, &cfg);
        let value = match &outcome {
            Ok(()) => json!({ "theorem": ids[0], "seed": trial_seed, "mode": mode, "pass": true }),
            Err(f) => json!({
                "theorem": ids[0],
                "seed": trial_seed,
                "mode": mode,
                "pass": false,
                "message": f.message,
                "distribution": f.distribution,
            }),
        };
        emit(out, &pretty(&value))?;
        return Ok(if outcome.is_ok() { EXIT_PASS } else { EXIT_FAIL });
    }
    let reports = if ids.len() == TheoremId::ALL.len() {
        run_all_with(&cfg)?
    } else {
        ids.iter().map(|id| run_suite_with(*id, &cfg)).collect::<Result<Vec<_>>>()?
    };
    for r in &reports {
        eprintln!(
            "{:<4} {} trials={} failures={} {} ms",
            r.theorem.name(),
            if r.passed() { "PASS" } else { "FAIL" },
            r.trials,
            r.failures,
            r.wall_time_ms
        );
    }
    emit(out, &pretty(&serde_json::to_value(&reports)?))?;
    Ok(if reports.iter().all(|r| r.passed()) { EXIT_PASS } else { EXIT_FAIL })
}
