//! `idex`: run exchange scenarios, analyze the payoff game, and walk through
//! proxy re-encryption.
//!
//! Exit codes: 0 success, 2 usage error, 3 runtime failure.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use idex_core::algebra::{pair, seeded_rng, GroupParams};
use idex_core::game_analysis::{analyze, GameParams};
use idex_core::pre::{decrypt_level2, encrypt_with_randomness, keygen, reencrypt, rekeygen};
use idex_core::sim_harness::{run_scenario, BuyerStrategy, ScenarioConfig, ScenarioError, ScenarioResult, SellerStrategy};

#[derive(Debug, Parser)]
#[command(name = "idex", version, about = "Fair identity-data exchange simulator")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the payoff matrix, equilibria and deposit conditions.
    Analyze {
        /// Price of the data.
        #[arg(long)]
        c: u64,
        /// Seller deposit.
        #[arg(long)]
        ds: u64,
        /// Buyer deposit.
        #[arg(long)]
        db: u64,
        /// Value of the data to the seller.
        #[arg(long)]
        vs: u64,
        /// Value of the data to the buyer.
        #[arg(long)]
        vb: u64,
    },
    /// Run one scenario described by a TOML config file.
    Run {
        config: PathBuf,
        /// Where to write the contract event trace (default: <config>.trace).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the seller strategy.
        #[arg(long)]
        seller: Option<SellerArg>,
        /// Override the buyer strategy.
        #[arg(long)]
        buyer: Option<BuyerArg>,
    },
    /// Step through keygen, encrypt, rekeygen, reencrypt and decrypt.
    DemoPre {
        /// Prime group order.
        #[arg(long, default_value_t = 11)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[allow(clippy::enum_variant_names)] // mirrors SellerStrategy
enum SellerArg {
    HonestKey,
    CorruptKey,
    WithholdKey,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BuyerArg {
    ProveIfAble,
    NeverProve,
}

impl From<SellerArg> for SellerStrategy {
    fn from(a: SellerArg) -> Self {
        match a {
            SellerArg::HonestKey => SellerStrategy::HonestKey,
            SellerArg::CorruptKey => SellerStrategy::CorruptKey,
            SellerArg::WithholdKey => SellerStrategy::WithholdKey,
        }
    }
}

impl From<BuyerArg> for BuyerStrategy {
    fn from(a: BuyerArg) -> Self {
        match a {
            BuyerArg::ProveIfAble => BuyerStrategy::ProveIfAble,
            BuyerArg::NeverProve => BuyerStrategy::NeverProve,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too, with exit code 0
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Analyze { c, ds, db, vs, vb } => cmd_analyze(GameParams::new(c, ds, db, vs, vb), cli.format),
        Command::Run {
            config,
            trace,
            seed,
            seller,
            buyer,
        } => cmd_run(&config, trace, seed, seller, buyer, cli.format),
        Command::DemoPre { q, seed } => cmd_demo_pre(q, seed, cli.format),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_analyze(params: GameParams, format: Format) -> Result<String, CliError> {
    let report = analyze(&params);
    match format {
        Format::Text => Ok(report.render_text()),
        Format::Structured => to_json(&report),
    }
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    config: PathBuf,
    trace_file: PathBuf,
    #[serde(flatten)]
    result: &'a ScenarioResult,
}

fn default_trace_path(config: &Path) -> PathBuf {
    let mut name = config.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".trace");
    config.with_file_name(name)
}

fn cmd_run(
    config_path: &Path,
    trace: Option<PathBuf>,
    seed: Option<u64>,
    seller: Option<SellerArg>,
    buyer: Option<BuyerArg>,
    format: Format,
) -> Result<String, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", config_path.display())))?;
    let mut config: ScenarioConfig =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", config_path.display())))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(s) = seller {
        config.strategies.seller = s.into();
    }
    if let Some(b) = buyer {
        config.strategies.buyer = b.into();
    }
    let result = run_scenario(&config, config.strategies.seller, config.strategies.buyer).map_err(|e| match e {
        ScenarioError::Config(m) => CliError::Usage(m),
        other => CliError::Runtime(other.to_string()),
    })?;
    let trace_file = trace.unwrap_or_else(|| default_trace_path(config_path));
    fs::write(&trace_file, &result.trace)
        .map_err(|e| CliError::Runtime(format!("cannot write trace {}: {e}", trace_file.display())))?;

    match format {
        Format::Structured => to_json(&RunReport {
            config: config_path.to_path_buf(),
            trace_file,
            result: &result,
        }),
        Format::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "scenario: seller={} buyer={} seed={}\n",
                result.seller_strategy, result.buyer_strategy, result.seed
            ));
            out.push_str(&format!("phase: {}\n", result.phase));
            if let Some(f) = result.forfeiture {
                out.push_str(&format!("forfeiture: {f:?}\n"));
            }
            out.push_str(&format!("delivered: {}\n", result.delivered));
            out.push_str(&format!("proof submitted: {}\n", result.proof_submitted));
            if let Some(why) = &result.proof_failure {
                out.push_str(&format!("buyer proof failure: {why}\n"));
            }
            out.push_str(&format!("realized profile: {}\n", result.realized));
            for (name, p) in [("buyer", &result.buyer), ("seller", &result.seller)] {
                out.push_str(&format!(
                    "{name:<7} money {:>+6}  information {:>+6}  utility {:>+6}\n",
                    p.monetary, p.information, p.utility
                ));
            }
            out.push_str(&format!("sink    money {:>+6}\n", result.sink_delta));
            out.push_str(&format!("trace: {}\n", trace_file.display()));
            Ok(out)
        }
    }
}

#[derive(Debug, Serialize)]
struct DemoTranscript {
    q: u64,
    seed: u64,
    a: u64,
    b: u64,
    mu: u64,
    r: u64,
    level1: (u64, u64),
    rekey: u64,
    level2: (u64, u64),
    unblind: u64,
    recovered: u64,
    m_recovered: bool,
}

fn cmd_demo_pre(q: u64, seed: u64, format: Format) -> Result<String, CliError> {
    let params = GroupParams::setup(q).map_err(|e| CliError::Usage(e.to_string()))?;
    let runtime = |e: idex_core::pre::PreError| CliError::Runtime(e.to_string());
    let mut rng = seeded_rng(seed);
    let alice = keygen(&params, &mut rng);
    let bob = keygen(&params, &mut rng);
    let mu = params.random_exponent(&mut rng);
    let m = params.target_from_exponent(mu);
    let r = params.random_scalar(&mut rng);
    let ca = encrypt_with_randomness(&alice.pk, &m, &r).map_err(runtime)?;
    let rk = rekeygen(&alice.sk, &bob.pk).map_err(runtime)?;
    let cb = reencrypt(&ca, &rk).map_err(runtime)?;
    let got = decrypt_level2(&cb, &bob.sk).map_err(runtime)?;
    let unblind = cb
        .c2
        .pow(&bob.sk.inv().map_err(|e| CliError::Runtime(e.to_string()))?)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let z = pair(&params.generator(), &params.generator()).map_err(|e| CliError::Runtime(e.to_string()))?;
    let ok = got == m;

    let out = match format {
        Format::Structured => to_json(&DemoTranscript {
            q,
            seed,
            a: alice.sk.value(),
            b: bob.sk.value(),
            mu: mu.value(),
            r: r.value(),
            level1: (ca.c1.repr(), ca.c2.repr()),
            rekey: rk.rk.repr(),
            level2: (cb.c1.repr(), cb.c2.repr()),
            unblind: unblind.repr(),
            recovered: got.repr(),
            m_recovered: ok,
        })?,
        Format::Text => {
            let mut s = String::new();
            s.push_str(&format!("group: q = {q}, g = {}, Z = e(g, g) = {z}\n", params.generator()));
            s.push_str(&format!("keygen A: a = {}, pk_A = g^a = {}\n", alice.sk, alice.pk.0));
            s.push_str(&format!("keygen B: b = {}, pk_B = g^b = {}\n", bob.sk, bob.pk.0));
            s.push_str(&format!("message: m = Z^mu = {m}\n"));
            s.push_str(&format!("encrypt: r = {r}, C_a = (Z^r * m, g^(ra)) = ({}, {})\n", ca.c1, ca.c2));
            s.push_str(&format!("rekeygen: rk = pk_B^(1/a) = g^(b/a) = {}\n", rk.rk));
            s.push_str(&format!("reencrypt: C_b = (Z^r * m, e(g^(ra), rk)) = ({}, {})\n", cb.c1, cb.c2));
            s.push_str(&format!("decrypt: (Z^(rb))^(1/b) = {unblind}, m' = (Z^r * m) / Z^r = {got}\n"));
            s.push_str(&format!("m recovered: {ok}\n"));
            s
        }
    };
    if ok {
        Ok(out)
    } else {
        Err(CliError::Runtime(format!("{out}round trip failed")))
    }
}
