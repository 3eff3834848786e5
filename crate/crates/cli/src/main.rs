//! `sncipher`: format-preserving encryption with swap-or-not, bound
//! evaluation, round planning and the exact mixing check.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when parameters are
//! outside the domain the library accepts.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use swap_or_not::bounds::{self, BoundQuery, Model};
use swap_or_not::fpe::{self, FormatSpec, FpeCipher, Rounds};
use swap_or_not::mixing::{self, StartPolicy};
use swap_or_not::{Cipher, Domain, PrfKey, Tweak};

#[derive(Parser)]
#[command(name = "sncipher", version, about = "Swap-or-not small-domain cipher toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a digit string, preserving its format
    Encrypt(FpeArgs),
    /// Decrypt a digit string produced by `encrypt` with the same flags
    Decrypt(FpeArgs),
    /// Evaluate advantage bounds
    Bounds(BoundsArgs),
    /// Smallest round count meeting a target advantage
    Minrounds(MinRoundsArgs),
    /// Exact mixing check of the projected shuffle against the NCPA bound
    Mixlab(MixlabArgs),
    /// Regenerate (or check) the golden test vectors
    Vectors(VectorsArgs),
    /// Sample one shuffle of a small deck and print the final positions
    Shuffle(ShuffleArgs),
}

#[derive(Args)]
struct FpeArgs {
    /// 256-bit key as 64 hex characters
    #[arg(long)]
    key: String,
    #[arg(long, default_value_t = 10)]
    radix: u32,
    #[arg(long)]
    length: u32,
    /// Tweak as hex bytes; empty selects the untweaked cipher
    #[arg(long, default_value = "")]
    tweak: String,
    /// Round count, or `auto` to plan from the bounds
    #[arg(long, default_value = "auto")]
    rounds: String,
    /// Target CCA advantage for `--rounds auto`
    #[arg(long, default_value_t = fpe::DEFAULT_TARGET_ADV)]
    target_adv: f64,
    /// Query budget for `--rounds auto` (default floor(N/2))
    #[arg(long, value_parser = parse_big)]
    queries: Option<BigUint>,
    /// Use xor instead of modular addition (needs radix^length a power of two)
    #[arg(long)]
    xor: bool,
    input: String,
}

#[derive(Args)]
struct BoundsArgs {
    /// Domain size(s), comma separated; `a^b` is accepted
    #[arg(long = "N", value_delimiter = ',', required = true, value_parser = parse_big)]
    n: Vec<BigUint>,
    /// Round count(s): total rounds for CCA models, passes for `thorp`
    #[arg(long, value_delimiter = ',', required = true)]
    rounds: Vec<u32>,
    /// Query budget(s)
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_big)]
    q: Vec<BigUint>,
    /// ncpa, cca, ncpa-tweak, cca-tweak or thorp
    #[arg(long, default_value = "cca", value_parser = parse_model)]
    model: Model,
    /// Emit `N,rounds,q,model,advantage` rows
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct MinRoundsArgs {
    #[arg(long = "N", value_parser = parse_big)]
    n: BigUint,
    /// Query budget (default floor(N/2))
    #[arg(long, value_parser = parse_big)]
    q: Option<BigUint>,
    #[arg(long, default_value_t = fpe::DEFAULT_TARGET_ADV)]
    target_adv: f64,
    #[arg(long, default_value = "cca", value_parser = parse_model)]
    model: Model,
}

#[derive(Args)]
struct MixlabArgs {
    #[arg(long, default_value_t = 3)]
    min_n: u128,
    #[arg(long, default_value_t = 8)]
    max_n: u128,
    #[arg(long, default_value_t = 3)]
    max_q: usize,
    #[arg(long, default_value_t = 12)]
    max_r: u32,
    /// Check every starting tuple while the support has at most this many
    /// tuples; larger supports use the start (0, 1, ..., q-1)
    #[arg(long, default_value_t = 120)]
    all_starts_upto: usize,
    /// Emit `law,N,q,r,tvd,bound,pass` rows
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct VectorsArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare against an existing file instead of printing
    #[arg(long, conflicts_with = "out")]
    check: Option<PathBuf>,
}

#[derive(Args)]
struct ShuffleArgs {
    #[arg(long = "N")]
    n: u128,
    #[arg(long)]
    rounds: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    xor: bool,
    /// Also confirm that the cipher under the same randomness agrees
    #[arg(long)]
    verify: bool,
}

fn parse_big(s: &str) -> Result<BigUint, String> {
    let s = s.trim().replace('_', "");
    if let Some((base, exp)) = s.split_once('^') {
        let base: BigUint = base.parse().map_err(|e| format!("bad base {base:?}: {e}"))?;
        let exp: u32 = exp.parse().map_err(|e| format!("bad exponent {exp:?}: {e}"))?;
        Ok(base.pow(exp))
    } else {
        s.parse().map_err(|e| format!("bad integer {s:?}: {e}"))
    }
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: swap_or_not::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<swap_or_not::Error> for Failure {
    fn from(e: swap_or_not::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = match cli.command {
        Command::Encrypt(a) => fpe_cmd(a, true),
        Command::Decrypt(a) => fpe_cmd(a, false),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Minrounds(a) => minrounds_cmd(a),
        Command::Mixlab(a) => mixlab_cmd(a),
        Command::Vectors(a) => vectors_cmd(a),
        Command::Shuffle(a) => shuffle_cmd(a),
    };
    match out {
        Ok(s) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn fpe_cmd(a: FpeArgs, encrypt: bool) -> CmdResult {
    let tweak = hex::decode(&a.tweak).map_err(|e| Failure::Usage(format!("--tweak: {e}")))?;
    let tweak = Tweak::new(tweak)?;
    let format = FormatSpec::new(a.radix, a.length)?;
    let rounds = match a.rounds.as_str() {
        "auto" => Rounds::Auto {
            target: a.target_adv,
            queries: a.queries,
        },
        r => Rounds::Fixed(
            r.parse()
                .map_err(|_| Failure::Usage(format!("--rounds: expected a number or auto, got {r:?}")))?,
        ),
    };
    let r = fpe::resolve_rounds(&format, &tweak, &rounds)?;
    let key = PrfKey::from_hex(&a.key)?;
    let cipher = FpeCipher::new(key, format, r, a.xor)?;
    let out = if encrypt {
        cipher.encrypt(&tweak, &a.input)?
    } else {
        cipher.decrypt(&tweak, &a.input)?
    };
    Ok(format!("{out}\n"))
}

fn bounds_cmd(a: BoundsArgs) -> CmdResult {
    let mut out = String::new();
    if a.csv {
        out.push_str(bounds::CSV_HEADER);
        out.push('\n');
    }
    for n in &a.n {
        for &r in &a.rounds {
            for q in &a.q {
                let query = BoundQuery::new(n.clone(), r, q.clone(), a.model);
                let adv = query.evaluate()?;
                if a.csv {
                    out.push_str(&query.csv_row(&adv));
                } else {
                    out.push_str(&adv.to_sci_string());
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}

fn minrounds_cmd(a: MinRoundsArgs) -> CmdResult {
    let q = a
        .q
        .unwrap_or_else(|| (&a.n / 2u8).max(BigUint::from(1u8)));
    let r = bounds::min_rounds(&a.n, &q, a.target_adv, a.model)?;
    Ok(format!("{r}\n"))
}

fn mixlab_cmd(a: MixlabArgs) -> CmdResult {
    if a.min_n > a.max_n {
        return Err(Failure::Usage("--min-n exceeds --max-n".into()));
    }
    let rows = mixing::validate_grid(
        a.min_n,
        a.max_n,
        a.max_q,
        a.max_r,
        StartPolicy::AllUpTo(a.all_starts_upto),
    )?;
    let mut out = String::new();
    if a.csv {
        out.push_str(mixing::GRID_CSV_HEADER);
        out.push('\n');
    }
    for row in &rows {
        if a.csv {
            out.push_str(&row.csv_row());
        } else {
            out.push_str(&row.csv_row().replace(',', "\t"));
        }
        out.push('\n');
    }
    let failures = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} grid points, {failures} violations", rows.len());
    Ok(out)
}

fn vectors_cmd(a: VectorsArgs) -> CmdResult {
    let text = fpe::render_golden_file(&fpe::golden_vectors()?);
    if let Some(path) = a.check {
        let stored = fs::read_to_string(&path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        if stored != text {
            return Err(Failure::Domain(format!(
                "{} differs from the regenerated vectors",
                path.display()
            )));
        }
        return Ok(format!("{}: ok\n", path.display()));
    }
    if let Some(path) = a.out {
        fs::write(&path, &text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(String::new());
    }
    Ok(text)
}

fn shuffle_cmd(a: ShuffleArgs) -> CmdResult {
    let domain = if a.xor {
        if !a.n.is_power_of_two() {
            return Err(Failure::Domain(format!("xor needs a power of two, got {}", a.n)));
        }
        Domain::xor_bits(a.n.trailing_zeros())?
    } else {
        Domain::mod_add(a.n)?
    };
    let sample = mixing::shuffle_sample(domain, a.rounds, a.seed)?;
    if a.verify {
        let cipher = Cipher::new(domain, sample.round_material())?;
        let t = Tweak::empty();
        for (card, &pos) in sample.positions.iter().enumerate() {
            if cipher.encipher(&t, card as u128)? != pos {
                return Err(Failure::Domain(format!("cipher disagrees with shuffle at card {card}")));
            }
        }
    }
    let line: Vec<String> = sample.positions.iter().map(u128::to_string).collect();
    Ok(format!("{}\n", line.join(" ")))
}
