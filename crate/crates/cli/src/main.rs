use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cyclofav::bounds::{self, lam_leung_check};
use cyclofav::cyclo::{divisor_profile, good_bad_split_with_ceiling, SPLIT_DEGREE_CEILING};
use cyclofav::favard::{self, CantorProductSpec};
use cyclofav::multiset::{Multiset, NonnegMultiset};
use cyclofav::slv::{self, SlvCertificate};
use cyclofav::{constructions, sums, Error, Rational};

#[derive(Parser)]
#[command(name = "cyclofav", version, about = "Cyclotomic divisibility, SLV certificates and Favard length experiments")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Divisor profile S_A, EXP and the good/bad cyclotomic split.
    Profile(ProfileArgs),
    /// Lower bounds on |A|.
    Bound(BoundArgs),
    /// Build an SLV set and its certificate.
    Slv(SlvArgs),
    /// Re-check a certificate file.
    Verify(VerifyArgs),
    /// Enumerate and classify vanishing sums of roots of unity.
    Census(CensusArgs),
    /// Favard length table of a product Cantor set.
    Favard(FavardArgs),
    /// Generate example multisets.
    Construct(ConstructArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Multiset JSON file (`-` for stdin).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Copriming modulus; defaults to |A|².
    #[arg(long = "L")]
    l: Option<u64>,
    /// Degree ceiling for the cyclotomic split.
    #[arg(long, env = "CYCLOFAV_MAX_SPLIT_DEGREE", default_value_t = SPLIT_DEGREE_CEILING)]
    max_degree: usize,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["lam_leung", "two_prime", "multi_prime", "small_card"])))]
struct BoundArgs {
    /// Is k a nonnegative combination of the primes?
    #[arg(long)]
    lam_leung: bool,
    /// |A| ≥ p^{E_p} from divisors p^α q^β.
    #[arg(long)]
    two_prime: bool,
    /// |A| ≥ ∏ primes from Φ_{m·p} divisors.
    #[arg(long)]
    multi_prime: bool,
    /// A prime p with p^{E_p} < |A| for |A| ≤ 10.
    #[arg(long)]
    small_card: bool,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    primes: Vec<u64>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    /// Divisors m_j for --two-prime; defaults to the profile's members.
    #[arg(long, value_delimiter = ',')]
    divisors: Vec<u64>,
    #[arg(long = "L")]
    l: Option<u64>,
}

#[derive(Args)]
struct SlvArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long = "L")]
    l: Option<u64>,
    /// Splitting prime; defaults to the admissible prime with least p^E.
    #[arg(long)]
    prime: Option<u64>,
    /// Target λ as `n/d`; defaults to a rational inside (|A|^{-1/E}, 1/p).
    #[arg(long)]
    lambda: Option<Rational>,
    /// Write the certificate here.
    #[arg(long)]
    emit_cert: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate JSON file.
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    kmax: usize,
    /// Write one JSON object per sum to this file.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long, env = "CYCLOFAV_MAX_CENSUS_STATES", default_value_t = sums::CENSUS_STATE_CEILING)]
    max_states: u128,
}

#[derive(Args)]
struct FavardArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,3")]
    a: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0,3")]
    b: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    n_min: u32,
    #[arg(long, default_value_t = 6)]
    n_max: u32,
    /// Target quadrature error bound.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, env = "CYCLOFAV_MAX_NODES", default_value_t = 1 << 22)]
    max_nodes: usize,
    #[arg(long, env = "CYCLOFAV_MAX_POINTS", default_value_t = favard::POINT_CEILING)]
    max_points: usize,
    /// Whitespace-separated columns for gnuplot instead of CSV.
    #[arg(long)]
    plot_data: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    TwoScale,
    LongFiber,
    ThreePrime,
    ManyPrimes,
    CuboidOrder,
    Xi,
    Rp,
    Rpkrq,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    example: Example,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    r: Option<u64>,
    #[arg(long)]
    p2: Option<u64>,
    #[arg(long)]
    q2: Option<u64>,
    #[arg(long)]
    exp: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<u32>,
    #[arg(long)]
    alpha: Option<u32>,
    #[arg(long)]
    beta: Option<u32>,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    x: u64,
    #[arg(long, value_delimiter = ',')]
    choices: Vec<u64>,
    /// Write the multiset here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A command result: JSON for `--json`, text otherwise.
struct Report {
    json: Value,
    text: String,
    /// Set when the run found a theorem-contradicting instance.
    falsified: Option<String>,
}

impl Report {
    fn new(json: Value, text: String) -> Self {
        Report { json, text, falsified: None }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ModulusMismatch(..) => "modulus_mismatch",
        Error::NotADivisor(..) => "not_a_divisor",
        Error::NotDivisible(_) => "not_divisible",
        Error::CardinalityDivisible { .. } => "cardinality_divisible",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Precondition(_) => "precondition",
        Error::Guard(_) => "guard",
        Error::Parse(_) => "parse",
        Error::Falsified(_) => "falsified",
        Error::Rejected(_) => "rejected",
        Error::Internal(_) => "internal",
    }
}

fn read_source(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn read_multiset(path: &Path) -> anyhow::Result<Multiset> {
    let text = read_source(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing multiset {}", path.display()))
}

fn nonneg(m: Multiset) -> Result<NonnegMultiset, Error> {
    NonnegMultiset::try_from(m)
}

fn default_l(a: &Multiset, l: Option<u64>) -> u64 {
    l.unwrap_or_else(|| {
        let c = a.total_weight().unsigned_abs();
        c * c
    })
}

fn need<T>(v: Option<T>, name: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required")))
}

fn run_profile(args: &ProfileArgs) -> anyhow::Result<Report> {
    let a = read_multiset(&args.input.input)?;
    let l = default_l(&a, args.l);
    let profile = divisor_profile(&a, l)?;
    let split = good_bad_split_with_ceiling(&a, l, args.max_degree)?;
    let mut text = format!("|A| = {}, L = {l}\nS_A = {:?}\ns_A = {}\n", profile.cardinality(), profile.members(), profile.lcm());
    for p in profile.primes() {
        text += &format!("EXP({p}) = {:?}\n", profile.exponent_set(p));
    }
    text += &format!("good = {:?}\nbad = {:?}\n", split.good, split.bad);
    Ok(Report::new(json!({ "profile": profile, "split": split }), text))
}

fn run_bound(args: &BoundArgs) -> anyhow::Result<Report> {
    if args.lam_leung {
        let k = need(args.k, "k")?;
        if args.primes.is_empty() {
            return Err(Error::InvalidArgument("--primes is required".into()).into());
        }
        let coeffs = lam_leung_check(k, &args.primes);
        let text = match &coeffs {
            Some(c) => format!("{k} = Σ c_j p_j with c = {c:?}"),
            None => format!("{k} is not representable over {:?}", args.primes),
        };
        return Ok(Report::new(
            json!({ "k": k, "primes": args.primes, "representable": coeffs.is_some(), "coefficients": coeffs }),
            text,
        ));
    }
    let path = need(args.input.as_ref(), "input")?;
    let a = read_multiset(path)?;
    let l = default_l(&a, args.l);
    let na = nonneg(a.clone())?;
    if args.small_card {
        let profile = divisor_profile(&a, l)?;
        let split = bounds::small_card_split(&na, &profile)?;
        let candidates = bounds::split_candidates(&profile);
        let text = match &split {
            Some(s) => format!("p = {} with E = {}; p^E < {}", s.prime, s.exponent_count, na.total_weight()),
            None => "no prime p with p | s for all s ∈ S_A and p^E < |A|".to_string(),
        };
        return Ok(Report::new(json!({ "split": split, "candidates": candidates }), text));
    }
    let report = if args.two_prime {
        match (args.p, args.q) {
            (Some(p), Some(q)) => {
                let divisors = if args.divisors.is_empty() {
                    divisor_profile(&a, l)?.members().to_vec()
                } else {
                    args.divisors.clone()
                };
                bounds::two_prime_bound(&na, p, q, &divisors)?
            }
            _ => bounds::two_prime_bound_from_profile(&na, &divisor_profile(&a, l)?)?,
        }
    } else {
        bounds::multi_prime_bound(&na, need(args.m, "m")?, &args.primes)?
    };
    let text = format!(
        "claimed |A| ≥ {}, |A| = {}, satisfied = {}",
        report.claimed, report.cardinality, report.satisfied
    );
    let mut out = Report::new(serde_json::to_value(&report)?, text);
    if !report.satisfied {
        out.falsified = Some(format!("bound {} exceeds |A| = {}", report.claimed, report.cardinality));
    }
    Ok(out)
}

fn run_slv(args: &SlvArgs) -> anyhow::Result<Report> {
    let a = read_multiset(&args.input.input)?;
    let l = default_l(&a, args.l);
    let profile = divisor_profile(&a, l)?;
    let p = match args.prime {
        Some(p) => p,
        None => slv::choose_prime(&profile)
            .ok_or_else(|| Error::Precondition("no prime divides every member of S_A".into()))?,
    };
    let e = profile.exponent_count(p);
    let lambda = match &args.lambda {
        Some(x) => x.clone(),
        None => slv::default_lambda(profile.cardinality(), p, e)?,
    };
    let cert = slv::build_gamma_a(&profile, p, &lambda)?;
    slv::verify(&cert)?;
    if let Some(path) = &args.emit_cert {
        fs::write(path, serde_json::to_string_pretty(&cert)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let above = slv::exceeds_inverse_cardinality(&cert.measure, cert.cardinality);
    let text = format!(
        "p = {p}, E = {e}, λ = {lambda}\nclusters: {}\nmeasure = {} (≈ {:.6}) > target {}\nmeasure > 1/|A| = 1/{}: {above}\nseparation = {} (≈ {:.3e})",
        cert.clusters
            .iter()
            .map(|c| format!("{:?} Q={} T={}", c.members, c.modulus, c.max_cofactor))
            .collect::<Vec<_>>()
            .join("; "),
        cert.measure,
        cert.measure.to_f64(),
        cert.target,
        cert.cardinality,
        cert.separation,
        cert.separation.to_f64(),
    );
    Ok(Report::new(
        json!({
            "prime": p,
            "exponent_count": e,
            "lambda": lambda,
            "measure": cert.measure,
            "target": cert.target,
            "separation": cert.separation,
            "exceeds_inverse_cardinality": above,
            "certificate": args.emit_cert,
        }),
        text,
    ))
}

fn run_verify(args: &VerifyArgs) -> anyhow::Result<Report> {
    let text = read_source(&args.cert)?;
    let cert: SlvCertificate = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("certificate: {e}")))?;
    slv::verify(&cert)?;
    Ok(Report::new(
        json!({ "valid": true, "measure": cert.measure, "separation": cert.separation }),
        format!("certificate valid: measure {} > {}, separation {}", cert.measure, cert.target, cert.separation),
    ))
}

fn run_census(args: &CensusArgs) -> anyhow::Result<Report> {
    let entries = sums::census_with_ceiling(args.n, args.kmax, args.max_states)?;
    if let Some(path) = &args.jsonl {
        let mut body = String::new();
        for e in &entries {
            body += &serde_json::to_string(e)?;
            body.push('\n');
        }
        fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    let table = sums::census_table(&entries);
    let mut text = format!("N = {}, weight ≤ {} (up to translation)\nweight  count  label\n", args.n, args.kmax);
    for (w, labels) in &table {
        for (label, count) in labels {
            text += &format!("{w:>6}  {count:>5}  {label}\n");
        }
    }
    let unclassified = entries.iter().filter(|e| e.minimal && e.template.is_none() && e.weight <= 10).count();
    let mut out = Report::new(json!({ "N": args.n, "kmax": args.kmax, "table": table }), text);
    if unclassified > 0 {
        out.falsified = Some(format!("{unclassified} minimal sums of weight ≤ 10 match no template"));
    }
    Ok(out)
}

fn run_favard(args: &FavardArgs) -> anyhow::Result<Report> {
    let spec = CantorProductSpec::new(&args.a, &args.b)?;
    let points = (spec.scale() as u128).checked_pow(args.n_max).unwrap_or(u128::MAX);
    if points > args.max_points as u128 {
        return Err(Error::Guard(format!("L^n = {points} points exceeds {}", args.max_points)).into());
    }
    let rows = favard::favard_table(&spec, args.n_min..=args.n_max, args.tol, args.max_nodes)?;
    let mut text = if args.plot_data {
        "# n fav error_bound loglog_slope\n".to_string()
    } else {
        "n,fav,error_bound,loglog_slope\n".to_string()
    };
    for row in &rows {
        let e = &row.estimate;
        let slope = row.loglog_slope.map(|s| format!("{s:.6}")).unwrap_or_default();
        if args.plot_data {
            let slope = if slope.is_empty() { "NaN".to_string() } else { slope };
            text += &format!("{} {:.9} {:.3e} {slope}\n", e.n, e.value, e.error_bound);
        } else {
            text += &format!("{},{:.9},{:.3e},{slope}\n", e.n, e.value, e.error_bound);
        }
    }
    let text = text.trim_end().to_string();
    Ok(Report::new(json!({ "a": spec.digits_a(), "b": spec.digits_b(), "L": spec.scale(), "rows": rows }), text))
}

fn run_construct(args: &ConstructArgs) -> anyhow::Result<Report> {
    let m = match args.example {
        Example::TwoScale => constructions::two_scale(need(args.p, "p")?, need(args.q, "q")?, need(args.exp, "exp")?)?,
        Example::LongFiber => constructions::long_fiber(
            need(args.p, "p")?,
            need(args.q, "q")?,
            &args.alphas,
            need(args.alpha, "alpha")?,
            need(args.beta, "beta")?,
        )?,
        Example::ThreePrime => constructions::three_prime(need(args.p, "p")?, need(args.q, "q")?, need(args.r, "r")?)?,
        Example::ManyPrimes => constructions::one_scale_many_primes(
            need(args.p, "p")?,
            need(args.q, "q")?,
            need(args.p2, "p2")?,
            need(args.q2, "q2")?,
        )?,
        Example::CuboidOrder => constructions::cuboid_order_example(),
        Example::Xi => sums::xi(args.n.unwrap_or(30))?.into(),
        Example::Rp => sums::construct_rp(need(args.n, "N")?, need(args.p, "p")?, args.x)?.into(),
        Example::Rpkrq => {
            sums::construct_rpkrq(need(args.n, "N")?, need(args.p, "p")?, need(args.q, "q")?, args.x, &args.choices)?.into()
        }
    };
    let body = serde_json::to_string(&m)?;
    if let Some(path) = &args.output {
        fs::write(path, body.clone() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Report::new(serde_json::to_value(&m)?, body))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Profile(a) => run_profile(a),
        Command::Bound(a) => run_bound(a),
        Command::Slv(a) => run_slv(a),
        Command::Verify(a) => run_verify(a),
        Command::Census(a) => run_census(a),
        Command::Favard(a) => run_favard(a),
        Command::Construct(a) => run_construct(a),
    };
    match result {
        Ok(report) => {
            if cli.json {
                println!("{}", report.json);
            } else {
                println!("{}", report.text);
            }
            match report.falsified {
                Some(msg) => {
                    eprintln!("{}", json!({ "error": "falsified", "message": msg }));
                    ExitCode::from(2)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(err) => {
            let (kind, code) = match err.downcast_ref::<Error>() {
                Some(e) if e.is_falsification() => (error_kind(e), 2),
                Some(e) => (error_kind(e), 1),
                None => ("io", 1),
            };
            eprintln!("{}", json!({ "error": kind, "message": format!("{err:#}") }));
            ExitCode::from(code)
        }
    }
}
