//! `isolab`: JSON front end to the isolab library.
//!
//! Exit codes: 0 on success, 1 on malformed input, 2 when an operation
//! reports an error (printed as `{"error": code, "witness": ...}`).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isolab::bch::{self, bch_series, denominator_profile, group_mul, lattice_closure_check, random_lattice_vector};
use isolab::dieudonne::pdiv_dimension;
use isolab::linalg::{vec_from_json, vec_to_json};
use isolab::perfected::{
    rigidity_check, slope_exponents, MembershipMethod, OrdinaryPolynomial, PerfectedSeries, PoweredBlock,
    RestrictedParams,
};
use isolab::roots::{GroupType, RootDatumWithCochar};
use isolab::{DieudonneLieAlgebra, Error, FieldSpec, Isocrystal, SlopeMultiset};
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "isolab",
    version,
    about = "Exact computations with F-isocrystals, Dieudonné-Lie algebras and perfected series"
)]
struct Cli {
    /// Default p-adic precision N for inputs that do not state one.
    #[arg(long, global = true, env = "ISOLAB_PRECISION", default_value_t = 32)]
    precision: u32,
    /// Report slopes with the opposite sign (λ ↦ −λ), also for --nu input.
    #[arg(long, global = true)]
    classical: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// JSON input file; an object {"batch": [...]} runs every entry.
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct Datum {
    #[arg(long = "type")]
    group: String,
    #[arg(long)]
    n: usize,
    /// Comma-separated rationals, e.g. 0,-1/2,-1/2,-1.
    #[arg(long, allow_hyphen_values = true)]
    nu: String,
}

#[derive(Subcommand)]
enum Command {
    /// Newton slopes of an isocrystal.
    Slopes(Input),
    /// Slope decomposition into isoclinic blocks.
    Split(Input),
    /// Internal Hom of {"y": iso, "z": iso}.
    Hom(Input),
    /// Bracket laws, lattice conditions and centrality of the minimal slope part.
    DlaCheck(Input),
    /// Lower central series of a Dieudonné-Lie algebra.
    Lcs(Input),
    /// Lyndon-basis coefficients of log(exp X · exp Y).
    BchTable {
        #[arg(long)]
        degree: usize,
    },
    /// Group law x·y on {"algebra", "x", "y"}.
    BchMul(Input),
    /// Whether the lattice is closed under the group law.
    LatticeClosure {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coefficient bound for random lattice vectors.
        #[arg(long, default_value_t = 3)]
        bound: i64,
    },
    /// Central-leaf dimension ⟨2ρ, ν⟩.
    Leafdim(Datum),
    /// Slopes of Lie U_ν from the roots.
    SlopeRoots {
        #[command(flatten)]
        datum: Datum,
        /// Also compute the adjoint isocrystal of the diagonal element over Q_p.
        #[arg(long)]
        adjoint_p: Option<u64>,
    },
    /// Nilpotency class of Lie U_ν.
    Nilclass(Datum),
    /// Compare p with the Coxeter number and the nilpotency class.
    CoxeterGate {
        #[command(flatten)]
        datum: Datum,
        #[arg(long)]
        p: u64,
    },
    /// Membership in the complete restricted perfection.
    PerfMember {
        #[command(flatten)]
        input: Input,
        /// s,r,n0
        #[arg(long)]
        params: String,
        #[arg(long, default_value = "both")]
        method: String,
    },
    /// Membership in the growth-bounded ring for (E, C, d).
    PerfEcd {
        #[command(flatten)]
        input: Input,
        #[arg(long = "E")]
        e: String,
        #[arg(long = "C")]
        c: String,
        #[arg(long, default_value = "0")]
        d: String,
    },
    /// Rigidity congruences on {"f", "g", "h", "r", "d", "powered_block"}.
    Rigidity(Input),
    /// Smallest (a, r, s) with a/r = mu1 and a/s = mu0.
    SlopeExponents {
        #[arg(long)]
        mu1: String,
        #[arg(long)]
        mu0: String,
    },
}

enum Failure {
    Malformed(String),
    Module(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Malformed(m) => Failure::Malformed(m),
            other => Failure::Module(other),
        }
    }
}

type Outcome = Result<Value, Failure>;

fn error_json(e: &Error) -> Value {
    let witness = match e {
        Error::DegreeTooLarge { requested, bound } => json!({"requested": requested, "bound": bound}),
        Error::DegreeBoundTooSmall { needed, bound } => json!({"needed": needed, "bound": bound}),
        Error::SlopeOrderViolated { mu0, mu1 } => json!({"mu0": mu0, "mu1": mu1}),
        Error::ResidueFieldTooSmall { required, available } => json!({"required": required, "available": available}),
        other => json!(other.to_string()),
    };
    json!({"error": e.code(), "witness": witness})
}

fn malformed_json(msg: &str) -> Value {
    json!({"error": "Malformed", "witness": msg})
}

fn rational(s: &str) -> Result<Rational64, Failure> {
    Ok(isolab::isocrystal::parse_rational64_str(s.trim())?)
}

fn rational_json(x: Rational64) -> Value {
    if x.is_integer() {
        json!(x.to_integer())
    } else {
        json!(x.to_string())
    }
}

fn read_json(path: &PathBuf) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

/// Runs `f` on the input, or on every entry of a batch in parallel.
/// Batch entries that fail are reported in place.
fn run_input<F>(input: &Input, f: F) -> Outcome
where
    F: Fn(&Value) -> Outcome + Sync,
{
    let v = read_json(&input.input)?;
    match v.get("batch").and_then(Value::as_array) {
        Some(items) => {
            let results: Vec<Value> = items
                .par_iter()
                .map(|item| match f(item) {
                    Ok(r) => r,
                    Err(Failure::Module(e)) => error_json(&e),
                    Err(Failure::Malformed(m)) => malformed_json(&m),
                })
                .collect();
            Ok(json!({"results": results}))
        }
        None => f(&v),
    }
}

struct Ctx {
    precision: u32,
    classical: bool,
}

impl Ctx {
    fn slopes(&self, s: &SlopeMultiset) -> Value {
        if self.classical {
            s.negated().to_json()
        } else {
            s.to_json()
        }
    }

    fn slope(&self, s: Rational64) -> String {
        if self.classical { -s } else { s }.to_string()
    }

    fn datum(&self, d: &Datum) -> Result<RootDatumWithCochar, Failure> {
        let group = GroupType::parse(&d.group)?;
        let mut nu = d.nu.split(',').map(rational).collect::<Result<Vec<_>, _>>()?;
        if self.classical {
            nu = nu.into_iter().map(|x| -x).collect();
            nu.sort_by(|a, b| b.cmp(a));
        }
        Ok(RootDatumWithCochar::new(group, d.n, nu)?)
    }

    fn dla(&self, v: &Value) -> Result<DieudonneLieAlgebra, Failure> {
        Ok(DieudonneLieAlgebra::from_json(v, self.precision)?)
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let ctx = Ctx { precision: cli.precision, classical: cli.classical };
    match &cli.command {
        Command::Slopes(input) => run_input(input, |v| {
            let iso = Isocrystal::from_json(v, ctx.precision)?;
            Ok(json!({"slopes": ctx.slopes(&iso.newton_slopes()?)}))
        }),
        Command::Split(input) => run_input(input, |v| {
            let iso = Isocrystal::from_json(v, ctx.precision)?;
            let blocks: Vec<Value> = iso
                .slope_split()?
                .iter()
                .map(|b| {
                    let mut j = b.to_json();
                    j["slope"] = json!(ctx.slope(b.slope));
                    j
                })
                .collect();
            Ok(json!({"blocks": blocks}))
        }),
        Command::Hom(input) => run_input(input, |v| {
            let part = |k: &str| v.get(k).ok_or_else(|| Failure::Malformed(format!("input needs {k:?}")));
            let y = Isocrystal::from_json(part("y")?, ctx.precision)?;
            let z = Isocrystal::from_json_with_spec(y.spec(), part("z")?)?;
            let hom = Isocrystal::internal_hom(&y, &z)?;
            Ok(json!({"hom": hom.to_json(), "slopes": ctx.slopes(&hom.newton_slopes()?)}))
        }),
        Command::DlaCheck(input) => run_input(input, |v| {
            let a = ctx.dla(v)?;
            let report = a.validate()?;
            let center = if report.bracket_laws_hold() {
                match a.minimal_slope_center_check() {
                    Ok(c) => c.to_json(),
                    Err(e) => error_json(&e),
                }
            } else {
                Value::Null
            };
            Ok(json!({"valid": report.all_ok(), "checks": report.to_json(), "center": center}))
        }),
        Command::Lcs(input) => run_input(input, |v| {
            let a = ctx.dla(v)?;
            let lcs = a.lower_central_series()?;
            Ok(json!({"series": lcs.to_json(), "dims": lcs.dims(), "class": a.nilpotency_class()?}))
        }),
        Command::BchTable { degree } => {
            let z = bch_series(*degree)?;
            let denoms: Vec<u64> = denominator_profile(*degree)?.into_iter().collect();
            let terms: Vec<Value> = z
                .terms()
                .iter()
                .map(|(w, c)| {
                    json!({
                        "word": bch::word_to_string(w),
                        "bracket": bch::bracketing(w),
                        "coeff": c.to_string(),
                    })
                })
                .collect();
            Ok(json!({"degree": degree, "terms": terms, "denominator_primes": denoms}))
        }
        Command::BchMul(input) => run_input(input, |v| {
            let a = ctx.dla(v.get("algebra").ok_or_else(|| Failure::Malformed("input needs \"algebra\"".into()))?)?;
            let vector = |k: &str| -> Result<_, Failure> {
                Ok(vec_from_json(a.spec(), v.get(k).ok_or_else(|| Failure::Malformed(format!("input needs {k:?}")))?)?)
            };
            let (x, y) = (vector("x")?, vector("y")?);
            if x.len() != a.rank() || y.len() != a.rank() {
                return Err(Failure::Module(Error::DimensionMismatch("vectors must match the algebra rank".into())));
            }
            let prod = group_mul(&a, &x, &y)?;
            Ok(json!({"product": vec_to_json(&prod), "class": a.nilpotency_class()?}))
        }),
        Command::LatticeClosure { input, samples, seed, bound } => run_input(input, |v| {
            let a = ctx.dla(v)?;
            let lat = a.lattice().ok_or(Error::MissingLattice)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pairs: Vec<_> = (0..*samples)
                .map(|_| (random_lattice_vector(lat, *bound, &mut rng), random_lattice_vector(lat, *bound, &mut rng)))
                .collect();
            Ok(lattice_closure_check(&a, &pairs)?.to_json())
        }),
        Command::Leafdim(d) => {
            let datum = ctx.datum(d)?;
            let ident = datum.dimension_identity()?;
            let pdiv = pdiv_dimension(&datum.slope_multiset()).ok().map(rational_json);
            Ok(json!({
                "dim": rational_json(ident.leaf_dimension),
                "in_pdiv_range": ident.in_pdiv_range,
                "pdiv_dimension": pdiv,
            }))
        }
        Command::SlopeRoots { datum, adjoint_p } => {
            let d = ctx.datum(datum)?;
            let mut out = json!({"slopes": ctx.slopes(&d.slope_multiset())});
            if let Some(p) = adjoint_p {
                let spec = FieldSpec::new(*p, 1, d.adjoint_working_precision().max(ctx.precision))?;
                let b = d.diagonal_b(&spec)?;
                out["adjoint_slopes"] = ctx.slopes(&d.adjoint_negative_slopes(&b)?);
            }
            Ok(out)
        }
        Command::Nilclass(d) => {
            let datum = ctx.datum(d)?;
            Ok(json!({"class": datum.unipotent_nilpotency()?, "lcs_dims": datum.unipotent_lcs_dims()?}))
        }
        Command::CoxeterGate { datum, p } => Ok(ctx.datum(datum)?.coxeter_gate(*p)?.to_json()),
        Command::PerfMember { input, params, method } => {
            let parts: Vec<u32> = params
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Malformed(format!("--params: {e}")))?;
            let [s, r, n0] = parts[..] else {
                return Err(Failure::Malformed("--params expects s,r,n0".into()));
            };
            let params = RestrictedParams::new(s, r, n0)?;
            let method = MembershipMethod::parse(method)?;
            run_input(input, |v| {
                let a = PerfectedSeries::from_json(v)?;
                let report = a.membership_restricted(params, method)?;
                let primary = report.definitional.as_ref().or(report.closed_form.as_ref()).expect("one method ran");
                let mut out = report.to_json();
                out["witness"] = primary.to_json()["witness"].clone();
                Ok(out)
            })
        }
        Command::PerfEcd { input, e, c, d } => {
            let (e, c, d) = (rational(e)?, rational(c)?, rational(d)?);
            run_input(input, |v| Ok(PerfectedSeries::from_json(v)?.membership_ecd(e, c, d)?.to_json()))
        }
        Command::Rigidity(input) => run_input(input, rigidity),
        Command::SlopeExponents { mu1, mu0 } => {
            let (a, r, s) = slope_exponents(rational(mu1)?, rational(mu0)?)?;
            Ok(json!({"a": a, "r": r, "s": s}))
        }
    }
}

fn rigidity(v: &Value) -> Outcome {
    let get = |k: &str| v.get(k).ok_or_else(|| Failure::Malformed(format!("input needs {k:?}")));
    let series = |k: &str| -> Result<Vec<PerfectedSeries>, Failure> {
        match v.get(k) {
            None => Ok(Vec::new()),
            Some(list) => list
                .as_array()
                .ok_or_else(|| Failure::Malformed(format!("{k:?} must be a list of series")))?
                .iter()
                .map(|s| PerfectedSeries::from_json(s).map_err(Failure::from))
                .collect(),
        }
    };
    let (g, h) = (series("g")?, series("h")?);
    let field = g
        .first()
        .or(h.first())
        .ok_or_else(|| Failure::Module(Error::Precondition("no series given".into())))?
        .field()
        .clone();
    let f = OrdinaryPolynomial::from_json(&field, get("f")?)?;
    let r = get("r")?.as_u64().ok_or_else(|| Failure::Malformed("\"r\" must be a positive integer".into()))? as u32;
    let d_seq: Vec<u64> = get("d")?
        .as_array()
        .and_then(|a| a.iter().map(Value::as_u64).collect())
        .ok_or_else(|| Failure::Malformed("\"d\" must be a list of nonnegative integers".into()))?;
    let powered = match v.get("powered_block").and_then(Value::as_str) {
        Some(s) => PoweredBlock::parse(s)?,
        None => PoweredBlock::G,
    };
    Ok(rigidity_check(&f, &g, &h, r, &d_seq, powered)?.to_json())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(v) => {
            println!("{v}");
            let failed =
                v.get("results").and_then(Value::as_array).is_some_and(|r| r.iter().any(|x| x.get("error").is_some()));
            if failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Malformed(m)) => {
            println!("{}", malformed_json(&m));
            ExitCode::from(1)
        }
        Err(Failure::Module(e)) => {
            println!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
