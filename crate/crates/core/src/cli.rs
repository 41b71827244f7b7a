//! Command-line front end. Every number on the wire is a `"p/q"` string.
//!
//! Exit status is 0 on success, 1 when a verification or feasibility check
//! fails (the JSON detail still goes to standard output) and 2 on malformed
//! input.

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{self, serde_opt_bigint, serde_rational, QVector, Rational};
use crate::bounds::{self, BoundReport};
use crate::constructions::{self, ErratumRow, WynerParams};
use crate::duality::{self, Instance, Witness, WitnessResult};
use crate::error::Error;
use crate::norms::{self, Norm};
use crate::search::{self, CliqueResult};

/// The JSON form of an instance, optionally carrying a norm and a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dimension: usize,
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    pub vectors: Vec<QVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortfall: Option<bool>,
}

impl InstanceFile {
    pub fn new(delta: Rational, vectors: Vec<QVector>) -> Self {
        InstanceFile {
            dimension: vectors.first().map_or(0, QVector::dim),
            delta,
            vectors,
            norm: None,
            witness: None,
            shortfall: None,
        }
    }

    /// Checks the declared dimension and builds the validated instance.
    pub fn instance(&self) -> Result<Instance, Error> {
        if let Some(found) = arith::common_dim(&self.vectors)? {
            if found != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    found,
                });
            }
        }
        Instance::new(self.delta.clone(), self.vectors.clone())
    }
}

#[derive(Serialize, Deserialize)]
pub struct WitnessReport {
    #[serde(flatten)]
    pub result: WitnessResult,
    /// Row `i` lists `<x_j, y_i>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_values: Option<Vec<QVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_dual_values: Option<bool>,
}

#[derive(Serialize, Deserialize)]
pub struct BoundOutput {
    #[serde(flatten)]
    pub report: BoundReport,
    pub trivial_bound: Option<u32>,
    #[serde(with = "serde_rational")]
    pub ellipsoid_inner_product_bound: Rational,
    #[serde(with = "serde_opt_bigint")]
    pub gram_bound: Option<BigInt>,
}

#[derive(Serialize, Deserialize)]
pub struct SearchOutput {
    #[serde(flatten)]
    pub result: CliqueResult,
    pub candidates: usize,
    pub vectors: Vec<QVector>,
}

#[derive(Parser)]
#[command(name = "delta-additive", version, about = "Exact tools for δ-additive sets of unit vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Instance file; standard input when absent.
    #[arg(long)]
    input: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check unit norms and pair sums exactly.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Overrides the δ stored in the instance.
        #[arg(long, value_parser = rational)]
        delta: Option<Rational>,
        /// Norm as inline JSON or a file path; overrides the instance's norm.
        #[arg(long)]
        norm: Option<String>,
    },
    /// Solve for dual vectors, or certify that none exist.
    Witness {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Build a polytope norm in which the instance is δ-additive.
    Synth {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Emit one of the explicit constructions.
    Construct {
        #[command(subcommand)]
        which: Construction,
    },
    /// Upper bounds on the size of a δ-additive set.
    Bound {
        #[arg(long)]
        d: u32,
        #[arg(long, value_parser = rational)]
        delta: Rational,
        #[arg(long, value_parser = rational)]
        radius: Option<Rational>,
    },
    /// Maximum δ-additive subset of a grid of unit vectors.
    Search {
        /// Norm as inline JSON or a file path.
        #[arg(long)]
        norm: String,
        #[arg(long, default_value_t = 3)]
        resolution: u32,
        #[arg(long, value_parser = rational)]
        delta: Rational,
        /// Maximum number of branch-and-bound nodes.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Compare the printed and corrected λ in the lifting identities.
    Erratum {
        #[arg(long, value_parser = rational, num_args = 1..)]
        delta: Vec<Rational>,
    },
}

#[derive(Subcommand)]
enum Construction {
    /// d vectors in ℓ∞^d at δ = 2/3.
    Cube {
        #[arg(long)]
        d: usize,
    },
    /// Four vectors in ℓ¹^3 at δ = 2/3.
    Octahedron,
    /// Seeded spherical code lifted to a δ-additive set in dimension d + 1.
    Wyner {
        #[arg(long)]
        d: usize,
        #[arg(long, value_parser = rational)]
        delta: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        max_tries: Option<usize>,
        #[arg(long, value_parser = rational)]
        margin: Option<Rational>,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    arith::parse_rational(s).map_err(|e| e.to_string())
}

enum Failure {
    /// Check failed; the value is still printed.
    Check(serde_json::Value),
    Malformed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Malformed(e.to_string())
    }
}

type Outcome = Result<serde_json::Value, Failure>;

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Runs one command line; returns the process exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    let (value, code) = match execute(cli.command, stdin) {
        Ok(v) => (v, 0),
        Err(Failure::Check(v)) => (v, 1),
        Err(Failure::Malformed(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 2;
        }
    };
    let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    if writeln!(stdout, "{text}").is_err() {
        return 2;
    }
    code
}

fn read_instance(input: &InputArgs, stdin: &mut dyn Read) -> Result<InstanceFile, Failure> {
    let text = match &input.input {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Malformed(format!("{path}: {e}")))?,
        None => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Failure::Malformed(format!("standard input: {e}")))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("instance: {e}")))
}

/// Inline JSON when the argument looks like an object, otherwise a path.
fn read_norm(arg: &str) -> Result<Norm, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Malformed(format!("{arg}: {e}")))?
    };
    let norm: Norm = serde_json::from_str(&text).map_err(|e| Failure::Malformed(format!("norm: {e}")))?;
    norm.validate()?;
    Ok(norm)
}

fn execute(command: Command, stdin: &mut dyn Read) -> Outcome {
    match command {
        Command::Verify { input, delta, norm } => {
            let file = read_instance(&input, stdin)?;
            let norm = match norm {
                Some(arg) => read_norm(&arg)?,
                None => file
                    .norm
                    .clone()
                    .ok_or_else(|| Failure::Malformed("no norm in the instance and no --norm given".into()))?,
            };
            let delta = delta.unwrap_or(file.delta);
            let report = norms::verify_additive_set(&norm, &file.vectors, &delta)?;
            if report.pass {
                Ok(to_json(&report))
            } else {
                Err(Failure::Check(to_json(&report)))
            }
        }
        Command::Witness { input } => {
            let instance = read_instance(&input, stdin)?.instance()?;
            let result = duality::find_witness(&instance);
            let (dual_values, forced) = match result.witness() {
                Some(w) => (
                    Some(
                        duality::dual_values(&instance, w)
                            .into_iter()
                            .map(QVector::new)
                            .collect(),
                    ),
                    duality::forced_dual_values(&instance, w),
                ),
                None => (None, None),
            };
            let infeasible = result.witness().is_none();
            let report = WitnessReport {
                result,
                dual_values,
                forced_dual_values: forced,
            };
            if infeasible {
                Err(Failure::Check(to_json(&report)))
            } else {
                Ok(to_json(&report))
            }
        }
        Command::Synth { input } => {
            let instance = read_instance(&input, stdin)?.instance()?;
            match duality::find_witness(&instance) {
                WitnessResult::Feasible { witness } => Ok(to_json(&duality::build_norm(&instance, &witness)?)),
                infeasible => Err(Failure::Check(to_json(&infeasible))),
            }
        }
        Command::Construct { which } => construct(which),
        Command::Bound { d, delta, radius } => {
            if d == 0 {
                return Err(Failure::Malformed("d must be at least 1".into()));
            }
            let radius = radius.unwrap_or_else(bounds::default_radius);
            if radius <= Rational::from_integer(0.into()) {
                return Err(Failure::Malformed("radius must be positive".into()));
            }
            let report = bounds::bound_report(d, &delta, &radius)?;
            let ellipsoid = bounds::ellipsoid_inner_product_bound(d, &delta);
            Ok(to_json(&BoundOutput {
                report,
                trivial_bound: bounds::trivial_bound(&delta),
                gram_bound: bounds::gram_bound(&ellipsoid),
                ellipsoid_inner_product_bound: ellipsoid,
            }))
        }
        Command::Search {
            norm,
            resolution,
            delta,
            budget,
        } => {
            let norm = read_norm(&norm)?;
            norms::check_delta_open(&delta)?;
            let candidates = search::enumerate_candidates(&norm, resolution)?;
            let count = candidates.len();
            let graph = search::build_graph(&norm, candidates, &delta)?;
            let result = search::max_clique(&graph, budget);
            let vectors = result.members.iter().map(|&i| graph.vertices[i].clone()).collect();
            Ok(to_json(&SearchOutput {
                result,
                candidates: count,
                vectors,
            }))
        }
        Command::Erratum { delta } => {
            let deltas = if delta.is_empty() {
                default_erratum_deltas()
            } else {
                delta
            };
            let table: Vec<ErratumRow> = constructions::erratum_table(&deltas);
            let all_corrected = table.iter().all(|row| row.corrected.holds);
            if all_corrected {
                Ok(to_json(&table))
            } else {
                Err(Failure::Check(to_json(&table)))
            }
        }
    }
}

fn default_erratum_deltas() -> Vec<Rational> {
    [(3, 4), (1, 1), (5, 4), (3, 2), (7, 4)]
        .iter()
        .map(|&(n, d)| arith::q(n, d))
        .collect()
}

fn construct(which: Construction) -> Outcome {
    let file = match which {
        Construction::Cube { d } => {
            if d == 0 {
                return Err(Failure::Malformed("d must be at least 1".into()));
            }
            let (norm, xs) = constructions::cube_family(d);
            InstanceFile {
                norm: Some(norm),
                ..InstanceFile::new(arith::q(2, 3), xs)
            }
        }
        Construction::Octahedron => {
            let (norm, xs) = constructions::octahedron_instance();
            InstanceFile {
                norm: Some(norm),
                witness: Some(constructions::octahedron_witness()),
                ..InstanceFile::new(arith::q(2, 3), xs)
            }
        }
        Construction::Wyner {
            d,
            delta,
            seed,
            target,
            max_tries,
            margin,
        } => {
            let mut params = WynerParams::new(d, delta)?;
            params.seed = seed;
            if let Some(t) = target {
                params.target_m = t;
                params.max_tries = 50 * t;
            }
            if let Some(t) = max_tries {
                params.max_tries = t;
            }
            if let Some(m) = margin {
                params.margin = m;
            }
            let lift = constructions::wyner_lift(&params)?;
            let norm = duality::build_norm(&lift.instance, &lift.witness)?;
            InstanceFile {
                norm: Some(norm),
                witness: Some(lift.witness),
                shortfall: Some(lift.shortfall),
                ..InstanceFile::new(lift.instance.delta().clone(), lift.instance.xs().to_vec())
            }
        }
    };
    Ok(to_json(&file))
}
