use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use holant::class::{self, bit_string, Verdict};
use holant::counter::{estimate_count, CounterConfig};
use holant::io::{self, approx_decimal, Document};
use holant::matchgates;
use holant::mcmc::{edge_values, Sampler, SamplerConfig};
use holant::prat;
use holant::{Circuit, Error, Signature};

#[derive(Parser)]
#[command(name = "holant", version, about = "Exact and approximate evaluation of Boolean Holant problems")]
struct Cli {
    /// Worker threads for randomized commands.
    #[arg(long, global = true, env = "HOLANT_THREADS", default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of a closed instance, or the signature of an open one.
    Eval { file: PathBuf },
    /// Approximate Z₀ of a closed instance.
    Count {
        file: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Chain steps per sample instead of the proven budget.
        #[arg(long)]
        steps: Option<u64>,
        /// Attempts per sample instead of the proven budget.
        #[arg(long)]
        attempts: Option<u64>,
    },
    /// Draw satisfying assignments, one edge map per line.
    Sample {
        file: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'n', default_value_t = 1)]
        n: u64,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        attempts: Option<u64>,
    },
    /// Decide class membership of a signature (or of an open circuit's signature).
    Check {
        file: PathBuf,
        #[arg(long, value_enum)]
        class: Class,
        #[arg(long, value_name = "PATH")]
        emit_certificate: Option<PathBuf>,
    },
    /// Prat of a signature with a gadget attaining it.
    Prat { sigfile: PathBuf },
    /// Matchings circuit for a signature of arity at most 3.
    Synth3 {
        sigfile: PathBuf,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Reduce a closed instance to counting perfect matchings.
    ReducePm {
        file: PathBuf,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Hadamard transform of a signature.
    Hadamard { sigfile: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Windable,
    EvenWindable,
    StrictlyTerraced,
}

enum Failure {
    /// Exit 1.
    Negative(String),
    /// Exit 2.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotWindable(_)
            | Error::NotExpressible(_)
            | Error::NotStrictlyTerraced(_)
            | Error::Unsat
            | Error::SamplerFailed(_) => Failure::Negative(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative(msg)) => {
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let threads = cli.threads.max(1);
    match cli.command {
        Command::Eval { file } => eval(&file),
        Command::Count { file, eps, seed, steps, attempts } => {
            let c = closed(&file)?;
            let seed = announce_seed(seed);
            let cfg = CounterConfig { epsilon: eps, steps, attempts, threads };
            let est = estimate_count(&c, &cfg, seed)?;
            println!("estimate {}", est.value);
            println!("decimal {}", approx_decimal(&est.value));
            if est.fallbacks > 0 {
                println!("fallbacks {}", est.fallbacks);
            }
            Ok(())
        }
        Command::Sample { file, delta, seed, n, steps, attempts } => {
            let c = closed(&file)?;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Failure::Input(format!("--delta must lie in (0, 1), got {delta}")));
            }
            let seed = announce_seed(seed);
            let sampler = Sampler::new(&c, &SamplerConfig { delta, steps, attempts })?;
            eprintln!("steps {} attempts {}", sampler.steps(), sampler.attempts());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..n {
                let s = sampler.sample(&mut rng)?;
                println!("{}", edge_map(&c, &edge_values(&c, &s.config)));
            }
            Ok(())
        }
        Command::Check { file, class, emit_certificate } => check(&file, class, emit_certificate.as_deref()),
        Command::Prat { sigfile } => {
            let f = signature(&sigfile)?;
            let (r, gadget) = prat::prat_with_gadget(&f)?;
            println!("prat {r}");
            println!("decimal {}", approx_decimal(&r));
            if let Some(g) = gadget {
                println!("gadget {}", g.describe(f.labels()));
            }
            if let Some(b) = prat::known_prat_bound(&f) {
                println!("published bound {b}");
            }
            Ok(())
        }
        Command::Synth3 { sigfile, out } => {
            let f = signature(&sigfile)?;
            if f.arity() > 3 {
                return Err(Failure::Input(format!("synth3 takes arity at most 3, got {}", f.arity())));
            }
            let g = matchgates::synthesize(&f)?;
            write(&out, &io::write_matchings(&g)?)?;
            println!("matchings circuit with {} vertices and {} edges written to {}", g.num_vertices(), g.edges().len(), out.display());
            Ok(())
        }
        Command::ReducePm { file, out } => {
            let c = closed(&file)?;
            let r = matchgates::reduce_to_pm(&c)?;
            write(&out, &r.graph.render(&r.constant))?;
            println!("{} with constant {} written to {}", r.graph, r.constant, out.display());
            Ok(())
        }
        Command::Hadamard { sigfile } => {
            let f = signature(&sigfile)?;
            let h = f.hadamard_unnormalized();
            match h.normalized() {
                Some(t) => {
                    println!("exact normalized transform");
                    print_table(f.labels(), &t);
                }
                None => {
                    println!("normalized transform = (√2)^{} times", h.sqrt2_exponent);
                    print_table(f.labels(), &h.table);
                }
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<Document, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    io::read_document(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn signature(path: &Path) -> Result<Signature, Failure> {
    match read(path)? {
        Document::Signature(f) => Ok(f),
        Document::Matchings(g) => Ok(g.signature()?),
        d => Ok(d.to_circuit()?.signature_of()?),
    }
}

fn closed(path: &Path) -> Result<Circuit, Failure> {
    let c = read(path)?.to_circuit()?;
    if !c.is_closed() {
        return Err(Failure::Input(format!("{}: instance has external edges", path.display())));
    }
    Ok(c)
}

fn announce_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(rand::random);
    println!("seed {seed}");
    seed
}

fn edge_map(c: &Circuit, bits: &[bool]) -> String {
    let map: serde_json::Map<String, serde_json::Value> = c
        .edges()
        .iter()
        .zip(bits)
        .map(|(&(a, b), &v)| (format!("{}-{}", c.incidence_name(a), c.incidence_name(b)), json!(v as u8)))
        .collect();
    serde_json::Value::Object(map).to_string()
}

fn print_table(labels: &[String], table: &[holant::Rational]) {
    println!("{}", if labels.is_empty() { "()".to_string() } else { labels.join(" ") });
    for (x, v) in table.iter().enumerate() {
        println!("{} {v}", bit_string(x as u32, labels.len()));
    }
}

fn eval(path: &Path) -> Outcome {
    let c = read(path)?.to_circuit()?;
    if c.is_closed() {
        println!("{}", c.evaluate(0));
    } else {
        let f = signature(path)?;
        print_table(f.labels(), f.table());
    }
    Ok(())
}

fn check(path: &Path, class: Class, cert: Option<&Path>) -> Outcome {
    let f = signature(path)?;
    let labels = f.labels().to_vec();
    if let Class::StrictlyTerraced = class {
        return match class::terrace_violation(&f) {
            None => {
                println!("strictly terraced");
                if let Some(p) = cert {
                    write(p, &pretty(&json!({"type": "strictly-terraced", "labels": labels})))?;
                }
                Ok(())
            }
            Some((x, i, j)) => {
                let msg = format!(
                    "not strictly terraced: F({}) = 0 but flipping {} gives {} and flipping {} gives {}",
                    bit_string(x, labels.len()),
                    labels[i],
                    f.value(x ^ 1 << i),
                    labels[j],
                    f.value(x ^ 1 << j)
                );
                if let Some(p) = cert {
                    let c = json!({
                        "type": "not-strictly-terraced",
                        "labels": labels,
                        "point": bit_string(x, labels.len()),
                        "flips": [labels[i], labels[j]],
                        "values": [io::format_rational(f.value(x ^ 1 << i)), io::format_rational(f.value(x ^ 1 << j))],
                    });
                    write(p, &pretty(&c))?;
                }
                Err(Failure::Negative(msg))
            }
        };
    }
    let (verdict, name, cert_labels) = match class {
        Class::Windable => (class::is_windable(&f)?, "windable", f.parity_extend().labels().to_vec()),
        _ => (class::is_even_windable(&f)?, "even-windable", labels.clone()),
    };
    match verdict {
        Verdict::Windable(w) => {
            println!("{name}");
            if let Some(p) = cert {
                write(p, &io::write_witness(&w))?;
            }
            Ok(())
        }
        Verdict::NotWindable(ce) => {
            if let Some(p) = cert {
                write(p, &io::write_counterexample(&cert_labels, &ce))?;
            }
            let mut msg = format!("not {name}");
            if matches!(class, Class::Windable) && f.arity() == 3 {
                if let Some(x) = class::arity3_violation(&f)? {
                    msg.push_str(&format!("; the arity-3 inequality fails at {}", bit_string(x, 3)));
                }
            }
            let pinned: Vec<String> = (0..cert_labels.len())
                .filter(|&i| ce.pinned >> i & 1 == 1)
                .map(|i| format!("{}={}", cert_labels[i], ce.bits >> i & 1))
                .collect();
            msg.push_str(&format!(
                "; no 2-decomposition after pinning {}",
                if pinned.is_empty() { "nothing".into() } else { pinned.join(" ") }
            ));
            Err(Failure::Negative(msg))
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
