use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::{json, Value};

use fdfwl::cc::{base_number, coherent_closure_with, extension, m_wl, ClosureOptions};
use fdfwl::certify::{self, CertMode, Certificate, CertifyOptions, VerifyOptions, CHECKS};
use fdfwl::formats::{parse_graph_file, read_fdf, rebuild_fdf, write_fdf};
use fdfwl::iso::{iso_test_with, IsoOptions, IsoVerdict};
use fdfwl::plane::{build_affine_scheme, find_affine_hyperoval};
use fdfwl::srg::{s_e_relation, srg_parameters};
use fdfwl::switching::{enumerate_switch_specs, path_switch, sample_switch_spec, SwitchSpec};
use fdfwl::{build_xstar, AffinePlane, Error, Relation};

#[derive(Parser)]
#[command(name = "fdfwl", version, about = "Fon-Der-Flaass graphs and Weisfeiler-Leman certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the hyperoval graph X* for AG(2, q).
    Gen {
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Graph file (stdout if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write the hyperoval in its text format.
        #[arg(long)]
        hyperoval: Option<PathBuf>,
    },
    /// Apply a path switching to an X* graph file.
    Switch {
        input: PathBuf,
        #[arg(long, conflicts_with_all = ["spec", "enumerate"])]
        seed: Option<u64>,
        /// One-line JSON switch spec.
        #[arg(long, conflicts_with = "enumerate")]
        spec: Option<PathBuf>,
        /// Write one graph per switch spec into --out-dir.
        #[arg(long, requires = "out_dir")]
        enumerate: bool,
        #[arg(long, default_value_t = 100_000)]
        enumerate_limit: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Write the spec used as one-line JSON.
        #[arg(long)]
        spec_out: Option<PathBuf>,
    },
    /// Run checks on a graph file and print a JSON report.
    Verify {
        input: PathBuf,
        /// Comma-separated subset of: srg, four-condition, switch-cases, s-e, fibers.
        #[arg(long, value_delimiter = ',', default_value = "srg,four-condition")]
        check: Vec<String>,
        /// Threshold for s-e (default 5q−4).
        #[arg(long)]
        threshold: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 100_000)]
        case_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budget: Budget,
    },
    /// Certify dim_WL ≤ 4 through a discrete two-point extension.
    Certify {
        input: PathBuf,
        /// full, given-s or sampled-s.
        #[arg(long, default_value = "given-s")]
        mode: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Recompute the given certificate and compare.
        #[arg(long)]
        recheck: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Test two graphs for isomorphism.
    Iso {
        first: PathBuf,
        second: PathBuf,
        /// Auxiliary relation threshold; defaults to 5q−4 for fdf files and
        /// to no auxiliary relation otherwise.
        #[arg(long)]
        threshold: Option<usize>,
        #[arg(long, default_value_t = 2_000_000)]
        node_budget: usize,
    },
    /// Coherent closure or m-dimensional WL of a graph file.
    Wl {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Comma-separated vertices to individualize (closure only).
        #[arg(long, value_delimiter = ',')]
        individualize: Vec<usize>,
        #[arg(long, default_value_t = 2_000_000)]
        tuple_cap: u128,
        /// Write the configuration (JSON header plus colour rows).
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
    },
    /// The affine scheme of AG(2, q) and its base number.
    AffineScheme {
        #[arg(long)]
        q: usize,
        /// Check every ordered pair of distinct points.
        #[arg(long)]
        all_pairs: bool,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Budget {
    /// Largest order for full pair refinement.
    #[arg(long, default_value_t = 5000)]
    max_full_n: usize,
    #[arg(long)]
    threads: Option<usize>,
}

impl Budget {
    fn closure(&self) -> ClosureOptions {
        ClosureOptions { max_full_n: self.max_full_n, threads: self.threads, ..ClosureOptions::default() }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

/// Exit status for a finished run: true means every check passed.
type Outcome = anyhow::Result<bool>;

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen { q, seed, out, hyperoval } => {
            let plane = AffinePlane::with_order(q)?;
            let h = find_affine_hyperoval(&plane, seed)?;
            let x = build_xstar(&plane, &h)?;
            let params = srg_parameters(x.graph()).params();
            if let Some(p) = hyperoval {
                emit(Some(&p), &h.to_text(&plane))?;
            }
            emit(out.as_deref(), &write_fdf(&x, params))?;
            Ok(true)
        }
        Command::Switch { input, seed, spec, enumerate, enumerate_limit, out, out_dir, spec_out } => {
            let x = read_fdf(&read(&input)?)?;
            if enumerate {
                let dir = out_dir.expect("required by clap");
                fs::create_dir_all(&dir)?;
                let specs = enumerate_switch_specs(x.q(), enumerate_limit)?;
                let width = specs.len().to_string().len();
                for (i, s) in specs.iter().enumerate() {
                    let y = path_switch(&x, s)?;
                    let text = write_fdf(&y, srg_parameters(y.graph()).params());
                    fs::write(dir.join(format!("switch-{i:0width$}.graph")), text)?;
                }
                info!("wrote {} graphs to {}", specs.len(), dir.display());
                return Ok(true);
            }
            let spec = match (seed, spec) {
                (Some(s), None) => sample_switch_spec(x.q(), s),
                (None, Some(p)) => SwitchSpec::from_json(&read(&p)?)?,
                _ => bail!("give exactly one of --seed, --spec or --enumerate"),
            };
            let y = path_switch(&x, &spec)?;
            if let Some(p) = spec_out {
                emit(Some(&p), &format!("{}\n", spec.to_json()))?;
            }
            let params = srg_parameters(y.graph()).params();
            emit(out.as_deref(), &write_fdf(&y, params))?;
            Ok(true)
        }
        Command::Verify { input, check, threshold, samples, case_samples, seed, budget } => {
            let x = read_fdf(&read(&input)?)?;
            let opts = VerifyOptions {
                closure: budget.closure(),
                threshold,
                samples,
                case_samples,
                seed,
                ..VerifyOptions::default()
            };
            let mut reports = Vec::new();
            let mut pass = true;
            for c in &check {
                if !CHECKS.contains(&c.as_str()) {
                    bail!("unknown check {c:?}; known: {}", CHECKS.join(", "));
                }
                let t = Instant::now();
                let r = certify::run_check(&x, c, &opts)?;
                info!("{c}: {} in {:.2}s", if r.pass { "pass" } else { "fail" }, t.elapsed().as_secs_f64());
                pass &= r.pass || r.observation;
                reports.push(r);
            }
            print!("{}", pretty(&reports));
            Ok(pass)
        }
        Command::Certify { input, mode, samples, seed, recheck, out, budget } => {
            let x = read_fdf(&read(&input)?)?;
            let mode: CertMode = mode.parse()?;
            let opts = CertifyOptions { closure: budget.closure(), samples, sample_seed: seed };
            let t = Instant::now();
            if let Some(p) = recheck {
                let cert: Certificate = serde_json::from_str(&read(&p)?)?;
                let same = certify::recheck(&x, &cert, &opts)?;
                info!("recheck in {:.2}s", t.elapsed().as_secs_f64());
                println!("{}", json!({"recheck": same}));
                return Ok(same);
            }
            let cert = certify::certify(&x, mode, &opts)?;
            info!("certificate computed in {:.2}s", t.elapsed().as_secs_f64());
            emit(out.as_deref(), &pretty(&cert))?;
            let evidence_ok = cert.sampled_evidence.as_ref().is_none_or(|e| e.consistent());
            Ok(cert.srg_ok && cert.extension_discrete && evidence_ok)
        }
        Command::Iso { first, second, threshold, node_budget } => {
            let (f1, f2) = (parse_graph_file(&read(&first)?)?, parse_graph_file(&read(&second)?)?);
            let e = threshold.or_else(|| f1.q.map(certify::threshold));
            let aux = |g: &fdfwl::Graph| e.map_or_else(|| Relation::empty(g.n()), |e| s_e_relation(g, e));
            let fiber_size = match (f1.q, f2.q) {
                (Some(a), Some(b)) if a == b => Some(a * a),
                _ => None,
            };
            let opts = IsoOptions { fiber_size, node_budget, ..IsoOptions::default() };
            let r = iso_test_with(&f1.graph, &f2.graph, &aux(&f1.graph), &aux(&f2.graph), &opts)?;
            print!("{}", pretty(&r));
            Ok(r.verdict != IsoVerdict::Inconclusive)
        }
        Command::Wl { input, m, individualize, tuple_cap, dump, budget } => {
            let file = parse_graph_file(&read(&input)?)?;
            if file.q.is_some() {
                rebuild_fdf(&file)?;
            }
            let g = &file.graph;
            let t = Instant::now();
            let cc = if m == 2 {
                coherent_closure_with(g.n(), &[g.edge_relation()], &individualize, &budget.closure())?
            } else {
                if !individualize.is_empty() {
                    bail!("--individualize applies to the coherent closure (m = 2) only");
                }
                let p = m_wl(g, m, tuple_cap)?;
                let audit = p.n_k_audit();
                if !audit.ok {
                    bail!("n_k audit failed: {:?}", audit.witness);
                }
                p.pr2()?
            };
            info!("refinement in {:.2}s", t.elapsed().as_secs_f64());
            if let Some(p) = dump {
                emit(Some(&p), &cc.to_text())?;
            }
            let audit = cc.audit();
            let report = json!({
                "n": cc.n(),
                "m": m,
                "rank": cc.rank(),
                "fibers": cc.fibers().len(),
                "discrete": cc.is_discrete(),
                "coherent": audit.is_coherent(),
            });
            print!("{}", pretty(&report));
            Ok(audit.is_coherent())
        }
        Command::AffineScheme { q, all_pairs, dump } => {
            let plane = AffinePlane::with_order(q)?;
            let cc = build_affine_scheme(&plane);
            let n = cc.n();
            let audit = cc.audit();
            let base = base_number(&cc, &[], 100_000)?;
            let mut report = json!({
                "q": q,
                "n": n,
                "rank": cc.rank(),
                "coherent": audit.is_coherent(),
                "base_number": base,
            });
            let mut pass = audit.is_coherent();
            if all_pairs {
                let mut bad = Vec::new();
                for a in 0..n {
                    for b in (0..n).filter(|&b| b != a) {
                        if !extension(&cc, &[a, b])?.is_discrete() {
                            bad.push([a, b]);
                        }
                    }
                }
                pass &= bad.is_empty();
                report["all_pairs_discrete"] = Value::Bool(bad.is_empty());
                report["non_discrete_pairs"] = json!(bad.iter().take(20).collect::<Vec<_>>());
            }
            if let Some(p) = dump {
                emit(Some(&p), &cc.to_text())?;
            }
            print!("{}", pretty(&report));
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(Error::Budget(_) | Error::CensusCap { .. } | Error::TupleCap { .. }) => {
                    eprintln!("budget exceeded: {e:#}")
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(2)
        }
    }
}
