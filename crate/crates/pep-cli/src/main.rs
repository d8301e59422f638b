use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pep_core::gen::{generate, mutate, GenParams, MutationKind};
use pep_core::oracle::oracle_pep;
use pep_core::pep::{test_pep, test_pep_general, tree_after};
use pep_core::prep::{h_bridges, h_faces, parse_instance, prepare, serialize_instance, BridgeKind, PEPInstance};
use pep_core::Error;
use serde_json::json;

const EXTENDABLE: u8 = 0;
const NOT_EXTENDABLE: u8 = 1;
const INVALID: u8 = 2;
const DISAGREE: u8 = 3;

#[derive(Parser)]
#[command(name = "pep", version, about = "Test whether a partial planar drawing extends to the whole graph")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test an instance. Exit 0 extendable, 1 not, 2 invalid input, 3 oracle disagreement.
    Check {
        path: PathBuf,
        /// Also run the brute-force oracle (size permitting).
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate an extendable instance.
    Gen {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 0.5)]
        h_ratio: f64,
        #[arg(long, default_value_t = 0.3)]
        delete_ratio: f64,
        #[arg(long, default_value_t = 0.3)]
        isolated_ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one random perturbation; whether the result is extendable is unknown.
    Mutate {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_kind)]
        kind: MutationKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the test on generated instances and write CSV rows n,m,seed,ms,updates,tp_edges.
    Bench {
        /// Comma separated vertex counts.
        #[arg(long, value_delimiter = ',', default_value = "16384,32768,65536,131072,262144,524288,1048576")]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 0.5)]
        h_ratio: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print intermediate data: faces, bridges, colors or tree@K.
    Dump {
        path: PathBuf,
        #[arg(long, value_parser = parse_stage)]
        stage: Stage,
        /// Component of G for tree@K.
        #[arg(long, default_value_t = 0)]
        component: usize,
    },
    /// Run only the brute-force oracle.
    Oracle { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Simple {
    Faces,
    Bridges,
    Colors,
}

#[derive(Clone, Copy, Debug)]
enum Stage {
    Simple(Simple),
    Tree(usize),
}

fn parse_kind(s: &str) -> Result<MutationKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_stage(s: &str) -> Result<Stage, String> {
    if let Some(k) = s.strip_prefix("tree@") {
        return k.parse().map(Stage::Tree).map_err(|_| format!("bad step in {s}"));
    }
    Simple::from_str(s, true).map(Stage::Simple).map_err(|_| format!("unknown stage {s}; use faces, bridges, colors or tree@K"))
}

fn read(path: &Path) -> anyhow::Result<PEPInstance> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_instance(&bytes)?)
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn check(path: &Path, with_oracle: bool, as_json: bool) -> anyhow::Result<u8> {
    let inst = match read(path) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("invalid input: {e:#}");
            return Ok(INVALID);
        }
    };
    let t = Instant::now();
    let report = test_pep(&inst)?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let mut code = if report.answer { EXTENDABLE } else { NOT_EXTENDABLE };
    let oracle = if with_oracle {
        match oracle_pep(&inst) {
            Ok(b) => {
                if b != report.answer {
                    code = DISAGREE;
                }
                json!(b)
            }
            Err(e) => json!(format!("skipped: {e}")),
        }
    } else {
        serde_json::Value::Null
    };
    if as_json {
        let mut v = serde_json::to_value(&report)?;
        v["timings"] = json!({ "total_ms": ms });
        if with_oracle {
            v["oracle"] = oracle;
        }
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("{}", if report.answer { "extendable" } else { "not extendable" });
        if let Some(r) = &report.reject {
            println!("rejected at {}", serde_json::to_string(r)?);
        }
        println!(
            "components {}, updates {}, splits {}, terminal path edges {}, {ms:.1} ms",
            report.component_results.len(),
            report.stats.updates,
            report.stats.splits,
            report.stats.terminal_path_edges
        );
        if with_oracle {
            println!("oracle {oracle}");
        }
        if code == DISAGREE {
            println!("oracle disagrees");
        }
    }
    Ok(code)
}

fn bench(sizes: &[u32], seeds: u64, h_ratio: f64, csv: Option<&Path>) -> anyhow::Result<()> {
    let mut out = String::from("n,m,seed,ms,updates,tp_edges\n");
    for &n in sizes {
        for seed in 0..seeds {
            let inst = generate(&GenParams::new(n, h_ratio, seed))?;
            let prep = prepare(&inst)?.map_err(|x| anyhow!("generated instance rejected in preprocessing: {x:?}"))?;
            let t = Instant::now();
            let (mut updates, mut tp) = (0, 0);
            for sub in &prep.components {
                let r = test_pep_general(&sub.g, &sub.constraints);
                if !r.answer {
                    bail!("generated instance rejected (n {n}, seed {seed})");
                }
                updates += r.stats.updates;
                tp += r.stats.terminal_path_edges;
            }
            let ms = t.elapsed().as_secs_f64() * 1e3;
            let row = format!("{n},{},{seed},{ms:.3},{updates},{tp}\n", inst.g.m());
            eprint!("{row}");
            out.push_str(&row);
        }
    }
    write_out(csv, out.as_bytes())
}

fn dump(path: &Path, stage: Stage, component: usize) -> anyhow::Result<()> {
    let inst = read(path)?;
    let h = inst.structure()?;
    let faces = h_faces(&inst, &h);
    match stage {
        Stage::Simple(Simple::Faces) => {
            for f in 0..faces.count {
                let mark = if f == faces.outer { " (outer)" } else { "" };
                println!("face {f}{mark}: vertices {:?}", faces.boundary[f as usize]);
            }
        }
        Stage::Simple(Simple::Bridges) => {
            for b in h_bridges(&inst, &h) {
                let kind = match b.kind {
                    BridgeKind::SingleEdge => "edge",
                    BridgeKind::Component => "component",
                };
                println!("bridge {} ({kind}): edges {:?} inner {:?} attachments {:?}", b.id, b.edges, b.inner, b.attachments);
            }
        }
        Stage::Simple(Simple::Colors) => match prepare(&inst)? {
            Err(x) => println!("infeasible: {x:?}"),
            Ok(p) => {
                for e in 0..inst.g.m() {
                    if h.is_h_edge(e) {
                        continue;
                    }
                    let (a, b) = inst.g.endpoints(e);
                    match p.coloring.color[e as usize] {
                        Some(c) => println!("edge {e} ({a},{b}): face {c}"),
                        None => println!("edge {e} ({a},{b}): unrestricted"),
                    }
                }
            }
        },
        Stage::Tree(k) => {
            let p = prepare(&inst)?.map_err(|x| anyhow!("infeasible in preprocessing: {x:?}"))?;
            let sub = p.components.get(component).ok_or_else(|| anyhow!("no component {component}"))?;
            match tree_after(&sub.g, &sub.constraints, k) {
                Err(stage) => println!("rejected before step {k}: {}", serde_json::to_string(&stage)?),
                Ok(None) => println!("no tree after step {k}"),
                Ok(Some((v, t))) => {
                    println!("// after inserting vertex {}", sub.vertices[v as usize]);
                    print!("{}", t.to_dot());
                }
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::Check { path, oracle, json } => check(&path, oracle, json),
        Cmd::Gen { n, h_ratio, delete_ratio, isolated_ratio, seed, out } => {
            let p = GenParams { n, h_ratio, delete_ratio, isolated_ratio, seed };
            write_out(out.as_deref(), &serialize_instance(&generate(&p)?))?;
            Ok(0)
        }
        Cmd::Mutate { path, seed, kind, out } => {
            let inst = read(&path)?;
            let next = mutate(&inst, kind, seed).unwrap_or_else(|| {
                eprintln!("no applicable {kind:?} mutation; instance unchanged");
                inst
            });
            write_out(out.as_deref(), &serialize_instance(&next))?;
            Ok(0)
        }
        Cmd::Bench { sizes, seeds, h_ratio, csv } => bench(&sizes, seeds, h_ratio, csv.as_deref()).map(|_| 0),
        Cmd::Dump { path, stage, component } => dump(&path, stage, component).map(|_| 0),
        Cmd::Oracle { path } => {
            let ok = oracle_pep(&read(&path)?)?;
            println!("{}", if ok { "extendable" } else { "not extendable" });
            Ok(if ok { EXTENDABLE } else { NOT_EXTENDABLE })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INVALID)
        }
    }
}
