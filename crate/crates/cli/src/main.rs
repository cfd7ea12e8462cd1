//! Command-line front end: build and verify the chip-firing resolutions
//! of a multigraph with machine-readable, reproducible output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sandres_core::cw;
use sandres_core::export;
use sandres_core::partition;
use sandres_core::resolution::{
    self, betti, build_complex, minimal_generators, weight_vector, IdealKind, WeightVector,
};
use sandres_core::verify;
use sandres_core::{ChipClass, Multigraph};

#[derive(Parser)]
#[command(
    name = "sandres",
    about = "Minimal free resolutions of parking-function and toppling ideals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArgs {
    /// Path to a graph file (edge list or JSON), or the graph text itself.
    graph: String,
    /// Relabel this vertex to be the sink before anything else.
    #[arg(long)]
    sink: Option<usize>,
}

impl GraphArgs {
    fn load(&self) -> sandres_core::Result<Multigraph> {
        let text = match fs::read_to_string(&self.graph) {
            Ok(contents) => contents,
            Err(_) => self.graph.clone(),
        };
        Multigraph::parse(&text, self.sink)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write output to a file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn emit(&self, content: &str) -> std::io::Result<()> {
        match &self.output {
            Some(path) => fs::write(path, content),
            None => {
                print!("{content}");
                if !content.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IdealArg {
    Mg,
    Ig,
    T,
}

impl From<IdealArg> for IdealKind {
    fn from(v: IdealArg) -> Self {
        match v {
            IdealArg::Mg => IdealKind::Parking,
            IdealArg::Ig => IdealKind::Toppling,
            IdealArg::T => IdealKind::Homogenized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    CasScript,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Betti numbers from the partition count.
    Betti {
        #[command(flatten)]
        graph: GraphArgs,
        /// Cross-check against the independent homological oracle.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Print the minimal monomial generators of the parking ideal.
    Generators {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build a resolution and render it.
    Resolve {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "mg")]
        ideal: IdealArg,
        /// Comma-separated weight vector entries (homogenized ideal only).
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long = "t-weight", default_value_t = 1)]
        t_weight: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// List sink-rooted acyclic k-partitions.
    Partitions {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(short)]
        k: usize,
        /// Also list the members of each chip-firing class.
        #[arg(long)]
        classes: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Star decomposition of the specialized resolution at a vertex.
    Stars {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(short)]
        j: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build the labeled cell poset; optionally run its checks.
    Cw {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run verification checks; exits nonzero on any failure.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        all: bool,
        /// d.d = 0 for all three complexes.
        #[arg(long)]
        complex: bool,
        /// Multigraded strand exactness of the parking resolution.
        #[arg(long)]
        strands: bool,
        /// Generic-point rank exactness for all three complexes.
        #[arg(long)]
        generic: bool,
        /// Betti numbers against the homological oracle.
        #[arg(long)]
        oracle: bool,
        /// Star decomposition at every non-sink vertex.
        #[arg(long)]
        stars: bool,
        /// Degeneration fiber checks.
        #[arg(long)]
        degeneration: bool,
        /// Tree and saturated-graph special cases.
        #[arg(long)]
        special: bool,
        /// Seed for the generic-point substitution.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn parse_lambda(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|e| e.to_string()))
        .collect()
}

fn seed_from_env() -> u64 {
    std::env::var("SANDRES_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(verify::DEFAULT_SEED)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Betti { graph, oracle, out } => {
            let g = graph.load()?;
            let counts = betti(&g);
            let mut text = counts
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            let mut ok = true;
            if oracle {
                let oracle_counts = verify::betti_oracle(&g).totals;
                ok = oracle_counts == counts;
                text.push_str(&format!(
                    "\noracle: {} ({})",
                    oracle_counts
                        .iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                    if ok { "match" } else { "MISMATCH" }
                ));
            }
            out.emit(&text)?;
            Ok(ok)
        }
        Command::Generators { graph, out } => {
            let g = graph.load()?;
            let gens: Vec<String> = minimal_generators(&g)
                .iter()
                .map(|m| m.to_string())
                .collect();
            out.emit(&gens.join("\n"))?;
            Ok(true)
        }
        Command::Resolve {
            graph,
            ideal,
            lambda,
            t_weight,
            format,
            out,
        } => {
            let g = graph.load()?;
            let kind: IdealKind = ideal.into();
            let weight = match (kind, &lambda) {
                (IdealKind::Homogenized, Some(l)) => Some(WeightVector::from_lambda(
                    &g,
                    parse_lambda(l).map_err(sandres_core::Error::Malformed)?,
                    t_weight,
                )?),
                (IdealKind::Homogenized, None) => {
                    let w = weight_vector(&g)?;
                    Some(if t_weight > 1 {
                        w.scaled_to_t_weight(&g, t_weight)?
                    } else {
                        w
                    })
                }
                _ => None,
            };
            let c = build_complex(&g, kind, weight.as_ref())?;
            let rendered = match format {
                FormatArg::Text => export::complex_text(&c),
                FormatArg::Json => export::complex_json_string(&c),
                FormatArg::CasScript => export::cas_script(&g, &c),
            };
            out.emit(&rendered)?;
            Ok(true)
        }
        Command::Partitions {
            graph,
            k,
            classes,
            out,
        } => {
            let g = graph.load()?;
            let parts = partition::n_acyclic_partitions(&g, k)?;
            let rendered: Vec<serde_json::Value> = parts
                .iter()
                .map(|p| {
                    let mut v = serde_json::to_value(export::partition_to_json(p)).unwrap();
                    if classes {
                        let members: Vec<_> = ChipClass::from_canonical(p.clone())
                            .members()
                            .iter()
                            .map(export::partition_to_json)
                            .collect();
                        v["class_members"] = serde_json::to_value(members).unwrap();
                    }
                    v
                })
                .collect();
            out.emit(&serde_json::to_string_pretty(&json!({
                "k": k,
                "count": parts.len(),
                "partitions": rendered,
            }))?)?;
            Ok(true)
        }
        Command::Stars { graph, j, out } => {
            let g = graph.load()?;
            if j == 0 || j >= g.n() {
                return Err(Box::new(sandres_core::Error::VertexRange(
                    j,
                    g.n().saturating_sub(1),
                )));
            }
            let c = resolution::build_parking(&g)?;
            let decomposition = verify::jstar_decompose(&g, &c, j - 1)?;
            let formula = verify::star_betti_formula(&g, &c, j - 1)?;
            let passed = decomposition.passed && formula == betti(&g);
            let mut v = serde_json::to_value(&decomposition)?;
            v["betti_from_census"] = serde_json::to_value(&formula)?;
            out.emit(&serde_json::to_string_pretty(&v)?)?;
            Ok(passed)
        }
        Command::Cw { graph, check, out } => {
            let g = graph.load()?;
            let p = cw::build_part(&g)?;
            if check {
                let summary = p.summary(g.is_saturated());
                let ok = summary.label_lcm_ok
                    && summary.acyclicity_ok
                    && summary.boundary_spheres_ok
                    && summary.facet_counts_simplicial;
                out.emit(&serde_json::to_string_pretty(&summary)?)?;
                Ok(ok)
            } else {
                out.emit(&serde_json::to_string_pretty(&p.to_json())?)?;
                Ok(true)
            }
        }
        Command::Verify {
            graph,
            all,
            complex,
            strands,
            generic,
            oracle,
            stars,
            degeneration,
            special,
            seed,
            out,
        } => {
            let g = graph.load()?;
            let seed = seed.unwrap_or_else(seed_from_env);
            let none_selected =
                !(complex || strands || generic || oracle || stars || degeneration || special);
            let all = all || none_selected;
            let report = run_verification(
                &g,
                seed,
                all || complex,
                all || strands,
                all || generic,
                all || oracle,
                all || stars,
                all || degeneration,
                all || special,
            )?;
            let passed = report["passed"].as_bool().unwrap_or(false);
            out.emit(&serde_json::to_string_pretty(&report)?)?;
            Ok(passed)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_verification(
    g: &Multigraph,
    seed: u64,
    complex: bool,
    strands: bool,
    generic: bool,
    oracle: bool,
    stars: bool,
    degeneration: bool,
    special: bool,
) -> Result<serde_json::Value, Box<dyn std::error::Error>> {
    let c0 = resolution::build_parking(g)?;
    let c1 = resolution::build_toppling(g)?;
    let w = if g.n() >= 2 {
        Some(weight_vector(g)?)
    } else {
        None
    };
    let ct = match &w {
        Some(w) => Some(resolution::build_homogenized(g, w)?),
        None => None,
    };
    let mut passed = true;
    let mut report = json!({ "n": g.n(), "seed": seed });

    if complex {
        let ok = verify::check_dd_zero(&c0)
            && verify::check_dd_zero(&c1)
            && ct.as_ref().map(verify::check_dd_zero).unwrap_or(true);
        report["dd_zero"] = json!(ok);
        passed &= ok;
    }
    if strands {
        let summary = verify::strand_exactness(g, &c0);
        let ok = summary.passed();
        report["strands"] = json!({
            "distinct": summary.distinct_strands,
            "covered": summary.multidegrees_covered,
            "passed": ok,
        });
        passed &= ok;
    }
    if generic {
        let mut ok = true;
        let mut ranks = Vec::new();
        for c in [Some(&c0), Some(&c1), ct.as_ref()].into_iter().flatten() {
            let r = verify::generic_exactness(c, seed);
            ok &= r.exact;
            ranks.push(json!({
                "kind": c.kind().short_name(),
                "ranks": r.ranks,
                "exact": r.exact,
            }));
        }
        report["generic"] = json!({"per_complex": ranks, "passed": ok});
        passed &= ok;
    }
    if oracle {
        let o = verify::betti_oracle(g);
        let counts = betti(g);
        let ok = o.totals == counts;
        report["oracle"] = json!({
            "betti": counts,
            "oracle": o.totals,
            "passed": ok,
        });
        passed &= ok;
    }
    if stars {
        let mut ok = true;
        let counts = betti(g);
        let mut per_vertex = Vec::new();
        for j in 0..g.n().saturating_sub(1) {
            let d = verify::jstar_decompose(g, &c0, j)?;
            let formula = verify::star_betti_formula(g, &c0, j)?;
            let this_ok = d.passed && formula == counts;
            ok &= this_ok;
            per_vertex.push(json!({
                "vertex": j + 1,
                "census": d.census,
                "passed": this_ok,
            }));
        }
        report["stars"] = json!({"per_vertex": per_vertex, "passed": ok});
        passed &= ok;
    }
    if degeneration {
        if let Some(w) = &w {
            let d = verify::degeneration_fibers(g, w)?;
            let ok = d.passed();
            report["degeneration"] = json!({
                "lambda": d.lambda,
                "passed": ok,
            });
            passed &= ok;
        }
    }
    if special {
        let s = verify::special_case_checks(g, &c0);
        let ok = s.passed();
        report["special"] = json!({
            "tree_koszul": s.tree_koszul,
            "saturated_scarf": s.saturated_scarf,
            "passed": ok,
        });
        passed &= ok;
    }
    report["passed"] = json!(passed);
    Ok(report)
}
