//! Thin command line over the library: each subcommand parses its input,
//! calls one library entry point, and prints machine-readable output on
//! stdout. Exit codes: 0 success, 1 domain error, 2 usage error.

use std::fs;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use otree::mso::{eval_mso, parse_formula, RelStructure};
use otree::oforest::OForest;
use otree::sampling;
use otree::scheme::{
    describes, extract_scheme, extract_scheme_regular, scheme_equiv, unfold_scheme,
    DescriptionScheme, EQUIV_UNFOLD_DEPTH, EQUIV_UNFOLD_WINDOW,
};
use otree::structuring::{build_structuring, SOAForest};
use otree::system::parse_system;
use otree::term::{parse_term, FiniteTerm, Signature};
use otree::value::{rep_cut, rep_line, soa_iso, val_algebraic, val_direct};

#[derive(Parser)]
#[command(name = "otree", version, about = "Order-theoretic trees at desk scale")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Inline input text.
    #[arg(short = 'e', long)]
    expr: Option<String>,
    /// Read input from a file.
    #[arg(short = 'f', long)]
    file: Option<String>,
}

impl Input {
    fn text(&self) -> Result<String, String> {
        match (&self.expr, &self.file) {
            (Some(e), _) => Ok(e.clone()),
            (_, Some(f)) => fs::read_to_string(f).map_err(|e| format!("{f}: {e}")),
            _ => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum IsoKind {
    Value,
    Otree,
    Scheme,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a term (or a system with --system) and echo its canonical form.
    Parse {
        #[command(flatten)]
        input: Input,
        /// Treat the input as an equation system.
        #[arg(long)]
        system: bool,
    },
    /// Evaluate a term to its structured forest.
    Eval {
        /// Inline input text.
        #[arg(short = 'e', long, required_unless_present_any = ["random", "file"])]
        expr: Option<String>,
        /// Read input from a file.
        #[arg(short = 'f', long, conflicts_with = "expr")]
        file: Option<String>,
        /// Run both evaluation routes and fail loudly on any mismatch.
        #[arg(long)]
        check: bool,
        /// Evaluate this many random terms instead, one JSON per line.
        #[arg(long, conflicts_with_all = ["expr", "file"])]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Validate an order forest given as JSON.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Build a structuring of an order forest given as JSON.
    Structure {
        #[command(flatten)]
        input: Input,
    },
    /// List lines, cuts, definers, tails and representative positions.
    Cuts {
        #[command(flatten)]
        input: Input,
    },
    /// Description scheme operations.
    Scheme {
        #[command(subcommand)]
        cmd: SchemeCmd,
    },
    /// Compare two inputs up to isomorphism.
    Iso {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value_t = IsoKind::Value)]
        kind: IsoKind,
    },
    /// Monadic second-order queries on finite structures.
    Mso {
        #[command(subcommand)]
        cmd: MsoCmd,
    },
    /// Render the value of a term as DOT.
    Dot {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Subcommand)]
enum SchemeCmd {
    /// Extract the scheme of a term's value (or of a system with --system).
    Extract {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        system: bool,
    },
    /// Unfold a scheme (JSON) into a finite structured tree.
    Unfold {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        window: usize,
    },
    /// Check whether a scheme (JSON) describes the value of a term.
    Check {
        /// Scheme JSON file.
        #[arg(long)]
        scheme: String,
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Subcommand)]
enum MsoCmd {
    /// Evaluate a closed formula on a structure (JSON).
    Eval {
        /// Structure JSON file.
        #[arg(long)]
        structure: String,
        #[command(flatten)]
        input: Input,
    },
}

fn soa_value(j: &SOAForest) -> serde_json::Value {
    serde_json::from_str(&j.to_json()).expect("library JSON is valid")
}

fn parse_soa_term(text: &str) -> Result<FiniteTerm, String> {
    parse_term(text, &Signature::soa()).map_err(|e| e.to_string())
}

fn cuts_report(t: &FiniteTerm) -> Result<serde_json::Value, String> {
    let j = val_direct(t).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for li in 0..j.line_count() {
        let names: Vec<String> = j.line_names(li).iter().map(|s| s.to_string()).collect();
        let mut cuts = Vec::new();
        for cut in j.cuts(li) {
            let left: Vec<&str> = names[..cut.left_size].iter().map(|s| s.as_str()).collect();
            let right: Vec<&str> = names[cut.left_size..].iter().map(|s| s.as_str()).collect();
            let rep = rep_cut(t, &left, &right).map_err(|e| e.to_string())?;
            let definers: Vec<String> = j
                .definers(cut)
                .iter()
                .map(|&i| j.forest().name(i).to_string())
                .collect();
            cuts.push(json!({
                "key": cut.key(),
                "left": left,
                "right": right,
                "definers": definers,
                "rep": rep.to_string(),
            }));
        }
        let tail: Vec<String> = j
            .tail_nodes(li)
            .iter()
            .map(|&i| j.forest().name(i).to_string())
            .collect();
        let rep = rep_line(t, &names[0]).map_err(|e| e.to_string())?;
        lines.push(json!({
            "line": li,
            "names": names,
            "depth": j.line_depth(li),
            "axis": j.axis() == Some(li),
            "rep": rep.to_string(),
            "word": j.u_plus(li).to_string(),
            "cuts": cuts,
            "tail": tail,
        }));
    }
    Ok(json!({"lines": lines}))
}

fn dispatch(cmd: Cmd) -> Result<(), String> {
    match cmd {
        Cmd::Parse { input, system } => {
            let text = input.text()?;
            if system {
                let sys =
                    parse_system(&text, &Signature::soa_star()).map_err(|e| e.to_string())?;
                let auto = sys.to_automaton();
                println!(
                    "{}",
                    json!({"printed": sys.to_string(), "states": auto.len()})
                );
            } else {
                let t = parse_soa_term(&text)?;
                println!(
                    "{}",
                    json!({"printed": t.to_string(), "positions": t.size()})
                );
            }
            Ok(())
        }
        Cmd::Eval { expr, file, check, random, seed, format } => {
            let input = Input { expr, file };
            if let Some(count) = random {
                let mut rng = sampling::seeded(seed);
                for _ in 0..count {
                    let t = sampling::random_node_term(&mut rng, 25);
                    let direct = val_direct(&t).map_err(|e| e.to_string())?;
                    if check {
                        let algebraic = val_algebraic(&t).map_err(|e| e.to_string())?;
                        if direct != algebraic {
                            return Err(format!("evaluation routes disagree on {t}"));
                        }
                    }
                    println!("{}", json!({"term": t.to_string(), "value": soa_value(&direct)}));
                }
                return Ok(());
            }
            let t = parse_soa_term(&input.text()?)?;
            let direct = val_direct(&t).map_err(|e| e.to_string())?;
            if check {
                let algebraic = val_algebraic(&t).map_err(|e| e.to_string())?;
                if direct != algebraic {
                    return Err(format!("evaluation routes disagree on {t}"));
                }
            }
            match format {
                Format::Json => println!("{}", direct.to_json()),
                Format::Dot => println!("{}", direct.to_dot()),
            }
            Ok(())
        }
        Cmd::Validate { input } => {
            let f = OForest::from_json(&input.text()?).map_err(|e| e.to_string())?;
            println!(
                "{}",
                json!({
                    "ok": true,
                    "nodes": f.len(),
                    "tree": f.is_otree(),
                    "components": f.components().len(),
                })
            );
            Ok(())
        }
        Cmd::Structure { input } => {
            let f = OForest::from_json(&input.text()?).map_err(|e| e.to_string())?;
            println!("{}", build_structuring(&f).to_json());
            Ok(())
        }
        Cmd::Cuts { input } => {
            let t = parse_soa_term(&input.text()?)?;
            println!("{}", cuts_report(&t)?);
            Ok(())
        }
        Cmd::Scheme { cmd } => match cmd {
            SchemeCmd::Extract { input, system } => {
                let text = input.text()?;
                let sch = if system {
                    let sys = parse_system(&text, &Signature::soa_star())
                        .map_err(|e| e.to_string())?;
                    extract_scheme_regular(&sys).map_err(|e| e.to_string())?
                } else {
                    let t = parse_soa_term(&text)?;
                    let j = val_direct(&t).map_err(|e| e.to_string())?;
                    extract_scheme(&j).map_err(|e| e.to_string())?.0
                };
                println!("{}", sch.to_json());
                Ok(())
            }
            SchemeCmd::Unfold { input, depth, window } => {
                let sch =
                    DescriptionScheme::from_json(&input.text()?).map_err(|e| e.to_string())?;
                let u = unfold_scheme(&sch, depth, window).map_err(|e| e.to_string())?;
                println!(
                    "{}",
                    json!({"complete": u.complete, "value": soa_value(&u.soa)})
                );
                Ok(())
            }
            SchemeCmd::Check { scheme, input } => {
                let text = fs::read_to_string(&scheme).map_err(|e| format!("{scheme}: {e}"))?;
                let sch = DescriptionScheme::from_json(&text).map_err(|e| e.to_string())?;
                let t = parse_soa_term(&input.text()?)?;
                let j = val_direct(&t).map_err(|e| e.to_string())?;
                println!("{}", json!({"describes": describes(&j, &sch)}));
                Ok(())
            }
        },
        Cmd::Iso { a, b, kind } => {
            let ta = fs::read_to_string(&a).map_err(|e| format!("{a}: {e}"))?;
            let tb = fs::read_to_string(&b).map_err(|e| format!("{b}: {e}"))?;
            let out = match kind {
                IsoKind::Value => {
                    let va = val_direct(&parse_soa_term(&ta)?).map_err(|e| e.to_string())?;
                    let vb = val_direct(&parse_soa_term(&tb)?).map_err(|e| e.to_string())?;
                    json!({"verdict": if soa_iso(&va, &vb) { "iso" } else { "noniso" }})
                }
                IsoKind::Otree => {
                    let fa = OForest::from_json(&ta).map_err(|e| e.to_string())?;
                    let fb = OForest::from_json(&tb).map_err(|e| e.to_string())?;
                    let iso = otree::value::otree_iso(&fa, &fb);
                    json!({"verdict": if iso { "iso" } else { "noniso" }})
                }
                IsoKind::Scheme => {
                    let sa = DescriptionScheme::from_json(&ta).map_err(|e| e.to_string())?;
                    let sb = DescriptionScheme::from_json(&tb).map_err(|e| e.to_string())?;
                    json!({
                        "verdict": scheme_equiv(&sa, &sb).to_string(),
                        "depth": EQUIV_UNFOLD_DEPTH,
                        "window": EQUIV_UNFOLD_WINDOW,
                    })
                }
            };
            println!("{out}");
            Ok(())
        }
        Cmd::Mso { cmd } => match cmd {
            MsoCmd::Eval { structure, input } => {
                let text =
                    fs::read_to_string(&structure).map_err(|e| format!("{structure}: {e}"))?;
                let s = RelStructure::from_json(&text).map_err(|e| e.to_string())?;
                let f = parse_formula(&input.text()?).map_err(|e| e.to_string())?;
                let out = eval_mso(&s, &f, &Default::default()).map_err(|e| e.to_string())?;
                println!("{}", json!({"holds": out}));
                Ok(())
            }
        },
        Cmd::Dot { input } => {
            let t = parse_soa_term(&input.text()?)?;
            let j = val_direct(&t).map_err(|e| e.to_string())?;
            println!("{}", j.to_dot());
            Ok(())
        }
    }
}

/// Parses `argv` and runs one subcommand; returns the process exit code.
pub fn run_cli<I: IntoIterator<Item = String>>(argv: I) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run_cli(std::env::args()))
}
