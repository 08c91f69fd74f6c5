//! `pseudoarc-lab`: generate, check, construct and export objects of the
//! finite graph-cover toolkit from the command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 resource limit, 3 failed
//! precondition or failed check.

mod checks;
mod fail;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pseudoarc_core::fraisse::{
    back_and_forth, digraph_join, end_move_with_report, generate_tangled_tower, random_digraph,
    strictify, subabsorb,
};
use pseudoarc_core::io::{
    graph_dot, relation_dot, tower_dot, AbsorptionDoc, CertificateDoc, DecompositionDoc,
    DigraphDoc, EndMoveDoc, JoinDoc, Object, PartitionDoc, RelDoc, SubfactorDoc, TangledTowerDoc,
};
use pseudoarc_core::paths::{build_tangled, classify, decompose_in_f, improper_simple_subfactor, registry};
use pseudoarc_core::{canonical_path, compose, Rel};

use checks::Predicate;
use fail::Failure;
use store::Workspace;

#[derive(Parser)]
#[command(name = "pseudoarc-lab", version, about = "Finite graph-cover constructions, checked")]
struct Cli {
    /// Workspace directory holding the object store and run log.
    #[arg(long, global = true, env = "PSEUDOARC_LAB_WORKSPACE", default_value = ".pseudoarc-lab")]
    workspace: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded object and store it.
    #[command(subcommand)]
    Gen(Gen),
    /// Run a predicate on stored objects; prints one JSON report per object.
    Check {
        #[arg(value_enum)]
        predicate: Predicate,
        /// Object files or stored hashes. For `certificate` and `subabsorb`
        /// the first is the object and the rest are its towers.
        #[arg(required = true)]
        objects: Vec<String>,
    },
    /// Shape of path morphisms: tag and turning number.
    Classify {
        #[arg(required = true)]
        relations: Vec<String>,
    },
    /// Run a construction, verify the result and store it.
    #[command(subcommand)]
    Construct(Construct),
    /// Print an object as DOT or canonical JSON.
    Export {
        format: String,
        object: String,
    },
}

#[derive(Subcommand)]
enum Gen {
    /// A tangled tower over P_root.
    Tower {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        root: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// A tangled morphism onto P_target.
    Tangled {
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// A strictly connected digraph on P_path.
    Digraph {
        #[arg(long)]
        path: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Snake,
    Hook,
    Simple,
    ImproperSimple,
    /// Pick by the factor's shape.
    Auto,
}

#[derive(Subcommand)]
enum Construct {
    /// Prime decomposition of a surjective edge-preserving path function.
    Decompose {
        relation: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// `m` with `factor ∘ m ⊆ target`.
    Subfactor {
        #[arg(long, value_enum, default_value_t = Kind::Auto)]
        kind: Kind,
        factor: String,
        /// Tangled target; for improper simples, the outer of two
        /// edge-witnessing factors when `--inner` is given.
        target: String,
        /// Inner factor of an improper-simple target.
        #[arg(long)]
        inner: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Push a morphism onto a tower level back into the tower.
    Subabsorb {
        tower: String,
        relation: String,
        #[arg(long)]
        level: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Alternate subabsorption between two tangled towers.
    BackAndForth {
        p: String,
        q: String,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// End-moving partition of a tangled morphism's domain.
    EndMove {
        relation: String,
        #[arg(long)]
        vertex: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Join two strictly connected digraphs.
    Join {
        a: String,
        b: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Lift a digraph to a strictly connected one on its clique path.
    Strictify {
        digraph: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// What a successful command leaves behind.
#[derive(Default)]
struct Done {
    stored: Vec<String>,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let ws = Workspace::new(&cli.workspace);
    let (code, stored) = match dispatch(cli.command, &ws) {
        Ok(done) => (0, done.stored),
        Err(f) => {
            eprintln!("pseudoarc-lab: {f}");
            (f.code(), Vec::new())
        }
    };
    if let Err(e) = ws.log(&args[1..], code, &stored) {
        eprintln!("pseudoarc-lab: could not write the run log: {e}");
    }
    ExitCode::from(code as u8)
}

fn dispatch(cmd: Command, ws: &Workspace) -> Result<Done, Failure> {
    match cmd {
        Command::Gen(g) => generate(g, ws),
        Command::Check { predicate, objects } => check(predicate, &objects, ws),
        Command::Classify { relations } => {
            for r in &relations {
                let rel = load_rel(ws, r)?;
                let c = classify(&rel)?;
                say(&format!("{}\n", serde_json::to_string(&c).expect("classification serializes")));
            }
            Ok(Done::default())
        }
        Command::Construct(c) => construct(c, ws),
        Command::Export { format, object } => export(&format, &object, ws),
    }
}

/// Verifies `obj` with its own check, stores it, prints the hash, and copies
/// it to `out` if asked.
fn emit(obj: Object, ws: &Workspace, out: Option<PathBuf>, context: &[Object]) -> Result<Done, Failure> {
    let v = checks::run(Predicate::Object, &obj, context, ws)?;
    if !v.pass {
        return Err(Failure::Internal(format!("{} failed its own check: {}", obj.kind(), v.report)));
    }
    let (hash, _) = ws.put(&obj)?;
    if let Some(path) = out {
        std::fs::write(&path, obj.to_json()).map_err(|e| Failure::io(&path, e))?;
    }
    say(&format!("{hash}\n"));
    Ok(Done { stored: vec![hash] })
}

/// Writes to stdout, ignoring a reader that has gone away.
fn say(text: &str) {
    use std::io::Write as _;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn generate(g: Gen, ws: &Workspace) -> Result<Done, Failure> {
    match g {
        Gen::Tower { depth, root, seed, out } => {
            if root == 0 {
                return Err(Failure::Usage(
                    "--root must be at least 1: a tangled tower needs 𝖾(ℙ_0) ≥ 1, a root level with an edge".into(),
                ));
            }
            let t = generate_tangled_tower(depth, root, seed)?;
            emit(Object::TangledTower(TangledTowerDoc::of(&t)), ws, out, &[])
        }
        Gen::Tangled { target, seed, out } => {
            let t = build_tangled(&canonical_path(target), seed)?;
            let obj = Object::Relation(RelDoc::of(&t));
            let v = checks::run(Predicate::Tangled, &obj, &[], ws)?;
            if !v.pass {
                return Err(Failure::Internal("generated relation is not tangled".into()));
            }
            emit(obj, ws, out, &[])
        }
        Gen::Digraph { path, seed, out } => {
            let d = random_digraph(path, seed)?;
            if !d.is_strict() {
                return Err(Failure::Internal("generated digraph is not strictly connected".into()));
            }
            emit(Object::Digraph(DigraphDoc::of(&d)), ws, out, &[])
        }
    }
}

fn check(p: Predicate, objects: &[String], ws: &Workspace) -> Result<Done, Failure> {
    let loaded: Vec<Object> = objects.iter().map(|o| ws.load(o)).collect::<Result<_, _>>()?;
    // these take one object plus the towers it was built against
    let groups: Vec<(&Object, &[Object])> = match p {
        Predicate::Certificate | Predicate::Subabsorb => vec![(&loaded[0], &loaded[1..])],
        _ => loaded.iter().map(|o| (o, &[][..])).collect(),
    };
    let mut failed = Vec::new();
    for (i, (obj, context)) in groups.into_iter().enumerate() {
        let v = checks::run(p, obj, context, ws)?;
        say(&format!("{}\n", v.report));
        if !v.pass {
            failed.push(objects[i].clone());
        }
    }
    if failed.is_empty() {
        Ok(Done::default())
    } else {
        Err(Failure::Rejected(failed.join(", ")))
    }
}

fn load_rel(ws: &Workspace, arg: &str) -> Result<Rel, Failure> {
    match ws.load(arg)? {
        Object::Relation(doc) => Ok(doc.build()?),
        other => Err(Failure::Usage(format!("{arg}: expected a relation, got a {} object", other.kind()))),
    }
}

fn load_digraph(ws: &Workspace, arg: &str) -> Result<pseudoarc_core::fraisse::Digraph, Failure> {
    match ws.load(arg)? {
        Object::Digraph(doc) => Ok(doc.build()?),
        other => Err(Failure::Usage(format!("{arg}: expected a digraph, got a {} object", other.kind()))),
    }
}

/// A tangled tower and the hash it is stored under.
fn load_tower(ws: &Workspace, arg: &str) -> Result<(Object, String), Failure> {
    let t = checks::as_tangled_tower(&ws.load(arg)?)?;
    let obj = Object::TangledTower(TangledTowerDoc::of(&t));
    let (hash, _) = ws.put(&obj)?;
    Ok((obj, hash))
}

fn construct(c: Construct, ws: &Workspace) -> Result<Done, Failure> {
    match c {
        Construct::Decompose { relation, out } => {
            let f = load_rel(ws, &relation)?;
            let p = decompose_in_f(&f)?;
            emit(Object::Decomposition(DecompositionDoc::of(&f, &p)), ws, out, &[])
        }
        Construct::Subfactor { kind, factor, target, inner, out } => {
            let f = load_rel(ws, &factor)?;
            let t = load_rel(ws, &target)?;
            let (target_rel, m, name) = match inner {
                Some(inner) => {
                    if !matches!(kind, Kind::ImproperSimple | Kind::Auto) {
                        return Err(Failure::Usage("--inner only goes with --kind improper-simple".into()));
                    }
                    let b = load_rel(ws, &inner)?;
                    let m = improper_simple_subfactor(&f, &t, &b)?;
                    (compose(&t, &b)?, m, "improper-simple")
                }
                None => {
                    let name = match kind {
                        Kind::Snake => "snake",
                        Kind::Hook => "hook",
                        Kind::Simple => "simple",
                        Kind::ImproperSimple => "improper-simple",
                        Kind::Auto => registry()
                            .find_for(&f)
                            .ok_or_else(|| Failure::Lib(pseudoarc_core::Error::Domain(
                                "factor is not a snake, hook or simple".into(),
                            )))?
                            .name(),
                    };
                    let m = registry().run(name, &f, &t)?;
                    (t, m, name)
                }
            };
            let doc = SubfactorDoc {
                strategy: name.to_string(),
                factor: RelDoc::of(&f),
                target: RelDoc::of(&target_rel),
                m: RelDoc::of(&m),
            };
            emit(Object::Subfactor(doc), ws, out, &[])
        }
        Construct::Subabsorb { tower, relation, level, out } => {
            let (tobj, hash) = load_tower(ws, &tower)?;
            let t = checks::as_tangled_tower(&tobj)?;
            let m = load_rel(ws, &relation)?;
            let a = subabsorb(&t, level, &m)?;
            let doc = AbsorptionDoc {
                tower_hash: hash,
                level,
                input: RelDoc::of(&m),
                result_level: a.level,
                rel: RelDoc::of(&a.rel),
                steps: a.steps,
            };
            emit(Object::Absorption(doc), ws, out, &[tobj])
        }
        Construct::BackAndForth { p, q, rounds, out } => {
            let (pobj, ph) = load_tower(ws, &p)?;
            let (qobj, qh) = load_tower(ws, &q)?;
            let (pt, qt) = (checks::as_tangled_tower(&pobj)?, checks::as_tangled_tower(&qobj)?);
            match back_and_forth(&pt, &qt, rounds) {
                Ok(cert) => emit(Object::Certificate(CertificateDoc::of(&cert, ph, qh)), ws, out, &[pobj, qobj]),
                Err((e, partial)) => {
                    // keep what was certified before the towers ran out
                    if let Some(c) = partial {
                        let obj = Object::Certificate(CertificateDoc::of(&c, ph, qh));
                        if let Ok(done) = emit(obj, ws, out, &[pobj, qobj]) {
                            eprintln!("pseudoarc-lab: stored the verified partial certificate {}", done.stored[0]);
                        }
                    }
                    Err(e.into())
                }
            }
        }
        Construct::EndMove { relation, vertex, out } => {
            let t = load_rel(ws, &relation)?;
            let (part, report) = end_move_with_report(&t, vertex)?;
            let doc = EndMoveDoc {
                morphism: RelDoc::of(&t),
                vertex,
                partition: PartitionDoc::of(&part),
                windows: report.windows,
            };
            emit(Object::EndMove(doc), ws, out, &[])
        }
        Construct::Join { a, b, out } => {
            let (da, db) = (load_digraph(ws, &a)?, load_digraph(ws, &b)?);
            let j = digraph_join(&da, &db)?;
            emit(Object::Join(JoinDoc::of(&da, &db, &j)), ws, out, &[])
        }
        Construct::Strictify { digraph, out } => {
            let s = strictify(&load_digraph(ws, &digraph)?)?;
            if !s.is_strict() {
                return Err(Failure::Internal("strictified digraph is not strictly connected".into()));
            }
            emit(Object::Digraph(DigraphDoc::of(&s)), ws, out, &[])
        }
    }
}

fn export(format: &str, object: &str, ws: &Workspace) -> Result<Done, Failure> {
    let obj = ws.load(object)?;
    let text = match format {
        "json" => obj.to_json(),
        "dot" => match &obj {
            Object::Graph(doc) => graph_dot(&*doc.build()?, "graph"),
            Object::Relation(doc) => relation_dot(&doc.build()?),
            Object::Digraph(doc) => relation_dot(doc.build()?.rel()),
            Object::Tower(doc) => tower_dot(&doc.build()?),
            Object::TangledTower(doc) => tower_dot(doc.build()?.tower()),
            other => {
                return Err(Failure::Usage(format!("no DOT rendering for a {} object", other.kind())));
            }
        },
        other => return Err(Failure::Usage(format!("unknown export format {other:?}; use dot or json"))),
    };
    say(&text);
    Ok(Done::default())
}
