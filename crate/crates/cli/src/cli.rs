//! Argument parsing and the verbs behind the `cpcf` binary.
//!
//! Exit codes: 0 on success, 1 when the domain answer is negative (programs
//! differ, no killable mutant, an algorithm failed to generate), 2 on usage
//! or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use cpcf_core::analysis::cf::infer_cf;
use cpcf_core::analysis::cp::infer_cp;
use cpcf_core::analysis::dump::{dump_cf, dump_cp};
use cpcf_core::interp::{equivalent, TestManifest, VerdictKind};
use cpcf_core::lang::{parse, print_program, Program};
use cpcf_core::par::{map_indexed, ExecMode};
use cpcf_core::perturb::dataset::{build_dataset, derive_seed, write_atomic, Labels, VARIANTS};
use cpcf_core::perturb::{inject_bug, obfuscate, perturb, PerturbError, PerturbationKind};
use cpcf_core::rewrite::{apply_cf, apply_cp, garbage_collect, normalize};

use crate::prompt::{render_prompt, Prompt, PromptKind};
use crate::score::{load_log, render_report, score, Truth};

#[derive(Debug, Parser)]
#[command(
    name = "cpcf",
    version,
    about = "Copy propagation and constant folding for a Python subset"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a program and print it in canonical form.
    Parse { file: PathBuf },
    /// Print the inferred annotation of every statement.
    Annotate(AnnotateArgs),
    /// Apply the forward rewrites.
    Optimize(OptimizeArgs),
    /// Compare two programs on the cases of a test manifest.
    Verify(VerifyArgs),
    /// Produce a perturbed variant, or a mutant with `--bug`.
    Perturb(PerturbArgs),
    /// Generate the eight variants of every corpus algorithm.
    Dataset(DatasetArgs),
    /// Render the four prompt formats for every algorithm of a dataset.
    Prompts(PromptsArgs),
    /// Score a response log against dataset labels.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct AnnotateArgs {
    /// Copy-propagation annotations.
    #[arg(long, conflicts_with = "cf", required_unless_present = "cf")]
    cp: bool,
    /// Constant-folding annotations.
    #[arg(long)]
    cf: bool,
    file: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Phase {
    Cp,
    Cf,
    Gc,
    All,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    phase: Phase,
    /// Write the applied rewrite steps here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the program here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    left: PathBuf,
    right: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Cp,
    Cf,
    #[value(name = "cp_cf")]
    CpCf,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "cp_cf", conflicts_with = "bug")]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inject one bug that the manifest exposes instead.
    #[arg(long, requires = "manifest")]
    bug: bool,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Rename functions and variables afterwards.
    #[arg(long)]
    obfuscate: bool,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Generate algorithms one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
struct PromptsArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Seed from which each prompt's snippet order is derived.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    parse(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_manifest(path: &Path) -> Result<TestManifest, Failure> {
    TestManifest::load(path).map_err(usage)
}

fn write_file(path: &Path, text: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    write_atomic(path, text.as_bytes()).map_err(usage)
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> Outcome {
    match dest {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(usage),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Parse { file } => {
            load_program(&file).and_then(|p| emit(out, None, &print_program(&p)))
        }
        Command::Annotate(a) => annotate(a, out),
        Command::Optimize(a) => optimize(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Perturb(a) => perturb_cmd(a, out),
        Command::Dataset(a) => dataset(a, out),
        Command::Prompts(a) => prompts(a, out),
        Command::Score(a) => score_cmd(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}

fn annotate(a: AnnotateArgs, out: &mut dyn Write) -> Outcome {
    let p = load_program(&a.file)?;
    let text = if a.cp {
        dump_cp(&p, &infer_cp(&p).map_err(usage)?)
    } else {
        dump_cf(&p, &infer_cf(&p).map_err(usage)?)
    };
    emit(out, None, &text)
}

fn optimize(a: OptimizeArgs, out: &mut dyn Write) -> Outcome {
    let p = load_program(&a.file)?;
    let (q, trace) = match a.phase {
        Phase::Cp => apply_cp(&p),
        Phase::Cf => apply_cf(&p),
        Phase::Gc => garbage_collect(&p),
        Phase::All => normalize(&p),
    }
    .map_err(usage)?;
    if let Some(t) = &a.trace {
        write_file(t, &trace.to_string())?;
    }
    emit(out, a.output.as_deref(), &print_program(&q))
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Outcome {
    let (l, r) = (load_program(&a.left)?, load_program(&a.right)?);
    let m = load_manifest(&a.manifest)?;
    let v = equivalent(&l, &r, &m).map_err(usage)?;
    let text = if a.json {
        format!("{}\n", serde_json::to_string_pretty(&v).map_err(usage)?)
    } else {
        let mut s = format!("{:?} after {} cases\n", v.equivalent, v.cases).to_lowercase();
        if let Some(w) = &v.witness {
            s.push_str(&format!(
                "case {} ({}): {} vs {}\n",
                w.case_index,
                w.case.describe(),
                w.left,
                w.right
            ));
        }
        s
    };
    emit(out, None, &text)?;
    match v.equivalent {
        VerdictKind::Yes => Ok(()),
        VerdictKind::No => Err(Failure::Domain("the programs are not equivalent".into())),
        VerdictKind::Inconclusive => Err(Failure::Domain(
            "inconclusive: a case ran out of fuel".into(),
        )),
    }
}

fn perturb_cmd(a: PerturbArgs, out: &mut dyn Write) -> Outcome {
    let p = load_program(&a.file)?;
    let domain = |e: PerturbError| match e {
        PerturbError::Manifest(m) => usage(m),
        other => Failure::Domain(other.to_string()),
    };
    let (q, trace) = if a.bug {
        let m = load_manifest(a.manifest.as_deref().expect("clap requires --manifest"))?;
        let (q, bug) = inject_bug(&p, a.seed, &m).map_err(domain)?;
        let text = format!(
            "{} at stmt {} expr {}: «{}» => «{}»; exposed by case {}\n",
            bug.kind,
            bug.stmt,
            bug.path,
            bug.before,
            bug.after,
            bug.witness.case.describe()
        );
        (q, text)
    } else {
        let kind = match a.kind {
            Kind::Cp => PerturbationKind::Cp,
            Kind::Cf => PerturbationKind::Cf,
            Kind::CpCf => PerturbationKind::CpCf,
        };
        let (q, t) = perturb(&p, kind, a.seed).map_err(domain)?;
        (q, t.to_string())
    };
    let q = if a.obfuscate { obfuscate(&q).0 } else { q };
    if let Some(t) = &a.trace {
        write_file(t, &trace)?;
    }
    emit(out, a.output.as_deref(), &print_program(&q))
}

fn dataset(a: DatasetArgs, out: &mut dyn Write) -> Outcome {
    let mode = if a.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let report = build_dataset(&a.corpus, &a.out, a.seed, mode).map_err(usage)?;
    let mut text = String::new();
    for s in &report.algorithms {
        text.push_str(&format!("{}: {}\n", s.name, s.status));
    }
    emit(out, None, &text)?;
    if report.all_ok() {
        Ok(())
    } else {
        Err(Failure::Domain(
            "some algorithms could not be generated".into(),
        ))
    }
}

/// Algorithm directories of a dataset, in name order.
fn algorithm_dirs(dataset: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries =
        fs::read_dir(dataset).map_err(|e| usage(format!("{}: {e}", dataset.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("labels.json").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(usage(format!(
            "{}: no algorithm directories",
            dataset.display()
        )));
    }
    Ok(dirs)
}

/// The labels and the eight programs of one generated algorithm.
pub fn load_variants(dir: &Path) -> Result<(Labels, Vec<(String, Program)>), String> {
    let labels = Labels::load(dir.join("labels.json")).map_err(|e| e.to_string())?;
    let mut programs = Vec::new();
    for v in VARIANTS {
        let path = dir.join(format!("{v}.py"));
        let src = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        programs.push((
            v.to_string(),
            parse(&src).map_err(|e| format!("{}: {e}", path.display()))?,
        ));
    }
    Ok((labels, programs))
}

#[derive(serde::Serialize)]
struct PromptIndexEntry<'a> {
    file: String,
    algorithm: &'a str,
    #[serde(flatten)]
    prompt: &'a Prompt,
}

fn prompts(a: PromptsArgs, out: &mut dyn Write) -> Outcome {
    let dirs = algorithm_dirs(&a.dataset)?;
    let rendered = map_indexed(ExecMode::Parallel, &dirs, |dir| {
        let (labels, programs) = load_variants(dir)?;
        PromptKind::ALL
            .into_iter()
            .map(|k| {
                let seed = derive_seed(a.seed, &labels.algorithm, k.name());
                render_prompt(&programs, k, seed)
                    .map(|p| (labels.algorithm.clone(), p))
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, String>>()
    });
    let mut all = Vec::new();
    for r in rendered {
        all.extend(r.map_err(usage)?);
    }
    let mut index = Vec::new();
    for (algorithm, p) in &all {
        let file = format!("{algorithm}_{}.txt", p.kind.name().to_lowercase());
        write_file(&a.out.join(&file), &p.text)?;
        index.push(PromptIndexEntry {
            file,
            algorithm,
            prompt: p,
        });
    }
    let json = serde_json::to_string_pretty(&index).map_err(usage)?;
    write_file(&a.out.join("prompts.json"), &format!("{json}\n"))?;
    emit(
        out,
        None,
        &format!("{} prompts written to {}\n", all.len(), a.out.display()),
    )
}

fn score_cmd(a: ScoreArgs, out: &mut dyn Write) -> Outcome {
    let log = load_log(&a.log).map_err(usage)?;
    let truth = Truth::load(&a.dataset).map_err(usage)?;
    let (report, design) = score(&log, &truth).map_err(usage)?;
    if let Some(path) = &a.json {
        let json = serde_json::json!({ "report": report, "design": design });
        write_file(
            path,
            &format!("{}\n", serde_json::to_string_pretty(&json).map_err(usage)?),
        )?;
    }
    emit(out, None, &render_report(&report, &design))
}
