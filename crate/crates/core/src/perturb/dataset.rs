//! Assembly of the eight-variant bundles and the on-disk dataset.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::interp::{equivalent, Entry, ManifestError, TestManifest, VerdictKind, Witness};
use crate::lang::{parse, print_program, ParseError, Program};
use crate::par::{map_indexed, ExecMode};

use super::{
    inject_bug, perturb, BugDescriptor, NameMap, PerturbError, PerturbTrace, PerturbationKind,
};

/// Variant names in dataset order: the correct class, then the buggy one.
pub const VARIANTS: [&str; 8] = [
    "ref",
    "cp",
    "cf",
    "cp_cf",
    "bug_ref",
    "bug_cp",
    "bug_cf",
    "bug_cp_cf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Correct,
    Incorrect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantLabel {
    pub variant: String,
    pub class: Class,
    /// Verdict against the (obfuscated) reference.
    pub equivalent: VerdictKind,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bug: Option<BugDescriptor>,
}

/// Contents of `labels.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub algorithm: String,
    pub seed: u64,
    /// Manifest for the obfuscated programs.
    pub manifest: TestManifest,
    pub names: NameMap,
    pub variants: Vec<VariantLabel>,
}

impl Labels {
    pub fn load(path: impl AsRef<Path>) -> Result<Labels, DatasetError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Json(path.display().to_string(), e))
    }

    pub fn get(&self, variant: &str) -> Option<&VariantLabel> {
        self.variants.iter().find(|l| l.variant == variant)
    }
}

#[derive(Debug, Clone)]
pub struct VariantSet {
    pub algorithm: String,
    pub seed: u64,
    /// Obfuscated programs in [`VARIANTS`] order.
    pub programs: Vec<(String, Program)>,
    pub labels: Labels,
    pub traces: BTreeMap<PerturbationKind, PerturbTrace>,
}

impl VariantSet {
    pub fn program(&self, variant: &str) -> Option<&Program> {
        self.programs
            .iter()
            .find(|(n, _)| n == variant)
            .map(|(_, p)| p)
    }

    /// Perturbation traces and bug descriptors, one section per variant.
    pub fn provenance(&self) -> String {
        let mut out = String::new();
        for (kind, trace) in &self.traces {
            let _ = writeln!(out, "# {kind}");
            out.push_str(&trace.to_string());
        }
        for l in &self.labels.variants {
            if let Some(b) = &l.bug {
                let _ = writeln!(out, "# {}", l.variant);
                let _ = writeln!(
                    out,
                    "{} at stmt {} expr {}: «{}» => «{}»; exposed by case {}: {}",
                    b.kind,
                    b.stmt,
                    b.path,
                    b.before,
                    b.after,
                    b.witness.case_index,
                    b.witness.case.describe()
                );
            }
        }
        out
    }
}

/// Independent sub-seed for one algorithm and one use.
pub fn derive_seed(seed: u64, algorithm: &str, tag: &str) -> u64 {
    let digest = Sha256::digest(format!("{seed}:{algorithm}:{tag}").as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

fn require_yes(kind: &str, a: &Program, b: &Program, m: &TestManifest) -> Result<(), PerturbError> {
    let v = equivalent(a, b, m)?;
    if v.is_yes() {
        return Ok(());
    }
    let detail = match &v.witness {
        Some(w) => format!(
            "{:?} on {}: {} vs {}",
            v.equivalent,
            w.case.describe(),
            w.left,
            w.right
        ),
        None => format!("{:?}", v.equivalent),
    };
    Err(PerturbError::NotEquivalent {
        kind: kind.to_string(),
        verdict: detail,
    })
}

/// Builds, checks and obfuscates the eight variants of one algorithm.
pub fn build_variant_set(
    algorithm: &str,
    reference: &Program,
    m: &TestManifest,
    seed: u64,
) -> Result<VariantSet, PerturbError> {
    let mut reference = reference.clone();
    reference.canonicalize();
    let mut plain: Vec<(String, Program)> = vec![("ref".into(), reference.clone())];
    let mut traces = BTreeMap::new();
    for kind in PerturbationKind::ALL {
        let (v, trace) = perturb(&reference, kind, derive_seed(seed, algorithm, kind.name()))?;
        require_yes(kind.name(), &reference, &v, m)?;
        traces.insert(kind, trace);
        plain.push((kind.name().to_string(), v));
    }
    let mut bugs = Vec::new();
    for i in 0..4 {
        let (base_name, base) = plain[i].clone();
        let tag = format!("bug_{base_name}");
        let (mutant, bug) = inject_bug(&base, derive_seed(seed, algorithm, &tag), m)?;
        plain.push((tag, mutant));
        bugs.push(bug);
    }

    let mut names = NameMap::build(&reference);
    for (_, p) in &plain[1..] {
        names.extend(p);
    }
    let mut manifest = m.clone();
    if let Entry::Function(f) = &m.entry {
        if let Some(label) = names.function(f) {
            manifest.entry = Entry::Function(label.to_string());
        }
    }
    let programs: Vec<(String, Program)> = plain
        .iter()
        .map(|(n, p)| (n.clone(), names.apply(p)))
        .collect();

    let obf_ref = &programs[0].1;
    let mut variants = Vec::new();
    for (i, (name, p)) in programs.iter().enumerate() {
        let v = equivalent(obf_ref, p, &manifest)?;
        let correct = i < 4;
        let expected = if correct {
            VerdictKind::Yes
        } else {
            VerdictKind::No
        };
        if v.equivalent != expected {
            return Err(PerturbError::NotEquivalent {
                kind: name.clone(),
                verdict: format!("{:?} after obfuscation", v.equivalent),
            });
        }
        variants.push(VariantLabel {
            variant: name.clone(),
            class: if correct {
                Class::Correct
            } else {
                Class::Incorrect
            },
            equivalent: v.equivalent,
            cases: v.cases,
            witness: v.witness,
            bug: if correct {
                None
            } else {
                Some(bugs[i - 4].clone())
            },
        });
    }
    Ok(VariantSet {
        algorithm: algorithm.to_string(),
        seed,
        labels: Labels {
            algorithm: algorithm.to_string(),
            seed,
            manifest,
            names,
            variants,
        },
        programs,
        traces,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}: {1}")]
    Parse(String, ParseError),
    #[error("{0}: {1}")]
    Manifest(String, ManifestError),
    #[error("{0}: {1}")]
    Json(String, serde_json::Error),
    #[error("corpus directory {0} holds no programs")]
    EmptyCorpus(String),
}

impl DatasetError {
    fn io(path: &Path, source: std::io::Error) -> DatasetError {
        DatasetError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// One corpus entry: `<name>.py` with its manifest `<name>.json`.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
    pub program: Program,
    pub manifest: TestManifest,
}

/// Reads every `*.py` of `dir` (sorted by name) with its manifest.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>, DatasetError> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| DatasetError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "py"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(DatasetError::EmptyCorpus(dir.display().to_string()));
    }
    files
        .into_iter()
        .map(|path| {
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let source = fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
            let program =
                parse(&source).map_err(|e| DatasetError::Parse(path.display().to_string(), e))?;
            let mpath = path.with_extension("json");
            let manifest = TestManifest::load(&mpath)
                .map_err(|e| DatasetError::Manifest(mpath.display().to_string(), e))?;
            Ok(CorpusEntry {
                name,
                source,
                program,
                manifest,
            })
        })
        .collect()
}

/// SHA-256 over the sorted program and manifest files of the corpus.
pub fn corpus_hash(dir: impl AsRef<Path>) -> Result<String, DatasetError> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| DatasetError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "py" || x == "json"))
        .collect();
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        let bytes = fs::read(&f).map_err(|e| DatasetError::io(&f, e))?;
        h.update(
            f.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .as_bytes(),
        );
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), DatasetError> {
    let tmp = PathBuf::from(format!("{}.tmp", path.display()));
    fs::write(&tmp, contents).map_err(|e| DatasetError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| DatasetError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmStatus {
    pub name: String,
    /// `ok`, or the reason the algorithm was skipped.
    pub status: String,
}

/// Contents of `dataset.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub seed: u64,
    pub corpus_hash: String,
    pub algorithms: Vec<AlgorithmStatus>,
}

impl DatasetReport {
    pub fn all_ok(&self) -> bool {
        self.algorithms.iter().all(|a| a.status == "ok")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DatasetReport, DatasetError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Json(path.display().to_string(), e))
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("dataset records serialize");
    s.push('\n');
    s.into_bytes()
}

/// Generates every algorithm of the corpus (concurrently in
/// [`ExecMode::Parallel`]) and writes the dataset tree under `out`.
/// Failing algorithms are reported in `dataset.json`, not written.
pub fn build_dataset(
    corpus: impl AsRef<Path>,
    out: impl AsRef<Path>,
    seed: u64,
    mode: ExecMode,
) -> Result<DatasetReport, DatasetError> {
    let corpus = corpus.as_ref();
    let out = out.as_ref();
    let entries = load_corpus(corpus)?;
    let hash = corpus_hash(corpus)?;
    let sets = map_indexed(mode, &entries, |e| {
        build_variant_set(&e.name, &e.program, &e.manifest, seed)
    });
    fs::create_dir_all(out).map_err(|e| DatasetError::io(out, e))?;
    let mut algorithms = Vec::new();
    for (entry, set) in entries.iter().zip(sets) {
        let status = match set {
            Ok(set) => {
                let dir = out.join(&entry.name);
                fs::create_dir_all(&dir).map_err(|e| DatasetError::io(&dir, e))?;
                for (name, p) in &set.programs {
                    write_atomic(&dir.join(format!("{name}.py")), print_program(p).as_bytes())?;
                }
                write_atomic(&dir.join("labels.json"), &json_bytes(&set.labels))?;
                write_atomic(&dir.join("trace.txt"), set.provenance().as_bytes())?;
                "ok".to_string()
            }
            Err(e) => format!("error: {e}"),
        };
        algorithms.push(AlgorithmStatus {
            name: entry.name.clone(),
            status,
        });
    }
    let report = DatasetReport {
        seed,
        corpus_hash: hash,
        algorithms,
    };
    write_atomic(&out.join("dataset.json"), &json_bytes(&report))?;
    Ok(report)
}
