//! Job configuration: parsing, validation with field-path diagnostics, and
//! resolution into core objects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use blocknorm_core::blocks::Block;
use blocknorm_core::multilinear::{finite_type, MultiOperator};
use blocknorm_core::rng;
use blocknorm_core::sampling::random_operator;
use blocknorm_core::seqnorms::{ClassSpec, ClassStack};
use blocknorm_core::spaces::{FiniteLpSpace, Vector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_BUDGET: usize = 8;
pub const DEFAULT_TRUNCATION: usize = 2;
pub const DEFAULT_INSTANCES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    pub spaces: BTreeMap<String, FiniteLpSpace>,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorDef>,
    #[serde(default)]
    pub blocks: BTreeMap<String, BlockDef>,
    /// Lists of class specs such as `"strong:2"`, `"weak:1"` or `"sup"`.
    #[serde(default)]
    pub classes: BTreeMap<String, Vec<String>>,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub identity: f64,
    pub chain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: 1e-12, chain: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDef {
    pub domains: Vec<String>,
    pub codomain: String,
    /// Nested arrays, slot indices first and the codomain index last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<Value>,
    /// Path of a JSON file holding the nested array, relative to the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_type: Option<FiniteTypeDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomDef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteTypeDef {
    pub functionals: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDef {
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKindDef {
    Diagonal,
    Full,
    Equality,
    Explicit,
}

/// A block over zero-based indices `0..bounds[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDef {
    pub kind: BlockKindDef,
    pub bounds: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuples: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Job {
    Norm(NormJob),
    SummingNorm(SummingJob),
    Check(CheckJob),
    Witness(WitnessJob),
}

impl Job {
    pub fn name(&self) -> &str {
        match self {
            Job::Norm(j) => &j.name,
            Job::SummingNorm(j) => &j.name,
            Job::Check(j) => &j.name,
            Job::Witness(j) => &j.name,
        }
    }

    pub fn kind(&self) -> JobKind {
        match self {
            Job::Norm(_) => JobKind::Norm,
            Job::SummingNorm(_) => JobKind::SummingNorm,
            Job::Check(_) => JobKind::Check,
            Job::Witness(_) => JobKind::Witness,
        }
    }

    fn seed_budget(&mut self) -> (&mut Option<u64>, &mut Option<usize>) {
        match self {
            Job::Norm(j) => (&mut j.seed, &mut j.budget),
            Job::SummingNorm(j) => (&mut j.seed, &mut j.budget),
            Job::Check(j) => (&mut j.seed, &mut j.budget),
            Job::Witness(j) => (&mut j.seed, &mut j.budget),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    Norm,
    SummingNorm,
    Check,
    Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormJob {
    pub name: String,
    pub operator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Expected value, compared with the chain tolerance (relative).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummingJob {
    pub name: String,
    pub operator: String,
    pub block: String,
    /// Input classes, one per slot.
    pub x: String,
    /// Output stack, outermost first.
    pub y: String,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessJob {
    pub name: String,
    pub block: String,
    pub x: String,
    pub y: String,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// The job fails unless the best margin reaches this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<f64>,
    /// The job fails if the best margin exceeds this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckJob {
    pub name: String,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    NormDomination,
    IdealInequality,
    FiniteTypeNorm,
    Compatibility,
    Coincidence,
    DiagonalReduction,
    MultipleFormula,
    PartitionFormula,
}

/// One property check run over seeded random instances. Operators are drawn
/// on `domains -> codomain` unless a fixed `operator` is named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub check: CheckKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domains: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    /// Domains of the inner maps `u_k` (ideal inequality).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Vec<String>>,
    /// Codomain of the outer map `v` (ideal inequality).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<[f64; 2]>,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

fn default_instances() -> usize {
    DEFAULT_INSTANCES
}

/// A validation or parse problem at a field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Parses a config, reporting syntax and schema errors with line and column.
pub fn parse(text: &str) -> Result<Config, Diagnostic> {
    serde_json::from_str(text).map_err(|e| {
        Diagnostic::new(format!("line {}, column {}", e.line(), e.column()), e)
    })
}

/// Replaces every `tensor_file` by the inline tensor it refers to.
pub fn inline_tensor_files(config: &mut Config, base: &Path) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for (name, op) in config.operators.iter_mut() {
        if let Some(file) = op.tensor_file.take() {
            let path = format!("operators.{name}.tensor_file");
            match std::fs::read_to_string(base.join(&file)) {
                Ok(text) => match serde_json::from_str::<Value>(&text) {
                    Ok(v) if op.tensor.is_none() => op.tensor = Some(v),
                    Ok(_) => {
                        op.tensor_file = Some(file);
                        diags.push(Diagnostic::new(path, "give either tensor or tensor_file, not both"));
                    }
                    Err(e) => diags.push(Diagnostic::new(path, format!("{file}: line {}, column {}: {e}", e.line(), e.column()))),
                },
                Err(e) => diags.push(Diagnostic::new(path, format!("{file}: {e}"))),
            }
        }
    }
    diags
}

/// Resolved objects of a validated config.
#[derive(Debug, Clone)]
pub struct Model {
    pub spaces: BTreeMap<String, FiniteLpSpace>,
    pub operators: BTreeMap<String, MultiOperator>,
    pub blocks: BTreeMap<String, Block>,
    pub classes: BTreeMap<String, Vec<ClassSpec>>,
}

impl Model {
    pub fn stack(&self, name: &str) -> ClassStack {
        ClassStack::new(self.classes[name].clone()).expect("validated stack")
    }
}

/// Flattens a nested array of the given shape in row-major order.
fn flatten_tensor(v: &Value, shape: &[usize], path: &str, out: &mut Vec<f64>) -> Result<(), Diagnostic> {
    match (shape.split_first(), v) {
        (None, Value::Number(n)) => {
            out.push(n.as_f64().ok_or_else(|| Diagnostic::new(path, "number out of range"))?);
            Ok(())
        }
        (None, _) => Err(Diagnostic::new(path, "expected a number")),
        (Some((len, rest)), Value::Array(items)) => {
            if items.len() != *len {
                return Err(Diagnostic::new(path, format!("expected {len} entries, found {}", items.len())));
            }
            items.iter().enumerate().try_for_each(|(i, item)| flatten_tensor(item, rest, &format!("{path}[{i}]"), out))
        }
        (Some((len, _)), _) => Err(Diagnostic::new(path, format!("expected an array of {len} entries"))),
    }
}

struct Validator<'a> {
    config: &'a Config,
    diags: Vec<Diagnostic>,
    model: Model,
}

impl Validator<'_> {
    fn err(&mut self, path: impl Into<String>, message: impl fmt::Display) {
        self.diags.push(Diagnostic::new(path, message));
    }

    fn space(&mut self, path: &str, name: &str) -> Option<FiniteLpSpace> {
        let found = self.model.spaces.get(name).copied();
        if found.is_none() && !self.config.spaces.contains_key(name) {
            self.err(path, format!("unknown space {name:?}"));
        }
        found
    }

    fn spaces(&mut self, path: &str, names: &[String]) -> Option<Vec<FiniteLpSpace>> {
        let out: Vec<Option<FiniteLpSpace>> =
            names.iter().enumerate().map(|(i, n)| self.space(&format!("{path}[{i}]"), n)).collect();
        out.into_iter().collect()
    }

    fn spaces_section(&mut self) {
        for (name, sp) in &self.config.spaces {
            match FiniteLpSpace::new(sp.dim, sp.exp) {
                Ok(s) => {
                    self.model.spaces.insert(name.clone(), s);
                }
                Err(e) => self.err(format!("spaces.{name}"), e),
            }
        }
    }

    fn operators_section(&mut self) {
        for (name, def) in &self.config.operators {
            let path = format!("operators.{name}");
            let domains = self.spaces(&format!("{path}.domains"), &def.domains);
            let codomain = self.space(&format!("{path}.codomain"), &def.codomain);
            if def.domains.is_empty() {
                self.err(format!("{path}.domains"), "an operator needs at least one domain");
                continue;
            }
            let sources = [def.tensor.is_some(), def.tensor_file.is_some(), def.finite_type.is_some(), def.random.is_some()];
            if sources.iter().filter(|s| **s).count() != 1 {
                self.err(&path, "give exactly one of tensor, tensor_file, finite_type, random");
                continue;
            }
            let (Some(domains), Some(codomain)) = (domains, codomain) else { continue };
            let op = if let Some(t) = &def.tensor {
                let mut shape: Vec<usize> = domains.iter().map(|d| d.dim).collect();
                shape.push(codomain.dim);
                let mut flat = Vec::new();
                match flatten_tensor(t, &shape, &format!("{path}.tensor"), &mut flat) {
                    Ok(()) => MultiOperator::new(domains, codomain, flat).map_err(|e| Diagnostic::new(&path, e)),
                    Err(d) => Err(d),
                }
            } else if let Some(ft) = &def.finite_type {
                if ft.functionals.len() != domains.len() {
                    self.err(
                        format!("{path}.finite_type.functionals"),
                        format!("{} functionals for {} domains", ft.functionals.len(), domains.len()),
                    );
                    continue;
                }
                let phis: Result<Vec<Vector>, Diagnostic> = ft
                    .functionals
                    .iter()
                    .zip(&domains)
                    .enumerate()
                    .map(|(i, (c, d))| {
                        Vector::new(*d, c.clone()).map_err(|e| Diagnostic::new(format!("{path}.finite_type.functionals[{i}]"), e))
                    })
                    .collect();
                let b = Vector::new(codomain, ft.b.clone()).map_err(|e| Diagnostic::new(format!("{path}.finite_type.b"), e));
                match (phis, b) {
                    (Ok(phis), Ok(b)) => finite_type(&phis, &b).map_err(|e| Diagnostic::new(&path, e)),
                    (Err(d), _) | (_, Err(d)) => Err(d),
                }
            } else if let Some(r) = def.random {
                Ok(random_operator(&mut rng::stream(r.seed, 0), &domains, codomain))
            } else {
                Err(Diagnostic::new(format!("{path}.tensor_file"), "tensor file was not loaded"))
            };
            match op {
                Ok(op) => {
                    self.model.operators.insert(name.clone(), op);
                }
                Err(d) => self.diags.push(d),
            }
        }
    }

    fn blocks_section(&mut self) {
        for (name, def) in &self.config.blocks {
            let path = format!("blocks.{name}");
            let built = match def.kind {
                BlockKindDef::Diagonal => Block::diagonal(&def.bounds),
                BlockKindDef::Full => Block::full(&def.bounds),
                BlockKindDef::Equality => match (def.a, def.b) {
                    (Some(a), Some(b)) => Block::equality(a, b, &def.bounds),
                    _ => {
                        self.err(&path, "equality blocks need slots a and b");
                        continue;
                    }
                },
                BlockKindDef::Explicit => {
                    let Some(tuples) = &def.tuples else {
                        self.err(format!("{path}.tuples"), "explicit blocks need a tuple list");
                        continue;
                    };
                    let mut bad = false;
                    for (i, t) in tuples.iter().enumerate() {
                        if t.len() != def.bounds.len() || t.iter().zip(&def.bounds).any(|(j, k)| j >= k) {
                            self.err(format!("{path}.tuples[{i}]"), format!("tuple {t:?} out of bounds {:?}", def.bounds));
                            bad = true;
                        }
                    }
                    if bad {
                        continue;
                    }
                    Block::explicit(&def.bounds, tuples.iter().cloned())
                }
            };
            match built {
                Ok(b) => {
                    self.model.blocks.insert(name.clone(), b);
                }
                Err(e) => self.err(&path, e),
            }
        }
    }

    fn classes_section(&mut self) {
        for (name, list) in &self.config.classes {
            let mut specs = Vec::new();
            for (i, s) in list.iter().enumerate() {
                match s.parse::<ClassSpec>() {
                    Ok(c) => specs.push(c),
                    Err(e) => self.err(format!("classes.{name}[{i}]"), e),
                }
            }
            if specs.len() == list.len() {
                self.model.classes.insert(name.clone(), specs);
            }
        }
    }

    fn class_list(&mut self, path: &str, name: &str, arity: Option<usize>) -> Option<Vec<ClassSpec>> {
        let Some(specs) = self.model.classes.get(name).cloned() else {
            if !self.config.classes.contains_key(name) {
                self.err(path, format!("unknown class list {name:?}"));
            }
            return None;
        };
        if let Some(n) = arity {
            if specs.len() != n {
                self.err(path, format!("class list {name:?} has {} entries, expected {n}", specs.len()));
                return None;
            }
        }
        Some(specs)
    }

    fn stack(&mut self, path: &str, name: &str, arity: Option<usize>) -> Option<ClassStack> {
        let specs = self.class_list(path, name, arity)?;
        match ClassStack::new(specs) {
            Ok(s) => Some(s),
            Err(e) => {
                self.err(path, format!("class list {name:?}: {e}"));
                None
            }
        }
    }

    fn block(&mut self, path: &str, name: &str, arity: Option<usize>) -> Option<Block> {
        let Some(b) = self.model.blocks.get(name).cloned() else {
            if !self.config.blocks.contains_key(name) {
                self.err(path, format!("unknown block {name:?}"));
            }
            return None;
        };
        if let Some(n) = arity {
            if b.arity() != n {
                self.err(path, format!("block {name:?} has arity {}, expected {n}", b.arity()));
                return None;
            }
        }
        Some(b)
    }

    fn operator(&mut self, path: &str, name: &str) -> Option<MultiOperator> {
        let op = self.model.operators.get(name).cloned();
        if op.is_none() && !self.config.operators.contains_key(name) {
            self.err(path, format!("unknown operator {name:?}"));
        }
        op
    }

    fn jobs_section(&mut self) {
        let mut names = BTreeSet::new();
        for (i, job) in self.config.jobs.iter().enumerate() {
            let path = format!("jobs[{i}]");
            if !names.insert(job.name().to_string()) {
                self.err(format!("{path}.name"), format!("duplicate job name {:?}", job.name()));
            }
            match job {
                Job::Norm(j) => {
                    self.operator(&format!("{path}.operator"), &j.operator);
                }
                Job::SummingNorm(j) => {
                    let n = self.operator(&format!("{path}.operator"), &j.operator).map(|t| t.arity());
                    self.block(&format!("{path}.block"), &j.block, n);
                    self.class_list(&format!("{path}.x"), &j.x, n);
                    self.stack(&format!("{path}.y"), &j.y, n);
                }
                Job::Witness(j) => {
                    let n = self.block(&format!("{path}.block"), &j.block, None).map(|b| b.arity());
                    self.class_list(&format!("{path}.x"), &j.x, n);
                    self.stack(&format!("{path}.y"), &j.y, n);
                }
                Job::Check(j) => {
                    if j.instances == 0 {
                        self.err(format!("{path}.instances"), "at least one instance is required");
                    }
                    for (c, spec) in j.checks.iter().enumerate() {
                        self.check_spec(&format!("{path}.checks[{c}]"), spec);
                    }
                }
            }
        }
    }

    fn require<'b, T>(&mut self, path: &str, field: &str, v: &'b Option<T>) -> Option<&'b T> {
        if v.is_none() {
            self.err(format!("{path}.{field}"), "required for this check");
        }
        v.as_ref()
    }

    /// Arity of the operators a check draws or names.
    fn check_operator_arity(&mut self, path: &str, spec: &CheckSpec) -> Option<usize> {
        if let Some(name) = &spec.operator {
            return self.operator(&format!("{path}.operator"), name).map(|t| t.arity());
        }
        let domains = self.require(path, "domains", &spec.domains)?.clone();
        let codomain = self.require(path, "codomain", &spec.codomain)?.clone();
        let d = self.spaces(&format!("{path}.domains"), &domains);
        let c = self.space(&format!("{path}.codomain"), &codomain);
        if domains.is_empty() {
            self.err(format!("{path}.domains"), "at least one domain is required");
            return None;
        }
        c.and(d).map(|d| d.len())
    }

    fn check_spec(&mut self, path: &str, spec: &CheckSpec) {
        use CheckKind::*;
        let needs_operator = spec.check != Compatibility;
        let n = if needs_operator {
            self.check_operator_arity(path, spec)
        } else {
            self.require(path, "block", &spec.block).cloned().and_then(|b| {
                self.block(&format!("{path}.block"), &b, None).map(|b| b.arity())
            })
        };
        let with_classes = matches!(spec.check, NormDomination | IdealInequality | FiniteTypeNorm | Compatibility | Coincidence);
        if with_classes {
            if let Some(x) = self.require(path, "x", &spec.x).cloned() {
                self.class_list(&format!("{path}.x"), &x, n);
            }
            if let Some(y) = self.require(path, "y", &spec.y).cloned() {
                self.stack(&format!("{path}.y"), &y, n);
            }
        }
        if matches!(spec.check, NormDomination | IdealInequality | FiniteTypeNorm) {
            if let Some(b) = self.require(path, "block", &spec.block).cloned() {
                self.block(&format!("{path}.block"), &b, n);
            }
        }
        match spec.check {
            IdealInequality => {
                if spec.operator.is_some() {
                    self.err(format!("{path}.operator"), "ideal inequality draws its own operators; give domains and codomain");
                }
                if let Some(inner) = self.require(path, "inner", &spec.inner).cloned() {
                    if let Some(inner) = self.spaces(&format!("{path}.inner"), &inner) {
                        if Some(inner.len()) != n {
                            self.err(format!("{path}.inner"), format!("{} inner spaces for arity {n:?}", inner.len()));
                        }
                    }
                }
                if let Some(outer) = self.require(path, "outer", &spec.outer).cloned() {
                    self.space(&format!("{path}.outer"), &outer);
                }
            }
            Coincidence => {
                if n.is_some_and(|n| n != 2) {
                    self.err(path, "coincidence needs bilinear operators");
                }
                if let Some([c1, c2]) = spec.constants {
                    if !(c1 > 0.0 && c2 > 0.0) {
                        self.err(format!("{path}.constants"), "constants must be positive");
                    }
                } else if let (Some(x), Some(y)) = (&spec.x, &spec.y) {
                    if let (Some(xs), Some(ys)) = (self.model.classes.get(x), self.model.classes.get(y)) {
                        let l1 = ClassSpec::Strong(1.0);
                        if xs[..] != [l1, l1] || ys[..] != [l1, l1] {
                            self.err(format!("{path}.constants"), "constants are required outside the strong:1 regime");
                        }
                    }
                }
            }
            DiagonalReduction => {
                if let Some(q) = self.require(path, "q", &spec.q).cloned() {
                    if q.len() != 1 || ClassSpec::strong(q[0]).is_err() {
                        self.err(format!("{path}.q"), "expected a single exponent q >= 1");
                    }
                }
                if let Some(z) = self.require(path, "z", &spec.z).cloned() {
                    match z.parse::<ClassSpec>() {
                        Ok(zs) if zs.is_weak() && n.is_some_and(|n| n > 2) => self.err(
                            format!("{path}.z"),
                            blocknorm_core::Error::UnsupportedClassPosition { position: 1, depth: n.unwrap_or(0) },
                        ),
                        Ok(_) => {}
                        Err(e) => self.err(format!("{path}.z"), e),
                    }
                }
            }
            MultipleFormula | PartitionFormula => {
                let want = if spec.check == PartitionFormula { Some(2) } else { n };
                if spec.check == PartitionFormula && n.is_some_and(|n| n != 3) {
                    self.err(path, "partition formula needs trilinear operators");
                }
                if let Some(q) = self.require(path, "q", &spec.q).cloned() {
                    if Some(q.len()) != want || q.iter().any(|p| ClassSpec::strong(*p).is_err()) {
                        self.err(format!("{path}.q"), format!("expected {want:?} exponents, each >= 1"));
                    }
                }
            }
            _ => {}
        }
    }
}

/// Checks every shape, exponent, reference and block-bound constraint.
pub fn validate(config: &Config) -> Result<Model, Vec<Diagnostic>> {
    let mut v = Validator {
        config,
        diags: Vec::new(),
        model: Model {
            spaces: BTreeMap::new(),
            operators: BTreeMap::new(),
            blocks: BTreeMap::new(),
            classes: BTreeMap::new(),
        },
    };
    if let Some(t) = config.tolerances {
        if !(t.identity >= 0.0 && t.chain >= 0.0) {
            v.err("tolerances", "tolerances must be nonnegative");
        }
    }
    v.spaces_section();
    v.operators_section();
    v.blocks_section();
    v.classes_section();
    v.jobs_section();
    if v.diags.is_empty() {
        Ok(v.model)
    } else {
        Err(v.diags)
    }
}

/// Values supplied outside the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub env_seed: Option<u64>,
    pub budget: Option<usize>,
    pub tol_identity: Option<f64>,
    pub tol_chain: Option<f64>,
}

/// Fills in every seed, budget and tolerance so the config alone reproduces
/// the run. Precedence: job field, command-line flag, config top level,
/// `BLOCKNORM_SEED` (seeds only), built-in default.
pub fn resolve(mut config: Config, o: &Overrides) -> Config {
    let seed = o.seed.or(config.seed).or(o.env_seed).unwrap_or(0);
    let budget = o.budget.or(config.budget).unwrap_or(DEFAULT_BUDGET);
    let base = config.tolerances.unwrap_or_default();
    config.tolerances = Some(Tolerances {
        identity: o.tol_identity.unwrap_or(base.identity),
        chain: o.tol_chain.unwrap_or(base.chain),
    });
    config.seed = Some(seed);
    config.budget = Some(budget);
    for job in &mut config.jobs {
        let (s, b) = job.seed_budget();
        if s.is_none() || o.seed.is_some() {
            *s = Some(o.seed.unwrap_or(s.unwrap_or(seed)));
        }
        if b.is_none() || o.budget.is_some() {
            *b = Some(o.budget.unwrap_or(b.unwrap_or(budget)));
        }
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "spaces": {"E": {"dim": 2, "p": 1}, "R": {"dim": 1, "p": "inf"}},
        "operators": {"A": {"domains": ["E", "E"], "codomain": "R", "tensor": [[[1], [0]], [[0], [1]]]}},
        "blocks": {"D": {"kind": "diagonal", "bounds": [3, 3]}},
        "classes": {"X": ["strong:1", "strong:1"], "Y": ["strong:2", "sup"]},
        "jobs": [{"kind": "summing-norm", "name": "d", "operator": "A", "block": "D", "x": "X", "y": "Y"}]
    }"#;

    #[test]
    fn well_formed_config_validates() {
        let c = parse(GOOD).unwrap();
        let m = validate(&c).unwrap();
        assert_eq!(m.operators["A"].coeffs, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_bounds_tuple_is_named() {
        let text = GOOD.replace(
            r#""D": {"kind": "diagonal", "bounds": [3, 3]}"#,
            r#""D": {"kind": "explicit", "bounds": [2, 2], "tuples": [[0, 1], [2, 0]]}"#,
        );
        let diags = validate(&parse(&text).unwrap()).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].path, "blocks.D.tuples[1]");
        assert!(diags[0].message.contains("[2, 0]"));
    }

    #[test]
    fn weak_outer_class_is_rejected() {
        let text = GOOD.replace(r#""Y": ["strong:2", "sup"]"#, r#""Y": ["weak:2", "sup"]"#);
        let diags = validate(&parse(&text).unwrap()).unwrap_err();
        assert_eq!(diags[0].path, "jobs[0].y");
        assert!(diags[0].message.contains("weak class at stack position 0"), "{}", diags[0].message);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let d = parse("{\n  \"spaces\": {,}\n}").unwrap_err();
        assert!(d.path.starts_with("line 2"), "{}", d.path);
    }

    #[test]
    fn tensor_shape_is_checked() {
        let text = GOOD.replace("[[[1], [0]], [[0], [1]]]", "[[[1], [0]], [[0]]]");
        let diags = validate(&parse(&text).unwrap()).unwrap_err();
        assert_eq!(diags[0].path, "operators.A.tensor[1]");
    }

    #[test]
    fn resolution_fills_seeds_and_budgets() {
        let c = resolve(parse(GOOD).unwrap(), &Overrides { env_seed: Some(9), ..Default::default() });
        let Job::SummingNorm(j) = &c.jobs[0] else { panic!() };
        assert_eq!((j.seed, j.budget), (Some(9), Some(DEFAULT_BUDGET)));
        let c = resolve(c, &Overrides { seed: Some(4), ..Default::default() });
        let Job::SummingNorm(j) = &c.jobs[0] else { panic!() };
        assert_eq!(j.seed, Some(4));
    }
}
