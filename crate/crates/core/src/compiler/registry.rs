//! Compiled kernels, the shared registry and its dependency graph.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lower::{lower, Lowered};
use super::program::Program;
use super::CompileError;
use crate::parser::{parse_module, pretty_print, KernelAst, Param};

/// Bumped whenever the digest recipe or the serialized program layout changes.
pub const DIGEST_FORMAT_VERSION: u32 = 1;
const SEPARATOR: u8 = 0x1f;

/// SHA-256 over the canonical source, the sorted digests of direct
/// dependencies and the format version. Lowercase hex.
pub fn source_digest(canonical: &str, dep_digests: &[String]) -> String {
    let mut sorted: Vec<&String> = dep_digests.iter().collect();
    sorted.sort();
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    for d in sorted {
        h.update([SEPARATOR]);
        h.update(d.as_bytes());
    }
    h.update([SEPARATOR]);
    h.update(format!("qk-format-{DIGEST_FORMAT_VERSION}").as_bytes());
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledKernel {
    pub name: String,
    pub signature: Vec<Param>,
    pub digest: String,
    /// Direct dependencies, sorted by name.
    pub dependencies: Vec<String>,
    pub program: Program,
    /// Canonical pretty-printed source.
    pub source: String,
}

impl CompiledKernel {
    /// Lowers one parsed kernel against known signatures and dependency digests.
    pub fn build(
        ast: &KernelAst,
        signatures: &BTreeMap<String, Vec<Param>>,
        digest_of: impl Fn(&str) -> Option<String>,
    ) -> Result<CompiledKernel, CompileError> {
        let Lowered { program, dependencies } = lower(ast, signatures)?;
        Self::assemble(ast, program, dependencies.into_iter().collect(), digest_of)
    }

    /// Packs an already-lowered program; the digest is recomputed.
    pub fn assemble(
        ast: &KernelAst,
        program: Program,
        dependencies: Vec<String>,
        digest_of: impl Fn(&str) -> Option<String>,
    ) -> Result<CompiledKernel, CompileError> {
        let source = pretty_print(ast);
        let digest = Self::digest_for(&source, &dependencies, digest_of)?;
        Ok(CompiledKernel {
            name: ast.name.clone(),
            signature: ast.params.clone(),
            digest,
            dependencies,
            program,
            source,
        })
    }

    pub fn digest_for(
        source: &str,
        dependencies: &[String],
        digest_of: impl Fn(&str) -> Option<String>,
    ) -> Result<String, CompileError> {
        let deps = dependencies
            .iter()
            .map(|d| {
                digest_of(d).ok_or_else(|| CompileError::UnknownKernel {
                    name: d.clone(),
                    line: 0,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(source_digest(source, &deps))
    }
}

/// Kahn's algorithm over the subgraph reachable from `roots`. Ready nodes are
/// taken in name order. `edges` maps a node to the nodes it depends on.
pub fn topo_sort(edges: &BTreeMap<String, Vec<String>>, roots: &[String]) -> Result<Vec<String>, CompileError> {
    let mut reach = BTreeSet::new();
    let mut stack: Vec<&String> = roots.iter().collect();
    while let Some(n) = stack.pop() {
        if reach.insert(n.clone()) {
            stack.extend(edges.get(n).into_iter().flatten());
        }
    }
    let mut pending: BTreeMap<&String, usize> = reach
        .iter()
        .map(|n| (n, edges.get(n).map_or(0, |d| d.iter().collect::<BTreeSet<_>>().len())))
        .collect();
    let mut ready: BTreeSet<&String> = pending.iter().filter(|(_, &c)| c == 0).map(|(n, _)| *n).collect();
    let mut order = Vec::with_capacity(reach.len());
    while let Some(n) = ready.pop_first() {
        pending.remove(n);
        order.push(n.clone());
        for (m, count) in pending.iter_mut() {
            let deps: BTreeSet<&String> = edges.get(*m).into_iter().flatten().collect();
            if deps.contains(n) {
                *count -= 1;
                if *count == 0 {
                    ready.insert(m);
                }
            }
        }
    }
    if order.len() < reach.len() {
        let stuck: BTreeSet<String> = pending.keys().map(|s| (*s).clone()).collect();
        return Err(CompileError::CyclicDependency(find_cycle(edges, &stuck)));
    }
    Ok(order)
}

/// A cycle among `stuck`, rotated to start at its smallest name.
fn find_cycle(edges: &BTreeMap<String, Vec<String>>, stuck: &BTreeSet<String>) -> Vec<String> {
    let start = stuck.first().cloned().unwrap_or_default();
    let mut path = vec![start];
    loop {
        let cur = path.last().unwrap();
        // Every stuck node has a stuck dependency, so this walk closes a loop.
        let next = edges
            .get(cur)
            .into_iter()
            .flatten()
            .filter(|d| stuck.contains(*d))
            .min()
            .cloned();
        let Some(next) = next else { return path };
        if let Some(pos) = path.iter().position(|p| *p == next) {
            let mut cycle = path.split_off(pos);
            let min = cycle.iter().enumerate().min_by_key(|(_, n)| (*n).clone()).map_or(0, |(i, _)| i);
            cycle.rotate_left(min);
            return cycle;
        }
        path.push(next);
    }
}

/// Thread-safe kernel registry. Reads run concurrently; each registration
/// holds the write lock for its whole duration.
#[derive(Debug, Default)]
pub struct KernelRegistry {
    kernels: RwLock<BTreeMap<String, Arc<CompiledKernel>>>,
}

impl KernelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<Arc<CompiledKernel>> {
        self.kernels.read().expect("registry lock").get(name).cloned()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.kernels.read().expect("registry lock").contains_key(name)
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.kernels.read().expect("registry lock").keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.kernels.read().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn signatures(&self) -> BTreeMap<String, Vec<Param>> {
        self.kernels
            .read()
            .expect("registry lock")
            .iter()
            .map(|(n, k)| (n.clone(), k.signature.clone()))
            .collect()
    }

    /// Parses, lowers and registers every kernel in `source`, returning them
    /// in dependency order.
    pub fn compile_source(&self, source: &str) -> Result<Vec<Arc<CompiledKernel>>, CompileError> {
        let mut guard = self.kernels.write().expect("registry lock");
        let known: BTreeSet<String> = guard.keys().cloned().collect();
        let asts = parse_module(source, &known)?;
        let mut signatures: BTreeMap<String, Vec<Param>> =
            guard.iter().map(|(n, k)| (n.clone(), k.signature.clone())).collect();
        for a in &asts {
            signatures.insert(a.name.clone(), a.params.clone());
        }
        let mut lowered = BTreeMap::new();
        for a in &asts {
            let mut sigs = signatures.clone();
            sigs.remove(&a.name);
            lowered.insert(a.name.clone(), (a, lower(a, &sigs)?));
        }
        let edges: BTreeMap<String, Vec<String>> = lowered
            .iter()
            .map(|(n, (_, l))| (n.clone(), l.dependencies.iter().cloned().collect()))
            .collect();
        let names: Vec<String> = asts.iter().map(|a| a.name.clone()).collect();
        let order = topo_sort(&edges, &names)?;
        let mut out = Vec::new();
        let mut fresh: BTreeMap<String, Arc<CompiledKernel>> = BTreeMap::new();
        for name in order {
            let Some((ast, l)) = lowered.remove(&name) else { continue };
            let k = CompiledKernel::assemble(ast, l.program, l.dependencies.into_iter().collect(), |d| {
                fresh.get(d).or_else(|| guard.get(d)).map(|k| k.digest.clone())
            })?;
            if let Some(old) = guard.get(&name) {
                if old.digest != k.digest {
                    return Err(CompileError::KernelRedefined { name });
                }
                out.push(old.clone());
                continue;
            }
            let k = Arc::new(k);
            fresh.insert(name, k.clone());
            out.push(k);
        }
        guard.extend(fresh);
        Ok(out)
    }

    /// Registers an already compiled kernel (e.g. loaded from the cache).
    /// Its dependencies must be registered first.
    pub fn insert(&self, k: Arc<CompiledKernel>) -> Result<Arc<CompiledKernel>, CompileError> {
        let mut guard = self.kernels.write().expect("registry lock");
        for d in &k.dependencies {
            if !guard.contains_key(d) {
                return Err(CompileError::UnknownKernel { name: d.clone(), line: 0 });
            }
        }
        if let Some(old) = guard.get(&k.name) {
            if old.digest != k.digest {
                return Err(CompileError::KernelRedefined { name: k.name.clone() });
            }
            return Ok(old.clone());
        }
        guard.insert(k.name.clone(), k.clone());
        Ok(k)
    }

    /// `root` and everything it transitively depends on, dependencies first.
    pub fn topo_order(&self, root: &str) -> Result<Vec<String>, CompileError> {
        let guard = self.kernels.read().expect("registry lock");
        if !guard.contains_key(root) {
            return Err(CompileError::UnknownKernel {
                name: root.to_string(),
                line: 0,
            });
        }
        let edges: BTreeMap<String, Vec<String>> =
            guard.iter().map(|(n, k)| (n.clone(), k.dependencies.clone())).collect();
        topo_sort(&edges, &[root.to_string()])
    }
}
