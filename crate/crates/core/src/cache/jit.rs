//! The just-in-time pipeline: parse and canonicalize, remember the rewritten
//! source per kernel, hash with dependency digests, then load the program
//! from memory or disk or lower it and store it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::store::{CacheEntry, DiskCache};
use crate::compiler::{lower, referenced_kernels, topo_sort, CompileError, CompiledKernel, KernelRegistry};
use crate::parser::{parse_module, pretty_print, Param};

/// Where a compiled kernel came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Memory,
    Disk,
    Miss,
}

impl Provenance {
    pub fn is_hit(self) -> bool {
        self != Provenance::Miss
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Memory => "hit (memory)",
            Provenance::Disk => "hit (disk)",
            Provenance::Miss => "miss",
        })
    }
}

#[derive(Clone, Debug)]
pub struct JitOutput {
    pub kernel: Arc<CompiledKernel>,
    pub provenance: Provenance,
}

/// Session counters. `parses` counts module parses and `lowerings` counts
/// kernels lowered; a warm recompile leaves both unchanged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JitStats {
    pub parses: u64,
    pub lowerings: u64,
    pub memory_hits: u64,
    pub disk_hits: u64,
    pub misses: u64,
    pub corrupt: u64,
    /// Wall time spent parsing and lowering (including cache lookups).
    pub parse_ns: u64,
    pub lower_ns: u64,
}

#[derive(Default)]
struct Counters {
    parses: AtomicU64,
    lowerings: AtomicU64,
    memory_hits: AtomicU64,
    disk_hits: AtomicU64,
    misses: AtomicU64,
    corrupt: AtomicU64,
    parse_ns: AtomicU64,
    lower_ns: AtomicU64,
}

fn bump(c: &AtomicU64) {
    c.fetch_add(1, Ordering::Relaxed);
}

fn add_elapsed(c: &AtomicU64, since: Instant) {
    c.fetch_add(since.elapsed().as_nanos().try_into().unwrap_or(u64::MAX), Ordering::Relaxed);
}

#[derive(Default)]
struct Memo {
    /// Raw module text to the kernels it defines, in dependency order.
    modules: HashMap<String, Vec<String>>,
    /// Canonical rewritten source per kernel name.
    rewritten: HashMap<String, String>,
    programs: HashMap<String, Arc<CompiledKernel>>,
}

pub struct QJit {
    registry: Arc<KernelRegistry>,
    disk: Option<DiskCache>,
    memo: Mutex<Memo>,
    counters: Counters,
}

impl QJit {
    /// `disk = None` keeps only the in-memory layer.
    pub fn new(registry: Arc<KernelRegistry>, disk: Option<DiskCache>) -> Self {
        QJit {
            registry,
            disk,
            memo: Mutex::default(),
            counters: Counters::default(),
        }
    }

    pub fn registry(&self) -> &Arc<KernelRegistry> {
        &self.registry
    }

    pub fn disk(&self) -> Option<&DiskCache> {
        self.disk.as_ref()
    }

    pub fn stats(&self) -> JitStats {
        let c = &self.counters;
        let get = |a: &AtomicU64| a.load(Ordering::Relaxed);
        JitStats {
            parses: get(&c.parses),
            lowerings: get(&c.lowerings),
            memory_hits: get(&c.memory_hits),
            disk_hits: get(&c.disk_hits),
            misses: get(&c.misses),
            corrupt: get(&c.corrupt),
            parse_ns: get(&c.parse_ns),
            lower_ns: get(&c.lower_ns),
        }
    }

    /// The canonical source recorded for `name`, if it was compiled here.
    pub fn rewritten_source(&self, name: &str) -> Option<String> {
        self.memo.lock().expect("jit memo").rewritten.get(name).cloned()
    }

    /// Compiles every kernel in `source` and registers it. Results are in
    /// dependency order.
    pub fn compile_source(&self, source: &str) -> Result<Vec<JitOutput>, CompileError> {
        let mut memo = self.memo.lock().expect("jit memo");
        if let Some(names) = memo.modules.get(source) {
            let known: Option<Vec<_>> = names.iter().map(|n| self.registry.get(n)).collect();
            if let Some(kernels) = known {
                return Ok(kernels
                    .into_iter()
                    .map(|kernel| {
                        bump(&self.counters.memory_hits);
                        JitOutput {
                            kernel,
                            provenance: Provenance::Memory,
                        }
                    })
                    .collect());
            }
        }

        bump(&self.counters.parses);
        let started = Instant::now();
        let existing = self.registry.names();
        let parsed = parse_module(source, &existing);
        add_elapsed(&self.counters.parse_ns, started);
        let asts = parsed?;
        let started = Instant::now();
        let mut all_names = existing;
        all_names.extend(asts.iter().map(|a| a.name.clone()));
        let mut signatures: BTreeMap<String, Vec<Param>> = self.registry.signatures();
        let mut edges = BTreeMap::new();
        for a in &asts {
            signatures.insert(a.name.clone(), a.params.clone());
            edges.insert(a.name.clone(), referenced_kernels(a, &all_names).into_iter().collect::<Vec<_>>());
        }
        let roots: Vec<String> = asts.iter().map(|a| a.name.clone()).collect();

        let resolved = self.resolve(&mut memo, &asts, &signatures, &edges, &roots);
        add_elapsed(&self.counters.lower_ns, started);
        let out = resolved?;
        memo.modules.insert(source.to_string(), out.iter().map(|o| o.kernel.name.clone()).collect());
        Ok(out)
    }

    fn resolve(
        &self,
        memo: &mut Memo,
        asts: &[crate::parser::KernelAst],
        signatures: &BTreeMap<String, Vec<Param>>,
        edges: &BTreeMap<String, Vec<String>>,
        roots: &[String],
    ) -> Result<Vec<JitOutput>, CompileError> {
        let by_name: BTreeMap<&str, _> = asts.iter().map(|a| (a.name.as_str(), a)).collect();
        let mut fresh: BTreeMap<String, Arc<CompiledKernel>> = BTreeMap::new();
        let mut out = Vec::new();
        for name in topo_sort(edges, roots)? {
            let Some(ast) = by_name.get(name.as_str()) else { continue };
            let canonical = pretty_print(ast);
            memo.rewritten.insert(name.clone(), canonical.clone());
            let digest_of = |d: &str| {
                fresh
                    .get(d)
                    .map(|k| k.digest.clone())
                    .or_else(|| self.registry.get(d).map(|k| k.digest.clone()))
            };
            let deps = edges[&name].clone();
            let digest = CompiledKernel::digest_for(&canonical, &deps, digest_of)?;

            let (kernel, provenance) = if let Some(k) = memo.programs.get(&digest) {
                bump(&self.counters.memory_hits);
                (k.clone(), Provenance::Memory)
            } else if let Some(k) = self.load(ast, &deps, &digest, digest_of) {
                bump(&self.counters.disk_hits);
                (Arc::new(k), Provenance::Disk)
            } else {
                bump(&self.counters.lowerings);
                bump(&self.counters.misses);
                let mut sigs = signatures.clone();
                sigs.remove(&name);
                let l = lower(ast, &sigs)?;
                let k = CompiledKernel::assemble(ast, l.program, l.dependencies.into_iter().collect(), digest_of)?;
                debug_assert_eq!(k.digest, digest, "syntax scan and lowering disagree on dependencies");
                self.store(&k);
                (Arc::new(k), Provenance::Miss)
            };
            let kernel = self.registry.insert(kernel)?;
            memo.programs.insert(kernel.digest.clone(), kernel.clone());
            fresh.insert(name, kernel.clone());
            out.push(JitOutput { kernel, provenance });
        }
        Ok(out)
    }

    fn load(
        &self,
        ast: &crate::parser::KernelAst,
        deps: &[String],
        digest: &str,
        digest_of: impl Fn(&str) -> Option<String>,
    ) -> Option<CompiledKernel> {
        let disk = self.disk.as_ref()?;
        let loaded = disk
            .read(digest)
            .and_then(|e| e.map(|e| e.program()).transpose())
            .map(|p| p.map(|p| CompiledKernel::assemble(ast, p, deps.to_vec(), digest_of)));
        match loaded {
            Ok(Some(Ok(k))) if k.digest == digest => Some(k),
            Ok(None) => None,
            Ok(Some(_)) => {
                bump(&self.counters.corrupt);
                log::warn!("cache entry {digest} does not match its kernel; recompiling");
                None
            }
            Err(e) => {
                bump(&self.counters.corrupt);
                log::warn!("{e}; recompiling");
                None
            }
        }
    }

    fn store(&self, k: &CompiledKernel) {
        let Some(disk) = &self.disk else { return };
        if let Err(e) = CacheEntry::new(&k.digest, &k.program).and_then(|e| disk.write(&e)) {
            log::warn!("could not write cache entry for `{}`: {e}", k.name);
        }
    }

    /// Names of kernels compiled through this instance.
    pub fn compiled_names(&self) -> BTreeSet<String> {
        self.memo.lock().expect("jit memo").rewritten.keys().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn jit(dir: Option<&std::path::Path>) -> QJit {
        QJit::new(Arc::new(KernelRegistry::new()), dir.map(DiskCache::new))
    }

    #[test]
    fn warm_recompile_skips_parse_and_lowering() {
        let j = jit(None);
        let first = j.compile_source(corpus::BELL).unwrap();
        assert_eq!(first[0].provenance, Provenance::Miss);
        let before = j.stats();
        let second = j.compile_source(corpus::BELL).unwrap();
        assert_eq!(second[0].provenance, Provenance::Memory);
        let after = j.stats();
        assert_eq!(after.parses, before.parses);
        assert_eq!(after.lowerings, before.lowerings);
        assert_eq!(after.memory_hits, 1);
        assert!(Arc::ptr_eq(&first[0].kernel, &second[0].kernel));
    }

    #[test]
    fn reformatted_source_hits_memory_without_lowering() {
        let j = jit(None);
        j.compile_source(corpus::BELL).unwrap();
        let spaced = corpus::BELL.replace("H(q[0])", "H( q[0] )  # same gate");
        let out = j.compile_source(&spaced).unwrap();
        assert_eq!(out[0].provenance, Provenance::Memory);
        assert_eq!(j.stats().parses, 2);
        assert_eq!(j.stats().lowerings, 1);
    }

    #[test]
    fn new_session_hits_disk_with_equal_program() {
        let dir = tempfile::tempdir().unwrap();
        let cold = jit(Some(dir.path()));
        let a = cold.compile_source(corpus::UCC1).unwrap();
        assert!(a.iter().all(|o| o.provenance == Provenance::Miss));
        let warm = jit(Some(dir.path()));
        let b = warm.compile_source(corpus::UCC1).unwrap();
        assert!(b.iter().all(|o| o.provenance == Provenance::Disk));
        assert_eq!(warm.stats().lowerings, 0);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*x.kernel, *y.kernel);
        }
    }

    #[test]
    fn corrupt_entry_falls_back_to_compile() {
        let dir = tempfile::tempdir().unwrap();
        let cold = jit(Some(dir.path()));
        let k = cold.compile_source(corpus::BELL).unwrap().remove(0).kernel;
        let path = DiskCache::new(dir.path()).path_for(&k.digest).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, bytes).unwrap();

        let warm = jit(Some(dir.path()));
        let out = warm.compile_source(corpus::BELL).unwrap();
        assert_eq!(out[0].provenance, Provenance::Miss);
        assert_eq!(warm.stats().corrupt, 1);
        assert_eq!(*out[0].kernel, *k);
        // The rewrite repaired the entry.
        assert_eq!(jit(Some(dir.path())).compile_source(corpus::BELL).unwrap()[0].provenance, Provenance::Disk);
    }

    #[test]
    fn dependency_edit_changes_root_digest() {
        let j1 = jit(None);
        let d1 = j1.compile_source(corpus::DAG).unwrap();
        let edited = corpus::DAG.replace("H(q[0])", "X(q[0])");
        let j2 = jit(None);
        let d2 = j2.compile_source(&edited).unwrap();
        let digest = |v: &[JitOutput], n: &str| v.iter().find(|o| o.kernel.name == n).unwrap().kernel.digest.clone();
        assert_ne!(digest(&d1, "a"), digest(&d2, "a"));
        assert_ne!(digest(&d1, "c"), digest(&d2, "c"));
        assert_ne!(digest(&d1, "d"), digest(&d2, "d"));
        assert_eq!(digest(&d1, "b"), digest(&d2, "b"));
        assert_eq!(j1.rewritten_source("a").unwrap(), "def a(q: qreg):\n    H(q[0])\n");
    }

    #[test]
    fn angle_change_is_a_miss() {
        let j = jit(None);
        j.compile_source(corpus::DAG).unwrap();
        let other = QJit::new(Arc::new(KernelRegistry::new()), None);
        let out = other.compile_source(&corpus::DAG.replace("0.5", "0.25")).unwrap();
        let c = out.iter().find(|o| o.kernel.name == "c").unwrap();
        let orig = j.registry().get("c").unwrap();
        assert_ne!(c.kernel.digest, orig.digest);
    }

    #[test]
    fn agrees_with_plain_registry() {
        for (name, src) in corpus::KERNEL_FILES {
            let plain = KernelRegistry::new();
            let want = plain.compile_source(src).unwrap();
            let got = jit(None).compile_source(src).unwrap();
            assert_eq!(want.len(), got.len(), "{name}");
            for (w, g) in want.iter().zip(&got) {
                assert_eq!(**w, *g.kernel, "{name}");
            }
        }
    }

    #[test]
    fn cycle_is_reported() {
        let src = "def a(q: qreg):\n    b(q)\ndef b(q: qreg):\n    a(q)\n";
        assert!(matches!(jit(None).compile_source(src), Err(CompileError::CyclicDependency(_))));
    }
}
