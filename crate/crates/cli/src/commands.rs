use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use qk_core::runtime::execute::trace;
use qk_core::{
    as_unitary_matrix, backend_by_name, bind_args, corpus, execute, extract_composite, observe, parse_operator,
    to_openqasm, ArgValue, Backend, BackendConfig, BoundCall, DiskCache, ExecOptions, JitStats, KernelRegistry,
    PauliOperator, QJit,
};

use crate::args::ArgsFile;
use crate::error::CliError;
use crate::report::{ResultsDocument, Timing};
use crate::{BackendArgs, BenchCommand, CacheCommand, Cli, Command, KernelArgs, RunArgs};

/// Counters of the most recent invocation that compiled through the disk
/// cache, kept next to the entries for `qk cache stats`.
const SESSION_FILE: &str = "last-session.json";

pub fn dispatch(cli: Cli) -> Result<String, CliError> {
    let session = Session::open(cli.no_cache, cli.cache_dir.as_deref());
    let out = match cli.command {
        Command::Compile { file } => session.compile(&file),
        Command::Run(r) => session.run(r),
        Command::Print(k) => session.print(&k),
        Command::ExportOpenqasm(k) => session.openqasm(&k),
        Command::Unitary { kernel, output } => session.unitary(&kernel, output.as_deref()),
        Command::Observe {
            kernel,
            backend,
            operator,
            shots,
            seed,
        } => session.observe(&kernel, &backend, &operator, shots, seed),
        Command::Bench(BenchCommand::Trotter { operator, steps, json }) => bench_trotter(&operator, steps, json),
        Command::Cache(c) => return cache_command(session.disk(), c),
    };
    session.record();
    out
}

struct Session {
    jit: QJit,
}

impl Session {
    fn open(no_cache: bool, dir: Option<&Path>) -> Self {
        let disk = if no_cache {
            None
        } else {
            let root = dir.map(Path::to_path_buf).or_else(DiskCache::default_location);
            if root.is_none() {
                log::warn!("no cache directory available; compiling without the disk cache");
            }
            root.map(DiskCache::new)
        };
        Session {
            jit: QJit::new(Arc::new(KernelRegistry::new()), disk),
        }
    }

    fn disk(&self) -> Option<&DiskCache> {
        self.jit.disk()
    }

    fn registry(&self) -> &KernelRegistry {
        self.jit.registry()
    }

    fn record(&self) {
        let (Some(disk), stats) = (self.disk(), self.jit.stats()) else { return };
        if stats == JitStats::default() {
            return;
        }
        let body = serde_json::to_string_pretty(&stats).expect("stats serialize");
        if let Err(e) = fs::create_dir_all(disk.root()).and_then(|_| fs::write(disk.root().join(SESSION_FILE), body)) {
            log::warn!("could not record session counters: {e}");
        }
    }

    fn load(&self, file: &Path) -> Result<Vec<qk_core::cache::JitOutput>, CliError> {
        let src = read(file)?;
        self.jit.compile_source(&src).map_err(|e| CliError::compile(file, e))
    }

    fn compile(&self, file: &Path) -> Result<String, CliError> {
        let mut out = String::new();
        for o in self.load(file)? {
            writeln!(out, "{} {} {}", o.kernel.name, o.kernel.digest, o.provenance).unwrap();
        }
        Ok(out)
    }

    /// Compiles the file and binds `--kernel` against the args file.
    fn bind(&self, k: &KernelArgs) -> Result<(BoundCall, Option<u64>), CliError> {
        let compiled = self.load(&k.file)?;
        let Some(kernel) = self.registry().get(&k.kernel) else {
            let names: Vec<_> = compiled.iter().map(|o| o.kernel.name.as_str()).collect();
            return Err(CliError::Usage(format!(
                "no kernel `{}` in {} (found: {})",
                k.kernel,
                k.file.display(),
                names.join(", ")
            )));
        };
        let args = match &k.args {
            Some(p) => ArgsFile::load(p)?,
            None => ArgsFile::default(),
        };
        Ok((bind_args(kernel, &args.pack, self.registry())?, args.seed))
    }

    fn run(&self, r: RunArgs) -> Result<String, CliError> {
        let before = self.jit.stats();
        let (bound, file_seed) = self.bind(&r.kernel)?;
        let compiled = self.jit.stats();
        let backend = open_backend(&r.backend)?;
        let opts = ExecOptions {
            mode: r.mode.into(),
            shots: r.shots,
            seed: r.seed.or(file_seed).unwrap_or(0),
            optimize: !r.no_optimize,
        };
        let started = Instant::now();
        let ex = execute(self.registry(), &bound, backend.as_ref(), &opts)?;
        let mut doc = ResultsDocument::new(&r.kernel.kernel, backend.name(), opts.mode, opts.shots, opts.seed, ex);
        for path in &r.observe {
            let op = read_operator(path)?;
            let v = observe(self.registry(), &bound, &op, backend.as_ref(), opts.shots, opts.seed)?;
            doc.expectations.insert(stem(path), v);
        }
        if !r.no_timing {
            doc.timing = Timing {
                parse_ns: compiled.parse_ns - before.parse_ns,
                lower_ns: compiled.lower_ns - before.lower_ns,
                execute_ns: started.elapsed().as_nanos().try_into().unwrap_or(u64::MAX),
            };
        }
        Ok(doc.to_json() + "\n")
    }

    fn print(&self, k: &KernelArgs) -> Result<String, CliError> {
        let (bound, _) = self.bind(k)?;
        let t = trace(self.registry(), &bound)?;
        if !t.composite.is_static() {
            return Ok(t.composite.dump(&t.layout));
        }
        let mut out = String::new();
        for i in t.composite.flatten()? {
            writeln!(out, "{}", i.fmt_with(&t.layout)).unwrap();
        }
        Ok(out)
    }

    fn openqasm(&self, k: &KernelArgs) -> Result<String, CliError> {
        let (bound, _) = self.bind(k)?;
        Ok(to_openqasm(self.registry(), &bound)?)
    }

    fn unitary(&self, k: &KernelArgs, output: Option<&Path>) -> Result<String, CliError> {
        let (bound, _) = self.bind(k)?;
        let m = as_unitary_matrix(self.registry(), &bound)?;
        let text = qk_core::linalg::write_matrix_text(&m).expect("kernel unitaries have power-of-two dimension");
        match output {
            None => Ok(text),
            Some(p) => {
                fs::write(p, text).map_err(|source| CliError::Write {
                    path: p.to_path_buf(),
                    source,
                })?;
                Ok(String::new())
            }
        }
    }

    fn observe(
        &self,
        k: &KernelArgs,
        b: &BackendArgs,
        operator: &Path,
        shots: u64,
        seed: Option<u64>,
    ) -> Result<String, CliError> {
        let (bound, file_seed) = self.bind(k)?;
        let op = read_operator(operator)?;
        let backend = open_backend(b)?;
        let seed = seed.or(file_seed).unwrap_or(0);
        let v = observe(self.registry(), &bound, &op, backend.as_ref(), shots, seed)?;
        Ok(format!("{v}\n"))
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn read_operator(path: &Path) -> Result<PauliOperator, CliError> {
    Ok(parse_operator(&read(path)?)?)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn open_backend(b: &BackendArgs) -> Result<Box<dyn Backend>, CliError> {
    let config = match &b.qpu_config {
        Some(p) => BackendConfig::parse(&read(p)?)?,
        None => BackendConfig::default(),
    };
    Ok(backend_by_name(&b.qpu, config)?)
}

fn bench_trotter(operator: &Path, steps: u32, json: bool) -> Result<String, CliError> {
    let op = read_operator(operator)?;
    let registry = KernelRegistry::new();
    registry
        .compile_source(corpus::TROTTER)
        .map_err(|e| CliError::compile(Path::new("trotter.qk"), e))?;
    let qubits = op.num_qubits().max(1);
    let terms: Vec<ArgValue> = op.split().into_iter().map(ArgValue::pauli).collect();
    let pack = [
        ("q", ArgValue::Qreg(qubits)),
        ("exp_args", ArgValue::List(terms)),
        ("n_steps", ArgValue::Int(steps.into())),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let kernel = registry.get("trotter_circ").expect("bundled trotter kernel");
    let bound = bind_args(kernel, &pack, &registry)?;
    let started = Instant::now();
    let circuit = extract_composite(&registry, &bound, false)?;
    let compose_ns = u64::try_from(started.elapsed().as_nanos()).unwrap_or(u64::MAX);

    let rows = [
        ("qubits", qubits as u64),
        ("terms", op.len() as u64),
        ("steps", steps.into()),
        ("instructions", circuit.instruction_count() as u64),
        ("compose_ns", compose_ns),
    ];
    Ok(if json {
        let obj: serde_json::Map<_, _> = rows.iter().map(|(k, v)| (k.to_string(), (*v).into())).collect();
        serde_json::to_string_pretty(&obj).expect("plain object") + "\n"
    } else {
        rows.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
    })
}

fn cache_command(disk: Option<&DiskCache>, c: CacheCommand) -> Result<String, CliError> {
    let Some(disk) = disk else {
        return Err(CliError::Usage("the cache commands need a cache directory".into()));
    };
    match c {
        CacheCommand::Stats => {
            let s = disk.stats()?;
            let session = fs::read_to_string(disk.root().join(SESSION_FILE))
                .ok()
                .and_then(|t| serde_json::from_str::<JitStats>(&t).ok())
                .unwrap_or_default();
            Ok(format!(
                "location: {}\nentries: {}\nbytes: {}\nmemory_hits: {}\ndisk_hits: {}\nmisses: {}\ncorrupt: {}\n",
                disk.root().display(),
                s.entries,
                s.bytes,
                session.memory_hits,
                session.disk_hits,
                session.misses,
                session.corrupt
            ))
        }
        CacheCommand::Clear => {
            let removed = disk.clear()?;
            let _ = fs::remove_file(disk.root().join(SESSION_FILE));
            Ok(format!("removed {removed} entries from {}\n", disk.root().display()))
        }
    }
}

