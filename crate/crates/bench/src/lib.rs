//! Fixtures shared by the composition benchmarks.

use qk_core::{bind_args, corpus, ArgPack, ArgValue, BoundCall, KernelRegistry, PauliOperator};

/// A registry holding the compiled kernels of `source`.
pub fn registry(source: &str) -> KernelRegistry {
    let r = KernelRegistry::new();
    r.compile_source(source).expect("bundled kernels compile");
    r
}

pub fn call(r: &KernelRegistry, kernel: &str, args: Vec<(&str, ArgValue)>) -> BoundCall {
    let pack: ArgPack = args.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    bind_args(r.get(kernel).expect("kernel is registered"), &pack, r).expect("arguments bind")
}

/// The Trotter evolution kernel bound to `steps` steps of `op`.
pub fn trotter(op: &PauliOperator, steps: i64) -> (KernelRegistry, BoundCall) {
    let r = registry(corpus::TROTTER);
    let terms = op.split().into_iter().map(ArgValue::pauli).collect();
    let b = call(
        &r,
        "trotter_circ",
        vec![
            ("q", ArgValue::Qreg(op.num_qubits().max(1))),
            ("exp_args", ArgValue::List(terms)),
            ("n_steps", ArgValue::Int(steps)),
        ],
    );
    (r, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qk_core::{extract_composite, parse_operator};

    #[test]
    fn trotter_fixture_matches_the_cli_count() {
        let op = parse_operator(corpus::DEUTERON_H).unwrap();
        let (r, b) = trotter(&op, 1);
        assert_eq!(extract_composite(&r, &b, false).unwrap().instruction_count(), 16);
    }
}
