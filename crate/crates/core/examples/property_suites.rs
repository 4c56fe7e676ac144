//! Running the randomized property suites and reading their reports.

use osscalc::harness::{run_default, run_suite, suite_ids, HarnessConfig};

fn main() -> osscalc::Result<()> {
    let config = HarnessConfig::builtin();
    println!("{} suites, config digest {}", suite_ids().len(), &config.digest()[..16]);

    for id in ["axioms", "sandwich", "c-unique", "cstar-min"] {
        let r = run_default(id, config.seed, &config)?;
        println!("{id:<10} trials {:>4}  failures {}  worst slack {:+.2e}", r.trials, r.failures.len(), r.worst_slack);
    }

    let a = run_suite("smith", 10, 7, 4)?;
    let b = run_suite("smith", 10, 7, 4)?;
    println!("reruns identical: {}", a.canonical_json() == b.canonical_json());
    Ok(())
}
