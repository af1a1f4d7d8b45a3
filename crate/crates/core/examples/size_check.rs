use paramodel_core::rules::{closure_check, subcriticality_check, Basis, EquationSpec};
use paramodel_core::suites::{degpres_suite, hopf_suite, prep_suite, tower_suite};

fn main() {
    for spec in [
        EquationSpec::pam_desk(),
        EquationSpec::kpz_desk(),
        EquationSpec::phi4_desk(),
    ] {
        let name = spec.name.clone();
        let t0 = std::time::Instant::now();
        let basis = Basis::generate(spec).unwrap();
        let neg = basis.negative_trees().len();
        let ok = closure_check(&basis).ok();
        let sub = subcriticality_check(&basis);
        println!(
            "{name}: trees={} plus={} negative={} closure_ok={ok} noise_grows={} gen={:?}",
            basis.trees().len(),
            basis.plus_trees().len(),
            neg,
            sub.noise_grows,
            t0.elapsed()
        );
        for (label, report) in [
            ("hopf", hopf_suite(&basis)),
            ("prep(5)", prep_suite(&basis, 5, 42)),
            ("degpres", degpres_suite(&basis, 42)),
            ("tower", tower_suite(&basis, 3, 42)),
        ] {
            let bad: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
            println!(
                "  {label}: passed={} ({} checks) {:?} elapsed={:?}",
                report.passed(),
                report.checks.len(),
                bad.iter().map(|c| (&c.label, &c.witness)).collect::<Vec<_>>(),
                t0.elapsed()
            );
        }
    }
}
