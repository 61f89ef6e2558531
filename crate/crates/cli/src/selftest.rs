//! Oracle-equivalence self test run by `assoc-lab selftest`.

use assoc_lab::fields::{field_oracle, FieldEvaluator};
use assoc_lab::seed;
use assoc_lab::{gen_bernoulli, gen_gb, BlockLayout, ModelKind, Result};
use rand::Rng;

/// One named check and how many instances it covered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn flat_checks(instances: usize, master: u64) -> Result<[CheckResult; 3]> {
    let mut amari = 0;
    let mut willshaw = 0;
    let mut dominance = 0;
    for t in 0..instances {
        let mut rng = seed::stream(master, t as u64);
        let dim = rng.random_range(2..=12);
        let m = rng.random_range(1..=8);
        let p = if rng.random_bool(0.5) { 0.2 } else { 0.5 };
        let n = rng.random_range(2..=3);
        let e = gen_bernoulli(dim, p, m, rng.random())?;
        let probe = if rng.random_bool(0.5) {
            e.patterns()[0].clone()
        } else {
            gen_bernoulli(dim, p, 1, rng.random())?.patterns()[0].clone()
        };
        let ev = FieldEvaluator::new(&e);
        let a = ev.amari(&probe, n)?;
        let w = ev.willshaw(&probe, n)?;
        amari += usize::from(a != field_oracle(&e, &probe, n, ModelKind::Amari)?);
        willshaw += usize::from(w != field_oracle(&e, &probe, n, ModelKind::Willshaw)?);
        dominance += usize::from(w.values.iter().zip(&a.values).any(|(x, y)| x > y));
    }
    Ok([
        CheckResult { name: "amari field equals oracle", instances, failures: amari },
        CheckResult { name: "willshaw field equals oracle", instances, failures: willshaw },
        CheckResult { name: "willshaw field <= amari field", instances, failures: dominance },
    ])
}

fn gb_checks(instances: usize, master: u64) -> Result<[CheckResult; 2]> {
    let mut exact = 0;
    let mut bound = 0;
    for t in 0..instances {
        let mut rng = seed::stream(master ^ 0x6B, t as u64);
        let l = rng.random_range(2..=6);
        let c = rng.random_range(1..=3);
        let n = rng.random_range(2..=3).min(l);
        let layout = BlockLayout::new(l, c)?;
        let e = gen_gb(layout, rng.random_range(1..=8), rng.random())?;
        let probe = gen_gb(layout, 1, rng.random())?.patterns()[0].clone();
        let ev = FieldEvaluator::new(&e);
        let f = ev.gb(&probe, n)?;
        exact += usize::from(f != field_oracle(&e, &probe, n, ModelKind::Gb)?);
        for i in 0..layout.dim() {
            if f.values[i] > ev.gb_upper_bound(&probe, n, i)? {
                bound += 1;
                break;
            }
        }
    }
    Ok([
        CheckResult { name: "gb field equals oracle", instances, failures: exact },
        CheckResult { name: "gb field <= gb upper bound", instances, failures: bound },
    ])
}

/// Runs every check on `instances` random instances each.
pub fn run_selftest(instances: usize, master: u64) -> Result<Vec<CheckResult>> {
    let mut out = flat_checks(instances, master)?.to_vec();
    out.extend(gb_checks(instances, master)?);
    Ok(out)
}
