use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cpcf_core::fuzz::{fuzz_manifest, fuzz_program};
use cpcf_core::interp::equivalent;
use cpcf_core::lang::Program;
use cpcf_core::par::{map_indexed, ExecMode};
use cpcf_core::perturb::perturb_both;
use cpcf_core::rewrite::normalize;

/// Perturb, normalize and verify one program: the per-item work of dataset
/// generation.
fn pipeline(p: &Program, seed: u64) -> bool {
    let m = fuzz_manifest();
    let Ok(v) = perturb_both(p, seed) else {
        return false;
    };
    let Ok((n, _)) = normalize(&v) else {
        return false;
    };
    equivalent(p, &n, &m).is_ok_and(|r| r.is_yes())
}

fn bench(c: &mut Criterion) {
    let programs: Vec<(u64, Program)> = (0..64).map(|i| (i, fuzz_program(99, i))).collect();
    let mut group = c.benchmark_group("perturb_normalize_verify");
    group.sample_size(10);
    for (name, mode) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::new(name, programs.len()), &mode, |b, &mode| {
            b.iter(|| map_indexed(mode, &programs, |(i, p)| pipeline(p, *i)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
