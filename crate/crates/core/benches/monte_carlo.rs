use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stable_ldp::exec::Exec;
use stable_ldp::ldp_harness::{Campaign, CampaignPlan};
use stable_ldp::make_params;
use stable_ldp::sampling::{RngStream, Sampler, SamplerConfig};

fn execs() -> Vec<Exec> {
    if cfg!(feature = "parallel") {
        vec![Exec::Sequential, Exec::Parallel]
    } else {
        vec![Exec::Sequential]
    }
}

fn campaign(c: &mut Criterion) {
    let p = make_params(4.0 / 3.0).unwrap();
    let sampler = Sampler::new(&p, SamplerConfig::with_n(256)).unwrap();
    let mut g = c.benchmark_group("campaign_n256_2000");
    g.sample_size(10);
    for exec in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| Campaign::run(&sampler, CampaignPlan::new(256, 2000, 1), exec).unwrap())
        });
    }
    g.finish();
}

fn excursion_batch(c: &mut Criterion) {
    let p = make_params(1.5).unwrap();
    let sampler = Sampler::new(&p, SamplerConfig::with_n(512)).unwrap();
    let mut g = c.benchmark_group("excursions_n512_1000");
    g.sample_size(10);
    for exec in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| {
                exec.map(1000, |i| {
                    sampler.sample_excursion(&mut RngStream::with_stream(2, i as u64)).values[256]
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, campaign, excursion_batch);
criterion_main!(benches);
