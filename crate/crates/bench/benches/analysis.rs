use criterion::{criterion_group, criterion_main, Criterion};
use spherekey::analysis::*;
use spherekey::field::rational;
use spherekey::*;

fn enumeration(c: &mut Criterion) {
    let q = rational(37, 100);
    c.bench_function("exact enumeration, tetra standard", |b| {
        b.iter(|| {
            enumerate_joint_exact(
                ProtocolKind::Tetrahedron,
                &ExactAttack::InterceptResend { q: q.clone(), mix: EnsembleMix::Symmetric },
                None,
            )
        })
    });
    let gentle = EveStrategy::Gentle { q: 0.37, mix: EnsembleMix::Symmetric };
    c.bench_function("numeric enumeration, tetra gentle", |b| {
        b.iter(|| enumerate_joint(ProtocolKind::Tetrahedron, &gentle, &ChannelModel::Ideal))
    });
}

fn thresholds(c: &mut Criterion) {
    c.bench_function("threshold, trine standard", |b| {
        b.iter(|| find_threshold(ProtocolKind::Trine, AttackFamily::Standard))
    });
    c.bench_function("threshold, six-state gentle", |b| {
        b.iter(|| find_threshold(ProtocolKind::SixState, AttackFamily::Gentle))
    });
}

criterion_group!(benches, enumeration, thresholds);
criterion_main!(benches);
